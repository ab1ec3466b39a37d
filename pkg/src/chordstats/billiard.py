"""Free-path sampling by unfolding billiard motion onto a straight line.

Specular reflection in the box is equivalent, after reflecting the box
instead of the trajectory, to straight-line motion in R^n; bounce lengths
become gaps between consecutive crossings of the grid planes x_i = k*a_i.
So the simulator never reflects anything: per axis the crossing times form
an arithmetic progression, and a merge of the n progressions (plus dropping
coincident corner hits) yields the bounce lengths directly.

Two termination rules are supported: travel a fixed total distance
(`sample_spreading`, per-particle bounce counts vary, which is this model's
weighting) and perform a fixed number of bounces (`sample_absorption`,
every particle contributes equally).

The leading partial segment (start point to first crossing) is not a bounce
length -- the particle did not start on a wall -- and the trailing segment
beyond the distance budget is incomplete; both are discarded.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import (
    Box,
    BounceCount,
    FixedStart,
    SampleSet,
    StartPolicy,
    TotalDistance,
    TrajectoryConfig,
    UniformStart,
    direction_draw_count,
    directions_from_uniforms,
    particle_uniforms,
)

__all__ = [
    "CrossingEvent",
    "unfold_crossings",
    "trajectory_gaps",
    "iter_spreading_gaps",
    "iter_absorption_gaps",
    "sample_spreading",
    "sample_absorption",
]

# Two crossings closer than this (relative to the crossing time) are one
# corner/edge hit: a single bounce event, not a zero-length free path.
MERGE_RTOL = 1e-12


@dataclass(frozen=True)
class CrossingEvent:
    """A grid-plane crossing of the unfolded ray: arc-length time + axis."""

    time: float
    axis: int


def _axis_progression(a: float, p: float, v: float, horizon: float):
    """First-plane index, step sign and crossing count for one axis.

    Crossing k (k = 0, 1, ...) happens at time (a*(m0 + s*k) - p)/v, computed
    straight from the integer plane index so there is no additive drift over
    millions of crossings.  Returns (m0, s, count) with count = number of
    crossings in (0, horizon].
    """
    if v == 0.0:
        return 0.0, 1.0, 0
    if v > 0.0:
        m0, s = math.floor(p / a) + 1.0, 1.0
    else:
        m0, s = math.ceil(p / a) - 1.0, -1.0
    d0 = s * (a * m0 - p)  # axis distance to the first plane, in (0, a]
    av = abs(v)
    if d0 > horizon * av:
        return m0, s, 0
    return m0, s, int(math.floor((horizon * av - d0) / a)) + 1


def _crossing_time_matrix(sides, P, V, horizon) -> np.ndarray:
    """Sorted crossing times per particle, +inf padded.

    P, V: (m, n) starts and unit directions; horizon: scalar or (m,) array.
    Row r holds every crossing time of ray P[r] + t V[r] with the planes
    x_i = k * a_i in (0, horizon_r], ascending, padded with +inf.
    """
    P = np.asarray(P, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    m, n = V.shape
    hz = np.broadcast_to(np.asarray(horizon, dtype=np.float64), (m,))
    blocks = []
    for i in range(n):
        a = sides[i]
        v = V[:, i]
        p = P[:, i]
        moving = v != 0.0
        s = np.where(v > 0.0, 1.0, -1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            m0 = np.where(v > 0.0, np.floor(p / a) + 1.0, np.ceil(p / a) - 1.0)
        d0 = s * (a * m0 - p)
        av = np.abs(v)
        cnt = np.zeros(m, dtype=np.int64)
        ok = moving & (d0 <= hz * av)
        cnt[ok] = np.floor((hz[ok] * av[ok] - d0[ok]) / a).astype(np.int64) + 1
        kmax = int(cnt.max())
        if kmax == 0:
            continue
        ks = np.arange(kmax, dtype=np.float64)
        plane = a * (m0[:, None] + s[:, None] * ks)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (plane - p[:, None]) / v[:, None]
        t[ks[None, :] >= cnt[:, None]] = np.inf
        blocks.append(t)
    if not blocks:
        return np.full((m, 1), np.inf)
    T = np.hstack(blocks)
    T.sort(axis=1)
    return T


def _gaps_between_crossings(T: np.ndarray) -> np.ndarray:
    """Flat array of bounce lengths from sorted crossing times (row-major).

    Keeps only differences between consecutive finite times and drops
    corner-merged near-zero gaps.  The leading segment never appears because
    differencing starts at the first crossing.
    """
    if T.shape[1] < 2:
        return np.empty(0)
    nxt = T[:, 1:]
    with np.errstate(invalid="ignore"):
        g = nxt - T[:, :-1]
    valid = np.isfinite(nxt)
    g = g[valid]
    bases = nxt[valid]
    return g[g > bases * MERGE_RTOL]


def _first_n_gaps(T: np.ndarray, n_gaps: int) -> tuple[np.ndarray, np.ndarray]:
    """First `n_gaps` merged gaps per row; also reports rows that fell short."""
    nxt = T[:, 1:]
    with np.errstate(invalid="ignore"):
        g = nxt - T[:, :-1]
    finite = np.isfinite(nxt)
    real = finite & (g > np.where(finite, nxt, 0.0) * MERGE_RTOL)
    cum = np.cumsum(real, axis=1)
    short = cum[:, -1] < n_gaps if g.shape[1] else np.ones(T.shape[0], bool)
    take = real & (cum <= n_gaps)
    take[short] = False
    return g[take], short


# --- single-trajectory API --------------------------------------------------

def unfold_crossings(box: Box, config: TrajectoryConfig) -> list[CrossingEvent]:
    """Merged, time-sorted grid-plane crossings for one trajectory.

    Stops at the distance budget for `TotalDistance`, or after n+1 events
    (enough to cut n bounce lengths) for `BounceCount`.  Axes whose velocity
    component is zero contribute no events; the all-zero direction is
    rejected upstream by `TrajectoryConfig`.
    """
    config.validate_in(box)
    sides = box.sides
    p = np.asarray(config.start)
    v = np.asarray(config.direction)

    if isinstance(config.termination, TotalDistance):
        horizon = config.termination.r
        needed = None
    else:
        needed = config.termination.n + 1
        rate = sum(abs(vi) / ai for vi, ai in zip(v, sides))
        horizon = (needed + 4 * box.dimension + 8) / rate

    while True:
        times = []
        axes = []
        for i in range(box.dimension):
            m0, s, cnt = _axis_progression(sides[i], p[i], v[i], horizon)
            if cnt == 0:
                continue
            ks = np.arange(cnt, dtype=np.float64)
            times.append((sides[i] * (m0 + s * ks) - p[i]) / v[i])
            axes.append(np.full(cnt, i, dtype=np.int64))
        if not times:
            return []
        t_all = np.concatenate(times)
        ax_all = np.concatenate(axes)
        order = np.argsort(t_all, kind="stable")
        t_all, ax_all = t_all[order], ax_all[order]
        merged: list[CrossingEvent] = []
        last = -math.inf
        for t, ax in zip(t_all, ax_all):
            if merged and (t - last) <= t * MERGE_RTOL:
                continue  # corner hit: same bounce event as the previous time
            merged.append(CrossingEvent(float(t), int(ax)))
            last = t
        if needed is None or len(merged) >= needed:
            return merged if needed is None else merged[:needed]
        horizon *= 2.0  # corner merges ate into the budget; extend


def trajectory_gaps(box: Box, config: TrajectoryConfig) -> np.ndarray:
    """Bounce lengths of one trajectory (leading/trailing segments dropped)."""
    events = unfold_crossings(box, config)
    t = np.array([e.time for e in events])
    return np.diff(t)


# --- particle-ensemble sampling ---------------------------------------------

def _start_matrix(box: Box, policy: StartPolicy, u_start: np.ndarray) -> np.ndarray:
    if isinstance(policy, FixedStart):
        p = np.asarray(policy.point, dtype=np.float64)
        if p.size != box.dimension or not box.contains(policy.point):
            raise ValueError(f"fixed start {policy.point} outside box {box.sides}")
        return np.broadcast_to(p, (u_start.shape[0], box.dimension))
    if isinstance(policy, UniformStart):
        return u_start * np.asarray(box.sides)
    raise TypeError(f"unsupported start policy {policy!r}")


def _draws_per_particle(box: Box, policy: StartPolicy) -> tuple[int, int]:
    dk = direction_draw_count(box.dimension)
    sk = box.dimension if isinstance(policy, UniformStart) else 0
    return dk, dk + sk


def iter_spreading_gaps(
    box: Box,
    particles: int,
    distance: float,
    start: StartPolicy,
    seed: int,
    *,
    chunk: int = 1024,
) -> Iterator[np.ndarray]:
    """Stream bounce lengths for the travel-distance model, chunk by chunk.

    Yields one flat float64 array per chunk of particles, in particle order.
    The concatenation over chunks is a pure function of (seed, box, particles,
    distance, start); the chunk size only affects memory use.
    """
    if particles < 1:
        raise ValueError("particle count must be >= 1")
    if not distance > 0:
        raise ValueError("distance must be positive")
    if distance <= box.diag():
        warnings.warn(
            "travel distance below the box diagonal: most particles produce "
            "no complete bounce length",
            stacklevel=2,
        )
    dk, draws = _draws_per_particle(box, start)
    sides = box.sides
    for lo in range(0, particles, chunk):
        hi = min(lo + chunk, particles)
        u = particle_uniforms(seed, lo, hi, draws)
        v = directions_from_uniforms(u[:, :dk], box.dimension)
        p = _start_matrix(box, start, u[:, dk:])
        times = _crossing_time_matrix(sides, p, v, distance)
        yield _gaps_between_crossings(times)


def iter_absorption_gaps(
    box: Box,
    particles: int,
    bounces: int,
    start: StartPolicy,
    seed: int,
    *,
    chunk: int = 256,
) -> Iterator[np.ndarray]:
    """Stream bounce lengths for the bounce-count model, chunk by chunk.

    Every particle contributes exactly `bounces` lengths.  The crossing
    horizon is estimated from the per-particle crossing rate and extended for
    the (rare) rows where corner merges left fewer than `bounces` gaps.
    """
    if particles < 1:
        raise ValueError("particle count must be >= 1")
    if bounces < 1:
        raise ValueError("bounce count must be >= 1")
    dk, draws = _draws_per_particle(box, start)
    sides = np.asarray(box.sides)
    margin = 4 * box.dimension + 8
    for lo in range(0, particles, chunk):
        hi = min(lo + chunk, particles)
        u = particle_uniforms(seed, lo, hi, draws)
        v = directions_from_uniforms(u[:, :dk], box.dimension)
        p = _start_matrix(box, start, u[:, dk:])
        rate = np.sum(np.abs(v) / sides, axis=1)
        horizon = (bounces + 1 + margin) / rate
        out = np.empty((hi - lo, bounces))
        pending = np.arange(hi - lo)
        while pending.size:
            times = _crossing_time_matrix(sides, p[pending], v[pending], horizon[pending])
            gaps, short = _first_n_gaps(times, bounces)
            done = pending[~short]
            out[done] = gaps.reshape(done.size, bounces)
            horizon[pending[short]] *= 2.0
            pending = pending[short]
        yield out.reshape(-1)


def _meta(box, start, seed, **extra) -> dict:
    if isinstance(start, FixedStart):
        start_desc = list(start.point)
    else:
        start_desc = "uniform"
    return {"box": list(box.sides), "seed": int(seed), "start": start_desc, **extra}


def sample_spreading(
    box: Box,
    particles: int,
    distance: float,
    start: StartPolicy | None = None,
    seed: int = 0,
    *,
    chunk: int = 1024,
) -> SampleSet:
    """All bounce lengths of `particles` trajectories of total length `distance`.

    Per-particle bounce counts vary with direction; that variation is the
    defining weighting of this model.  Memory scales with the total number of
    bounces (~ particles * distance / mean free path); for very large runs
    consume `iter_spreading_gaps` instead.
    """
    start = FixedStart.origin(box.dimension) if start is None else start
    gaps = np.concatenate(
        list(iter_spreading_gaps(box, particles, distance, start, seed, chunk=chunk))
    )
    return SampleSet(
        gaps,
        "spreading",
        _meta(box, start, seed, particles=particles, distance=float(distance)),
    )


def sample_absorption(
    box: Box,
    particles: int,
    bounces: int,
    start: StartPolicy | None = None,
    seed: int = 0,
    *,
    chunk: int = 256,
) -> SampleSet:
    """Exactly `bounces` bounce lengths from each of `particles` trajectories."""
    start = FixedStart.origin(box.dimension) if start is None else start
    gaps = np.concatenate(
        list(iter_absorption_gaps(box, particles, bounces, start, seed, chunk=chunk))
    )
    return SampleSet(
        gaps,
        "absorption",
        _meta(box, start, seed, particles=particles, bounces=int(bounces)),
    )
