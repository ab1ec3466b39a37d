"""Random chords of a box under the invariant line measure.

Directed lines are parametrized by a unit direction v and an offset q in the
hyperplane through the origin orthogonal to v; the translation- and
rotation-invariant measure is dA(q) dS(v).  Restricted to lines meeting the
box and normalized, the chord length of such a random line is the limit law
of the spreading-model bounce lengths, which makes this sampler a completely
independent oracle for the billiard simulator: no reflections, no unfolding,
just direction + offset + slab clipping.

Sampling scheme (2D and 3D):
  1. draw v uniformly on the positive-orthant part of the sphere and accept
     it with probability shadow(v) / max_shadow -- the line measure weights
     each direction by the area of the box shadow on v-perp;
  2. draw q uniformly on the shadow by rejection inside its bounding
     rectangle in an orthonormal basis of v-perp (the shadow fills at least
     half the rectangle, so this is cheap);
  3. clip the line against the box slabs; the chord length is the overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from numpy.random import Generator, Philox

from .core import Box, SampleSet

__all__ = [
    "DirectedLine",
    "projected_shadow_area",
    "total_line_measure",
    "chord_length",
    "sample_chords",
]

# chords shorter than this are grazing-line noise and get resampled
GRAZING_CUTOFF = 1e-12


@dataclass(frozen=True)
class DirectedLine:
    """Line q + s*v with unit v and offset q orthogonal to v."""

    direction: tuple[float, ...]
    offset: tuple[float, ...]

    def __init__(self, direction: Iterable[float], offset: Iterable[float]):
        v = np.asarray(tuple(direction), dtype=np.float64)
        q = np.asarray(tuple(offset), dtype=np.float64)
        if v.shape != q.shape:
            raise ValueError("direction and offset dimensions differ")
        if abs(float(v @ v) - 1.0) > 1e-12:
            raise ValueError("direction must be a unit vector")
        if abs(float(v @ q)) > 1e-12 * max(1.0, float(np.linalg.norm(q))):
            raise ValueError("offset must be orthogonal to the direction")
        object.__setattr__(self, "direction", tuple(v))
        object.__setattr__(self, "offset", tuple(q))


def projected_shadow_area(box: Box, v) -> float:
    """Measure of the box shadow on the hyperplane orthogonal to v.

    3D: ab|v_c| + ac|v_b| + bc|v_a| (area); 2D: a|v_b| + b|v_a| (width).
    """
    v = np.asarray(v, dtype=np.float64)
    if box.dimension == 2 and v.size == 2:
        a, b = box.sides
        return a * abs(v[1]) + b * abs(v[0])
    if box.dimension == 3 and v.size == 3:
        a, b, c = box.sides
        return a * b * abs(v[2]) + a * c * abs(v[1]) + b * c * abs(v[0])
    raise ValueError("shadow areas are implemented for dimensions 2 and 3")


def total_line_measure(box: Box) -> float:
    """Invariant measure of all directed lines meeting the box.

    2^n times the positive-orthant integral of the shadow area:
    2*pi*(ab+ac+bc) in 3D and 4*(a+b) in 2D.
    """
    if box.dimension == 3:
        a, b, c = box.sides
        return 2.0 * math.pi * (a * b + a * c + b * c)
    if box.dimension == 2:
        a, b = box.sides
        return 4.0 * (a + b)
    raise ValueError("line measure is implemented for dimensions 2 and 3")


def _slab_chord(sides, origins, directions) -> np.ndarray:
    """Chord lengths of lines origins + s*directions against the box (vectorized)."""
    lo = np.full(origins.shape[0], -np.inf)
    hi = np.full(origins.shape[0], np.inf)
    for i, a in enumerate(sides):
        o = origins[:, i]
        d = directions[:, i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t0 = (0.0 - o) / d
            t1 = (a - o) / d
        t_lo = np.minimum(t0, t1)
        t_hi = np.maximum(t0, t1)
        still = d != 0.0
        lo = np.where(still, np.maximum(lo, t_lo), lo)
        hi = np.where(still, np.minimum(hi, t_hi), hi)
        # motionless axis: the line misses the box unless the coordinate fits
        outside = (~still) & ((o < 0.0) | (o > a))
        hi = np.where(outside, -np.inf, hi)
    return np.maximum(hi - lo, 0.0)


def chord_length(box: Box, line: DirectedLine) -> float:
    """Length of the intersection of one directed line with the box."""
    o = np.asarray(line.offset)[None, :]
    d = np.asarray(line.direction)[None, :]
    return float(_slab_chord(box.sides, o, d)[0])


def _orthant_directions(rng: Generator, n_draw: int, dim: int) -> np.ndarray:
    if dim == 2:
        theta = 0.5 * np.pi * rng.random(n_draw)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    z = rng.random(n_draw)
    phi = 0.5 * np.pi * rng.random(n_draw)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def _perp_basis(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (e1, e2) of v-perp for each row of v (3D)."""
    m = v.shape[0]
    least = np.argmin(np.abs(v), axis=1)
    helper = np.zeros_like(v)
    helper[np.arange(m), least] = 1.0
    e1 = np.cross(v, helper)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(v, e1)
    return e1, e2


def sample_chords(box: Box, count: int, seed: int = 0, *, batch: int = 1 << 16) -> SampleSet:
    """Chord lengths of `count` invariant-measure random lines meeting the box.

    Deterministic in (seed, count); lines that miss the box cannot occur by
    construction and grazing chords below 1e-12 are resampled.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    dim = box.dimension
    if dim not in (2, 3):
        raise ValueError("chord sampling is implemented for dimensions 2 and 3")
    sides = np.asarray(box.sides)
    if dim == 3:
        a, b, c = box.sides
        max_shadow = a * b + a * c + b * c
        corners = np.array(
            [[x, y, z] for x in (0.0, a) for y in (0.0, b) for z in (0.0, c)]
        )
    else:
        a, b = box.sides
        max_shadow = a + b
        corners = np.array([[x, y] for x in (0.0, a) for y in (0.0, b)])

    rng = Generator(Philox(key=np.uint64(seed)))
    out = np.empty(count)
    filled = 0
    while filled < count:
        v = _orthant_directions(rng, batch, dim)
        u_acc = rng.random(batch)
        shadows = (
            sides[0] * v[:, 1] + sides[1] * v[:, 0]
            if dim == 2
            else sides[0] * sides[1] * v[:, 2]
            + sides[0] * sides[2] * v[:, 1]
            + sides[1] * sides[2] * v[:, 0]
        )
        v = v[u_acc * max_shadow < shadows]
        if not v.shape[0]:
            continue
        if dim == 3:
            e1, e2 = _perp_basis(v)
            # corner projections bound the shadow polygon per line
            s1 = corners @ e1.T  # (8, m)
            s2 = corners @ e2.T
            lo1, hi1 = s1.min(axis=0), s1.max(axis=0)
            lo2, hi2 = s2.min(axis=0), s2.max(axis=0)
            chord = np.zeros(v.shape[0])
            todo = np.arange(v.shape[0])
            while todo.size:
                u1 = rng.random(todo.size)
                u2 = rng.random(todo.size)
                q1 = lo1[todo] + u1 * (hi1[todo] - lo1[todo])
                q2 = lo2[todo] + u2 * (hi2[todo] - lo2[todo])
                origins = q1[:, None] * e1[todo] + q2[:, None] * e2[todo]
                got = _slab_chord(box.sides, origins, v[todo])
                ok = got > GRAZING_CUTOFF
                chord[todo[ok]] = got[ok]
                todo = todo[~ok]  # outside the shadow (or grazing): redraw q
        else:
            e1 = np.column_stack([-v[:, 1], v[:, 0]])
            s1 = corners @ e1.T
            lo1, hi1 = s1.min(axis=0), s1.max(axis=0)
            chord = np.zeros(v.shape[0])
            todo = np.arange(v.shape[0])
            while todo.size:
                u1 = rng.random(todo.size)
                q1 = lo1[todo] + u1 * (hi1[todo] - lo1[todo])
                origins = q1[:, None] * e1[todo]
                got = _slab_chord(box.sides, origins, v[todo])
                ok = got > GRAZING_CUTOFF
                chord[todo[ok]] = got[ok]
                todo = todo[~ok]
        take = min(count - filled, chord.size)
        out[filled : filled + take] = chord[:take]
        filled += take
    return SampleSet(
        out,
        "chords",
        {"box": list(box.sides), "seed": int(seed), "count": int(count)},
    )
