"""Shared geometry and configuration types.

A trajectory lives in an axis-aligned box [0,a_1] x ... x [0,a_n].  Everything
downstream (billiard samplers, the random-line ensemble, the closed-form
densities) consumes the same `Box`, unit directions as plain numpy arrays,
and `SampleSet` containers of positive free-path lengths.

Randomness is counter-based (Philox).  Each particle owns a fixed, block
aligned slice of the master stream, so particle i's draws are a pure function
of (seed, i): results do not depend on chunk sizes, execution order, or any
parallel scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.random import Generator, Philox

__all__ = [
    "Box",
    "FixedStart",
    "UniformStart",
    "TotalDistance",
    "BounceCount",
    "TrajectoryConfig",
    "SampleSet",
    "sample_uniform_direction",
    "directions_from_uniforms",
    "direction_draw_count",
    "particle_uniforms",
]

# Relative slack allowed on the support bound len <= diag(box): anything past
# this indicates a simulator bug, not roundoff.
SUPPORT_SLACK = 1e-9


@dataclass(frozen=True)
class Box:
    """Rectangular box with positive side lengths, dimension n >= 2."""

    sides: tuple[float, ...]

    def __init__(self, sides: Iterable[float]):
        sides = tuple(float(s) for s in sides)
        if len(sides) < 2:
            raise ValueError("box needs at least two sides")
        if not all(math.isfinite(s) and s > 0 for s in sides):
            raise ValueError(f"box sides must be positive and finite, got {sides}")
        object.__setattr__(self, "sides", sides)

    @property
    def dimension(self) -> int:
        return len(self.sides)

    @property
    def sorted_sides(self) -> tuple[float, ...]:
        """Canonical ascending view (the 2D/3D formulas assume sorted sides)."""
        return tuple(sorted(self.sides))

    def diag(self) -> float:
        """Length of the main diagonal: the longest possible free path."""
        return math.sqrt(sum(s * s for s in self.sides))

    def volume(self) -> float:
        return math.prod(self.sides)

    def surface_area(self) -> float:
        """(n-1)-dimensional boundary measure (perimeter when n = 2)."""
        v = self.volume()
        return 2.0 * sum(v / s for s in self.sides)

    def contains(self, point: Sequence[float]) -> bool:
        if len(point) != self.dimension:
            return False
        return all(0.0 <= p <= s for p, s in zip(point, self.sides))

    def scaled(self, factor: float) -> "Box":
        return Box([factor * s for s in self.sides])

    @classmethod
    def parse(cls, text: str) -> "Box":
        """Build from a comma-separated side list, e.g. '1,2' or '3,4,6'."""
        return cls([float(tok) for tok in text.split(",") if tok.strip()])


def _as_unit_vector(components: Sequence[float], dim: int | None = None) -> np.ndarray:
    v = np.asarray(components, dtype=np.float64)
    if v.ndim != 1 or (dim is not None and v.size != dim):
        raise ValueError(f"direction must be a vector of length {dim}, got shape {v.shape}")
    nrm2 = float(np.dot(v, v))
    if abs(nrm2 - 1.0) > 1e-12:
        raise ValueError(f"direction must be unit length (|v|^2 - 1 = {nrm2 - 1.0:.3e})")
    return v


# --- start policies -------------------------------------------------------

@dataclass(frozen=True)
class FixedStart:
    """All particles start at the same point (must lie in the closed box)."""

    point: tuple[float, ...]

    def __init__(self, point: Iterable[float]):
        object.__setattr__(self, "point", tuple(float(p) for p in point))

    @classmethod
    def origin(cls, dimension: int) -> "FixedStart":
        return cls((0.0,) * dimension)


@dataclass(frozen=True)
class UniformStart:
    """Each particle starts uniformly at random inside the box."""


StartPolicy = Union[FixedStart, UniformStart]


# --- termination rules ----------------------------------------------------

@dataclass(frozen=True)
class TotalDistance:
    """Stop each particle after it has travelled a total arc length r."""

    r: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise ValueError(f"total distance must be positive, got {self.r}")


@dataclass(frozen=True)
class BounceCount:
    """Stop each particle after exactly n wall bounces (n free paths)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"bounce count must be >= 1, got {self.n}")


Termination = Union[TotalDistance, BounceCount]


@dataclass(frozen=True)
class TrajectoryConfig:
    """One trajectory: start point, unit direction, termination rule."""

    start: tuple[float, ...]
    direction: tuple[float, ...]
    termination: Termination

    def __init__(self, start, direction, termination):
        start = tuple(float(p) for p in start)
        direction = tuple(_as_unit_vector(direction, len(start)))
        if not isinstance(termination, (TotalDistance, BounceCount)):
            raise TypeError("termination must be TotalDistance or BounceCount")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "termination", termination)

    def validate_in(self, box: Box):
        if len(self.start) != box.dimension:
            raise ValueError("start point dimension does not match box")
        if not box.contains(self.start):
            raise ValueError(f"start {self.start} lies outside the closed box {box.sides}")


# --- sample containers ----------------------------------------------------

MODEL_SPREADING = "spreading"
MODEL_ABSORPTION = "absorption"
MODEL_CHORDS = "chords"
_KNOWN_MODELS = (MODEL_SPREADING, MODEL_ABSORPTION, MODEL_CHORDS)


@dataclass(frozen=True)
class SampleSet:
    """Multiset of free-path / chord lengths plus provenance metadata.

    `lengths` keeps generation order.  Identical (seed, config) always yields
    an identical array.  `meta` carries the box, the model parameters and the
    seed so files written from a SampleSet are self-describing.
    """

    lengths: np.ndarray
    model: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        arr = np.asarray(self.lengths, dtype=np.float64)
        object.__setattr__(self, "lengths", arr)
        if self.model not in _KNOWN_MODELS:
            raise ValueError(f"unknown model tag {self.model!r}")
        if arr.size and float(arr.min()) <= 0.0:
            raise ValueError("sample lengths must be strictly positive")
        box = self.meta.get("box")
        if box is not None and arr.size:
            bound = Box(box).diag() * (1.0 + SUPPORT_SLACK)
            worst = float(arr.max())
            if worst > bound:
                raise ValueError(
                    f"length {worst} exceeds the box diagonal; simulator bug"
                )

    def __len__(self) -> int:
        return int(self.lengths.size)

    def mean(self) -> float:
        return float(self.lengths.mean())


# --- direction sampling and per-particle streams --------------------------

def direction_draw_count(dimension: int) -> int:
    """Uniform draws consumed per direction (fixed so streams are indexable)."""
    if dimension == 2:
        return 1
    if dimension == 3:
        return 2
    return 2 * ((dimension + 1) // 2)


def directions_from_uniforms(u: np.ndarray, dimension: int) -> np.ndarray:
    """Map rows of uniforms in [0,1) to uniform directions on the sphere.

    n=2 uses a single angle, n=3 the area-preserving cylindrical map, and
    higher dimensions Box-Muller normals (fixed draw budget per row, so a
    particle's direction depends only on its own uniforms).
    """
    u = np.atleast_2d(np.asarray(u, dtype=np.float64))
    k = direction_draw_count(dimension)
    if u.shape[1] < k:
        raise ValueError(f"need {k} uniforms per row for dimension {dimension}")
    if dimension == 2:
        theta = 2.0 * np.pi * u[:, 0]
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dimension == 3:
        z = 2.0 * u[:, 0] - 1.0
        phi = 2.0 * np.pi * u[:, 1]
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    pairs = (dimension + 1) // 2
    g = np.empty((u.shape[0], 2 * pairs))
    for j in range(pairs):
        r = np.sqrt(-2.0 * np.log1p(-u[:, 2 * j]))
        ang = 2.0 * np.pi * u[:, 2 * j + 1]
        g[:, 2 * j] = r * np.cos(ang)
        g[:, 2 * j + 1] = r * np.sin(ang)
    g = g[:, :dimension]
    nrm = np.linalg.norm(g, axis=1)
    # all-zero normal vector has probability ~2^-106; pin to the first axis
    bad = nrm < 1e-300
    if np.any(bad):
        g[bad] = 0.0
        g[bad, 0] = 1.0
        nrm[bad] = 1.0
    return g / nrm[:, None]


def sample_uniform_direction(rng: Generator, dimension: int) -> np.ndarray:
    """One direction uniform on the unit sphere S^{n-1}."""
    if dimension < 2:
        raise ValueError("dimension must be >= 2")
    u = rng.random(direction_draw_count(dimension))
    return directions_from_uniforms(u[None, :], dimension)[0]


def particle_uniforms(seed: int, lo: int, hi: int, draws: int) -> np.ndarray:
    """Uniform draws for particles lo..hi-1, `draws` values per particle.

    Particle i reads words [i*B, i*B + draws) of the Philox stream keyed by
    `seed`, where B is `draws` rounded up to the 4-word Philox block.  The
    result for a given particle never depends on lo/hi, which is what makes
    chunked (or parallel) simulation bit-reproducible.
    """
    if hi <= lo:
        return np.empty((0, draws))
    blocks_per_particle = (draws + 3) // 4
    bitgen = Philox(key=np.uint64(seed))
    bitgen.advance(blocks_per_particle * lo)
    m = hi - lo
    flat = Generator(bitgen).random(4 * blocks_per_particle * m)
    return flat.reshape(m, 4 * blocks_per_particle)[:, :draws]


def master_rng(seed: int) -> Generator:
    """Plain generator on the master stream (for one-off draws in tools)."""
    return Generator(Philox(key=np.uint64(seed)))
