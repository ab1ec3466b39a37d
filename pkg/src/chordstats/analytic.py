"""Closed-form limit laws for free path lengths in rectangular boxes.

Two limit models are covered.  In the *spreading* model every particle
travels a fixed total distance; its limit law equals the chord-length
distribution of the invariant line ensemble, with piecewise-analytic
densities known in closed form for n = 2 and n = 3.  In the *absorption*
model every particle performs a fixed number of bounces; its 2D limit
density is also known in closed form and splits into a "singular" part
(segments joining two opposite short-side walls, with inverse-square-root
blowups) and a "smooth" part.

Conventions used throughout:

* 2D formulas sort the sides so a <= b; the 3D spreading density is fully
  symmetric in (a, b, c) and needs no sorting.
* At an exact breakpoint the *left* branch value is returned (the right
  limit can be +inf in 2D); densities are 0 outside (0, diag).
* artanh is evaluated as 0.5*log((1+z)/(1-z)); arguments that land within
  1e-12 of +-1 through rounding at a branch edge are clamped and counted
  (see `artanh_clamp_count`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .core import Box

__all__ = [
    "mean_free_path",
    "unit_sphere_area",
    "positive_orthant_vn_integral",
    "pdf_spreading_2d",
    "cdf_spreading_2d",
    "pdf_spreading_3d",
    "cdf_spreading_3d",
    "cdf_spreading_3d_spherical",
    "pdf_absorption_2d",
    "pdf_absorption_singular_2d",
    "pdf_absorption_smooth_2d",
    "cdf_spreading_general",
    "BreakpointKind",
    "Breakpoint",
    "PiecewiseDensity",
    "spreading_density_2d",
    "spreading_density_3d",
    "absorption_density_2d",
    "artanh_clamp_count",
    "reset_artanh_clamp_count",
]


# --- small utilities -------------------------------------------------------

def unit_sphere_area(ambient_dim: int) -> float:
    """Surface area of the unit sphere S^{m-1} inside R^m: 2*pi^{m/2}/Gamma(m/2)."""
    m = ambient_dim
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def positive_orthant_vn_integral(dimension: int) -> float:
    """Integral of the last coordinate over the all-positive part of S^{n-1}.

    Equals |S^n| / (pi * 2^n); in particular 1 for n = 2 and pi/4 for n = 3.
    """
    n = dimension
    if n < 2:
        raise ValueError("dimension must be >= 2")
    return unit_sphere_area(n + 1) / (math.pi * 2.0 ** n)


def mean_free_path(box: Box) -> float:
    """Mean chord length: 2*pi * |S^{n-1}|/|S^n| * Vol/Area.

    The equivalent Gamma form 2*sqrt(pi)*Gamma((n+1)/2)/Gamma(n/2) * Vol/Area
    is computed as a cross-check; the two agree to machine precision.  For a
    3D box this reduces to 2abc/(ab+ac+bc), for 2D to pi*ab/(2(a+b)).
    """
    n = box.dimension
    ratio = box.volume() / box.surface_area()
    f1 = 2.0 * math.pi * unit_sphere_area(n) / unit_sphere_area(n + 1) * ratio
    f2 = 2.0 * math.sqrt(math.pi) * math.gamma((n + 1) / 2.0) / math.gamma(n / 2.0) * ratio
    assert abs(f1 - f2) <= 1e-12 * max(abs(f1), 1.0)
    if n == 2:  # dimension constant is exactly pi
        return math.pi * ratio
    if n == 3:  # dimension constant is exactly 4: 2abc/(ab+ac+bc)
        return 4.0 * ratio
    return f2


_ARTANH_CLAMP_EVENTS = 0
_ARTANH_EDGE = 1.0 - 1e-12


def artanh_clamp_count() -> int:
    """How many artanh arguments were clamped away from +-1 so far."""
    return _ARTANH_CLAMP_EVENTS


def reset_artanh_clamp_count():
    global _ARTANH_CLAMP_EVENTS
    _ARTANH_CLAMP_EVENTS = 0


def _artanh(z):
    """artanh via logs, clamping |z| >= 1-1e-12 (rounding at branch edges)."""
    global _ARTANH_CLAMP_EVENTS
    z = np.asarray(z, dtype=np.float64)
    over = np.abs(z) > _ARTANH_EDGE
    if np.any(over):
        _ARTANH_CLAMP_EVENTS += int(np.count_nonzero(over))
        z = np.clip(z, -_ARTANH_EDGE, _ARTANH_EDGE)
    return 0.5 * np.log((1.0 + z) / (1.0 - z))


def _vectorize_over_t(func):
    """Allow scalar or array t; scalars in, scalars out."""

    def wrapper(box, t, *args, **kwargs):
        t_arr = np.asarray(t, dtype=np.float64)
        out = func(box, np.atleast_1d(t_arr), *args, **kwargs)
        return float(out[0]) if t_arr.ndim == 0 else out

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


def _require_2d(box: Box) -> tuple[float, float]:
    if box.dimension != 2:
        raise ValueError("this density is defined for 2D boxes only")
    a, b = box.sorted_sides
    return a, b


def _require_3d(box: Box) -> tuple[float, float, float]:
    if box.dimension != 3:
        raise ValueError("this density is defined for 3D boxes only")
    return box.sides  # symmetric formulas, no sorting needed


# --- spreading model, n = 2 ------------------------------------------------

@_vectorize_over_t
def pdf_spreading_2d(box: Box, t) -> np.ndarray:
    """Free-path density for the travel-distance model in a 2D box.

    Piecewise on (0, a], (a, b], (b, sqrt(a^2+b^2)) with a <= b:

        1/(a+b) * { 1,
                    a^2 b / (t^2 sqrt(t^2-a^2)),
                    -1 + [a^2 b/sqrt(t^2-a^2) + a b^2/sqrt(t^2-b^2)] / t^2 }

    Constant on (0,a); inverse-square-root singularities just right of a, b.
    """
    a, b = _require_2d(box)
    if np.any(t <= 0.0):
        raise ValueError("t must be positive")
    d = math.hypot(a, b)
    out = np.zeros_like(t)
    m1 = t <= a
    m2 = (t > a) & (t <= b)
    m3 = (t > b) & (t < d)
    out[m1] = 1.0
    t2 = t[m2]
    out[m2] = a * a * b / (t2 * t2 * np.sqrt(t2 * t2 - a * a))
    t3 = t[m3]
    out[m3] = -1.0 + (
        a * a * b / np.sqrt(t3 * t3 - a * a) + a * b * b / np.sqrt(t3 * t3 - b * b)
    ) / (t3 * t3)
    return out / (a + b)


@_vectorize_over_t
def cdf_spreading_2d(box: Box, t) -> np.ndarray:
    """Closed-form 2D spreading-model distribution function.

    1 - N(t)/(a+b) with
    N(t) = (a+b-t) + [t-a-b*sqrt(1-a^2/t^2)]_{t>a} + [t-b-a*sqrt(1-b^2/t^2)]_{t>b}.
    """
    a, b = _require_2d(box)
    d = math.hypot(a, b)
    out = np.zeros_like(t)
    out[t >= d] = 1.0
    mid = (t > 0.0) & (t < d)
    tm = t[mid]
    numer = a + b - tm
    over_a = tm > a
    ta = tm[over_a]
    numer[over_a] += ta - a - b * np.sqrt(1.0 - (a / ta) ** 2)
    over_b = tm > b
    tb = tm[over_b]
    numer[over_b] += tb - b - a * np.sqrt(1.0 - (b / tb) ** 2)
    out[mid] = np.clip(1.0 - numer / (a + b), 0.0, 1.0)
    return out


# --- spreading model, n = 3 ------------------------------------------------

def _spreading_3d_term(x, y, z, t):
    """One of the three symmetric terms of the 3D free-path density.

    Written cumulatively: the base piece holds on (0, x], corrections switch
    on for t > x and t > sqrt(x^2+y^2) (strict, so exact breakpoints get the
    left branch).  The jump at t = x has height 6*pi*x^2*y*z before the
    common normalisation.
    """
    t = np.asarray(t, dtype=np.float64)
    t2 = t * t
    out = t * t2 * (8.0 * x - 3.0 * t)
    m = t > x
    if np.any(m):
        tm = t[m]
        tm2 = tm * tm
        root = np.sqrt(tm2 - x * x)
        out[m] += (
            (6.0 * tm2 * tm2 - x ** 4 + 6.0 * math.pi * x * x * y * z)
            - (8.0 * x * tm * tm2 - 3.0 * tm2 * tm2)
            - 4.0 * (y + z) * root * (x * x + 2.0 * tm2)
        )
    m2 = t > math.hypot(x, y)
    if np.any(m2):
        tm = t[m2]
        tm2 = tm * tm
        s_xy = np.sqrt(np.abs(tm2 - x * x - y * y))
        s_y = np.sqrt(tm2 - y * y)
        s_x = np.sqrt(tm2 - x * x)
        out[m2] += (
            x ** 4 + y ** 4 - 9.0 * tm2 * tm2 - 6.0 * x * x * y * y
            + 4.0 * z * s_xy * (x * x + y * y + 2.0 * tm2)
            + 4.0 * x * s_y * (y * y + 2.0 * tm2)
            - 12.0 * x * x * y * z * np.arctan(s_xy / y)
            + 4.0 * y * s_x * (x * x + 2.0 * tm2)
            - 12.0 * x * y * y * z * np.arctan(s_xy / x)
        )
    return out


@_vectorize_over_t
def pdf_spreading_3d(box: Box, t) -> np.ndarray:
    """Free-path density for the travel-distance model in a 3D box.

    Sum of three side-permuted terms over 3*pi*t^3*(ab+ac+bc); linear on
    (0, min side), positive jumps at each side length, continuous (and
    differentiable) at the pairwise diagonals sqrt(a_i^2+a_j^2).
    """
    a, b, c = _require_3d(box)
    if np.any(t <= 0.0):
        raise ValueError("t must be positive")
    d = box.diag()
    out = np.zeros_like(t)
    inside = t < d
    ti = t[inside]
    if ti.size:
        total = (
            _spreading_3d_term(a, b, c, ti)
            + _spreading_3d_term(b, c, a, ti)
            + _spreading_3d_term(c, a, b, ti)
        )
        out[inside] = total / (3.0 * math.pi * ti ** 3 * (a * b + a * c + b * c))
    return out


def cdf_spreading_3d(box: Box, t, *, epsabs: float = 1e-11) -> float:
    """3D spreading-model distribution function by quadrature of the density.

    The density is bounded (jumps, no blowups), so plain adaptive quadrature
    piece by piece between breakpoints is accurate; see
    `cdf_spreading_3d_spherical` for the independent spherical-integral route.
    """
    t = float(t)
    if t <= 0.0:
        return 0.0
    d = box.diag()
    if t >= d:
        return 1.0
    dens = spreading_density_3d(box)
    return dens.integral(0.0, t, epsabs=epsabs)


def _constrained_inner_phi_integral(a, b, c, t, theta, phi_lo):
    """Closed-form phi-integral of the crossing-count integrand.

    Integrates, from phi_lo to pi/2, the function
        (bc vx + ac vy + ab vz) - 2t(c vx vy + b vx vz + a vy vz)
        + 3 t^2 vx vy vz
    with v = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)).
    """
    st = np.sin(theta)
    ct = np.cos(theta)
    sp0 = np.sin(phi_lo)
    cp0 = np.cos(phi_lo)
    cp0sq = cp0 * cp0
    return (
        b * c * st * (1.0 - sp0)
        + a * c * st * cp0
        + a * b * ct * (0.5 * np.pi - phi_lo)
        - t * c * st * st * cp0sq
        - 2.0 * t * b * st * ct * (1.0 - sp0)
        - 2.0 * t * a * st * ct * cp0
        + 1.5 * t * t * st * st * ct * cp0sq
    )


def cdf_spreading_3d_spherical(box: Box, t, *, epsabs: float = 1e-10) -> float:
    """3D spreading-model distribution function via the sphere integral.

    Independent of the closed-form density: evaluates
        1 - I(t) / [(pi/4)(ab+ac+bc)]
    where I(t) integrates the crossing-count integrand over the part of the
    positive-orthant sphere with v_x <= a/t, v_y <= b/t, v_z <= c/t.  That
    region, in spherical coordinates (theta from the z-axis), decomposes as

        int_{th_min}^{th_a} int_0^{pi/2}  +  int_{th_a}^{th_max} int_{phi_a}^{pi/2}
        -  int_{th_b}^{th_max} int_{phi_b}^{pi/2}

    with th_min = acos(min(c/t,1)), th_a/th_b = max(th_min, asin(min(a/t,1)))
    (resp. b), th_max = asin(min(sqrt(a^2+b^2)/t, 1)), phi_a = acos(a/(t sin
    theta)) and phi_b = asin(b/(t sin theta)).  The phi integral is done in
    closed form, theta by adaptive quadrature.
    """
    a, b, c = _require_3d(box)
    t = float(t)
    if t <= 0.0:
        return 0.0
    if t >= box.diag():
        return 1.0
    th_min = math.acos(min(c / t, 1.0))
    th_a = max(th_min, math.asin(min(a / t, 1.0)))
    th_b = max(th_min, math.asin(min(b / t, 1.0)))
    th_max = math.asin(min(math.hypot(a, b) / t, 1.0))

    def seg_full(theta):
        return _constrained_inner_phi_integral(a, b, c, t, theta, 0.0) * np.sin(theta)

    def seg_a(theta):
        phi = np.arccos(np.clip(a / (t * np.sin(theta)), -1.0, 1.0))
        return _constrained_inner_phi_integral(a, b, c, t, theta, phi) * np.sin(theta)

    def seg_b(theta):
        phi = np.arcsin(np.clip(b / (t * np.sin(theta)), -1.0, 1.0))
        return _constrained_inner_phi_integral(a, b, c, t, theta, phi) * np.sin(theta)

    total = 0.0
    if th_a > th_min:
        total += integrate.quad(seg_full, th_min, th_a, epsabs=epsabs, limit=200)[0]
    if th_max > th_a:
        total += integrate.quad(seg_a, th_a, th_max, epsabs=epsabs, limit=200)[0]
    if th_max > th_b:
        total -= integrate.quad(seg_b, th_b, th_max, epsabs=epsabs, limit=200)[0]
    denom = 0.25 * math.pi * (a * b + a * c + b * c)
    return 1.0 - total / denom


# --- absorption model, n = 2 -----------------------------------------------

@_vectorize_over_t
def pdf_absorption_2d(box: Box, t) -> np.ndarray:
    """Free-path density for the bounce-count model in a 2D box (a <= b).

    Three branches split at a and b; constant on (0, a) but *different* from
    the spreading-model constant (0.32553... vs 1/3 for sides (1,2)).
    """
    a, b = _require_2d(box)
    d = math.hypot(a, b)
    q = a * a + b * b
    rq = math.sqrt(q)
    q32 = q * rq
    out = np.zeros_like(t)

    m1 = (t > 0.0) & (t <= a)
    if np.any(m1):
        const = (2.0 / math.pi) * (
            2.0 * (a + b) / q
            - (2.0 * a * b / q32) * (_artanh(a / rq) + _artanh(b / rq))
        )
        out[m1] = const

    m2 = (t > a) & (t <= b)
    if np.any(m2):
        tm = t[m2]
        sa = np.sqrt(tm * tm - a * a)
        out[m2] = (2.0 / math.pi) * (
            a * (b - sa) / (tm * (b + sa) * sa)
            + (2.0 * a * b + 2.0 * a * tm - 2.0 * a * sa) / (tm * q)
            + (2.0 * a * b / q32)
            * (-_artanh(tm / rq) + _artanh(sa * rq / (tm * b)) - _artanh(b / rq))
        )

    m3 = (t > b) & (t < d)
    if np.any(m3):
        tm = t[m3]
        sa = np.sqrt(tm * tm - a * a)
        sb = np.sqrt(tm * tm - b * b)
        out[m3] = (2.0 / math.pi) * (
            a * (b - sa) / (tm * (b + sa) * sa)
            + b * (a - sb) / (tm * (a + sb) * sb)
            + 2.0 * (2.0 * a * b - a * sa - b * sb) / (tm * q)
            + (2.0 * a * b / q32)
            * (
                -2.0 * _artanh(tm / rq)
                + _artanh(sa * rq / (tm * b))
                + _artanh(sb * rq / (tm * a))
            )
        )
    return out


@_vectorize_over_t
def pdf_absorption_singular_2d(box: Box, t) -> np.ndarray:
    """Contribution of the equal-length segment family (wall-to-wall runs).

    Zero below a; for t >= a the family of segments that start and end on
    the walls perpendicular to the short side all share length a/cos(angle),
    and the change of variables angle -> length contributes
        (2/pi) * x (y - sqrt(t^2-x^2)) / [t (y + sqrt(t^2-x^2)) sqrt(t^2-x^2)]
    with (x, y) = (a, b), plus the mirrored term with (b, a) once t >= b.
    """
    a, b = _require_2d(box)
    d = math.hypot(a, b)
    out = np.zeros_like(t)

    m = (t > a) & (t < d)
    if np.any(m):
        tm = t[m]
        sa = np.sqrt(tm * tm - a * a)
        out[m] = (2.0 / math.pi) * a * (b - sa) / (tm * (b + sa) * sa)
    m2 = (t > b) & (t < d)
    if np.any(m2):
        tm = t[m2]
        sb = np.sqrt(tm * tm - b * b)
        out[m2] += (2.0 / math.pi) * b * (a - sb) / (tm * (a + sb) * sb)
    return out


def _smooth_antiderivative(x, y, tt):
    """Antiderivative of 2x / [(y + sqrt(T^2-x^2)) T^2] on [x, sqrt(x^2+y^2)].

    Algebraically rationalised so it stays finite and cancellation-free at
    the upper endpoint, where the naive artanh difference is inf - inf:

        2x(s - y)/(T q) + (2xy/q^{3/2}) * log( x (sqrt(q)+T) / (T y + s sqrt(q)) )

    with s = sqrt(T^2 - x^2), q = x^2 + y^2.
    """
    q = x * x + y * y
    rq = math.sqrt(q)
    s = np.sqrt(np.maximum(tt * tt - x * x, 0.0))
    return 2.0 * x * (s - y) / (tt * q) + (2.0 * x * y / (q * rq)) * np.log(
        x * (rq + tt) / (tt * y + s * rq)
    )


@_vectorize_over_t
def pdf_absorption_smooth_2d(box: Box, t) -> np.ndarray:
    """Everything except the equal-length segment family.

        (2/pi) [ int_{max(a,t)}^{diag} 2a dT / ((b+sqrt(T^2-a^2)) T^2)
               + int_{max(b,t)}^{diag} 2b dT / ((a+sqrt(T^2-b^2)) T^2) ]

    evaluated through the closed-form antiderivative; together with
    `pdf_absorption_singular_2d` this reproduces `pdf_absorption_2d` exactly.
    """
    a, b = _require_2d(box)
    d = math.hypot(a, b)
    out = np.zeros_like(t)
    m = (t > 0.0) & (t < d)
    if np.any(m):
        tm = t[m]
        lo_a = np.clip(tm, a, d)
        lo_b = np.clip(tm, b, d)
        part_a = _smooth_antiderivative(a, b, np.asarray([d]))[0] - _smooth_antiderivative(a, b, lo_a)
        part_b = _smooth_antiderivative(b, a, np.asarray([d]))[0] - _smooth_antiderivative(b, a, lo_b)
        out[m] = (2.0 / math.pi) * (part_a + part_b)
    return out


# --- general dimension: sphere-integral distribution function ---------------

def cdf_spreading_general(
    box: Box,
    t,
    *,
    samples: int = 1 << 20,
    seed: int = 0,
    return_se: bool = False,
):
    """Spreading-model distribution function in any dimension n >= 2.

        cdf(t) = 1 - int_{v in S+^{n-1}, v_i <= a_i/t} sum_i v_i prod_{j != i}(a_j - t v_j) dS
                     / [ prod_i a_i * int_{S+^{n-1}} sum_i v_i/a_i dS ]

    The numerator is estimated by Monte Carlo on the positive-orthant sphere
    with common random numbers across all t values (so the curve is monotone
    up to a single shared noise realisation); the denominator uses the exact
    orthant integral of a coordinate.  Returns float or array matching t;
    with return_se=True also returns the Monte Carlo standard error(s).
    """
    n = box.dimension
    sides = np.asarray(box.sides)
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    g = np.abs(rng.standard_normal((samples, n)))
    g /= np.linalg.norm(g, axis=1)[:, None]

    orthant_area = unit_sphere_area(n) / 2.0 ** n
    denom = positive_orthant_vn_integral(n) * float(
        np.sum(np.prod(sides) / sides)
    )

    vals = np.empty(t_arr.shape)
    ses = np.empty(t_arr.shape)
    d = box.diag()
    for idx, tv in enumerate(t_arr):
        if tv <= 0.0:
            vals[idx], ses[idx] = 0.0, 0.0
            continue
        if tv >= d:
            vals[idx], ses[idx] = 1.0, 0.0
            continue
        inside = np.all(g <= sides / tv, axis=1)
        integrand = np.zeros(samples)
        if np.any(inside):
            gi = g[inside]
            factors = sides - tv * gi  # (m, n), entries >= 0 inside the region
            acc = np.zeros(gi.shape[0])
            for i in range(n):
                others = np.prod(np.delete(factors, i, axis=1), axis=1)
                acc += gi[:, i] * others
            integrand[inside] = acc
        mean = integrand.mean()
        se = integrand.std(ddof=1) / math.sqrt(samples)
        vals[idx] = 1.0 - mean * orthant_area / denom
        ses[idx] = se * orthant_area / denom
    if np.asarray(t).ndim == 0:
        vals, ses = float(vals[0]), float(ses[0])
    if return_se:
        return vals, ses
    return vals


# --- piecewise density descriptions ----------------------------------------

class BreakpointKind(Enum):
    JUMP_DISCONTINUITY = "jump"
    INVERSE_SQRT_ON_RIGHT = "inverse_sqrt_right"
    SMOOTH_BUT_NOT_ANALYTIC = "smooth_not_analytic"
    CONTINUOUS_DIFFERENTIABLE = "continuous_differentiable"


@dataclass(frozen=True)
class Breakpoint:
    location: float
    kind: BreakpointKind


@dataclass(frozen=True)
class PiecewiseDensity:
    """A pdf on (0, support_end) given as breakpoints plus an evaluator.

    `pdf` is vectorized; pieces are analytic between consecutive breakpoints.
    Integration splits at every breakpoint and substitutes u = sqrt(t - b)
    on pieces whose left endpoint carries an inverse-square-root singularity
    (plain adaptive quadrature converges too slowly against (t-b)^(-1/2)).
    """

    support_end: float
    breakpoints: tuple[Breakpoint, ...]
    pdf: Callable[[np.ndarray], np.ndarray]

    def edges(self) -> list[float]:
        return [0.0] + [bp.location for bp in self.breakpoints] + [self.support_end]

    def _piece_singular_left(self) -> list[bool]:
        flags = [False]  # piece starting at 0 is regular for all our laws
        for bp in self.breakpoints:
            flags.append(bp.kind is BreakpointKind.INVERSE_SQRT_ON_RIGHT)
        return flags

    def integral(self, lo: float = 0.0, hi: float | None = None, *, epsabs: float = 1e-11) -> float:
        """Singularity-aware integral of the density over [lo, hi]."""
        if hi is None:
            hi = self.support_end
        lo = max(lo, 0.0)
        hi = min(hi, self.support_end)
        if hi <= lo:
            return 0.0
        edges = self.edges()
        flags = self._piece_singular_left()
        total = 0.0
        for i in range(len(edges) - 1):
            p_lo, p_hi = edges[i], edges[i + 1]
            s_lo, s_hi = max(lo, p_lo), min(hi, p_hi)
            if s_hi <= s_lo:
                continue
            if flags[i]:
                # u-substitution anchored at the singular breakpoint p_lo
                u_lo = math.sqrt(s_lo - p_lo)
                u_hi = math.sqrt(s_hi - p_lo)
                f = lambda u, base=p_lo: self.pdf(np.atleast_1d(base + u * u))[0] * 2.0 * u
                total += integrate.quad(f, u_lo, u_hi, epsabs=epsabs, limit=200)[0]
            else:
                f = lambda x: self.pdf(np.atleast_1d(x))[0]
                total += integrate.quad(f, s_lo, s_hi, epsabs=epsabs, limit=200)[0]
        return total

    def cdf_callable(self, points_per_piece: int = 4097) -> Callable[[np.ndarray], np.ndarray]:
        """Fast vectorized cdf built once by cumulative quadrature.

        Each piece is tabulated on a dense grid (in u = sqrt(t - b) around a
        singular left endpoint, so the node spacing adapts to the blowup) and
        the cumulative Simpson values are linearly interpolated.  Accuracy is
        far below any statistical tolerance used against samples.
        """
        edges = self.edges()
        flags = self._piece_singular_left()
        knots = [0.0]
        values = [0.0]
        acc = 0.0
        for i in range(len(edges) - 1):
            p_lo, p_hi = edges[i], edges[i + 1]
            if flags[i]:
                u = np.linspace(0.0, math.sqrt(p_hi - p_lo), points_per_piece)
                # the u=0 node needs the limit of 2u*pdf(lo+u^2), which is the
                # finite singular coefficient; evaluate at a representable
                # offset instead of multiplying 0 by the blowup
                u_eval = u.copy()
                u_eval[0] = math.sqrt(p_lo * 1e-12)
                tt = p_lo + u_eval * u_eval
                y = self.pdf(tt) * 2.0 * u_eval
                cum = integrate.cumulative_simpson(y, x=u, initial=0.0)
            else:
                tt = np.linspace(p_lo, p_hi, points_per_piece)
                tt[0] = p_lo + (p_hi - p_lo) * 1e-14
                y = self.pdf(tt)
                cum = integrate.cumulative_simpson(y, x=tt, initial=0.0)
            knots.extend((p_lo + u * u).tolist() if flags[i] else tt.tolist())
            values.extend((acc + cum).tolist())
            acc += float(cum[-1])
        kn = np.asarray(knots)
        va = np.asarray(values)
        top = float(va[-1])

        def cdf(t):
            t_arr = np.asarray(t, dtype=np.float64)
            out = np.interp(t_arr, kn, va, left=0.0, right=top)
            return float(out) if t_arr.ndim == 0 else out

        return cdf


def _dedupe_breakpoints(raw: list[Breakpoint], scale: float) -> tuple[Breakpoint, ...]:
    raw.sort(key=lambda bp: bp.location)
    kept: list[Breakpoint] = []
    for bp in raw:
        if kept and abs(bp.location - kept[-1].location) <= 1e-12 * scale:
            continue  # degenerate box: coincident breakpoints collapse
        kept.append(bp)
    return tuple(kept)


def spreading_density_2d(box: Box) -> PiecewiseDensity:
    a, b = _require_2d(box)
    d = math.hypot(a, b)
    raw = [
        Breakpoint(a, BreakpointKind.INVERSE_SQRT_ON_RIGHT),
        Breakpoint(b, BreakpointKind.INVERSE_SQRT_ON_RIGHT),
    ]
    return PiecewiseDensity(d, _dedupe_breakpoints(raw, d), lambda t: pdf_spreading_2d(box, t))


def spreading_density_3d(box: Box) -> PiecewiseDensity:
    a, b, c = _require_3d(box)
    d = box.diag()
    sides = sorted((a, b, c))
    raw = [Breakpoint(s, BreakpointKind.JUMP_DISCONTINUITY) for s in sides]
    for i in range(3):
        for j in range(i + 1, 3):
            diag_ij = math.hypot(sides[i], sides[j])
            if all(abs(diag_ij - s) > 1e-12 * d for s in sides) and diag_ij < d * (1 - 1e-12):
                raw.append(Breakpoint(diag_ij, BreakpointKind.CONTINUOUS_DIFFERENTIABLE))
    return PiecewiseDensity(d, _dedupe_breakpoints(raw, d), lambda t: pdf_spreading_3d(box, t))


def absorption_density_2d(box: Box) -> PiecewiseDensity:
    a, b = _require_2d(box)
    d = math.hypot(a, b)
    raw = [
        Breakpoint(a, BreakpointKind.INVERSE_SQRT_ON_RIGHT),
        Breakpoint(b, BreakpointKind.INVERSE_SQRT_ON_RIGHT),
    ]
    return PiecewiseDensity(d, _dedupe_breakpoints(raw, d), lambda t: pdf_absorption_2d(box, t))
