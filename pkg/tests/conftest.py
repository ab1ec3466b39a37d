"""Shared helpers: binned KS accumulation and a literal reflection stepper.

The reflection stepper is the independent oracle for the unfolding
construction: it bounces a point around the box with explicit specular
reflections and records wall-to-wall distances.  It is deliberately naive
and lives only in the test suite.
"""

import numpy as np
import pytest

from chordstats.core import Box
from chordstats.stats import Histogram, ks_distance_binned


def accumulate_ks(box: Box, gap_chunks, cdf, bins: int = 1 << 20) -> float:
    """Stream gap chunks into a fine histogram and KS it against `cdf`."""
    hist = Histogram.uniform(box.diag(), bins)
    for chunk in gap_chunks:
        hist.add(chunk)
    return ks_distance_binned(hist.edges, hist.counts, cdf)


def reflection_gaps(box: Box, start, direction, total_distance: float) -> np.ndarray:
    """Bounce lengths via explicit specular reflections (test oracle).

    Returns the distances between consecutive wall hits within the travel
    budget; the start-to-first-wall segment is dropped, matching the
    production convention.
    """
    sides = np.asarray(box.sides, dtype=np.float64)
    p = np.array(start, dtype=np.float64)
    v = np.array(direction, dtype=np.float64)
    travelled = 0.0
    gaps = []
    first = True
    while True:
        times = np.full(sides.size, np.inf)
        for i in range(sides.size):
            if v[i] > 0.0:
                times[i] = (sides[i] - p[i]) / v[i]
            elif v[i] < 0.0:
                times[i] = p[i] / (-v[i])
        t_hit = float(times.min())
        if travelled + t_hit > total_distance:
            break
        travelled += t_hit
        p += t_hit * v
        # reflect every axis that reached its wall (corners flip several)
        for i in np.nonzero(times - t_hit <= t_hit * 1e-12 + 1e-15)[0]:
            p[i] = sides[i] if v[i] > 0.0 else 0.0
            v[i] = -v[i]
        if first:
            first = False
        else:
            gaps.append(t_hit)
    return np.asarray(gaps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
