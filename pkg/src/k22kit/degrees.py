"""Degree distributions and log-binned power-law tail fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .graph import DirectedGraph, UndirectedGraph


@dataclass(frozen=True)
class DegreeHistogram:
    """Counts ``counts[k]`` of nodes with degree k, for one direction."""

    direction: str           # "in", "out" or "undirected"
    counts: np.ndarray       # index = degree, value = node count
    n: int

    def as_dict(self) -> dict[int, int]:
        nz = np.nonzero(self.counts)[0]
        return {int(k): int(self.counts[k]) for k in nz}


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through log-binned (degree, frequency) points."""

    slope: float
    intercept: float          # log10 of the frequency at degree 1
    tail_start: int
    bins_per_decade: int
    r_squared: float
    bin_centers: tuple[float, ...]
    bin_means: tuple[float, ...]


def degree_distribution(g, direction: str) -> DegreeHistogram:
    """Histogram of node degrees in the requested direction."""
    if isinstance(g, UndirectedGraph):
        if direction != "undirected":
            raise InputError("undirected graphs only have direction "
                             "'undirected'")
        deg = g.degrees
    elif isinstance(g, DirectedGraph):
        if direction == "in":
            deg = g.in_degrees
        elif direction == "out":
            deg = g.out_degrees
        else:
            raise InputError(f"unknown direction {direction!r}")
    else:
        raise InputError(f"not a graph: {g!r}")
    counts = np.bincount(deg)
    counts.setflags(write=False)
    return DegreeHistogram(direction, counts, g.n)


def log_binned_points(hist: DegreeHistogram, bins_per_decade: int,
                      tail_start: int):
    """Average the histogram inside geometrically widening degree bins.

    Bin j covers degrees in [tail_start * r**j, tail_start * r**(j+1)) with
    r = 10**(1/bins_per_decade).  The bin value is the mean of counts over
    *all* integer degrees in the bin (zeros included), which keeps sparse
    tails unbiased; bins containing no integer or no mass are dropped.
    Returns (centers, means) arrays.
    """
    if bins_per_decade < 1:
        raise InputError("bins_per_decade must be >= 1")
    if tail_start < 1:
        raise InputError("tail_start must be >= 1")
    counts = hist.counts
    max_deg = len(counts) - 1
    r = 10.0 ** (1.0 / bins_per_decade)
    centers = []
    means = []
    lo_edge = float(tail_start)
    while lo_edge <= max_deg:
        hi_edge = lo_edge * r
        lo = int(math.ceil(lo_edge))
        hi = min(int(math.ceil(hi_edge)) - 1, max_deg)
        if hi >= lo:
            span = counts[lo:hi + 1]
            total = int(span.sum())
            if total > 0:
                centers.append(math.sqrt(lo_edge * hi_edge))
                means.append(total / (hi - lo + 1))
        lo_edge = hi_edge
    return np.array(centers), np.array(means)


def fit_power_law(hist: DegreeHistogram, bins_per_decade: int = 10,
                  tail_start: int = 1) -> PowerLawFit:
    """Fit a power-law exponent to the tail of a degree histogram.

    The histogram is log-binned from ``tail_start`` upward and a straight
    line is fit to (log10 bin center, log10 mean frequency) by least
    squares.  The slope is the exponent estimate (negative for heavy
    tails).  Raises if fewer than two usable bins survive.
    """
    centers, means = log_binned_points(hist, bins_per_decade, tail_start)
    if len(centers) < 2:
        raise InputError("insufficient tail: need at least two nonempty "
                         "log-bins at or past tail_start")
    x = np.log10(centers)
    y = np.log10(means)
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return PowerLawFit(float(slope), float(intercept), int(tail_start),
                       int(bins_per_decade), r2,
                       tuple(float(c) for c in centers),
                       tuple(float(v) for v in means))
