"""Sampling estimators for the K22 and triangle clustering coefficients.

Two schemes are provided.  Whole-graph edge sampling keeps every arc
independently with probability ``p`` and rescales the subsample's structure
counts by ``p**-l`` (l = arcs per pattern), which is unbiased for the full
counts.  Monte-Carlo fork sampling repeatedly draws a fork (two arcs into a
common head) with the correct size-biased law and inspects only the fork's
surroundings, so each iteration costs a couple of adjacency probes.

Traces record the point estimate, the raw numerator/denominator component
estimates and a running standard deviation checkpointed at powers of two,
computed by numerically stable streaming moment merges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from statistics import NormalDist

import numpy as np

from .errors import InfeasibleError, InputError, SampleTooSparseError
from .exact import count_k22
from .graph import DirectedGraph, UndirectedGraph
from .rng import philox_generator

_BLOCK = 8192


@dataclass(frozen=True)
class EdgeSampleConfig:
    """Arc-subsampling parameters: keep probability, seed, replicate count."""

    probability: float
    seed: int
    replicates: int = 1

    def __post_init__(self):
        if not 0.0 < self.probability <= 1.0:
            raise InputError("sampling probability must be in (0, 1]")
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")


@dataclass(frozen=True)
class ForkSampleConfig:
    """Monte-Carlo fork sampling parameters."""

    iterations: int
    seed: int

    def __post_init__(self):
        if self.iterations < 1:
            raise InputError("iterations must be >= 1")


@dataclass(frozen=True)
class EstimateTrace:
    """Result of one estimation run.

    ``y`` and ``y_o`` are the closed- and open-count component estimates;
    for the coefficient estimators the point estimate equals 4*y/y_o.
    ``running_std`` holds the estimated standard deviation of the point
    estimate at each entry of ``checkpoints``.
    """

    estimate: float
    y: float
    y_o: float
    iterations_done: int
    checkpoints: tuple[int, ...] = ()
    checkpoint_estimates: tuple[float, ...] = ()
    running_std: tuple[float, ...] = ()
    raw_x: int | None = None
    raw_x_o: int | None = None


# -- whole-graph edge sampling -------------------------------------------------


def edge_sample(g: DirectedGraph, cfg: EdgeSampleConfig,
                replicate: int = 0) -> DirectedGraph:
    """Keep each arc independently with probability ``cfg.probability``.

    Arcs are visited in canonical (sorted) order, so the sample depends only
    on the graph, the seed and the replicate index.
    """
    if not 0 <= replicate < cfg.replicates:
        raise InputError("replicate index out of range")
    rng = philox_generator(cfg.seed, replicate)
    keep = rng.random(g.m) < cfg.probability
    src, dst = g.arcs()
    return DirectedGraph.from_arcs(src[keep], dst[keep], n=g.n,
                                   ext_ids=g.ext_ids)


def estimate_from_sample(sample: DirectedGraph, p_s: float) -> EstimateTrace:
    """Rescale a subsample's K22 counts into unbiased full-graph estimates.

    A closed K22 (4 arcs) survives sampling with probability p**4 and an
    open K22 (3 arcs) with p**3, so Y = X/p**4 and Y_o = X_o/p**3 estimate
    the full counts and 4Y/Y_o estimates the interest clustering
    coefficient.  Raises when the sample contains no open K22 at all.
    """
    if not 0.0 < p_s <= 1.0:
        raise InputError("sampling probability must be in (0, 1]")
    res = count_k22(sample)
    y = res.k22 / p_s ** 4
    y_o = res.open_k22 / p_s ** 3
    if res.open_k22 == 0:
        raise SampleTooSparseError(
            "sample too sparse: no open K22 survived", y=y)
    return EstimateTrace(estimate=4.0 * y / y_o, y=y, y_o=y_o,
                         iterations_done=1, raw_x=res.k22,
                         raw_x_o=res.open_k22)


# -- variance-driven choice of the sampling probability ------------------------


@dataclass(frozen=True)
class OverlapProfile:
    """Pairwise pattern-overlap fractions |Delta_i| / |A|**2.

    ``delta_frac[i-1]`` is the fraction of ordered pattern pairs (self pairs
    included) sharing exactly i arcs, for i = 1..l.  The profile bounds the
    variance of the subsample count X: Var(X) <= sum_i p**(2l-i) |Delta_i|.
    """

    delta_frac: tuple[float, ...]

    def __post_init__(self):
        if len(self.delta_frac) not in (3, 4):
            raise InputError("profile length must be 3 or 4 arcs")
        if any(d < 0 for d in self.delta_frac):
            raise InputError("overlap fractions must be non-negative")

    @property
    def l(self) -> int:
        return len(self.delta_frac)


def chebyshev_min_probability(profile: OverlapProfile, epsilon: float,
                              k: float, pattern_count_inv: float) -> float:
    """Smallest keep-probability meeting a relative-precision target.

    Solves for the least p in (0, 1] with

        sum_{i=1..l} delta_frac[i] * p**(2l-i)  <=  epsilon**2 * p**(2l),

    i.e. the overlap variance bound keeps the relative standard deviation of
    the rescaled count within ``epsilon``; by Chebyshev's inequality the
    relative error then exceeds k*epsilon with probability at most 1/k**2.
    The left side is found by monotone bisection to 1e-6 relative tolerance.
    With an all-zero profile the i = l self-overlap term 1/|A| (passed as
    ``pattern_count_inv``) is used alone, giving the independent-pattern
    bound p = (pattern_count_inv / epsilon**2) ** (1/l).
    Raises when no p <= 1 satisfies the bound.
    """
    if epsilon <= 0 or k <= 0:
        raise InputError("epsilon and k must be positive")
    if pattern_count_inv < 0:
        raise InputError("pattern_count_inv must be non-negative")
    eps2 = epsilon * epsilon
    l = profile.l
    deltas = list(profile.delta_frac)
    if all(d == 0.0 for d in deltas):
        if pattern_count_inv == 0.0:
            raise InputError("all overlap terms are zero; supply the "
                             "self-overlap 1/|A| as pattern_count_inv")
        deltas[l - 1] = pattern_count_inv

    def excess(p: float) -> float:
        return sum(d / p ** i for i, d in enumerate(deltas, start=1)) - eps2

    if excess(1.0) > 0.0:
        raise InfeasibleError(
            "no sampling probability <= 1 reaches the requested precision")
    lo, hi = 1.0, 1.0
    while excess(lo) <= 0.0 and lo > 1e-300:
        hi = lo
        lo /= 2.0
    while (hi - lo) / hi > 1e-6:
        mid = 0.5 * (lo + hi)
        if excess(mid) <= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def measure_overlap_profile(g: DirectedGraph,
                            pattern: str = "k22") -> OverlapProfile:
    """Brute-force overlap profile of a small graph's pattern instances.

    Enumerates every instance as its arc set and counts ordered pairs by
    shared-arc count (self pairs land in the i = l bin).  Quadratic in the
    number of instances; intended for profiling small pilot graphs.
    """
    instances = _pattern_arc_sets(g, pattern)
    a = len(instances)
    if a == 0:
        raise InputError(f"graph contains no {pattern} instance")
    if a > 20000:
        raise InputError("too many instances for pairwise overlap "
                         f"measurement ({a})")
    l = 4 if pattern == "k22" else 3
    counts = [0] * (l + 1)
    for s1 in instances:
        for s2 in instances:
            shared = len(s1 & s2)
            if shared:
                counts[shared] += 1
    total = a * a
    return OverlapProfile(tuple(counts[i] / total for i in range(1, l + 1)))


def _pattern_arc_sets(g: DirectedGraph, pattern: str):
    sets = []
    if pattern == "k22":
        for c in range(g.n):
            for d in range(c + 1, g.n):
                bottoms = np.intersect1d(g.in_neighbors(c),
                                         g.in_neighbors(d))
                for a, b in combinations(bottoms.tolist(), 2):
                    sets.append(frozenset({(a, c), (a, d), (b, c), (b, d)}))
    elif pattern == "open_k22":
        for x in range(g.n):
            nbrs = g.in_neighbors(x).tolist()
            for a, b in combinations(nbrs, 2):
                for s, other in ((a, b), (b, a)):
                    for w in g.out_neighbors(s).tolist():
                        if w != x and w != other:
                            sets.append(frozenset({(a, x), (b, x), (s, w)}))
    else:
        raise InputError(f"unknown pattern {pattern!r}")
    return sets


# -- Monte-Carlo fork sampling --------------------------------------------------


class _MomentTracker:
    """Streaming means, variances and covariance of (x, x_o) draws."""

    def __init__(self):
        self.n = 0
        self.mean_x = 0.0
        self.mean_y = 0.0
        self.m2x = 0.0
        self.m2y = 0.0
        self.cxy = 0.0

    def update(self, xs: np.ndarray, ys: np.ndarray):
        nb = len(xs)
        if nb == 0:
            return
        bx = float(xs.mean())
        by = float(ys.mean())
        dx = xs - bx
        dy = ys - by
        m2xb = float(np.dot(dx, dx))
        m2yb = float(np.dot(dy, dy))
        cxyb = float(np.dot(dx, dy))
        na = self.n
        tot = na + nb
        ddx = bx - self.mean_x
        ddy = by - self.mean_y
        scale = na * nb / tot
        self.m2x += m2xb + ddx * ddx * scale
        self.m2y += m2yb + ddy * ddy * scale
        self.cxy += cxyb + ddx * ddy * scale
        self.mean_x += ddx * nb / tot
        self.mean_y += ddy * nb / tot
        self.n = tot

    def ratio_std(self) -> float:
        """Delta-method std of 2 * mean_x / mean_y."""
        if self.n < 2 or self.mean_y == 0.0:
            return 0.0
        n = self.n
        vx = self.m2x / (n - 1)
        vy = self.m2y / (n - 1)
        cv = self.cxy / (n - 1)
        r = self.mean_x / self.mean_y
        var = (vx + r * r * vy - 2.0 * r * cv) / (n * self.mean_y ** 2)
        return 2.0 * math.sqrt(max(var, 0.0))


def _checkpoint_schedule(n_it: int):
    points = []
    c = 1
    while c < n_it:
        points.append(c)
        c *= 2
    points.append(n_it)
    return points


def mc_fork_icc(g: DirectedGraph, cfg: ForkSampleConfig) -> EstimateTrace:
    """Estimate the interest clustering coefficient by fork sampling.

    Each iteration picks a head vertex v with probability proportional to
    C(d_in(v), 2), then two distinct in-neighbors u1, u2 uniformly.  The
    number of shared out-targets of u1 and u2 besides v counts the closed
    K22s on that fork, and the forks' spare out-degrees count the open ones:

        X   = |N+(u1) & N+(u2) \\ {v}|
        X_o = d+(u1)-1 + d+(u2)-1 - [u2 in N+(u1)] - [u1 in N+(u2)]

    With F the total number of forks, Y = F/(2 n) * sum X and
    Y_o = F/n * sum X_o are unbiased for the closed and open counts and
    Z = 4Y/Y_o estimates the coefficient.
    """
    din = g.in_degrees.astype(np.int64)
    weights = (din * (din - 1) // 2).astype(np.float64)
    total_forks = int(np.sum(din * (din - 1) // 2, dtype=np.int64))
    if total_forks == 0:
        raise InputError("no vertex has in-degree >= 2: no fork to sample")
    cum = np.cumsum(weights)
    rng = philox_generator(cfg.seed, 0)
    out_sets = [set(g.out_neighbors(u).tolist()) for u in range(g.n)]
    out_deg = g.out_degrees

    sum_x = 0
    sum_xo = 0
    tracker = _MomentTracker()
    checkpoints = _checkpoint_schedule(cfg.iterations)
    stds: list[float] = []
    zs: list[float] = []
    done = 0
    for target in checkpoints:
        while done < target:
            nb = min(_BLOCK, target - done)
            vs = np.searchsorted(cum, rng.random(nb) * cum[-1], side="right")
            d = din[vs]
            i1 = (rng.random(nb) * d).astype(np.int64)
            j = (rng.random(nb) * (d - 1)).astype(np.int64)
            j = j + (j >= i1)
            base = g.in_offsets[vs]
            u1s = g.in_targets[base + i1]
            u2s = g.in_targets[base + j]
            xs = np.empty(nb, dtype=np.float64)
            ys = np.empty(nb, dtype=np.float64)
            for t in range(nb):
                v = int(vs[t])
                u1 = int(u1s[t])
                u2 = int(u2s[t])
                s1 = out_sets[u1]
                s2 = out_sets[u2]
                inter = s1 & s2
                x = len(inter) - (1 if v in inter else 0)
                xo = (int(out_deg[u1]) - 1 + int(out_deg[u2]) - 1
                      - (1 if u2 in s1 else 0) - (1 if u1 in s2 else 0))
                xs[t] = x
                ys[t] = xo
            sum_x += int(xs.sum())
            sum_xo += int(ys.sum())
            tracker.update(xs, ys)
            done += nb
        stds.append(tracker.ratio_std())
        zs.append(2.0 * sum_x / sum_xo if sum_xo else math.nan)
    y = total_forks * sum_x / (2.0 * done)
    y_o = total_forks * sum_xo / float(done)
    if sum_xo == 0:
        raise SampleTooSparseError("undefined estimate: every sampled fork "
                                   "had zero open K22s", y=y)
    return EstimateTrace(estimate=4.0 * y / y_o, y=y, y_o=y_o,
                         iterations_done=done,
                         checkpoints=tuple(checkpoints),
                         checkpoint_estimates=tuple(zs),
                         running_std=tuple(stds),
                         raw_x=sum_x, raw_x_o=sum_xo)


def mc_triangle_cc(graph, variant: str, iterations: int,
                   seed: int) -> EstimateTrace:
    """Estimate a triangle clustering coefficient by center sampling.

    ucc: pick a center of an undirected graph proportionally to C(d, 2),
    then two distinct neighbors; success iff they are adjacent.  tcc/ccc:
    pick a center v of a digraph proportionally to d_in * d_out, then an
    in-arc u->v and an out-arc v->w (u = w possible and never a success);
    success iff u->w (tcc) or w->u (ccc).  The success fraction estimates
    the coefficient because every closed structure is counted at each of
    its eligible centers.
    """
    if iterations < 1:
        raise InputError("iterations must be >= 1")
    if variant == "ucc":
        if not isinstance(graph, UndirectedGraph):
            raise InputError("ucc variant needs an undirected graph")
        deg = graph.degrees.astype(np.int64)
        weights = (deg * (deg - 1) // 2).astype(np.float64)
        offsets, targets = graph.offsets, graph.targets
        nbr_sets = [set(graph.neighbors(u).tolist()) for u in range(graph.n)]
    elif variant in ("tcc", "ccc"):
        if not isinstance(graph, DirectedGraph):
            raise InputError(f"{variant} variant needs a directed graph")
        weights = (graph.in_degrees * graph.out_degrees).astype(np.float64)
        nbr_sets = [set(graph.out_neighbors(u).tolist())
                    for u in range(graph.n)]
    else:
        raise InputError(f"unknown variant {variant!r}")
    total = float(weights.sum())
    if total == 0:
        raise InputError("no eligible center: fork population is empty")
    cum = np.cumsum(weights)
    rng = philox_generator(seed, 0)

    successes = 0
    checkpoints = _checkpoint_schedule(iterations)
    stds: list[float] = []
    zs: list[float] = []
    done = 0
    for target in checkpoints:
        while done < target:
            nb = min(_BLOCK, target - done)
            vs = np.searchsorted(cum, rng.random(nb) * cum[-1], side="right")
            if variant == "ucc":
                d = graph.degrees[vs]
                i1 = (rng.random(nb) * d).astype(np.int64)
                j = (rng.random(nb) * (d - 1)).astype(np.int64)
                j = j + (j >= i1)
                base = offsets[vs]
                a = targets[base + i1]
                b = targets[base + j]
                for t in range(nb):
                    if int(b[t]) in nbr_sets[int(a[t])]:
                        successes += 1
            else:
                din = graph.in_degrees[vs]
                dout = graph.out_degrees[vs]
                ui = (rng.random(nb) * din).astype(np.int64)
                wi = (rng.random(nb) * dout).astype(np.int64)
                us = graph.in_targets[graph.in_offsets[vs] + ui]
                ws = graph.out_targets[graph.out_offsets[vs] + wi]
                if variant == "tcc":
                    for t in range(nb):
                        if int(ws[t]) in nbr_sets[int(us[t])]:
                            successes += 1
                else:
                    for t in range(nb):
                        if int(us[t]) in nbr_sets[int(ws[t])]:
                            successes += 1
            done += nb
        p_hat = successes / done
        zs.append(p_hat)
        stds.append(math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / done))
    return EstimateTrace(estimate=successes / done, y=float(successes),
                         y_o=float(done), iterations_done=done,
                         checkpoints=tuple(checkpoints),
                         checkpoint_estimates=tuple(zs),
                         running_std=tuple(stds))


def mc_required_iterations(p_hat: float, epsilon: float,
                           confidence: float) -> int:
    """Iterations for a relative-precision target on a Bernoulli mean.

    Returns ceil(z**2 * (1 - p_hat) / (p_hat * epsilon**2)) with z the
    two-sided normal quantile of ``confidence``.  Note: round-number
    rules of thumb in circulation correspond to z around 2.75; this
    function always derives z from the confidence argument (0.99 gives
    z = 2.576).
    """
    if not 0.0 < p_hat < 1.0:
        raise InputError("p_hat must be in (0, 1)")
    if epsilon <= 0:
        raise InputError("epsilon must be positive")
    if not 0.0 < confidence < 1.0:
        raise InputError("confidence must be in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    return math.ceil(z * z * (1.0 - p_hat) / (p_hat * epsilon * epsilon))
