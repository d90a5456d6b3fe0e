"""Random digraphs from preferential attachment with closure events.

The process starts from a small seed digraph and runs ``steps`` events.
With probability ``1 - p_k22`` an ordinary preferential-attachment event
fires: a new node with one out-arc (weight alpha), a new node with one
in-arc (weight beta), or an arc between existing nodes (remaining weight),
with endpoints drawn proportionally to degree plus an additive offset.
With probability ``p_k22`` a closure event fires: a three-step walk
out/in/out from a degree-weighted start (u1 -> v1, pick a co-follower u2 of
v1, pick a target v2 of u2) adds the arc u1 -> v2, completing a K22 when
the four vertices are distinct.

Walk draws are uniform over *arc* slots, so repeated arcs carry their
multiplicity, and the walk may revisit its start; multi-arcs and self-loops
accumulated during construction are stripped from the final graph and
reported.  Degree-plus-offset draws use the mixture identity
(d + delta) / (arcs + delta * nodes): with probability proportional to
delta * nodes pick a node uniformly, otherwise take the endpoint of a
uniformly random arc.  This keeps every event O(1).

The in- and out-degree tails of the resulting graphs follow power laws
whose exponents have closed forms; ``theoretical_exponents`` computes them
and ``solve_delta`` inverts the in- (or out-) exponent for the offset.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InputError
from .exact import count_k22
from .graph import DirectedGraph
from .rng import derive_seed, philox_generator

_UNIFORM_BLOCK = 1 << 14


def default_seed_graph() -> DirectedGraph:
    """Closed K22 on four nodes: the smallest graph every walk step needs."""
    return DirectedGraph.from_arcs(np.array([0, 0, 1, 1]),
                                   np.array([2, 3, 2, 3]))


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one generation run."""

    p_k22: float
    alpha: float
    beta: float
    delta_in: float
    delta_out: float
    steps: int
    seed: int
    seed_graph: DirectedGraph | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_k22 <= 1.0:
            raise InputError("p_k22 must be in [0, 1]")
        if self.alpha < 0 or self.beta < 0:
            raise InputError("alpha and beta must be non-negative")
        if self.alpha + self.beta > 1.0 + 1e-12:
            raise InputError("alpha + beta must not exceed 1")
        if self.delta_in < 0 or self.delta_out < 0:
            raise InputError("degree offsets must be non-negative")
        if self.steps < 0:
            raise InputError("steps must be non-negative")
        if self.seed_graph is not None and self.seed_graph.m < 1:
            raise InputError("seed graph must contain at least one arc")

    def resolved_seed_graph(self) -> DirectedGraph:
        return self.seed_graph if self.seed_graph is not None \
            else default_seed_graph()


@dataclass(frozen=True)
class TheoreticalExponents:
    """Closed-form tail exponents and mean degree of the model."""

    a: float
    b: float
    slope_in: float
    slope_out: float
    mean_degree: float


@dataclass(frozen=True)
class GenerationResult:
    graph: DirectedGraph
    params: ModelParams
    nodes_added: int
    arcs_before_dedup: int
    multi_arcs_removed: int
    self_loops_removed: int
    event_counts: dict


def generate(params: ModelParams) -> GenerationResult:
    """Run the attachment process and return the cleaned graph.

    One uniform variate selects closure vs attachment; a second selects the
    attachment sub-case; endpoint draws follow in fixed order.  Identical
    parameters (including seed) reproduce the exact same graph.
    """
    g0 = params.resolved_seed_graph()
    t = params.steps
    p = params.p_k22
    alpha, beta = params.alpha, params.beta
    din, dout = params.delta_in, params.delta_out
    if alpha + beta < 1.0 and g0.m < 1:
        raise InputError("arc events need a seed graph with arcs")

    cap = t + g0.m
    src = np.empty(cap, dtype=np.int64)
    dst = np.empty(cap, dtype=np.int64)
    s0, d0 = g0.arcs()
    src[:g0.m] = s0
    dst[:g0.m] = d0
    out_lists = [array("i") for _ in range(g0.n)]
    in_lists = [array("i") for _ in range(g0.n)]
    for a, b in zip(s0.tolist(), d0.tolist()):
        out_lists[a].append(b)
        in_lists[b].append(a)
    m = g0.m
    n = g0.n

    rng = philox_generator(params.seed, 0)
    buf = rng.random(_UNIFORM_BLOCK)
    bi = 0

    def u() -> float:
        nonlocal bi, buf
        if bi == _UNIFORM_BLOCK:
            buf = rng.random(_UNIFORM_BLOCK)
            bi = 0
        val = buf[bi]
        bi += 1
        return val

    events = {"k22": 0, "alpha": 0, "beta": 0, "gamma": 0}
    for _ in range(t):
        if u() < p:
            events["k22"] += 1
            a = int(u() * m)
            nu = int(src[a])
            v1 = int(dst[a])
            il = in_lists[v1]
            u2 = il[int(u() * len(il))]
            ol = out_lists[u2]
            nv = ol[int(u() * len(ol))]
        else:
            e = u()
            if e < alpha:
                events["alpha"] += 1
                if u() * (m + din * n) < din * n:
                    nv = int(u() * n)
                else:
                    nv = int(dst[int(u() * m)])
                nu = n
                out_lists.append(array("i"))
                in_lists.append(array("i"))
                n += 1
            elif e < alpha + beta:
                events["beta"] += 1
                if u() * (m + dout * n) < dout * n:
                    nu = int(u() * n)
                else:
                    nu = int(src[int(u() * m)])
                nv = n
                out_lists.append(array("i"))
                in_lists.append(array("i"))
                n += 1
            else:
                events["gamma"] += 1
                if u() * (m + dout * n) < dout * n:
                    nu = int(u() * n)
                else:
                    nu = int(src[int(u() * m)])
                if u() * (m + din * n) < din * n:
                    nv = int(u() * n)
                else:
                    nv = int(dst[int(u() * m)])
        src[m] = nu
        dst[m] = nv
        out_lists[nu].append(nv)
        in_lists[nv].append(nu)
        m += 1

    s = src[:m]
    d = dst[:m]
    self_mask = s == d
    n_self = int(self_mask.sum())
    s2 = s[~self_mask]
    d2 = d[~self_mask]
    key = np.unique(s2 * np.int64(n) + d2)
    n_multi = len(s2) - len(key)
    graph = DirectedGraph.from_arcs(key // n, key - (key // n) * n, n=n)
    return GenerationResult(graph=graph, params=params,
                            nodes_added=n - g0.n, arcs_before_dedup=m,
                            multi_arcs_removed=n_multi,
                            self_loops_removed=n_self,
                            event_counts=events)


def k22_walk_sample(g: DirectedGraph, n_draws: int, seed: int) -> np.ndarray:
    """Standalone draws of the closure walk's final vertex on a fixed graph.

    Returns the v2 endpoints of ``n_draws`` independent out/in/out walks;
    their law is in-degree proportional, which is what drives the model's
    tail exponents.
    """
    if g.m == 0:
        raise InputError("walk needs at least one arc")
    rng = philox_generator(seed, 0)
    srcs, dsts = g.arcs()
    a = (rng.random(n_draws) * g.m).astype(np.int64)
    v1 = dsts[a]
    din = g.in_degrees
    u2 = g.in_targets[g.in_offsets[v1]
                      + (rng.random(n_draws) * din[v1]).astype(np.int64)]
    dout = g.out_degrees
    v2 = g.out_targets[g.out_offsets[u2]
                       + (rng.random(n_draws) * dout[u2]).astype(np.int64)]
    return v2


# -- closed forms --------------------------------------------------------------


def theoretical_exponents(params: ModelParams) -> TheoreticalExponents:
    """Tail exponents of the in/out degree distributions and mean degree."""
    p = params.p_k22
    growth = (1.0 - p) * (params.alpha + params.beta)
    if growth == 0.0:
        raise InfeasibleError("no node growth: (1-p)(alpha+beta) is zero")
    a = p + (1.0 - p) * (1.0 - params.beta) / (1.0 + growth * params.delta_in)
    b = p + (1.0 - p) * (1.0 - params.alpha) / (1.0 + growth
                                                * params.delta_out)
    slope_in = -(1.0 + 1.0 / a) if a > 0 else -math.inf
    slope_out = -(1.0 + 1.0 / b) if b > 0 else -math.inf
    return TheoreticalExponents(a=a, b=b, slope_in=slope_in,
                                slope_out=slope_out,
                                mean_degree=1.0 / growth)


def solve_delta(target_slope: float, direction: str, p: float, alpha: float,
                beta: float) -> float:
    """Degree offset that pins the chosen tail exponent, or raise.

    Inverts slope = -(1 + 1/A) where A = p + (1-p)(1-b) / (1 + (1-p)
    (alpha+beta) delta) with b = beta for the in-direction and alpha for
    the out-direction.  Returns math.inf at the upper feasibility boundary
    (the closure share alone reaches the target).  Raises InfeasibleError
    when the target cannot be met with a non-negative offset.
    """
    if direction not in ("in", "out"):
        raise InputError(f"direction must be 'in' or 'out', got {direction!r}")
    if not 0.0 <= p <= 1.0:
        raise InputError("p must be in [0, 1]")
    if target_slope >= -2.0:
        raise InfeasibleError("target slope must be strictly below -2")
    growth = (1.0 - p) * (alpha + beta)
    if growth <= 0.0:
        raise InfeasibleError("no node growth: (1-p)(alpha+beta) is zero")
    a_star = 1.0 / (-target_slope - 1.0)
    b = beta if direction == "in" else alpha
    gap = a_star - p
    if abs(gap) < 1e-15:
        return math.inf
    if gap < 0:
        raise InfeasibleError(
            f"slope {target_slope} needs attachment weight {a_star:.6g} "
            f"but the closure share alone contributes p = {p:.6g}")
    delta = ((1.0 - p) * (1.0 - b) / gap - 1.0) / growth
    if delta < 0:
        if delta > -1e-9:
            return 0.0
        lo, hi = feasible_p_interval(target_slope, direction, alpha, beta)
        raise InfeasibleError(
            f"slope {target_slope} with alpha={alpha}, beta={beta} needs a "
            f"negative offset at p = {p:.6g}; feasible p interval is "
            f"[{lo:.6g}, {hi:.6g}]")
    return delta


def feasible_p_interval(target_slope: float, direction: str, alpha: float,
                        beta: float) -> tuple[float, float]:
    """Closed interval of closure probabilities that admit the target slope."""
    if target_slope >= -2.0:
        raise InfeasibleError("target slope must be strictly below -2")
    a_star = 1.0 / (-target_slope - 1.0)
    b = beta if direction == "in" else alpha
    hi = a_star
    lo = 0.0 if b == 0.0 else max(0.0, (a_star - 1.0 + b) / b)
    return lo, min(hi, 1.0)


# -- matched sweep --------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    model: str           # "k22" or "baseline"
    p: float
    replicate: int
    seed: int
    delta_in: float
    icc: float | None
    nodes: int
    arcs: int
    stripped: int


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    target_slope: float

    def summary(self):
        """Per (model, p): (mean icc, spread as std, replicate count)."""
        groups: dict[tuple[str, float], list[float]] = {}
        for row in self.rows:
            if row.icc is not None:
                groups.setdefault((row.model, row.p), []).append(row.icc)
        out = {}
        for key, vals in groups.items():
            mean = sum(vals) / len(vals)
            if len(vals) > 1:
                var = sum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
                spread = math.sqrt(var)
            else:
                spread = None
            out[key] = (mean, spread, len(vals))
        return out


def icc_vs_p_sweep(base: ModelParams, p_values, replicates: int,
                   include_baseline: bool = True) -> SweepResult:
    """Exact interest clustering across closure probabilities, matched.

    For every p the in-exponent is held at the base parameters' theoretical
    value by re-solving delta_in (delta_out is set to the same offset, which
    with alpha == beta also pins the out-exponent).  A baseline without
    closure events is matched per p: its alpha and beta are scaled by (1-p)
    so the mean degree agrees, and its own delta_in is re-solved.
    """
    if replicates < 1:
        raise InputError("replicates must be >= 1")
    target = theoretical_exponents(base).slope_in
    rows: list[SweepRow] = []
    run_index = 0
    for p in p_values:
        try:
            d_in = solve_delta(target, "in", p, base.alpha, base.beta)
        except InfeasibleError as exc:
            raise InfeasibleError(f"sweep point p={p} infeasible: {exc}") \
                from None
        if math.isinf(d_in):
            raise InfeasibleError(f"sweep point p={p} sits on the "
                                  "feasibility boundary (infinite offset)")
        variants = [("k22", p, base.alpha, base.beta, d_in)]
        if include_baseline:
            alpha0 = (1.0 - p) * base.alpha
            beta0 = (1.0 - p) * base.beta
            d0 = solve_delta(target, "in", 0.0, alpha0, beta0)
            variants.append(("baseline", 0.0, alpha0, beta0, d0))
        for model, p_run, a_run, b_run, d_run in variants:
            for rep in range(replicates):
                seed = derive_seed(base.seed, run_index)
                run_index += 1
                params = ModelParams(p_k22=p_run, alpha=a_run, beta=b_run,
                                     delta_in=d_run, delta_out=d_run,
                                     steps=base.steps, seed=seed,
                                     seed_graph=base.seed_graph)
                res = generate(params)
                counts = count_k22(res.graph)
                icc = (4.0 * counts.k22 / counts.open_k22
                       if counts.open_k22 else None)
                rows.append(SweepRow(
                    model=model, p=float(p), replicate=rep, seed=seed,
                    delta_in=d_run, icc=icc, nodes=res.graph.n,
                    arcs=res.graph.m,
                    stripped=res.multi_arcs_removed + res.self_loops_removed))
    return SweepResult(tuple(rows), target)
