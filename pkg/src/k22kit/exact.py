"""Exact structure counts and the five clustering coefficients.

Counting is exact integer arithmetic end to end.  The compiled kernels
accumulate in signed 64-bit integers; before dispatching, a cheap float
upper bound on every accumulator is checked and, if a count could approach
2**62, the K22 scan transparently falls back to an arbitrary-precision
Python implementation (other counters raise instead, since no realistic
input reaches that scale before the K22 totals do).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext

import numpy as np

from . import _kernels
from .errors import CountingError, InputError
from .graph import DirectedGraph, UndirectedGraph, mutual_graph, \
    undirected_projection

_OVERFLOW_LIMIT = float(2 ** 62)
_SMALL_GRAPH = 50000


def _resolve_threads(threads: int | None, n: int) -> int:
    if threads is not None:
        return max(1, int(threads))
    if n < _SMALL_GRAPH:
        return 1
    return os.cpu_count() or 1


def _chunk_bounds(cost: np.ndarray, parts: int):
    """Split [0, n) into ranges of roughly equal summed cost."""
    n = len(cost)
    if parts <= 1 or n == 0:
        return [(0, n)]
    cum = np.cumsum(cost + 1.0)
    targets = cum[-1] * np.arange(1, parts) / parts
    cuts = np.searchsorted(cum, targets).tolist()
    bounds = []
    lo = 0
    for cut in cuts + [n]:
        hi = max(lo, min(int(cut), n))
        if hi > lo:
            bounds.append((lo, hi))
            lo = hi
    if lo < n:
        bounds.append((lo, n))
    return bounds


def _run_chunked(fn, args, cost: np.ndarray, threads: int, extra=()):
    """Run a range kernel over work-balanced chunks, merging in order."""
    n = len(cost)
    if threads == 1:
        return [fn(*args, 0, n, *extra)]
    bounds = _chunk_bounds(cost, threads * 4)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, *args, lo, hi, *extra)
                   for lo, hi in bounds]
        return [f.result() for f in futures]


@dataclass(frozen=True)
class StructureCounts:
    """Exact tallies of the closed/open structures a coefficient needs.

    Directed fields are zero when the counts describe an undirected graph.
    ``open_directed`` is the number of (in-arc, out-arc) pairs meeting at a
    center, the shared denominator of the two directed triangle coefficients.
    """

    k22: int = 0
    open_k22: int = 0
    transitive: int = 0
    cyclic: int = 0
    open_directed: int = 0
    und_triangles: int = 0
    connected_triplets: int = 0
    und_k22: int = 0
    open_und_k22: int = 0

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) < 0:
                raise CountingError(f"negative count {name}")
        if self.open_k22 < 4 * self.k22:
            raise CountingError("open K22 count below 4x closed count")
        if self.open_directed < self.transitive:
            raise CountingError("transitive count exceeds open triple count")
        if self.open_directed < 3 * self.cyclic:
            raise CountingError("cyclic count exceeds open triple count / 3")


@dataclass(frozen=True)
class PerNodeK22Stats:
    """Closed/open K22 tallies attributed to one owner vertex each.

    With "top" attribution a closed K22 is owned by the smaller-id followed
    vertex and an open K22 by the vertex its fork points at, so the arrays
    sum to the global counts.  "bottom" attribution is the symmetric variant
    over follower vertices.
    """

    k22_top: np.ndarray
    open_k22_top: np.ndarray
    attribution: str = "top"

    def local_icc(self):
        """(values, defined_mask): 4*k/open per node, NaN where open == 0."""
        defined = self.open_k22_top > 0
        vals = np.full(len(self.k22_top), np.nan)
        vals[defined] = 4.0 * self.k22_top[defined] / self.open_k22_top[defined]
        return vals, defined


@dataclass(frozen=True)
class K22Result:
    k22: int
    open_k22: int
    transitive: int
    inner_iterations: int
    transposed: bool
    per_node: PerNodeK22Stats | None = None


def _scan_cost(degrees) -> int:
    d = degrees.astype(np.int64)
    return int(np.sum(d * (d - 1)))


def count_k22(g: DirectedGraph, want_per_node: bool = False,
              attribution: str = "top", auto_transpose: bool = True,
              threads: int | None = None) -> K22Result:
    """Count closed and open K22s, optionally attributed per owner vertex.

    The scan cost is m + sum d_out*(d_out-1); when per-node output is not
    requested the graph is scanned transposed whenever the in-direction sum
    is smaller (a reversed K22 is still a K22, so totals are unchanged).
    Requesting "bottom" attribution scans the transpose so owners are the
    follower vertices.
    """
    if attribution not in ("top", "bottom"):
        raise InputError(f"unknown attribution {attribution!r}")
    if want_per_node:
        transposed = attribution == "bottom"
    elif auto_transpose:
        transposed = _scan_cost(g.in_degrees) < _scan_cost(g.out_degrees)
    else:
        transposed = False
    if transposed:
        in_off, in_tgt = g.out_offsets, g.out_targets
        out_off, out_tgt = g.in_offsets, g.in_targets
    else:
        in_off, in_tgt = g.in_offsets, g.in_targets
        out_off, out_tgt = g.out_offsets, g.out_targets

    out_deg = np.diff(out_off).astype(np.float64)
    in_deg = np.diff(in_off)
    row = np.repeat(np.arange(g.n), in_deg)
    reach = np.bincount(row, weights=out_deg[in_tgt], minlength=g.n)
    open_bound = float(np.sum(reach * np.maximum(in_deg - 1.0, 0.0)))
    k22_bound = float(np.sum(reach * reach)) / 2.0
    ktop = np.zeros(g.n if want_per_node else 0, dtype=np.int64)
    otop = np.zeros(g.n if want_per_node else 0, dtype=np.int64)
    if max(open_bound, k22_bound) * 1.01 > _OVERFLOW_LIMIT:
        k22, openk, trans, iters, ktop, otop = _k22_python(
            in_off, in_tgt, out_off, out_tgt, g.n, want_per_node)
        ktop = np.asarray(ktop, dtype=np.int64) if want_per_node else ktop
        otop = np.asarray(otop, dtype=np.int64) if want_per_node else otop
    else:
        nthreads = _resolve_threads(threads, g.n)
        cost = reach + in_deg
        parts = _run_chunked(
            _kernels.k22_range,
            (in_off, in_tgt, out_off, out_tgt, g.n), cost, nthreads,
            extra=(want_per_node, ktop, otop))
        k22 = sum(p[0] for p in parts)
        openk = sum(p[1] for p in parts)
        trans = sum(p[2] for p in parts)
        iters = sum(p[3] for p in parts)
    per_node = None
    if want_per_node:
        per_node = PerNodeK22Stats(ktop, otop, attribution)
    return K22Result(int(k22), int(openk), int(trans), int(iters),
                     transposed, per_node)


def _k22_python(in_off, in_tgt, out_off, out_tgt, n, per_node):
    """Arbitrary-precision reference scan, used when int64 could overflow."""
    k22 = openk = trans = iters = 0
    ktop = np.zeros(n if per_node else 0, dtype=object)
    otop = np.zeros(n if per_node else 0, dtype=object)
    for x in range(n):
        lo, hi = int(in_off[x]), int(in_off[x + 1])
        din = hi - lo
        if din == 0:
            continue
        members = set(int(v) for v in in_tgt[lo:hi])
        occ: dict[int, int] = {}
        internal = 0
        sum_dout = 0
        for v in in_tgt[lo:hi]:
            v = int(v)
            sum_dout += int(out_off[v + 1] - out_off[v]) - 1
            for w in out_tgt[int(out_off[v]):int(out_off[v + 1])]:
                iters += 1
                w = int(w)
                if w == x:
                    continue
                if w in members:
                    internal += 1
                occ[w] = occ.get(w, 0) + 1
        x_open = sum_dout * (din - 1) - internal
        x_k22 = 0
        for w, c in occ.items():
            iters += 1
            if w > x and c >= 2:
                x_k22 += c * (c - 1) // 2
        k22 += x_k22
        openk += x_open
        trans += internal
        if per_node:
            ktop[x] = x_k22
            otop[x] = x_open
    return k22, openk, trans, iters, ktop, otop


def count_directed_triangles(g: DirectedGraph, threads: int | None = None):
    """(transitive, cyclic, open_directed) counts of a digraph."""
    din = g.in_degrees.astype(np.float64)
    dout = g.out_degrees.astype(np.float64)
    if float(np.sum(din * dout)) > _OVERFLOW_LIMIT:
        raise CountingError("open triple count would overflow int64")
    nthreads = _resolve_threads(threads, g.n)
    row = np.repeat(np.arange(g.n), g.in_degrees)
    reach = np.bincount(row, weights=dout[g.in_targets], minlength=g.n)
    trans = sum(_run_chunked(
        _kernels.transitive_range,
        (g.in_offsets, g.in_targets, g.out_offsets, g.out_targets, g.n),
        reach + din, nthreads))
    row = np.repeat(np.arange(g.n), g.out_degrees)
    reach_out = np.bincount(row, weights=dout[g.out_targets], minlength=g.n)
    three = sum(_run_chunked(
        _kernels.cyclic_range,
        (g.in_offsets, g.in_targets, g.out_offsets, g.out_targets, g.n),
        reach_out + din, nthreads))
    if three % 3:
        raise CountingError("cyclic scan total not divisible by 3")
    open_directed = int(np.sum(g.in_degrees * g.out_degrees, dtype=np.int64))
    return int(trans), int(three) // 3, open_directed


def count_undirected_triangles(ug: UndirectedGraph,
                               threads: int | None = None):
    """(triangles, connected triplets) of a simple undirected graph."""
    d = ug.degrees.astype(np.float64)
    if float(np.sum(d * d)) > _OVERFLOW_LIMIT:
        raise CountingError("triplet count would overflow int64")
    nthreads = _resolve_threads(threads, ug.n)
    row = np.repeat(np.arange(ug.n), ug.degrees)
    reach = np.bincount(row, weights=d[ug.targets], minlength=ug.n)
    tri = sum(_run_chunked(_kernels.und_triangle_range,
                           (ug.offsets, ug.targets, ug.n), reach, nthreads))
    deg = ug.degrees.astype(np.int64)
    triplets = int(np.sum(deg * (deg - 1) // 2, dtype=np.int64))
    return int(tri), triplets


def count_undirected_k22(ug: UndirectedGraph, threads: int | None = None):
    """(4-cycles, 3-edge paths on 4 distinct vertices), each counted once."""
    d = ug.degrees.astype(np.float64)
    row = np.repeat(np.arange(ug.n), ug.degrees)
    reach = np.bincount(row, weights=d[ug.targets], minlength=ug.n)
    if float(np.sum(reach * reach)) / 2.0 > _OVERFLOW_LIMIT:
        raise CountingError("4-cycle count would overflow int64")
    nthreads = _resolve_threads(threads, ug.n)
    pairs = sum(_run_chunked(_kernels.und_four_cycle_pairs_range,
                             (ug.offsets, ug.targets, ug.n), reach,
                             nthreads))
    if pairs % 2:
        raise CountingError("4-cycle pair scan total is odd")
    tri, _ = count_undirected_triangles(ug, threads)
    u, v = ug.edges()
    deg = ug.degrees.astype(np.int64)
    wedge_ends = int(np.sum((deg[u] - 1) * (deg[v] - 1), dtype=np.int64))
    return int(pairs) // 2, wedge_ends - 3 * tri


def undirected_structure_counts(ug: UndirectedGraph,
                                threads: int | None = None) -> StructureCounts:
    """Structure counts of an undirected graph (directed fields zero)."""
    tri, triplets = count_undirected_triangles(ug, threads)
    k4, paths = count_undirected_k22(ug, threads)
    return StructureCounts(und_triangles=tri, connected_triplets=triplets,
                           und_k22=k4, open_und_k22=paths)


def full_structure_counts(g: DirectedGraph,
                          threads: int | None = None) -> StructureCounts:
    """All structure counts of a digraph; undirected fields come from its
    undirected projection."""
    res = count_k22(g, threads=threads)
    trans, cyc, open_dir = count_directed_triangles(g, threads)
    if trans != res.transitive:
        raise CountingError("transitive counts disagree between scans")
    proj = undirected_structure_counts(undirected_projection(g), threads)
    return StructureCounts(k22=res.k22, open_k22=res.open_k22,
                           transitive=trans, cyclic=cyc,
                           open_directed=open_dir,
                           und_triangles=proj.und_triangles,
                           connected_triplets=proj.connected_triplets,
                           und_k22=proj.und_k22,
                           open_und_k22=proj.open_und_k22)


# -- coefficients -------------------------------------------------------------


@dataclass(frozen=True)
class Coefficient:
    """Exact rational value of one clustering coefficient."""

    numerator: int
    denominator: int

    @property
    def defined(self) -> bool:
        return self.denominator != 0

    @property
    def value(self) -> float | None:
        if not self.defined:
            return None
        return self.numerator / self.denominator

    def decimal(self, places: int = 9) -> str:
        """Exact decimal rendering, or "none" when undefined."""
        if not self.defined:
            return "none"
        with localcontext() as ctx:
            ctx.prec = 60
            q = Decimal(self.numerator) / Decimal(self.denominator)
            q = q.quantize(Decimal(1).scaleb(-places),
                           rounding=ROUND_HALF_EVEN)
            return f"{q:.{places}f}"


@dataclass(frozen=True)
class CoefficientReport:
    """The five clustering coefficients and their mutual-subtracted variants."""

    icc: Coefficient
    tcc: Coefficient
    ccc: Coefficient
    ucc: Coefficient
    mcc: Coefficient
    icc_nomutual: Coefficient
    tcc_nomutual: Coefficient
    ccc_nomutual: Coefficient
    ucc_nomutual: Coefficient
    mcc_nomutual: Coefficient

    def items(self):
        return [(name, getattr(self, name))
                for name in ("icc", "tcc", "ccc", "ucc", "mcc",
                             "icc_nomutual", "tcc_nomutual", "ccc_nomutual",
                             "ucc_nomutual", "mcc_nomutual")]


def _adjusted(label: str, value: int) -> int:
    if value < 0:
        raise CountingError(
            f"mutual subtraction drove {label} negative ({value}); "
            "the input counts are inconsistent")
    return value


def coefficients(full: StructureCounts,
                 mutual: StructureCounts) -> CoefficientReport:
    """Compute all coefficients from full-graph and mutual-graph counts.

    The mutual-subtracted variants remove the structures that reciprocated
    pairs induce on their own: every mutual triangle accounts for 2 cyclic
    and 4 transitive triangles, every mutual wedge for 2 open directed
    triples, every mutual 4-cycle for 2 closed K22s, and every mutual
    3-edge path for 2 open K22s.  A zero denominator makes the coefficient
    undefined; a negative adjusted count raises, since it can only come
    from inconsistent inputs.
    """
    icc = Coefficient(4 * full.k22, full.open_k22)
    tcc = Coefficient(full.transitive, full.open_directed)
    ccc = Coefficient(3 * full.cyclic, full.open_directed)
    ucc = Coefficient(3 * full.und_triangles, full.connected_triplets)
    mcc = Coefficient(3 * mutual.und_triangles, mutual.connected_triplets)

    k22_nm = _adjusted("closed K22s", full.k22 - 2 * mutual.und_k22)
    open_k22_nm = _adjusted("open K22s",
                            full.open_k22 - 2 * mutual.open_und_k22)
    trans_nm = _adjusted("transitive triangles",
                         full.transitive - 4 * mutual.und_triangles)
    cyc_nm = _adjusted("cyclic triangles",
                       full.cyclic - 2 * mutual.und_triangles)
    open_dir_nm = _adjusted("open directed triples",
                            full.open_directed
                            - 2 * mutual.connected_triplets)
    tri_nm = _adjusted("undirected triangles",
                       full.und_triangles - mutual.und_triangles)
    triplets_nm = _adjusted("connected triplets",
                            full.connected_triplets
                            - mutual.connected_triplets)

    return CoefficientReport(
        icc=icc, tcc=tcc, ccc=ccc, ucc=ucc, mcc=mcc,
        icc_nomutual=Coefficient(4 * k22_nm, open_k22_nm),
        tcc_nomutual=Coefficient(trans_nm, open_dir_nm),
        ccc_nomutual=Coefficient(3 * cyc_nm, open_dir_nm),
        ucc_nomutual=Coefficient(3 * tri_nm, triplets_nm),
        mcc_nomutual=Coefficient(0, 0),
    )


@dataclass(frozen=True)
class LocalIccDistribution:
    histogram: np.ndarray     # node counts per bin over [0, 1]
    bin_edges: np.ndarray
    mean: float | None        # over nodes with open K22s
    defined_nodes: int
    undefined_nodes: int      # nodes excluded for zero open count


def local_icc_distribution(stats: PerNodeK22Stats,
                           bins: int = 100) -> LocalIccDistribution:
    """Histogram and mean of per-node interest clustering values."""
    vals, defined = stats.local_icc()
    vals = vals[defined]
    hist, edges = np.histogram(vals, bins=bins, range=(0.0, 1.0))
    mean = float(vals.mean()) if len(vals) else None
    return LocalIccDistribution(hist, edges, mean, int(defined.sum()),
                                int((~defined).sum()))


# -- report rendering ---------------------------------------------------------


def count_report(g: DirectedGraph, threads: int | None = None
                 ) -> tuple[StructureCounts, StructureCounts,
                            CoefficientReport, dict]:
    """Full-graph counts, mutual-graph counts, coefficients and metadata."""
    full = full_structure_counts(g, threads)
    mg = mutual_graph(g)
    mutual = undirected_structure_counts(mg, threads)
    meta = {"n": g.n, "m": g.m, "mutual_edges": mg.e}
    return full, mutual, coefficients(full, mutual), meta


def report_entries(full: StructureCounts, mutual: StructureCounts | None,
                   coeffs: CoefficientReport | None, meta: dict):
    """Ordered (key, value-string) pairs for the text and JSON reports.

    Counts are emitted as decimal integer strings so they survive any JSON
    reader without float truncation; coefficients additionally carry their
    exact numerator/denominator.
    """
    entries: list[tuple[str, str]] = []
    for key in ("n", "m", "mutual_edges"):
        if key in meta:
            entries.append((key, str(meta[key])))
    for name in ("k22", "open_k22", "transitive", "cyclic", "open_directed",
                 "und_triangles", "connected_triplets", "und_k22",
                 "open_und_k22"):
        entries.append((name, str(getattr(full, name))))
    if mutual is not None:
        for name in ("und_triangles", "connected_triplets", "und_k22",
                     "open_und_k22"):
            entries.append((f"mutual_{name}", str(getattr(mutual, name))))
    if coeffs is not None:
        for name, c in coeffs.items():
            entries.append((name, c.decimal()))
            if c.defined:
                entries.append((f"{name}_exact",
                                f"{c.numerator}/{c.denominator}"))
    return entries
