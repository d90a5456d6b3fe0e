"""Compiled counting kernels over CSR adjacency arrays.

All kernels take raw (offsets, targets) arrays so the same code can scan a
graph or its transpose, plus an outer-loop vertex range so callers can fan
the scan out over a thread pool: the kernels are compiled ``nogil``, partial
results are exact integers merged in fixed chunk order, and per-vertex
output slots are disjoint, so any thread count produces identical results.

The K22 kernel follows the shared-neighborhood tally scheme: for each vertex
x it walks the out-neighborhoods of the in-neighbors of x, tallying how often
each vertex w is reached.  Every tally c of a vertex w ordered after x yields
C(c, 2) closed K22s with {x, w} as the followed pair, and the same walk
counts the arcs internal to the in-neighborhood of x, which both corrects
the open K22 total and equals the number of transitive triangles pointing
at x.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def k22_range(in_off, in_tgt, out_off, out_tgt, n, x_lo, x_hi, per_node,
              k22_top, open_top):
    """Count closed/open K22s (plus transitive triangles) for x in a range.

    Returns (k22, open_k22, transitive, inner_iterations).  Inner
    iterations count the neighborhood-walk and tally-reset loops, bounded
    by 2 * (m + sum_v d_out(v) * (d_out(v) - 1)) over the whole graph.
    """
    occ = np.zeros(n, dtype=np.int64)
    flag = np.zeros(n, dtype=np.uint8)
    touched = np.empty(n, dtype=np.int64)
    k22 = 0
    openk = 0
    trans = 0
    iters = 0
    for x in range(x_lo, x_hi):
        din = in_off[x + 1] - in_off[x]
        if din == 0:
            continue
        for i in range(in_off[x], in_off[x + 1]):
            flag[in_tgt[i]] = 1
        ntouch = 0
        internal = 0
        sum_dout = 0
        for i in range(in_off[x], in_off[x + 1]):
            v = in_tgt[i]
            sum_dout += out_off[v + 1] - out_off[v] - 1
            for j in range(out_off[v], out_off[v + 1]):
                iters += 1
                w = out_tgt[j]
                if w == x:
                    continue
                if flag[w] == 1:
                    internal += 1
                if occ[w] == 0:
                    touched[ntouch] = w
                    ntouch += 1
                occ[w] += 1
        x_open = sum_dout * (din - 1) - internal
        x_k22 = 0
        for i in range(ntouch):
            iters += 1
            w = touched[i]
            c = occ[w]
            if w > x and c >= 2:
                x_k22 += c * (c - 1) // 2
            occ[w] = 0
        for i in range(in_off[x], in_off[x + 1]):
            flag[in_tgt[i]] = 0
        k22 += x_k22
        openk += x_open
        trans += internal
        if per_node:
            k22_top[x] = x_k22
            open_top[x] = x_open
    return k22, openk, trans, iters


@njit(cache=True, nogil=True)
def transitive_range(in_off, in_tgt, out_off, out_tgt, n, x_lo, x_hi):
    """Arcs internal to each in-neighborhood = transitive triangles by sink."""
    trans = 0
    flag = np.zeros(n, dtype=np.uint8)
    for x in range(x_lo, x_hi):
        if in_off[x + 1] - in_off[x] < 2:
            continue
        for i in range(in_off[x], in_off[x + 1]):
            flag[in_tgt[i]] = 1
        for i in range(in_off[x], in_off[x + 1]):
            v = in_tgt[i]
            for j in range(out_off[v], out_off[v + 1]):
                w = out_tgt[j]
                if w != x and flag[w] == 1:
                    trans += 1
        for i in range(in_off[x], in_off[x + 1]):
            flag[in_tgt[i]] = 0
    return trans


@njit(cache=True, nogil=True)
def cyclic_range(in_off, in_tgt, out_off, out_tgt, n, x_lo, x_hi):
    """Arcs from each out- to in-neighborhood; every 3-cycle counted thrice."""
    three_cycles = 0
    flag = np.zeros(n, dtype=np.uint8)
    for x in range(x_lo, x_hi):
        if in_off[x + 1] == in_off[x] or out_off[x + 1] == out_off[x]:
            continue
        for i in range(in_off[x], in_off[x + 1]):
            flag[in_tgt[i]] = 1
        for i in range(out_off[x], out_off[x + 1]):
            a = out_tgt[i]
            for j in range(out_off[a], out_off[a + 1]):
                if flag[out_tgt[j]] == 1:
                    three_cycles += 1
        for i in range(in_off[x], in_off[x + 1]):
            flag[in_tgt[i]] = 0
    return three_cycles


@njit(cache=True, nogil=True)
def und_triangle_range(off, tgt, n, x_lo, x_hi):
    """Triangles of a simple undirected graph, each counted once (u<v<w)."""
    tri = 0
    flag = np.zeros(n, dtype=np.uint8)
    for u in range(x_lo, x_hi):
        if off[u + 1] == off[u]:
            continue
        for i in range(off[u], off[u + 1]):
            flag[tgt[i]] = 1
        for i in range(off[u], off[u + 1]):
            v = tgt[i]
            if v <= u:
                continue
            for j in range(off[v], off[v + 1]):
                w = tgt[j]
                if w > v and flag[w] == 1:
                    tri += 1
        for i in range(off[u], off[u + 1]):
            flag[tgt[i]] = 0
    return tri


@njit(cache=True, nogil=True)
def und_four_cycle_pairs_range(off, tgt, n, x_lo, x_hi):
    """Sum over vertex pairs (x, w>x) of C(#common neighbors, 2).

    Each 4-cycle has two opposite vertex pairs, so the grand total is
    exactly twice the number of simple 4-cycles.
    """
    pairs = 0
    occ = np.zeros(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    for x in range(x_lo, x_hi):
        if off[x + 1] - off[x] == 0:
            continue
        ntouch = 0
        for i in range(off[x], off[x + 1]):
            v = tgt[i]
            for j in range(off[v], off[v + 1]):
                w = tgt[j]
                if w == x:
                    continue
                if occ[w] == 0:
                    touched[ntouch] = w
                    ntouch += 1
                occ[w] += 1
        for i in range(ntouch):
            w = touched[i]
            c = occ[w]
            if w > x and c >= 2:
                pairs += c * (c - 1) // 2
            occ[w] = 0
    return pairs


@njit(cache=True, nogil=True)
def k22_strength_core(out_off, out_tgt, in_off, in_tgt, x, tally, touched,
                      followed):
    """Strengths of candidate links from x that would close open K22s.

    For every co-follower u2 of something x follows, each target of u2 not
    already followed by x gains one unit of strength.  Returns parallel
    (candidates, strengths) arrays; scratch arrays are reset before return.
    """
    followed[x] = 1
    for i in range(out_off[x], out_off[x + 1]):
        followed[out_tgt[i]] = 1
    ntouch = 0
    for i in range(out_off[x], out_off[x + 1]):
        v1 = out_tgt[i]
        for j in range(in_off[v1], in_off[v1 + 1]):
            u2 = in_tgt[j]
            if u2 == x:
                continue
            for q in range(out_off[u2], out_off[u2 + 1]):
                v2 = out_tgt[q]
                if v2 == v1 or followed[v2] == 1:
                    continue
                if tally[v2] == 0:
                    touched[ntouch] = v2
                    ntouch += 1
                tally[v2] += 1
    cands = np.empty(ntouch, dtype=np.int64)
    strengths = np.empty(ntouch, dtype=np.int64)
    for i in range(ntouch):
        w = touched[i]
        cands[i] = w
        strengths[i] = tally[w]
        tally[w] = 0
    followed[x] = 0
    for i in range(out_off[x], out_off[x + 1]):
        followed[out_tgt[i]] = 0
    return cands, strengths


@njit(cache=True, nogil=True)
def tt_strength_core(out_off, out_tgt, x, tally, touched, followed):
    """Strengths of candidate links from x that would close 2-step paths."""
    followed[x] = 1
    for i in range(out_off[x], out_off[x + 1]):
        followed[out_tgt[i]] = 1
    ntouch = 0
    for i in range(out_off[x], out_off[x + 1]):
        v = out_tgt[i]
        for j in range(out_off[v], out_off[v + 1]):
            w = out_tgt[j]
            if followed[w] == 1:
                continue
            if tally[w] == 0:
                touched[ntouch] = w
                ntouch += 1
            tally[w] += 1
    cands = np.empty(ntouch, dtype=np.int64)
    strengths = np.empty(ntouch, dtype=np.int64)
    for i in range(ntouch):
        w = touched[i]
        cands[i] = w
        strengths[i] = tally[w]
        tally[w] = 0
    followed[x] = 0
    for i in range(out_off[x], out_off[x + 1]):
        followed[out_tgt[i]] = 0
    return cands, strengths
