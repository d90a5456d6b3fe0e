"""Link recommendation by K22 or transitive-triangle strength.

The strength of a candidate link x -> c is the number of open structures
the link would close: for the K22 method, ordered pairs (v1, u2) with
x -> v1, u2 -> v1, u2 -> c (u2 != x, c unfollowed, c != v1); for the
triangle method, intermediaries v with x -> v -> c.  Candidates already
followed by x, and x itself, are never recommended, and strength-0 entries
do not exist by construction.

Ranking is total and reproducible: descending strength, ties broken by
ascending candidate id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InputError
from .exact import count_k22
from .graph import DirectedGraph
from .rng import philox_generator


@dataclass(frozen=True)
class Recommendation:
    user: int
    candidate: int
    strength: int
    rank: int


class _Workspace:
    """Reusable scratch arrays so cohort runs do not reallocate per user."""

    def __init__(self, n: int):
        self.tally = np.zeros(n, dtype=np.int64)
        self.touched = np.empty(n, dtype=np.int64)
        self.followed = np.zeros(n, dtype=np.uint8)


def _check_user(g: DirectedGraph, x: int):
    if not 0 <= x < g.n:
        raise InputError(f"node id {x} out of range [0, {g.n})")


def _ranked(user: int, cands: np.ndarray, strengths: np.ndarray,
            k: int) -> list[Recommendation]:
    if len(cands) == 0 or k <= 0:
        return []
    order = np.lexsort((cands, -strengths))[:k]
    return [Recommendation(user=user, candidate=int(cands[i]),
                           strength=int(strengths[i]), rank=r + 1)
            for r, i in enumerate(order)]


def k22_strengths(g: DirectedGraph, x: int, _ws: _Workspace | None = None):
    """All candidates and their K22 strengths for user x (unranked)."""
    _check_user(g, x)
    ws = _ws or _Workspace(g.n)
    return _kernels.k22_strength_core(g.out_offsets, g.out_targets,
                                      g.in_offsets, g.in_targets, x,
                                      ws.tally, ws.touched, ws.followed)


def tt_strengths(g: DirectedGraph, x: int, _ws: _Workspace | None = None):
    """All candidates and their transitive-triangle strengths for user x."""
    _check_user(g, x)
    ws = _ws or _Workspace(g.n)
    return _kernels.tt_strength_core(g.out_offsets, g.out_targets, x,
                                     ws.tally, ws.touched, ws.followed)


def k22_recommendations(g: DirectedGraph, x: int,
                        k: int) -> list[Recommendation]:
    """Top-k candidates for x by K22 strength."""
    cands, strengths = k22_strengths(g, x)
    return _ranked(x, cands, strengths, k)


def tt_recommendations(g: DirectedGraph, x: int,
                       k: int) -> list[Recommendation]:
    """Top-k candidates for x by transitive-triangle strength."""
    cands, strengths = tt_strengths(g, x)
    return _ranked(x, cands, strengths, k)


def strength_delta_oracle(g: DirectedGraph, x: int, v2: int) -> int:
    """Closed K22s gained by inserting the arc x -> v2 (validation oracle).

    Recounts the whole graph before and after the insertion, so the result
    is independent of the strength walk; every new closed K22 contains the
    new arc, and those correspond one-to-one with the walk's qualifying
    (v1, u2) pairs.
    """
    _check_user(g, x)
    _check_user(g, v2)
    if x == v2:
        raise InputError("cannot insert a self-loop")
    if g.has_arc(x, v2):
        raise InputError(f"arc {x} -> {v2} already present")
    before = count_k22(g).k22
    src, dst = g.arcs()
    src = np.append(src, x)
    dst = np.append(dst, v2)
    augmented = DirectedGraph.from_arcs(src, dst, n=g.n, ext_ids=g.ext_ids)
    after = count_k22(augmented).k22
    return after - before


# -- cohort evaluation ---------------------------------------------------------


@dataclass(frozen=True)
class UserStrengthSummary:
    user: int
    k22_max: int | None
    k22_kth: int | None
    tt_max: int | None
    tt_kth: int | None


@dataclass(frozen=True)
class CohortReport:
    """Max and k-th strengths per sampled user, for both methods.

    Entries are None when a user has no candidate (max) or fewer than k
    candidates (k-th).  ``cumulative`` turns one column into the fraction
    of users at or above each strength level.
    """

    users: tuple[int, ...]
    k: int
    entries: tuple[UserStrengthSummary, ...]

    def column(self, method: str, which: str):
        attr = f"{method}_{which}"
        return [getattr(e, attr) for e in self.entries]

    def cumulative(self, method: str, which: str):
        """(levels, fraction of users with value >= level), None excluded
        as zero-strength users; levels cover every observed value."""
        vals = [v for v in self.column(method, which)]
        present = sorted(set(v for v in vals if v is not None))
        if not present:
            return [], []
        total = len(vals)
        fractions = []
        for level in present:
            at_least = sum(1 for v in vals if v is not None and v >= level)
            fractions.append(at_least / total)
        return present, fractions

    def fraction_at_least(self, method: str, which: str,
                          level: int) -> float:
        vals = self.column(method, which)
        return sum(1 for v in vals if v is not None and v >= level) \
            / len(vals)


def cohort_eval(g: DirectedGraph, users=None, count: int | None = None,
                seed: int | None = None, k: int = 10) -> CohortReport:
    """Evaluate both recommendation methods over a user cohort.

    Users are either given explicitly or sampled uniformly (seeded, without
    replacement) among nodes that follow at least one other node; users
    following no one have no recommendation of either kind and are excluded
    from sampling by construction.
    """
    if users is None:
        if count is None or seed is None:
            raise InputError("need either an explicit user list or "
                             "count and seed")
        eligible = np.nonzero(g.out_degrees > 0)[0]
        if len(eligible) == 0:
            raise InputError("no eligible user: every node follows no one")
        if count > len(eligible):
            raise InputError(f"cohort of {count} requested but only "
                             f"{len(eligible)} nodes follow someone")
        rng = philox_generator(seed, 0)
        users = np.sort(rng.choice(eligible, size=count, replace=False))
    users = [int(u) for u in users]
    for u in users:
        _check_user(g, u)
    ws = _Workspace(g.n)
    entries = []
    for u in users:
        summary = {}
        for method, fn in (("k22", k22_strengths), ("tt", tt_strengths)):
            _, strengths = fn(g, u, ws)
            if len(strengths) == 0:
                summary[f"{method}_max"] = None
                summary[f"{method}_kth"] = None
            else:
                s = np.sort(strengths)[::-1]
                summary[f"{method}_max"] = int(s[0])
                summary[f"{method}_kth"] = int(s[k - 1]) \
                    if len(s) >= k else None
        entries.append(UserStrengthSummary(user=u, **summary))
    return CohortReport(users=tuple(users), k=k, entries=tuple(entries))
