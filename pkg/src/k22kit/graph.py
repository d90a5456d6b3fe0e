"""Immutable directed and undirected graphs over dense integer node ids.

Both graph classes store adjacency in compressed sparse row form: an
``offsets`` array of length ``n + 1`` and a flat ``targets`` array, with each
node's neighbor slice sorted ascending.  Directed graphs keep both the
out-direction and the in-direction so that every algorithm in the toolkit can
scan either side and do O(log d) membership tests.

Node ids are dense (``0 .. n-1``).  Arbitrary 64-bit external ids from an
ingested edge list are remapped at load time; the original ids are kept in
``ext_ids`` so results can be reported in the caller's id space.  Arrays are
marked read-only after construction, so instances are safe to share across
threads and worker processes.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import InputError, ParseError

_CACHE_MAGIC = b"K22G"
_CACHE_VERSION = 1


def _csr_from_sorted(src: np.ndarray, dst: np.ndarray, n: int):
    """Build (offsets, targets) from arc arrays sorted by (src, dst)."""
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, src + 1, 1)
    np.cumsum(offsets, out=offsets)
    return offsets, dst.astype(np.int64, copy=True)


def _freeze(*arrays):
    for a in arrays:
        a.setflags(write=False)


class DirectedGraph:
    """Immutable digraph with sorted dual adjacency (out and in)."""

    __slots__ = ("n", "m", "out_offsets", "out_targets", "in_offsets",
                 "in_targets", "ext_ids", "_ext_index")

    def __init__(self, n, out_offsets, out_targets, in_offsets, in_targets,
                 ext_ids):
        self.n = int(n)
        self.m = int(len(out_targets))
        self.out_offsets = out_offsets
        self.out_targets = out_targets
        self.in_offsets = in_offsets
        self.in_targets = in_targets
        self.ext_ids = ext_ids
        self._ext_index = None
        _freeze(out_offsets, out_targets, in_offsets, in_targets, ext_ids)

    @classmethod
    def from_arcs(cls, src, dst, n=None, ext_ids=None, drop_self_loops=True,
                  dedup=True) -> "DirectedGraph":
        """Build a graph from arc endpoint arrays over dense ids.

        Self-loops and duplicate arcs are removed by default; the adjacency
        of the result is sorted regardless of input order.
        """
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise InputError("src and dst arrays differ in length")
        if n is None:
            n = int(max(src.max(initial=-1), dst.max(initial=-1)) + 1)
        n = int(n)
        if len(src) and (src.min() < 0 or dst.min() < 0
                         or max(src.max(), dst.max()) >= n):
            raise InputError("arc endpoint outside [0, n)")
        if drop_self_loops and len(src):
            keep = src != dst
            src, dst = src[keep], dst[keep]
        key = src * np.int64(n) + dst
        if dedup:
            key = np.unique(key)
        else:
            key = np.sort(key)
        src = key // n
        dst = key - src * n
        out_off, out_tgt = _csr_from_sorted(src, dst, n)
        order = np.lexsort((src, dst))
        in_off, in_tgt = _csr_from_sorted(dst[order], src[order], n)
        if ext_ids is None:
            ext_ids = np.arange(n, dtype=np.uint64)
        else:
            ext_ids = np.asarray(ext_ids, dtype=np.uint64)
            if len(ext_ids) != n:
                raise InputError("ext_ids length must equal n")
        return cls(n, out_off, out_tgt, in_off, in_tgt, ext_ids)

    # -- accessors ---------------------------------------------------------

    def out_neighbors(self, u) -> np.ndarray:
        return self.out_targets[self.out_offsets[u]:self.out_offsets[u + 1]]

    def in_neighbors(self, u) -> np.ndarray:
        return self.in_targets[self.in_offsets[u]:self.in_offsets[u + 1]]

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_offsets)

    @property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_offsets)

    def arcs(self):
        """Return (src, dst) arrays in canonical (sorted) order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees)
        return src, self.out_targets.copy()

    def has_arc(self, u, v) -> bool:
        nb = self.out_neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def to_external(self, dense_id):
        return int(self.ext_ids[dense_id])

    def to_dense(self, external_id) -> int:
        if self._ext_index is None:
            self._ext_index = {int(e): i for i, e in enumerate(self.ext_ids)}
        try:
            return self._ext_index[int(external_id)]
        except KeyError:
            raise InputError(f"unknown node id {external_id}") from None

    def transpose(self) -> "DirectedGraph":
        """Graph with every arc reversed (swaps the two adjacency halves)."""
        return DirectedGraph(self.n, self.in_offsets, self.in_targets,
                             self.out_offsets, self.out_targets, self.ext_ids)

    def same_as(self, other) -> bool:
        return (self.n == other.n and self.m == other.m
                and np.array_equal(self.out_offsets, other.out_offsets)
                and np.array_equal(self.out_targets, other.out_targets)
                and np.array_equal(self.ext_ids, other.ext_ids))

    def __repr__(self):
        return f"DirectedGraph(n={self.n}, m={self.m})"


class UndirectedGraph:
    """Immutable simple undirected graph; each edge appears in both rows."""

    __slots__ = ("n", "e", "offsets", "targets", "ext_ids")

    def __init__(self, n, offsets, targets, ext_ids):
        self.n = int(n)
        self.e = int(len(targets)) // 2
        self.offsets = offsets
        self.targets = targets
        self.ext_ids = ext_ids
        _freeze(offsets, targets, ext_ids)

    @classmethod
    def from_edges(cls, u, v, n, ext_ids=None) -> "UndirectedGraph":
        """Build from endpoint arrays; pairs are canonicalized and deduped."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        keep = u != v
        u, v = u[keep], v[keep]
        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        key = np.unique(lo * np.int64(n) + hi)
        lo = key // n
        hi = key - lo * n
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        offsets, targets = _csr_from_sorted(src[order], dst[order], n)
        if ext_ids is None:
            ext_ids = np.arange(n, dtype=np.uint64)
        return cls(n, offsets, targets, ext_ids)

    def neighbors(self, u) -> np.ndarray:
        return self.targets[self.offsets[u]:self.offsets[u + 1]]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    def edges(self):
        """Return (u, v) arrays with u < v, each edge once."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        mask = src < self.targets
        return src[mask], self.targets[mask].copy()

    def has_edge(self, u, v) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def __repr__(self):
        return f"UndirectedGraph(n={self.n}, e={self.e})"


# -- ingestion ---------------------------------------------------------------


def load_edge_list(source, drop_self_loops=True, dedup=True) -> DirectedGraph:
    """Parse a whitespace-separated "src dst" edge list into a graph.

    ``source`` may be a filesystem path, bytes, text, or a binary file-like
    object.  Lines starting with '#' and blank lines are ignored; both LF and
    CRLF line endings are accepted.  External ids (any value in [0, 2**64))
    are remapped to dense ids by ascending external id, so the result does
    not depend on line order.
    """
    text = _read_text(source)
    srcs: list[int] = []
    dsts: list[int] = []
    lineno = 0
    for raw in text.split("\n"):
        lineno += 1
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(lineno, f"expected two fields, got {len(parts)}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(lineno, f"not an integer pair: {line!r}") from None
        if a < 0 or b < 0 or a >= 2**64 or b >= 2**64:
            raise ParseError(lineno, f"id out of range: {line!r}")
        srcs.append(a)
        dsts.append(b)
    if not srcs:
        raise InputError("no arcs")
    src = np.array(srcs, dtype=np.uint64)
    dst = np.array(dsts, dtype=np.uint64)
    if drop_self_loops:
        keep = src != dst
        src, dst = src[keep], dst[keep]
        if len(src) == 0:
            raise InputError("no arcs")
    ext = np.unique(np.concatenate([src, dst]))
    dsrc = np.searchsorted(ext, src).astype(np.int64)
    ddst = np.searchsorted(ext, dst).astype(np.int64)
    return DirectedGraph.from_arcs(dsrc, ddst, n=len(ext), ext_ids=ext,
                                   drop_self_loops=drop_self_loops,
                                   dedup=dedup)


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        data = source.encode("utf-8")
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    else:
        raise InputError(f"unreadable source: {source!r}")
    try:
        return data.decode("utf-8").replace("\r\n", "\n")
    except UnicodeDecodeError as exc:
        raise InputError(f"input is not UTF-8: {exc}") from None


# -- transforms --------------------------------------------------------------


def transpose(g: DirectedGraph) -> DirectedGraph:
    return g.transpose()


def mutual_graph(g: DirectedGraph) -> UndirectedGraph:
    """Undirected graph of reciprocated pairs: {u,v} iff u->v and v->u."""
    src, dst = g.arcs()
    key = src * np.int64(g.n) + dst
    rkey = dst * np.int64(g.n) + src
    both = key[np.isin(key, rkey, assume_unique=True)]
    u = both // g.n
    v = both - u * g.n
    keep = u < v
    return UndirectedGraph.from_edges(u[keep], v[keep], g.n, g.ext_ids)


def undirected_projection(g: DirectedGraph) -> UndirectedGraph:
    """Undirected graph with arc direction discarded; parallel pairs merge."""
    src, dst = g.arcs()
    return UndirectedGraph.from_edges(src, dst, g.n, g.ext_ids)


def strip_bidirectional(g: DirectedGraph) -> DirectedGraph:
    """Remove both arcs of every reciprocated pair, keeping one-way arcs."""
    src, dst = g.arcs()
    key = src * np.int64(g.n) + dst
    rkey = dst * np.int64(g.n) + src
    keep = ~np.isin(key, rkey, assume_unique=True)
    return DirectedGraph.from_arcs(src[keep], dst[keep], n=g.n,
                                   ext_ids=g.ext_ids)


# -- binary cache ------------------------------------------------------------
#
# Layout (all little-endian):
#   magic "K22G" | u8 version | u8 target width (4 or 8) | u64 n | u64 m
#   out offsets ((n+1) x u64) | out targets (m x u32 or u64)
#   in  offsets ((n+1) x u64) | in  targets (m x u32 or u64)
#   external ids (n x u64)


def save_cache(g: DirectedGraph, path) -> None:
    """Write the bit-exact binary cache representation of ``g``."""
    width = 4 if g.n < 2**32 else 8
    tdtype = "<u4" if width == 4 else "<u8"
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<BB", _CACHE_VERSION, width))
        fh.write(struct.pack("<QQ", g.n, g.m))
        fh.write(g.out_offsets.astype("<u8").tobytes())
        fh.write(g.out_targets.astype(tdtype).tobytes())
        fh.write(g.in_offsets.astype("<u8").tobytes())
        fh.write(g.in_targets.astype(tdtype).tobytes())
        fh.write(g.ext_ids.astype("<u8").tobytes())


def load_cache(path) -> DirectedGraph:
    """Read a graph previously written by :func:`save_cache`."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _CACHE_MAGIC:
        raise InputError("not a graph cache file (bad magic bytes)")
    version, width = struct.unpack_from("<BB", data, 4)
    if version != _CACHE_VERSION:
        raise InputError(f"unsupported cache version {version}")
    if width not in (4, 8):
        raise InputError(f"invalid target width {width}")
    n, m = struct.unpack_from("<QQ", data, 6)
    tdtype = "<u4" if width == 4 else "<u8"
    pos = 22

    def take(dtype, count):
        nonlocal pos
        arr = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        pos += arr.nbytes
        return arr

    out_off = take("<u8", n + 1).astype(np.int64)
    out_tgt = take(tdtype, m).astype(np.int64)
    in_off = take("<u8", n + 1).astype(np.int64)
    in_tgt = take(tdtype, m).astype(np.int64)
    ext = take("<u8", n).astype(np.uint64).copy()
    if pos != len(data):
        raise InputError("trailing bytes in cache file")
    return DirectedGraph(n, out_off, out_tgt, in_off, in_tgt, ext)


def is_cache_file(path) -> bool:
    try:
        with open(path, "rb") as fh:
            return fh.read(4) == _CACHE_MAGIC
    except OSError:
        return False


def save_edge_list(g: DirectedGraph, path) -> None:
    """Write the graph as an external-id edge list."""
    src, dst = g.arcs()
    ext = g.ext_ids
    with open(path, "w", encoding="utf-8") as fh:
        for a, b in zip(ext[src], ext[dst]):
            fh.write(f"{a} {b}\n")
