"""Undirected graphs in compressed adjacency form, loaders and generators.

Every graph handed to a walker is simple, undirected and connected.  Loaders
reduce disconnected input to its largest component; generators only emit
connected topologies.
"""

from __future__ import annotations

import io
import logging
import os
import random
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

log = logging.getLogger(__name__)

STATS_HEADER = "n,m,clustering,diameter,diameter_exact"


class GraphError(ValueError):
    """Raised for unusable graph input (bad lines, empty graphs, bad parameters)."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph.

    ``indptr``/``indices`` form a CSR adjacency with each neighbor list sorted
    ascending.  ``labels`` maps dense ids back to the ids of the source file
    when the graph was loaded from one.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray | None = None
    name: str = "graph"
    info: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(np.diff(self.indptr).tolist())

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        # plain tuples: walkers index these in tight Python loops
        ptr = self.indptr.tolist()
        idx = self.indices.tolist()
        return tuple(tuple(idx[ptr[i]:ptr[i + 1]]) for i in range(self.n))

    @cached_property
    def edge_ids(self) -> tuple[tuple[int, ...], ...]:
        """Undirected edge id for every adjacency slot, aligned with ``adjacency``."""
        ids = {}
        out = []
        for u, nbrs in enumerate(self.adjacency):
            row = []
            for v in nbrs:
                key = (u, v) if u < v else (v, u)
                row.append(ids.setdefault(key, len(ids)))
            out.append(tuple(row))
        return tuple(out)

    @cached_property
    def cache(self) -> dict:
        """Scratch space for derived per-graph tables (transition CDFs etc.)."""
        return {}

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return self.degrees[i]

    def edge_id(self, u: int, v: int) -> int:
        nbrs = self.adjacency[u]
        pos = bisect_left(nbrs, v)
        if pos == len(nbrs) or nbrs[pos] != v:
            raise KeyError((u, v))
        return self.edge_ids[u][pos]

    def edges(self) -> np.ndarray:
        """Canonical edge array, shape (m, 2), u < v, sorted lexicographically."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def to_sparse(self) -> sparse.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.int64)
        return sparse.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def __repr__(self):
        return f"Graph(name={self.name!r}, n={self.n}, m={self.m})"

    @classmethod
    def from_edges(cls, n, edges, name="graph", labels=None, info=None) -> Graph:
        """Build from an (k, 2) integer array.  Loops and duplicates are dropped.

        No connectivity check happens here; use :func:`largest_component` or
        the loaders for untrusted input.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if n < 1:
            raise GraphError("graph has no nodes")
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise GraphError("edge endpoint out of range")
        edges = edges[edges[:, 0] != edges[:, 1]]
        both = np.vstack([edges, edges[:, ::-1]])
        both = np.unique(both, axis=0)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, both[:, 0] + 1, 1)
        indptr = np.cumsum(indptr)
        return cls(indptr, both[:, 1].copy(), labels, name, dict(info or {}))


@dataclass(frozen=True)
class GraphStats:
    n: int
    m: int
    clustering: float
    diameter: int
    diameter_exact: bool

    def csv(self) -> str:
        return (f"{STATS_HEADER}\n{self.n},{self.m},{self.clustering:.6f},"
                f"{self.diameter},{str(self.diameter_exact).lower()}\n")


def validate(g: Graph) -> None:
    """Assert the structural invariants: symmetric, simple, connected, sum(d) = 2m."""
    A = g.to_sparse()
    if (A != A.T).nnz:
        raise GraphError("adjacency is not symmetric")
    if A.diagonal().any():
        raise GraphError("self-loop present")
    if A.data.max(initial=1) > 1:
        raise GraphError("parallel edge present")
    if sum(g.degrees) != 2 * g.m:
        raise GraphError("degree sum does not equal 2m")
    for nbrs in g.adjacency:
        if list(nbrs) != sorted(set(nbrs)):
            raise GraphError("neighbor list not sorted/unique")
    ncomp, _ = csgraph.connected_components(A, directed=False)
    if ncomp != 1:
        raise GraphError(f"graph has {ncomp} components")


def largest_component(g: Graph) -> Graph:
    """Restrict ``g`` to its largest connected component, relabelling densely."""
    ncomp, comp = csgraph.connected_components(g.to_sparse(), directed=False)
    if ncomp == 1:
        return g
    sizes = np.bincount(comp)
    keep = np.flatnonzero(comp == np.argmax(sizes))
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    e = g.edges()
    e = e[(remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0)]
    labels = g.labels[keep] if g.labels is not None else keep
    info = dict(g.info)
    info["dropped_nodes"] = info.get("dropped_nodes", 0) + g.n - len(keep)
    info["dropped_edges"] = info.get("dropped_edges", 0) + g.m - len(e)
    log.warning("graph %s disconnected: kept largest component, dropped %d nodes and %d edges",
                g.name, g.n - len(keep), g.m - len(e))
    return Graph.from_edges(len(keep), remap[e], g.name, labels, info)


# ---------------------------------------------------------------------------
# edge-list files
# ---------------------------------------------------------------------------

def _open_text(source):
    if isinstance(source, (str, os.PathLike)):
        return open(source, "r", encoding="utf-8", errors="replace"), True
    if isinstance(source, (bytes, bytearray)):
        return io.StringIO(source.decode("utf-8", errors="replace")), True
    if isinstance(source, io.TextIOBase):
        return source, False
    # binary stream
    return io.TextIOWrapper(source, encoding="utf-8", errors="replace"), False


def load_edge_list(source, format: str = "whitespace", name: str | None = None) -> Graph:
    """Read an undirected edge list.

    Parameters
    ----------
    source : path, bytes, or a text/binary stream
        One ``u v`` pair per line.  Lines starting with ``#`` or ``%`` are
        comments.  Ids are non-negative integers and need not be contiguous.
    format : {"whitespace", "csv"}
        ``csv`` splits on commas and tolerates a single non-numeric header
        line (e.g. ``id_1,id_2``).

    Returns
    -------
    Graph
        Ids remapped to ``0..n-1`` in increasing order of the original id.
        Duplicates and self-loops are dropped; a disconnected input is cut
        down to its largest component.  Counts of what was dropped are in
        ``graph.info``.
    """
    if format not in ("whitespace", "csv"):
        raise GraphError(f"unknown edge-list format {format!r}")
    sep = "," if format == "csv" else None
    if name is None:
        name = os.path.basename(os.fspath(source)) if isinstance(source, (str, os.PathLike)) else "edgelist"
    fh, owned = _open_text(source)
    pairs = []
    try:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s[0] in "#%":
                continue
            parts = s.split(sep)
            if len(parts) < 2:
                raise GraphError(f"line {lineno}: expected two node ids, got {s!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                if format == "csv" and not pairs:
                    continue
                raise GraphError(f"line {lineno}: non-integer node id in {s!r}") from None
            if u < 0 or v < 0:
                raise GraphError(f"line {lineno}: negative node id in {s!r}")
            pairs.append((u, v))
    finally:
        if owned:
            fh.close()
    if not pairs:
        raise GraphError("edge list is empty")
    raw = np.array(pairs, dtype=np.int64)
    labels, dense = np.unique(raw, return_inverse=True)
    dense = dense.reshape(-1, 2)
    loops = int(np.count_nonzero(dense[:, 0] == dense[:, 1]))
    g = Graph.from_edges(len(labels), dense, name, labels)
    if g.m == 0:
        raise GraphError("edge list has no edges besides self-loops")
    # nodes that only carried self-loops become isolated and fall out below
    g.info.update(self_loops=loops, duplicates=len(pairs) - loops - g.m)
    return largest_component(g)


def save_edge_list(g: Graph, target) -> None:
    """Write the canonical form: one ``u v`` line per edge, u < v, sorted."""
    text = "".join(f"{u} {v}\n" for u, v in g.edges().tolist())
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w") as fh:
            fh.write(text)
    else:
        target.write(text)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def _need(cond, msg):
    if not cond:
        raise GraphError(msg)


def complete(n: int) -> Graph:
    _need(n >= 2, "complete graph needs n >= 2")
    iu = np.triu_indices(n, 1)
    return Graph.from_edges(n, np.column_stack(iu), f"complete({n})")


def star(n: int) -> Graph:
    _need(n >= 2, "star needs n >= 2")
    leaves = np.arange(1, n)
    return Graph.from_edges(n, np.column_stack([np.zeros_like(leaves), leaves]), f"star({n})")


def path(n: int) -> Graph:
    _need(n >= 2, "path needs n >= 2")
    a = np.arange(n - 1)
    return Graph.from_edges(n, np.column_stack([a, a + 1]), f"path({n})")


def cycle(n: int) -> Graph:
    _need(n >= 3, "cycle needs n >= 3")
    a = np.arange(n)
    return Graph.from_edges(n, np.column_stack([a, (a + 1) % n]), f"cycle({n})")


def hypercube(dim: int) -> Graph:
    _need(dim >= 1, "hypercube needs dim >= 1")
    nodes = np.arange(1 << dim)
    edges = [np.column_stack([nodes, nodes ^ (1 << b)]) for b in range(dim)]
    e = np.vstack(edges)
    return Graph.from_edges(1 << dim, e[e[:, 0] < e[:, 1]], f"hypercube({dim})")


def lollipop(clique_n: int, path_len: int) -> Graph:
    """Clique on nodes ``0..clique_n-1`` with a path of ``path_len`` extra nodes hung off node ``clique_n-1``."""
    _need(clique_n >= 2 and path_len >= 0, "lollipop needs clique_n >= 2, path_len >= 0")
    n = clique_n + path_len
    iu = np.triu_indices(clique_n, 1)
    tail = np.arange(clique_n - 1, n - 1)
    e = np.vstack([np.column_stack(iu), np.column_stack([tail, tail + 1])])
    return Graph.from_edges(n, e, f"lollipop({clique_n},{path_len})")


def mesh3d(a: int, b: int, c: int) -> Graph:
    _need(min(a, b, c) >= 1 and a * b * c >= 2, "mesh3d needs positive sides and at least 2 nodes")
    ids = np.arange(a * b * c).reshape(a, b, c)
    e = [np.column_stack([ids[:-1].ravel(), ids[1:].ravel()]),
         np.column_stack([ids[:, :-1].ravel(), ids[:, 1:].ravel()]),
         np.column_stack([ids[:, :, :-1].ravel(), ids[:, :, 1:].ravel()])]
    return Graph.from_edges(a * b * c, np.vstack(e), f"mesh3d({a},{b},{c})")


def random_geometric(n: int, radius: float, seed: int = 0, grow: float = 1.1) -> Graph:
    """Points uniform in the unit square joined when closer than ``radius``.

    The point set is fixed by ``seed``; while the graph is disconnected the
    radius is multiplied by ``grow``.  The radius finally used is recorded in
    ``graph.info["radius"]``.
    """
    _need(n >= 2 and radius > 0, "random_geometric needs n >= 2 and radius > 0")
    from scipy.spatial import cKDTree

    pts = np.random.default_rng(seed).random((n, 2))
    tree = cKDTree(pts)
    r = float(radius)
    while True:
        e = tree.query_pairs(r, output_type="ndarray")
        g = Graph.from_edges(n, e, f"random_geometric({n},{radius},{seed})", info={"radius": r})
        if csgraph.connected_components(g.to_sparse(), directed=False)[0] == 1:
            if r != radius:
                log.info("random_geometric: radius grown from %g to %g for connectivity", radius, r)
            return g
        r *= grow


def barabasi_albert(n: int, attach_k: int, seed: int = 0) -> Graph:
    """Preferential attachment: each new node links to ``attach_k`` distinct existing nodes.

    Starts from a clique on ``attach_k + 1`` nodes so the result is always
    connected.  Targets are drawn proportionally to current degree.
    """
    _need(attach_k >= 1 and n > attach_k, "barabasi_albert needs attach_k >= 1 and n > attach_k")
    rng = random.Random(seed)
    k0 = attach_k + 1
    edges = [(u, v) for u in range(k0) for v in range(u + 1, k0)]
    # each node appears once per incident edge end
    ends = [x for e in edges for x in e]
    for new in range(k0, n):
        targets = set()
        while len(targets) < attach_k:
            targets.add(ends[rng.randrange(len(ends))])
        for t in sorted(targets):
            edges.append((t, new))
            ends.append(t)
            ends.append(new)
    return Graph.from_edges(n, edges, f"barabasi_albert({n},{attach_k},{seed})")


GENERATORS = {
    "complete": (complete, ("n",)),
    "star": (star, ("n",)),
    "path": (path, ("n",)),
    "cycle": (cycle, ("n",)),
    "hypercube": (hypercube, ("dim",)),
    "lollipop": (lollipop, ("clique_n", "path_len")),
    "mesh3d": (mesh3d, ("a", "b", "c")),
    "random_geometric": (random_geometric, ("n", "radius", "seed")),
    "barabasi_albert": (barabasi_albert, ("n", "attach_k", "seed")),
}
_ALIASES = {"ba": "barabasi_albert", "rgg": "random_geometric", "mesh": "mesh3d",
            "clique": "clique_n", "path_length": "path_len", "k": "attach_k", "m": "attach_k"}


def generate(kind: str, *args, **kwargs) -> Graph:
    """Build a named topology, e.g. ``generate("hypercube", 3)``.

    ``kind`` may also be a full textual spec such as ``"ba:n=5000,k=2,seed=1"``
    or ``"complete(4)"``, in which case no further arguments are given.
    """
    if not args and not kwargs and (":" in kind or "(" in kind):
        kind, args, kwargs = parse_generator(kind)
    kind = _ALIASES.get(kind, kind)
    if kind not in GENERATORS:
        raise GraphError(f"unknown generator {kind!r}; choose from {sorted(GENERATORS)}")
    fn, _ = GENERATORS[kind]
    kwargs = {_ALIASES.get(k, k): v for k, v in kwargs.items()}
    try:
        return fn(*args, **kwargs)
    except TypeError as exc:
        raise GraphError(f"bad parameters for {kind}: {exc}") from None


def _number(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_generator(text: str):
    """Split ``"kind:a=1,b=2"`` or ``"kind(1,2)"`` into (kind, args, kwargs)."""
    text = text.strip()
    try:
        if "(" in text:
            kind, rest = text.split("(", 1)
            body = rest.rstrip(")")
            args = tuple(_number(x) for x in body.split(",") if x.strip())
            return kind.strip(), args, {}
        kind, _, body = text.partition(":")
        kwargs = {}
        for item in filter(None, body.split(",")):
            key, val = item.split("=")
            kwargs[key.strip()] = _number(val.strip())
        return kind.strip(), (), kwargs
    except ValueError:
        raise GraphError(f"cannot parse generator spec {text!r}") from None


# ---------------------------------------------------------------------------
# structure
# ---------------------------------------------------------------------------

def transitivity(g: Graph) -> float:
    """Global clustering: 3 x triangles / connected triples."""
    A = g.to_sparse().astype(np.float64)
    closed = (A @ A).multiply(A).sum()  # 6 x triangles
    deg = np.asarray(g.degrees, dtype=np.float64)
    triads = float(np.sum(deg * (deg - 1)))  # 2 x connected triples
    return float(closed / triads) if triads else 0.0


def _eccentricities(A, sources, chunk=256):
    out = []
    for s in range(0, len(sources), chunk):
        d = csgraph.shortest_path(A, directed=False, unweighted=True, indices=sources[s:s + chunk])
        out.append(d.max(axis=1))
    return np.concatenate(out)


def diameter(g: Graph, exact: bool = True, sweeps: int = 4, seed: int = 0) -> tuple[int, bool]:
    """Return ``(diameter, is_exact)``.

    Exact mode runs a BFS from every node.  Otherwise a few double sweeps
    (BFS to a farthest node, then BFS from there) give a lower bound.
    """
    if g.n == 1:
        return 0, True
    A = g.to_sparse()
    if exact:
        return int(_eccentricities(A, np.arange(g.n)).max()), True
    rng = np.random.default_rng(seed)
    best = 0
    for start in rng.choice(g.n, size=min(sweeps, g.n), replace=False):
        d = csgraph.shortest_path(A, directed=False, unweighted=True, indices=[start])[0]
        far = int(np.argmax(d))
        d2 = csgraph.shortest_path(A, directed=False, unweighted=True, indices=[far])[0]
        best = max(best, int(d2.max()))
    return best, False


def stats(g: Graph, exact_diameter: bool = True) -> GraphStats:
    diam, exact = diameter(g, exact=exact_diameter)
    return GraphStats(g.n, g.m, transitivity(g), diam, exact)


def degree_histogram(g: Graph) -> list[tuple[int, int]]:
    """``[(degree, count), ...]`` sorted by degree, counts summing to n."""
    deg, cnt = np.unique(np.asarray(g.degrees), return_counts=True)
    return list(zip(deg.tolist(), cnt.tolist()))
