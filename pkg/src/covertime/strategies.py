"""Walk strategies behind one step interface.

Each ``*_step(g, s, rng)`` function only *chooses* the next node; ``step``
applies the move and does the bookkeeping.  ``rng`` is a ``random.Random``:
walkers make one or two scalar draws per move and the stdlib generator is
much cheaper per call than a numpy ``Generator``.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from dataclasses import dataclass, field
from itertools import accumulate

import numpy as np

from .graph import Graph

KINDS = ("srw", "ep", "ad", "mdw", "rwc", "md", "sec")
MEMORYLESS = ("srw", "ad", "mdw")


@dataclass(frozen=True)
class StrategySpec:
    """Which walk to run.  ``param`` is d for ``rwc``, B for ``md``, and the
    exponential reward theta for ``sec`` (``None`` there means constant weight)."""

    kind: str
    param: float | int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}")
        if self.kind in ("rwc", "md"):
            if not isinstance(self.param, int) or self.param < 1:
                raise ValueError(f"{self.kind} needs an integer parameter >= 1, got {self.param!r}")
        elif self.kind == "sec":
            if self.param is not None and not self.param > 0:
                raise ValueError("sec theta must be > 0")
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no parameter")

    @property
    def memoryless(self) -> bool:
        return self.kind in MEMORYLESS

    def __str__(self):
        if self.kind == "rwc":
            return f"rwc:d={self.param}"
        if self.kind == "md":
            return f"md:B={self.param}"
        if self.kind == "sec":
            return "sec" if self.param is None else f"sec:theta={self.param:g}"
        return self.kind

    @classmethod
    def parse(cls, text: str, budget: int = 5, rwc_d: int = 3) -> StrategySpec:
        """Inverse of ``str``.  Bare ``md``/``rwc`` take ``budget``/``rwc_d``."""
        text = text.strip()
        kind, _, arg = text.partition(":")
        kind = kind.lower()
        if kind == "rcw":
            kind = "rwc"
        if not arg:
            if kind == "md":
                return cls("md", budget)
            if kind == "rwc":
                return cls("rwc", rwc_d)
            return cls(kind)
        key, _, val = arg.partition("=")
        expected = {"rwc": "d", "md": "B", "sec": "theta"}.get(kind)
        if expected is None or key != expected or not val:
            raise ValueError(f"cannot parse strategy {text!r}")
        if kind == "sec":
            return cls(kind, float(val))
        return cls(kind, int(val))


SRW = StrategySpec("srw")
EP = StrategySpec("ep")
AD = StrategySpec("ad")
MDW = StrategySpec("mdw")


def RWC(d: int = 3) -> StrategySpec:
    return StrategySpec("rwc", d)


def MD(B: int = 5) -> StrategySpec:
    return StrategySpec("md", B)


@dataclass
class WalkState:
    current: int
    visited_nodes: set
    visit_counts: list
    visited_edges: set = field(default_factory=set)
    steps: int = 0
    inspections: int = 0

    @classmethod
    def start(cls, g: Graph, node: int) -> WalkState:
        if not 0 <= node < g.n:
            raise ValueError(f"start node {node} not in graph")
        counts = [0] * g.n
        counts[node] = 1
        return cls(node, {node}, counts)

    def check(self) -> None:
        assert self.current in self.visited_nodes
        assert self.steps >= 0
        assert {v for v, c in enumerate(self.visit_counts) if c} == self.visited_nodes


# ---------------------------------------------------------------------------
# transition rows
# ---------------------------------------------------------------------------

def ad_transition_row(g: Graph, i: int) -> np.ndarray:
    """Probability of each neighbor of ``i`` (in adjacency order) under the
    inverse-square-root-degree walk: p_ij proportional to d_j^(-1/2)."""
    w = np.asarray([g.degrees[j] for j in g.adjacency[i]], dtype=np.float64) ** -0.5
    return w / w.sum()


def mdw_transition_row(g: Graph, i: int) -> np.ndarray:
    """Minimum-degree weighting: p_ij proportional to 1 / min(d_i, d_j)."""
    di = g.degrees[i]
    w = 1.0 / np.asarray([min(di, g.degrees[j]) for j in g.adjacency[i]], dtype=np.float64)
    return w / w.sum()


def srw_transition_row(g: Graph, i: int) -> np.ndarray:
    d = g.degrees[i]
    return np.full(d, 1.0 / d)


TRANSITION_ROWS = {"srw": srw_transition_row, "ad": ad_transition_row, "mdw": mdw_transition_row}


def transition_matrix(g: Graph, kind: str) -> np.ndarray:
    """Dense n x n matrix of a memoryless walk."""
    if kind not in TRANSITION_ROWS:
        raise ValueError("history-dependent walk has no node-level chain")
    row = TRANSITION_ROWS[kind]
    P = np.zeros((g.n, g.n))
    for i in range(g.n):
        P[i, list(g.adjacency[i])] = row(g, i)
    return P


def _cdf_table(g: Graph, kind: str):
    key = ("cdf", kind)
    table = g.cache.get(key)
    if table is None:
        row = TRANSITION_ROWS[kind]
        table = tuple(tuple(accumulate(row(g, i).tolist())) for i in range(g.n))
        g.cache[key] = table
    return table


def _sample_row(g, kind, i, rng):
    cdf = _cdf_table(g, kind)[i]
    pos = bisect_right(cdf, rng.random() * cdf[-1])
    nbrs = g.adjacency[i]
    return nbrs[pos] if pos < len(nbrs) else nbrs[-1]


# ---------------------------------------------------------------------------
# choosers
# ---------------------------------------------------------------------------

def srw_step(g: Graph, s: WalkState, rng: random.Random) -> int:
    nbrs = g.adjacency[s.current]
    return nbrs[int(rng.random() * len(nbrs))]


def ad_step(g: Graph, s: WalkState, rng: random.Random) -> int:
    return _sample_row(g, "ad", s.current, rng)


def mdw_step(g: Graph, s: WalkState, rng: random.Random) -> int:
    return _sample_row(g, "mdw", s.current, rng)


def ep_step(g: Graph, s: WalkState, rng: random.Random) -> int:
    """Prefer an unvisited incident edge, uniformly; else a uniform neighbor."""
    i = s.current
    nbrs = g.adjacency[i]
    seen = s.visited_edges
    fresh = [v for v, e in zip(nbrs, g.edge_ids[i]) if e not in seen]
    if fresh:
        return fresh[int(rng.random() * len(fresh))]
    return nbrs[int(rng.random() * len(nbrs))]


def rwc_step(g: Graph, s: WalkState, d: int, rng: random.Random) -> int:
    """Random walk with choice: draw ``d`` neighbors with replacement and move
    to the one minimising (visits + 1) / degree, ties uniform."""
    nbrs = g.adjacency[s.current]
    k = len(nbrs)
    if d == 1:
        return nbrs[int(rng.random() * k)]
    deg = g.degrees
    counts = s.visit_counts
    best = None
    ties = []
    for _ in range(d):
        j = nbrs[int(rng.random() * k)]
        score = (counts[j] + 1) / deg[j]
        if best is None or score < best:
            best, ties = score, [j]
        elif score == best and j not in ties:
            ties.append(j)
    return ties[0] if len(ties) == 1 else ties[int(rng.random() * len(ties))]


def min_degree_node(g: Graph, nodes, rng: random.Random) -> int:
    deg = g.degrees
    low = min(deg[v] for v in nodes)
    ties = [v for v in nodes if deg[v] == low]
    return ties[0] if len(ties) == 1 else ties[int(rng.random() * len(ties))]


def md_select(g: Graph, unvisited: list, B: int, rng: random.Random):
    """Budgeted choice among unvisited neighbors.

    Returns ``(chosen, sample)`` where ``sample`` is the set of nodes whose
    degree was inspected: ``B`` drawn without replacement, or all of them
    when there are at most ``B``.
    """
    sample = rng.sample(unvisited, B) if len(unvisited) > B else unvisited
    return min_degree_node(g, sample, rng), sample


def md_step(g: Graph, s: WalkState, B: int, rng: random.Random) -> int:
    nbrs = g.adjacency[s.current]
    counts = s.visit_counts
    unvisited = [v for v in nbrs if not counts[v]]
    if not unvisited:
        return nbrs[int(rng.random() * len(nbrs))]
    return md_select(g, unvisited, B, rng)[0]


def chooser(spec: StrategySpec):
    """Return ``f(g, s, rng) -> next node`` for ``spec``."""
    kind = spec.kind
    if kind == "srw":
        return srw_step
    if kind == "ad":
        return ad_step
    if kind == "mdw":
        return mdw_step
    if kind == "ep":
        return ep_step
    if kind == "rwc":
        d = spec.param
        return lambda g, s, rng: rwc_step(g, s, d, rng)
    if kind == "md":
        B = spec.param
        return lambda g, s, rng: md_step(g, s, B, rng)
    if kind == "sec":
        from .stopping import RewardModel, secretary_walk_step

        model = RewardModel.for_spec(spec)
        return lambda g, s, rng: secretary_walk_step(g, s, model, rng)
    raise ValueError(kind)


def advance(g: Graph, s: WalkState, nxt: int, mark_edges: bool) -> None:
    """Move ``s`` to ``nxt`` and update the counters."""
    if mark_edges:
        s.visited_edges.add(g.edge_id(s.current, nxt))
    s.current = nxt
    s.steps += 1
    s.visit_counts[nxt] += 1
    s.visited_nodes.add(nxt)


def step(g: Graph, s: WalkState, spec: StrategySpec, rng: random.Random) -> WalkState:
    """One move of ``spec`` from ``s``; mutates and returns ``s``."""
    advance(g, s, chooser(spec)(g, s, rng), spec.kind == "ep")
    return s
