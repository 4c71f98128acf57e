"""How often a budget-B sample contains the lowest-degree unvisited neighbor.

At every MD decision point the walker sees L, its unvisited neighbors, and
inspects the degrees of B of them.  ``p`` is the fraction of decision points
where the sampled minimum equals the true minimum over L.  Given |L| and the
number of minimum-degree nodes in L, the sample is uniform without
replacement, so p is hypergeometric (:func:`closed_form_p`).
"""

from __future__ import annotations

import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .estimator import default_cap, threshold, trial_seed
from .graph import Graph
from .strategies import md_select

BUDGET_HEADER = "graph,B,p,decision_points"


def closed_form_p(l_size: int, B: int, multiplicity: int) -> float:
    """P(a uniform B-subset of L contains one of its ``multiplicity`` minimum-degree nodes).

    1 - C(|L| - mult, B) / C(|L|, B); exactly 1 when B >= |L|.
    """
    return float(closed_form_p_exact(l_size, B, multiplicity))


def closed_form_p_exact(l_size: int, B: int, multiplicity: int) -> Fraction:
    if B < 1 or not 1 <= multiplicity <= l_size:
        raise ValueError(f"need B >= 1 and 1 <= multiplicity <= l_size, got "
                         f"l_size={l_size}, B={B}, multiplicity={multiplicity}")
    if B >= l_size:
        return Fraction(1)
    return 1 - Fraction(math.comb(l_size - multiplicity, B), math.comb(l_size, B))


@dataclass
class BudgetProbe:
    graph: str
    budgets: tuple
    p: list
    decision_points: list
    # per budget: {(|L|, multiplicity): [hits, total]}
    strata: list = field(default_factory=list, repr=False)

    def csv_lines(self):
        for B, p, k in zip(self.budgets, self.p, self.decision_points):
            yield f"{self.graph},{B},{p:.6f},{k}"


def _probe_walks(g: Graph, B: int, walks: int, seed: int, tau: float):
    """Run ``walks`` MD(B) walks from uniform starts and tally every decision point."""
    adj = g.adjacency
    deg = g.degrees
    n = g.n
    target = threshold(tau, n)
    cap = default_cap(g)
    strata = defaultdict(lambda: [0, 0])
    for w in range(walks):
        rng = random.Random(trial_seed(seed, B, w))
        cur = rng.randrange(n)
        counts = [0] * n
        counts[cur] = 1
        seen = 1
        steps = 0
        while seen < target and steps < cap:
            nbrs = adj[cur]
            L = [v for v in nbrs if not counts[v]]
            if L:
                nxt, _ = md_select(g, L, B, rng)
                lo = min(deg[v] for v in L)
                mult = sum(1 for v in L if deg[v] == lo)
                cell = strata[(len(L), mult)]
                cell[0] += deg[nxt] == lo
                cell[1] += 1
            else:
                nxt = nbrs[int(rng.random() * len(nbrs))]
            if not counts[nxt]:
                seen += 1
            counts[nxt] += 1
            cur = nxt
            steps += 1
    return dict(strata)


def probe_graph(g: Graph, budgets, walks: int = 20, seed: int = 0, tau: float = 0.3,
                label: str | None = None) -> BudgetProbe:
    """Empirical p for each budget in ``budgets``.

    Each budget gets its own ``walks`` MD walks run until ``floor(tau n)``
    nodes are covered.  Decision points with |L| <= B count as hits.
    """
    if walks < 1:
        raise ValueError("walks must be >= 1")
    budgets = tuple(int(b) for b in budgets)
    if any(b < 1 for b in budgets):
        raise ValueError("budgets must be >= 1")
    ps, ks, strata = [], [], []
    for B in budgets:
        st = _probe_walks(g, B, walks, seed, tau)
        hits = sum(h for h, _ in st.values())
        total = sum(t for _, t in st.values())
        ps.append(hits / total if total else math.nan)
        ks.append(total)
        strata.append(st)
    return BudgetProbe(label or g.name, budgets, ps, ks, strata)


@dataclass(frozen=True)
class Stratum:
    l_size: int
    multiplicity: int
    samples: int
    empirical: float
    closed_form: float

    @property
    def gap(self) -> float:
        return abs(self.empirical - self.closed_form)


def empirical_vs_closed_form(g: Graph, B: int, walks: int = 200, seed: int = 0, tau: float = 0.3,
                             min_samples: int = 1000):
    """Compare observed hit rates with :func:`closed_form_p` stratum by stratum.

    Only strata with at least ``min_samples`` decision points are compared.
    Returns ``(max_gap, strata)``; ``max_gap`` is nan if no stratum qualifies.
    """
    st = _probe_walks(g, B, walks, seed, tau)
    rows = []
    for (l, mult), (hits, total) in sorted(st.items()):
        if total >= min_samples:
            rows.append(Stratum(l, mult, total, hits / total, closed_form_p(l, B, mult)))
    max_gap = max((r.gap for r in rows), default=math.nan)
    return max_gap, rows
