"""Monte-Carlo partial cover time, plus exact Markov-chain oracles for small graphs.

Steps are counted as moves: the start node is visited at step 0.  Counting
the start as step 1 instead would add exactly 1 to every value.
"""

from __future__ import annotations

import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph
from .strategies import StrategySpec, WalkState, chooser, transition_matrix

log = logging.getLogger(__name__)

CURVE_HEADER = "strategy,tau,rho,c_tau,stddev,trials,n,m,truncated"
CAP_FACTOR = 64
PCT_ORACLE_LIMIT = 12
HITTING_ORACLE_LIMIT = 2000


class EstimatorError(RuntimeError):
    pass


class TruncationError(EstimatorError):
    """Every trial hit the step cap."""


def threshold(tau: float, n: int) -> int:
    """floor(tau * n), forgiving the rounding noise of decimal tau values (0.29 * 100)."""
    return int(math.floor(tau * n + 1e-9))


def default_cap(g: Graph) -> int:
    """Safety cap on moves per trial: CAP_FACTOR x 2mn.

    2mn bounds the *expected* simple-walk cover time; single runs exceed it
    routinely on small graphs, so the cap sits far out in the tail.
    """
    return CAP_FACTOR * 2 * g.m * g.n


def trial_seed(master: int, *keys: int) -> int:
    """Independent per-trial seed derived from the master seed and trial coordinates."""
    ss = np.random.SeedSequence([int(master) % 2**63, *(int(k) % 2**63 for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_seeds(master: int, start: int, count: int) -> list[int]:
    """``count`` independent seeds for the trials from one start, drawn in a single batch."""
    ss = np.random.SeedSequence([int(master) % 2**63, int(start) % 2**63])
    return [int(x) for x in ss.generate_state(count, dtype=np.uint64)]


def _check_grid(tau_grid, n):
    taus = tuple(float(t) for t in tau_grid)
    if not taus:
        raise ValueError("empty tau grid")
    if any(not 0 < t <= 1 for t in taus):
        raise ValueError("tau values must lie in (0, 1]")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("tau grid must be strictly ascending")
    return taus


@dataclass
class TrialResult:
    start: int
    taus: tuple
    steps: list  # steps at which coverage first reached floor(tau n); None if not reached
    truncated: bool = False
    inspections: int = 0


def run_trial(g: Graph, spec: StrategySpec, start: int, tau_grid, rng: random.Random,
              cap: int | None = None) -> TrialResult:
    """One walk from ``start``, recording the step count at every coverage threshold.

    A threshold of 0 or 1 node is met at step 0.  The walk stops once the largest threshold is reached or after ``cap``
    moves (see :func:`default_cap`), in which case the result is flagged truncated.
    """
    taus = _check_grid(tau_grid, g.n)
    targets = [threshold(t, g.n) for t in taus]
    cap = default_cap(g) if cap is None else cap
    s = WalkState.start(g, start)
    choose = chooser(spec)
    mark = spec.kind == "ep"
    visited = s.visited_nodes
    counts = s.visit_counts
    edge_id = g.edge_id
    steps = [None] * len(targets)
    idx = 0
    last = len(targets)
    while idx < last and len(visited) >= targets[idx]:
        steps[idx] = 0
        idx += 1
    n_steps = 0
    while idx < last:
        if n_steps >= cap:
            s.steps = n_steps
            return TrialResult(start, taus, steps, True, s.inspections)
        nxt = choose(g, s, rng)
        if mark:
            s.visited_edges.add(edge_id(s.current, nxt))
        s.current = nxt
        n_steps += 1
        s.steps = n_steps
        counts[nxt] += 1
        visited.add(nxt)
        while idx < last and len(visited) >= targets[idx]:
            steps[idx] = n_steps
            idx += 1
    return TrialResult(start, taus, steps, False, s.inspections)


@dataclass
class CoverCurve:
    """Per-tau Monte-Carlo summary of one strategy on one graph.

    ``rho`` is the mean step count over all completed trials (pooled over
    starts), ``c_tau = rho / n``.  ``rho_max`` is the largest per-start mean,
    an estimate of the partial cover time maximised over the sampled starts.
    """

    spec: StrategySpec
    taus: tuple
    rho: list
    c_tau: list
    stddev: list
    trials: int
    truncated: int
    n: int
    m: int
    starts: tuple = ()
    rho_max: list = field(default_factory=list)
    samples: list = field(default_factory=list, repr=False)  # per tau, completed trial values
    inspections: float = 0.0

    def stderr(self, i: int) -> float:
        return self.stddev[i] / math.sqrt(self.trials) if self.trials > 1 else math.nan

    def at(self, tau: float) -> int:
        for i, t in enumerate(self.taus):
            if abs(t - tau) < 1e-12:
                return i
        raise KeyError(tau)

    def rows(self):
        for i, t in enumerate(self.taus):
            yield (str(self.spec), t, self.rho[i], self.c_tau[i], self.stddev[i],
                   self.trials, self.n, self.m, self.truncated)

    def csv_lines(self):
        for spec, t, rho, c, sd, trials, n, m, trunc in self.rows():
            yield f"{spec},{t:.6g},{rho:.6f},{c:.8f},{sd:.6f},{trials},{n},{m},{trunc}"


def _mean_std(values):
    k = len(values)
    mean = math.fsum(values) / k
    if k < 2:
        return mean, math.nan
    var = math.fsum((v - mean) ** 2 for v in values) / (k - 1)
    return mean, math.sqrt(var)


def _run_block(args):
    g, spec, start, taus, trials, seed, cap = args
    return [run_trial(g, spec, start, taus, random.Random(s), cap) for s in trial_seeds(seed, start, trials)]


def run_trials(g, spec, starts, taus, T, seed, cap=None, threads=1) -> list[TrialResult]:
    """All ``T`` trials for every start, ordered by (start, trial index).

    Trial seeds depend only on (seed, start) and the trial index, so the result does
    not depend on ``threads``.
    """
    jobs = [(g, spec, st, taus, T, seed, cap) for st in starts]
    if threads and threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(_run_block, jobs))
    else:
        blocks = [_run_block(j) for j in jobs]
    return [r for b in blocks for r in b]


def summarize(g: Graph, spec: StrategySpec, taus, results, starts) -> CoverCurve:
    done = [r for r in results if not r.truncated]
    n_trunc = len(results) - len(done)
    if not done:
        raise TruncationError(f"{spec}: all {len(results)} trials hit the step cap")
    if n_trunc:
        log.warning("%s on %s: %d of %d trials truncated at the step cap and excluded",
                    spec, g.name, n_trunc, len(results))
    rho, sd, c, rmax, samples = [], [], [], [], []
    for i in range(len(taus)):
        vals = [r.steps[i] for r in done]
        mean, std = _mean_std(vals)
        rho.append(mean)
        sd.append(std)
        c.append(mean / g.n)
        samples.append(vals)
        per_start = {}
        for r in done:
            per_start.setdefault(r.start, []).append(r.steps[i])
        rmax.append(max(math.fsum(v) / len(v) for v in per_start.values()))
    insp = math.fsum(r.inspections for r in done) / len(done)
    return CoverCurve(spec, tuple(taus), rho, c, sd, len(done), n_trunc, g.n, g.m,
                      tuple(starts), rmax, samples, insp)


def estimate_curve(g: Graph, spec: StrategySpec, start, tau_grid, T: int = 10, seed: int = 0,
                   cap: int | None = None, threads: int = 1) -> CoverCurve:
    """Mean steps to cover each fraction in ``tau_grid`` over ``T`` trials.

    ``start`` is a node id or a sequence of node ids; with several starts,
    ``T`` trials run from each and ``rho`` pools them.
    """
    if T < 1:
        raise ValueError("need at least one trial")
    taus = _check_grid(tau_grid, g.n)
    starts = (start,) if isinstance(start, (int, np.integer)) else tuple(int(s) for s in start)
    if not starts:
        raise ValueError("no start nodes")
    results = run_trials(g, spec, starts, taus, T, seed, cap, threads)
    return summarize(g, spec, taus, results, starts)


def sample_starts(g: Graph, count: int | None, seed: int = 0, enumerate_below: int = 256) -> tuple:
    """Start nodes for an experiment: every node when ``count`` is None or the
    graph has at most ``enumerate_below`` nodes, else ``count`` distinct uniform nodes."""
    if count is None or g.n <= enumerate_below or count >= g.n:
        return tuple(range(g.n))
    rng = np.random.default_rng(trial_seed(seed))
    return tuple(sorted(rng.choice(g.n, size=count, replace=False).tolist()))


def estimate_pct_max(g: Graph, spec: StrategySpec, tau: float, starts, T: int = 10,
                     seed: int = 0, cap: int | None = None, threads: int = 1) -> float:
    """Largest per-start mean of the steps needed to cover ``floor(tau n)`` nodes."""
    starts = tuple(starts)
    if not starts:
        raise ValueError("starts must be non-empty")
    curve = estimate_curve(g, spec, starts, [tau], T, seed, cap, threads)
    return curve.rho_max[0]


# ---------------------------------------------------------------------------
# exact oracles
# ---------------------------------------------------------------------------

def _memoryless_matrix(g, spec, limit):
    if not spec.memoryless:
        raise EstimatorError("history-dependent walk has no node-level chain")
    if g.n > limit:
        raise EstimatorError(f"graph too large for the exact oracle (n={g.n} > {limit})")
    return transition_matrix(g, spec.kind)


def hitting_times(g: Graph, spec: StrategySpec, j: int, limit: int = HITTING_ORACLE_LIMIT) -> np.ndarray:
    """Expected steps to reach ``j`` from every node, by solving (I - Q) h = 1."""
    P = _memoryless_matrix(g, spec, limit)
    rest = np.array([v for v in range(g.n) if v != j])
    h = np.zeros(g.n)
    if len(rest):
        Q = P[np.ix_(rest, rest)]
        h[rest] = np.linalg.solve(np.eye(len(rest)) - Q, np.ones(len(rest)))
    return h


def oracle_hitting_time(g: Graph, spec: StrategySpec, i: int, j: int,
                        limit: int = HITTING_ORACLE_LIMIT) -> float:
    return float(hitting_times(g, spec, j, limit)[i])


def oracle_pct(g: Graph, spec: StrategySpec, start: int, tau: float,
               limit: int = PCT_ORACLE_LIMIT) -> float:
    """Exact expected steps to visit ``floor(tau n)`` distinct nodes from ``start``.

    Works on the chain over (current node, visited set).  The visited set
    only grows, so each set is solved once: for S and v in S,

        h(v, S) = 1 + sum_{u in S} P[v,u] h(u, S) + sum_{u not in S} P[v,u] h(u, S + u)

    and h = 0 once |S| reaches the target.
    """
    P = _memoryless_matrix(g, spec, limit)
    target = threshold(tau, g.n)
    if target <= 1:
        return 0.0
    memo: dict[int, dict[int, float]] = {}

    def solve(S: int) -> dict[int, float]:
        got = memo.get(S)
        if got is not None:
            return got
        inside = [v for v in range(g.n) if S >> v & 1]
        if len(inside) >= target:
            res = {v: 0.0 for v in inside}
        else:
            pos = {v: a for a, v in enumerate(inside)}
            A = np.eye(len(inside))
            b = np.ones(len(inside))
            for v in inside:
                for u in g.adjacency[v]:
                    p = P[v, u]
                    if u in pos:
                        A[pos[v], pos[u]] -= p
                    else:
                        b[pos[v]] += p * solve(S | 1 << u)[u]
            h = np.linalg.solve(A, b)
            res = dict(zip(inside, h.tolist()))
        memo[S] = res
        return res

    return float(solve(1 << start)[start])


# ---------------------------------------------------------------------------
# classic bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundsReport:
    estimate: float
    upper: float          # 2 m n
    lower_marker: float   # 0.9 n ln n
    nlogn: float
    below_upper: bool
    above_lower: bool
    status: str           # pass | investigate | inconclusive

    def ratio_to_nlogn(self) -> float:
        return self.estimate / self.nlogn if self.nlogn else math.nan


def check_bounds(g: Graph, estimate: float, truncated: bool = False) -> BoundsReport:
    """Compare a cover-time estimate with 2mn above and roughly n ln n below.

    Both bounds concern expectations, so a miss is reported as
    ``investigate`` rather than raised.
    """
    upper = 2.0 * g.m * g.n
    nlogn = g.n * math.log(g.n)
    marker = 0.9 * nlogn
    below = estimate < upper
    above = estimate >= marker
    if truncated:
        status = "inconclusive"
    elif below and above:
        status = "pass"
    else:
        status = "investigate"
    return BoundsReport(estimate, upper, marker, nlogn, below, above, status)
