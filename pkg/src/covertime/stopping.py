"""Secretary-style stopping rule for picking a low-degree neighbor.

Neighbors of a node are presented one at a time in random order.  The rule
rejects the first ``r - 1``, then takes the first one whose degree beats every
degree seen so far, or the last one if none does.  The cutoff ``r`` is chosen
to maximise an expected reward that trades the chance of catching the
minimum-degree neighbor against the number of neighbors inspected.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations

from .graph import Graph


class StoppingError(ValueError):
    pass


def success_probability(r: int, k: int, N: int) -> Fraction:
    """Probability that the rule with cutoff ``r`` stops by selection at position ``k``.

    Equals (r - 1) / (k (k - 1)): the k-th item is the best of the first k
    and the best of the first k - 1 sits among the first r - 1.
    """
    if not (2 <= r <= k <= N):
        raise StoppingError(f"need 2 <= r <= k <= N, got r={r}, k={k}, N={N}")
    return Fraction(r - 1, k * (k - 1))


@dataclass(frozen=True)
class RewardModel:
    """Weight schedule w(k) over the number k of inspected neighbors, for N neighbors.

    ``weight`` is ``"constant"`` (w = c) or ``"exponential"``
    (w = (k - 1) exp(-k / theta)).
    """

    weight: str
    N: int
    c: float = 1.0
    theta: float | None = None

    def __post_init__(self):
        if self.N < 2:
            raise StoppingError("reward model needs N >= 2")
        if self.weight == "constant":
            if not self.c > 0:
                raise StoppingError("constant weight needs c > 0")
        elif self.weight == "exponential":
            if self.theta is None or not self.theta > 0 or not math.isfinite(self.theta):
                raise StoppingError("exponential weight needs finite theta > 0")
        else:
            raise StoppingError(f"unknown weight {self.weight!r}")

    @classmethod
    def constant(cls, N: int, c: float = 1.0) -> RewardModel:
        return cls("constant", N, c=c)

    @classmethod
    def exponential(cls, N: int, theta: float) -> RewardModel:
        return cls("exponential", N, theta=theta)

    @classmethod
    def for_spec(cls, spec) -> RewardModel:
        # N is a placeholder: the walk re-targets it per node via with_n
        if spec.param is None:
            return cls.constant(2)
        return cls.exponential(2, spec.param)

    def with_n(self, N: int) -> RewardModel:
        return RewardModel(self.weight, N, self.c, self.theta)

    @property
    def alpha(self) -> float:
        return math.exp(-1.0 / self.theta)

    def w(self, k: int) -> float:
        if self.weight == "constant":
            return self.c
        return (k - 1) * math.exp(-k / self.theta)


def _check_r(model, r):
    if not 2 <= r <= model.N:
        raise StoppingError(f"cutoff r={r} outside [2, {model.N}]")


def expected_reward(model: RewardModel, r: int) -> float:
    """Closed-form expected reward at cutoff ``r``.

    constant:     c (r-1)/N * sum_{k=r}^{N} 1/(k-1)
    exponential:  (r-1)/N * alpha^r (1 - alpha^(N-r+1)) / (1 - alpha)
    """
    _check_r(model, r)
    N = model.N
    if model.weight == "constant":
        return model.c * (r - 1) / N * math.fsum(1.0 / (k - 1) for k in range(r, N + 1))
    t = model.theta
    # 1 - alpha^j via expm1 keeps precision when theta is large
    return (r - 1) / N * math.exp(-r / t) * (-math.expm1(-(N - r + 1) / t)) / (-math.expm1(-1.0 / t))


def expected_reward_direct(model: RewardModel, r: int) -> float:
    """Expected reward by summing (k/N) w(k) P(stop at k) term by term."""
    _check_r(model, r)
    N = model.N
    return math.fsum(k / N * model.w(k) * (r - 1) / (k * (k - 1)) for k in range(r, N + 1))


def expected_reward_exact(model: RewardModel, r: int) -> Fraction:
    """Rational expected reward for the constant weight (c taken as a Fraction)."""
    if model.weight != "constant":
        raise StoppingError("exact arithmetic only for the constant weight")
    _check_r(model, r)
    N = model.N
    c = Fraction(model.c)
    return sum((Fraction(k, N) * c * success_probability(r, k, N) for k in range(r, N + 1)), Fraction(0))


@dataclass(frozen=True)
class Cutoff:
    r: int
    reward: float
    newton_r: float | None = None
    newton_converged: bool | None = None


def newton_cutoff(N: int, theta: float, max_iter: int = 100, tol: float = 1e-10):
    """Maximise g(r) = (r-1)(alpha^r - alpha^(N+1)) over real r in [2, N].

    g is proportional to the exponential expected reward.  Returns
    ``(r, converged)``; the iterate is clamped to [2, N] and an iterate
    pinned at a bound with the gradient pointing outward counts as converged.
    """
    L = -1.0 / theta  # log alpha
    aN1 = math.exp(L * (N + 1))
    r = max(2.0, N / math.e)
    for _ in range(max_iter):
        ar = math.exp(L * r)
        grad = ar - aN1 + (r - 1) * L * ar
        hess = L * ar * (2 + (r - 1) * L)
        if hess >= 0 or not math.isfinite(hess) or ar == 0.0:
            # outside the concave region: step toward the gradient's sign
            nxt = r + (1.0 if grad > 0 else -1.0) * max(1.0, 0.5 * (r - 2))
        else:
            nxt = r - grad / hess
        nxt = min(max(nxt, 2.0), float(N))
        if nxt == r:
            if r in (2.0, float(N)) or abs(grad) < tol:
                return r, True
        if abs(nxt - r) < tol:
            return nxt, True
        r = nxt
    return r, False


def optimal_cutoff(model: RewardModel) -> Cutoff:
    """Integer argmax of the expected reward by scanning r = 2..N.

    For the exponential weight the continuous Newton solution is attached.
    """
    return _optimal_cutoff(model)


@lru_cache(maxsize=4096)
def _optimal_cutoff(model: RewardModel) -> Cutoff:
    best_r, best = 2, -math.inf
    for r in range(2, model.N + 1):
        v = expected_reward(model, r)
        if v > best:
            best_r, best = r, v
    if model.weight == "constant":
        return Cutoff(best_r, best)
    nr, ok = newton_cutoff(model.N, model.theta)
    return Cutoff(best_r, best, nr, ok)


def reward_table(model: RewardModel) -> list[tuple[int, float]]:
    return [(r, expected_reward(model, r)) for r in range(2, model.N + 1)]


# ---------------------------------------------------------------------------
# the selection protocol
# ---------------------------------------------------------------------------

def select_from_sequence(degrees, r: int):
    """Run the rule over degrees in arrival order.

    Returns ``(index, inspections, stopped)``; ``stopped`` is False when the
    rule fell through to the last item.
    """
    N = len(degrees)
    if N == 0:
        raise StoppingError("nothing to select from")
    if N == 1:
        return 0, 1, True
    r = min(max(r, 2), N)
    best = min(degrees[:r - 1])
    for k in range(r - 1, N):
        if degrees[k] < best:
            return k, k + 1, True
        best = min(best, degrees[k])
    return N - 1, N, False


def brute_force_stops(N: int, r: int):
    """Enumerate all N! orders of distinct ranks (0 = lowest degree).

    Returns ``(stop_at, best_found)``: exact probabilities that the rule stops
    by selection at each position k (1-based), and that it returns rank 0.
    """
    if not 2 <= r <= N:
        raise StoppingError("need 2 <= r <= N")
    total = math.factorial(N)
    stops = {k: 0 for k in range(r, N + 1)}
    found = 0
    for order in permutations(range(N)):
        idx, _, stopped = select_from_sequence(order, r)
        if stopped:
            stops[idx + 1] += 1
        if order[idx] == 0:
            found += 1
    return {k: Fraction(c, total) for k, c in stops.items()}, Fraction(found, total)


def secretary_select(g: Graph, i: int, model: RewardModel, rng: random.Random, candidates=None):
    """Inspect ``candidates`` (default: all neighbors of ``i``) in random order.

    The cutoff is the optimal one for ``model`` with N = number of candidates.
    Returns ``(node, inspections)``.
    """
    cands = list(g.adjacency[i] if candidates is None else candidates)
    if len(cands) == 1:
        return cands[0], 1
    rng.shuffle(cands)
    r = optimal_cutoff(model.with_n(len(cands))).r
    deg = g.degrees
    idx, used, _ = select_from_sequence([deg[v] for v in cands], r)
    return cands[idx], used


def secretary_walk_step(g: Graph, s, model: RewardModel, rng: random.Random) -> int:
    """Walk step that applies the stopping rule to the unvisited neighbors.

    Falls back to a uniform neighbor (no inspections) when every neighbor has
    been visited.  Inspections are added to ``s.inspections``.
    """
    nbrs = g.adjacency[s.current]
    counts = s.visit_counts
    unvisited = [v for v in nbrs if not counts[v]]
    if not unvisited:
        return nbrs[int(rng.random() * len(nbrs))]
    node, used = secretary_select(g, s.current, model, rng, unvisited)
    s.inspections += used
    return node
