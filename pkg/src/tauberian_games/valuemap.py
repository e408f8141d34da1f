"""Game value maps: payoffs to bounded state functions.

Three handles are provided for a transition system:

* ``StrategyValueMap``: ``V_s[c](w) = c(s[w])``;
* ``BestValueMap``: the supremum over all trajectories from ``w`` (for
  models with MIN-owned states the alternating min/max value);
* ``GameValueMap``: the alternating min/max value with the iterative
  discounted solver.

``BestValueMap`` and ``StrategyValueMap`` also accept a ``TrajectoryBundle``.
Affine payoffs are computed from the inner payoff, so the affine axiom holds
by construction; the monotonicity axiom is a property of the solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import ModelError, Strategy, TrajectoryBundle, TransitionSystem, validate_strategy
from .payoff import Abel, Affine, Cesaro, Payoff, PayoffError, Xi, Zeta, abel, base_cost, evaluate
from .trajectory import Trajectory, state_at, unroll

# Policy iteration switches action only on improvements above this margin.
IMPROVEMENT_EPS = 1e-13
GAME_VI_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """A bounded map from the model's states to the reals."""

    ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.ids),):
            raise ValueError(f"expected {len(self.ids)} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("value functions must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "ids", tuple(self.ids))

    @classmethod
    def constant(cls, ids: Sequence[str], c: float) -> ValueFunction:
        return cls(tuple(ids), np.full(len(ids), float(c)))

    def __getitem__(self, state: int) -> float:
        if not isinstance(state, (int, np.integer)) or not 0 <= state < len(self.ids):
            raise PayoffError(f"value function has no entry for state {state!r}")
        return float(self.values[state])

    def __len__(self) -> int:
        return len(self.ids)

    def at(self, state_id: str) -> float:
        return float(self.values[self.ids.index(state_id)])

    def affine(self, A: float, B: float) -> ValueFunction:
        return ValueFunction(self.ids, A * self.values + B)

    def sup_distance(self, other: ValueFunction) -> float:
        if self.ids != other.ids:
            raise ValueError("value functions live on different state sets")
        return float(np.max(np.abs(self.values - other.values)))

    def to_dict(self) -> dict[str, float]:
        return {sid: float(v) for sid, v in zip(self.ids, self.values)}


# --- handles ----------------------------------------------------------------


@dataclass(eq=False)
class ValueMap:
    model: TransitionSystem | TrajectoryBundle

    def __call__(self, p: Payoff) -> ValueFunction:
        return apply_value_map(self, p)

    @property
    def name(self) -> str:
        raise NotImplementedError


@dataclass(eq=False)
class StrategyValueMap(ValueMap):
    strategy: Strategy = None
    _paths: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.strategy is None:
            raise ModelError("a strategy is required")
        validate_strategy(self.strategy, self.model)

    @property
    def name(self) -> str:
        return "V_s"

    def trajectory(self, state: int) -> Trajectory | None:
        """``s[state]``, or None where the strategy is undefined (bundles)."""
        if state not in self._paths:
            if self.strategy.kind == "GENERAL":
                self._paths[state] = self.strategy.selector.get(state)
            else:
                self._paths[state] = unroll(self.model, self.strategy, state)
        return self._paths[state]


@dataclass(eq=False)
class BestValueMap(ValueMap):
    @property
    def name(self) -> str:
        return "V_best"


@dataclass(eq=False)
class GameValueMap(ValueMap):
    def __post_init__(self):
        if not isinstance(self.model, TransitionSystem):
            raise ModelError("game value maps need a transition system")

    @property
    def name(self) -> str:
        return "V_game"


def apply_value_map(v: ValueMap, p: Payoff) -> ValueFunction:
    if isinstance(p, Affine):
        return apply_value_map(v, p.inner).affine(p.A, p.B)
    m = v.model
    if isinstance(p, (Zeta, Xi)) and p.V.ids != m.ids:
        raise PayoffError("the value function inside the payoff lives on a different state set")
    if isinstance(v, StrategyValueMap):
        return _value_along(v, p)
    if isinstance(m, TrajectoryBundle):
        if not isinstance(v, BestValueMap):
            raise PayoffError(f"{type(v).__name__} is not defined on trajectory bundles")
        return value_bundle(m, p)
    if isinstance(p, Cesaro):
        return value_best_cesaro(m, p.T, p.cost)
    if isinstance(p, Abel):
        if isinstance(v, GameValueMap) or not m.one_player:
            return value_game(m, p)
        return value_best_abel(m, p.lam, p.cost)
    if isinstance(p, (Zeta, Xi)):
        return _split_value(m, p)
    raise PayoffError(f"unsupported payoff {p!r}")


def _value_along(v: StrategyValueMap, p: Payoff) -> ValueFunction:
    m = v.model
    g = m.cost
    out = np.zeros(m.n)
    for w in range(m.n):
        z = v.trajectory(w)
        # States without a selected trajectory (empty Γ) carry value 0.
        if z is not None:
            out[w] = evaluate(p, z, g)
    return ValueFunction(m.ids, out)


def value_strategy(m: TransitionSystem | TrajectoryBundle, s: Strategy, p: Payoff) -> ValueFunction:
    """``V_s[p](w) = p(s[w])``."""
    return StrategyValueMap(m, s)(p)


# --- finite-horizon dynamic programs ------------------------------------------


def _opt(m: TransitionSystem, U: np.ndarray, succ: np.ndarray, mins: np.ndarray) -> np.ndarray:
    nxt = U[succ]
    return np.where(mins, nxt.min(axis=1), nxt.max(axis=1))


def _cesaro_sums(m: TransitionSystem, Ts: Iterable[int], cost=None) -> dict[int, np.ndarray]:
    """Optimal T-step cost totals ``U_T`` for every T in ``Ts`` in one sweep."""
    targets = sorted(set(Ts))
    for T in targets:
        if isinstance(T, bool) or not isinstance(T, (int, np.integer)) or T < 1:
            raise PayoffError(f"T must be ≥ 1, got {T!r}")
    g = np.asarray(m.cost if cost is None else cost, dtype=float)
    succ, mins = m.successor_matrix(), m.min_mask()
    U = np.zeros(m.n)
    out = {}
    k = 0
    for T in targets:
        while k < T:
            U = g + _opt(m, U, succ, mins)
            k += 1
        out[T] = U.copy()
    return out


def value_best_cesaro(m: TransitionSystem, T: int, cost=None) -> ValueFunction:
    """Best T-horizon average: ``U_0 = 0``, ``U_{k+1} = g + opt U_k(succ)``, result ``U_T / T``."""
    U = _cesaro_sums(m, [T], cost)[T]
    return ValueFunction(m.ids, U / T)


def value_best_cesaro_grid(m: TransitionSystem, Ts: Sequence[int], cost=None) -> list[ValueFunction]:
    sums = _cesaro_sums(m, Ts, cost)
    return [ValueFunction(m.ids, sums[T] / T) for T in Ts]


def _split_value(m: TransitionSystem, p: Zeta | Xi) -> ValueFunction:
    """Best value of a payoff that only sees ``z(0..h)``: an h-step backward DP."""
    g = m.cost_array()
    succ, mins = m.successor_matrix(), m.min_mask()
    if isinstance(p, Zeta):
        R = (p.T / (p.T + p.h)) * p.V.values
        head = g / (p.T + p.h)
        for _ in range(p.h):
            R = head + _opt(m, R, succ, mins)
    else:
        x = math.exp(-p.lam)
        head = -math.expm1(-p.lam) * g
        R = p.V.values
        for _ in range(p.h):
            R = head + x * _opt(m, R, succ, mins)
    return ValueFunction(m.ids, R)


# --- discounted solvers --------------------------------------------------------


def policy_values(m: TransitionSystem, choice: Sequence[int], lam: float, cost=None) -> np.ndarray:
    """Closed-form Abel value of the stationary policy ``choice`` from every state."""
    s = Strategy.stationary(choice)
    g = m.cost if cost is None else cost
    return np.array([abel(unroll(m, s, w), lam, g) for w in range(m.n)])


def value_best_abel(m: TransitionSystem, lam: float, cost=None) -> ValueFunction:
    """Exact best discounted value by policy iteration over stationary policies.

    Each policy is evaluated with the closed form along its unrolled
    trajectories; a state switches to the lowest-index successor with the
    largest one-step lookahead only if that beats its current choice.
    """
    if not (isinstance(lam, (int, float)) and lam > 0):
        raise PayoffError(f"lambda must be > 0, got {lam!r}")
    if not m.one_player:
        return value_game(m, Abel(lam, cost))
    g = np.asarray(m.cost if cost is None else cost, dtype=float)
    x = math.exp(-lam)
    head = -math.expm1(-lam) * g
    choice = [s[0] for s in m.successors]
    while True:
        V = policy_values(m, choice, lam, cost)
        changed = False
        for w, succ in enumerate(m.successors):
            q = [head[w] + x * V[j] for j in succ]
            best = int(np.argmax(q))
            current = q[succ.index(choice[w])]
            if q[best] > current + IMPROVEMENT_EPS:
                choice[w] = succ[best]
                changed = True
        if not changed:
            return ValueFunction(m.ids, V)


def value_game(m: TransitionSystem, p: Cesaro | Abel) -> ValueFunction:
    """Alternating min/max value (MAX maximizes, MIN minimizes).

    Abel payoffs use value iteration with contraction ``e^{-lam}``, stopped
    when successive iterates are within ``1e-12`` in sup-norm; the remaining
    error is at most ``1e-12 * x / (1 - x)``.
    """
    if isinstance(p, Affine):
        return value_game(m, p.inner).affine(p.A, p.B)
    if isinstance(p, Cesaro):
        return value_best_cesaro(m, p.T, p.cost)
    if not isinstance(p, Abel):
        raise PayoffError(f"value_game supports Cesaro and Abel payoffs, got {type(p).__name__}")
    g = np.asarray(base_cost(p, m.cost), dtype=float)
    succ, mins = m.successor_matrix(), m.min_mask()
    x = math.exp(-p.lam)
    head = -math.expm1(-p.lam) * g
    V = g.copy()
    while True:
        nxt = head + x * _opt(m, V, succ, mins)
        if np.max(np.abs(nxt - V)) <= GAME_VI_TOL:
            return ValueFunction(m.ids, nxt)
        V = nxt


# --- bundles -----------------------------------------------------------------


def _oscillating_tail_sup(b: TrajectoryBundle, p: Cesaro | Abel, g: Sequence[float]) -> float:
    """Supremum of ``p`` over the family members ``n > len(b.trajectories)``.

    Member ``n`` sits in the low state except on ``[n, 2n)``; the low/high
    states are read off the first listed member (``n = 1``).
    """
    first = b.trajectories[0]
    lo, hi = g[state_at(first, 0)], g[state_at(first, 1)]
    n0 = len(b.trajectories) + 1
    if isinstance(p, Cesaro):
        T = p.T
        k = max(n0, T // 2)
        frac = max(0, min(k, T - k)) / T
    else:
        centre = math.log(2) / p.lam
        frac = max(
            math.exp(-p.lam * k) * -math.expm1(-p.lam * k)
            for k in {max(n0, math.floor(centre)), max(n0, math.ceil(centre))}
        )
    # Fraction of weight on the high state ranges over (0, frac]; pick the side that helps.
    return lo + (hi - lo) * frac if hi >= lo else lo


def value_bundle(b: TrajectoryBundle, p: Payoff) -> ValueFunction:
    """Best value over an explicit trajectory list (plus an optional analytic tail).

    States that start no trajectory carry value 0 for every non-affine payoff.
    """
    if isinstance(p, Affine):
        return value_bundle(b, p.inner).affine(p.A, p.B)
    g = b.cost
    out = np.zeros(b.n)
    starts = {state_at(z, 0) for z in b.trajectories}
    for w in range(b.n):
        if w not in starts:
            continue
        out[w] = max(evaluate(p, z, g) for z in b.trajectories_from(w))
    if b.tail is not None:
        if not isinstance(p, (Cesaro, Abel)):
            raise PayoffError(f"tail family {b.tail!r} only has closed forms for Cesaro/Abel payoffs")
        w = state_at(b.trajectories[0], 0)
        out[w] = max(out[w], _oscillating_tail_sup(b, p, base_cost(p, g)))
    return ValueFunction(b.ids, out)


# --- mean-payoff limit ---------------------------------------------------------


def strongly_connected_components(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative. Components come out sinks first."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
    return comps


def karp_max_mean_cycle(
    nodes: Sequence[int], succ: Sequence[Sequence[int]], g: Sequence[float]
) -> tuple[float, list[int]]:
    """Maximum cycle mean inside one strongly connected component, with a witness cycle.

    The weight of edge ``u -> v`` is ``g(u)``.  ``D_k(v)`` is the heaviest
    k-edge walk from the first node to ``v``; the optimum is
    ``max_v min_k (D_n(v) - D_k(v)) / (n - k)``, and the n-edge walk
    realizing ``D_n`` at the maximizing ``v`` contains an optimal cycle.
    """
    local = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    preds: list[list[int]] = [[] for _ in range(n)]
    for v in nodes:
        for w in succ[v]:
            if w in local:
                preds[local[w]].append(local[v])
    if n == 1 and not preds[0]:
        raise ValueError("component has no cycle")
    neg = -math.inf
    D = [[neg] * n for _ in range(n + 1)]
    parent = [[-1] * n for _ in range(n + 1)]
    D[0][0] = 0.0
    w_local = [g[v] for v in nodes]
    for k in range(1, n + 1):
        prev, cur, par = D[k - 1], D[k], parent[k]
        for v in range(n):
            for u in preds[v]:
                if prev[u] > neg and prev[u] + w_local[u] > cur[v]:
                    cur[v] = prev[u] + w_local[u]
                    par[v] = u
    best, best_v = neg, -1
    for v in range(n):
        if D[n][v] == neg:
            continue
        worst = min((D[n][v] - D[k][v]) / (n - k) for k in range(n) if D[k][v] > neg)
        if worst > best:
            best, best_v = worst, v
    walk = [best_v]
    for k in range(n, 0, -1):
        walk.append(parent[k][walk[-1]])
    walk.reverse()
    # Any cycle on the critical walk is optimal; take the first that closes,
    # falling back to the best one found if rounding says otherwise.
    candidates = []
    seen: dict[int, int] = {}
    for pos, v in enumerate(walk):
        if v in seen:
            candidates.append(walk[seen[v]:pos])
        seen[v] = pos
    cycle = max(candidates, key=lambda c: math.fsum(w_local[v] for v in c) / len(c))
    return best, [nodes[v] for v in cycle]


@dataclass(frozen=True)
class CycleInfo:
    component: tuple[int, ...]
    mean: float | None
    cycle: tuple[int, ...]


def component_cycles(m: TransitionSystem, cost=None) -> list[CycleInfo]:
    g = m.cost if cost is None else cost
    out = []
    for comp in strongly_connected_components(m.successors):
        cyclic = len(comp) > 1 or comp[0] in m.successors[comp[0]]
        if cyclic:
            mean, cyc = karp_max_mean_cycle(comp, m.successors, g)
            out.append(CycleInfo(tuple(comp), mean, tuple(cyc)))
        else:
            out.append(CycleInfo(tuple(comp), None, ()))
    return out


def _limit_array(m: TransitionSystem, infos: list[CycleInfo]) -> np.ndarray:
    comp_of = {}
    for k, info in enumerate(infos):
        for v in info.component:
            comp_of[v] = k
    limit = np.full(len(infos), -math.inf)
    # Tarjan emits sinks first, so successors' components are already final.
    for k, info in enumerate(infos):
        best = info.mean if info.mean is not None else -math.inf
        for v in info.component:
            for w in m.successors[v]:
                if comp_of[w] != k:
                    best = max(best, limit[comp_of[w]])
        limit[k] = best
    return np.array([limit[comp_of[v]] for v in range(m.n)])


def mean_payoff_limit(m: TransitionSystem, cost=None) -> ValueFunction:
    """Common limit of the best Cesaro and Abel values: the best reachable cycle mean."""
    if not m.one_player:
        raise ModelError("the limit oracle is only available for one-player models")
    return ValueFunction(m.ids, _limit_array(m, component_cycles(m, cost)))


def greedy_mean_payoff_strategy(m: TransitionSystem) -> Strategy:
    """A stationary policy that heads for a best reachable cycle and loops on it."""
    if not m.one_player:
        raise ModelError("greedy strategy is only defined for one-player models")
    infos = component_cycles(m)
    limit = _limit_array(m, infos)
    choice = [-1] * m.n
    preds: list[list[int]] = [[] for _ in range(m.n)]
    for v in range(m.n):
        for w in m.successors[v]:
            preds[w].append(v)
    for value in sorted(set(limit.tolist()), reverse=True):
        frontier = []
        for info in infos:
            if info.mean is None or info.mean != value or limit[info.cycle[0]] != value:
                continue
            cyc = info.cycle
            for i, v in enumerate(cyc):
                choice[v] = cyc[(i + 1) % len(cyc)]
                frontier.append(v)
        # Reverse BFS among states with the same limit value.
        head = 0
        while head < len(frontier):
            w = frontier[head]
            head += 1
            for v in preds[w]:
                if choice[v] == -1 and limit[v] == value:
                    choice[v] = w
                    frontier.append(v)
    assert all(c != -1 for c in choice)
    return Strategy.stationary(choice)
