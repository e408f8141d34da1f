"""Canonical models: fixtures, the non-uniform ladder, the DPP-failure bundle, random graphs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .model import TrajectoryBundle, TransitionSystem, validate_model
from .payoff import Abel, Cesaro
from .trajectory import Trajectory
from .valuemap import BestValueMap, mean_payoff_limit

LN2 = math.log(2)


def build_constant(c: float = 0.5) -> TransitionSystem:
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"cost must lie in [0, 1], got {c}")
    return TransitionSystem(("c",), (c,), ((0,),))


def build_two_cycle() -> TransitionSystem:
    return TransitionSystem.from_edges({"A": 0.0, "B": 1.0}, [("A", "B"), ("B", "A")])


def build_graph_A() -> TransitionSystem:
    return TransitionSystem.from_edges(
        {"0": 0.2, "1": 0.8, "2": 0.9}, [("0", "1"), ("0", "2"), ("1", "0"), ("2", "2")]
    )


def build_graph_B() -> TransitionSystem:
    return TransitionSystem.from_edges(
        {"s0": 0.0, "s1": 1.0}, [("s0", "s0"), ("s0", "s1"), ("s1", "s1")]
    )


def build_ladder(N: int = 64) -> TransitionSystem:
    """``L_k -> L_{k-1}`` with cost 0 for ``k >= 1``; ``L_0`` is an absorbing cost-1 state.

    From ``L_k``: ``v_T = (T - k)^+ / T`` and ``w_lam = e^{-lam k}``.  Every
    state has limit 1, but on ``T <= N`` the sup-norm distance to it stays 1.
    """
    if N < 1:
        raise ValueError("N must be ≥ 1")
    ids = tuple(f"L{k}" for k in range(N + 1))
    cost = (1.0,) + (0.0,) * N
    succ = ((0,),) + tuple((k - 1,) for k in range(1, N + 1))
    return TransitionSystem(ids, cost, succ)


def oscillating_member(n: int, low: int = 0, high: int = 1) -> Trajectory:
    """Low on ``[0, n)``, high on ``[n, 2n)``, low forever after."""
    return Trajectory([low] * n + [high] * n, [low])


def build_oscillating_bundle(N: int = 64, tail: bool = False) -> TrajectoryBundle:
    """Trajectories ``z_1..z_N`` from ``w0``, ``z_n`` paying 1 exactly on ``[n, 2n)``.

    The set is not closed under concatenation.  Best Cesaro values tend to
    1/2 while best Abel values tend to 1/4.  With ``tail=True`` the members
    ``n > N`` are folded in through their closed-form supremum.
    """
    if N < 1:
        raise ValueError("N must be ≥ 1")
    trajs = tuple(oscillating_member(n) for n in range(1, N + 1))
    return TrajectoryBundle(("w0", "w1"), (0.0, 1.0), (0,), trajs, False, "oscillating" if tail else None)


def build_random_graph(
    seed: int, n_states: int, out_degree: int = 2, cost_resolution: float = 1 / 32
) -> TransitionSystem:
    """Deterministic random graph; costs on the grid ``k * cost_resolution`` in [0, 1].

    A dyadic resolution keeps every DP sum exact in floating point.
    """
    if n_states < 1 or out_degree < 1:
        raise ValueError("n_states and out_degree must be ≥ 1")
    rng = np.random.default_rng(seed)
    levels = int(round(1 / cost_resolution))
    costs = rng.integers(0, levels + 1, size=n_states) / levels
    succ = []
    for _ in range(n_states):
        draws = rng.integers(0, n_states, size=out_degree)
        succ.append(tuple(sorted(set(int(d) for d in draws))))
    ids = tuple(f"q{i}" for i in range(n_states))
    return TransitionSystem(ids, tuple(float(c) for c in costs), tuple(succ))


def random_population(
    count: int = 100, max_states: int = 30, seed: int = 0, max_degree: int = 3
) -> list[TransitionSystem]:
    """The seeded population used by the property and acceptance checks."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(1, max_states + 1))
        d = int(rng.integers(1, max_degree + 1))
        out.append(build_random_graph(seed * 100_003 + k, n, d))
    return out


# --- catalog -------------------------------------------------------------------


@dataclass
class Fact:
    description: str
    tag: str
    check: Callable[[Any], bool]


@dataclass
class ZooEntry:
    name: str
    builder: Callable[..., TransitionSystem | TrajectoryBundle]
    params: dict[str, Any] = field(default_factory=dict)
    facts: list[Fact] = field(default_factory=list)
    summary: str = ""

    def build(self, **overrides) -> TransitionSystem | TrajectoryBundle:
        model = self.builder(**(self.params | overrides))
        validate_model(model).raise_for_issues()
        return model


def _facts_constant() -> list[Fact]:
    return [
        Fact("V_best[v_T] = c for T in {1, 7, 100}", "TRIVIAL",
             lambda m: all(np.all(BestValueMap(m)(Cesaro(T)).values == m.cost[0]) for T in (1, 7, 100))),
        Fact("V_best[w_lam] = c for lam in {ln 2, 1e-3}", "TRIVIAL",
             lambda m: all(np.all(BestValueMap(m)(Abel(l)).values == m.cost[0]) for l in (LN2, 1e-3))),
        Fact("mean-payoff limit = c", "TRIVIAL", lambda m: mean_payoff_limit(m)[0] == m.cost[0]),
    ]


def _facts_two_cycle() -> list[Fact]:
    return [
        Fact("V_best[v_2] = 0.5 everywhere", "TRIVIAL",
             lambda m: np.allclose(BestValueMap(m)(Cesaro(2)).values, 0.5, atol=1e-12)),
        Fact("V_best[w_ln2](A) = 1/3", "DERIVED",
             lambda m: abs(BestValueMap(m)(Abel(LN2)).at("A") - 1 / 3) <= 1e-12),
        Fact("mean-payoff limit = 0.5 everywhere", "DERIVED",
             lambda m: np.all(mean_payoff_limit(m).values == 0.5)),
    ]


def _facts_graph_A() -> list[Fact]:
    return [
        Fact("mean-payoff limit = 0.9 everywhere", "DERIVED",
             lambda m: np.allclose(mean_payoff_limit(m).values, 0.9, atol=1e-12)),
    ]


def _facts_graph_B() -> list[Fact]:
    return [
        Fact("V_best[v_4](s0) = 0.75", "DERIVED", lambda m: BestValueMap(m)(Cesaro(4)).at("s0") == 0.75),
        Fact("V_best[w_ln2](s0) = 0.5", "DERIVED",
             lambda m: abs(BestValueMap(m)(Abel(LN2)).at("s0") - 0.5) <= 1e-12),
        Fact("V_best[.](s1) = 1 for every T and lam", "TRIVIAL",
             lambda m: BestValueMap(m)(Cesaro(9)).at("s1") == 1.0 and BestValueMap(m)(Abel(0.1)).at("s1") == 1.0),
    ]


def _facts_ladder() -> list[Fact]:
    def cesaro_formula(m):
        N = m.n - 1
        T = max(1, N // 2)
        vals = BestValueMap(m)(Cesaro(T)).values
        return all(abs(vals[k] - max(T - k, 0) / T) <= 1e-12 for k in range(N + 1))

    def abel_formula(m):
        lam = 0.05
        vals = BestValueMap(m)(Abel(lam)).values
        return all(abs(vals[k] - math.exp(-lam * k)) <= 1e-12 for k in range(m.n))

    def sup_gap_is_one(m):
        T = m.n - 1
        return float(np.max(1.0 - BestValueMap(m)(Cesaro(T)).values)) == 1.0

    return [
        Fact("v_T(L_k) = (T - k)^+ / T", "DERIVED", cesaro_formula),
        Fact("w_lam(L_k) = e^{-lam k}", "DERIVED", abel_formula),
        Fact("sup_k |1 - v_T(L_k)| = 1 for T = N", "TRIVIAL", sup_gap_is_one),
    ]


def _facts_oscillating() -> list[Fact]:
    def even_T_half(b):
        N = len(b.trajectories)
        return all(BestValueMap(b)(Cesaro(T)).at("w0") == 0.5 for T in range(2, N + 1, 2))

    return [
        Fact("V_best[v_T](w0) = 1/2 for even T <= N", "DERIVED", even_T_half),
        Fact("V_best[w_ln2](w0) = 1/4", "DERIVED",
             lambda b: abs(BestValueMap(b)(Abel(LN2)).at("w0") - 0.25) <= 1e-12),
    ]


def _facts_random() -> list[Fact]:
    return [
        Fact("passes validate_model", "TRIVIAL", lambda m: validate_model(m).ok),
    ]


ZOO: dict[str, ZooEntry] = {
    e.name: e
    for e in [
        ZooEntry("constant", build_constant, {"c": 0.5}, _facts_constant(), "single state with a self-loop"),
        ZooEntry("two-cycle", build_two_cycle, {}, _facts_two_cycle(), "A(0) <-> B(1)"),
        ZooEntry("graph-A", build_graph_A, {}, _facts_graph_A(), "costs .2/.8/.9; 0<->1, 0->2, 2->2"),
        ZooEntry("graph-B", build_graph_B, {}, _facts_graph_B(), "s0(0) -> {s0, s1}; s1(1) -> s1"),
        ZooEntry("ladder", build_ladder, {"N": 64}, _facts_ladder(),
                 "non-uniform convergence on T <= N (finite N: pre-asymptotic only)"),
        ZooEntry("oscillating", build_oscillating_bundle, {"N": 64, "tail": False}, _facts_oscillating(),
                 "bundle violating the DPP; Cesaro limit 1/2, Abel limit 1/4"),
        ZooEntry("random", build_random_graph,
                 {"seed": 0, "n_states": 10, "out_degree": 2, "cost_resolution": 1 / 32},
                 _facts_random(), "seeded random graph"),
    ]
}

SYSTEM_ENTRIES = ("constant", "two-cycle", "graph-A", "graph-B", "ladder")
