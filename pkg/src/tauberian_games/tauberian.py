"""Convergence diagnostics for value-function families and the uniform-optimality harness.

Uniform convergence cannot be decided on a finite grid.  Everything here
reports grid evidence: sup-norm residuals against an oracle limit when one
exists, otherwise sup-norm gaps between consecutive grid points, together
with the tolerance each verdict used.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dpp import VIOLATION_TOL, DppReport, check_dpp_abel, check_dpp_cesaro
from .model import Strategy, TrajectoryBundle, TransitionSystem
from .payoff import Abel, Cesaro
from .valuemap import (
    BestValueMap,
    GameValueMap,
    StrategyValueMap,
    ValueFunction,
    ValueMap,
    mean_payoff_limit,
    value_best_cesaro_grid,
)

UNIFORM_TOL = 1e-2
COINCIDE_TOL = 2e-2

FAMILIES = ("cesaro", "abel")


def family_values(v: ValueMap, family: str, grid: Sequence) -> list[ValueFunction]:
    """``V[v_T]`` for T in grid, or ``V[w_lam]`` for lam in grid."""
    if family == "cesaro":
        m = v.model
        if isinstance(v, (BestValueMap, GameValueMap)) and isinstance(m, TransitionSystem):
            return value_best_cesaro_grid(m, list(grid))
        return [v(Cesaro(T)) for T in grid]
    if family == "abel":
        return [v(Abel(lam)) for lam in grid]
    raise ValueError(f"unknown payoff family {family!r}")


def _check_grid(family: str, grid: Sequence, min_points: int = 3) -> None:
    if len(grid) < min_points:
        raise ValueError(f"{family} grid needs at least {min_points} points")
    steps = np.diff(np.asarray(grid, dtype=float))
    if family == "cesaro" and not np.all(steps > 0):
        raise ValueError("T grid must be strictly increasing")
    if family == "abel" and not np.all(steps < 0):
        raise ValueError("lambda grid must be strictly decreasing")


@dataclass
class ConvergenceDiagnostics:
    family: str
    grid: list
    values: list[ValueFunction]
    sup_residuals: list[float]
    residual_kind: str
    caveat: str | None = None

    @property
    def pointwise_limits(self) -> ValueFunction:
        return self.values[-1]

    def verdict_uniform(self, tau: float = UNIFORM_TOL) -> bool:
        return self.sup_residuals[-1] <= tau

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "grid": list(self.grid),
            "residual_kind": self.residual_kind,
            "sup_residuals": list(self.sup_residuals),
            "pointwise_limits": self.pointwise_limits.to_dict(),
            "caveat": self.caveat,
        }


def _diagnose(v: ValueMap, family: str, grid: Sequence, oracle: ValueFunction | None) -> ConvergenceDiagnostics:
    _check_grid(family, grid)
    values = family_values(v, family, grid)
    if oracle is not None:
        residuals = [vf.sup_distance(oracle) for vf in values]
        kind = "oracle"
    else:
        residuals = [b.sup_distance(a) for a, b in zip(values, values[1:])]
        kind = "cauchy"
    caveat = None
    if isinstance(v.model, TransitionSystem) and residuals[-1] > UNIFORM_TOL:
        caveat = (
            "finite model: convergence is eventually uniform; the residuals show "
            "non-uniformity only on the pre-asymptotic range of this grid"
        )
    return ConvergenceDiagnostics(family, list(grid), values, residuals, kind, caveat)


def diagnose_cesaro(v: ValueMap, Ts: Sequence[int], oracle: ValueFunction | None = None) -> ConvergenceDiagnostics:
    return _diagnose(v, "cesaro", Ts, oracle)


def diagnose_abel(v: ValueMap, lambdas: Sequence[float], oracle: ValueFunction | None = None) -> ConvergenceDiagnostics:
    return _diagnose(v, "abel", lambdas, oracle)


@dataclass
class OptimalityGapCurve:
    family: str
    grid: list
    gaps: list[float]

    def verdict(self, tau: float = UNIFORM_TOL) -> bool:
        return self.gaps[-1] <= tau

    def to_dict(self) -> dict:
        return {"family": self.family, "grid": list(self.grid), "gaps": list(self.gaps)}


def optimality_gap(v_best: ValueMap, v_s: ValueMap, family: str, grid: Sequence) -> OptimalityGapCurve:
    """``sup_w (V_best - V_s)`` at each grid point."""
    if v_best.model is not v_s.model and v_best.model != v_s.model:
        raise ValueError("value maps are bound to different models")
    best = family_values(v_best, family, grid)
    strat = family_values(v_s, family, grid)
    gaps = [float(np.max(b.values - s.values)) for b, s in zip(best, strat)]
    return OptimalityGapCurve(family, list(grid), gaps)


@dataclass
class Theorem2Report:
    """Verdicts for uniform optimality of ``s*`` under both payoff families.

    ``v``: ``s*`` uniformly optimal for Cesaro payoffs and the best Cesaro
    values uniformly Cauchy; ``w``: the same for Abel payoffs; ``eq``: all
    four value families converge and their limits coincide.  When the DPP
    checks fail the verdicts are still reported but no equivalence between
    them is claimed.
    """

    v: bool
    w: bool
    eq: bool
    limits: dict[str, ValueFunction]
    distances: dict[str, float]
    diagnostics: dict[str, ConvergenceDiagnostics]
    gaps: dict[str, OptimalityGapCurve]
    dpp: dict[str, DppReport]
    oracle: ValueFunction | None
    tolerances: dict[str, float]
    notes: list[str] = field(default_factory=list)

    @property
    def hypotheses_hold(self) -> bool:
        return not any(r.violated for r in self.dpp.values())

    @property
    def consistent(self) -> bool | None:
        """Whether the three verdicts agree; None when the DPP hypothesis fails."""
        if not self.hypotheses_hold:
            return None
        return self.v == self.w == self.eq

    @property
    def passed(self) -> bool:
        return self.hypotheses_hold and self.v and self.w and self.eq

    def limit_separation(self) -> float:
        """Sup distance between the best Cesaro and best Abel limit estimates."""
        return self.distances["best_cesaro~best_abel"]

    def to_dict(self) -> dict:
        return {
            "v": self.v,
            "w": self.w,
            "eq": self.eq,
            "hypotheses_hold": self.hypotheses_hold,
            "consistent": self.consistent,
            "passed": self.passed,
            "limits": {k: vf.to_dict() for k, vf in self.limits.items()},
            "oracle": None if self.oracle is None else self.oracle.to_dict(),
            "distances": dict(self.distances),
            "final_gaps": {k: c.gaps[-1] for k, c in self.gaps.items()},
            "final_residuals": {k: d.sup_residuals[-1] for k, d in self.diagnostics.items()},
            "dpp": {k: _without_cells(r.to_dict()) for k, r in self.dpp.items()},
            "tolerances": dict(self.tolerances),
            "notes": list(self.notes),
        }


def _without_cells(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if k != "cells"}


def theorem2_report(
    m: TransitionSystem | TrajectoryBundle,
    s_star: Strategy,
    Ts: Sequence[int],
    lambdas: Sequence[float],
    tol: float = UNIFORM_TOL,
    coincide_tol: float = COINCIDE_TOL,
    dpp_hs: Sequence[int] = (1, 2, 5),
    dpp_Ts: Sequence[int] | None = None,
    dpp_lambdas: Sequence[float] | None = None,
) -> Theorem2Report:
    best = BestValueMap(m)
    strat = StrategyValueMap(m, s_star)
    oracle = mean_payoff_limit(m) if isinstance(m, TransitionSystem) and m.one_player else None

    diagnostics = {
        "best_cesaro": diagnose_cesaro(best, Ts),
        "best_abel": diagnose_abel(best, lambdas),
        "strategy_cesaro": diagnose_cesaro(strat, Ts),
        "strategy_abel": diagnose_abel(strat, lambdas),
    }
    gaps = {}
    for fam, grid in (("cesaro", Ts), ("abel", lambdas)):
        b = diagnostics[f"best_{fam}"].values
        s = diagnostics[f"strategy_{fam}"].values
        gaps[fam] = OptimalityGapCurve(fam, list(grid), [float(np.max(x.values - y.values)) for x, y in zip(b, s)])

    limits = {k: d.pointwise_limits for k, d in diagnostics.items()}
    distances = {
        f"{a}~{b}": limits[a].sup_distance(limits[b]) for a, b in itertools.combinations(limits, 2)
    }
    if oracle is not None:
        for k, vf in limits.items():
            distances[f"{k}~oracle"] = vf.sup_distance(oracle)

    v_ok = gaps["cesaro"].verdict(tol) and diagnostics["best_cesaro"].verdict_uniform(tol)
    w_ok = gaps["abel"].verdict(tol) and diagnostics["best_abel"].verdict_uniform(tol)
    eq_ok = all(d.verdict_uniform(tol) for d in diagnostics.values()) and all(
        dist <= coincide_tol for dist in distances.values()
    )

    dpp_Ts = list(range(1, 33)) if dpp_Ts is None else list(dpp_Ts)
    dpp_lambdas = list(lambdas[:4]) if dpp_lambdas is None else list(dpp_lambdas)
    dpp = {
        "best_cesaro": check_dpp_cesaro(best, dpp_hs, dpp_Ts),
        "best_abel": check_dpp_abel(best, dpp_hs, dpp_lambdas),
        "strategy_cesaro": check_dpp_cesaro(strat, dpp_hs, dpp_Ts),
        "strategy_abel": check_dpp_abel(strat, dpp_hs, dpp_lambdas),
    }

    notes = ["verdicts are finite-grid evidence, not proofs of the limit statements"]
    if any(r.violated for r in dpp.values()):
        bad = ", ".join(k for k, r in dpp.items() if r.violated)
        notes.append(f"DPP hypothesis violated ({bad}); no equivalence of (v), (w), (eq) is asserted")
    elif not (v_ok == w_ok == eq_ok):
        notes.append("verdicts disagree although the DPP checks pass")

    return Theorem2Report(
        v=v_ok,
        w=w_ok,
        eq=eq_ok,
        limits=limits,
        distances=distances,
        diagnostics=diagnostics,
        gaps=gaps,
        dpp=dpp,
        oracle=oracle,
        tolerances={"uniform": tol, "coincide": coincide_tol, "dpp_violation": VIOLATION_TOL},
        notes=notes,
    )
