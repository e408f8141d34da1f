"""Grid checks of the weak dynamic programming principle and of the subsolution inequalities."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .model import TransitionSystem
from .payoff import Abel, Cesaro, Xi, Zeta
from .valuemap import BestValueMap, ValueFunction, ValueMap

EXACT_TOL = 1e-10
VIOLATION_TOL = 1e-6


@dataclass
class DppReport:
    """Sup-norm deviations ``|V[v_{T+h}] - V[zeta_{h,T}]|`` (or the Abel analogue) on a grid."""

    family: str
    grid: list[tuple[int, float]] = field(default_factory=list)
    deviations: list[float] = field(default_factory=list)
    witnesses: list[str] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max(self.deviations, default=0.0)

    def worst(self) -> tuple[int, float, float, str] | None:
        if not self.deviations:
            return None
        k = int(np.argmax(self.deviations))
        h, param = self.grid[k]
        return h, param, self.deviations[k], self.witnesses[k]

    def verdict_at(self, eps: float, N: int) -> bool:
        """Grid evidence for the weak DPP at ``(eps, N)``.

        Only cells with ``h, T > N`` (Abel: ``h > N`` and ``lam < 1/N``) count.
        """
        for (h, param), dev in zip(self.grid, self.deviations):
            if self.family == "cesaro":
                relevant = h > N and param > N
            else:
                relevant = h > N and (N == 0 or param < 1.0 / N)
            if relevant and not dev < eps:
                return False
        return True

    @property
    def exact(self) -> bool:
        return self.max_deviation <= EXACT_TOL

    @property
    def violated(self) -> bool:
        return self.max_deviation > VIOLATION_TOL

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "T_or_lambda", "deviation"])
        for (h, param), dev in zip(self.grid, self.deviations):
            w.writerow([h, repr(param), repr(dev)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        worst = self.worst()
        return {
            "family": self.family,
            "max_deviation": self.max_deviation,
            "exact": self.exact,
            "violated": self.violated,
            "witness": None
            if worst is None
            else {"h": worst[0], "T_or_lambda": worst[1], "deviation": worst[2], "state": worst[3]},
            "cells": [
                {"h": h, "T_or_lambda": param, "deviation": dev}
                for (h, param), dev in zip(self.grid, self.deviations)
            ],
        }


def _sup_with_witness(a: ValueFunction, b: ValueFunction) -> tuple[float, str]:
    diff = np.abs(a.values - b.values)
    k = int(np.argmax(diff))
    return float(diff[k]), a.ids[k]


def check_dpp_cesaro(v: ValueMap, hs: Iterable[int], Ts: Iterable[int]) -> DppReport:
    hs, Ts = sorted(set(hs)), sorted(set(Ts))
    cache: dict[int, ValueFunction] = {}

    def cesaro_value(T: int) -> ValueFunction:
        if T not in cache:
            cache[T] = v(Cesaro(T))
        return cache[T]

    report = DppReport("cesaro")
    for h in hs:
        for T in Ts:
            lhs = cesaro_value(T + h)
            rhs = v(Zeta(h, T, cesaro_value(T)))
            dev, where = _sup_with_witness(lhs, rhs)
            report.grid.append((h, T))
            report.deviations.append(dev)
            report.witnesses.append(where)
    return report


def check_dpp_abel(v: ValueMap, hs: Iterable[int], lambdas: Iterable[float]) -> DppReport:
    hs, lambdas = sorted(set(hs)), sorted(set(lambdas), reverse=True)
    bases = {lam: v(Abel(lam)) for lam in lambdas}
    report = DppReport("abel")
    for h in hs:
        for lam in lambdas:
            rhs = v(Xi(h, lam, bases[lam]))
            dev, where = _sup_with_witness(bases[lam], rhs)
            report.grid.append((h, lam))
            report.deviations.append(dev)
            report.witnesses.append(where)
    return report


@dataclass
class SubsolutionReport:
    family: str
    parameter: float
    rows: list[tuple[str, int, float, float]] = field(default_factory=list)

    @property
    def slacks(self) -> list[float]:
        return [lhs - rhs for _, _, lhs, rhs in self.rows]

    @property
    def min_slack(self) -> float:
        return min(self.slacks, default=math.inf)

    @property
    def passed(self) -> bool:
        return self.min_slack >= -EXACT_TOL

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["state", "n", "lhs", "rhs", "slack"])
        for state, n, lhs, rhs in self.rows:
            w.writerow([state, n, repr(lhs), repr(rhs), repr(lhs - rhs)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "parameter": self.parameter,
            "min_slack": self.min_slack,
            "passed": self.passed,
            "rows": [
                {"state": s, "n": n, "lhs": lhs, "rhs": rhs, "slack": lhs - rhs}
                for s, n, lhs, rhs in self.rows
            ],
        }


def check_subsolution(v: BestValueMap, family: Cesaro | Abel, ns: Iterable[int]) -> SubsolutionReport:
    """Slack of the one-sided DP inequalities satisfied by the best value.

    Abel: ``V[w](w0) >= sup over walks of [discounted cost on [0,n) + e^{-lam n} V[w](z(n))]``.
    Cesaro: ``V[v_{T+n}](w0) >= sup over walks of [cost on [0,n)/(T+n) + T/(T+n) V[v_T](z(n))]``.
    Both right-hand sides are n-step dynamic programs over walks.
    """
    if not isinstance(v, BestValueMap) or not isinstance(v.model, TransitionSystem):
        raise TypeError("subsolution checks need the best value map of a transition system")
    ns = sorted(set(ns))
    if isinstance(family, Abel):
        report = SubsolutionReport("abel", family.lam)
        lhs = v(Abel(family.lam))
        for n in ns:
            rhs = v(Xi(n, family.lam, lhs))
            for k, sid in enumerate(lhs.ids):
                report.rows.append((sid, n, lhs[k], rhs[k]))
        return report
    report = SubsolutionReport("cesaro", family.T)
    base = v(Cesaro(family.T))
    for n in ns:
        lhs = v(Cesaro(family.T + n))
        rhs = v(Zeta(n, family.T, base))
        for k, sid in enumerate(lhs.ids):
            report.rows.append((sid, n, lhs[k], rhs[k]))
    return report
