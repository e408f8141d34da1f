"""Payoffs on eventually periodic trajectories, evaluated in closed form.

With the time grid fixed to unit steps, a cost stream ``g_0, g_1, ...`` is
constant on each ``[t, t+1)`` and

* the Cesaro payoff is ``(1/T) * sum_{t<T} g_t``;
* the Abel payoff is ``sum_t (e^{-lam t} - e^{-lam (t+1)}) g_t``, i.e.
  ``(1 - x) * sum_t x^t g_t`` with ``x = e^{-lam}``.

Both are split into a preamble part and a geometric/periodic cycle part, so
no evaluation loops over the horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np

from .trajectory import Trajectory, canonical_form, state_at

if TYPE_CHECKING:
    from .valuemap import ValueFunction


class PayoffError(ValueError):
    pass


def _check_cost(cost):
    if cost is None:
        return None
    cost = tuple(float(c) for c in cost)
    if any(not 0.0 <= c <= 1.0 for c in cost):
        raise PayoffError("running cost must take values in [0, 1]")
    return cost


def _check_horizon(name: str, value) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise PayoffError(f"{name} must be ≥ 1 (a positive integer), got {value!r}")


def _check_rate(lam) -> None:
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0):
        raise PayoffError(f"lambda must be > 0, got {lam!r}")


@dataclass(frozen=True)
class Cesaro:
    """Long-run average over the horizon ``[0, T)``.

    ``cost`` overrides the model's running cost (indexed by state).
    """

    T: int
    cost: tuple[float, ...] | None = None

    def __post_init__(self):
        _check_horizon("T", self.T)
        object.__setattr__(self, "cost", _check_cost(self.cost))


@dataclass(frozen=True)
class Abel:
    """Discounted average with rate ``lam``."""

    lam: float
    cost: tuple[float, ...] | None = None

    def __post_init__(self):
        _check_rate(self.lam)
        object.__setattr__(self, "cost", _check_cost(self.cost))


@dataclass(frozen=True, eq=False)
class Zeta:
    """Cesaro payoff split at ``h``: running cost on ``[0, h)`` plus ``V`` at ``z(h)``."""

    h: int
    T: int
    V: ValueFunction

    def __post_init__(self):
        _check_horizon("h", self.h)
        _check_horizon("T", self.T)


@dataclass(frozen=True, eq=False)
class Xi:
    """Abel payoff split at ``h``: discounted running cost on ``[0, h)`` plus ``e^{-lam h} V(z(h))``."""

    h: int
    lam: float
    V: ValueFunction

    def __post_init__(self):
        _check_horizon("h", self.h)
        _check_rate(self.lam)


@dataclass(frozen=True)
class Affine:
    A: float
    B: float
    inner: Payoff

    def __post_init__(self):
        if not (math.isfinite(self.A) and self.A >= 0):
            raise PayoffError(f"A must be ≥ 0, got {self.A!r}")
        if not math.isfinite(self.B):
            raise PayoffError(f"B must be finite, got {self.B!r}")


Payoff = Union[Cesaro, Abel, Zeta, Xi, Affine]


def cost_stream(z: Trajectory, g: Sequence[float]) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Canonical (preamble, cycle) of the cost stream ``t -> g(z(t))``.

    Equal cost streams map to identical tuples, so every closed form below
    returns bit-identical values for them.
    """
    return canonical_form([g[s] for s in z.preamble], [g[s] for s in z.cycle])


def _clamp(value: float, pre, cyc) -> float:
    # Both payoffs are convex combinations of the stream.
    lo = min(min(pre, default=1.0), min(cyc))
    hi = max(max(pre, default=0.0), max(cyc))
    return min(max(value, lo), hi)


def cesaro(z: Trajectory, T: int, g: Sequence[float]) -> float:
    _check_horizon("T", T)
    pre, cyc = cost_stream(z, g)
    p, q = len(pre), len(cyc)
    if T <= p:
        total = math.fsum(pre[:T])
    else:
        full, rem = divmod(T - p, q)
        total = math.fsum(pre) + full * math.fsum(cyc) + math.fsum(cyc[:rem])
    return _clamp(total / T, pre, cyc)


def _discounted_sum(costs: Sequence[float], lam: float) -> float:
    if not costs:
        return 0.0
    weights = np.exp(-lam * np.arange(len(costs)))
    return float(np.dot(weights, costs))


def abel(z: Trajectory, lam: float, g: Sequence[float]) -> float:
    _check_rate(lam)
    pre, cyc = cost_stream(z, g)
    p, q = len(pre), len(cyc)
    one_minus_x = -math.expm1(-lam)
    one_minus_xq = -math.expm1(-lam * q)
    value = one_minus_x * _discounted_sum(pre, lam)
    value += math.exp(-lam * p) * _discounted_sum(cyc, lam) * (one_minus_x / one_minus_xq)
    return _clamp(value, pre, cyc)


def zeta_eval(z: Trajectory, h: int, T: int, V: ValueFunction, g: Sequence[float]) -> float:
    head = math.fsum(g[state_at(z, t)] for t in range(h))
    return head / (T + h) + (T / (T + h)) * V[state_at(z, h)]


def xi_eval(z: Trajectory, h: int, lam: float, V: ValueFunction, g: Sequence[float]) -> float:
    head = _discounted_sum([g[state_at(z, t)] for t in range(h)], lam)
    return -math.expm1(-lam) * head + math.exp(-lam * h) * V[state_at(z, h)]


def base_cost(p: Cesaro | Abel, g: Sequence[float]) -> Sequence[float]:
    return g if p.cost is None else p.cost


def evaluate(p: Payoff, z: Trajectory, g: Sequence[float]) -> float:
    """The payoff ``p(z)`` for the running cost ``g``."""
    if isinstance(p, Cesaro):
        return cesaro(z, p.T, base_cost(p, g))
    if isinstance(p, Abel):
        return abel(z, p.lam, base_cost(p, g))
    if isinstance(p, Zeta):
        return zeta_eval(z, p.h, p.T, p.V, g)
    if isinstance(p, Xi):
        return xi_eval(z, p.h, p.lam, p.V, g)
    if isinstance(p, Affine):
        return affine_eval(p, z, g)
    raise PayoffError(f"not a payoff: {p!r}")


def affine_eval(p: Affine, z: Trajectory, g: Sequence[float]) -> float:
    return p.A * evaluate(p.inner, z, g) + p.B


def cycle_mean(z: Trajectory, g: Sequence[float]) -> float:
    """The common limit of Cesaro and Abel payoffs along ``z``."""
    return math.fsum(g[s] for s in z.cycle) / len(z.cycle)
