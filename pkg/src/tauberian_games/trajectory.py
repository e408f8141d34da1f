"""Eventually periodic trajectories on the unit time grid.

A trajectory ``z`` is a map from ``[0, inf)`` to states that is constant on
each ``[t, t+1)``.  It is stored as a finite preamble followed by a cycle that
repeats forever, and always kept in canonical form (shortest preamble,
minimal period) so that ``==`` is equality of the underlying maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Hashable, Sequence

if TYPE_CHECKING:
    from .model import Strategy, TransitionSystem


class ConcatenationError(ValueError):
    """Raised when ``z1(tau) != z2(0)``."""

    def __init__(self, left: Hashable, right: Hashable, tau: int):
        self.left = left
        self.right = right
        self.tau = tau
        super().__init__(
            f"cannot concatenate at tau={tau}: z1(tau)={left!r} != z2(0)={right!r}"
        )


def _minimal_period(cycle: tuple) -> tuple:
    q = len(cycle)
    for d in range(1, q + 1):
        if q % d == 0 and cycle == cycle[:d] * (q // d):
            return cycle[:d]
    return cycle


def canonical_form(preamble: Sequence, cycle: Sequence) -> tuple[tuple, tuple]:
    """Return the canonical ``(preamble, cycle)`` describing the same map."""
    if len(cycle) == 0:
        raise ValueError("cycle must be non-empty")
    pre = list(preamble)
    cyc = _minimal_period(tuple(cycle))
    # Absorb trailing preamble entries into the cycle by rotating it.
    while pre and pre[-1] == cyc[-1]:
        pre.pop()
        cyc = cyc[-1:] + cyc[:-1]
    return tuple(pre), cyc


@dataclass(frozen=True, init=False)
class Trajectory:
    preamble: tuple
    cycle: tuple

    def __init__(self, preamble: Sequence = (), cycle: Sequence = ()):
        pre, cyc = canonical_form(preamble, cycle)
        object.__setattr__(self, "preamble", pre)
        object.__setattr__(self, "cycle", cyc)

    @classmethod
    def constant(cls, state: Hashable) -> Trajectory:
        return cls((), (state,))

    def __call__(self, t: int) -> Hashable:
        return state_at(self, t)

    def states(self, horizon: int) -> list:
        """The states at times ``0, ..., horizon - 1``."""
        return [state_at(self, t) for t in range(horizon)]

    @property
    def transient_length(self) -> int:
        return len(self.preamble)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def visited(self) -> set:
        return set(self.preamble) | set(self.cycle)

    def map_states(self, fn) -> Trajectory:
        return Trajectory([fn(s) for s in self.preamble], [fn(s) for s in self.cycle])


def state_at(z: Trajectory, t: int) -> Hashable:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    p = len(z.preamble)
    if t < p:
        return z.preamble[t]
    return z.cycle[(t - p) % len(z.cycle)]


def shift(z: Trajectory, h: int) -> Trajectory:
    """The trajectory ``t -> z(t + h)``."""
    if h < 0:
        raise ValueError(f"shift must be non-negative, got {h}")
    p = len(z.preamble)
    if h <= p:
        return Trajectory(z.preamble[h:], z.cycle)
    r = (h - p) % len(z.cycle)
    return Trajectory((), z.cycle[r:] + z.cycle[:r])


def concatenate(z1: Trajectory, tau: int, z2: Trajectory) -> Trajectory:
    """Follow ``z1`` on ``[0, tau)`` and ``z2`` shifted by ``tau`` afterwards.

    Only defined when ``z1(tau) == z2(0)``.
    """
    if tau < 1:
        raise ValueError(f"tau must be a positive integer, got {tau}")
    left, right = state_at(z1, tau), state_at(z2, 0)
    if left != right:
        raise ConcatenationError(left, right, tau)
    head = [state_at(z1, t) for t in range(tau)]
    return Trajectory(head + list(z2.preamble), z2.cycle)


def unroll(m: TransitionSystem, s: Strategy, start: int) -> Trajectory:
    """The trajectory ``s[start]`` generated by a strategy on a transition system.

    Stationary strategies are walked until a state repeats; the first
    repeated state marks the start of the cycle.
    """
    if s.kind == "GENERAL":
        return s.selector[start]
    seen: dict[int, int] = {}
    walk: list[int] = []
    state = start
    while state not in seen:
        seen[state] = len(walk)
        walk.append(state)
        state = s.choice[state]
    k = seen[state]
    return Trajectory(walk[:k], walk[k:])
