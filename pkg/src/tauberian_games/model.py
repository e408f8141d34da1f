"""Data space, running cost, and the two instantiations of the trajectory set.

``TransitionSystem`` is a finite directed graph with a cost on every state;
its trajectory set is the set of all infinite walks, which is closed under
concatenation.  ``TrajectoryBundle`` lists its trajectories explicitly and
need not be closed under anything.

States are indexed ``0..n-1`` internally; string ids are used only at the
file boundary and in reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .trajectory import Trajectory, shift, state_at, unroll

MAX, MIN = "MAX", "MIN"

TAIL_FAMILIES = ("oscillating",)


class ModelError(ValueError):
    """A model, bundle or strategy file or literal is malformed."""


@dataclass(frozen=True)
class TransitionSystem:
    ids: tuple[str, ...]
    cost: tuple[float, ...]
    successors: tuple[tuple[int, ...], ...]
    owner: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "cost", tuple(float(c) for c in self.cost))
        object.__setattr__(
            self, "successors", tuple(tuple(int(j) for j in s) for s in self.successors)
        )
        owner = tuple(self.owner) if self.owner else (MAX,) * len(self.ids)
        object.__setattr__(self, "owner", owner)

    @classmethod
    def from_edges(
        cls,
        costs: Mapping[str, float],
        edges: Sequence[tuple[str, str]],
        owner: Mapping[str, str] | None = None,
    ) -> TransitionSystem:
        ids = list(costs)
        index = {s: i for i, s in enumerate(ids)}
        succ: list[list[int]] = [[] for _ in ids]
        for a, b in edges:
            if index[b] not in succ[index[a]]:
                succ[index[a]].append(index[b])
        own = [(owner or {}).get(s, MAX) for s in ids]
        return cls(tuple(ids), tuple(costs[s] for s in ids), tuple(map(tuple, succ)), tuple(own))

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def one_player(self) -> bool:
        return all(o == MAX for o in self.owner)

    def index(self, state_id: str) -> int:
        try:
            return self.ids.index(state_id)
        except ValueError:
            raise ModelError(f"unknown state id {state_id!r}") from None

    def cost_array(self) -> np.ndarray:
        return np.asarray(self.cost, dtype=float)

    def successor_matrix(self) -> np.ndarray:
        """Successor lists padded (by repeating the first entry) to a rectangle."""
        width = max(len(s) for s in self.successors)
        return np.array([list(s) + [s[0]] * (width - len(s)) for s in self.successors], dtype=np.intp)

    def min_mask(self) -> np.ndarray:
        return np.array([o == MIN for o in self.owner], dtype=bool)


@dataclass(frozen=True)
class TrajectoryBundle:
    """An explicit finite trajectory set over states with costs.

    ``tail`` optionally names an analytic family continuing the listed
    trajectories (indices ``len(trajectories)+1, ...``) whose supremum is
    known in closed form for Cesaro and Abel payoffs.
    """

    ids: tuple[str, ...]
    cost: tuple[float, ...]
    start_states: tuple[int, ...]
    trajectories: tuple[Trajectory, ...]
    closed: bool = False
    tail: str | None = None

    @property
    def n(self) -> int:
        return len(self.ids)

    def index(self, state_id: str) -> int:
        try:
            return self.ids.index(state_id)
        except ValueError:
            raise ModelError(f"unknown state id {state_id!r}") from None

    def cost_array(self) -> np.ndarray:
        return np.asarray(self.cost, dtype=float)

    def trajectories_from(self, state: int) -> list[Trajectory]:
        return [z for z in self.trajectories if state_at(z, 0) == state]


@dataclass(frozen=True)
class Strategy:
    """A selector ``state -> trajectory starting at that state``.

    STATIONARY strategies store one successor per state; GENERAL strategies
    store the selected trajectory for each state they are defined on.
    """

    kind: str
    choice: tuple[int, ...] = ()
    selector: Mapping[int, Trajectory] = field(default_factory=dict)

    @classmethod
    def stationary(cls, choice: Sequence[int]) -> Strategy:
        return cls("STATIONARY", choice=tuple(int(c) for c in choice))

    @classmethod
    def general(cls, selector: Mapping[int, Trajectory]) -> Strategy:
        return cls("GENERAL", selector=dict(selector))


@dataclass
class ValidationReport:
    issues: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self) -> bool:
        return self.ok

    def raise_for_issues(self) -> None:
        if self.issues:
            raise ModelError("; ".join(self.issues))


def validate_model(m: TransitionSystem | TrajectoryBundle) -> ValidationReport:
    report = ValidationReport()
    issues = report.issues
    n = m.n
    if n == 0:
        issues.append("state set is empty")
    if len(m.cost) != n:
        issues.append(f"expected {n} costs, got {len(m.cost)}")
    if len(set(m.ids)) != n:
        issues.append("duplicate state ids")
    for sid, c in zip(m.ids, m.cost):
        if not (0.0 <= c <= 1.0):
            issues.append(f"cost out of range [0,1] at {sid!r}: {c}")

    if isinstance(m, TransitionSystem):
        if len(m.successors) != n:
            issues.append(f"expected {n} successor lists, got {len(m.successors)}")
        for sid, succ in zip(m.ids, m.successors):
            if not succ:
                issues.append(f"Γ(ω) empty: state {sid!r} has no successor")
            for j in succ:
                if not 0 <= j < n:
                    issues.append(f"dangling successor id {j} from {sid!r}")
        for sid, o in zip(m.ids, m.owner):
            if o not in (MAX, MIN):
                issues.append(f"unknown owner {o!r} at {sid!r}")
        if len(m.owner) != n:
            issues.append(f"expected {n} owners, got {len(m.owner)}")
        return report

    for z in m.trajectories:
        for s in z.visited():
            if not 0 <= s < n:
                issues.append(f"dangling state id {s} in trajectory")
    starts = {state_at(z, 0) for z in m.trajectories}
    for s in m.start_states:
        if not 0 <= s < n:
            issues.append(f"dangling start state id {s}")
        elif s not in starts:
            issues.append(f"Γ(ω) empty: start state {m.ids[s]!r} begins no trajectory")
    if m.tail is not None and m.tail not in TAIL_FAMILIES:
        issues.append(f"unknown tail family {m.tail!r}")
    return report


def _is_walk(m: TransitionSystem, z: Trajectory) -> bool:
    horizon = len(z.preamble) + len(z.cycle) + 1
    states = z.states(horizon)
    return all(0 <= a < m.n and b in m.successors[a] for a, b in zip(states, states[1:]))


def validate_strategy(s: Strategy, m: TransitionSystem | TrajectoryBundle) -> None:
    """Raise ``ModelError`` if ``s`` is not a selector of ``m``'s trajectory set."""
    if s.kind == "STATIONARY":
        if not isinstance(m, TransitionSystem):
            raise ModelError("stationary strategies need a transition system")
        if len(s.choice) != m.n:
            raise ModelError(f"strategy covers {len(s.choice)} states, model has {m.n}")
        for i, c in enumerate(s.choice):
            if c not in m.successors[i]:
                raise ModelError(f"choice {c} at state {m.ids[i]!r} is not a declared successor")
        return
    if s.kind != "GENERAL":
        raise ModelError(f"unknown strategy kind {s.kind!r}")
    domain = range(m.n) if isinstance(m, TransitionSystem) else m.start_states
    for w in domain:
        if w not in s.selector:
            raise ModelError(f"selector undefined at state {m.ids[w]!r}")
    for w, z in s.selector.items():
        if state_at(z, 0) != w:
            raise ModelError(f"selector at {m.ids[w]!r} starts at {state_at(z, 0)!r}")
        if isinstance(m, TransitionSystem) and not _is_walk(m, z):
            raise ModelError(f"selector at {m.ids[w]!r} is not a walk of the model")
        if isinstance(m, TrajectoryBundle) and z not in m.trajectories:
            raise ModelError(f"selector at {m.ids[w]!r} is not a bundle trajectory")


def is_stationary_like(s: Strategy, m: TransitionSystem) -> bool:
    """Whether ``s[w](t + 1) == s[s[w](1)](t)`` for every state and time.

    Trajectories are canonical, so comparing ``shift(s[w], 1)`` with
    ``s[s[w](1)]`` structurally decides the identity for all ``t`` at once.
    """
    validate_strategy(s, m)
    for w in range(m.n):
        z = unroll(m, s, w)
        if shift(z, 1) != unroll(m, s, state_at(z, 1)):
            return False
    return True


# --- file formats -----------------------------------------------------------

_SYSTEM_KEYS = {"states", "edges"}
_STATE_KEYS = {"id", "cost", "owner"}
_BUNDLE_KEYS = {"states", "start_states", "trajectories", "closed", "tail"}
_TRAJ_KEYS = {"preamble", "cycle"}


def _reject_unknown(obj: Mapping, allowed: set, where: str) -> None:
    if not isinstance(obj, Mapping):
        raise ModelError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ModelError(f"{where}: unknown field(s) {', '.join(extra)}")


def _parse_states(raw: Any, allow_owner: bool) -> tuple[list[str], list[float], list[str]]:
    if not isinstance(raw, list) or not raw:
        raise ModelError("states: expected a non-empty list")
    ids, costs, owners = [], [], []
    for k, st in enumerate(raw):
        where = f"states[{k}]"
        _reject_unknown(st, _STATE_KEYS if allow_owner else {"id", "cost"}, where)
        if "id" not in st or not isinstance(st["id"], str):
            raise ModelError(f"{where}.id: expected a string")
        c = st.get("cost")
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise ModelError(f"{where}.cost: expected a number")
        owner = st.get("owner", MAX)
        if owner not in (MAX, MIN):
            raise ModelError(f"{where}.owner: expected MAX or MIN")
        ids.append(st["id"])
        costs.append(float(c))
        owners.append(owner)
    if len(set(ids)) != len(ids):
        raise ModelError("states: duplicate id")
    return ids, costs, owners


def _lookup(index: Mapping[str, int], sid: Any, where: str) -> int:
    if not isinstance(sid, str) or sid not in index:
        raise ModelError(f"{where}: unknown state id {sid!r}")
    return index[sid]


def system_from_dict(doc: Mapping) -> TransitionSystem:
    _reject_unknown(doc, _SYSTEM_KEYS, "system")
    ids, costs, owners = _parse_states(doc.get("states"), allow_owner=True)
    index = {s: i for i, s in enumerate(ids)}
    edges = doc.get("edges")
    if not isinstance(edges, list):
        raise ModelError("edges: expected a list of [from, to] pairs")
    succ: list[list[int]] = [[] for _ in ids]
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise ModelError(f"edges[{k}]: expected [from, to]")
        a = _lookup(index, e[0], f"edges[{k}][0]")
        b = _lookup(index, e[1], f"edges[{k}][1]")
        if b not in succ[a]:
            succ[a].append(b)
    m = TransitionSystem(tuple(ids), tuple(costs), tuple(map(tuple, succ)), tuple(owners))
    validate_model(m).raise_for_issues()
    return m


def bundle_from_dict(doc: Mapping) -> TrajectoryBundle:
    _reject_unknown(doc, _BUNDLE_KEYS, "bundle")
    ids, costs, _ = _parse_states(doc.get("states"), allow_owner=False)
    index = {s: i for i, s in enumerate(ids)}
    starts = doc.get("start_states")
    if not isinstance(starts, list) or not starts:
        raise ModelError("start_states: expected a non-empty list")
    start_idx = tuple(_lookup(index, s, "start_states") for s in starts)
    raw = doc.get("trajectories")
    if not isinstance(raw, list) or not raw:
        raise ModelError("trajectories: expected a non-empty list")
    trajs = []
    for k, t in enumerate(raw):
        where = f"trajectories[{k}]"
        _reject_unknown(t, _TRAJ_KEYS, where)
        pre, cyc = t.get("preamble", []), t.get("cycle")
        if not isinstance(pre, list):
            raise ModelError(f"{where}.preamble: expected a list")
        if not isinstance(cyc, list) or not cyc:
            raise ModelError(f"{where}.cycle: expected a non-empty list")
        trajs.append(
            Trajectory(
                [_lookup(index, s, f"{where}.preamble") for s in pre],
                [_lookup(index, s, f"{where}.cycle") for s in cyc],
            )
        )
    closed = doc.get("closed", False)
    if not isinstance(closed, bool):
        raise ModelError("closed: expected a boolean")
    tail = doc.get("tail")
    if tail is not None and tail not in TAIL_FAMILIES:
        raise ModelError(f"tail: expected one of {TAIL_FAMILIES} or null")
    b = TrajectoryBundle(tuple(ids), tuple(costs), start_idx, tuple(trajs), closed, tail)
    validate_model(b).raise_for_issues()
    return b


def system_to_dict(m: TransitionSystem) -> dict:
    states = []
    for sid, c, o in zip(m.ids, m.cost, m.owner):
        entry: dict[str, Any] = {"id": sid, "cost": c}
        if o != MAX:
            entry["owner"] = o
        states.append(entry)
    edges = [[m.ids[a], m.ids[b]] for a in range(m.n) for b in m.successors[a]]
    return {"states": states, "edges": edges}


def bundle_to_dict(b: TrajectoryBundle) -> dict:
    doc: dict[str, Any] = {
        "states": [{"id": sid, "cost": c} for sid, c in zip(b.ids, b.cost)],
        "start_states": [b.ids[s] for s in b.start_states],
        "trajectories": [
            {"preamble": [b.ids[s] for s in z.preamble], "cycle": [b.ids[s] for s in z.cycle]}
            for z in b.trajectories
        ],
    }
    if b.closed:
        doc["closed"] = True
    if b.tail is not None:
        doc["tail"] = b.tail
    return doc


def model_from_dict(doc: Mapping) -> TransitionSystem | TrajectoryBundle:
    if isinstance(doc, Mapping) and "trajectories" in doc:
        return bundle_from_dict(doc)
    return system_from_dict(doc)


def model_to_dict(m: TransitionSystem | TrajectoryBundle) -> dict:
    return system_to_dict(m) if isinstance(m, TransitionSystem) else bundle_to_dict(m)


def load_model(path: str | Path) -> TransitionSystem | TrajectoryBundle:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: invalid JSON ({exc})") from exc
    return model_from_dict(doc)


def save_model(m: TransitionSystem | TrajectoryBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2) + "\n")
