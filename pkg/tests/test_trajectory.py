import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tauberian_games.model import Strategy
from tauberian_games.trajectory import (
    ConcatenationError,
    Trajectory,
    concatenate,
    shift,
    state_at,
    unroll,
)
from tauberian_games.zoo import build_random_graph

A, B, C = "A", "B", "C"

trajectories = st.builds(
    Trajectory,
    st.lists(st.integers(0, 3), max_size=6),
    st.lists(st.integers(0, 3), min_size=1, max_size=5),
)


def brute_states(preamble, cycle, horizon):
    return [preamble[t] if t < len(preamble) else cycle[(t - len(preamble)) % len(cycle)] for t in range(horizon)]


def test_state_at_examples():
    assert state_at(Trajectory([A], [B]), 0) == A
    assert state_at(Trajectory([A], [B, C]), 4) == C
    assert all(state_at(Trajectory([], [A]), t) == A for t in range(20))


def test_canonical_form_minimal():
    z = Trajectory([A, B, A, B], [A, B, A, B])
    assert z.preamble == () and z.cycle == (A, B)
    assert Trajectory([C, B], [A, B]) == Trajectory([C], [B, A])


def test_empty_cycle_rejected():
    with pytest.raises(ValueError):
        Trajectory([A], [])


def test_shift_examples():
    assert shift(Trajectory.constant(A), 5) == Trajectory.constant(A)
    assert shift(Trajectory([A], [B, C]), 1) == Trajectory([], [B, C])
    z = Trajectory([A, B], [C])
    r = shift(z, 3)
    assert r == Trajectory.constant(C)
    assert [state_at(r, t) for t in range(11)] == [state_at(z, t + 3) for t in range(11)]


def test_concatenate_examples():
    assert concatenate(Trajectory.constant(A), 3, Trajectory.constant(A)) == Trajectory.constant(A)
    z1, z2 = Trajectory([A], [B]), Trajectory([B], [A])
    r = concatenate(z1, 2, z2)
    assert r == Trajectory([A, B, B], [A])
    expected = [state_at(z1, t) if t < 2 else state_at(z2, t - 2) for t in range(13)]
    assert r.states(13) == expected


def test_concatenate_rejects_mismatch():
    with pytest.raises(ConcatenationError) as info:
        concatenate(Trajectory.constant(A), 1, Trajectory.constant(B))
    assert info.value.left == A and info.value.right == B
    assert "'A'" in str(info.value) and "'B'" in str(info.value)


@given(trajectories, st.integers(0, 60))
def test_state_at_matches_definition(z, t):
    # canonicalization must not change the map
    raw_pre, raw_cyc = list(z.preamble), list(z.cycle)
    assert state_at(z, t) == brute_states(raw_pre, raw_cyc, t + 1)[t]


@given(st.lists(st.integers(0, 3), max_size=6), st.lists(st.integers(0, 3), min_size=1, max_size=5))
def test_canonicalization_preserves_states(pre, cyc):
    z = Trajectory(pre, cyc)
    assert z.states(40) == brute_states(pre, cyc, 40)
    assert len(z.cycle) <= len(cyc) and len(z.preamble) <= len(pre)


@given(trajectories, st.integers(0, 100), st.integers(0, 100))
def test_shift_composes(z, a, b):
    assert shift(shift(z, a), b) == shift(z, a + b)


@given(trajectories, st.integers(1, 100))
def test_concatenate_with_own_tail(z, tau):
    assert concatenate(z, tau, shift(z, tau)) == z


@given(trajectories, st.integers(0, 50))
def test_shift_pointwise(z, h):
    assert shift(z, h).states(30) == [state_at(z, t + h) for t in range(30)]


def test_unroll_examples():
    from tauberian_games.model import TransitionSystem

    two = TransitionSystem.from_edges({A: 0, B: 1}, [(A, B), (B, A)])
    assert unroll(two, Strategy.stationary([1, 0]), 0) == Trajectory([], [0, 1])
    absorbing = TransitionSystem.from_edges({A: 0, B: 1}, [(A, B), (B, B)])
    assert unroll(absorbing, Strategy.stationary([1, 1]), 0) == Trajectory([0], [1])


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_unroll_functional_graph_pigeonhole(seed):
    m = build_random_graph(seed, 20, 1)
    s = Strategy.stationary([succ[0] for succ in m.successors])
    for w in range(m.n):
        z = unroll(m, s, w)
        assert len(z.preamble) + len(z.cycle) <= 20
        # brute-force walk agrees for 60 steps
        walk, cur = [], w
        for _ in range(60):
            walk.append(cur)
            cur = s.choice[cur]
        assert z.states(60) == walk
