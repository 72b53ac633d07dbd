import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liarwalk.errors import ResourceLimitError
from liarwalk.liargame import (
    alternating_question,
    apply_question,
    even_pos,
    leq,
    machine_readout,
    machine_win_check,
    machine_win_check_state,
    majorize_chain,
    majorize_step,
    odd_pos,
    odd_strategy_run,
    position_of,
    solve_game,
    state_of,
    transcript_jsonl,
    verify_carole_dominance,
)
from liarwalk.numerics import binom


def test_position_vectors():
    assert position_of((2, 0, 1, 3, 0)) == (0, 0, 2, 3, 3, 3)
    assert position_of((5, 0, 0)) == (0,) * 5
    assert position_of((0, 0, 2)) == (2, 2)
    assert position_of((0,)) == ()
    assert state_of((0, 0, 2, 3, 3, 3), 2) == (2, 0, 1)
    assert state_of((), 3) == (0, 0, 0, 0)
    with pytest.raises(ValueError):
        state_of((-1, 0), 1)


@given(st.lists(st.integers(0, 6), min_size=1, max_size=5))
def test_state_position_inverse(x):
    assert state_of(position_of(x), len(x) - 1) == tuple(x)


def test_apply_question():
    x = (1, 11)
    assert apply_question(x, x, "yes") == x
    assert apply_question(x, (1, 4), "no") == (0, 8)
    assert apply_question(x, (1, 4), "yes") == (1, 4)
    with pytest.raises(ValueError):
        apply_question(x, (2, 0), "yes")


def test_odd_even_examples():
    assert odd_pos((0, 1, 2)) == (1, 1, 3)
    assert even_pos((0, 1, 2)) == (0, 2, 2)
    assert odd_pos(()) == () and even_pos(()) == ()


def test_leq_examples():
    chain = [(0, 2, 2), (1, 1, 2), (1, 2, 2), (2, 2, 2)]
    assert all(leq(u, v) for u, v in zip(chain, chain[1:]))
    assert leq((1, 2), (1, 2))
    assert not leq((0, 3), (1, 1)) and not leq((1, 1), (0, 3))
    with pytest.raises(ValueError):
        leq((1,), (1, 2))


def test_majorize_examples():
    assert majorize_step((0, 1, 2), (1, 1, 1)) == (1, 1, 1)
    assert majorize_step((0, 0), (1, 2)) == (0, 3)
    assert majorize_step((1, 1, 3), (1, 2, 2)) == (1, 2, 2)
    with pytest.raises(ValueError):
        majorize_step((1, 1), (1, 1))
    with pytest.raises(ValueError):
        majorize_step((0, 3), (1, 1))
    assert majorize_chain((1, 2), (1, 2)) == [(1, 2)]
    assert len(majorize_chain((0, 1, 2), (1, 1, 1))) == 2
    chain = majorize_chain((0, 0, 0), (2, 2, 2))
    for u, v in zip(chain, chain[1:]):
        assert u != v and leq(u, v) and leq(v, (2, 2, 2))


positions = st.lists(st.integers(0, 5), min_size=1, max_size=8).map(lambda v: tuple(sorted(v)))


def same_length(k):
    return st.integers(1, 7).flatmap(
        lambda m: st.tuples(*[st.lists(st.integers(0, 5), min_size=m, max_size=m).map(lambda v: tuple(sorted(v)))] * k)
    )


@settings(max_examples=200)
@given(positions)
def test_even_below_odd(u):
    assert leq(even_pos(u), odd_pos(u))
    assert sum(odd_pos(u)) - sum(u) == (len(u) + 1) // 2
    assert sum(even_pos(u)) - sum(u) == len(u) // 2


@settings(max_examples=200)
@given(same_length(3))
def test_order_transitive_antisymmetric(uvw):
    u, v, w = uvw
    if leq(u, v) and leq(v, w):
        assert leq(u, w)
    if leq(u, v) and leq(v, u):
        assert u == v


@settings(max_examples=150, deadline=None)
@given(same_length(2))
def test_monotone_along_chains(uv):
    u, v = uv
    if not leq(u, v):
        u, v = v, u
    if not leq(u, v):
        return
    chain = majorize_chain(u, v)
    for w in chain:
        assert leq(w, v)
        assert leq(even_pos(w), even_pos(v))
        assert leq(odd_pos(w), odd_pos(v))


@given(positions)
def test_sentinel_trick(u):
    assert (-2,) + odd_pos(u) == even_pos((-2,) + u)


def test_odd_strategy_examples():
    assert odd_strategy_run((1, 11), 4)[1:] == [(0, 7), (0, 3), (0, 1), (0, 0)]
    assert odd_strategy_run((3, 1), 0) == [(3, 1)]
    n, e = 6, 3
    for s, x in enumerate(odd_strategy_run((2**n,) + (0,) * e, n)):
        assert x == tuple(binom(s, i) * 2 ** (n - s) for i in range(e + 1))


def test_alternating_question_is_odd_answer():
    x = (3, 2, 4)
    u = position_of(x)
    a = alternating_question(x)
    assert apply_question(x, a, "yes") == state_of(odd_pos(u), 2)
    assert apply_question(x, a, "no") == state_of(even_pos(u), 2)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=1, max_size=5), st.integers(0, 12))
def test_reduction_identity(x0, n):
    assert odd_strategy_run(x0, n) == machine_readout(x0, n)


def test_solver_examples():
    sol = solve_game((1, 11), 4, 1)
    assert sol.paul_wins and sol.first_question == (1, 4)
    assert not solve_game((0,), 3, 0).paul_wins
    assert not solve_game((0, 0), 0, 1).paul_wins
    sol = solve_game((2,), 1, 0)
    assert sol.paul_wins and sol.first_question == (1,)
    assert json.loads(json.dumps(sol.record()))["first_question"] == [1]


def test_solver_cap():
    with pytest.raises(ResourceLimitError):
        solve_game((40, 40, 40), 12, 2, max_questions=1000)
    with pytest.raises(ResourceLimitError):
        solve_game((6, 6), 10, 1, max_nodes=5)


def test_carole_dominance_examples():
    assert verify_carole_dominance((1, 11), 4)
    assert verify_carole_dominance((3, 2, 1), 6)
    for x in itertools.product(range(4), repeat=2):
        assert verify_carole_dominance(x, 1)
    with pytest.raises(ResourceLimitError):
        verify_carole_dominance((1, 1), 30, max_leaves=1 << 10)


def test_machine_win_examples():
    assert not machine_win_check(0, 3, 1)
    assert not machine_win_check_state((1, 11), 4)
    assert solve_game((1, 11), 4, 1).paul_wins
    for n in range(1, 8):
        assert machine_win_check(2**n, n, n)


@pytest.mark.parametrize("e", [0, 1, 2])
def test_machine_implies_solver(e):
    for M in range(0, 9):
        for n in range(0, 6):
            if machine_win_check(M, n, e):
                assert solve_game((M,) + (0,) * e, n, e).paul_wins


def test_transcript_records():
    lines = transcript_jsonl((1, 11), 4).splitlines()
    recs = [json.loads(ln) for ln in lines]
    assert [r["round"] for r in recs] == [1, 2, 3, 4]
    assert recs[-1]["state"] == [0, 0]
    assert set(recs[0]) == {"round", "question", "answer", "state"}
