"""The pathological liar game with at most e lies.

A state vector ``x`` counts the elements carrying ``i`` lies.  Paul's question
``a`` (with ``0 <= a <= x``) is the set of elements for which "yes" is truthful;
an answer adds one lie to every element it contradicts, and elements pushed
past ``e`` lies fall off the end.  Paul wins when at least one element is
still alive after ``n`` rounds.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from operator import mul
from typing import Iterator, Sequence

from .chipfield import ChipConfiguration, liar_run
from .errors import InvariantViolation, ResourceLimitError

YES, NO = "yes", "no"


def _state(x: Sequence[int]) -> tuple:
    out = tuple(int(v) for v in x)
    if not out:
        raise ValueError("state vector needs at least one entry (e >= 0)")
    if any(v < 0 for v in out):
        raise ValueError(f"state vector entries must be nonnegative: {out}")
    return out


def _shift(v: Sequence[int]) -> tuple:
    """R: move every count up one lie level, dropping the last level."""
    return (0,) + tuple(v[:-1])


def _answer(answer) -> str:
    if answer in (True, YES, "y", "Y", "YES", "Yes", 1):
        return YES
    if answer in (False, NO, "n", "N", "NO", "No", 0):
        return NO
    raise ValueError(f"answer must be yes or no, got {answer!r}")


def apply_question(x: Sequence[int], a: Sequence[int], answer) -> tuple:
    x = _state(x)
    a = tuple(int(v) for v in a)
    if len(a) != len(x):
        raise ValueError("question and state have different lengths")
    if any(ai < 0 or ai > xi for ai, xi in zip(a, x)):
        raise ValueError(f"question {a} is not bounded by state {x}")
    rest = tuple(xi - ai for xi, ai in zip(x, a))
    if _answer(answer) == YES:
        return tuple(p + q for p, q in zip(a, _shift(rest)))
    return tuple(p + q for p, q in zip(rest, _shift(a)))


# ----------------------------------------------------------- position vectors


def position_of(x: Sequence[int]) -> tuple:
    x = _state(x)
    return tuple(i for i, c in enumerate(x) for _ in range(c))


def state_of(u: Sequence[int], e: int) -> tuple:
    if e < 0:
        raise ValueError("e must be nonnegative")
    x = [0] * (e + 1)
    prev = None
    for v in u:
        if v < 0:
            raise ValueError("negative entries are not lie counts")
        if prev is not None and v < prev:
            raise ValueError("position vector must be nondecreasing")
        prev = v
        if v <= e:
            x[v] += 1
    return tuple(x)


def odd_pos(u: Sequence[int]) -> tuple:
    """Add one lie to the 1st, 3rd, 5th, ... entries and re-sort."""
    return tuple(sorted(v + 1 if i % 2 == 0 else v for i, v in enumerate(u)))


def even_pos(u: Sequence[int]) -> tuple:
    """Add one lie to the 2nd, 4th, ... entries and re-sort."""
    return tuple(sorted(v + 1 if i % 2 == 1 else v for i, v in enumerate(u)))


def leq(u: Sequence[int], v: Sequence[int]) -> bool:
    """Prefix-sum domination: every prefix sum of u is at most that of v."""
    if len(u) != len(v):
        raise ValueError(f"position vectors differ in length ({len(u)} vs {len(v)})")
    su = sv = 0
    for a, b in zip(u, v):
        su += a
        sv += b
        if su > sv:
            return False
    return True


def majorize_step(u: Sequence[int], v: Sequence[int]) -> tuple:
    """One move u -> u' with u < u' <= v."""
    u, v = list(u), tuple(v)
    if not leq(u, v):
        raise ValueError("majorize_step needs u <= v")
    if tuple(u) == v:
        raise ValueError("majorize_step needs u != v")
    deficit = sum(v) - sum(u)
    if deficit > 0:
        u[-1] += deficit
    else:
        j = max(i for i in range(len(u)) if u[i] < v[i])
        try:
            k = next(i for i in range(j + 1, len(u)) if u[i] > v[i])
        except StopIteration:
            raise InvariantViolation(f"no decrement position after {j} for {u} <= {v}") from None
        u[j] += 1
        u[k] -= 1
    out = tuple(u)
    if any(a > b for a, b in zip(out, out[1:])) or not leq(out, v):
        raise InvariantViolation(f"majorize_step produced {out} from towards {v}")
    return out


def majorize_chain(u: Sequence[int], v: Sequence[int]) -> list[tuple]:
    u, v = tuple(u), tuple(v)
    if not leq(u, v):
        raise ValueError("majorize_chain needs u <= v")
    chain = [u]
    while chain[-1] != v:
        chain.append(majorize_step(chain[-1], v))
    return chain


# --------------------------------------------------------- alternating play


def alternating_question(x: Sequence[int]) -> tuple:
    """Paul's alternating question: the 2nd, 4th, ... elements of the position vector.

    Answering "yes" then charges a lie to the 1st, 3rd, ... elements, which
    is Carole's odd response.
    """
    x = _state(x)
    a = []
    before = 0
    for c in x:
        # positions before+1 .. before+c; count the even ones
        a.append((before + c) // 2 - before // 2)
        before += c
    return tuple(a)


def odd_response(x: Sequence[int]) -> tuple:
    """State after the alternating question answered so that odd positions lie."""
    return apply_question(x, alternating_question(x), YES)


def even_response(x: Sequence[int]) -> tuple:
    return apply_question(x, alternating_question(x), NO)


def odd_strategy_run(x0: Sequence[int], n: int) -> list[tuple]:
    """States x_0, ..., x_n under the alternating question and odd answers."""
    if n < 0:
        raise ValueError("round count must be nonnegative")
    states = [_state(x0)]
    for _ in range(n):
        states.append(odd_response(states[-1]))
    return states


def transcript(x0: Sequence[int], n: int) -> Iterator[dict]:
    """JSON-ready records of the alternating/odd play."""
    x = _state(x0)
    for r in range(1, n + 1):
        a = alternating_question(x)
        x = apply_question(x, a, YES)
        yield {"round": r, "question": list(a), "answer": YES, "state": list(x)}


def transcript_jsonl(x0: Sequence[int], n: int) -> str:
    return "".join(json.dumps(rec) + "\n" for rec in transcript(x0, n))


def verify_carole_dominance(x0: Sequence[int], n: int, max_leaves: int = 1 << 20) -> bool:
    """Every answer sequence to the alternating question ends <= odd^n(u0)."""
    if n < 0:
        raise ValueError("round count must be nonnegative")
    if 2**n > max_leaves:
        raise ResourceLimitError(f"2^{n} leaves exceed the cap {max_leaves}")
    u0 = position_of(x0)
    best = u0
    for _ in range(n):
        best = odd_pos(best)
    frontier = {u0}
    for _ in range(n):
        frontier = {w for u in frontier for w in (odd_pos(u), even_pos(u))}
    return all(leq(w, best) for w in frontier)


# --------------------------------------------------------- machine reduction


def machine_readout(x0: Sequence[int], n: int) -> list[tuple]:
    """x_s(i) = f_s(-s + 2i) for the liar machine started from f_0(2i) = x_0(i)."""
    x0 = _state(x0)
    f = ChipConfiguration.from_dict({2 * i: c for i, c in enumerate(x0)}, parity=0)
    out = []
    for s in range(n + 1):
        if s:
            f = liar_run(f, 1)
        out.append(tuple(f[-s + 2 * i] for i in range(len(x0))))
    return out


def machine_win_check_state(x0: Sequence[int], n: int) -> bool:
    x0 = _state(x0)
    f = liar_run(ChipConfiguration.from_dict({2 * i: c for i, c in enumerate(x0)}, parity=0), n)
    return sum(f[-n + 2 * i] for i in range(len(x0))) >= 1


def machine_win_check(M: int, n: int, e: int) -> bool:
    """M chips at the origin; after n steps, at least one chip in the game window."""
    if M < 0 or n < 0 or e < 0:
        raise ValueError("M, n and e must be nonnegative")
    return machine_win_check_state((M,) + (0,) * e, n)


# --------------------------------------------------------------- brute force


@dataclass(frozen=True)
class GameSolution:
    paul_wins: bool
    first_question: tuple | None
    nodes_expanded: int

    def record(self) -> dict:
        return {
            "paul_wins": self.paul_wins,
            "first_question": None if self.first_question is None else list(self.first_question),
            "nodes_expanded": self.nodes_expanded,
        }


def _canonical_questions(x: tuple) -> Iterator[tuple]:
    """Questions a with a >= x - a lexicographically, in increasing order.

    A question and its complement are the same question with the answers
    swapped, so only one of each pair is searched.
    """
    for a in itertools.product(*(range(c + 1) for c in x)):
        comp = tuple(c - ai for c, ai in zip(x, a))
        if a >= comp:
            yield a


def solve_game(
    x0: Sequence[int],
    n: int,
    e: int | None = None,
    max_questions: int = 1 << 16,
    max_nodes: int = 1 << 22,
) -> GameSolution:
    """Exact minimax value of the pathological game.

    Returns the lexicographically smallest canonical winning first question.
    """
    x0 = _state(x0)
    if e is not None:
        if e < 0:
            raise ValueError("e must be nonnegative")
        if len(x0) > e + 1:
            if any(x0[e + 1:]):
                raise ValueError(f"state {x0} has elements beyond {e} lies")
            x0 = x0[: e + 1]
        x0 = x0 + (0,) * (e + 1 - len(x0))
    if n < 0:
        raise ValueError("round count must be nonnegative")
    memo: dict[tuple, bool] = {}
    nodes = 0

    def wins(x: tuple, r: int) -> bool:
        nonlocal nodes
        if not any(x):
            return False
        if r == 0:
            return True
        key = (x, r)
        hit = memo.get(key)
        if hit is not None:
            return hit
        nodes += 1
        if nodes > max_nodes:
            raise ResourceLimitError(f"solver expanded more than {max_nodes} nodes")
        if reduce(mul, (c + 1 for c in x), 1) > max_questions:
            raise ResourceLimitError(f"state {x} has more than {max_questions} questions")
        result = any(
            wins(apply_question(x, a, YES), r - 1) and wins(apply_question(x, a, NO), r - 1)
            for a in _canonical_questions(x)
        )
        memo[key] = result
        return result

    if not any(x0):
        return GameSolution(False, None, 0)
    if n == 0:
        return GameSolution(True, None, 0)
    first = None
    for a in _canonical_questions(x0):
        if wins(apply_question(x0, a, YES), n - 1) and wins(apply_question(x0, a, NO), n - 1):
            first = a
            break
    return GameSolution(first is not None, first, nodes + 1)
