from fractions import Fraction
from math import floor, log, log2

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liarwalk import numerics
from liarwalk.errors import InvariantViolation
from liarwalk.numerics import (
    binom,
    binom_le,
    bounds_row,
    certified_floor,
    cutoff_tail,
    cutoff_tail_floor,
    delsarte_piret,
    hypergeom_mean,
    hypergeom_median,
    hypergeom_pmf,
    ln_bounds,
    m_threshold_game,
    m_threshold_machine,
    relative_cdf_exceeds,
    relative_cdf_exponent,
    relative_cdf_stat,
    sphere_bound,
    split_sum_ratio,
    stage_split,
)


def test_binomials():
    assert binom(4, 1) == 4 and binom_le(4, 1) == 5
    assert binom(7, -1) == 0 and binom(3, 4) == 0 and binom(-1, 0) == 0
    assert binom_le(10, 3) == 176
    assert binom_le(10, 99) == 1024


def test_sphere_bound():
    assert sphere_bound(4, Fraction(1, 4)) == Fraction(16, 5)
    assert sphere_bound(10, Fraction(3, 10)) == Fraction(64, 11)
    assert sphere_bound(1, Fraction(1, 3)) == 2
    for bad in (0, Fraction(1, 2), -1, 1):
        with pytest.raises(ValueError):
            sphere_bound(10, bad)


def test_stage_split_example():
    sp = stage_split(100, Fraction(1, 4))
    assert (sp.n1, sp.n2, sp.F, sp.F1, sp.F2) == (76, 24, 25, 19, 6)
    assert stage_split(100, "0.25") == sp
    with pytest.raises(ValueError):
        stage_split(2, Fraction(1, 4))
    with pytest.raises(ValueError):
        stage_split(5, Fraction(49, 100))


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 5000), st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(499, 1000)))
def test_stage_split_adds_up(n, f):
    try:
        sp = stage_split(n, f)
    except ValueError:
        return
    assert sp.n1 + sp.n2 == n and sp.F1 + sp.F2 == sp.F
    assert sp.n1 >= 1 and sp.n2 >= 0
    weight = 4 / (1 - 2 * float(f)) ** 2 * log(log(n))
    if abs(weight - round(weight)) > 1e-9:
        assert sp.n2 == floor(weight)


def test_certified_floor_refines(monkeypatch):
    # 10^30 + 0.5 needs more than double precision to floor correctly
    from mpmath import iv

    q = 10**30
    assert certified_floor(lambda: iv.mpf(q) + iv.mpf(1) / 2) == q
    lo, hi = ln_bounds(2)
    assert lo < hi and hi - lo < Fraction(1, 2**100)
    assert abs(float(lo) - log(2)) < 1e-15
    monkeypatch.setattr(numerics, "MAX_PRECISION_BITS", 1024)
    with pytest.raises(InvariantViolation):
        certified_floor(lambda: iv.log(iv.mpf(8)) / iv.log(iv.mpf(2)))


def test_precision_env(monkeypatch):
    monkeypatch.setenv("LIARWALK_PRECISION_BITS", "200")
    assert stage_split(100, Fraction(1, 4)).n2 == 24
    monkeypatch.setenv("LIARWALK_PRECISION_BITS", "garbage")
    assert stage_split(100, Fraction(1, 4)).n2 == 24


def test_m_threshold_machine():
    mpmath.mp.dps = 80
    f = Fraction(1, 4)
    s = sphere_bound(100, f)
    expect = int(mpmath.ceil(mpmath.mpf(s.numerator) / s.denominator * 2 * mpmath.sqrt(24)))
    assert m_threshold_machine(100, f, 1) == expect
    # linear in c_prime before the ceiling
    a = m_threshold_machine(100, f, Fraction(3, 7))
    b = m_threshold_machine(100, f, Fraction(6, 7))
    assert b - 1 <= 2 * a <= b + 1
    assert m_threshold_machine(100, f, 1) >= s
    with pytest.raises(ValueError):
        m_threshold_machine(100, f, 0)


def test_m_threshold_game():
    mpmath.mp.dps = 80
    f = Fraction(1, 4)
    s = sphere_bound(100, f)
    expect = mpmath.mpf(s.numerator) / s.denominator * 8 * mpmath.sqrt(mpmath.log(mpmath.log(100)))
    assert m_threshold_game(100, f, 1) == int(mpmath.ceil(expect))
    r1 = m_threshold_game(1000, f, 1) / sphere_bound(1000, f)
    r2 = m_threshold_game(100, f, 1) / sphere_bound(100, f)
    assert r1 > r2


def test_game_threshold_below_delsarte_piret():
    f = Fraction(1, 4)
    # n >= 17 is where the stage split first exists at f = 1/4
    for n in list(range(17, 200)) + [500, 1000, 2500, 5000, 10000]:
        assert m_threshold_game(n, f, 1) < delsarte_piret(n, f)


def test_hypergeom_examples():
    assert [hypergeom_pmf(4, 2, 2, k) for k in range(3)] == [Fraction(1, 6), Fraction(4, 6), Fraction(1, 6)]
    assert hypergeom_median(4, 2, 2) == 1 == hypergeom_mean(4, 2, 2)
    assert hypergeom_pmf(10, 4, 0, 0) == 1 and hypergeom_median(10, 4, 0) == 0
    with pytest.raises(ValueError):
        hypergeom_pmf(4, 5, 2, 0)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 40).flatmap(lambda N: st.tuples(st.just(N), st.integers(0, N), st.integers(0, N))))
def test_hypergeom_pmf_sums_to_one(params):
    N, K, n = params
    assert sum(hypergeom_pmf(N, K, n, k) for k in range(n + 1)) == 1


def test_split_sum_ratio_small():
    r = split_sum_ratio(100, Fraction(1, 4))
    assert 0 < r < 1
    sp = stage_split(100, Fraction(1, 4))
    for k in range(sp.F + 1):
        assert sum(binom(sp.n1, s) * binom(sp.n2, k - s) for s in range(k + 1)) == binom(100, k)


def test_cutoff_tail():
    f = Fraction(1, 4)
    assert cutoff_tail(100, f, 25) == 1
    assert cutoff_tail(100, f, 0) == Fraction(binom(100, 25), binom_le(100, 25))
    assert cutoff_tail(100, f, 10) >= 1 - Fraction(1, 3) ** 10 * Fraction(3, 2)
    assert cutoff_tail_floor(f, 10) == 1 - Fraction(1, 3) ** 10 * Fraction(3, 2)
    with pytest.raises(ValueError):
        cutoff_tail(100, f, 26)


def test_relative_cdf_stat():
    f = Fraction(1, 4)
    for k in range(8, 13):
        n = 2**k
        sp = stage_split(n, f)
        v = relative_cdf_stat(n, f)
        assert v == Fraction(2**n * binom(sp.n1, sp.F1), binom_le(n, sp.F) * 2**sp.n1)
        assert v > 0
        e = relative_cdf_exponent(n, f)
        assert relative_cdf_exceeds(n, f, Fraction(e) / 2 - Fraction(1, 100))
        assert not relative_cdf_exceeds(n, f, Fraction(e) / 2 + Fraction(1, 100))


def test_entropy_sanity():
    for f in (Fraction(1, 10), Fraction(1, 4), Fraction(2, 5)):
        h = -(float(f) * log2(float(f)) + (1 - float(f)) * log2(1 - float(f)))
        for n in (1024, 2048):
            rate = log2(binom_le(n, floor(f * n))) / n
            assert abs(rate - h) < 0.1 * h


def test_bounds_row():
    row = bounds_row(100, Fraction(1, 4), 1)
    assert (row["n1"], row["n2"], row["F"], row["F1"], row["F2"]) == (76, 24, 25, 19, 6)
    assert Fraction(row["sphere_num"], row["sphere_den"]) == sphere_bound(100, Fraction(1, 4))
