"""Exact binomial quantities, stage splits and M-threshold formulas.

Every transcendental value that feeds a decision (a floor, a ceiling or a
comparison) is enclosed with outward-rounded interval arithmetic and the
precision is raised until the decision is unambiguous.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb, floor, isqrt, log
from typing import Callable

from mpmath import iv, libmp

from .errors import InvariantViolation

ExactRational = Fraction

MAX_PRECISION_BITS = 1 << 20


def _start_precision() -> int:
    raw = os.environ.get("LIARWALK_PRECISION_BITS", "")
    try:
        bits = int(raw)
    except ValueError:
        return 64
    return bits if bits >= 16 else 64


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (by its repr)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {x!r} to an exact rational")


# ------------------------------------------------------------ certified reals


def _iv_rational(q: Fraction):
    return iv.mpf(q.numerator) / iv.mpf(q.denominator)


def enclose(expr: Callable, prec: int) -> tuple[Fraction, Fraction]:
    """Rational endpoints of ``expr()`` evaluated in interval arithmetic."""
    old = iv.prec
    iv.prec = prec
    try:
        value = expr()
        if not isinstance(value, type(iv.mpf(0))):
            value = iv.mpf(value)
        lo, hi = value._mpi_
    finally:
        iv.prec = old
    if lo in (libmp.finf, libmp.fninf, libmp.fnan) or hi in (libmp.finf, libmp.fninf, libmp.fnan):
        raise InvariantViolation("interval evaluation overflowed")
    (lp, lq), (hp, hq) = libmp.to_rational(lo), libmp.to_rational(hi)
    return Fraction(int(lp), int(lq)), Fraction(int(hp), int(hq))


def _refine(expr: Callable, decide: Callable, min_prec: int = 0):
    """Raise precision until ``decide(lo, hi)`` returns something other than None."""
    prec = max(_start_precision(), min_prec)
    while prec <= MAX_PRECISION_BITS:
        lo, hi = enclose(expr, prec)
        answer = decide(lo, hi)
        if answer is not None:
            return answer
        prec *= 2
    raise InvariantViolation("could not certify a decision; value may be exactly on a boundary")


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def certified_floor(expr: Callable, min_prec: int = 0) -> int:
    return _refine(expr, lambda lo, hi: floor(lo) if floor(lo) == floor(hi) else None, min_prec)


def certified_ceil(expr: Callable, min_prec: int = 0) -> int:
    return _refine(expr, lambda lo, hi: _ceil(lo) if _ceil(lo) == _ceil(hi) else None, min_prec)


def certified_less(q: Fraction, expr: Callable, min_prec: int = 0) -> bool:
    """Whether the rational ``q`` is strictly below the real ``expr()``."""

    def decide(lo, hi):
        if q < lo:
            return True
        if q >= hi:
            return False
        return None

    return _refine(expr, decide, min_prec)


def _bits_needed(q: Fraction) -> int:
    return max(abs(q.numerator).bit_length() - q.denominator.bit_length(), 0) + 64


def ln_bounds(q, prec: int = 128) -> tuple[Fraction, Fraction]:
    q = as_fraction(q)
    if q <= 0:
        raise ValueError("logarithm of a nonpositive number")
    return enclose(lambda: iv.log(_iv_rational(q)), prec)


# ------------------------------------------------------------------ binomials


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero unless 0 <= k <= n are integers."""
    if n < 0 or k < 0 or k > n:
        return 0
    return comb(n, k)


def binom_le(n: int, F: int) -> int:
    """Sum of binom(n, k) for 0 <= k <= F."""
    if n < 0 or F < 0:
        return 0
    F = min(F, n)
    total = 0
    term = 1
    for k in range(F + 1):
        total += term
        term = term * (n - k) // (k + 1)
    return total


def _check_fraction(f) -> Fraction:
    f = as_fraction(f)
    if not 0 < f < Fraction(1, 2):
        raise ValueError(f"lie fraction must lie in (0, 1/2), got {f}")
    return f


def sphere_bound(n: int, f) -> Fraction:
    f = _check_fraction(f)
    if n < 0:
        raise ValueError("n must be nonnegative")
    return Fraction(2**n, binom_le(n, floor(f * n)))


# ---------------------------------------------------------------- stage split


@dataclass(frozen=True)
class StageSplit:
    n: int
    f: Fraction
    n1: int
    n2: int
    F: int
    F1: int
    F2: int

    def __post_init__(self):
        if self.n1 + self.n2 != self.n or self.F1 + self.F2 != self.F:
            raise InvariantViolation("stage split does not add up")


def _loglog_weight(n: int, f: Fraction):
    w = Fraction(4) / (1 - 2 * f) ** 2
    return lambda: _iv_rational(w) * iv.log(iv.log(iv.mpf(n)))


def stage_split(n: int, f) -> StageSplit:
    f = _check_fraction(f)
    if n < 3:
        raise ValueError("stage split needs n >= 3 so that ln ln n > 0")
    drop = certified_floor(_loglog_weight(n, f))
    n1 = n - drop
    if n1 < 1:
        raise ValueError(f"stage split leaves no first-stage rounds (n={n}, f={f})")
    F = floor(f * n)
    F1 = floor(f * n1)
    return StageSplit(n, f, n1, n - n1, F, F1, F - F1)


# ---------------------------------------------------------- M-threshold values


def _ceil_sqrt(v: int) -> int:
    if v <= 0:
        return 0
    return isqrt(v - 1) + 1


def m_threshold_machine(n: int, f, c_prime) -> int:
    """Ceiling of sphere_bound * 2 * c_prime * sqrt(n2), computed exactly."""
    c = as_fraction(c_prime)
    if c <= 0:
        raise ValueError("c_prime must be positive")
    split = stage_split(n, f)
    q = sphere_bound(n, split.f) * 2 * c
    # ceil(p/d * sqrt(n2)) = ceil(ceil_sqrt(p^2 n2) / d)
    root = _ceil_sqrt(q.numerator**2 * split.n2)
    return -((-root) // q.denominator)


def m_threshold_game(n: int, f, c_prime) -> int:
    c = as_fraction(c_prime)
    if c <= 0:
        raise ValueError("c_prime must be positive")
    split = stage_split(n, f)
    coef = sphere_bound(n, split.f) * 4 / (1 - 2 * split.f) * c
    expr = lambda: _iv_rational(coef) * iv.sqrt(iv.log(iv.log(iv.mpf(n))))
    return certified_ceil(expr, _bits_needed(coef))


def delsarte_piret(n: int, f) -> int:
    """Ceiling of sphere_bound * n * ln 2."""
    coef = sphere_bound(n, f) * n
    return certified_ceil(lambda: _iv_rational(coef) * iv.log(2), _bits_needed(coef))


# ------------------------------------------------------------- hypergeometric


def _check_hypergeom(population: int, class2_size: int, draws: int):
    if population < 0 or not 0 <= class2_size <= population or not 0 <= draws <= population:
        raise ValueError(
            f"hypergeometric parameters out of range: N={population}, K={class2_size}, n={draws}"
        )


def hypergeom_pmf(population: int, class2_size: int, draws: int, k: int) -> Fraction:
    _check_hypergeom(population, class2_size, draws)
    return Fraction(
        binom(class2_size, k) * binom(population - class2_size, draws - k),
        comb(population, draws),
    )


def hypergeom_median(population: int, class2_size: int, draws: int) -> int:
    """Least m with P(X <= m) >= 1/2."""
    _check_hypergeom(population, class2_size, draws)
    total = comb(population, draws)
    acc = 0
    for m in range(0, draws + 1):
        acc += binom(class2_size, m) * binom(population - class2_size, draws - m)
        if 2 * acc >= total:
            return m
    raise InvariantViolation("hypergeometric pmf does not sum to one")


def hypergeom_mean(population: int, class2_size: int, draws: int) -> Fraction:
    _check_hypergeom(population, class2_size, draws)
    if population == 0:
        return Fraction(0)
    return Fraction(draws * class2_size, population)


# ------------------------------------------------------ two-stage sum identities


def split_sum_ratio(n: int, f) -> Fraction:
    """Share of binom_le(n, F) whose first-stage lie count is at least F1."""
    sp = stage_split(n, f)
    num = sum(binom(sp.n1, s) * binom_le(sp.n2, sp.F - s) for s in range(sp.F1, sp.F + 1))
    return Fraction(num, binom_le(n, sp.F))


def cutoff_tail(n: int, f, n3: int) -> Fraction:
    f = _check_fraction(f)
    F = floor(f * n)
    if not 0 <= n3 <= F:
        raise ValueError(f"n3 must lie in [0, {F}]")
    return Fraction(sum(binom(n, i) for i in range(F - n3, F + 1)), binom_le(n, F))


def cutoff_tail_floor(f, n3: int) -> Fraction:
    """The closed-form lower bound 1 - (f/(1-f))**n3 * (1-f)/(1-2f)."""
    f = _check_fraction(f)
    return 1 - (f / (1 - f)) ** n3 * (1 - f) / (1 - 2 * f)


def relative_cdf_stat(n: int, f) -> Fraction:
    sp = stage_split(n, f)
    return Fraction(2**n, binom_le(n, sp.F)) * Fraction(binom(sp.n1, sp.F1), 2**sp.n1)


def relative_cdf_exceeds(n: int, f, slack=Fraction(9, 10)) -> bool:
    """Whether relative_cdf_stat(n, f) >= (ln n)**(2*slack), decided exactly."""
    value = relative_cdf_stat(n, f)
    s = as_fraction(slack)
    expr = lambda: iv.log(iv.mpf(n)) ** (2 * _iv_rational(s))
    return not certified_less(value, expr)


def relative_cdf_exponent(n: int, f) -> float:
    """The exponent e with relative_cdf_stat(n, f) == (ln n)**e, for reports."""
    v = relative_cdf_stat(n, f)
    return (log(v.numerator) - log(v.denominator)) / log(log(n))


# ----------------------------------------------------------------- bound rows

BOUNDS_COLUMNS = (
    "n", "f", "F", "n1", "n2", "F1", "F2",
    "sphere_num", "sphere_den", "m_machine", "m_game", "m_delsarte_piret",
)


def bounds_row(n: int, f, c_prime) -> dict:
    sp = stage_split(n, f)
    sphere = sphere_bound(n, sp.f)
    return {
        "n": n,
        "f": str(sp.f),
        "F": sp.F,
        "n1": sp.n1,
        "n2": sp.n2,
        "F1": sp.F1,
        "F2": sp.F2,
        "sphere_num": sphere.numerator,
        "sphere_den": sphere.denominator,
        "m_machine": m_threshold_machine(n, sp.f, c_prime),
        "m_game": m_threshold_game(n, sp.f, c_prime),
        "m_delsarte_piret": delsarte_piret(n, sp.f),
    }
