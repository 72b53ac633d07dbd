"""Exact comparison of the liar machine against the linear machine.

Discrepancies are dyadic rationals; they are kept as integer numerators at
scale ``2**t`` and compared against certified rational enclosures of the
logarithmic bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np
from mpmath import iv

from .chipfield import (
    ChipConfiguration,
    binomial_row,
    linear_cells_step,
    linear_interval_numerator,
    liar_cells_step,
    to_cells,
    trim_cells,
)
from .numerics import binom, certified_less, enclose


@dataclass(frozen=True)
class IntervalSpec:
    a: int
    b: int

    def __post_init__(self):
        if self.a > self.b:
            raise ValueError(f"interval [{self.a}, {self.b}] is empty")

    @property
    def B(self) -> int:
        return self.b - self.a

    @classmethod
    def parse(cls, text: str) -> "IntervalSpec":
        try:
            a, b = text.split(":")
            return cls(int(a), int(b))
        except ValueError:
            raise ValueError(f"interval must look like 'a:b', got {text!r}") from None


@dataclass(frozen=True)
class DiscrepancyReport:
    t: int
    max_abs: Fraction
    argmax_site: int | None
    bound_value: float
    ratio: float
    within_bound: bool | None = None
    interval: IntervalSpec | None = None

    @property
    def B(self) -> int | None:
        return None if self.interval is None else self.interval.B


# ------------------------------------------------------------------- bounds


@lru_cache(maxsize=8192)
def _twelve_log(t: int) -> tuple[Fraction, Fraction]:
    return enclose(lambda: 12 * iv.log(iv.mpf(t)), 96)


def pointwise_bound(t: int) -> float:
    return 12 * math.log(t) if t >= 1 else 0.0


def pointwise_within_bound(num: int, t: int) -> bool | None:
    """Exact test of ``num / 2**t < 12 ln t``; None when the bound does not apply."""
    if t < 2:
        return None
    lo, hi = _twelve_log(t)
    scale = 1 << t
    if num * lo.denominator < lo.numerator * scale:
        return True
    if num * hi.denominator >= hi.numerator * scale:
        return False
    return certified_less(Fraction(num, scale), lambda: 12 * iv.log(iv.mpf(t)))


def interval_bound(t: int, B: int) -> float:
    """Shape of the interval bound: sqrt(t) for wide intervals, else B*max(1, ln(t/B^2)).

    A zero-width interval is treated as B = 1 so the statistic stays finite.
    """
    if t < 1:
        raise ValueError("interval bound needs t >= 1")
    if B < 0:
        raise ValueError("interval width must be nonnegative")
    if 2 * B > math.sqrt(t):
        return math.sqrt(t)
    b = max(B, 1)
    return b * max(1.0, math.log(t / (b * b)))


def _ratio(value: Fraction, bound: float) -> float:
    return float(value) / bound if bound > 0 else math.inf if value else 0.0


# ------------------------------------------------------------ paired machines


class PairedRun:
    """Liar and linear machines advanced in lockstep from the same start.

    The linear machine is kept as numerators at scale ``2**t`` over the whole
    light cone of the starting window; the liar machine is kept trimmed.
    """

    def __init__(self, f0: ChipConfiguration):
        self.f0 = f0
        self.t = 0
        self._fbase, self._f = to_cells(f0)
        self._gbase, self._g = self._fbase, self._f.copy()

    def step(self):
        if len(self._f):
            self._f = liar_cells_step(self._f)
            self._fbase, self._f = trim_cells(self._fbase - 1, self._f)
        else:
            self._fbase -= 1
        if len(self._g):
            self._g = linear_cells_step(self._g)
        self._gbase -= 1
        self.t += 1

    def advance_to(self, t: int):
        if t < self.t:
            raise ValueError(f"cannot rewind from t={self.t} to t={t}")
        while self.t < t:
            self.step()

    def _difference(self) -> tuple[int, np.ndarray]:
        """``2**t * (f_t - g_t)`` on every cell of the linear window."""
        d = -self._g
        if len(self._f):
            i0 = (self._fbase - self._gbase) // 2
            d[i0:i0 + len(self._f)] += self._f * (1 << self.t)
        return self._gbase, d

    def pointwise(self) -> DiscrepancyReport:
        t = self.t
        if not len(self._g):
            return DiscrepancyReport(t, Fraction(0), None, pointwise_bound(t), 0.0, pointwise_within_bound(0, t))
        g = self._g
        i0 = (self._fbase - self._gbase) // 2
        i1 = i0 + len(self._f)
        best, where = -1, 0
        # outside the liar window the difference is just -g
        for lo, hi in ((0, i0), (i1, len(g))):
            if hi > lo:
                k = lo + int(np.argmax(g[lo:hi]))
                if g[k] > best:
                    best, where = g[k], k
        if i1 > i0:
            inside = np.abs(self._f * (1 << t) - g[i0:i1])
            k = i0 + int(np.argmax(inside))
            if inside[k - i0] > best or (inside[k - i0] == best and k < where):
                best, where = inside[k - i0], k
        best = int(best)
        value = Fraction(best, 1 << t)
        bound = pointwise_bound(t)
        return DiscrepancyReport(
            t, value, self._gbase + 2 * where, bound, _ratio(value, bound), pointwise_within_bound(best, t)
        )

    def interval(self, I: IntervalSpec) -> DiscrepancyReport:
        t = self.t
        base, d = self._difference()
        lo = max(0, -((base - I.a) // 2))
        hi = min(len(d) - 1, (I.b - base) // 2)
        num = abs(int(d[lo:hi + 1].sum())) if hi >= lo else 0
        return _interval_report(t, num, I)

    def worst_interval(self, B: int) -> DiscrepancyReport:
        """Largest |f_t(I) - g_t(I)| over all intervals of width ``B``."""
        if B < 0:
            raise ValueError("interval width must be nonnegative")
        t = self.t
        base, d = self._difference()
        best, best_a = 0, base
        if len(d):
            for m, shift in ((B // 2 + 1, 0), ((B + 1) // 2, 1)):
                if m == 0:
                    continue
                padded = np.concatenate([np.zeros(m, dtype=object), d, np.zeros(m, dtype=object)])
                acc = np.concatenate([np.zeros(1, dtype=object), np.cumsum(padded)])
                sums = np.abs(acc[m:] - acc[:-m])
                k = int(np.argmax(sums))
                if sums[k] > best:
                    # window starts at padded index k, i.e. cell k - m
                    best, best_a = int(sums[k]), base + 2 * (k - m) - shift
        return _interval_report(t, best, IntervalSpec(best_a, best_a + B))


def _interval_report(t: int, num: int, I: IntervalSpec) -> DiscrepancyReport:
    value = Fraction(num, 1 << t)
    bound = interval_bound(t, I.B) if t >= 1 else math.inf
    return DiscrepancyReport(t, value, I.a, bound, _ratio(value, bound), None, I)


def pointwise_discrepancy(f0: ChipConfiguration, t: int) -> DiscrepancyReport:
    if t < 0:
        raise ValueError("step count must be nonnegative")
    run = PairedRun(f0)
    run.advance_to(t)
    return run.pointwise()


def pointwise_sweep(f0: ChipConfiguration, t_max: int, t_min: int = 0) -> Iterator[DiscrepancyReport]:
    run = PairedRun(f0)
    run.advance_to(t_min)
    yield run.pointwise()
    while run.t < t_max:
        run.step()
        yield run.pointwise()


def _liar_at_times(f0: ChipConfiguration, times: Sequence[int]) -> Iterator[tuple[int, int, np.ndarray]]:
    base, cells = to_cells(f0)
    now = 0
    for t in sorted(set(times)):
        while now < t:
            if len(cells):
                cells = liar_cells_step(cells)
                base, cells = trim_cells(base - 1, cells)
            else:
                base -= 1
            now += 1
        yield t, base, cells


def _liar_interval(base: int, cells: np.ndarray, I: IntervalSpec) -> int:
    lo = max(0, -((base - I.a) // 2))
    hi = min(len(cells) - 1, (I.b - base) // 2)
    return int(cells[lo:hi + 1].sum()) if hi >= lo else 0


def interval_discrepancy(f0: ChipConfiguration, t: int, I: IntervalSpec) -> DiscrepancyReport:
    """|f_t(I) - g_t(I)|, with g_t(I) from the binomial closed form."""
    if t < 1:
        raise ValueError("interval discrepancy needs t >= 1")
    [(_, base, cells)] = list(_liar_at_times(f0, [t]))
    num = abs((_liar_interval(base, cells, I) << t) - linear_interval_numerator(f0, t, I.a, I.b))
    return _interval_report(t, num, I)


def fit_interval_constant(runs: Iterable[tuple[ChipConfiguration, int, IntervalSpec]]) -> float:
    """Supremum of |f_t(I) - g_t(I)| / interval_bound(t, B) over the runs."""
    grouped: dict[ChipConfiguration, list[tuple[int, IntervalSpec]]] = {}
    for f0, t, I in runs:
        if t < 1:
            raise ValueError("interval runs need t >= 1")
        grouped.setdefault(f0, []).append((t, I))
    if not grouped:
        raise ValueError("no runs to fit")
    best = 0.0
    for f0, items in grouped.items():
        by_time: dict[int, list[IntervalSpec]] = {}
        for t, I in items:
            by_time.setdefault(t, []).append(I)
        for t, base, cells in _liar_at_times(f0, list(by_time)):
            for I in by_time[t]:
                num = abs((_liar_interval(base, cells, I) << t) - linear_interval_numerator(f0, t, I.a, I.b))
                best = max(best, _interval_report(t, num, I).ratio)
    return best


def default_grid(k_min: int = 3, k_max: int = 12) -> list[tuple[int, int]]:
    grid = []
    for k in range(k_min, k_max + 1):
        t = 2**k
        root = math.sqrt(t)
        widths = sorted({2, 4, math.ceil(root / 4) * 2, math.ceil(root / 2) * 2})
        grid.extend((t, B) for B in widths)
    return grid


# -------------------------------------------------------------- the h_B kernel


def _check_hB(s: int, B: int):
    if s < 1:
        raise ValueError("h_B needs s >= 1")
    if B <= 0 or B % 2:
        raise ValueError(f"B must be a positive even integer, got {B}")


def hB_eval(s: int, B: int, j: int) -> Fraction:
    _check_hB(s, B)
    if (s + j) % 2:
        return Fraction(0)
    return Fraction(binom(s, (s + j - B) // 2) - binom(s, (s + j) // 2), 1 << s)


def hB_numerators(s: int, B: int, row: np.ndarray | None = None) -> tuple[int, np.ndarray]:
    """``2**s * h_B(j)`` for j = first, first+2, ..., covering the support."""
    _check_hB(s, B)
    half = B // 2
    if row is None:
        row = np.array(binomial_row(s), dtype=object)
    padded = np.concatenate([np.zeros(half, dtype=object), row, np.zeros(half, dtype=object)])
    n = s + half + 1
    return -s, padded[:n] - padded[half:half + n]


@dataclass(frozen=True)
class BimodalityCertificate:
    ok: bool
    sign_changes: tuple[int, ...]
    signs: tuple[int, ...]

    def __bool__(self):
        return self.ok


def _bimodality(first: int, nums: np.ndarray) -> BimodalityCertificate:
    padded = np.concatenate([np.zeros(1, dtype=object), nums, np.zeros(1, dtype=object)])
    d = padded[:-1] - padded[1:]  # h(j-2) - h(j) at j = first, ..., last + 2
    sgn = (d > 0).astype(np.int8) - (d < 0).astype(np.int8)
    idx = np.flatnonzero(sgn)
    nz = sgn[idx]
    flips = np.flatnonzero(nz[1:] != nz[:-1]) + 1
    changes = tuple(first + 2 * int(idx[k]) for k in flips)
    runs = tuple(int(nz[0]) * (-1) ** i for i in range(len(flips) + 1)) if len(nz) else ()
    return BimodalityCertificate(len(flips) <= 2, changes, runs)


def bimodality_check(s: int, B: int) -> BimodalityCertificate:
    """h_B(j-2) - h_B(j) over the support changes sign at most twice."""
    first, nums = hB_numerators(s, B)
    return _bimodality(first, nums)


@dataclass(frozen=True)
class HBBounds:
    s: int
    B: int
    max_numerator: int
    upper_sqrt: bool
    upper_linear: bool
    lower: bool | None

    @property
    def max_abs(self) -> Fraction:
        return Fraction(self.max_numerator, 1 << self.s)

    def __bool__(self):
        return self.upper_sqrt and self.upper_linear and self.lower is not False


def _bounds(s: int, B: int, max_num: int, s_check: int) -> HBBounds:
    four_s = 1 << (2 * s)
    upper_sqrt = max_num * max_num * s <= four_s
    upper_linear = 2 * s * max_num <= 3 * B * (1 << s)
    lower = None
    if s >= s_check and B * B >= s:
        lower = 16 * s * max_num * max_num >= four_s
    return HBBounds(s, B, max_num, upper_sqrt, upper_linear, lower)


def hB_bounds_check(s: int, B: int, s_check: int = 100) -> HBBounds:
    """Exact check of max|h_B| <= 1/sqrt(s), <= 3B/(2s), and >= 1/(4 sqrt s) when B >= sqrt(s)."""
    _, nums = hB_numerators(s, B)
    return _bounds(s, B, int(np.max(np.abs(nums))), s_check)


def lemma_sweep(s_values: Iterable[int], s_check: int = 100) -> Iterator[tuple[BimodalityCertificate, HBBounds]]:
    """Bimodality and bounds for every even B in [2, 2*ceil(sqrt s)], sharing each binomial row."""
    for s in s_values:
        row = np.array(binomial_row(s), dtype=object)
        for B in range(2, 2 * math.isqrt(s - 1) + 3 if s > 1 else 3, 2):
            first, nums = hB_numerators(s, B, row)
            yield _bimodality(first, nums), _bounds(s, B, int(np.max(np.abs(nums))), s_check)


# ------------------------------------------------------------- CSV reporting

REPORT_COLUMNS = ("t", "B", "max_abs_num", "max_abs_den", "bound", "ratio", "argmax_site", "pass")


def report_row(r: DiscrepancyReport) -> dict:
    ok = r.within_bound
    return {
        "t": r.t,
        "B": "" if r.B is None else r.B,
        "max_abs_num": r.max_abs.numerator,
        "max_abs_den": r.max_abs.denominator,
        "bound": f"{r.bound_value:.17g}",
        "ratio": f"{r.ratio:.17g}",
        "argmax_site": "" if r.argmax_site is None else r.argmax_site,
        "pass": "" if ok is None else int(ok),
    }
