"""Exact liar machine and linear machine on the integer line.

Configurations are stored densely (one count per site) with an offset.
The evolution kernels work on the compressed "cell" form, which keeps
only the sites of the occupied parity: cell ``k`` sits at ``base + 2k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import InvariantViolation, ResourceLimitError

_PARITY_NAMES = {0: "even", 1: "odd"}
_PARITY_CODES = {"even": 0, "odd": 1}


def _as_parity(p) -> int:
    if isinstance(p, str):
        try:
            return _PARITY_CODES[p.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown parity {p!r}") from None
    if p in (0, 1):
        return int(p)
    raise ValueError(f"parity must be 0/1 or even/odd, got {p!r}")


def _trim_dense(offset: int, values: list) -> tuple[int, tuple]:
    lo = 0
    hi = len(values)
    while lo < hi and values[lo] == 0:
        lo += 1
    while hi > lo and values[hi - 1] == 0:
        hi -= 1
    if lo == hi:
        return 0, ()
    return offset + lo, tuple(values[lo:hi])


def _object_array(values: Iterable[int]) -> np.ndarray:
    vals = list(values)
    arr = np.empty(len(vals), dtype=object)
    arr[:] = vals
    return arr


@dataclass(frozen=True)
class ChipConfiguration:
    """Nonnegative chip counts on sites of one parity class.

    ``counts[i]`` is the number of chips at site ``offset + i``.  The
    stored form is canonical: no zero margins, and ``offset == 0`` when
    the configuration is empty.
    """

    offset: int = 0
    counts: tuple = ()
    parity: int = 0

    def __post_init__(self):
        parity = _as_parity(self.parity)
        counts = list(self.counts)
        for i, c in enumerate(counts):
            if isinstance(c, bool) or not isinstance(c, (int, np.integer)):
                raise TypeError(f"chip counts must be integers, got {c!r}")
            c = int(c)
            counts[i] = c
            if c < 0:
                raise ValueError(f"negative chip count {c} at site {self.offset + i}")
            if c and (self.offset + i - parity) % 2:
                raise ValueError(
                    f"site {self.offset + i} is occupied but does not have {_PARITY_NAMES[parity]} parity"
                )
        offset, counts = _trim_dense(int(self.offset), counts)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "parity", parity)

    @classmethod
    def from_dict(cls, sites: Mapping[int, int], parity=None) -> "ChipConfiguration":
        occupied = {int(j): int(c) for j, c in sites.items() if c}
        if parity is None:
            parities = {j % 2 for j in occupied}
            if len(parities) > 1:
                raise ValueError("configuration occupies sites of both parities")
            parity = parities.pop() if parities else 0
        if not occupied:
            return cls(0, (), parity)
        lo, hi = min(occupied), max(occupied)
        dense = [0] * (hi - lo + 1)
        for j, c in occupied.items():
            dense[j - lo] = c
        return cls(lo, tuple(dense), parity)

    @classmethod
    def point(cls, site: int, count: int) -> "ChipConfiguration":
        return cls.from_dict({site: count}, parity=site % 2)

    def as_dict(self) -> dict[int, int]:
        return {site: c for site, c in self.items()}

    def items(self) -> Iterator[tuple[int, int]]:
        for i, c in enumerate(self.counts):
            if c:
                yield self.offset + i, c

    def __getitem__(self, site: int) -> int:
        i = site - self.offset
        if 0 <= i < len(self.counts):
            return self.counts[i]
        return 0

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def span(self) -> tuple[int, int] | None:
        if not self.counts:
            return None
        return self.offset, self.offset + len(self.counts) - 1

    def is_empty(self) -> bool:
        return not self.counts

    def shift(self, k: int) -> "ChipConfiguration":
        """Translate every chip ``k`` sites to the right."""
        return ChipConfiguration(self.offset + k, self.counts, (self.parity + k) % 2)

    def __repr__(self):
        body = ", ".join(f"{j}: {c}" for j, c in self.items())
        return f"ChipConfiguration({{{body}}}, parity={_PARITY_NAMES[self.parity]})"


class SignVector:
    """The tie-breaking signs of a configuration, indexed by site.

    Sites outside the tracked window read as 0.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Mapping[int, int]):
        for j, v in entries.items():
            if v not in (-1, 0, 1):
                raise ValueError(f"sign at site {j} must be -1, 0 or 1")
        self._entries = MappingProxyType(dict(sorted(entries.items())))

    @property
    def entries(self) -> Mapping[int, int]:
        return self._entries

    def __getitem__(self, site: int) -> int:
        return self._entries.get(site, 0)

    def nonzero(self) -> dict[int, int]:
        return {j: v for j, v in self._entries.items() if v}

    def __eq__(self, other):
        if isinstance(other, SignVector):
            return self.nonzero() == other.nonzero()
        return NotImplemented

    def __repr__(self):
        return f"SignVector({self.nonzero()})"


# ---------------------------------------------------------------- cell kernels


def to_cells(f: ChipConfiguration) -> tuple[int, np.ndarray]:
    """Compressed form: ``(base, cells)`` with cell k at site ``base + 2k``."""
    if not f.counts:
        return f.parity, np.zeros(0, dtype=object)
    return f.offset, _object_array(f.counts[::2])


def from_cells(base: int, cells: np.ndarray, parity: int | None = None) -> ChipConfiguration:
    if parity is None:
        parity = base % 2
    n = len(cells)
    if n == 0:
        return ChipConfiguration(0, (), parity)
    dense = [0] * (2 * n - 1)
    dense[::2] = [int(c) for c in cells]
    return ChipConfiguration(base, tuple(dense), parity)


def trim_cells(base: int, cells: np.ndarray) -> tuple[int, np.ndarray]:
    nz = np.flatnonzero(cells != 0)
    if len(nz) == 0:
        return base, cells[:0]
    lo, hi = int(nz[0]), int(nz[-1]) + 1
    return base + 2 * lo, cells[lo:hi]


def cell_signs(cells: np.ndarray, start_negative: bool = False) -> np.ndarray:
    """Signs of cells as an int64 array; the first odd cell gets +1 unless
    ``start_negative``."""
    odd = (cells & 1).astype(np.int64)
    rank = np.cumsum(odd) - odd
    if start_negative:
        rank += 1
    return odd * (1 - 2 * (rank & 1))


def liar_cells_step(cells: np.ndarray, start_negative: bool = False) -> np.ndarray:
    """One liar step on cells; the result starts one site further left.

    Each cell keeps half its chips on each side and routes the odd chip
    right when its sign is +1 and left when it is -1.
    """
    odd = (cells & 1).astype(np.int64)
    rank = np.cumsum(odd) - odd
    if start_negative:
        rank += 1
    right = odd * (1 - (rank & 1))
    left = odd - right
    half = cells >> 1
    out = np.empty(len(cells) + 1, dtype=object)
    out[0] = 0
    out[1:] = half + right
    out[:-1] += half + left
    return out


def linear_cells_step(cells: np.ndarray) -> np.ndarray:
    """Linear step on numerators (scale doubles); starts one site further left."""
    out = np.empty(len(cells) + 1, dtype=object)
    out[0] = 0
    out[1:] = cells
    out[:-1] += cells
    return out


# ---------------------------------------------------------------- liar machine


def chi_compute(f: ChipConfiguration) -> SignVector:
    base, cells = to_cells(f)
    signs = cell_signs(cells)
    return SignVector({base + 2 * k: int(s) for k, s in enumerate(signs)})


def liar_step(f: ChipConfiguration) -> ChipConfiguration:
    """Apply the liar update literally, site by site."""
    chi = chi_compute(f)
    if f.is_empty():
        return ChipConfiguration(0, (), 1 - f.parity)
    lo, hi = f.span
    out = {}
    for j in range(lo - 1, hi + 2):
        if (j - f.parity) % 2 == 0:
            continue
        num = f[j - 1] + f[j + 1] + chi[j - 1] - chi[j + 1]
        if num % 2 or num < 0:
            raise InvariantViolation(f"liar update at site {j} produced {num}/2")
        if num:
            out[j] = num // 2
    return ChipConfiguration.from_dict(out, parity=1 - f.parity)


def liar_cells_run(base: int, cells: np.ndarray, t: int, max_window: int | None = None):
    """Yield ``(base, cells)`` after each of ``t`` liar steps, trimmed."""
    for _ in range(t):
        if len(cells) == 0:
            base -= 1
            yield base, cells
            continue
        cells = liar_cells_step(cells)
        base -= 1
        base, cells = trim_cells(base, cells)
        if max_window is not None and 2 * len(cells) - 1 > max_window:
            raise ResourceLimitError(
                f"liar machine window of {2 * len(cells) - 1} sites exceeds the cap {max_window}"
            )
        yield base, cells


def liar_trajectory(
    f0: ChipConfiguration, t: int, max_window: int | None = None
) -> Iterator[ChipConfiguration]:
    """Yield f_0, f_1, ..., f_t."""
    if t < 0:
        raise ValueError("step count must be nonnegative")
    yield f0
    parity = f0.parity
    base, cells = to_cells(f0)
    for base, cells in liar_cells_run(base, cells, t, max_window):
        parity = 1 - parity
        yield from_cells(base, cells, parity)


def liar_run(f0: ChipConfiguration, t: int, max_window: int | None = None) -> ChipConfiguration:
    if t < 0:
        raise ValueError("step count must be nonnegative")
    if t == 0:
        return f0
    base, cells = to_cells(f0)
    for base, cells in liar_cells_run(base, cells, t, max_window):
        pass
    return from_cells(base, cells, (f0.parity + t) % 2)


# -------------------------------------------------------------- linear machine


@dataclass(frozen=True)
class LinearProfile:
    """Dyadic values: site ``offset + i`` holds ``numerators[i] / 2**scale_exponent``."""

    offset: int = 0
    scale_exponent: int = 0
    numerators: tuple = ()

    def __post_init__(self):
        if self.scale_exponent < 0:
            raise ValueError("scale exponent must be nonnegative")
        nums = [int(v) for v in self.numerators]
        if any(v < 0 for v in nums):
            raise ValueError("linear profile values must be nonnegative")
        offset, nums = _trim_dense(int(self.offset), nums)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "numerators", nums)

    @classmethod
    def from_configuration(cls, f: ChipConfiguration) -> "LinearProfile":
        return cls(f.offset, 0, f.counts)

    def numerator(self, site: int) -> int:
        i = site - self.offset
        if 0 <= i < len(self.numerators):
            return self.numerators[i]
        return 0

    def __getitem__(self, site: int) -> Fraction:
        return Fraction(self.numerator(site), 1 << self.scale_exponent)

    def items(self) -> Iterator[tuple[int, Fraction]]:
        for i, v in enumerate(self.numerators):
            if v:
                yield self.offset + i, Fraction(v, 1 << self.scale_exponent)

    @property
    def total(self) -> Fraction:
        return Fraction(sum(self.numerators), 1 << self.scale_exponent)

    def rescaled(self, scale_exponent: int) -> tuple:
        """Numerators at a larger scale ``2**scale_exponent``."""
        extra = scale_exponent - self.scale_exponent
        if extra < 0:
            raise ValueError("can only rescale upward")
        return tuple(v << extra for v in self.numerators)

    def shift(self, k: int) -> "LinearProfile":
        return LinearProfile(self.offset + k, self.scale_exponent, self.numerators)

    def __eq__(self, other):
        if isinstance(other, ChipConfiguration):
            other = LinearProfile.from_configuration(other)
        if not isinstance(other, LinearProfile):
            return NotImplemented
        s = max(self.scale_exponent, other.scale_exponent)
        return self.offset == other.offset and self.rescaled(s) == other.rescaled(s)

    def __hash__(self):
        nums = list(self.numerators)
        s = self.scale_exponent
        while s and nums and all(v % 2 == 0 for v in nums):
            nums = [v >> 1 for v in nums]
            s -= 1
        return hash((self.offset, s, tuple(nums)))


def linear_step(g: LinearProfile | ChipConfiguration) -> LinearProfile:
    if isinstance(g, ChipConfiguration):
        g = LinearProfile.from_configuration(g)
    nums = list(g.numerators)
    if not nums:
        return LinearProfile(0, g.scale_exponent + 1, ())
    out = [0, 0] + nums
    for i, v in enumerate(nums):
        out[i] += v
    return LinearProfile(g.offset - 1, g.scale_exponent + 1, out)


def linear_run(g: LinearProfile | ChipConfiguration, t: int) -> LinearProfile:
    if t < 0:
        raise ValueError("step count must be nonnegative")
    if isinstance(g, ChipConfiguration):
        g = LinearProfile.from_configuration(g)
    if not g.numerators:
        return LinearProfile(0, g.scale_exponent + t, ())
    # split into the two parity classes and evolve each in cell form
    dense = g.numerators
    pieces = {}
    for r in (0, 1):
        cells = _object_array(dense[r::2])
        base = g.offset + r
        for _ in range(t):
            cells = linear_cells_step(cells)
            base -= 1
        pieces[r] = (base, cells)
    lo = min(b for b, c in pieces.values() if len(c))
    hi = max(b + 2 * (len(c) - 1) for b, c in pieces.values() if len(c))
    out = [0] * (hi - lo + 1)
    for base, cells in pieces.values():
        for k, v in enumerate(cells):
            out[base + 2 * k - lo] += int(v)
    return LinearProfile(lo, g.scale_exponent + t, out)


@lru_cache(maxsize=16)
def binomial_row(n: int) -> tuple:
    row = [1] * (n + 1)
    for k in range(n):
        row[k + 1] = row[k] * (n - k) // (k + 1)
    return tuple(row)


@lru_cache(maxsize=16)
def _binomial_prefix(n: int) -> tuple:
    acc = [0]
    for v in binomial_row(n):
        acc.append(acc[-1] + v)
    return tuple(acc)


def linear_interval_numerator(f0: ChipConfiguration, t: int, a: int, b: int) -> int:
    """``2**t * g_t([a, b])`` from the binomial closed form, without evolving."""
    if a > b:
        raise ValueError(f"empty interval [{a}, {b}]")
    prefix = _binomial_prefix(t)
    total = 0
    for m, c in f0.items():
        # sites j = m - t + 2k, k = 0..t
        k_lo = max(0, -((m - t - a) // 2))
        k_hi = min(t, (b - m + t) // 2)
        if k_lo <= k_hi:
            total += c * (prefix[k_hi + 1] - prefix[k_lo])
    return total


def interval_sum(h: ChipConfiguration | LinearProfile, a: int, b: int):
    """Exact mass on ``[a, b]``: an integer for chips, a Fraction for profiles."""
    if a > b:
        raise ValueError(f"empty interval [{a}, {b}]")
    if isinstance(h, ChipConfiguration):
        return sum(h[j] for j in range(max(a, h.offset), min(b, h.offset + len(h.counts) - 1) + 1))
    lo = max(a, h.offset)
    hi = min(b, h.offset + len(h.numerators) - 1)
    num = sum(h.numerators[j - h.offset] for j in range(lo, hi + 1))
    return Fraction(num, 1 << h.scale_exponent)


# --------------------------------------------------------------- serialization


def format_configuration(f: ChipConfiguration, t: int = 0) -> str:
    lines = [f"# parity={_PARITY_NAMES[f.parity]} t={t}"]
    lines.extend(f"{j},{c}" for j, c in f.items())
    return "\n".join(lines) + "\n"


def parse_configurations(text: str) -> list[tuple[int, ChipConfiguration]]:
    """Parse one or more header-delimited configuration blocks."""
    blocks: list[tuple[int, int, dict]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            fields = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
            if "parity" not in fields:
                raise ValueError(f"line {lineno}: header lacks parity=")
            try:
                step = int(fields.get("t", "0"))
            except ValueError:
                raise ValueError(f"line {lineno}: bad step {fields.get('t')!r}") from None
            blocks.append((_as_parity(fields["parity"]), step, {}))
            continue
        if not blocks:
            raise ValueError(f"line {lineno}: data before header")
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'site,count'")
        try:
            site, count = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: non-integer field") from None
        sites = blocks[-1][2]
        if site in sites:
            raise ValueError(f"line {lineno}: duplicate site {site}")
        if sites and site < max(sites):
            raise ValueError(f"line {lineno}: sites must be sorted")
        sites[site] = count
    if not blocks:
        raise ValueError("no configuration header found")
    return [(step, ChipConfiguration.from_dict(sites, parity)) for parity, step, sites in blocks]


def parse_inline(spec: str) -> ChipConfiguration:
    """Parse ``"0:1,2:11"`` style configurations. An empty string is empty."""
    sites = {}
    spec = spec.strip().strip("{}")
    if not spec:
        return ChipConfiguration()
    for tok in spec.split(","):
        try:
            site, count = tok.split(":")
            sites[int(site)] = int(count)
        except ValueError:
            raise ValueError(f"bad site:count token {tok!r}") from None
    return ChipConfiguration.from_dict(sites)


def random_configuration(rng, max_sites: int = 64, max_count: int = 1 << 20, spread: int = 64) -> ChipConfiguration:
    """Seeded test configuration: up to ``max_sites`` sites of one parity near the origin."""
    parity = rng.randint(0, 1)
    k = rng.randint(1, max_sites)
    cells = rng.sample(range(-spread, spread), k) if k <= 2 * spread else range(k)
    return ChipConfiguration.from_dict({2 * c + parity: rng.randint(0, max_count) for c in cells}, parity=parity)
