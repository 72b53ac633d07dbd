"""Parity forcing for the liar machine and adversarial starting configurations.

The forcing engine works level by level.  At level ``tau`` the chip counts
at time ``tau`` are known modulo ``2**(T - tau)``, which is all the later
parities depend on.  Scanning the forced cells left to right, a parity
mismatch at site ``x`` is repaired by adding ``2**tau`` chips at
``x + tau`` at time 0.  Those chips split evenly until time ``tau`` and then
add ``binom(tau, i)`` at ``x + 2i``, which leaves every earlier parity and
every cell to the left untouched.

Only the window of sites that can still reach a forced cell is simulated.
Everything left of it is summarized by the parity of its chip total, which
is the parity of its number of odd sites and so fixes the sign offset of
the first odd cell inside the window.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from .chipfield import ChipConfiguration, cell_signs, liar_cells_step, liar_run, to_cells
from .discrepancy import IntervalSpec
from .errors import InvariantViolation


@dataclass(frozen=True)
class ParityGrid:
    """Prescribed parities ``bits[t][n]`` for sites ``0..N-1`` at times ``0..T-1``.

    A cell is structural when site ``n`` can hold chips at time ``t``,
    i.e. ``n = support_parity + t (mod 2)``; all other cells must be 0.
    """

    N: int
    T: int
    bits: tuple
    support_parity: int = 0

    def __post_init__(self):
        if self.N < 1 or self.T < 1:
            raise ValueError("grid needs N >= 1 and T >= 1")
        if self.support_parity not in (0, 1):
            raise ValueError("support parity must be 0 or 1")
        rows = tuple(tuple(int(b) for b in row) for row in self.bits)
        if len(rows) != self.T or any(len(r) != self.N for r in rows):
            raise ValueError(f"grid must have {self.T} rows of {self.N} cells")
        for t, row in enumerate(rows):
            for n, b in enumerate(row):
                if b not in (0, 1):
                    raise ValueError(f"cell ({n}, {t}) is {b}, not 0/1")
                if b and not self.structural(n, t):
                    raise ValueError(f"cell ({n}, {t}) is set but site {n} is empty at time {t}")
        object.__setattr__(self, "bits", rows)

    def structural(self, n: int, t: int) -> bool:
        return (n - self.support_parity - t) % 2 == 0

    def __getitem__(self, nt: tuple[int, int]) -> int:
        n, t = nt
        return self.bits[t][n]

    @classmethod
    def zeros(cls, N: int, T: int, support_parity: int = 0) -> "ParityGrid":
        return cls(N, T, tuple((0,) * N for _ in range(T)), support_parity)

    def to_text(self) -> str:
        parity = "even" if self.support_parity == 0 else "odd"
        lines = [f"{self.N} {self.T} {parity}"]
        for t, row in enumerate(self.bits):
            lines.append("".join(str(b) if self.structural(n, t) else "." for n, b in enumerate(row)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ParityGrid":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty grid file")
        head = lines[0].split()
        if len(head) != 3:
            raise ValueError("grid header must be 'N T parity'")
        try:
            N, T = int(head[0]), int(head[1])
        except ValueError:
            raise ValueError("grid header N and T must be integers") from None
        parity = {"even": 0, "odd": 1, "0": 0, "1": 1}.get(head[2].lower())
        if parity is None:
            raise ValueError(f"unknown parity {head[2]!r}")
        body = lines[1:]
        if len(body) != T:
            raise ValueError(f"expected {T} grid rows, found {len(body)}")
        rows = []
        for t, line in enumerate(body):
            if len(line) != N:
                raise ValueError(f"row {t} has {len(line)} cells, expected {N}")
            row = []
            for n, ch in enumerate(line):
                if ch not in "01.":
                    raise ValueError(f"row {t}: bad character {ch!r}")
                if ch == "." and (n - parity - t) % 2 == 0:
                    raise ValueError(f"row {t}: cell {n} is structural but marked '.'")
                if ch != "." and (n - parity - t) % 2:
                    raise ValueError(f"row {t}: cell {n} is structurally empty but given a bit")
                row.append(1 if ch == "1" else 0)
            rows.append(tuple(row))
        return cls(N, T, tuple(rows), parity)


# --------------------------------------------------------------------- engine


@dataclass(frozen=True)
class _Level:
    """Forced sites ``lo, lo+2, ..., hi`` at one time; ``odd`` lists the odd ones.

    With ``first_sign`` set, the cell at ``lo - 2`` is used as a guard whose
    parity makes the leftmost odd forced cell carry that sign.
    """

    lo: int
    hi: int
    odd: frozenset
    first_sign: int | None = None

    @property
    def min_site(self) -> int:
        return self.lo - 2 if self.first_sign is not None else self.lo


def _pack_bits(bits: np.ndarray) -> int:
    return int.from_bytes(np.packbits(bits.astype(np.uint8), bitorder="little").tobytes(), "little")


def _convolve_row(n_out: int, fixes: Sequence[int], row: np.ndarray, modulus_bits: int) -> list[int]:
    """``sum over k in fixes of row[i]`` landing at ``k + i`` for outputs ``0..n_out-1``.

    ``fixes`` are relative to output 0. Values are reduced mod ``2**modulus_bits``.
    """
    width_bits = modulus_bits + len(fixes).bit_length() + 1
    wb = (width_bits + 7) // 8
    marks = bytearray(n_out * wb)
    for k in fixes:
        marks[k * wb] = 1
    mask = (1 << modulus_bits) - 1
    m = min(len(row), n_out)
    packed_row = b"".join((int(v) & mask).to_bytes(wb, "little") for v in row[:m])
    prod = gmpy2.mpz(int.from_bytes(marks, "little")) * gmpy2.mpz(int.from_bytes(packed_row, "little"))
    raw = int(prod).to_bytes(max((int(gmpy2.bit_length(prod)) + 7) // 8, 1), "little")
    raw = raw[: n_out * wb].ljust(n_out * wb, b"\0")
    return [int.from_bytes(raw[i * wb:(i + 1) * wb], "little") & mask for i in range(n_out)]


def _forge(T: int, levels: Sequence[_Level | None], verify: bool = True) -> dict[int, int]:
    """Initial chips realizing the prescribed parities; returns ``{site: count}``."""
    active = [t for t, lv in enumerate(levels) if lv is not None]
    f0: dict[int, int] = {}
    if not active:
        return f0
    last = active[-1]
    # reach[t] = (lowest, highest) site at time t that can still influence a forced cell
    reach: list[tuple[int, int] | None] = [None] * (last + 1)
    lo_r, hi_r = None, None
    for t in range(last, -1, -1):
        if lo_r is not None:
            lo_r, hi_r = lo_r - 1, hi_r + 1
        lv = levels[t]
        if lv is not None:
            lo_r = lv.min_site if lo_r is None else min(lo_r, lv.min_site)
            hi_r = lv.hi if hi_r is None else max(hi_r, lv.hi)
        reach[t] = (lo_r, hi_r)

    base, top = reach[0]
    vals = np.zeros((top - base) // 2 + 1, dtype=object)
    left_odd = 0  # parity of the chip total left of the window
    max_cells = max((h - l) // 2 + 1 for l, h in reach)
    width_mask = (1 << max_cells) - 1
    sier = 1  # bit i set iff binom(t, i) is odd
    row = np.zeros(max_cells, dtype=object)
    row[0] = 1  # binom(t, i) mod 2**(T - t), truncated to the window width

    for t in range(last + 1):
        precision = T - t
        modulus = (1 << precision) - 1
        lv = levels[t]
        if lv is not None:
            n = len(vals)
            state = _pack_bits(vals & 1)
            fixes = []

            def fix(k):
                nonlocal state
                fixes.append(k)
                state ^= (sier << k) & ((1 << n) - 1)

            if lv.first_sign is not None and lv.odd:
                kg = (lv.lo - 2 - base) // 2
                below = bin(state & ((1 << kg) - 1)).count("1") + left_odd
                want = (below + (0 if lv.first_sign > 0 else 1)) % 2
                if (state >> kg) & 1 != want:
                    fix(kg)
            k_lo = (lv.lo - base) // 2
            k_hi = (lv.hi - base) // 2
            target = 0
            for site in lv.odd:
                target |= 1 << ((site - base) // 2)
            span = ((1 << (k_hi + 1)) - 1) ^ ((1 << k_lo) - 1)
            diff = (state ^ target) & span
            while diff:
                k = (diff & -diff).bit_length() - 1
                fix(k)
                diff = (state ^ target) & span
            if fixes:
                start = fixes[0]
                rel = [k - start for k in fixes]
                update = _convolve_row(n - start, rel, row, precision)
                vals[start:] = (vals[start:] + np.array(update, dtype=object)) & modulus
                for k in fixes:
                    site = base + 2 * k + t
                    f0[site] = f0.get(site, 0) + (1 << t)
            if verify and _pack_bits(vals & 1) != state:
                raise InvariantViolation(f"parity bookkeeping diverged at level {t}")
        if t == last:
            break
        # advance one liar step on the window, tracking mass that leaves on the left
        stepped = liar_cells_step(vals, start_negative=bool(left_odd))
        new_lo, new_hi = reach[t + 1]
        cut = (new_lo - (base - 1)) // 2
        if cut < 1:
            raise InvariantViolation("forcing window moved left")
        left_odd = (left_odd + int(stepped[:cut].sum())) & 1
        keep = (new_hi - new_lo) // 2 + 1
        vals = stepped[cut:cut + keep] & (modulus >> 1)
        if len(vals) < keep:
            vals = np.concatenate([vals, np.zeros(keep - len(vals), dtype=object)])
        base = new_lo
        sier = (sier ^ (sier << 1)) & width_mask
        nxt = np.empty(max_cells, dtype=object)
        nxt[0] = 1
        nxt[1:] = row[1:] + row[:-1]
        row = nxt & (modulus >> 1)
    return f0


def force_parity(grid: ParityGrid, verify: bool = True) -> ChipConfiguration:
    """Initial configuration whose parities at sites 0..N-1, times 0..T-1 match the grid."""
    levels = []
    for t in range(grid.T):
        first = (grid.support_parity + t) % 2
        if first >= grid.N:
            levels.append(None)
            continue
        last = grid.N - 1 if (grid.N - 1 - first) % 2 == 0 else grid.N - 2
        odd = frozenset(n for n in range(first, last + 1, 2) if grid.bits[t][n])
        levels.append(_Level(first, last, odd))
    f0 = _forge(grid.T, levels, verify)
    return ChipConfiguration.from_dict(f0, parity=grid.support_parity)


def parity_mismatches(grid: ParityGrid, f0: ChipConfiguration) -> int:
    """Count grid cells whose simulated parity differs from the prescription."""
    bad = 0
    f = f0
    for t in range(grid.T):
        if t:
            f = liar_run(f, 1)
        for n in range(grid.N):
            if f[n] % 2 != grid.bits[t][n]:
                bad += 1
    return bad


# ---------------------------------------------------------------- adversaries


def _alternating_max(weights: np.ndarray) -> tuple[int, list[tuple[int, int]]]:
    """Maximize sum(sign_i * w_i) over sign patterns whose nonzero entries alternate.

    Some optimum uses + only at weak local maxima and - only at weak local
    minima (otherwise moving a term one step would improve it), so the
    dynamic program only scans those indices.
    """
    n = len(weights)
    if n == 0:
        return 0, []
    w = weights
    ge_prev = np.ones(n, dtype=bool)
    le_prev = np.ones(n, dtype=bool)
    ge_next = np.ones(n, dtype=bool)
    le_next = np.ones(n, dtype=bool)
    if n > 1:
        ge_prev[1:] = (w[1:] >= w[:-1]).astype(bool)
        le_prev[1:] = (w[1:] <= w[:-1]).astype(bool)
        ge_next[:-1] = (w[:-1] >= w[1:]).astype(bool)
        le_next[:-1] = (w[:-1] <= w[1:]).astype(bool)
    candidates = np.flatnonzero((ge_prev & ge_next) | (le_prev & le_next))
    best_val = {1: 0, -1: 0}
    best_node = {1: None, -1: None}
    parent = {}
    for i in candidates:
        i = int(i)
        wi = int(w[i])  # zero weights stay: they can flip the sign for free
        update = {}
        for sign in (1, -1):
            prev = best_node[-sign]
            if prev is not None and best_val[-sign] > 0:
                update[sign] = (sign * wi + best_val[-sign], prev)
            else:
                update[sign] = (sign * wi, None)
        for sign, (val, par) in update.items():
            if best_node[sign] is None or val > best_val[sign]:
                best_val[sign] = val
                best_node[sign] = (i, sign)
                parent[(i, sign)] = par
    ends = [(best_val[s], best_node[s]) for s in (1, -1) if best_node[s] is not None]
    if not ends:
        return 0, []
    value, node = max(ends, key=lambda e: e[0])
    if value <= 0:
        return 0, []
    chosen = []
    while node is not None:
        chosen.append(node)
        node = parent[node]
    chosen.reverse()
    return value, chosen


@dataclass(frozen=True)
class AdversarialPlan:
    """Target signs per time step and the discrepancy they produce at the target."""

    T: int
    target: int | IntervalSpec
    parity: int
    signs: tuple  # signs[t] = ((site, +-1), ...) left to right
    predicted_numerator: int  # 2**T * (f_T - g_T) at the target

    @property
    def predicted(self) -> Fraction:
        return Fraction(self.predicted_numerator, 1 << self.T)

    def levels(self) -> list[_Level]:
        out = []
        a, b = self._span()
        for t, signs in enumerate(self.signs):
            reach = self.T - t
            lo, hi = a - reach, b + reach
            first = signs[0][1] if signs else None
            out.append(_Level(lo, hi, frozenset(site for site, _ in signs), first if first else 1))
        return out

    def _span(self) -> tuple[int, int]:
        if isinstance(self.target, IntervalSpec):
            a = self.target.a
            b = self.target.b if (self.target.b - a) % 2 == 0 else self.target.b - 1
            return a, b
        return self.target, self.target


def adversarial_plan(T: int, target: int | IntervalSpec) -> AdversarialPlan:
    """Sign pattern maximizing the discrepancy at ``target`` after ``T`` steps.

    At time ``t`` (``s = T - 1 - t`` steps before the end) a sign at site
    ``j`` shifts the target by ``(binom(s, (s+a-j-1)/2) - binom(s, (s+b-j+1)/2)) / 2**(s+1)``,
    where ``a`` and ``b`` are the first and last target sites of the right
    parity.  Each slice is maximized independently.
    """
    if T < 1:
        raise ValueError("T must be positive")
    if isinstance(target, IntervalSpec):
        a = target.a
        b = target.b if target.B % 2 == 0 else target.b - 1
    else:
        a = b = int(target)
    parity = (a - T) % 2
    h = (b - a) // 2
    row = np.ones(1, dtype=object)  # binomial row s, built upward
    slices: list = [None] * T
    total = 0
    for s in range(T):
        t = T - 1 - s
        if s:
            nxt = np.empty(s + 1, dtype=object)
            nxt[0] = nxt[-1] = 1
            nxt[1:-1] = row[1:] + row[:-1]
            row = nxt
        n_cells = h + s + 2
        # W[i] = R[s - i] - R[s + 1 + h - i] for cells j = a - (s+1) + 2i
        padded = np.zeros(s + 1 + 2 * (h + 2) + 2, dtype=object)
        off = h + 2
        padded[off:off + s + 1] = row[::-1]  # padded[off + i] = R[s - i]
        first = padded[off:off + n_cells]
        second = padded[off - 1 - h:off - 1 - h + n_cells]
        weights = first - second
        value, chosen = _alternating_max(weights)
        lo = a - (s + 1)
        slices[t] = tuple((lo + 2 * i, sign) for i, sign in chosen)
        total += value << t
    return AdversarialPlan(T, target, parity, tuple(slices), total)


def adversarial_config(T: int, target: int | IntervalSpec, verify: bool = True) -> ChipConfiguration:
    """Initial configuration realizing ``adversarial_plan(T, target)``.

    Every cell in the backward light cone of the target is forced (odd where
    the plan puts a sign), and the cell just left of the cone is a guard
    that fixes the sign of the first odd cell.  The guard stays two sites
    outside the cone, so it never reaches the target before time ``T``.
    """
    plan = adversarial_plan(T, target)
    f0 = _forge(T, plan.levels(), verify)
    return ChipConfiguration.from_dict(f0, parity=plan.parity)


def realized_signs(f0: ChipConfiguration, plan: AdversarialPlan) -> list[tuple]:
    """Simulated nonzero signs inside the light cone at each time, for checking a plan."""
    out = []
    a, b = plan._span()
    base, cells = to_cells(f0)
    for t in range(plan.T):
        reach = plan.T - t
        signs = cell_signs(cells)
        out.append(tuple(
            (base + 2 * k, int(v)) for k, v in enumerate(signs)
            if v and a - reach <= base + 2 * k <= b + reach
        ))
        if t + 1 < plan.T:
            cells = liar_cells_step(cells)
            base -= 1
    return out
