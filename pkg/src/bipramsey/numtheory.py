"""Exact sieves for the multiplication table, H(x, y, z), and related bounds.

All logarithms are natural.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

# log log 2 is negative, so delta = 1 - (1 + ln ln 2)/ln 2 ~ 0.0861
FORD_DELTA = 1.0 - (1.0 + math.log(math.log(2.0))) / math.log(2.0)

DENSE_LIMIT = 10**9
# cache-sized; any segment length gives identical counts
SEGMENT_CELLS = 2**18


class BudgetError(ValueError):
    """Requested computation exceeds the configured memory or work budget."""


@dataclass(frozen=True)
class SizeSet:
    """Set of non-negative integers in [0, max_value], stored as an int bitmask."""

    max_value: int
    bits: int

    def __post_init__(self):
        if self.bits >> (self.max_value + 1):
            raise ValueError("SizeSet bits exceed max_value")

    def __repr__(self) -> str:
        return f"SizeSet(max_value={self.max_value}, cardinality={self.cardinality})"

    @classmethod
    def from_values(cls, values, max_value: int | None = None) -> "SizeSet":
        values = list(values)
        if max_value is None:
            max_value = max(values, default=0)
        bits = 0
        for v in values:
            bits |= 1 << v
        return cls(max_value, bits)

    @classmethod
    def from_bool_array(cls, arr: np.ndarray) -> "SizeSet":
        arr = np.asarray(arr, dtype=bool)
        raw = np.packbits(arr, bitorder="little").tobytes()
        return cls(len(arr) - 1, int.from_bytes(raw, "little"))

    def to_bool_array(self) -> np.ndarray:
        n = self.max_value + 1
        raw = self.bits.to_bytes((n + 7) // 8, "little")
        return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n].astype(bool)

    @property
    def cardinality(self) -> int:
        return self.bits.bit_count()

    def __len__(self) -> int:
        return self.cardinality

    def __contains__(self, v: int) -> bool:
        return 0 <= v <= self.max_value and bool(self.bits >> v & 1)

    def values(self) -> list[int]:
        return np.flatnonzero(self.to_bool_array()).tolist()

    def union(self, other: "SizeSet") -> "SizeSet":
        return SizeSet(max(self.max_value, other.max_value), self.bits | other.bits)

    def issubset(self, other: "SizeSet") -> bool:
        return self.bits & ~other.bits == 0


def multiplication_table(n: int, budget: int = DENSE_LIMIT) -> SizeSet:
    """M(n) = {a*b : 0 <= a, b <= n}, as a dense bit-vector."""
    if n < 0:
        raise ValueError("n must be non-negative")
    top = n * n
    if top + 1 > budget:
        raise BudgetError(f"M({n}) needs {top + 1} bits, budget is {budget}")
    arr = np.zeros(top + 1, dtype=bool)
    arr[0] = True
    for a in range(1, n + 1):
        # a*b for a <= b <= n
        arr[a * a : a * n + 1 : a] = True
    return SizeSet.from_bool_array(arr)


@numba.njit(cache=True)
def _count_mtable_segmented(n, segment):
    top = n * n
    total = 0
    buf = np.zeros(min(segment, top + 1), dtype=np.uint8)
    a_lo = 1
    lo = 0
    while lo <= top:
        hi = min(lo + segment, top + 1)
        w = hi - lo
        buf[:w] = 0
        if lo == 0:
            buf[0] = 1
        # products a*b (a <= b <= n) lie in [a*a, a*n]
        while a_lo <= n and a_lo * n < lo:
            a_lo += 1
        a = a_lo
        while a <= n and a * a < hi:
            i = max(a * a, ((lo + a - 1) // a) * a) - lo
            e = min(a * n, hi - 1) - lo
            while i <= e:
                buf[i] = 1
                i += a
            a += 1
        for i in range(w):
            total += buf[i]
        lo += segment
    return total


def multiplication_table_size(n: int, segment: int = SEGMENT_CELLS) -> int:
    """|M(n)| by segmented sieve; memory is one segment regardless of n."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return int(_count_mtable_segmented(n, segment))


def phi_complete_bipartite(a: int, b: int, budget: int = DENSE_LIMIT) -> int:
    """|{i*j : 0 <= i <= a, 0 <= j <= b}|."""
    if a < 0 or b < 0:
        raise ValueError("sides must be non-negative")
    a, b = min(a, b), max(a, b)
    top = a * b
    if top + 1 > budget:
        raise BudgetError(f"K_{{{a},{b}}} spectrum needs {top + 1} bits")
    arr = np.zeros(top + 1, dtype=bool)
    arr[0] = True
    for i in range(1, a + 1):
        arr[i : i * b + 1 : i] = True
    return int(np.count_nonzero(arr))


def hxyz(x: int, y: float, z: float, segment: int = SEGMENT_CELLS) -> int:
    """Count n in [1, x] having a divisor d with y < d <= z."""
    if x < 1:
        raise ValueError("x must be at least 1")
    d_lo = max(1, math.floor(y) + 1)
    d_hi = min(math.floor(z), x)
    if d_hi < d_lo:
        return 0
    total = 0
    for lo in range(1, x + 1, segment):
        hi = min(lo + segment, x + 1)
        buf = np.zeros(hi - lo, dtype=bool)
        for d in range(d_lo, d_hi + 1):
            first = -(-lo // d) * d
            if first < hi:
                buf[first - lo :: d] = True
        total += int(np.count_nonzero(buf))
    return total


def ford_estimate(n: int) -> float:
    """n^2 / ((ln n)^delta (ln ln n)^{3/2}), the order of |M(n)|."""
    if n < 16:
        raise ValueError("ford_estimate needs n >= 16")
    ln = math.log(n)
    return n * n / (ln**FORD_DELTA * math.log(ln) ** 1.5)


def phi_sandwich(d: int, m: int) -> tuple[int, int]:
    """(lower, upper) bounds on the positive sizes of K_{d, m/d} via H.

    Both bounds count positive integers only; compare them against
    ``phi_complete_bipartite(d, m // d) - 1``. They hold for every divisor
    d of m; the asymptotic estimate they feed assumes d <= sqrt(m).
    """
    if d < 1 or m % d:
        raise ValueError(f"d={d} must divide m={m}")
    lower = hxyz(m // 4, d / 4, d / 2) if m >= 4 else 0
    upper = 0
    k = 0
    while m >> k >= 1:
        upper += hxyz(m >> k, d / 2 ** (k + 1), d / 2**k)
        k += 1
    return lower, upper


def bipartite_ramsey_upper(p: int, q: int) -> int:
    """Binomial upper bound b(p, q) <= C(p+q, p) on bipartite Ramsey numbers."""
    if p < 1 or q < 1:
        raise ValueError("p, q must be positive")
    return math.comb(p + q, p)


def eq1_check(n: int, c: float, k: int) -> tuple[float, bool]:
    """Evaluate (k e)^{c ln n / ln k} and whether it is below sqrt(n)."""
    if n < 3 or k < 3:
        raise ValueError("need n, k >= 3")
    if not 0 < c < 1 / 6:
        raise ValueError("need 0 < c < 1/6")
    log_bound = c * math.log(n) / math.log(k) * (math.log(k) + 1.0)
    return math.exp(log_bound), log_bound < 0.5 * math.log(n)


def log_binomial(n: float, k: float) -> float:
    """ln C(n, k) for real arguments, via lgamma."""
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def ramsey_log_probability_bound(n: int, C: float) -> float:
    """ln(2 C(n,k)^2 2^{-k^2}) with k = C ln n; -inf when k > n."""
    if n < 3 or C <= 0:
        raise ValueError("need n >= 3 and C > 0")
    k = C * math.log(n)
    if k > n:
        return -math.inf
    return math.log(2.0) + 2.0 * log_binomial(n, k) - k * k * math.log(2.0)


def ramsey_probability_bound(n: int, C: float) -> float:
    """Union bound on P(G(n, n, 1/2) has an induced K_{k,k} or its complement)."""
    return math.exp(ramsey_log_probability_bound(n, C))
