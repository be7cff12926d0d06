"""Sieve-backed arithmetic functions, multiplicative rules and arithmetic sets.

Everything here is driven by a smallest-prime-factor table. Scalar helpers
(``omega``, ``eval_mult``, ``set_indicator``) mirror the vectorized ones
(``omega_values``, ``mult_values``, ``set_values``) which are what the rest of
the package uses on long ranges.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np

DEFAULT_MEMORY_BUDGET = 2**30  # bytes


class BudgetExceeded(ValueError):
    """A requested computation is larger than its configured budget."""


class TableRangeError(ValueError):
    """Raised when an argument falls outside the factor table."""


def e(x):
    """Additive character e(x) = exp(2 pi i x)."""
    return np.exp(2j * np.pi * np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class FactorTable:
    """Smallest-prime-factor table on ``0..n_max``.

    ``spf[0]`` and ``spf[1]`` hold the sentinel 0. The omega/Omega arrays are
    derived lazily and cached; the table itself is never mutated.
    """

    n_max: int
    spf: np.ndarray = field(repr=False)

    def check(self, n_hi):
        if n_hi > self.n_max:
            raise TableRangeError(
                f"argument {n_hi} exceeds factor table range n_max={self.n_max}; "
                "build a larger table"
            )

    @cached_property
    def primes(self) -> np.ndarray:
        idx = np.arange(self.n_max + 1)
        return idx[(self.spf == idx) & (idx >= 2)]

    @cached_property
    def _omega_pair(self):
        return _omega_counts(self.spf, np.arange(self.n_max + 1, dtype=np.int64))

    @property
    def omega_values(self) -> np.ndarray:
        """omega(n) for n = 0..n_max (entry 0 is meaningless)."""
        return self._omega_pair[0]

    @property
    def big_omega_values(self) -> np.ndarray:
        """Omega(n) for n = 0..n_max (entry 0 is meaningless)."""
        return self._omega_pair[1]


def build_factor_table(n_max: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> FactorTable:
    """Build the smallest-prime-factor table up to ``n_max``.

    Uses a vectorized Eratosthenes pass that only writes entries not yet
    claimed by a smaller prime, so each composite receives its least prime
    factor. The budget counts the int32 table plus the two cached int8 arrays.
    """
    n_max = int(n_max)
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    need = 6 * (n_max + 1)
    if need > memory_budget:
        raise BudgetExceeded(
            f"factor table up to {n_max} needs ~{need} bytes, over the "
            f"memory budget of {memory_budget} bytes"
        )
    if n_max >= 2**31:
        raise ValueError("n_max must fit in int32")
    spf = np.zeros(n_max + 1, dtype=np.int32)
    for p in range(2, math.isqrt(n_max) + 1):
        if spf[p]:
            continue
        seg = spf[p * p :: p]
        seg[seg == 0] = p
    idx = np.arange(n_max + 1, dtype=np.int32)
    free = spf == 0
    spf[free] = idx[free]
    spf[:2] = 0
    spf.setflags(write=False)
    return FactorTable(n_max, spf)


def _omega_counts(spf, n):
    m = np.array(n, dtype=np.int64, copy=True)
    om = np.zeros(m.shape, dtype=np.int8)
    big = np.zeros(m.shape, dtype=np.int8)
    last = np.zeros(m.shape, dtype=np.int64)
    active = np.nonzero(m > 1)[0]
    while active.size:
        p = spf[m[active]].astype(np.int64)
        big[active] += 1
        om[active] += p != last[active]
        last[active] = p
        m[active] //= p
        active = active[m[active] > 1]
    return om, big


def omega(table: FactorTable, n: int) -> int:
    """Number of distinct prime factors of ``n``."""
    return len(_factorize(table, n))


def big_omega(table: FactorTable, n: int) -> int:
    """Number of prime factors of ``n`` counted with multiplicity."""
    return sum(k for _, k in _factorize(table, n))


def _factorize(table, n):
    n = int(n)
    if n < 1:
        raise TableRangeError(f"n must be positive, got {n}")
    table.check(n)
    out = []
    while n > 1:
        p = int(table.spf[n])
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        out.append((p, k))
    return out


def factorize(table: FactorTable, n: int) -> list[tuple[int, int]]:
    """Prime-power factorization of ``n`` as ``[(p, k), ...]``."""
    return _factorize(table, n)


# ---------------------------------------------------------------------------
# multiplicative functions


@dataclass(frozen=True)
class MultiplicativeRule:
    """A multiplicative function given by its values on prime powers.

    ``rule(p, k)`` must accept numpy integer arrays (broadcast together) and
    return values of modulus at most 1.
    """

    rule: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = "f"
    completely_multiplicative: bool = False

    def at_prime_powers(self, p, k):
        p = np.asarray(p, dtype=np.int64)
        k = np.asarray(k, dtype=np.int64)
        return np.broadcast_to(np.asarray(self.rule(p, k), dtype=complex), np.broadcast(p, k).shape)

    def at_primes(self, p):
        return self.at_prime_powers(p, np.ones_like(np.asarray(p)))

    def __mul__(self, other: "MultiplicativeRule") -> "MultiplicativeRule":
        a, b = self.rule, other.rule
        return MultiplicativeRule(
            lambda p, k: np.asarray(a(p, k), dtype=complex) * np.asarray(b(p, k), dtype=complex),
            f"({self.label})*({other.label})",
            self.completely_multiplicative and other.completely_multiplicative,
        )

    def conjugate(self) -> "MultiplicativeRule":
        a = self.rule
        return MultiplicativeRule(
            lambda p, k: np.conj(np.asarray(a(p, k), dtype=complex)),
            f"conj({self.label})",
            self.completely_multiplicative,
        )

    def power(self, j: int) -> "MultiplicativeRule":
        """Pointwise power n -> f(n)**j (again multiplicative)."""
        a = self.rule
        return MultiplicativeRule(
            lambda p, k: np.asarray(a(p, k), dtype=complex) ** j,
            f"({self.label})^{j}",
            self.completely_multiplicative,
        )


def constant_one() -> MultiplicativeRule:
    return MultiplicativeRule(lambda p, k: np.ones(np.broadcast(p, k).shape), "one", True)


def liouville() -> MultiplicativeRule:
    return MultiplicativeRule(lambda p, k: (-1.0) ** k, "liouville", True)


def mobius() -> MultiplicativeRule:
    return MultiplicativeRule(lambda p, k: np.where(k == 1, -1.0, 0.0), "mobius")


def omega_root(zeta: complex) -> MultiplicativeRule:
    """f(p^k) = zeta for every prime power, so f(n) = zeta**omega(n)."""
    zeta = complex(zeta)
    return MultiplicativeRule(
        lambda p, k: np.full(np.broadcast(p, k).shape, zeta), f"omega_root({zeta:.6g})"
    )


def bigomega_root(zeta: complex) -> MultiplicativeRule:
    """f(p^k) = zeta**k, so f(n) = zeta**Omega(n)."""
    zeta = complex(zeta)
    return MultiplicativeRule(lambda p, k: zeta**k, f"bigomega_root({zeta:.6g})", True)


def unimodular_omega(alpha: float) -> MultiplicativeRule:
    """f(p^k) = e(alpha)."""
    return MultiplicativeRule(
        lambda p, k: np.broadcast_to(e(alpha), np.broadcast(p, k).shape),
        f"unimodular_omega({alpha:g})",
    )


def unimodular_bigomega(alpha: float) -> MultiplicativeRule:
    """f(p^k) = e(k alpha)."""
    return MultiplicativeRule(lambda p, k: e(k * alpha), f"unimodular_bigomega({alpha:g})", True)


def power_t(t: float) -> MultiplicativeRule:
    """The Archimedean character n -> n^{it}."""
    return MultiplicativeRule(
        lambda p, k: np.exp(1j * t * k * np.log(p.astype(float))), f"power_t({t:g})", True
    )


def squarefree_indicator() -> MultiplicativeRule:
    return MultiplicativeRule(lambda p, k: np.where(k == 1, 1.0, 0.0), "squarefree")


def dirichlet_rule(values: Sequence[complex], label: Optional[str] = None) -> MultiplicativeRule:
    """Completely multiplicative rule from a character value table ``values[n mod q]``."""
    vals = np.asarray(values, dtype=complex)
    q = len(vals)
    return MultiplicativeRule(
        lambda p, k: vals[np.asarray(p) % q] ** k, label or f"chi mod {q}", True
    )


def eval_mult(f: MultiplicativeRule, table: FactorTable, n: int) -> complex:
    """f(n) as the product of ``f.rule(p, k)`` over the factorization of n."""
    out = 1 + 0j
    for p, k in _factorize(table, n):
        out *= complex(f.at_prime_powers(p, k))
    return out


def mult_values(f: MultiplicativeRule, table: FactorTable, n) -> np.ndarray:
    """Vectorized f(n) for an integer array ``n`` (all entries >= 1)."""
    m = np.array(n, dtype=np.int64, copy=True).ravel()
    if m.size == 0:
        return np.zeros(np.shape(n), dtype=complex)
    if m.min() < 1:
        raise TableRangeError("arguments must be positive")
    table.check(int(m.max()))
    out = np.ones(m.shape, dtype=complex)
    active = np.nonzero(m > 1)[0]
    spf = table.spf
    while active.size:
        p = spf[m[active]].astype(np.int64)
        k = np.zeros(active.size, dtype=np.int64)
        sub = m[active]
        div = np.ones(active.size, dtype=bool)
        while div.any():
            sub[div] //= p[div]
            k[div] += 1
            div = sub % p == 0
        m[active] = sub
        out[active] *= f.at_prime_powers(p, k)
        active = active[sub > 1]
    return out.reshape(np.shape(n))


# ---------------------------------------------------------------------------
# arithmetic sets

SET_KINDS = ("omega_mod", "bigomega_mod", "omega_frac", "bigomega_frac", "squarefree", "custom")


@dataclass(frozen=True)
class ArithmeticSet:
    """One of the omega/Omega congruence or fractional sets, shifted by ``shift``.

    Modular kinds: ``residues`` is A and ``modulus`` is b. Fractional kinds:
    ``intervals`` is a list of closed intervals inside [0, 1/2] and ``alpha``
    the rotation number. ``custom`` sets carry a vectorized ``predicate`` on
    integer arrays and an optional known ``density``.
    """

    kind: str
    residues: tuple = ()
    modulus: int = 1
    intervals: tuple = ()
    alpha: float = 0.0
    shift: int = 0
    predicate: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    density_hint: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in SET_KINDS:
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.shift < 0:
            raise ValueError("shift must be non-negative")
        if self.kind.endswith("_mod"):
            if self.modulus < 1 or not self.residues:
                raise ValueError("modular sets need b >= 1 and a non-empty residue set")
            if any(not 0 <= a < self.modulus for a in self.residues):
                raise ValueError("residues must lie in 0..b-1")
        if self.kind.endswith("_frac"):
            for lo, hi in self.intervals:
                if not 0 <= lo <= hi <= 0.5:
                    raise ValueError(f"interval [{lo}, {hi}] not inside [0, 1/2]")
        if self.kind == "custom" and self.predicate is None:
            raise ValueError("custom sets need a predicate")

    @property
    def density(self) -> Optional[float]:
        """Limiting density of the set (shifts do not change it)."""
        if self.kind.endswith("_mod"):
            return len(set(self.residues)) / self.modulus
        if self.kind.endswith("_frac"):
            return min(1.0, 2 * _union_length(self.intervals))
        if self.kind == "squarefree":
            return 6 / math.pi**2
        return self.density_hint

    def shifted(self, c: int) -> "ArithmeticSet":
        from dataclasses import replace

        return replace(self, shift=self.shift + c, label=f"{self.label}+{c}" if self.label else "")

    def __str__(self):
        if self.label:
            return self.label
        if self.kind.endswith("_mod"):
            base = f"{self.kind.split('_')[0]}:{','.join(map(str, self.residues))}:{self.modulus}"
        elif self.kind.endswith("_frac"):
            ivs = ",".join(f"{lo:g}-{hi:g}" for lo, hi in self.intervals)
            base = f"{self.kind.split('_')[0]}frac:{ivs}:{self.alpha:g}"
        else:
            base = self.kind
        return base + (f"+{self.shift}" if self.shift else "")


def _union_length(intervals):
    total, cur_lo, cur_hi = 0.0, None, None
    for lo, hi in sorted(intervals):
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def omega_set(residues, b: int, shift: int = 0) -> ArithmeticSet:
    """S_{omega,A,b} + shift."""
    return ArithmeticSet("omega_mod", tuple(sorted(set(_as_tuple(residues)))), int(b), shift=shift)


def bigomega_set(residues, b: int, shift: int = 0) -> ArithmeticSet:
    """S_{Omega,A,b} + shift."""
    return ArithmeticSet("bigomega_mod", tuple(sorted(set(_as_tuple(residues)))), int(b), shift=shift)


def omega_frac_set(intervals, alpha: float, shift: int = 0) -> ArithmeticSet:
    return ArithmeticSet("omega_frac", intervals=tuple(map(tuple, intervals)), alpha=alpha, shift=shift)


def bigomega_frac_set(intervals, alpha: float, shift: int = 0) -> ArithmeticSet:
    return ArithmeticSet("bigomega_frac", intervals=tuple(map(tuple, intervals)), alpha=alpha, shift=shift)


def squarefree_set(shift: int = 0) -> ArithmeticSet:
    return ArithmeticSet("squarefree", shift=shift)


def periodic_set(residues, modulus: int) -> ArithmeticSet:
    """{n : n mod modulus in residues}; used as a non-uniform control."""
    res = np.zeros(modulus, dtype=bool)
    res[list(_as_tuple(residues))] = True
    return ArithmeticSet(
        "custom",
        predicate=lambda n: res[np.asarray(n) % modulus],
        density_hint=res.sum() / modulus,
        label=f"mod:{','.join(map(str, _as_tuple(residues)))}:{modulus}",
    )


def natural_numbers() -> ArithmeticSet:
    return ArithmeticSet(
        "custom", predicate=lambda n: np.ones(np.shape(n), dtype=bool), density_hint=1.0, label="all"
    )


def _as_tuple(x):
    if isinstance(x, (int, np.integer)):
        return (int(x),)
    return tuple(int(v) for v in x)


def _membership(S: ArithmeticSet, table: FactorTable, m: np.ndarray) -> np.ndarray:
    """Unshifted membership for an array of positive integers."""
    if S.kind == "custom":
        return np.asarray(S.predicate(m), dtype=bool)
    if S.kind == "squarefree":
        return table.omega_values[m] == table.big_omega_values[m]
    counts = (table.omega_values if S.kind.startswith("omega") else table.big_omega_values)[m]
    counts = counts.astype(np.int64)
    if S.kind.endswith("_mod"):
        ok = np.zeros(S.modulus, dtype=bool)
        ok[list(S.residues)] = True
        return ok[counts % S.modulus]
    x = counts * S.alpha
    dist = np.abs(x - np.round(x))
    hit = np.zeros(m.shape, dtype=bool)
    for lo, hi in S.intervals:
        hit |= (dist >= lo) & (dist <= hi)
    return hit


def set_values(S: ArithmeticSet, table: FactorTable, n) -> np.ndarray:
    """Vectorized 0/1 indicator of ``S`` at the integers ``n`` (n >= 1)."""
    n = np.asarray(n, dtype=np.int64)
    m = n - S.shift
    out = np.zeros(n.shape, dtype=np.int8)
    live = m >= 1
    if live.any():
        table.check(int(m[live].max()))
        out[live] = _membership(S, table, m[live])
    return out


def set_indicator(S: ArithmeticSet, table: FactorTable, n: int) -> int:
    """1 if n belongs to S (after its shift), else 0; n <= shift gives 0."""
    if n < 1:
        raise TableRangeError(f"n must be positive, got {n}")
    return int(set_values(S, table, np.array([n]))[0])


def roots_identity_residuals(a: int, b: int, table: FactorTable, n) -> np.ndarray:
    """|1_{S_{a,b}}(n) - (1/b) sum_j zeta^{-aj} f(n)^j| with f(p^k) = zeta = e(1/b)."""
    if not 0 <= a < b:
        raise ValueError("need 0 <= a < b")
    n = np.asarray(n, dtype=np.int64)
    zeta = cmath.exp(2j * math.pi / b)
    fn = mult_values(omega_root(zeta), table, n)
    rhs = np.zeros(n.shape, dtype=complex)
    for j in range(b):
        rhs += zeta ** (-a * j) * fn**j
    rhs /= b
    lhs = set_values(omega_set(a, b), table, n)
    return np.abs(lhs - rhs)


def roots_identity_residual(a: int, b: int, table: FactorTable, n: int) -> float:
    return float(roots_identity_residuals(a, b, table, np.array([n]))[0])


@dataclass(frozen=True)
class WeightVector:
    """Weights w(1..N); ``values[i]`` holds w(i + 1)."""

    values: np.ndarray
    cap: float = 1.0

    @property
    def N(self) -> int:
        return len(self.values)

    @property
    def bound(self) -> float:
        return float(np.abs(self.values).max()) if len(self.values) else 0.0

    def __post_init__(self):
        if self.bound > self.cap + 1e-9:
            raise ValueError(f"weight bound {self.bound} exceeds cap {self.cap}")


def weight_vector(
    source: Union[MultiplicativeRule, ArithmeticSet], table: FactorTable, N: int
) -> WeightVector:
    """Materialize f(1..N) or 1_S(1..N)."""
    table.check(N)
    n = np.arange(1, N + 1)
    if isinstance(source, MultiplicativeRule):
        return WeightVector(mult_values(source, table, n))
    if isinstance(source, ArithmeticSet):
        return WeightVector(set_values(source, table, n).astype(complex))
    raise TypeError(f"cannot build weights from {type(source).__name__}")


def set_density(S: ArithmeticSet, table: FactorTable, N: int) -> float:
    """Empirical density |S cap [1, N]| / N."""
    return float(set_values(S, table, np.arange(1, N + 1)).mean())
