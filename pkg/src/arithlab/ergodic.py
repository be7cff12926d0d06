"""Weighted polynomial multiple ergodic averages on finite systems.

A finite system is a set X = {0..|X|-1} with uniform measure and commuting
permutations T_1..T_l. Functions transform by (T F)(x) = F(T x), and for a
column j of the polynomial matrix

    V_n^{(j)} = (T_1^{p_{1j}(n)} o ... o T_l^{p_{lj}(n)}) F_j,   V_n = prod_j V_n^{(j)}.

Each T_i has finite order, so p_{ij}(n) only matters modulo that order and
V_n is periodic in n with period lcm_i ord(T_i). Averages over n <= N are
evaluated by bucketing the weights by n modulo that period whenever the
period is small enough; otherwise n is walked directly in blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .sieve import ArithmeticSet, BudgetExceeded, FactorTable, WeightVector, set_values
from .structure import Decomposition

MAX_POINTS = 1 << 22
_BLOCK_ELEMS = 1 << 22
_PERIOD_BUDGET = 1 << 27  # period * |X| cells for the bucketed path


@dataclass(frozen=True, eq=False)
class FiniteSystem:
    """Uniform probability space on |X| points with commuting bijections."""

    maps: tuple
    label: str = ""

    def __post_init__(self):
        maps = tuple(np.asarray(T, dtype=np.int64) for T in self.maps)
        if not maps:
            raise ValueError("a system needs at least one map")
        n = maps[0].size
        for i, T in enumerate(maps):
            if T.shape != (n,) or not np.array_equal(np.sort(T), np.arange(n)):
                raise ValueError(f"map {i} is not a bijection of the {n} points")
        for i in range(len(maps)):
            for j in range(i + 1, len(maps)):
                if not np.array_equal(maps[i][maps[j]], maps[j][maps[i]]):
                    raise ValueError(f"maps {i} and {j} do not commute")
        for T in maps:
            T.setflags(write=False)
        object.__setattr__(self, "maps", maps)

    @property
    def point_count(self) -> int:
        return self.maps[0].size

    @property
    def ell(self) -> int:
        return len(self.maps)

    @cached_property
    def _cycles(self):
        out = []
        for T in self.maps:
            n = T.size
            cid = np.full(n, -1, dtype=np.int64)
            pos = np.zeros(n, dtype=np.int64)
            order, starts, lengths = [], [], []
            for x0 in range(n):
                if cid[x0] >= 0:
                    continue
                c = len(lengths)
                starts.append(len(order))
                x, k = x0, 0
                while cid[x] < 0:
                    cid[x] = c
                    pos[x] = k
                    order.append(x)
                    x = T[x]
                    k += 1
                lengths.append(k)
            starts = np.asarray(starts, dtype=np.int64)
            lengths = np.asarray(lengths, dtype=np.int64)
            out.append((np.asarray(order, dtype=np.int64), starts[cid], pos, lengths[cid]))
        return out

    @cached_property
    def orders(self) -> tuple:
        """Order of each T_i (lcm of its cycle lengths)."""
        return tuple(int(np.lcm.reduce(np.unique(c[3]))) for c in self._cycles)

    def apply_power(self, i: int, k, x):
        """T_i^k x for integer arrays k, x (broadcast); k may be negative."""
        order, start, pos, length = self._cycles[i]
        x = np.asarray(x)
        L = length[x]
        return order[start[x] + (pos[x] + np.asarray(k) % L) % L]

    def power(self, i: int, k: int) -> np.ndarray:
        return self.apply_power(i, k, np.arange(self.point_count))


def make_product_rotation(moduli: Sequence[int], shifts: Sequence[Sequence[int]]) -> FiniteSystem:
    """X = Z_{m1} x ... x Z_{md} with T_i x = x + v_i (points in C order)."""
    moduli = tuple(int(m) for m in moduli)
    if any(m < 1 for m in moduli):
        raise ValueError("moduli must be positive")
    size = math.prod(moduli)
    if size > MAX_POINTS:
        raise BudgetExceeded(f"|X| = {size} exceeds the point budget {MAX_POINTS}")
    coords = np.indices(moduli).reshape(len(moduli), -1)
    maps = []
    for v in shifts:
        v = tuple(v)
        if len(v) != len(moduli):
            raise ValueError(f"shift {v} does not match dimension {len(moduli)}")
        moved = [(coords[d] + v[d]) % moduli[d] for d in range(len(moduli))]
        maps.append(np.ravel_multi_index(moved, moduli))
    return FiniteSystem(tuple(maps), f"rotation{moduli}")


def make_skew_product(M: int, a: int = 1) -> FiniteSystem:
    """X = Z_M^2, T(x, y) = (x + a, y + 2x + a), point index x*M + y.

    T^n(x, y) = (x + na, y + 2nx + n^2 a), so iterates carry a quadratic phase.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    x, y = np.divmod(np.arange(M * M), M)
    T = ((x + a) % M) * M + (y + 2 * x + a) % M
    return FiniteSystem((T,), f"skew({M},{a})")


# ---------------------------------------------------------------------------
# polynomials and observables


@dataclass(frozen=True)
class PolynomialMatrix:
    """Integer polynomials p_{ij}, i over maps, j over observables.

    ``coeffs[i][j]`` lists coefficients constant term first; ``()`` is zero.
    """

    coeffs: tuple

    def __post_init__(self):
        rows = tuple(tuple(tuple(int(c) for c in p) for p in row) for row in self.coeffs)
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("polynomial matrix must be rectangular")
        object.__setattr__(self, "coeffs", rows)

    @property
    def ell(self) -> int:
        return len(self.coeffs)

    @property
    def m(self) -> int:
        return len(self.coeffs[0])

    @property
    def max_degree(self) -> int:
        deg = 0
        for row in self.coeffs:
            for p in row:
                nz = [k for k, c in enumerate(p) if c]
                deg = max(deg, nz[-1] if nz else 0)
        return deg

    def zero_constants(self) -> bool:
        return all(not p or p[0] == 0 for row in self.coeffs for p in row)

    def value(self, i: int, j: int, n: int) -> int:
        """Exact p_{ij}(n); raises OverflowError outside the int64 range."""
        acc = 0
        for c in reversed(self.coeffs[i][j]):
            acc = acc * n + c
        if not -(2**63) <= acc < 2**63:
            raise OverflowError(f"p_{i}{j}({n}) = {acc} overflows 64 bits")
        return acc

    def values_mod(self, i: int, j: int, n: np.ndarray, modulus: int) -> np.ndarray:
        """p_{ij}(n) mod ``modulus`` by Horner's rule in int64."""
        if modulus >= 2**31:
            raise OverflowError("map order too large for exact int64 reduction")
        n = np.asarray(n, dtype=np.int64) % modulus
        acc = np.zeros(n.shape, dtype=np.int64)
        for c in reversed(self.coeffs[i][j]):
            acc = (acc * n + c) % modulus
        return acc

    @classmethod
    def diagonal(cls, ell: int, poly=(0, 1)) -> "PolynomialMatrix":
        """p_{ii} = poly, zero elsewhere: T_1^{p(n)} F_1 ... T_l^{p(n)} F_l."""
        return cls(tuple(tuple(poly if i == j else () for j in range(ell)) for i in range(ell)))

    @classmethod
    def single(cls, poly=(0, 1)) -> "PolynomialMatrix":
        return cls(((tuple(poly),),))


@dataclass(frozen=True)
class Observable:
    values: np.ndarray
    cap: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1:
            raise ValueError("observable must be a 1-d array over X")
        if np.abs(v).max(initial=0) > self.cap + 1e-12:
            raise ValueError(f"observable exceeds its bound {self.cap}")
        object.__setattr__(self, "values", v)

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.values).max(initial=0))


def random_unimodular(point_count: int, rng: np.random.Generator) -> Observable:
    return Observable(np.exp(2j * np.pi * rng.random(point_count)))


def _obs_values(obs):
    return [o.values if isinstance(o, Observable) else Observable(o).values for o in obs]


def _check_shapes(sys, polys, obs):
    if polys.ell != sys.ell:
        raise ValueError(f"polynomial matrix has {polys.ell} rows for {sys.ell} maps")
    if polys.m != len(obs):
        raise ValueError(f"polynomial matrix has {polys.m} columns for {len(obs)} observables")
    for F in obs:
        if F.size != sys.point_count:
            raise ValueError("observable length differs from |X|")


def _moves(sys, polys, obs, n):
    """V_n(x) for a batch of n (rows) and every x (columns)."""
    X = np.arange(sys.point_count)
    out = np.ones((n.size, sys.point_count), dtype=complex)
    for j, F in enumerate(obs):
        y = np.broadcast_to(X, out.shape)
        for i in reversed(range(sys.ell)):
            if not polys.coeffs[i][j]:
                continue
            k = polys.values_mod(i, j, n, sys.orders[i])
            y = sys.apply_power(i, k[:, None], y)
        out *= F[y]
    return out


def _period(sys, polys) -> int:
    per = 1
    for i in range(sys.ell):
        if any(polys.coeffs[i][j] for j in range(polys.m)):
            per = math.lcm(per, sys.orders[i])
    return per


def _raw_sums(sys, polys, obs, w: np.ndarray, cuts: Sequence[int]) -> list[np.ndarray]:
    """sum_{n <= N} w(n) V_n for each N in ``cuts`` (increasing)."""
    per = _period(sys, polys)
    Npts = sys.point_count
    out = []
    if per * Npts <= _PERIOD_BUDGET:
        n_all = np.arange(1, cuts[-1] + 1)
        acc = np.zeros(per, dtype=complex)
        prev = 0
        buckets = []
        for N in cuts:
            acc = acc + np.bincount(n_all[prev:N] % per, weights=w[prev:N].real, minlength=per) + 1j * np.bincount(
                n_all[prev:N] % per, weights=w[prev:N].imag, minlength=per
            )
            buckets.append(acc.copy())
            prev = N
        rows = max(1, _BLOCK_ELEMS // Npts)
        totals = [np.zeros(Npts, dtype=complex) for _ in cuts]
        for lo in range(0, per, rows):
            r = np.arange(lo, min(per, lo + rows))
            V = _moves(sys, polys, obs, r)
            for t, b in zip(totals, buckets):
                t += b[r] @ V
        return totals
    rows = max(1, _BLOCK_ELEMS // Npts)
    total = np.zeros(Npts, dtype=complex)
    prev = 0
    for N in cuts:
        for lo in range(prev, N, rows):
            n = np.arange(lo + 1, min(N, lo + rows) + 1)
            total += w[n - 1] @ _moves(sys, polys, obs, n)
        prev = N
        out.append(total.copy())
    return out


@dataclass(frozen=True)
class AverageResult:
    function: np.ndarray
    mean: complex
    l2: float


@dataclass(frozen=True)
class AverageTrace:
    N_list: tuple
    functions: tuple
    means: tuple
    l2_norms: tuple

    def rows(self):
        """(N, mean re, mean im, L2) tuples for export."""
        return [(N, m.real, m.imag, l) for N, m, l in zip(self.N_list, self.means, self.l2_norms)]


def _result(vec) -> AverageResult:
    return AverageResult(vec, complex(vec.mean()), float(np.sqrt(np.mean(np.abs(vec) ** 2))))


def _weights(w) -> np.ndarray:
    return np.asarray(w.values if isinstance(w, WeightVector) else w, dtype=complex)


def weighted_average_trace(sys, polys, obs, w, N_list) -> AverageTrace:
    """A_N(w) = (1/N) sum_{n<=N} w(n) V_n for every N in ``N_list``."""
    obs = _obs_values(obs)
    _check_shapes(sys, polys, obs)
    w = _weights(w)
    cuts = sorted({int(N) for N in N_list})
    if cuts[0] < 1 or cuts[-1] > w.size:
        raise ValueError(f"N must lie in 1..{w.size} (length of the weight)")
    sums = _raw_sums(sys, polys, obs, w, cuts)
    res = [_result(s / N) for s, N in zip(sums, cuts)]
    return AverageTrace(
        tuple(cuts), tuple(r.function for r in res), tuple(r.mean for r in res), tuple(r.l2 for r in res)
    )


def weighted_average(sys, polys, obs, w, N: int) -> AverageResult:
    """(1/N) sum_{n<=N} w(n) prod_j (prod_i T_i^{p_ij(n)}) F_j, exactly on X."""
    tr = weighted_average_trace(sys, polys, obs, w, [N])
    return AverageResult(tr.functions[0], tr.means[0], tr.l2_norms[0])


def restricted_vs_scaled(
    sys, polys, obs, S: ArithmeticSet, N: int, table: FactorTable, density: Optional[float] = None
) -> float:
    """|| (1/N) sum_{n in S, n<=N} V_n - d (1/N) sum_{n<=N} V_n ||_{L^2}, d = density of S."""
    d = S.density if density is None else density
    if d is None:
        raise ValueError("set has no known density; pass density=")
    w = set_values(S, table, np.arange(1, N + 1)) - d
    return weighted_average(sys, polys, obs, w, N).l2


@dataclass(frozen=True)
class RecurrenceResult:
    good: np.ndarray
    N: int
    density: float
    lower_density: float


def recurrence_scan(
    sys: FiniteSystem,
    A,
    polys: PolynomialMatrix,
    S: ArithmeticSet,
    N: int,
    table: FactorTable,
    include_base: bool = True,
) -> RecurrenceResult:
    """n in S cap [1, N] with mu(A cap T^{-p_1(n)} A cap ... ) > 0.

    ``A`` is a boolean mask or an index list. With ``include_base`` the set A
    itself is intersected as well (the zero polynomial term). The lower
    density is min over M in [N/2, N] of |good cap [1, M]| / M.
    """
    if not polys.zero_constants():
        raise ValueError("recurrence needs polynomials with zero constant term")
    mask = np.zeros(sys.point_count, dtype=bool)
    mask[np.asarray(A)] = True
    if not mask.any():
        raise ValueError("A must have positive measure")
    ind = mask.astype(complex)
    obs = [ind] * polys.m
    _check_shapes(sys, polys, obs)
    per = _period(sys, polys)
    meas = np.empty(per)
    rows = max(1, _BLOCK_ELEMS // sys.point_count)
    for lo in range(0, per, rows):
        r = np.arange(lo, min(per, lo + rows))
        V = _moves(sys, polys, obs, r).real
        if include_base:
            V = V * mask[None, :]
        meas[r] = V.mean(axis=1)
    n = np.arange(1, N + 1)
    ok = (meas[n % per] > 0) & (set_values(S, table, n) > 0)
    good = n[ok]
    counts = np.cumsum(ok)
    lo = max(1, N // 2)
    lower = float(np.min(counts[lo - 1 :] / np.arange(lo, N + 1)))
    return RecurrenceResult(good, N, float(ok.mean()), lower)


def default_degree(polys: PolynomialMatrix) -> int:
    """Gowers degree used for a polynomial family: 2 for linear, 3 for quadratic, ..."""
    return max(2, polys.max_degree + 1)


def uniformity_bound_experiment(sys, polys, obs, w, s: Optional[int], N: int, **kw) -> tuple[float, float]:
    """(||A_N(w)||_{L^2}, ||1_[N] w||_{U^s(Z_{sN})})."""
    from .gowers import restricted_norm

    s = default_degree(polys) if s is None else s
    wv = _weights(w)[:N]
    lhs = weighted_average(sys, polys, obs, wv, N).l2
    return lhs, restricted_norm(wv, s, s * N, **kw)


def partial_summation_check(alpha: float, beta, N: int) -> tuple[complex, complex]:
    """((1/N) sum_{n<=N} e(n alpha / M), c) with M = N / beta.

    c = (1/beta) int_0^beta e(alpha y) dy.
    """
    beta = Fraction(beta).limit_denominator(10**9)
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    M = Fraction(N) / beta
    if M.denominator != 1:
        raise ValueError(f"N / beta = {M} is not an integer")
    M = int(M)
    n = np.arange(1, N + 1)
    mean = complex(np.mean(np.exp(2j * np.pi * alpha * n / M)))
    # (e(x) - 1) / (2 pi i x) = e(x/2) sinc(x), stable as x -> 0
    ab = alpha * float(beta)
    c = np.exp(1j * np.pi * ab) * np.sinc(ab)
    return mean, complex(c)


def structured_weight_average(sys, polys, obs, dec: Decomposition, N_list) -> AverageTrace:
    """A_N(f_st) for N in ``N_list`` (each N <= dec.N)."""
    if max(N_list) > dec.N:
        raise ValueError(f"N must not exceed the decomposition length {dec.N}")
    return weighted_average_trace(sys, polys, obs, dec.st_on_interval, N_list)
