"""Gowers U^s(Z_N) norms, the 1/N-normalized DFT, and uniformity profiles.

Conventions: every average over Z_N carries the factor 1/N, a sequence w(1..N)
sits on Z_M at position n mod M, and

    ||a||_{U^1}           = |E_n a(n)|
    ||a||_{U^{s+1}}^{2^{s+1}} = E_t ||a * conj(a_t)||_{U^s}^{2^s},  a_t(n) = a(n+t).

The inductive evaluation keeps 2^s-th powers throughout and only takes the
root at the end. At s = 2 the inner U^1 step over all shifts is an
autocorrelation, computed by FFT (``base="fft"``) or literally shift by shift
(``base="direct"``, O(N^2), used as an independent check).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

from .sieve import ArithmeticSet, BudgetExceeded, FactorTable, WeightVector, set_values

S_MAX = 4
_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class CyclicSignal:
    """A complex function on Z_N stored as ``values[n]`` for n = 0..N-1."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("a cyclic signal is a non-empty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("signal values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.values.size

    @classmethod
    def from_sequence(cls, w, M: Optional[int] = None) -> "CyclicSignal":
        """Place w(1..N) on Z_M (default M = N) at positions n mod M."""
        vals = np.asarray(w.values if isinstance(w, WeightVector) else w, dtype=complex)
        N = vals.size
        M = N if M is None else int(M)
        if M < N:
            raise ValueError(f"modulus M={M} is smaller than the sequence length N={N}")
        out = np.zeros(M, dtype=complex)
        out[np.arange(1, N + 1) % M] = vals
        return cls(out)


@dataclass(frozen=True)
class Spectrum:
    """Coefficients f^(xi) = (1/N) sum_n f(n) e(-n xi / N), xi in Z_N."""

    coefficients: np.ndarray

    @property
    def N(self) -> int:
        return self.coefficients.size


SignalLike = Union[CyclicSignal, np.ndarray, list]


def _values(signal: SignalLike) -> np.ndarray:
    if isinstance(signal, CyclicSignal):
        return signal.values
    return CyclicSignal(np.asarray(signal)).values


def dft(signal: SignalLike) -> Spectrum:
    a = _values(signal)
    return Spectrum(np.fft.fft(a) / a.size)


def idft(spectrum: Union[Spectrum, np.ndarray]) -> CyclicSignal:
    c = spectrum.coefficients if isinstance(spectrum, Spectrum) else np.asarray(spectrum, dtype=complex)
    return CyclicSignal(np.fft.ifft(c) * c.size)


# ---------------------------------------------------------------------------
# norms


def _u2_power_rows(B: np.ndarray, base: str) -> np.ndarray:
    """Row-wise ||b||_{U^2}^4 for a 2-d batch."""
    N = B.shape[1]
    if base == "fft":
        F = np.fft.fft(B, axis=1)
        # c(t) = E_n b(n) conj(b(n+t)) up to conjugation
        c = np.fft.ifft(F.real**2 + F.imag**2, axis=1) / N
    else:
        c = np.empty_like(B)
        for t in range(N):
            c[:, t] = np.mean(B * np.conj(np.roll(B, -t, axis=1)), axis=1)
    return np.mean(c.real**2 + c.imag**2, axis=1)


def _power_rows(B: np.ndarray, s: int, base: str) -> np.ndarray:
    if s == 1:
        m = B.mean(axis=1)
        return m.real**2 + m.imag**2
    if s == 2:
        return _u2_power_rows(B, base)
    return np.array([_power(row, s, base) for row in B])


def _shift_products(a: np.ndarray, ts: np.ndarray) -> np.ndarray:
    N = a.size
    idx = (np.arange(N)[None, :] + ts[:, None]) % N
    return a[None, :] * np.conj(a[idx])


def _power(a: np.ndarray, s: int, base: str, workers: int = 1) -> float:
    """||a||_{U^s}^{2^s}."""
    N = a.size
    if s <= 2:
        return float(_power_rows(a[None, :], s, base)[0])
    # a*conj(a_{-t}) is a shifted conjugate of a*conj(a_t): same norm, so
    # only t in 0..N//2 is evaluated, the interior with weight 2.
    half = N // 2
    weights = np.full(half + 1, 2.0)
    weights[0] = 1.0
    if N % 2 == 0:
        weights[half] = 1.0
    rows = max(1, _CHUNK_ELEMS // N)
    chunks = [np.arange(lo, min(half + 1, lo + rows)) for lo in range(0, half + 1, rows)]

    def work(ts):
        return float(weights[ts] @ _power_rows(_shift_products(a, ts), s - 1, base))

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(work, chunks))
    else:
        total = sum(work(ts) for ts in chunks)
    return total / N


def u_norm(
    signal: SignalLike, s: int, *, s_max: int = S_MAX, base: str = "fft", workers: int = 1
) -> float:
    """Gowers U^s(Z_N) norm by the inductive shift formula.

    Cost is O(N^{s-1} log N) with the FFT base; keep N <= 2**12 at s = 4.
    ``base="direct"`` replaces the FFT autocorrelation by an explicit O(N^2)
    loop over shifts.
    """
    _check(s, s_max, base)
    p = _power(_values(signal), s, base, workers)
    return max(p, 0.0) ** (1.0 / 2**s)


def _check(s, s_max, base):
    if s < 1:
        raise ValueError("degree s must be at least 1")
    if s > s_max:
        raise BudgetExceeded(
            f"U^{s} needs O(N^{s - 1} log N) work by the inductive formula; "
            f"s_max is {s_max} (raise it explicitly if you accept the cost)"
        )
    if base not in ("fft", "direct"):
        raise ValueError(f"unknown base {base!r}")


def u2_via_spectrum(signal: SignalLike) -> float:
    """||a||_{U^2} from the identity ||a||_{U^2}^4 = sum_xi |a^(xi)|^4."""
    c = dft(signal).coefficients
    return float(np.sum(np.abs(c) ** 4)) ** 0.25


def restricted_norm(w, s: int, M: int, **kw) -> float:
    """U^s(Z_M) norm of w(1..N) zero-extended to Z_M (M >= N)."""
    return u_norm(CyclicSignal.from_sequence(w, M), s, **kw)


def gowers_uniform_profile(
    S: ArithmeticSet,
    s: int,
    N_list: Iterable[int],
    table: FactorTable,
    density: Optional[float] = None,
    **kw,
) -> list[tuple[int, float]]:
    """(N, ||1_S - c||_{U^s(Z_N)}) for each N.

    ``c`` defaults to the limiting density of S; sets without a known density
    fall back to the empirical density on [1, max N].
    """
    N_list = [int(N) for N in N_list]
    top = max(N_list)
    table.check(top - S.shift if top > S.shift else 1)
    ind = set_values(S, table, np.arange(1, top + 1)).astype(float)
    c = density if density is not None else S.density
    if c is None:
        c = float(ind.mean())
    return [(N, u_norm(CyclicSignal.from_sequence(ind[:N] - c), s, **kw)) for N in N_list]


def linf_l1_bound_check(
    signal: SignalLike, s: int, *, s_max: int = S_MAX, base: str = "fft"
) -> tuple[float, float]:
    """Both sides of ||a||_{U^s}^{2^s} <= ||a||_inf^{2^s - 1} ||a||_{L^1(Z_N)}."""
    _check(s, s_max, base)
    a = _values(signal)
    lhs = max(_power(a, s, base), 0.0)
    mod = np.abs(a)
    rhs = float(mod.max()) ** (2**s - 1) * float(mod.mean())
    return lhs, rhs
