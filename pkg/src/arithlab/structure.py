"""Major arcs, the triangular kernel on Z_N, and the structured/uniform split.

For integers Q, V >= 1 and N > 2QV the frequency set is

    Xi = { xi in Z_N : ||Q xi / N|| < QV / N },

written as the disjoint union over p = 0..Q-1 of the blocks
{ floor(pN/Q) + j mod N : -V < j <= V }. The kernel phi has Fourier
coefficients 1 - ||Q xi/N|| N/(QV) on Xi and 0 elsewhere, and the structured
part of f is the Z_N convolution

    f_st(n) = (1/N) sum_m f_N(m) phi(n - m) = sum_xi f^(xi) phi^(xi) e(n xi / N).

The 1/N normalization makes an average-one kernel fix constants. Q and V are
plain inputs; nothing here derives them from a precision parameter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Union

import numpy as np
from sympy import isprime

from .gowers import CyclicSignal, Spectrum, dft, idft
from .sieve import FactorTable, MultiplicativeRule, WeightVector, mult_values


@dataclass(frozen=True)
class KernelParams:
    Q: int
    V: int
    theta_label: Optional[str] = None

    def __post_init__(self):
        if self.Q < 1 or self.V < 1:
            raise ValueError(f"Q and V must be positive, got Q={self.Q}, V={self.V}")


def _require(N: int, params: KernelParams):
    if N <= 2 * params.Q * params.V:
        raise ValueError(
            f"N={N} must exceed 2QV={2 * params.Q * params.V} for the major arcs to be disjoint"
        )


@dataclass(frozen=True)
class MajorArcs:
    N: int
    params: KernelParams
    blocks: tuple  # blocks[p] lists floor(pN/Q) + j mod N for j = -V+1..V

    @property
    def members(self) -> np.ndarray:
        return np.sort(np.concatenate(self.blocks))

    def __len__(self):
        return sum(len(b) for b in self.blocks)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.N, dtype=bool)
        m[self.members] = True
        return m


def major_arcs(N: int, params: KernelParams) -> MajorArcs:
    _require(N, params)
    Q, V = params.Q, params.V
    j = np.arange(-V + 1, V + 1)
    blocks = tuple(((p * N) // Q + j) % N for p in range(Q))
    return MajorArcs(N, params, blocks)


def strict_major_arcs(N: int, params: KernelParams) -> np.ndarray:
    """The frequencies with ||Q xi / N|| < QV / N, straight from the definition."""
    _require(N, params)
    r = (params.Q * np.arange(N, dtype=np.int64)) % N
    dist = np.minimum(r, N - r)
    return np.nonzero(dist < params.Q * params.V)[0]


def kernel_spectrum(N: int, params: KernelParams) -> Spectrum:
    """phi^(xi) = 1 - ||Q xi/N|| N/(QV) on the major arcs, 0 elsewhere.

    ||Q xi / N|| * N is the integer distance of Q xi to N Z, so each value is an
    exact rational 1 - d/(QV) rounded once.
    """
    arcs = major_arcs(N, params)
    xi = arcs.members.astype(np.int64)
    r = (params.Q * xi) % N
    d = np.minimum(r, N - r)
    coeff = np.zeros(N, dtype=complex)
    coeff[xi] = 1.0 - d / (params.Q * params.V)
    return Spectrum(coeff)


@dataclass(frozen=True)
class Kernel:
    signal: CyclicSignal
    average: float
    min_real: float
    max_abs_imag: float

    @property
    def is_kernel(self) -> bool:
        """Non-negative (to 1e-9) with average one."""
        return self.min_real >= -1e-9 and abs(self.average - 1) <= 1e-9 and self.max_abs_imag <= 1e-9


def kernel_signal(N: int, params: KernelParams) -> Kernel:
    """phi(n) = sum_xi phi^(xi) e(n xi / N), with its non-negativity measured."""
    phi = idft(kernel_spectrum(N, params))
    v = phi.values
    return Kernel(phi, float(v.mean().real), float(v.real.min()), float(np.abs(v.imag).max()))


@dataclass(frozen=True)
class Decomposition:
    """f on [N] split as f_st + f_un; f_st lives on Z_N, f_un on [N] (index n-1)."""

    N: int
    params: KernelParams
    f_N: CyclicSignal
    f_st: CyclicSignal
    f_un: np.ndarray

    @property
    def f_on_interval(self) -> np.ndarray:
        return self.f_N.values[np.arange(1, self.N + 1) % self.N]

    @property
    def st_on_interval(self) -> np.ndarray:
        return self.f_st.values[np.arange(1, self.N + 1) % self.N]

    def reconstruction_residual(self) -> float:
        return float(np.abs(self.st_on_interval + self.f_un - self.f_on_interval).max())

    def st_bound(self) -> float:
        return float(np.abs(self.f_st.values).max())

    def un_bound(self) -> float:
        return float(np.abs(self.f_un).max())

    def off_arc_leakage(self) -> float:
        """Largest |f_st^(xi)| over xi outside the major arcs."""
        spec = dft(self.f_st).coefficients
        outside = ~major_arcs(self.N, self.params).mask()
        return float(np.abs(spec[outside]).max()) if outside.any() else 0.0

    def to_csv(self, fh) -> None:
        """Rows n, Re/Im of f, f_st, f_un for n = 1..N."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "f_re", "f_im", "st_re", "st_im", "un_re", "un_im"])
        f, st = self.f_on_interval, self.st_on_interval
        for n in range(self.N):
            w.writerow(
                [n + 1]
                + [repr(float(x)) for x in (f[n].real, f[n].imag, st[n].real, st[n].imag, self.f_un[n].real, self.f_un[n].imag)]
            )


def decompose(
    f_vals: Union[WeightVector, np.ndarray], N: int, params: KernelParams
) -> Decomposition:
    """f_st = f_N * phi (normalized Z_N convolution, via FFT) and f_un = f - f_st on [N]."""
    _require(N, params)
    vals = np.asarray(f_vals.values if isinstance(f_vals, WeightVector) else f_vals, dtype=complex)
    if vals.size < N:
        raise ValueError(f"need at least N={N} values, got {vals.size}")
    f_N = CyclicSignal.from_sequence(vals[:N])
    st = idft(dft(f_N).coefficients * kernel_spectrum(N, params).coefficients)
    f_un = vals[:N] - st.values[np.arange(1, N + 1) % N]
    return Decomposition(N, params, f_N, st, f_un)


@lru_cache(maxsize=256)
def next_admissible_prime(s: int, N: int, Q: int) -> int:
    """Smallest prime P with P > sN and P = 1 mod Q."""
    if min(s, N, Q) < 1:
        raise ValueError("s, N and Q must be positive")
    m = s * N + 1
    m += (1 - m) % Q
    while not isprime(m):
        m += Q
    return m


def admissible_decomposition(
    f: MultiplicativeRule, table: FactorTable, N: int, params: KernelParams, s: int = 2
) -> Decomposition:
    """Decompose f on [P] with P = next_admissible_prime(s, N, Q)."""
    P = next_admissible_prime(s, N, params.Q)
    return decompose(mult_values(f, table, np.arange(1, P + 1)), P, params)


def major_arc_fourier_trace(
    f: MultiplicativeRule,
    Q: int,
    p: int,
    xi_prime: int,
    N_list: Iterable[int],
    table: FactorTable,
) -> list[tuple[int, complex]]:
    """(N, (1/N) sum_{n<=N} f(n) e(-n xi_N / N)) with xi_N = pN/Q + xi'/Q real."""
    N_list = [int(N) for N in N_list]
    fv = mult_values(f, table, np.arange(1, max(N_list) + 1))
    out = []
    for N in N_list:
        n = np.arange(1, N + 1, dtype=np.int64)
        # n xi_N / N = n p / Q + n xi' / (Q N); the first part reduced exactly
        phase = ((n * p) % Q) / Q + n * (xi_prime / (Q * N))
        out.append((N, complex(np.mean(fv[:N] * np.exp(-2j * np.pi * phase)))))
    return out
