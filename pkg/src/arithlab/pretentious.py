"""Pretentious distance, mean-value traces and a heuristic aperiodicity scan.

D(f, g)^2 = sum_{p <= P} (1/p) (1 - Re f(p) conj(g(p))), always truncated at a
finite prime cutoff. ``classify`` scans D(f chi, n^{it}) over primitive
characters chi of small modulus and a grid of t; its verdict is evidence,
not proof.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Optional

import numpy as np
from scipy import sparse

from .characters import primitive_characters
from .sieve import FactorTable, MultiplicativeRule, mult_values


def _primes_upto(table: FactorTable, P: int) -> np.ndarray:
    table.check(P)
    pr = table.primes
    return pr[: np.searchsorted(pr, P, side="right")]


def _terms(f, g, P, table):
    p = _primes_upto(table, P)
    z = f.at_primes(p) * np.conj(g.at_primes(p))
    return p, (1.0 - z.real) / p


def halasz_distance_sq(
    f: MultiplicativeRule, g: MultiplicativeRule, P: int, table: FactorTable
) -> float:
    """Truncated D(f, g)^2 over primes p <= P."""
    return float(_terms(f, g, P, table)[1].sum())


@dataclass(frozen=True)
class DistanceTrace:
    cutoffs: np.ndarray
    partial_sums: np.ndarray


def distance_trace(
    f: MultiplicativeRule, g: MultiplicativeRule, cutoffs: Iterable[int], table: FactorTable
) -> DistanceTrace:
    cutoffs = np.asarray(sorted(int(c) for c in cutoffs))
    p, terms = _terms(f, g, int(cutoffs[-1]), table)
    csum = np.concatenate([[0.0], np.cumsum(terms)])
    return DistanceTrace(cutoffs, csum[np.searchsorted(p, cutoffs, side="right")])


def triangle_residuals(f1, f2, g1, g2, P: int, table: FactorTable) -> tuple[float, float]:
    """(D(f1 f2, g1 g2), D(f1, g1) + D(f2, g2)) at cutoff P."""
    lhs = math.sqrt(max(halasz_distance_sq(f1 * f2, g1 * g2, P, table), 0.0))
    rhs = math.sqrt(max(halasz_distance_sq(f1, g1, P, table), 0.0)) + math.sqrt(
        max(halasz_distance_sq(f2, g2, P, table), 0.0)
    )
    return lhs, rhs


def mean_value_trace(
    f: MultiplicativeRule, a: int, b: int, N_list: Iterable[int], table: FactorTable
) -> list[tuple[int, complex]]:
    """(N, (1/N) sum_{n<=N} f(an + b)) for each N."""
    N_list = [int(N) for N in N_list]
    top = max(N_list)
    table.check(a * top + b)
    vals = mult_values(f, table, a * np.arange(1, top + 1, dtype=np.int64) + b)
    csum = np.cumsum(vals)
    return [(N, complex(csum[N - 1] / N)) for N in N_list]


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ClassifyOptions:
    """Scan grid and verdict thresholds.

    The scan is repeated at the cutoffs sqrt(P) and P. ``growth`` is the rise
    of the grid minimum between them: bounded for a genuine pretender, about
    c log 2 for an aperiodic function.
    """

    t_min: float = -4.0
    t_max: float = 4.0
    t_step: float = 0.01
    q_max: int = 12
    P: int = 10**6
    pretentious_threshold: float = 1.0
    growth_tol: float = 0.02
    growth_margin: float = 0.15

    def t_grid(self) -> np.ndarray:
        n = int(round((self.t_max - self.t_min) / self.t_step))
        return np.round(self.t_min + self.t_step * np.arange(n + 1), 12)


@dataclass
class Classification:
    verdict: str  # "aperiodic-evidence", "pretentious" or "inconclusive"
    t: float
    modulus: int
    character_index: int
    distance_sq: float
    distance_sq_at_root: float
    growth: float
    mean_zero_at_2: Optional[bool] = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _character_bank(q_max):
    """Primitive characters mod q <= q_max, with L = lcm(1..q_max)."""
    L = math.lcm(*range(1, q_max + 1))
    bank = []
    for q in range(1, q_max + 1):
        for i, chi in enumerate(primitive_characters(q)):
            bank.append((q, i, chi))
    return L, bank


def distance_grid(
    f: MultiplicativeRule, table: FactorTable, options: ClassifyOptions = ClassifyOptions()
):
    """D(f chi, n^{it})^2 for every primitive chi mod q <= q_max and t on the grid.

    Returns ``(bank, t_grid, D2)`` with ``D2[c, k]`` for character ``bank[c]``.
    Primes are bucketed by residue mod lcm(1..q_max) since chi(p) only depends
    on that residue; the t-grid is walked in blocks t0 + j dt so only one
    exponential row is evaluated per block.
    """
    p = _primes_upto(table, options.P)
    logp = np.log(p.astype(float))
    wf = f.at_primes(p) / p
    base = float(np.sum(1.0 / p))
    L, bank = _character_bank(options.q_max)
    uniq, inv = np.unique(p % L, return_inverse=True)
    R = sparse.csr_matrix((np.ones(p.size), (inv, np.arange(p.size))), shape=(uniq.size, p.size))
    X = np.array([chi[uniq % q] for q, _, chi in bank])
    ts = options.t_grid()
    D2 = np.empty((len(bank), ts.size))
    block = int(min(ts.size, max(1, (1 << 21) // p.size)))
    steps = np.exp(-1j * np.outer(options.t_step * np.arange(block), logp)) * wf[None, :]
    for lo in range(0, ts.size, block):
        hi = min(ts.size, lo + block)
        E = steps[: hi - lo] * np.exp(-1j * ts[lo] * logp)[None, :]
        G = R @ E.T  # residues x t
        D2[:, lo:hi] = base - (X @ G).real
    return bank, ts, D2


def classify(
    f: MultiplicativeRule, table: FactorTable, options: ClassifyOptions = ClassifyOptions()
) -> Classification:
    """Heuristic verdict from the (chi, t) distance scan at sqrt(P) and P.

    pretentious: grid minimum at P within ``pretentious_threshold`` and no
    growth beyond ``growth_tol``. aperiodic-evidence: the minimum at P
    exceeds the minimum at sqrt(P) by ``growth_margin``. Anything else is
    inconclusive. For a pretentious witness (chi, t) the condition
    (f chi)(2^k) = -2^{ikt}, k <= 40, is checked as well; it decides whether
    the mean value of f chi vanishes.
    """
    bank, ts, D2 = distance_grid(f, table, options)
    root = replace(options, P=max(2, math.isqrt(options.P)))
    d_root = float(distance_grid(f, table, root)[2].min())
    c, k = np.unravel_index(np.argmin(D2), D2.shape)
    q, idx, chi = bank[c]
    t = float(ts[k])
    dmin = float(D2[c, k])
    growth = dmin - d_root
    if dmin <= options.pretentious_threshold and growth <= options.growth_tol:
        verdict = "pretentious"
    elif growth >= options.growth_margin:
        verdict = "aperiodic-evidence"
    else:
        verdict = "inconclusive"
    zero_mean = None
    if verdict == "pretentious":
        kk = np.arange(1, 41)
        lhs = f.at_prime_powers(np.full(40, 2), kk) * chi[2 % q] ** kk
        zero_mean = bool(np.allclose(lhs, -np.exp(1j * kk * t * math.log(2)), atol=1e-12, rtol=0))
    return Classification(
        verdict, t, int(q), int(idx), dmin, d_root, growth, zero_mean, asdict(options)
    )
