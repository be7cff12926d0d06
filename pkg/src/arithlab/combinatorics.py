"""Linear-form pattern counts, IP_k witnesses and APs with restricted differences."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .sieve import ArithmeticSet, FactorTable, set_indicator, set_values

_CHUNK_ELEMS = 1 << 22


@dataclass(frozen=True)
class LinearFormSystem:
    """Integer linear forms L_i(m) = sum_k c_ik m_k on N^d, pairwise independent."""

    forms: tuple

    def __post_init__(self):
        forms = tuple(tuple(int(c) for c in f) for f in self.forms)
        if not forms:
            raise ValueError("need at least one form")
        d = len(forms[0])
        if d == 0 or any(len(f) != d for f in forms):
            raise ValueError("all forms must have the same positive arity")
        if any(not any(f) for f in forms):
            raise ValueError("zero form")
        for f, g in itertools.combinations(forms, 2):
            # proportional iff every 2x2 minor vanishes
            if all(f[i] * g[j] == f[j] * g[i] for i in range(d) for j in range(i + 1, d)):
                raise ValueError(f"forms {f} and {g} are proportional")
        object.__setattr__(self, "forms", forms)

    @property
    def d(self) -> int:
        return len(self.forms[0])

    @property
    def ell(self) -> int:
        return len(self.forms)

    def max_value(self, N: int) -> int:
        return max(sum(c * N for c in f if c > 0) for f in self.forms)


def linear_forms_density(
    forms: LinearFormSystem, S: ArithmeticSet, N: int, table: FactorTable, workers: int = 1
) -> float:
    """(1/N^d) #{m in [N]^d : L_i(m) in S for every i}; values <= 0 count as misses."""
    top = forms.max_value(N)
    if top < 1:
        return 0.0
    ind = np.zeros(top + 1, dtype=bool)
    ind[1:] = set_values(S, table, np.arange(1, top + 1)) > 0
    C = np.asarray(forms.forms, dtype=np.int64)  # ell x d
    d = forms.d
    inner = np.indices((N,) * (d - 1)).reshape(d - 1, -1) + 1 if d > 1 else np.zeros((0, 1), dtype=np.int64)
    base = C[:, 1:] @ inner  # ell x N^{d-1}
    rows = max(1, _CHUNK_ELEMS // (base.shape[1] * forms.ell))

    def count(lo, hi):
        m1 = np.arange(lo, hi)[:, None, None]
        vals = C[None, :, 0:1] * m1 + base[None, :, :]
        ok = np.all(ind[np.clip(vals, 0, top)] & (vals >= 1), axis=1)
        return int(ok.sum())

    spans = [(lo, min(N + 1, lo + rows)) for lo in range(1, N + 1, rows)]
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            total = sum(pool.map(lambda s: count(*s), spans))
    else:
        total = sum(count(*s) for s in spans)
    return total / N**d


def subset_sums(gens: Sequence[int]) -> list[int]:
    """All 2^k - 1 nonempty subset sums."""
    out = []
    for r in range(1, len(gens) + 1):
        out.extend(sum(c) for c in itertools.combinations(gens, r))
    return out


def validate_ipk(S: ArithmeticSet, gens: Sequence[int], table: FactorTable) -> bool:
    """Every nonempty subset sum of ``gens`` lies in S, checked one by one."""
    return len(set(gens)) == len(gens) and all(set_indicator(S, table, x) for x in subset_sums(gens))


def find_ipk(S: ArithmeticSet, k: int, bound: int, table: FactorTable) -> Optional[tuple]:
    """Generators a_1 < ... < a_k <= bound whose subset sums all lie in S.

    Candidates are ordered by their largest generator, then depth-first in
    increasing order below it, so the witness minimizes a_k first.
    """
    if not 1 <= k <= 5:
        raise ValueError("k must lie in 1..5")
    ind = np.zeros(k * bound + 1, dtype=bool)
    ind[1:] = set_values(S, table, np.arange(1, k * bound + 1)) > 0
    members = np.nonzero(ind[: bound + 1])[0]

    def extend(chosen, sums, top):
        if len(chosen) == k - 1:
            cand = sums + [0]
            if all(ind[s + top] for s in cand):
                return tuple(chosen) + (top,)
            return None
        lo = chosen[-1] + 1 if chosen else 1
        for g in members[(members >= lo) & (members < top)]:
            g = int(g)
            if all(ind[s + g] for s in sums):
                got = extend(chosen + [g], sums + [s + g for s in sums] + [g], top)
                if got:
                    return got
        return None

    for top in members:
        got = extend([], [], int(top))
        if got:
            return got
    return None


def validate_ap(E: np.ndarray, S: ArithmeticSet, table: FactorTable, start: int, diff: int, k: int) -> bool:
    terms = start + diff * np.arange(k)
    E = np.asarray(E, dtype=bool)
    return bool(terms[-1] <= E.size and E[terms - 1].all() and set_indicator(S, table, diff))


def ap_search(E, k: int, S: ArithmeticSet, table: FactorTable) -> Optional[tuple[int, int]]:
    """First (start, difference) with start + j*diff in E for j < k and diff in S.

    ``E`` is a boolean indicator of a subset of [N] (index n - 1). Differences
    run over S cap [1, N/k] ascending; starts ascending within each.
    """
    E = np.asarray(E, dtype=bool)
    N = E.size
    if k < 1:
        raise ValueError("k must be positive")
    if E.sum() < k:
        return None
    dmax = N // k
    if dmax < 1:
        return None
    diffs = np.nonzero(set_values(S, table, np.arange(1, dmax + 1)))[0] + 1
    for d in diffs:
        d = int(d)
        span = N - (k - 1) * d
        if span < 1:
            continue
        ok = E[:span].copy()
        for j in range(1, k):
            ok &= E[j * d : j * d + span]
        hit = np.flatnonzero(ok)
        if hit.size:
            return int(hit[0]) + 1, d
    return None
