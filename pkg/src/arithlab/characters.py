"""Dirichlet characters as value tables ``chi[n mod q]``."""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from sympy import factorint, primitive_root


def _cyclic_components(q):
    """(modulus, generator, order) triples whose product is (Z/qZ)^*, before CRT lifting."""
    comps = []
    for p, k in sorted(factorint(q).items()):
        pk = p**k
        if p == 2:
            if k == 2:
                comps.append((pk, 3, 2))
            elif k >= 3:
                comps.append((pk, pk - 1, 2))
                comps.append((pk, 5, 2 ** (k - 2)))
        else:
            comps.append((pk, primitive_root(pk), pk - pk // p))
    return comps


@lru_cache(maxsize=None)
def dirichlet_characters(q: int) -> tuple:
    """All phi(q) characters mod q; the principal character comes first."""
    if q < 1:
        raise ValueError("modulus must be positive")
    if q == 1:
        return (np.ones(1, dtype=complex),)
    comps = _cyclic_components(q)
    units = [n for n in range(q) if math.gcd(n, q) == 1]
    # discrete logs of every unit with respect to the component generators
    logs = np.zeros((len(units), len(comps)), dtype=np.int64)
    by_modulus = {}
    for i, (m, g, order) in enumerate(comps):
        by_modulus.setdefault(m, []).append(i)
    for m, idxs in by_modulus.items():
        table = {}
        ranges = [range(comps[i][2]) for i in idxs]
        for exps in itertools.product(*ranges):
            x = 1
            for i, ex in zip(idxs, exps):
                x = x * pow(comps[i][1], ex, m) % m
            table[x] = exps
        for row, n in enumerate(units):
            logs[row, idxs] = table[n % m]
    orders = [c[2] for c in comps]
    chars = []
    for ks in itertools.product(*[range(o) for o in orders]):
        phase = sum(logs[:, i] * ks[i] / orders[i] for i in range(len(orders)))
        vals = np.zeros(q, dtype=complex)
        vals[units] = np.exp(2j * np.pi * np.asarray(phase, dtype=float))
        vals[np.abs(vals.imag) < 1e-15] = vals[np.abs(vals.imag) < 1e-15].real
        chars.append(vals)
    return tuple(chars)


def is_primitive(chi: np.ndarray) -> bool:
    q = len(chi)
    for d in range(1, q):
        if q % d:
            continue
        ns = [n for n in range(1, q, d) if math.gcd(n, q) == 1]
        if all(abs(chi[n] - 1) < 1e-9 for n in ns):
            return False
    return True


@lru_cache(maxsize=None)
def primitive_characters(q: int) -> tuple:
    return tuple(chi for chi in dirichlet_characters(q) if is_primitive(chi))
