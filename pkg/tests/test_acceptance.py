"""Acceptance gate: every criterion at its stated tolerance and time limit.

Each test records one PASS/FAIL line, printed in the terminal summary. The
shared factor table is built once per session and excluded from timings.
"""

import math
import time
from fractions import Fraction

import numpy as np

from arithlab.cli import main
from arithlab.combinatorics import LinearFormSystem, find_ipk, linear_forms_density, validate_ipk
from arithlab.ergodic import (
    Observable,
    PolynomialMatrix,
    make_product_rotation,
    make_skew_product,
    partial_summation_check,
    random_unimodular,
    recurrence_scan,
    restricted_vs_scaled,
    weighted_average_trace,
)
from arithlab.gowers import gowers_uniform_profile, restricted_norm, u2_via_spectrum, u_norm
from arithlab.pretentious import distance_trace, mean_value_trace
from arithlab.sieve import (
    constant_one,
    liouville,
    omega_set,
    periodic_set,
    power_t,
    roots_identity_residuals,
    set_density,
    weight_vector,
)
from arithlab.structure import KernelParams, admissible_decomposition, next_admissible_prime

from conftest import ACCEPTANCE_LINES


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def record(k, ok, detail, elapsed, limit):
    in_time = limit is None or elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    budget = f"{elapsed:.2f}s" + (f" < {limit}s" if limit is not None else "")
    ACCEPTANCE_LINES.append(f"CRITERION {k}: {status} {detail} [{budget}{'' if in_time else ' TOO SLOW'}]")
    assert ok, detail
    assert in_time, f"criterion {k} took {elapsed:.2f}s, limit {limit}s"


def test_criterion_01_density_law(table):
    with Timer() as t:
        worst = {}
        for b in range(2, 7):
            worst[b] = max(abs(set_density(omega_set(a, b), table, 10**6) - 1 / b) for a in range(b))
    bad = {b: round(v, 4) for b, v in worst.items() if v >= 0.01}
    detail = "max |density - 1/b| at N=1e6: " + ", ".join(f"b={b}: {v:.4f}" for b, v in worst.items())
    record(1, not bad, detail, t.elapsed, 5)


def test_criterion_02_roots_identity(table):
    with Timer() as t:
        n = np.arange(1, 10**4 + 1)
        worst = max(roots_identity_residuals(a, b, table, n).max() for b in range(2, 7) for a in range(b))
    record(2, worst <= 1e-12, f"max residual {worst:.2e}", t.elapsed, 5)


def test_criterion_03_gowers_dual_path():
    rng = np.random.default_rng(2024)
    sizes = [256, 512, 1024, 2048, 4096]
    worst = 0.0
    with Timer() as t:
        for i in range(100):
            N = sizes[i % len(sizes)]
            a = rng.normal(size=N) + 1j * rng.normal(size=N)
            spec = u2_via_spectrum(a)
            for base in ("fft", "direct"):
                worst = max(worst, abs(u_norm(a, 2, base=base) - spec) / spec)
    record(3, worst < 1e-9, f"max relative error {worst:.2e} over 100 signals", t.elapsed, 30)


def test_criterion_04_character_norms():
    N = 1024
    n = np.arange(N)
    worst = 0.0
    with Timer() as t:
        for xi in (0, 1, 3, 100, 777):
            chi = np.exp(2j * np.pi * n * xi / N)
            for s in (2, 3):
                worst = max(worst, abs(u_norm(chi, s) - 1))
    record(4, worst < 1e-9, f"max |norm - 1| = {worst:.2e}", t.elapsed, 60)


def test_criterion_05_aperiodic_decay(table):
    with Timer() as t:
        vals = {}
        for N in (2**11, 2**17):
            vals[N] = restricted_norm(weight_vector(liouville(), table, N), 2, 2 * N)
    lo, hi = vals[2**11], vals[2**17]
    record(5, hi < 0.2 and hi < lo / 2, f"U2(Z_2N) at 2^11: {lo:.4f}, at 2^17: {hi:.4f}", t.elapsed, 60)


def test_criterion_06_uniform_set(table):
    with Timer() as t:
        prof = dict(gowers_uniform_profile(omega_set(0, 2), 2, [2**11, 2**17], table))
        evens = dict(gowers_uniform_profile(periodic_set(0, 2), 2, [2**11, 2**17], table))
    lo, hi = prof[2**11], prof[2**17]
    ok = hi < 0.2 and hi < lo and min(evens.values()) > 0.4
    detail = f"omega parity {lo:.4f} -> {hi:.4f}; evens min {min(evens.values()):.4f}"
    record(6, ok, detail, t.elapsed, 60)


def test_criterion_07_decomposition(table):
    params = KernelParams(2, 3)
    with Timer() as t:
        dec = admissible_decomposition(liouville(), table, 2**15, params, s=2)
        res, st, un, leak = dec.reconstruction_residual(), dec.st_bound(), dec.un_bound(), dec.off_arc_leakage()
    from arithlab.structure import major_arcs

    size = len(major_arcs(dec.N, params))
    ok = (
        dec.N == next_admissible_prime(2, 2**15, 2)
        and res <= 1e-9
        and st <= 1 + 1e-9
        and un <= 2 + 1e-9
        and leak <= 1e-12
        and size == 12
    )
    detail = f"N={dec.N} residual {res:.1e}, max|f_st| {st:.4f}, max|f_un| {un:.4f}, leakage {leak:.1e}, |Xi|={size}"
    record(7, ok, detail, t.elapsed, 10)


def test_criterion_08_restricted_average(table):
    rng = np.random.default_rng(8)
    z7 = make_product_rotation((7,), ((1,), (3,)))
    obs = [random_unimodular(7, rng), random_unimodular(7, rng)]
    with Timer() as t:
        val = restricted_vs_scaled(z7, PolynomialMatrix.diagonal(2), obs, omega_set(0, 2), 10**5, table)
    record(8, val < 0.01, f"L2 gap {val:.5f}", t.elapsed, 10)


def test_criterion_09_skew_product(table):
    M = 64
    sk = make_skew_product(M, 1)
    F = Observable(np.exp(2j * np.pi * (np.arange(M * M) % M) / M))  # F(x, y) = e(y / M)
    with Timer() as t:
        w = weight_vector(liouville(), table, 10**6)
        tr = weighted_average_trace(sk, PolynomialMatrix.single(), [F], w, [10**4, 10**6])
    small, big = tr.l2_norms
    record(9, big < 0.1 and big < small, f"L2 at 1e4: {small:.5f}, at 1e6: {big:.5f}", t.elapsed, 30)


def test_criterion_10_recurrence(table):
    z6 = make_product_rotation((6,), ((1,),))
    with Timer() as t:
        res = recurrence_scan(z6, [0], PolynomialMatrix.single(), omega_set(0, 2, shift=1), 10**5, table)
    record(10, res.density > 0.05, f"good-n density {res.density:.4f} (lower {res.lower_density:.4f})", t.elapsed, 10)


def test_criterion_11_mean_value_oracle(table):
    with Timer() as t:
        ((N, v),) = mean_value_trace(power_t(1.0), 1, 0, [10**6], table)
        err = abs(v - N**1j / (1 + 1j))
    record(11, err < 0.01, f"|mean - N^i/(1+i)| = {err:.2e}", t.elapsed, 5)


def test_criterion_12_distance_growth(table):
    with Timer() as t:
        tr = distance_trace(liouville(), constant_one(), [10**3, 10**6], table)
        gap = float(tr.partial_sums[1] - tr.partial_sums[0])
    # 2 log(log 1e6 / log 1e3) = 2 log 2 from Mertens' theorem
    record(12, gap > 0.5, f"D^2 growth {gap:.4f} (Mertens value {2 * math.log(2):.4f})", t.elapsed, 5)


def test_criterion_13_partial_summation():
    with Timer() as t:
        mean, _ = partial_summation_check(1.0, Fraction(1, 2), 10**5)
        err = abs(mean - 2j / math.pi)
    record(13, err < 0.01, f"|mean - 2i/pi| = {err:.2e}", t.elapsed, 1)


def test_criterion_14_linear_forms(table):
    with Timer() as t:
        d = linear_forms_density(LinearFormSystem(((1, 1), (1, 2))), omega_set(0, 2), 2000, table)
    record(14, abs(d - 0.25) < 0.02, f"density {d:.5f} vs 1/4", t.elapsed, 30)


def test_criterion_15_ipk(table):
    S = omega_set(0, 2, shift=1)
    with Timer() as t:
        gens = find_ipk(S, 3, 10**4, table)
        ok = gens is not None and max(gens) <= 10**4 and validate_ipk(S, gens, table)
    record(15, ok, f"generators {gens}", t.elapsed, 30)


def test_criterion_16_reproducible_output(tmp_path):
    base = ["simulate", "--system", "skew", "--M", "16", "--f", "liouville", "--N", "1000,20000", "--seed", "5"]
    parts, ok = [], True
    with Timer() as t:
        for fmt in ("csv", "json"):
            paths = [tmp_path / f"run{i}.{fmt}" for i in range(2)]
            codes = [main(base + ["--format", fmt, "--out", str(p)]) for p in paths]
            same = codes == [0, 0] and paths[0].read_bytes() == paths[1].read_bytes()
            ok &= same
            parts.append(f"{fmt} byte-identical {same}")
    record(16, ok, ", ".join(parts), t.elapsed, None)
