import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from arithlab.gowers import (
    CyclicSignal,
    dft,
    gowers_uniform_profile,
    idft,
    linf_l1_bound_check,
    restricted_norm,
    u2_via_spectrum,
    u_norm,
)
from arithlab.sieve import BudgetExceeded, omega_set, periodic_set


def brute_power(a, s):
    """||a||_{U^s}^{2^s} straight from the cube average over (n, h_1..h_s)."""
    N = len(a)
    total = 0.0
    for n in range(N):
        for h in itertools.product(range(N), repeat=s):
            prod = 1.0 + 0j
            for w in itertools.product((0, 1), repeat=s):
                x = a[(n + sum(wi * hi for wi, hi in zip(w, h))) % N]
                prod *= np.conj(x) if sum(w) % 2 else x
            total += prod
    return (total / N ** (s + 1)).real


complex_signals = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, n, elements=st.floats(-1, 1)), arrays(np.float64, n, elements=st.floats(-1, 1))
    )
)


@given(complex_signals)
def test_u2_three_routes_agree(pair):
    a = pair[0] + 1j * pair[1]
    fft, direct, spec = u_norm(a, 2), u_norm(a, 2, base="direct"), u2_via_spectrum(a)
    assert fft == pytest.approx(spec, rel=1e-9, abs=1e-12)
    assert direct == pytest.approx(spec, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("N", [5, 7, 8])
def test_u3_matches_cube_average(N):
    rng = np.random.default_rng(N)
    a = rng.normal(size=N) + 1j * rng.normal(size=N)
    assert u_norm(a, 3) ** 8 == pytest.approx(brute_power(a, 3), rel=1e-9)
    assert u_norm(a, 2) ** 4 == pytest.approx(brute_power(a, 2), rel=1e-9)


def test_u4_matches_cube_average():
    rng = np.random.default_rng(0)
    a = np.exp(2j * np.pi * rng.random(5))
    assert u_norm(a, 4) ** 16 == pytest.approx(brute_power(a, 4), rel=1e-9)


def test_u1_is_absolute_mean():
    assert u_norm([1, 2, 3], 1) == pytest.approx(2.0)


@given(complex_signals)
def test_norms_are_monotone_in_s(pair):
    a = pair[0] + 1j * pair[1]
    u1, u2, u3 = (u_norm(a, s) for s in (1, 2, 3))
    assert u1 <= u2 * (1 + 1e-9) + 1e-12
    assert u2 <= u3 * (1 + 1e-9) + 1e-12


@given(complex_signals, st.integers(2, 3))
def test_linf_l1_bound(pair, s):
    a = pair[0] + 1j * pair[1]
    lhs, rhs = linf_l1_bound_check(a, s)
    assert lhs <= rhs * (1 + 1e-9) + 1e-15


@pytest.mark.parametrize("s", [2, 3])
def test_characters_and_constants(s):
    N = 96
    n = np.arange(N)
    for xi in (0, 1, 17):
        assert u_norm(np.exp(2j * np.pi * n * xi / N), s) == pytest.approx(1.0, abs=1e-12)
    assert u_norm(np.full(N, 0.5), s) == pytest.approx(0.5, abs=1e-12)
    # a quadratic phase is invisible to U^2 but saturates U^3
    q = np.exp(2j * np.pi * n**2 / N)
    if s == 3:
        assert u_norm(q, 3) == pytest.approx(1.0, abs=1e-12)


def test_quadratic_phase_small_u2():
    N = 97
    n = np.arange(N)
    assert u_norm(np.exp(2j * np.pi * n**2 / N), 2) == pytest.approx(N**-0.25, rel=1e-9)


def test_threads_do_not_change_result():
    a = np.random.default_rng(2).normal(size=300)
    assert u_norm(a, 3, workers=4) == u_norm(a, 3, workers=1)


def test_s_max_guard():
    with pytest.raises(BudgetExceeded):
        u_norm(np.ones(8), 5)
    assert u_norm(np.ones(4), 5, s_max=5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        u_norm(np.ones(4), 0)
    with pytest.raises(ValueError):
        u_norm(np.ones(4), 2, base="slow")


def test_signal_validation_and_placement():
    with pytest.raises(ValueError):
        CyclicSignal(np.array([]))
    with pytest.raises(ValueError):
        CyclicSignal(np.array([1.0, np.nan]))
    sig = CyclicSignal.from_sequence([10, 20, 30], M=5)
    assert sig.values.real.tolist() == [0, 10, 20, 30, 0]
    assert CyclicSignal.from_sequence([1, 2, 3]).values.real.tolist() == [3, 1, 2]
    with pytest.raises(ValueError):
        CyclicSignal.from_sequence([1, 2, 3], M=2)


@given(complex_signals)
def test_dft_roundtrip_and_parseval(pair):
    a = pair[0] + 1j * pair[1]
    c = dft(a).coefficients
    assert np.allclose(idft(c).values, a, atol=1e-12)
    assert np.sum(np.abs(c) ** 2) == pytest.approx(np.mean(np.abs(a) ** 2), rel=1e-9, abs=1e-15)


def test_dft_normalization():
    N = 8
    c = dft(np.exp(2j * np.pi * 3 * np.arange(N) / N)).coefficients
    assert c[3] == pytest.approx(1.0) and np.abs(np.delete(c, 3)).max() < 1e-12


def test_restricted_norm_zero_extension():
    w = np.ones(4)
    assert restricted_norm(w, 2, 4) == pytest.approx(1.0)
    # zero-extended block of length 4 in Z_8: ||.||^4 = sum |hat|^4
    assert restricted_norm(w, 2, 8) == pytest.approx(u2_via_spectrum(CyclicSignal.from_sequence(w, 8)))


def test_profile_uniform_vs_periodic(table):
    prof = gowers_uniform_profile(omega_set(0, 2), 2, [2**11, 2**13], table)
    assert prof[1][1] < prof[0][1] < 0.2
    evens = gowers_uniform_profile(periodic_set(0, 2), 2, [2**10], table)
    assert evens[0][1] == pytest.approx(0.5)
