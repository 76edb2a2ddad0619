"""Correlation estimator: oracles, invariants, caching, backends."""

import hashlib
import math
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

import substrum.estimator as est
from substrum import _kernels
from substrum.core import fixed_point_prefix, seed_letter
from substrum.corpus import load
from substrum.estimator import (
    ball_mass,
    birkhoff_growth,
    correlations,
    dimension_fit,
    expected_zero_coefficient,
    mean_under_frequencies,
    pair_correlations,
    point_mass_at_zero,
    renormalization_check,
)

TM = load("thue_morse")
EX61 = load("bijective_nonabelian")
RS = load("rudin_shapiro")


def tm_autocorrelation(K):
    """Exact autocorrelation of the +/-1 Thue-Morse sequence.

    gamma(0) = 1 and gamma(1) = -1/3 seed the recursion
    gamma(2n) = gamma(n), gamma(2n+1) = -(gamma(n) + gamma(n+1))/2,
    which follows from splitting the defining sum over even/odd indices.
    """
    memo = {0: Fraction(1), 1: Fraction(-1, 3)}

    def gamma(n):
        if n not in memo:
            if n % 2 == 0:
                memo[n] = gamma(n // 2)
            else:
                memo[n] = -(gamma((n - 1) // 2) + gamma((n + 1) // 2)) / 2
        return memo[n]

    return [gamma(k) for k in range(K + 1)]


def test_thue_morse_autocorrelation_oracle(cache_dir):
    K, L = 64, 10**5
    table = correlations(TM, (1, -1), K, L, cache_dir)
    oracle = tm_autocorrelation(K)
    for k in range(K + 1):
        assert abs(table.sigma[k].real - float(oracle[k])) <= 64 / L
        assert abs(table.sigma[k].imag) == 0.0


def test_pair_correlations_near_hermitian(cache_dir):
    # sigma_ab(k) should match the reversed-pair estimate over the shifted
    # window [k, L+k); the two windows share all but k terms, so the gap is
    # at most k/L <= 10/L for the lags checked here.
    K, L = 8, 10**5
    table = pair_correlations(TM, K, L, cache_dir)
    u = fixed_point_prefix(TM, *seed_letter(TM), L + K)
    m = TM.size
    for k in range(K + 1):
        for a in range(m):
            for b in range(m):
                shifted = np.mean((u[k : L + k] == b) & (u[: L] == a))
                assert abs(table.sigma[k, b, a] - shifted) <= 10 / L


def test_diagonal_zero_lag_sums_to_one(cache_dir):
    for z in (TM, EX61, RS):
        table = pair_correlations(z, 16, 10**4, cache_dir)
        total = sum(table.sigma[0, a, a].real for a in range(z.size))
        assert total == pytest.approx(1.0, abs=1e-12)
        # off-diagonal entries at lag zero count impossible events
        off = sum(
            abs(table.sigma[0, a, b])
            for a in range(z.size)
            for b in range(z.size)
            if a != b
        )
        assert off == 0.0


@pytest.mark.parametrize(
    "name,f",
    [("thue_morse", (1, -1)), ("rudin_shapiro", (1, -1, -1, 1))],
)
def test_toeplitz_minors_nonnegative(cache_dir, name, f):
    # positive semidefiniteness of the empirical correlation, checked on
    # leading principal minors of the Toeplitz matrix up to order 4
    z = load(name)
    table = correlations(z, f, 16, 10**5, cache_dir)
    for order in range(1, 5):
        T = np.empty((order, order), dtype=complex)
        for i in range(order):
            for j in range(order):
                d = i - j
                T[i, j] = table.sigma[d] if d >= 0 else np.conj(table.sigma[-d])
        assert np.linalg.det(T).real >= -1e-6


def test_zero_coefficient_matches_expected(cache_dir):
    # holds at rate O(1/L) when |f|^2 is orthogonal to the slow eigenvectors
    for z, f in [(TM, (1, -1)), (EX61, (1, -1, 0, 0))]:
        L = 10**5
        table = correlations(z, f, 16, L, cache_dir)
        assert abs(table.sigma[0].real - expected_zero_coefficient(z, f)) <= 10 / L


def test_zero_coefficient_slow_case(cache_dir):
    # |f|^2 = 1_letter has a component along the second eigenvector, so the
    # empirical zero coefficient converges only like L^(log_3(2) - 1); at
    # L=1e5 the gap sits near 2.5e-4, well outside 10/L.  Pin the slow rate
    # loosely rather than pretending the fast bound applies.
    L = 10**5
    table = correlations(EX61, (1, 0, 0, 0), 16, L, cache_dir)
    gap = abs(table.sigma[0].real - expected_zero_coefficient(EX61, (1, 0, 0, 0)))
    assert gap <= 0.05


def test_expected_zero_coefficient_exact():
    assert expected_zero_coefficient(TM, (1, -1)) == 1
    assert expected_zero_coefficient(EX61, (1, -1, 0, 0)) == Fraction(1, 2)
    assert mean_under_frequencies(TM, (1, -1)) == 0
    assert mean_under_frequencies(TM, (1, 0)) == Fraction(1, 2)
    assert mean_under_frequencies(EX61, (1, 1, 1, 1)) == 1


def test_cache_roundtrip(tmp_path, monkeypatch):
    first = pair_correlations(TM, 16, 10**4, tmp_path)
    files = sorted(p.name for p in tmp_path.iterdir())
    assert len(files) == TM.size * TM.size
    assert all(name.endswith(".csv") for name in files)

    # a complete cache must answer without regenerating the fixed point
    def boom(*args, **kwargs):  # pragma: no cover - only on failure
        raise AssertionError("prefix regenerated despite warm cache")

    monkeypatch.setattr(est, "fixed_point_prefix", boom)
    second = pair_correlations(TM, 16, 10**4, tmp_path)
    assert np.array_equal(first.sigma, second.sigma)


def test_cache_corruption_recovers(tmp_path):
    first = pair_correlations(TM, 16, 10**4, tmp_path)
    victim = sorted(tmp_path.iterdir())[0]
    victim.write_text("not,a,cache\n1,2,3\n")
    second = pair_correlations(TM, 16, 10**4, tmp_path)
    assert np.array_equal(first.sigma, second.sigma)


@pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")
def test_backends_bit_identical():
    u = fixed_point_prefix(TM, *seed_letter(TM), 5 * 10**4 + 64)
    direct = _kernels.pair_counts(u, 5 * 10**4, 64, TM.size, backend="numba")
    fft = _kernels.pair_counts(u, 5 * 10**4, 64, TM.size, backend="numpy")
    assert direct.dtype == fft.dtype == np.int64
    assert np.array_equal(direct, fft)


def test_resolve_backend(monkeypatch):
    monkeypatch.delenv("SUBSTRUM_BACKEND", raising=False)
    assert _kernels.resolve_backend(10**5, 64, 2, "numpy") == "numpy"
    assert _kernels.resolve_backend(10**5, 64, 2) in _kernels.available_backends()
    # the cost model prefers the direct loop for few lags and the FFT for many
    if _kernels.NUMBA_AVAILABLE:
        assert _kernels.resolve_backend(10**7, 8, 2) == "numba"
    assert _kernels.resolve_backend(10**7, 4096, 4) == "numpy"
    monkeypatch.setenv("SUBSTRUM_BACKEND", "numpy")
    assert _kernels.resolve_backend(10**7, 8, 2) == "numpy"
    monkeypatch.setenv("SUBSTRUM_BACKEND", "bogus")
    with pytest.raises(ValueError, match="bogus"):
        _kernels.resolve_backend(10**5, 64, 2)


@pytest.mark.skipif(not _kernels.NUMBA_AVAILABLE, reason="numba not installed")
def test_thread_count_determinism(tmp_path):
    # counts are exact integers and each lag row is owned by one worker, so
    # the result must be byte-identical whatever NUMBA_NUM_THREADS says
    script = (
        "import hashlib, numpy as np\n"
        "from substrum.corpus import load\n"
        "from substrum import _kernels\n"
        "from substrum.core import fixed_point_prefix, seed_letter\n"
        "z = load('thue_morse')\n"
        "u = fixed_point_prefix(z, *seed_letter(z), 2 * 10**5 + 128)\n"
        "c = _kernels.pair_counts(u, 2 * 10**5, 128, z.size, backend='numba')\n"
        "print(hashlib.sha256(np.ascontiguousarray(c).tobytes()).hexdigest())\n"
    )
    digests = []
    for threads in ("1", "2"):
        env = dict(os.environ, NUMBA_NUM_THREADS=threads)
        out = subprocess.run(
            [sys.executable, "-c", script],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        digests.append(out.stdout.strip())
    assert digests[0] == digests[1]


def test_ball_mass_edges(cache_dir):
    table = correlations(TM, (1, -1), 64, 10**5, cache_dir)
    # radius 1 keeps only the zero lag
    assert ball_mass(table, 1.0) == pytest.approx(table.sigma[0].real)
    with pytest.raises(ValueError, match="lags"):
        ball_mass(table, 1 / 128)


def test_point_mass_nonzero_mean(cache_dir):
    table = correlations(TM, (1, 0), 512, 10**5, cache_dir)
    mean = mean_under_frequencies(TM, (1, 0))
    assert point_mass_at_zero(table) == pytest.approx(abs(mean) ** 2, abs=5e-3)


def test_point_mass_mean_zero_vanishes(cache_dir):
    table = correlations(TM, (1, -1), 512, 10**5, cache_dir)
    assert abs(point_mass_at_zero(table)) <= 5e-3


def test_renormalization_small_budget(cache_dir):
    assert renormalization_check(TM, K=200, L=10**5, cache_dir=cache_dir) <= 1e-2
    assert renormalization_check(EX61, K=243, L=4 * 10**5, cache_dir=cache_dir) <= 1e-2


def test_dimension_fit_signed_indicator(cache_dir):
    fit = dimension_fit(EX61, (1, -1, 0, 0), K=729, L=10**6, cache_dir=cache_dir)
    assert fit.j == 2
    assert fit.kappa == 1
    assert fit.d_pred == pytest.approx(2 - 2 * math.log(2, 3), abs=1e-9)
    assert 0.5 <= fit.d_hat <= 0.95
    assert fit.residual <= 0.2
    assert len(fit.radii) == len(fit.masses) == len(fit.corrected_masses)


def test_dimension_fit_mean_zero_thue_morse(cache_dir):
    fit = dimension_fit(TM, (1, -1), K=4096, L=10**6, cache_dir=cache_dir)
    assert fit.d_hat >= 1.5
    assert fit.d_pred is None
    assert "o(r" in fit.prediction


def test_dimension_fit_rejects_few_scales(cache_dir):
    with pytest.raises(ValueError, match="scale"):
        dimension_fit(
            EX61, (1, -1, 0, 0), scales=[1, 2, 3], K=729, L=10**5, cache_dir=cache_dir
        )


def test_birkhoff_growth():
    flat = birkhoff_growth(TM, (1, -1))
    assert flat.exponent <= 0.05
    assert all(s == 1.0 for s in flat.max_sums)
    full = birkhoff_growth(TM, (1, 1))
    assert full.exponent >= 0.95
    slow = birkhoff_growth(EX61, (1, -1, 0, 0))
    assert slow.exponent == pytest.approx(math.log(2, 3), abs=0.08)
    with pytest.raises(ValueError):
        birkhoff_growth(TM, (0, 0))
