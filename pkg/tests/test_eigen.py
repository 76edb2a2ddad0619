"""Exact eigenvalue machinery: characteristic polynomials, certified
enclosures, the modulus-sqrt(q) test, and the projector calculus."""

import math
from fractions import Fraction

import pytest

from substrum.core import IntMatrix, parse_substitution, substitution_matrix
from substrum.corpus import load
from substrum.eigen import (
    char_poly,
    eigenvalue_multiset,
    eigenvalues,
    factor_projectors,
    has_modulus_sqrt_q,
    j_pr_kappa,
    second_eigenvalue_below_sqrt_q,
)
from substrum.reduction import pure_base

ENCLOSURE = Fraction(1, 10**10)


def S(name):
    return substitution_matrix(load(name))


def assert_multiset(records, expected, tol=1e-9):
    """Compare the flattened eigenvalue multiset with a list of complex
    numbers, greedily matching within tol."""
    got = [rec.value for rec in eigenvalue_multiset(records)]
    assert len(got) == len(expected)
    remaining = list(expected)
    for value in got:
        best = min(remaining, key=lambda e: abs(e - value))
        assert abs(best - value) < tol, (value, remaining)
        remaining.remove(best)


def test_char_poly_known():
    assert char_poly(S("thue_morse")).coeffs == (1, -2, 0)
    assert char_poly(S("rudin_shapiro")).coeffs == (1, -2, -2, 4, 0)


def test_eigenvalue_multisets_exact():
    sqrt2 = math.sqrt(2)
    omega = (1 + 1j * math.sqrt(3)) / 2
    cases = {
        "thue_morse": [2, 0],
        "bijective_nonabelian": [3, 2, 1, 1],
        "height_two": [3, 1, 0, 0, 0],
        "small_second_eigenvalue": [3, 1, 0],
        "rudin_shapiro": [2, sqrt2, -sqrt2, 0],
        "modified_rudin_shapiro": [2, sqrt2, -sqrt2, 0],
    }
    for name, expected in cases.items():
        assert_multiset(eigenvalues(S(name)), expected)


def test_pure_base_eigenvalues():
    eta = pure_base(load("height_two")).eta
    omega = (1 + 1j * math.sqrt(3)) / 2
    assert_multiset(
        eigenvalues(substitution_matrix(eta)),
        [3, omega, omega.conjugate(), 0, 0, 0],
    )


def test_enclosure_width_below_1e10():
    for name in (
        "thue_morse",
        "bijective_nonabelian",
        "height_two",
        "small_second_eigenvalue",
        "rudin_shapiro",
        "modified_rudin_shapiro",
    ):
        for rec in eigenvalues(S(name)):
            assert rec.modulus_hi - rec.modulus_lo < ENCLOSURE, (name, rec)


def test_rational_eigenvalues_are_exact():
    for rec in eigenvalues(S("bijective_nonabelian")):
        assert rec.rational_value is not None
        assert rec.modulus_lo == rec.modulus_hi == abs(rec.rational_value)


def test_sqrt_q_absent():
    for name, q in [
        ("thue_morse", 2),
        ("bijective_nonabelian", 3),
        ("height_two", 3),
        ("small_second_eigenvalue", 3),
    ]:
        res = has_modulus_sqrt_q(S(name), q)
        assert res.present is False
        assert res.witnesses == ()


def test_sqrt_q_present_real_pair():
    for name in ("rudin_shapiro", "modified_rudin_shapiro"):
        res = has_modulus_sqrt_q(S(name), 2)
        assert res.present is True
        assert res.exact_witnesses
        got = sorted(w.real for w in res.witnesses)
        assert got == pytest.approx([-math.sqrt(2), math.sqrt(2)], abs=1e-12)
        assert all(w.imag == 0 for w in res.witnesses)


def test_sqrt_q_present_imaginary_pair():
    # x^2 + 2: eigenvalues +-i*sqrt(2), modulus exactly sqrt(2)
    M = IntMatrix(((0, -2), (1, 0)))
    res = has_modulus_sqrt_q(M, 2)
    assert res.present is True
    got = sorted(w.imag for w in res.witnesses)
    assert got == pytest.approx([-math.sqrt(2), math.sqrt(2)], abs=1e-12)


def test_second_eigenvalue_bound():
    assert second_eigenvalue_below_sqrt_q(S("thue_morse"), 2) is True
    assert second_eigenvalue_below_sqrt_q(S("small_second_eigenvalue"), 3) is True
    # |theta_2| = 2 > sqrt(3)
    assert second_eigenvalue_below_sqrt_q(S("bijective_nonabelian"), 3) is False
    # |theta_2| = sqrt(2) is not *strictly* below sqrt(q)
    assert second_eigenvalue_below_sqrt_q(S("rudin_shapiro"), 2) is False


# ---------------------------------------------------------------------------
# Projector calculus (all identities exact, over Q)
# ---------------------------------------------------------------------------

def _matmul(A, B):
    n = len(A)
    return [
        [sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)]
        for i in range(n)
    ]


@pytest.mark.parametrize("name", ["bijective_nonabelian", "rudin_shapiro", "height_two"])
def test_factor_projectors_identities(name):
    M = S(name)
    n = M.dim
    projectors = factor_projectors(M)
    identity = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    # projectors live on the transposed matrix (the side cylindrical
    # coefficient vectors transform on)
    Mt = [[Fraction(M[j, i]) for j in range(n)] for i in range(n)]

    total = [[Fraction(0)] * n for _ in range(n)]
    for P in projectors:
        rows = [list(r) for r in P.matrix]
        # idempotent
        assert _matmul(rows, rows) == rows
        # commutes with M^t
        assert _matmul(rows, Mt) == _matmul(Mt, rows)
        for i in range(n):
            for j in range(n):
                total[i][j] += rows[i][j]
    for Q in projectors:
        for R in projectors:
            if Q is not R:
                zero = _matmul(Q.matrix, R.matrix)
                assert all(x == 0 for row in zero for x in row)
    # partition of unity
    assert total == identity


def test_j_pr_kappa_bijective_nonabelian():
    # f = 1_letter1 - 1_letter2: survives first on the eigenvalue-2 class
    res = j_pr_kappa(S("bijective_nonabelian"), [1, -1, 0, 0])
    assert res.j == 2
    assert res.kappa == 1
    assert res.theta_modulus_lo <= 2 <= res.theta_modulus_hi
    assert float(res.theta_modulus_hi - res.theta_modulus_lo) < 1e-10


def test_j_pr_kappa_thue_morse():
    res = j_pr_kappa(S("thue_morse"), [1, -1])
    assert res.theta_modulus_hi == 0  # mean-zero f lives on the 0-eigenspace
    assert res.kappa == 1


def test_j_pr_kappa_perron_component():
    res = j_pr_kappa(S("thue_morse"), [1, 1])
    assert res.j == 1
    assert res.theta_modulus_lo == res.theta_modulus_hi == 2


def test_j_pr_kappa_rejects_zero():
    with pytest.raises(ValueError):
        j_pr_kappa(S("thue_morse"), [0, 0])
