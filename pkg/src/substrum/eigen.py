"""Exact eigenvalue analysis of integer matrices.

The classification criterion at the heart of this package is a statement
about eigenvalue *moduli*: a primitive aperiodic constant-length-q
substitution whose matrix has no eigenvalue of absolute value exactly
sqrt(q) defines a system with singular spectrum.  A floating-point
eigensolver cannot distinguish |lambda| = sqrt(q) from |lambda| ~ sqrt(q),
so this module works exactly:

* characteristic polynomials are exact integer polynomials;
* eigenvalues are grouped by irreducible factor over Z, with rigorous
  rational enclosures of each root's modulus (rational and quadratic roots
  get closed forms; higher-degree factors use certified isolating
  rectangles);
* the sqrt(q) test runs an exact gcd prefilter first — an eigenvalue with
  |lambda|^2 = q forces lambda and q/lambda to be roots of the same
  characteristic polynomial, so gcd(p(x), x^n p(q/x)) constant rules the
  modulus out with no numerics at all — and decides the remaining candidate
  roots exactly where closed forms exist, by certified enclosures otherwise,
  escalating to an explicit "ambiguous" outcome rather than guessing;
* generalized eigenprojections are exact rational idempotents obtained from
  Bezout identities between coprime factors of the characteristic
  polynomial.

The elimination data (j, pr, kappa) of a rational vector b — the index of
the first eigenvalue class that sees b, the projection of b onto that class,
and the depth of the deepest Jordan chain it touches — is computed in exact
rational arithmetic: on the generalized eigenspace of a squarefree factor F,
the operator F(M^t) is an invertible multiple of the nilpotent part, so
Jordan depth is the number of times F(M^t) can be applied before the
projected vector vanishes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import sqrt as _fsqrt
from typing import Optional, Sequence

import sympy
from sympy import Poly, Rational, Symbol

from .core import IntMatrix
from .exactlin import (
    char_poly_coeffs,
    factor_integer_poly,
    poly_eval_at_matrix,
    poly_mul,
    rational_matmul,
    sqrt_interval,
)

__all__ = [
    "CharPoly",
    "EigenvalueRecord",
    "Projector",
    "SqrtQResult",
    "JPRKappa",
    "PrecisionError",
    "char_poly",
    "eigenvalues",
    "eigenvalue_classes",
    "has_modulus_sqrt_q",
    "second_eigenvalue_below_sqrt_q",
    "factor_projectors",
    "j_pr_kappa",
]

_x = Symbol("x")

DEFAULT_PRECISION_BITS = 128
_MAX_PRECISION_BITS = 4096


class PrecisionError(RuntimeError):
    """Root enclosures could not be separated at the maximum precision."""


@dataclass(frozen=True)
class CharPoly:
    """Monic integer polynomial, leading coefficient first."""

    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, value):
        acc = 0
        for c in self.coeffs:
            acc = acc * value + c
        return acc


def char_poly(M: IntMatrix) -> CharPoly:
    """Exact integer characteristic polynomial det(xI - M)."""
    return CharPoly(char_poly_coeffs(M))


@dataclass(frozen=True)
class EigenvalueRecord:
    """One eigenvalue with a certified modulus enclosure.

    `value` is an approximation for display (exact when the root is
    rational); `modulus_lo <= |value| <= modulus_hi` is rigorous, and
    `modulus_sq_exact` is set when |value|^2 is known exactly as a rational
    (rational roots, sqrt-type quadratics, complex quadratic pairs).
    """

    value: complex
    multiplicity: int
    factor: tuple[int, ...]
    factor_index: int
    modulus_lo: Fraction
    modulus_hi: Fraction
    modulus_sq_exact: Optional[Fraction]
    is_real: bool
    rational_value: Optional[Fraction] = None


def _abs_interval(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    if lo >= 0:
        return lo, hi
    if hi <= 0:
        return -hi, -lo
    return Fraction(0), max(-lo, hi)


def _rect_modulus_interval(x1, x2, y1, y2, bits):
    """Enclose |z| for z in the rectangle [x1,x2] x [y1,y2] (rational corners)."""
    ax_lo, ax_hi = _abs_interval(x1, x2)
    ay_lo, ay_hi = _abs_interval(y1, y2)
    lo_sq = ax_lo * ax_lo + ay_lo * ay_lo
    hi_sq = ax_hi * ax_hi + ay_hi * ay_hi
    return sqrt_interval(lo_sq, bits)[0], sqrt_interval(hi_sq, bits)[1]


def _rational(r) -> Fraction:
    return Fraction(int(r.p), int(r.q))


def _roots_of_factor(factor: tuple[int, ...], bits: int) -> list[dict]:
    """Certified root data for a monic irreducible integer polynomial.

    Returns one dict per root with keys matching the EigenvalueRecord root
    fields: value, modulus_lo, modulus_hi, modulus_sq_exact, is_real,
    rational_value.
    """
    deg = len(factor) - 1
    if deg == 1:
        r = -factor[1]
        fr = Fraction(r)
        return [
            dict(
                value=complex(r),
                modulus_lo=abs(fr),
                modulus_hi=abs(fr),
                modulus_sq_exact=fr * fr,
                is_real=True,
                rational_value=fr,
            )
        ]
    if deg == 2:
        b, c = factor[1], factor[2]
        D = b * b - 4 * c
        assert D != 0, "irreducible quadratic has distinct roots"
        if D < 0:
            # complex conjugate pair; |root|^2 = c exactly
            mod_lo, mod_hi = sqrt_interval(Fraction(c), bits)
            re = -b / 2.0
            im = _fsqrt(-D) / 2.0
            base = dict(
                modulus_lo=mod_lo,
                modulus_hi=mod_hi,
                modulus_sq_exact=Fraction(c),
                is_real=False,
                rational_value=None,
            )
            return [
                dict(value=complex(re, im), **base),
                dict(value=complex(re, -im), **base),
            ]
        # two real quadratic irrationals (-b +- sqrt(D)) / 2
        s_lo, s_hi = sqrt_interval(Fraction(D), bits)
        out = []
        for sign in (+1, -1):
            lo = (Fraction(-b) + (s_lo if sign > 0 else -s_hi)) / 2
            hi = (Fraction(-b) + (s_hi if sign > 0 else -s_lo)) / 2
            mlo, mhi = _abs_interval(lo, hi)
            out.append(
                dict(
                    value=complex((-b + sign * _fsqrt(D)) / 2.0),
                    modulus_lo=mlo,
                    modulus_hi=mhi,
                    # |root|^2 is rational only for the x^2 - c shape
                    modulus_sq_exact=abs(Fraction(c)) if b == 0 else None,
                    is_real=True,
                    rational_value=None,
                )
            )
        return out

    # degree >= 3: certified isolating intervals/rectangles
    poly = Poly([int(c) for c in factor], _x, domain="ZZ")
    eps = Rational(1, 2**bits)
    real_iv, cplx_iv = poly.intervals(all=True, eps=eps)
    out = []
    for (lo, hi), mult in real_iv:
        assert mult == 1
        flo, fhi = _rational(lo), _rational(hi)
        mlo, mhi = _abs_interval(flo, fhi)
        out.append(
            dict(
                value=complex(float((flo + fhi) / 2)),
                modulus_lo=mlo,
                modulus_hi=mhi,
                modulus_sq_exact=None,
                is_real=True,
                rational_value=None,
            )
        )
    for (c1, c2), mult in cplx_iv:
        assert mult == 1
        fx1, fy1 = _rational(sympy.re(c1)), _rational(sympy.im(c1))
        fx2, fy2 = _rational(sympy.re(c2)), _rational(sympy.im(c2))
        mlo, mhi = _rect_modulus_interval(fx1, fx2, fy1, fy2, bits)
        out.append(
            dict(
                value=complex(float((fx1 + fx2) / 2), float((fy1 + fy2) / 2)),
                modulus_lo=mlo,
                modulus_hi=mhi,
                modulus_sq_exact=None,
                is_real=False,
                rational_value=None,
            )
        )
    assert len(out) == deg
    return out


def _same_modulus(r1: EigenvalueRecord, r2: EigenvalueRecord, tol: Fraction) -> Optional[bool]:
    """True/False when decidable, None when enclosures are too close to call."""
    if r1.modulus_sq_exact is not None and r2.modulus_sq_exact is not None:
        return r1.modulus_sq_exact == r2.modulus_sq_exact
    if r1.modulus_lo > r2.modulus_hi + tol or r2.modulus_lo > r1.modulus_hi + tol:
        return False
    if r1.modulus_lo <= r2.modulus_hi and r2.modulus_lo <= r1.modulus_hi:
        # two enclosures of the same algebraic modulus always overlap, since
        # both contain the true value
        return True
    return None


def _group_by_modulus(records: list[EigenvalueRecord], bits: int):
    """Partition records into descending modulus classes; None if ambiguous."""
    n = len(records)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tol = Fraction(1, 2 ** max(bits // 2, 16))
    for i in range(n):
        for j in range(i + 1, n):
            same = _same_modulus(records[i], records[j], tol)
            if same is None:
                return None
            if same:
                parent[find(i)] = find(j)
    groups: dict[int, list[EigenvalueRecord]] = {}
    for i, r in enumerate(records):
        groups.setdefault(find(i), []).append(r)
    classes = sorted(groups.values(), key=lambda g: -min(r.modulus_lo for r in g))
    # consecutive classes must be separated rigorously for the ordering to
    # mean anything
    for a, b in zip(classes, classes[1:]):
        if not min(r.modulus_lo for r in a) > max(r.modulus_hi for r in b):
            return None
    for cls in classes:
        cls.sort(key=lambda r: (-r.value.real, -r.value.imag))
    return [tuple(cls) for cls in classes]


def eigenvalue_classes(
    M: IntMatrix, precision_bits: int = DEFAULT_PRECISION_BITS
) -> tuple[tuple[EigenvalueRecord, ...], ...]:
    """Eigenvalues of M grouped into certified descending-modulus classes.

    Each class is a tuple of records sharing one modulus; consecutive classes
    have rigorously separated modulus enclosures.  Raises PrecisionError if
    separation cannot be certified at the maximum precision.
    """
    factors = factor_integer_poly(char_poly_coeffs(M))
    bits = precision_bits
    while True:
        records: list[EigenvalueRecord] = []
        for idx, (fac, mult) in enumerate(factors):
            for root in _roots_of_factor(fac, bits):
                records.append(
                    EigenvalueRecord(multiplicity=mult, factor=fac, factor_index=idx, **root)
                )
        classes = _group_by_modulus(records, bits)
        if classes is not None:
            return tuple(classes)
        if bits >= _MAX_PRECISION_BITS:
            raise PrecisionError("modulus enclosures cannot be ordered at maximum precision")
        bits *= 2


def eigenvalues(
    M: IntMatrix, precision_bits: int = DEFAULT_PRECISION_BITS
) -> tuple[EigenvalueRecord, ...]:
    """All eigenvalues of M, sorted by certified descending modulus.

    Ties inside a modulus class are ordered by descending real part, then
    descending imaginary part.  Multiplicities are carried on the records;
    see `eigenvalue_multiset` for the flattened list.
    """
    return tuple(r for cls in eigenvalue_classes(M, precision_bits) for r in cls)


def eigenvalue_multiset(records: Sequence[EigenvalueRecord]) -> list[EigenvalueRecord]:
    """Flatten records into the multiset (each record repeated by multiplicity)."""
    out: list[EigenvalueRecord] = []
    for r in records:
        out.extend([r] * r.multiplicity)
    return out


# ---------------------------------------------------------------------------
# sqrt(q) modulus detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SqrtQResult:
    """Outcome of the |lambda| = sqrt(q) test.

    present is True/False when decided (always rigorously), None when some
    candidate root's enclosure still straddles sqrt(q) at maximum precision.
    """

    present: Optional[bool]
    witnesses: tuple[complex, ...]
    witness_factors: tuple[tuple[int, ...], ...]
    exact_witnesses: bool
    detail: str


def _reversal_poly(coeffs: Sequence[int], q: int) -> tuple[int, ...]:
    """Integer coefficients of x^n * p(q/x), leading coefficient first."""
    n = len(coeffs) - 1
    rev = [coeffs[n - t] * q**t for t in range(n + 1)]
    while len(rev) > 1 and rev[0] == 0:
        rev.pop(0)
    return tuple(rev)


def has_modulus_sqrt_q(
    M: IntMatrix, q: int, precision_bits: int = DEFAULT_PRECISION_BITS
) -> SqrtQResult:
    """Decide whether M has an eigenvalue of absolute value exactly sqrt(q).

    Exact prefilter: an eigenvalue lambda with |lambda|^2 = q satisfies
    conj(lambda) = q/lambda, and conj(lambda) is a root of the (real)
    characteristic polynomial p, so lambda is a common root of p(x) and the
    integer polynomial x^n p(q/x).  A constant gcd therefore excludes the
    modulus with no numerics.  Otherwise each irreducible factor of the gcd
    is examined: rational roots and quadratics give exact decisions; roots
    of higher-degree factors are compared to sqrt(q) through certified
    modulus enclosures, refining precision and reporting an explicit
    ambiguous outcome (present=None) if enclosures keep straddling.
    """
    p = char_poly_coeffs(M)
    rev = _reversal_poly(p, q)
    g = sympy.gcd(Poly(list(p), _x, domain="ZZ"), Poly(list(rev), _x, domain="ZZ"))
    g_coeffs = [int(c) for c in g.all_coeffs()]
    if len(g_coeffs) == 1:
        return SqrtQResult(
            present=False,
            witnesses=(),
            witness_factors=(),
            exact_witnesses=True,
            detail="gcd prefilter is constant: no (lambda, q/lambda) root pairs exist",
        )
    if g_coeffs[0] != 1:
        lead = g_coeffs[0]
        assert all(c % lead == 0 for c in g_coeffs)
        g_coeffs = [c // lead for c in g_coeffs]

    witnesses: list[complex] = []
    witness_factors: list[tuple[int, ...]] = []
    ambiguous: list[tuple[int, ...]] = []
    qf = Fraction(q)
    for fac, _mult in factor_integer_poly(g_coeffs):
        deg = len(fac) - 1
        if deg == 1:
            r = Fraction(-fac[1])
            if r * r == qf:
                witnesses.append(complex(r))
                witness_factors.append(fac)
            continue
        if deg == 2:
            b, c = fac[1], fac[2]
            D = b * b - 4 * c
            if b == 0:
                # roots +-sqrt(-c) if c < 0 (real), +-i sqrt(c) if c > 0;
                # either way |root|^2 = |c|, an exact comparison
                if Fraction(abs(c)) == qf:
                    if c < 0:
                        witnesses.extend([complex(_fsqrt(q)), complex(-_fsqrt(q))])
                    else:
                        witnesses.extend([complex(0.0, _fsqrt(q)), complex(0.0, -_fsqrt(q))])
                    witness_factors.append(fac)
                continue
            if D < 0:
                # complex pair with |root|^2 = c, exact comparison
                if Fraction(c) == qf:
                    re, im = -b / 2.0, _fsqrt(-D) / 2.0
                    witnesses.extend([complex(re, im), complex(re, -im)])
                    witness_factors.append(fac)
                continue
            # real quadratic irrationals with b != 0: |root| = sqrt(q) would
            # force minimal polynomial x^2 - q, contradiction — never a hit
            continue
        # degree >= 3: certified enclosures against sqrt(q)
        bits = precision_bits
        while True:
            undecided = False
            for root in _roots_of_factor(fac, bits):
                lo, hi = root["modulus_lo"], root["modulus_hi"]
                if hi * hi < qf or lo * lo > qf:
                    continue
                undecided = True
            if not undecided or bits >= _MAX_PRECISION_BITS:
                break
            bits *= 2
        if undecided:
            ambiguous.append(fac)

    if witnesses:
        return SqrtQResult(
            present=True,
            witnesses=tuple(witnesses),
            witness_factors=tuple(witness_factors),
            exact_witnesses=True,
            detail="exact factor analysis of the gcd prefilter",
        )
    if ambiguous:
        return SqrtQResult(
            present=None,
            witnesses=(),
            witness_factors=tuple(ambiguous),
            exact_witnesses=False,
            detail="candidate enclosures straddle sqrt(q) at maximum precision",
        )
    return SqrtQResult(
        present=False,
        witnesses=(),
        witness_factors=(),
        exact_witnesses=True,
        detail="all candidate roots of the gcd prefilter excluded exactly",
    )


def second_eigenvalue_below_sqrt_q(
    M: IntMatrix, q: int, precision_bits: int = DEFAULT_PRECISION_BITS
) -> bool:
    """True iff |theta_2| < sqrt(q), certified.

    theta_2 is the second entry of the descending-modulus eigenvalue multiset
    (multiplicities counted).  Exact when |theta_2|^2 is known as a rational;
    otherwise decided by enclosures, refining until one side certifies.
    """
    qf = Fraction(q)
    bits = precision_bits
    while True:
        multiset = eigenvalue_multiset(eigenvalues(M, bits))
        if len(multiset) < 2:
            return True
        theta2 = multiset[1]
        if theta2.modulus_sq_exact is not None:
            return theta2.modulus_sq_exact < qf
        if theta2.modulus_hi * theta2.modulus_hi < qf:
            return True
        if theta2.modulus_lo * theta2.modulus_lo > qf:
            return False
        if bits >= _MAX_PRECISION_BITS:
            raise PrecisionError(
                "second-eigenvalue enclosure straddles sqrt(q) at maximum precision"
            )
        bits *= 2


# ---------------------------------------------------------------------------
# Exact generalized eigenprojections and elimination data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Projector:
    """Exact rational projector onto the generalized eigenspace of M^t for
    one irreducible factor of the characteristic polynomial."""

    factor: tuple[int, ...]
    multiplicity: int
    matrix: tuple[tuple[Fraction, ...], ...]


def _fraction_poly_coeffs(p: Poly) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(c.p), int(c.q)) for c in p.all_coeffs())


def factor_projectors(M: IntMatrix) -> tuple[Projector, ...]:
    """Exact rational idempotents P_F = e_F(M^t), one per irreducible factor.

    For char(M) = prod F_i^{e_i} the quotient algebra Q[x]/(char) splits by
    the Chinese Remainder Theorem; the idempotent e_i is 1 mod F_i^{e_i} and
    0 mod the complement, computed from a Bezout identity.  The projectors
    satisfy P_i^2 = P_i, sum P_i = I, and commute with M^t — verified
    exactly here on every call (the matrices are small).
    """
    coeffs = char_poly_coeffs(M)
    factors = factor_integer_poly(coeffs)
    char = Poly(list(coeffs), _x, domain="QQ")
    Mt = M.transpose().entries
    n = M.dim

    projectors: list[Projector] = []
    total = [[Fraction(0)] * n for _ in range(n)]
    for fac, mult in factors:
        G = Poly(list(fac), _x, domain="QQ") ** mult
        H, rem = sympy.div(char, G)
        assert rem.is_zero
        s, t, g = sympy.gcdex(G.as_expr(), H.as_expr(), _x)
        assert sympy.simplify(g - 1) == 0, "distinct irreducible factors are coprime"
        e = (Poly(t, _x, domain="QQ") * H) % char
        P = poly_eval_at_matrix(_fraction_poly_coeffs(e), Mt)
        projectors.append(Projector(factor=fac, multiplicity=mult, matrix=P))
        for r in range(n):
            for c in range(n):
                total[r][c] += P[r][c]

    assert all(
        total[r][c] == (1 if r == c else 0) for r in range(n) for c in range(n)
    ), "projectors must sum to the identity"
    for p in projectors:
        assert rational_matmul(p.matrix, p.matrix) == p.matrix, "projector must be idempotent"
        assert rational_matmul(Mt, p.matrix) == rational_matmul(p.matrix, Mt), (
            "projector must commute with M^t"
        )
    return tuple(projectors)


def _apply_rational(matrix, vec):
    return tuple(sum(a * v for a, v in zip(row, vec)) for row in matrix)


@dataclass(frozen=True)
class JPRKappa:
    """Elimination data of a rational vector b with respect to M^t.

    j: 1-based index (in the descending-modulus eigenvalue multiset) of the
    first eigenvalue whose generalized eigenspace sees b.  pr_b: projection
    of b onto the full modulus class of that eigenvalue.  kappa: depth of
    the deepest Jordan chain of the class that b touches (1 when the class
    acts semisimply on b).
    """

    j: int
    theta: complex
    theta_modulus_lo: Fraction
    theta_modulus_hi: Fraction
    pr_b: tuple[Fraction, ...]
    kappa: int


def j_pr_kappa(
    M: IntMatrix, b: Sequence, precision_bits: int = DEFAULT_PRECISION_BITS
) -> JPRKappa:
    """Exact elimination data (j, pr(b), kappa) for a nonzero rational vector b.

    Activity of an irreducible factor F is the exact rational test
    P_F b != 0 (for rational b one Galois-conjugate root of F sees b iff
    they all do, so per-factor projectors lose nothing).  kappa is computed
    inside the modulus class by iterating F_cls(M^t), which acts on each
    factor's generalized eigenspace as an invertible multiple of its
    nilpotent part, where F_cls is the product of the class's distinct
    irreducible factors.
    """
    bvec = tuple(Fraction(v) for v in b)
    if all(v == 0 for v in bvec):
        raise ValueError("b must be nonzero")
    classes = eigenvalue_classes(M, precision_bits)
    projectors = {p.factor: p for p in factor_projectors(M)}
    proj_b = {fac: _apply_rational(p.matrix, bvec) for fac, p in projectors.items()}
    active = {fac: any(v != 0 for v in pb) for fac, pb in proj_b.items()}

    pos = 0
    for cls in classes:
        j = None
        for rec in cls:
            for _ in range(rec.multiplicity):
                pos += 1
                if j is None and active[rec.factor]:
                    j = pos
                    chosen = rec
        if j is not None:
            class_factors = []
            for rec in cls:
                if rec.factor not in class_factors:
                    class_factors.append(rec.factor)
            pr_b = tuple(
                sum(col) for col in zip(*(proj_b[fac] for fac in class_factors))
            )
            f_cls = (1,)
            for fac in class_factors:
                f_cls = poly_mul(f_cls, fac)
            A = poly_eval_at_matrix(f_cls, M.transpose().entries)
            kappa = 1
            w = _apply_rational(A, pr_b)
            max_mult = max(projectors[fac].multiplicity for fac in class_factors)
            while any(v != 0 for v in w):
                kappa += 1
                assert kappa <= max_mult, "Jordan depth cannot exceed factor multiplicity"
                w = _apply_rational(A, w)
            return JPRKappa(
                j=j,
                theta=chosen.value,
                theta_modulus_lo=chosen.modulus_lo,
                theta_modulus_hi=chosen.modulus_hi,
                pr_b=pr_b,
                kappa=kappa,
            )
    raise AssertionError("b is nonzero, so some projector must see it")
