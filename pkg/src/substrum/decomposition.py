"""The q-eigenspace of the coincidence matrix and its convex geometry.

The transpose coincidence matrix C^t has Perron eigenvalue q with
multiplicity k (the number of ergodic pair classes), and every vector in
the eigenspace F is constant on each ergodic class.  The values on the
transitive pairs are *determined* by the class values — solving
(C^t - qI)v = 0 exactly shows they are affine functions of the class chart,
and not in general zero — so the chart F <-> (one value per class) is a
bijection and everything here is computed in that chart.

Reading a vector v in F as the m x m matrix W(a,b) = v_(a,b) singles out
the convex set Q = {v in F : W Hermitian PSD, unit diagonal}.  Q is compact
with exactly k extreme points, one of which is the all-ones vector, and the
extreme points generate the decomposition of the maximal spectral type into
mutually singular pieces.  The extreme points are computed exactly when the
associated matrices commute (they do on every bijective example shipped
with this package): a common eigenbasis turns positive semidefiniteness
into finitely many affine inequalities in the chart, Q becomes an explicit
simplex, and its vertices are solved from (k-1)-subsets of active
constraints in rational arithmetic.  A numeric ray-shooting fallback exists
for the non-commuting case and is flagged as such; no classification
verdict ever depends on it.

Each extreme point's W factors through its eigendecomposition into
cylindrical functions: W = sum_j kappa_j d_j d_j^* gives lambda =
sum_j sigma_{f_j} with f_j = sqrt(kappa_j) * conj(d_j) read as coefficients
of letter indicators.  Away from the all-ones point every f_j is orthogonal
to constants in L^2(mu), which is what kills the atom at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence, Union

import numpy as np
import sympy

from .coincidence import ErgodicClassification, PairAlphabet, coincidence_matrix, ergodic_classes
from .core import IntMatrix, Substitution, constant_length, substitution_matrix
from .exactlin import rational_matmul, rational_nullspace

__all__ = [
    "ClassVector",
    "ExtremePoints",
    "CylindricalDecomposition",
    "letter_frequencies",
    "eigenspace_F",
    "chart_vector",
    "extreme_points_Q",
    "decompose_lambda",
]

Number = Union[Fraction, float, complex]


def letter_frequencies(z: Substitution) -> tuple[Fraction, ...]:
    """Exact letter frequencies: the normalized q-eigenvector of S.

    Primitivity makes the q-eigenspace of the substitution matrix
    one-dimensional; the normalized generator has positive rational entries
    summing to 1, and equals the vector of cylinder measures mu[a].
    """
    q = constant_length(z)
    if q is None:
        raise ValueError("letter frequencies require constant length")
    S = substitution_matrix(z)
    n = S.dim
    A = tuple(
        tuple(Fraction(S.entries[r][c] - (q if r == c else 0)) for c in range(n))
        for r in range(n)
    )
    basis = rational_nullspace(A)
    if len(basis) != 1:
        raise ValueError("q-eigenspace of S is not one-dimensional; substitution not primitive?")
    v = basis[0]
    total = sum(v)
    assert total != 0
    mu = tuple(x / total for x in v)
    assert all(x > 0 for x in mu), "Perron eigenvector must be strictly positive"
    return mu


@dataclass(frozen=True)
class ClassVector:
    """An element of the q-eigenspace F in the class chart.

    class_values[i] is the value on ergodic class E_i; pair_values is the
    full induced vector on A x A in row-major pair order, including the
    determined values on transitive pairs.  Entries are Fractions on the
    exact path, floats when produced by the numeric fallback.
    """

    class_values: tuple[Number, ...]
    pair_values: tuple[Number, ...]
    m: int

    def W(self) -> np.ndarray:
        """The associated m x m matrix W(a,b) = v_(a,b), as complex floats."""
        return np.array(
            [
                [complex(self.pair_values[a * self.m + b]) for b in range(self.m)]
                for a in range(self.m)
            ]
        )

    def W_exact(self) -> tuple[tuple[Fraction, ...], ...]:
        assert all(isinstance(x, Fraction) for x in self.pair_values)
        return tuple(
            tuple(self.pair_values[a * self.m + b] for b in range(self.m))
            for a in range(self.m)
        )


def _class_index_sets(z: Substitution, cls: ErgodicClassification) -> list[list[int]]:
    pa = PairAlphabet(z.alphabet)
    return [[pa.index(a, b) for (a, b) in c] for c in cls.classes]


def eigenspace_F(
    z: Substitution, classification: Optional[ErgodicClassification] = None
) -> tuple[ClassVector, ...]:
    """Chart basis of the q-eigenspace F of C^t: the i-th vector has value 1
    on E_i and 0 on the other classes (transitive values determined).

    Verifies exactly that the nullspace of (C^t - qI) has dimension k, that
    every nullspace vector is constant on each ergodic class, and that the
    chart map F -> C^k is a bijection; raises ValueError when the structure
    is violated.
    """
    q = constant_length(z)
    if q is None:
        raise ValueError("eigenspace requires constant length")
    if classification is None:
        classification = ergodic_classes(z)
    k = classification.k
    C = coincidence_matrix(z)
    Ct = C.transpose()
    n = Ct.dim
    A = tuple(
        tuple(Fraction(Ct.entries[r][c] - (q if r == c else 0)) for c in range(n))
        for r in range(n)
    )
    basis = rational_nullspace(A)
    if len(basis) != k:
        raise ValueError(
            f"nullspace of (C^t - qI) has dimension {len(basis)}, expected k = {k}"
        )
    class_idx = _class_index_sets(z, classification)
    charts = []
    for v in basis:
        chart = []
        for idx in class_idx:
            vals = {v[i] for i in idx}
            if len(vals) != 1:
                raise ValueError("eigenspace vector not constant on an ergodic class")
            chart.append(vals.pop())
        charts.append(chart)
    B = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in charts])
    if B.rank() != k:
        raise ValueError("class chart is not a bijection on the q-eigenspace")
    Binv = B.inv()
    out = []
    for i in range(k):
        # want sum_j c_j * basis_j to have class values e_i: c solves B^T c = e_i,
        # i.e. c is the i-th row of B^{-1}
        coeffs = [Fraction(int(Binv[i, j].p), int(Binv[i, j].q)) for j in range(k)]
        pair_values = tuple(
            sum(c * v[t] for c, v in zip(coeffs, basis)) for t in range(n)
        )
        cv = ClassVector(
            class_values=tuple(Fraction(1) if j == i else Fraction(0) for j in range(k)),
            pair_values=pair_values,
            m=z.size,
        )
        for j, idx in enumerate(class_idx):
            assert all(pair_values[t] == cv.class_values[j] for t in idx)
        _assert_in_F(Ct, q, pair_values)
        out.append(cv)
    return tuple(out)


def _assert_in_F(Ct: IntMatrix, q: int, v: Sequence[Fraction]) -> None:
    n = Ct.dim
    for r in range(n):
        acc = sum(Fraction(Ct.entries[r][c]) * v[c] for c in range(n)) - q * v[r]
        assert acc == 0, "vector must lie in the q-eigenspace of C^t"


def chart_vector(basis: Sequence[ClassVector], w: Sequence[Number]) -> ClassVector:
    """The element of F with class values w, as a combination of the chart basis."""
    assert len(w) == len(basis)
    n = len(basis[0].pair_values)
    pair_values = tuple(
        sum(wi * b.pair_values[t] for wi, b in zip(w, basis)) for t in range(n)
    )
    return ClassVector(class_values=tuple(w), pair_values=pair_values, m=basis[0].m)


@dataclass(frozen=True)
class ExtremePoints:
    """The k extreme points of Q, with the method that produced them.

    method is "exact" (commuting associated matrices, simplex vertices in
    rational arithmetic), "numeric" (ray-shooting fallback, coordinates
    reliable to ~1e-8), or "numeric-partial" (fallback could not isolate
    exactly k vertices; points contains what was found, always including
    the all-ones vector)."""

    points: tuple[ClassVector, ...]
    method: str
    detail: str


def extreme_points_Q(z: Substitution) -> ExtremePoints:
    """Extreme points of Q = {v in F : W(v) PSD, v_aa = 1}.

    The diagonal pairs form E_0, so the unit-diagonal constraint pins the
    chart coordinate w_0 = 1 and Q lives in the remaining k-1 coordinates.
    When the associated matrices of the chart basis commute pairwise
    (verified exactly), a rational common eigenbasis turns PSD into affine
    inequalities and Q is a simplex whose vertices are solved exactly.
    """
    classification = ergodic_classes(z)
    basis = eigenspace_F(z, classification)
    k = len(basis)
    if k == 1:
        return ExtremePoints(points=(basis[0],), method="exact", detail="Q is a single point")

    Ws = [b.W_exact() for b in basis]
    commuting = all(
        rational_matmul(Ws[i], Ws[j]) == rational_matmul(Ws[j], Ws[i])
        for i in range(k)
        for j in range(i + 1, k)
    )
    if commuting:
        result = _extreme_points_exact(basis, Ws)
        if result is not None:
            return result
    return _extreme_points_numeric(basis, commuting)


def _common_eigenvectors(Ws: list) -> Optional[list[tuple[Fraction, ...]]]:
    """A rational basis of common eigenvectors of the commuting family, or None."""
    m = len(Ws[0])
    for weights in ((3, 9, 27), (5, 25, 125), (7, 11, 13)):
        G = [[Fraction(0)] * m for _ in range(m)]
        for t, W in enumerate(Ws):
            wt = Fraction(weights[t % len(weights)]) ** (t + 1)
            for r in range(m):
                for c in range(m):
                    G[r][c] += wt * W[r][c]
        M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in G])
        try:
            eig = M.eigenvects()
        except Exception:
            return None
        if not all(val.is_Rational for val, _, _ in eig):
            return None
        vecs = []
        for _, _, vlist in eig:
            for v in vlist:
                vecs.append(tuple(Fraction(int(x.p), int(x.q)) for x in v))
        if len(vecs) != m:
            continue  # defective generic combination; reweight
        # every W must act diagonally on every candidate vector
        ok = True
        for W in Ws:
            for v in vecs:
                Wv = tuple(sum(W[r][c] * v[c] for c in range(m)) for r in range(m))
                pivot = next((i for i, x in enumerate(v) if x != 0))
                lam = Wv[pivot] / v[pivot]
                if any(Wv[i] != lam * v[i] for i in range(m)):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return vecs
    return None


def _extreme_points_exact(basis, Ws) -> Optional[ExtremePoints]:
    k = len(basis)
    m = len(Ws[0])
    vecs = _common_eigenvectors(Ws)
    if vecs is None:
        return None
    # Rayleigh values: on a common eigenvector v, W(w) has eigenvalue
    # sum_i w_i c[i], an affine function of the chart
    rows = []
    for v in vecs:
        norm = sum(x * x for x in v)
        row = []
        for W in Ws:
            Wv = tuple(sum(W[r][c] * v[c] for c in range(m)) for r in range(m))
            row.append(sum(a * b for a, b in zip(Wv, v)) / norm)
        rows.append(tuple(row))
    # dedupe proportional constraints (positive scaling)
    uniq: list[tuple[Fraction, ...]] = []
    for row in rows:
        lead = next((x for x in row if x != 0), None)
        if lead is None:
            continue
        scaled = tuple(x / abs(lead) for x in row)
        if scaled not in uniq:
            uniq.append(scaled)
    # chart: w_0 = 1, unknowns w_1..w_{k-1}; constraint row: c0 + sum ci wi >= 0
    dim = k - 1
    vertices: list[tuple[Fraction, ...]] = []
    for combo in combinations(uniq, dim):
        A = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row[1:]] for row in combo])
        rhs = sympy.Matrix([[-sympy.Rational(row[0].numerator, row[0].denominator)] for row in combo])
        if A.rank() != dim:
            continue
        sol = A.solve(rhs)
        w = tuple(Fraction(int(sol[i].p), int(sol[i].q)) for i in range(dim))
        full = (Fraction(1),) + w
        if all(sum(ci * wi for ci, wi in zip(row, full)) >= 0 for row in uniq):
            if full not in vertices:
                vertices.append(full)
    ones = tuple(Fraction(1) for _ in range(k))
    if len(vertices) != k or ones not in vertices:
        return None
    vertices.sort(key=lambda w: (w != ones, w))
    points = tuple(chart_vector(basis, w) for w in vertices)
    return ExtremePoints(
        points=points,
        method="exact",
        detail="commuting associated matrices; simplex vertices in rational arithmetic",
    )


def _extreme_points_numeric(basis, commuting: bool) -> ExtremePoints:
    """Ray-shooting fallback: sample PSD-boundary points from an interior
    center and cluster by nullity; flagged, never exact."""
    k = len(basis)
    dim = k - 1
    Wmats = [b.W() for b in basis]

    def Wof(w1):
        return Wmats[0] + sum(float(x) * M for x, M in zip(w1, Wmats[1:]))

    def min_eig(w1):
        return float(np.linalg.eigvalsh((Wof(w1) + Wof(w1).conj().T) / 2)[0])

    ones = np.ones(dim)
    candidates = [np.zeros(dim), 0.5 * ones, 0.9 * ones]
    center = max(candidates, key=min_eig)
    if min_eig(center) <= 1e-12:
        pts = (chart_vector(basis, (1.0,) + tuple(ones)),)
        return ExtremePoints(
            points=pts,
            method="numeric-partial",
            detail="no strictly interior chart point found; returning the all-ones point",
        )
    rng = np.random.default_rng(20240817)
    dirs = [np.eye(dim)[i] * s for i in range(dim) for s in (+1.0, -1.0)]
    dirs += list(rng.standard_normal((16 * dim, dim)))
    boundary = []
    for d in dirs:
        nd = np.linalg.norm(d)
        if nd < 1e-12:
            continue
        d = d / nd
        lo, hi = 0.0, 1.0
        while min_eig(center + hi * d) > 0 and hi < 1e6:
            hi *= 2
        if hi >= 1e6:
            continue
        for _ in range(60):  # bisection to ~1e-10 of the boundary
            mid = (lo + hi) / 2
            if min_eig(center + mid * d) > 0:
                lo = mid
            else:
                hi = mid
        p = center + hi * d
        nullity = int(np.sum(np.linalg.eigvalsh(Wof(p)) < 1e-7))
        boundary.append((nullity, p))
    max_null = max((n for n, _ in boundary), default=0)
    clusters: list[np.ndarray] = []
    for n, p in boundary:
        if n < max_null:
            continue
        if all(np.linalg.norm(p - c) > 1e-6 for c in clusters):
            clusters.append(p)
    pts = [tuple([1.0] + list(map(float, p))) for p in clusters]
    ones_pt = tuple([1.0] * k)
    if all(np.linalg.norm(np.array(p) - np.array(ones_pt)) > 1e-6 for p in pts):
        pts.append(ones_pt)
    method = "numeric" if len(pts) == k else "numeric-partial"
    detail = (
        "associated matrices do not commute; ray-shooting fallback"
        if not commuting
        else "rational common eigenbasis unavailable; ray-shooting fallback"
    )
    return ExtremePoints(
        points=tuple(chart_vector(basis, p) for p in pts), method=method, detail=detail
    )


@dataclass(frozen=True)
class CylindricalDecomposition:
    """lambda = sum_j sigma_{f_j} with f_j = sum_a b_{j,a} 1_a.

    terms[j] = (kappa_j, b_j) where kappa_j > 0 is the W-eigenvalue and
    b_j = sqrt(kappa_j) * conj(d_j) for the orthonormal eigenvector d_j.
    reconstruction_error = max entrywise |sum_j kappa_j d_j d_j^* - W|;
    orthogonality_error = max_j |sum_a b_{j,a} mu[a]| (None for the
    all-ones point, whose single generator is the constant function)."""

    terms: tuple[tuple[float, tuple[complex, ...]], ...]
    reconstruction_error: float
    orthogonality_error: Optional[float]


def decompose_lambda(
    v: ClassVector, mu: Sequence[Union[Fraction, float]]
) -> CylindricalDecomposition:
    """Cylindrical decomposition of the spectral measure of an extreme point.

    Diagonalizes W(v) (Hermitian; eigenvalues clamped at 0 below a -1e-12
    tolerance, anything lower raises), keeps the strictly positive
    eigenvalues, and returns the cylindrical generators.  For every point
    except all-ones, each generator is checked to be orthogonal to constants
    in L^2(mu) within 1e-10 — this is what guarantees sigma_{f_j}({0}) = 0.
    """
    W = v.W()
    if not np.allclose(W, W.conj().T, atol=1e-12):
        raise ValueError("associated matrix is not Hermitian")
    vals, vecs = np.linalg.eigh(W)
    if vals[0] < -1e-12:
        raise ValueError(f"associated matrix is not PSD: min eigenvalue {vals[0]:.3e}")
    vals = np.clip(vals, 0.0, None)
    terms = []
    recon = np.zeros_like(W)
    for j in range(len(vals)):
        d = vecs[:, j]
        recon += vals[j] * np.outer(d, d.conj())
        # the zero eigenvalues of W come out as O(eps) noise either side of
        # 0; only genuinely positive eigenvalues contribute a generator
        if vals[j] > 1e-12:
            b = np.sqrt(vals[j]) * d.conj()
            terms.append((float(vals[j]), tuple(complex(x) for x in b)))
    reconstruction_error = float(np.max(np.abs(recon - W)))
    assert reconstruction_error <= 1e-10, "eigendecomposition must reconstruct W"

    mu_f = np.array([float(x) for x in mu])
    all_ones = all(x == 1 for x in v.class_values)
    orth: Optional[float] = None
    if not all_ones:
        orth = 0.0
        for _, b in terms:
            err = abs(sum(bb * mm for bb, mm in zip(b, mu_f)))
            orth = max(orth, float(err))
        assert orth <= 1e-10, f"generator not orthogonal to constants: {orth:.3e}"
    return CylindricalDecomposition(
        terms=tuple(terms),
        reconstruction_error=reconstruction_error,
        orthogonality_error=orth,
    )
