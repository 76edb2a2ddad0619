"""Bi-substitution, coincidence matrix, and ergodic pair classes.

For a constant-length substitution zeta, the bi-substitution acts on ordered
letter pairs by applying zeta to both coordinates and reading the results
positionwise: (a,b) maps to the length-q pair word ((zeta(a)_i, zeta(b)_i)).
Its substitution matrix is the coincidence matrix C.

The directed graph "pair p' emits pair p" decomposes A x A into ergodic
classes (the minimal forward-invariant orbit closures, i.e. the terminal
strongly connected components — the diagonal E_0 is always one of them) and
a transitive remainder T.  Dekking's criterion reads the spectrum off this
picture: a height-1 substitution has purely discrete spectrum iff E_0 is
the only ergodic class, i.e. every pair of letters eventually develops a
coincidence.  The number k of ergodic classes equals the multiplicity of
the eigenvalue q in C, and drives the continuous-part decomposition
elsewhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import Alphabet, IntMatrix, Substitution, constant_length, is_primitive, substitution_matrix
from .reduction import compute_height

__all__ = [
    "PairAlphabet",
    "ErgodicClassification",
    "BijectivityProfile",
    "bisubstitution",
    "coincidence_matrix",
    "ergodic_classes",
    "dekking_pure_discrete",
    "bijectivity_profile",
]


@dataclass(frozen=True)
class PairAlphabet:
    """Ordered pairs (a,b) of letters, indexed row-major: (a,b) <-> a*m + b."""

    base: Alphabet

    @property
    def m(self) -> int:
        return len(self.base)

    def __len__(self) -> int:
        return self.m * self.m

    def index(self, a: int, b: int) -> int:
        return a * self.m + b

    def pair(self, i: int) -> tuple[int, int]:
        return divmod(i, self.m)

    def token(self, i: int) -> str:
        a, b = self.pair(i)
        return f"({self.base.token(a)},{self.base.token(b)})"

    def alphabet(self) -> Alphabet:
        return Alphabet(tuple(self.token(i) for i in range(len(self))))


def bisubstitution(z: Substitution) -> Substitution:
    """The substitution induced on ordered pairs by positionwise application."""
    q = constant_length(z)
    if q is None:
        raise ValueError("bi-substitution requires constant length")
    pa = PairAlphabet(z.alphabet)
    m = z.size
    images = []
    for a in range(m):
        for b in range(m):
            za, zb = z.images[a], z.images[b]
            images.append(tuple(pa.index(za[i], zb[i]) for i in range(q)))
    return Substitution(pa.alphabet(), tuple(images))


def coincidence_matrix(z: Substitution) -> IntMatrix:
    """Substitution matrix of the bi-substitution: C[p, p'] counts the pair p
    in the image of p'.  m^2 x m^2, column sums q."""
    return substitution_matrix(bisubstitution(z))


@dataclass(frozen=True)
class ErgodicClassification:
    """Ergodic classes E_0..E_{k-1} (E_0 = diagonal), transitive pairs T, and
    the least power j at which C^j is entrywise positive on every class
    block (None if not reached within the Wielandt-style search bound)."""

    classes: tuple[tuple[tuple[int, int], ...], ...]
    transitive: tuple[tuple[int, int], ...]
    k: int
    stabilizing_power: Optional[int]


def ergodic_classes(z: Substitution) -> ErgodicClassification:
    """Classify A x A into ergodic classes and transitive pairs.

    Pair p' emits p when p occurs in the bi-substitution image of p'; orbit
    closures are forward-reachable sets, and the minimal ones are exactly
    the terminal strongly connected components of the emission graph.  The
    diagonal is always terminal and connected (primitivity), so it is
    reported first as E_0; the remaining classes are ordered by their
    smallest pair index.
    """
    if not is_primitive(z).primitive:
        raise ValueError("ergodic classification requires a primitive substitution")
    zz = bisubstitution(z)
    pa = PairAlphabet(z.alphabet)
    n = len(pa)
    rows, cols = [], []
    for p in range(n):
        for p2 in set(zz.images[p]):
            rows.append(p)
            cols.append(p2)
    adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=True, connection="strong")

    terminal = set(labels)
    for p in range(n):
        for p2 in zz.images[p]:
            if labels[p2] != labels[p]:
                terminal.discard(labels[p])
    members: dict[int, list[int]] = {}
    for p in range(n):
        members.setdefault(labels[p], []).append(p)

    diag_label = labels[pa.index(0, 0)]
    assert diag_label in terminal, "diagonal class must be ergodic"
    assert sorted(members[diag_label]) == [pa.index(a, a) for a in range(z.size)], (
        "diagonal class must consist of exactly the diagonal pairs"
    )
    other = sorted(
        (lab for lab in terminal if lab != diag_label),
        key=lambda lab: min(members[lab]),
    )
    class_indices = [sorted(members[diag_label])] + [sorted(members[lab]) for lab in other]
    classes = tuple(tuple(pa.pair(i) for i in cls) for cls in class_indices)
    trans = tuple(
        pa.pair(i) for i in range(n) if labels[i] not in terminal
    )

    C = coincidence_matrix(z)
    stabilizing = _stabilizing_power(C, class_indices)
    return ErgodicClassification(
        classes=classes,
        transitive=trans,
        k=len(classes),
        stabilizing_power=stabilizing,
    )


def _stabilizing_power(C: IntMatrix, class_indices: list[list[int]]) -> Optional[int]:
    """Least j with every class block of C^j entrywise positive.

    Columns indexed by a class have support inside the class, so the block
    of C^j is the j-th power of the block of C; positivity only depends on
    the boolean structure, so clipped 0/1 powers cannot overflow.  The
    sequence of boolean powers is eventually periodic, so the search stops
    as soon as a power repeats (a periodic non-positive pattern can never
    become positive later); n(n+1) stays as a hard cap, dominating the
    Wielandt bound for every block.
    """
    n = C.dim
    B = (C.to_numpy() > 0).astype(np.uint8)
    P = B.copy()
    blocks = [np.ix_(cls, cls) for cls in class_indices]
    seen = set()
    for j in range(1, n * (n + 1) + 1):
        if all(P[blk].all() for blk in blocks):
            return j
        key = P.tobytes()
        if key in seen:
            return None
        seen.add(key)
        P = np.clip(P @ B, 0, 1)
    return None


def dekking_pure_discrete(z: Substitution) -> bool:
    """Dekking's criterion: purely discrete spectrum iff the diagonal is the
    only ergodic class.  Only valid at height 1; callers holding a height-h
    substitution must pass its pure base."""
    q = constant_length(z)
    if q is None:
        raise ValueError("criterion requires constant length")
    h = compute_height(z).h
    if h != 1:
        raise ValueError(f"height is {h}, not 1; reduce to the pure base first")
    return ergodic_classes(z).k == 1


@dataclass(frozen=True)
class BijectivityProfile:
    # abelian is None when the substitution is not bijective (not meaningful)
    bijective: bool
    abelian: Optional[bool]


def bijectivity_profile(z: Substitution) -> BijectivityProfile:
    """Is each position map a permutation, and do the permutations commute?

    Position i induces the map a -> zeta(a)_i; the substitution is bijective
    when every position map is a permutation of the alphabet.  The group the
    position maps generate is abelian iff the generators pairwise commute,
    so pairwise commutation is what is checked and reported.
    """
    q = constant_length(z)
    if q is None:
        raise ValueError("bijectivity requires constant length")
    m = z.size
    maps = [tuple(z.images[a][i] for a in range(m)) for i in range(q)]
    if any(len(set(f)) != m for f in maps):
        return BijectivityProfile(bijective=False, abelian=None)
    abelian = all(
        tuple(f[g[a]] for a in range(m)) == tuple(g[f[a]] for a in range(m))
        for fi, f in enumerate(maps)
        for g in maps[fi + 1 :]
    )
    return BijectivityProfile(bijective=True, abelian=abelian)
