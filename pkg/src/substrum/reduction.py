"""Height, pure base, and return words of constant-length substitutions.

The one-sided fixed point U of a primitive aperiodic length-q substitution
can carry a hidden rotation factor: with g0 = gcd{k >= 1 : u_k = u_0}, the
height h is the largest divisor of g0 coprime to q.  When h > 1 the system
splits over a cyclic rotation, and the spectral analysis should be run on
the *pure base*: the substitution eta induced on the alphabet of h-blocks
of U that start at positions h*k.  eta again has constant length q, and the
blocking map phi intertwines it with the original substitution,
phi(eta(i)) = zeta(phi(i)).

Return words of a prefix u of U (the words between consecutive occurrences
of u) give another derived substitution theta, used here as a cross-check:
the substitution matrices of zeta, eta and theta all share their spectrum
away from 0 and the roots of unity, so `spectrum_difference_is_trivial`
strips x and cyclotomic factors from two characteristic polynomials and
compares what is left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import sympy
from sympy import Poly, Symbol

from .core import (
    Alphabet,
    ResourceBudgetError,
    Substitution,
    constant_length,
    fixed_point_prefix,
    is_primitive,
    power_substitution,
    seed_letter,
)

__all__ = [
    "HeightInfo",
    "PureBase",
    "ReturnWordSystem",
    "SpectrumComparison",
    "compute_height",
    "pure_base",
    "return_words",
    "spectrum_difference_is_trivial",
]

_x = Symbol("x")

# Fixed-point prefixes used for height/block/return-word scans stay below
# this many symbols.
DEFAULT_SCAN_BUDGET = 2 * 10**7


@dataclass(frozen=True)
class HeightInfo:
    """g0 = gcd of return positions of the first letter; h = its largest
    divisor coprime to q; prefix_len_used = symbols scanned to locate the
    first return (the gcd itself is decided exactly, without scanning)."""

    g0: int
    h: int
    prefix_len_used: int


def _require_constant_length(z: Substitution) -> int:
    q = constant_length(z)
    if q is None:
        raise ValueError("substitution must have constant length")
    return q


def _returns_divisible(w: Substitution, Q: int, a0: int, n: int) -> bool:
    """Does every occurrence of letter a0 in the fixed point of w sit at a
    position divisible by n?

    The fixed point U of w (length-Q images, U starting with a0) satisfies
    U = w(U), so the letter at position Q*r + i is w(U_r)_i.  The pairs
    (letter, position mod n) realized in U are therefore the closure of
    (a0, 0) under (a, r) -> (w(a)_i, (Q*r + i) mod n), and n divides every
    return position of a0 iff that closure never reaches (a0, s) with
    s != 0.  At most m*n states, so this decides divisibility exactly --
    no prefix of U is ever long enough to do that by scanning.
    """
    if n == 1:
        return True
    seen = {(a0, 0)}
    stack = [(a0, 0)]
    while stack:
        a, r = stack.pop()
        base = (Q * r) % n
        for i, b in enumerate(w.images[a]):
            s = (base + i) % n
            if b == a0 and s != 0:
                return False
            if (b, s) not in seen:
                seen.add((b, s))
                stack.append((b, s))
    return True


def compute_height(z: Substitution, max_prefix: int = DEFAULT_SCAN_BUDGET) -> HeightInfo:
    """Height of the fixed-point system of a primitive constant-length substitution.

    g0 is the gcd of the positions k >= 1 with u_k = u_0.  A prefix scan
    only ever finds the first return position k1 (primitivity gives it a
    bounded gap); g0 is then the largest divisor n of k1 such that *all*
    return positions are divisible by n, which `_returns_divisible`
    decides exactly from the self-similarity of U.  h is the largest
    divisor of g0 coprime to q.
    """
    q = _require_constant_length(z)
    if not is_primitive(z).primitive:
        raise ValueError("substitution must be primitive")
    letter, power = seed_letter(z)
    w = z if power == 1 else power_substitution(z, power)
    Q = q**power

    L = max(64, Q * Q)
    while True:
        if L > max_prefix:
            raise ResourceBudgetError(
                f"no return of the first letter within {max_prefix} symbols"
            )
        u = fixed_point_prefix(z, letter, power, min(L, max_prefix))
        positions = np.nonzero(u[1:] == u[0])[0]
        if positions.size:
            k1 = int(positions[0]) + 1
            prefix_used = len(u)
            break
        L *= 2

    g0 = max(
        n
        for n in range(1, k1 + 1)
        if k1 % n == 0 and _returns_divisible(w, Q, letter, n)
    )

    h = g0
    while (d := math.gcd(h, q)) > 1:
        h //= d
    assert h >= 1 and g0 % h == 0 and math.gcd(h, q) == 1
    return HeightInfo(g0=g0, h=h, prefix_len_used=prefix_used)


@dataclass(frozen=True)
class PureBase:
    """Pure base eta on the alphabet of h-blocks, with the blocking map phi.

    phi is stored as (block_token, block_word) pairs in eta's alphabet
    order; block_word is a tuple of original letter tokens of length h.
    For height 1 this is the trivial reduction: eta = z, phi = identity.
    """

    eta: Substitution
    phi: tuple[tuple[str, tuple[str, ...]], ...]
    height: int

    def phi_map(self) -> dict[str, tuple[str, ...]]:
        return dict(self.phi)


def _block_token(tokens: Sequence[str]) -> str:
    if all(len(t) == 1 for t in tokens):
        return "".join(tokens)
    return "-".join(tokens)


def pure_base(z: Substitution, max_prefix: int = DEFAULT_SCAN_BUDGET) -> PureBase:
    """Dekking's pure base: the induced substitution on h-blocks of U.

    The block alphabet is the set of h-blocks of U starting at positions
    h*k, ordered by first appearance in U and collected until closed under
    expansion (the image of a known block, cut into q blocks of length h,
    only produces known blocks).  eta maps each block letter to those q
    blocks; phi(eta(i)) = zeta(phi(i)) is asserted on every letter.
    """
    q = _require_constant_length(z)
    info = compute_height(z, max_prefix=max_prefix)
    h = info.h
    tok = z.alphabet.token
    if h == 1:
        phi = tuple((tok(a), (tok(a),)) for a in range(z.size))
        return PureBase(eta=z, phi=phi, height=1)

    letter, power = seed_letter(z)
    L = h * q**4
    while True:
        if L > max_prefix:
            raise ResourceBudgetError(
                f"block alphabet not closed within {max_prefix} symbols"
            )
        u = fixed_point_prefix(z, letter, power, L - (L % h))
        grid = u.reshape(-1, h)
        _, first_idx = np.unique(grid, axis=0, return_index=True)
        blocks = [tuple(int(x) for x in grid[i]) for i in sorted(first_idx)]
        block_set = set(blocks)
        closed = True
        for B in blocks:
            img = z.apply(B)
            for i in range(q):
                if img[i * h : (i + 1) * h] not in block_set:
                    closed = False
                    break
            if not closed:
                break
        if closed:
            break
        L *= q

    index = {B: i for i, B in enumerate(blocks)}
    tokens = tuple(_block_token(tuple(tok(a) for a in B)) for B in blocks)
    images = []
    for B in blocks:
        img = z.apply(B)
        images.append(tuple(index[img[i * h : (i + 1) * h]] for i in range(q)))
    eta = Substitution(Alphabet(tokens), tuple(images))

    # phi o eta = zeta o phi, exactly, on every block letter
    for i, B in enumerate(blocks):
        expanded = tuple(x for j in eta.images[i] for x in blocks[j])
        assert expanded == z.apply(B), "blocking map must intertwine the substitutions"

    phi = tuple((tokens[i], tuple(tok(a) for a in B)) for i, B in enumerate(blocks))
    return PureBase(eta=eta, phi=phi, height=h)


@dataclass(frozen=True)
class ReturnWordSystem:
    """Return words of the prefix u of U, with the derived substitution theta.

    words[i] is the return word named by theta's i-th letter (token "r<i>"),
    in order of first appearance in U.  Each return word v satisfies: u is a
    prefix of v*u, and u occurs in v*u exactly twice (at the ends).
    """

    u: tuple[int, ...]
    words: tuple[tuple[int, ...], ...]
    theta: Substitution


def _occurrences(prefix: np.ndarray, u: Sequence[int]) -> np.ndarray:
    """Start positions of all (possibly overlapping) occurrences of u."""
    n, k = len(prefix), len(u)
    if n < k:
        return np.empty(0, dtype=np.int64)
    mask = np.ones(n - k + 1, dtype=bool)
    for j, a in enumerate(u):
        mask &= prefix[j : n - k + 1 + j] == a
    return np.nonzero(mask)[0].astype(np.int64)


def return_words(
    z: Substitution,
    u: Optional[Sequence[int]] = None,
    max_prefix: int = DEFAULT_SCAN_BUDGET,
) -> ReturnWordSystem:
    """Return words of a nonempty prefix u of the fixed point U.

    Scans growing fixed-point prefixes, cutting at consecutive occurrences
    of u, until the set of return words is unchanged across a growth step
    and the scan extends at least 2*G*|u|*q symbols past the last new word
    (G = largest gap between consecutive occurrences seen).  theta(v) is the
    decomposition of zeta(v) into return words: the occurrences of u in the
    word zeta(v)u are exactly the global occurrences in the corresponding
    window of U, so cutting at them is the unique decomposition.

    Defaults u to the first h-block of U (the image of the first pure-base
    letter), the prefix the height reduction naturally distinguishes.
    """
    q = _require_constant_length(z)
    letter, power = seed_letter(z)
    if u is None:
        h = compute_height(z, max_prefix=max_prefix).h
        u = tuple(int(x) for x in fixed_point_prefix(z, letter, power, h))
    else:
        u = tuple(int(x) for x in u)
        if len(u) == 0:
            raise ValueError("u must be nonempty")
        head = fixed_point_prefix(z, letter, power, len(u))
        if tuple(int(x) for x in head) != u:
            raise ValueError("u must be a prefix of the fixed point")

    L = max(q**4, 64 * len(u))
    prev_words: Optional[tuple] = None
    while True:
        if L > max_prefix:
            raise ResourceBudgetError(
                f"return words not closed within {max_prefix} symbols"
            )
        prefix = fixed_point_prefix(z, letter, power, L)
        occ = _occurrences(prefix, u)
        assert occ.size >= 2 and occ[0] == 0
        gaps = np.diff(occ)
        G = int(gaps.max())
        seen: dict[tuple[int, ...], int] = {}
        last_new_end = 0
        for a, b in zip(occ[:-1], occ[1:]):
            w = tuple(int(x) for x in prefix[a:b])
            if w not in seen:
                seen[w] = len(seen)
                last_new_end = int(b)
        words = tuple(seen)
        window = 2 * G * len(u) * q
        if words == prev_words and int(occ[-1]) >= last_new_end + window:
            theta = _derived_substitution(z, u, words)
            if theta is not None:
                return ReturnWordSystem(u=u, words=words, theta=theta)
        prev_words = words
        L *= 2


def _derived_substitution(
    z: Substitution, u: tuple[int, ...], words: tuple[tuple[int, ...], ...]
) -> Optional[Substitution]:
    """theta on the return-word alphabet; None if some image needs an unseen word."""
    index = {w: i for i, w in enumerate(words)}
    images = []
    for w in words:
        img_word = z.apply(w) + u
        cuts = _occurrences(np.array(img_word, dtype=np.int64), u)
        cuts = cuts[cuts <= len(img_word) - len(u)]
        assert cuts[0] == 0 and int(cuts[-1]) == len(img_word) - len(u)
        pieces = [img_word[a:b] for a, b in zip(cuts[:-1], cuts[1:])]
        if any(p not in index for p in pieces):
            return None
        images.append(tuple(index[p] for p in pieces))
    alphabet = Alphabet(tuple(f"r{i}" for i in range(len(words))))
    return Substitution(alphabet, tuple(images))


# ---------------------------------------------------------------------------
# Spectrum comparison modulo 0 and roots of unity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumComparison:
    """leftover = the two inputs with x-powers, cyclotomic factors, and the
    common remaining factor removed; trivial iff both leftovers are 1."""

    trivial: bool
    leftover: tuple[tuple[int, ...], tuple[int, ...]]


def _coeffs(p) -> list[int]:
    if hasattr(p, "coeffs"):
        return [int(c) for c in p.coeffs]
    return [int(c) for c in p]


def _strip_trivial_roots(p: Poly, cyclotomic_bound: int) -> Poly:
    # roots at 0: drop trailing zero coefficients
    while p.degree() > 0 and p.eval(0) == 0:
        p = Poly(p.all_coeffs()[:-1], _x, domain="ZZ")
    # roots of unity: divide out cyclotomic factors while they divide exactly;
    # phi(d) >= sqrt(d/2), so any cyclotomic factor of a degree-n polynomial
    # has d <= 2 n^2 and the bound exhausts all candidates
    for d in range(1, cyclotomic_bound + 1):
        phi = Poly(sympy.cyclotomic_poly(d, _x), _x, domain="ZZ")
        if phi.degree() > p.degree():
            continue
        while p.degree() >= phi.degree():
            quo, rem = sympy.div(p, phi)
            if not rem.is_zero:
                break
            p = Poly(quo, _x, domain="ZZ")
    return p


def spectrum_difference_is_trivial(p1, p2) -> SpectrumComparison:
    """Do two monic integer characteristic polynomials share their spectrum
    away from 0 and the roots of unity?

    Strips all factors x and all cyclotomic factors Phi_d from both (exact
    integer division, d up to 2*max(deg)^2 which covers every cyclotomic
    polynomial that could divide), then cancels the common factor.  trivial
    is true iff nothing is left on either side.
    """
    c1, c2 = _coeffs(p1), _coeffs(p2)
    n = max(len(c1), len(c2)) - 1
    bound = 2 * n * n + 1
    s1 = _strip_trivial_roots(Poly(c1, _x, domain="ZZ"), bound)
    s2 = _strip_trivial_roots(Poly(c2, _x, domain="ZZ"), bound)
    g = sympy.gcd(s1, s2)
    l1, r1 = sympy.div(s1, g)
    l2, r2 = sympy.div(s2, g)
    assert r1.is_zero and r2.is_zero
    left1 = tuple(int(c) for c in Poly(l1, _x).all_coeffs())
    left2 = tuple(int(c) for c in Poly(l2, _x).all_coeffs())
    return SpectrumComparison(
        trivial=(left1 == (1,) and left2 == (1,)),
        leftover=(left1, left2),
    )
