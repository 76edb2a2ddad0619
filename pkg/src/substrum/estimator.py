"""Empirical spectral analysis along the fixed point.

Everything here is estimation, not certification: correlation Fourier
coefficients from Birkhoff averages over a long fixed-point prefix, the
times-q renormalization identity as a consistency check, Cesaro point-mass
extraction, Fejer ball-mass estimates feeding log-log local-dimension fits,
and partial-sum growth exponents.  The exact modules never consume these
numbers; they corroborate them.

Conventions.  All estimates derive from one table of exact integer lag
counts N[k, a, b] = #{n < L : u[n] = a, u[n+k] = b} (see _kernels).  The
pair correlation stored and cached per pair (a, b) is

    sigma_ab(k) = (1/L) * sum_{n<L} 1_a(u[n+k]) * 1_b(u[n]) = N[k, b, a] / L

and for a cylindrical f = sum_a b_a 1_a,

    sigma_f(k) = (1/L) * sum_{n<L} f(u[n+k]) * conj(f(u[n]))
               = sum_{a,b} b_a conj(b_b) sigma_ab(k).

Both satisfy the renormalization pull-back against the coincidence matrix C:
sigma_ab(q n) ~ (1/q) sum_{c,d} C[(a,b),(c,d)] sigma_cd(n), because C is
invariant under transposing pairs simultaneously in rows and columns.

Determinism: counts are exact int64 regardless of backend and thread count,
so every derived table is bit-identical across runs and configurations, and
the CSV cache round-trips floats exactly via repr.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .coincidence import coincidence_matrix
from .core import (
    Substitution,
    constant_length,
    fixed_point_prefix,
    seed_letter,
    substitution_matrix,
)
from .decomposition import letter_frequencies
from .eigen import j_pr_kappa

DEFAULT_PREFIX = 10**7
DEFAULT_LAGS = 4096

_CACHE_HEADER = "lag,re,im"


def resolve_cache_dir(cache_dir: Union[str, Path, None] = None) -> Path:
    """Cache directory: explicit argument, then $SUBSTRUM_CACHE, then ./.substrum-cache."""
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get("SUBSTRUM_CACHE")
    if env:
        return Path(env)
    return Path(".substrum-cache")


@dataclass(frozen=True)
class PairCorrelations:
    """All pair correlations sigma_ab(k), 0 <= k <= K, for one substitution.

    sigma has shape (K+1, m, m) with sigma[k, a, b] = sigma_ab(k); this is
    the unit of computation and of the on-disk cache (per-pair CSV files).
    """

    subst_hash: str
    K: int
    L: int
    tokens: tuple[str, ...]
    sigma: np.ndarray

    @property
    def m(self) -> int:
        return len(self.tokens)

    def pair(self, a: int, b: int) -> np.ndarray:
        return self.sigma[:, a, b]

    def flat(self) -> np.ndarray:
        """(K+1, m*m) view, pair (a,b) at column a*m + b."""
        return self.sigma.reshape(self.K + 1, self.m * self.m)


@dataclass(frozen=True)
class CorrelationTable:
    """sigma_hat(k) for one function: a letter pair or a cylindrical vector."""

    subst_hash: str
    K: int
    L: int
    descriptor: tuple
    sigma: np.ndarray  # complex128, shape (K+1,)

    def __post_init__(self):
        if self.sigma.shape != (self.K + 1,):
            raise ValueError("sigma must have K+1 entries")


def _pair_cache_name(zhash: str, letter: int, power: int, K: int, L: int, a: int, b: int) -> str:
    return f"{zhash[:16]}_s{letter}p{power}_K{K}_L{L}_{a}x{b}.csv"


def _write_pair_file(path: Path, values: np.ndarray) -> None:
    lines = [_CACHE_HEADER]
    lines.extend(f"{k},{float(v)!r},0.0" for k, v in enumerate(values))
    tmp = path.with_suffix(".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def _read_pair_file(path: Path, K: int) -> Optional[np.ndarray]:
    try:
        lines = path.read_text().splitlines()
    except OSError:
        return None
    if len(lines) != K + 2 or lines[0] != _CACHE_HEADER:
        return None
    out = np.empty(K + 1, dtype=np.float64)
    try:
        for i, line in enumerate(lines[1:]):
            lag, re, im = line.split(",")
            if int(lag) != i or float(im) != 0.0:
                return None
            out[i] = float(re)
    except ValueError:
        return None
    return out


def pair_correlations(
    z: Substitution,
    K: int = DEFAULT_LAGS,
    L: int = DEFAULT_PREFIX,
    cache_dir: Union[str, Path, None] = None,
    backend: Optional[str] = None,
) -> PairCorrelations:
    """Estimate (or load from cache) all pair correlations at budget (K, L)."""
    q = constant_length(z)
    if q is None:
        raise ValueError("correlation estimation requires a constant-length substitution")
    m = z.size
    letter, power = seed_letter(z)
    zhash = z.hash_key()
    directory = resolve_cache_dir(cache_dir)

    paths = [
        [directory / _pair_cache_name(zhash, letter, power, K, L, a, b) for b in range(m)]
        for a in range(m)
    ]
    cached = [[_read_pair_file(paths[a][b], K) for b in range(m)] for a in range(m)]
    if all(col is not None for row in cached for col in row):
        sigma = np.stack([np.stack(row, axis=-1) for row in cached], axis=-2)
        return PairCorrelations(zhash, K, L, z.alphabet.letters, sigma)

    u = fixed_point_prefix(z, letter, power, L + K)
    counts = _kernels.pair_counts(u, L, K, m, backend=backend)
    # public convention puts the lead letter first: sigma_ab(k) = N[k,b,a]/L
    sigma = np.swapaxes(counts, 1, 2).astype(np.float64) / L

    directory.mkdir(parents=True, exist_ok=True)
    for a in range(m):
        for b in range(m):
            _write_pair_file(paths[a][b], sigma[:, a, b])
    return PairCorrelations(zhash, K, L, z.alphabet.letters, sigma)


def _coefficient_vector(z: Substitution, f) -> np.ndarray:
    vec = np.asarray([complex(x) for x in f], dtype=np.complex128)
    if vec.shape != (z.size,):
        raise ValueError(f"cylindrical vector must have {z.size} entries, got {vec.shape}")
    return vec


def correlations(
    z: Substitution,
    f_or_pair,
    K: int = DEFAULT_LAGS,
    L: int = DEFAULT_PREFIX,
    cache_dir: Union[str, Path, None] = None,
    backend: Optional[str] = None,
) -> CorrelationTable:
    """Correlation coefficients sigma_hat(k), k = 0..K, for a pair or a vector.

    A pair is a 2-tuple of letter *tokens* (strings); any other sequence is
    read as a cylindrical coefficient vector, one entry per letter.  Results
    are deterministic for fixed (z, K, L) and served from the CSV cache when
    available.
    """
    table = pair_correlations(z, K, L, cache_dir, backend)
    if (
        isinstance(f_or_pair, tuple)
        and len(f_or_pair) == 2
        and all(isinstance(x, str) for x in f_or_pair)
    ):
        a = z.alphabet.index(f_or_pair[0])
        b = z.alphabet.index(f_or_pair[1])
        sigma = table.pair(a, b).astype(np.complex128)
        descriptor = ("pair", f_or_pair[0], f_or_pair[1])
    else:
        vec = _coefficient_vector(z, f_or_pair)
        sigma = np.einsum("a,b,kab->k", vec, np.conj(vec), table.sigma)
        descriptor = ("cylindrical", tuple(complex(x) for x in vec))
    return CorrelationTable(table.subst_hash, K, L, descriptor, sigma)


def renormalization_check(
    z: Substitution,
    K: int = 1000,
    L: int = DEFAULT_PREFIX,
    cache_dir: Union[str, Path, None] = None,
    backend: Optional[str] = None,
) -> float:
    """Max deviation of sigma_ab(q n) from (1/q) * C applied to sigma_cd(n).

    The Fourier side of the times-q pull-back S_q(Sigma) = (1/q) C Sigma;
    exact in the limit, so the deviation measures estimation error and must
    shrink as L grows.  Compared for all pairs and all 0 <= n <= K/q.
    """
    q = constant_length(z)
    if q is None:
        raise ValueError("renormalization requires a constant-length substitution")
    table = pair_correlations(z, K, L, cache_dir, backend)
    C = coincidence_matrix(z).to_numpy(dtype=np.float64)
    flat = table.flat()
    n_max = K // q
    lhs = flat[q * np.arange(n_max + 1)]
    rhs = flat[: n_max + 1] @ C.T / q
    return float(np.max(np.abs(lhs - rhs)))


def point_mass_at_zero(table: CorrelationTable) -> float:
    """Cesaro estimate of the atom at 0: (1/K) sum_{k<K} sigma_hat(k).

    Converges to sigma({0}) by Wiener's lemma; for cylindrical f this equals
    |sum_a b_a mu[a]|^2.  The imaginary part of the average vanishes in the
    limit and is discarded.
    """
    K = table.K
    return float(np.mean(table.sigma[:K]).real)


def ball_mass(table: CorrelationTable, r: float) -> float:
    """Fejer estimate of sigma(B_r(0)) with window N = round(1/r).

    (1/N) sum_{|k|<N} (1 - |k|/N) sigma_hat(k), folded to k >= 0 by the
    Hermitian symmetry sigma_hat(-k) = conj(sigma_hat(k)).  The Fejer kernel
    is nonnegative and comparable to the sharp indicator of B_r only up to
    constants, which cancel in log-log slopes.
    """
    N = max(1, int(round(1.0 / r)))
    if N > table.K:
        raise ValueError(f"radius {r} needs {N} lags but the table holds K={table.K}")
    k = np.arange(1, N)
    mass = table.sigma[0].real
    if N > 1:
        mass += 2.0 * np.sum((1.0 - k / N) * table.sigma[1:N].real)
    return float(mass / N)


@dataclass(frozen=True)
class DimensionEstimate:
    """Log-log fit of ball mass against radius at scales r_n = q^{-n}."""

    scales: tuple[int, ...]
    radii: tuple[float, ...]
    masses: tuple[float, ...]
    corrected_masses: tuple[float, ...]
    d_hat: float
    residual: float
    d_pred: Optional[float]
    prediction: str
    j: int
    theta_modulus: float
    kappa: int
    kappa_corrected: bool


def dimension_fit(
    z: Substitution,
    f: Sequence,
    scales: Optional[Sequence[int]] = None,
    K: int = DEFAULT_LAGS,
    L: int = DEFAULT_PREFIX,
    cache_dir: Union[str, Path, None] = None,
    backend: Optional[str] = None,
) -> DimensionEstimate:
    """Estimate the local dimension of sigma_f at 0 and compare to 2 - 2*alpha.

    Fits the slope of log ball_mass(q^{-n}) against log q^{-n} over the given
    exponents n (default: every n >= 1 with q^n <= K).  When the elimination
    exponent kappa of f exceeds 1, masses are divided by |log r|^(kappa-1)
    before fitting.  The prediction d = 2 - 2 log_q |theta_j| applies when
    |theta_j| > 1; otherwise the mass decays faster than r^(2-eps) for every
    eps and only that regime is reported.
    """
    q = constant_length(z)
    if q is None:
        raise ValueError("dimension estimation requires a constant-length substitution")
    if scales is None:
        scales = range(1, int(math.floor(math.log(K, q))) + 1)
    scales = tuple(int(n) for n in scales)
    if any(n < 1 for n in scales):
        raise ValueError("scales are exponents n >= 1 of r = q^-n")

    table = correlations(z, f, K, L, cache_dir, backend)
    try:
        rational_f = [Fraction(x) for x in f]
    except (TypeError, ValueError) as exc:
        raise ValueError("dimension prediction needs rational real coefficients") from exc
    elim = j_pr_kappa(substitution_matrix(z), rational_f)
    theta_mod = float((elim.theta_modulus_lo + elim.theta_modulus_hi) / 2)
    kappa = elim.kappa

    used, radii, masses, corrected = [], [], [], []
    for n in scales:
        r = q ** (-n)
        mass = ball_mass(table, r)
        if mass <= 0.0:
            continue
        used.append(n)
        radii.append(r)
        masses.append(mass)
        corr = mass / abs(math.log(r)) ** (kappa - 1) if kappa > 1 else mass
        corrected.append(corr)
    if len(radii) < 5:
        raise ValueError(f"only {len(radii)} usable scales; need at least 5")

    log_r = np.log(radii)
    log_m = np.log(corrected)
    A = np.stack([log_r, np.ones_like(log_r)], axis=1)
    (slope, _intercept), *_ = np.linalg.lstsq(A, log_m, rcond=None)
    residual = float(np.sqrt(np.mean((A @ np.array([slope, _intercept]) - log_m) ** 2)))

    if theta_mod > 1.0:
        d_pred = 2.0 - 2.0 * math.log(theta_mod, q)
        prediction = f"d = 2 - 2 log_q|theta_j| = {d_pred:.6g}"
    else:
        d_pred = None
        prediction = "mass is o(r^(2-eps)) for every eps > 0; local dimension >= 2 - eps"

    return DimensionEstimate(
        scales=tuple(used),
        radii=tuple(float(r) for r in radii),
        masses=tuple(float(x) for x in masses),
        corrected_masses=tuple(float(x) for x in corrected),
        d_hat=float(slope),
        residual=residual,
        d_pred=d_pred,
        prediction=prediction,
        j=elim.j,
        theta_modulus=theta_mod,
        kappa=kappa,
        kappa_corrected=kappa > 1,
    )


@dataclass(frozen=True)
class BirkhoffGrowth:
    """Fitted growth exponent of running-max partial sums at q-adic lengths."""

    exponent: float
    residual: float
    lengths: tuple[int, ...]
    max_sums: tuple[float, ...]


def birkhoff_growth(
    z: Substitution, f: Sequence, min_exp: int = 4, max_exp: int = 12
) -> BirkhoffGrowth:
    """Fit log max_{M<=N} |S_M| against log N at N = q^min_exp .. q^max_exp.

    S_M = sum_{n<M} f(u_n) along the fixed point.  The expected slope for
    mean-zero f is alpha = log_q |theta_j|; bounded sums fit slope ~ 0,
    consistent with |theta_j| <= 1.
    """
    q = constant_length(z)
    if q is None:
        raise ValueError("growth fit requires a constant-length substitution")
    if max_exp - min_exp < 2:
        raise ValueError("need at least three lengths to fit")
    vec = _coefficient_vector(z, f)
    if not np.any(vec):
        raise ValueError("f must be nonzero")
    letter, power = seed_letter(z)
    u = fixed_point_prefix(z, letter, power, q**max_exp)
    running = np.maximum.accumulate(np.abs(np.cumsum(vec[u])))
    lengths = [q**n for n in range(min_exp, max_exp + 1)]
    maxima = [float(running[N - 1]) for N in lengths]
    if any(v == 0.0 for v in maxima):
        raise ValueError("partial sums vanish identically on a q-adic prefix")
    log_n = np.log(lengths)
    log_s = np.log(maxima)
    A = np.stack([log_n, np.ones_like(log_n)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, log_s, rcond=None)
    residual = float(np.sqrt(np.mean((A @ np.array([slope, intercept]) - log_s) ** 2)))
    return BirkhoffGrowth(float(slope), residual, tuple(lengths), tuple(maxima))


def suspension_kernel(omega):
    """(sin(pi w)/(pi w))^2 with the removable singularity filled: value 1 at 0.

    The spectral density factor relating the Z-action to its unit suspension
    flow; apply pointwise to frequencies.
    """
    return np.sinc(omega) ** 2


def expected_zero_coefficient(z: Substitution, f: Sequence) -> float:
    """Exact sum_a |b_a|^2 mu[a], the limit of sigma_hat_f(0)."""
    vec = _coefficient_vector(z, f)
    mu = letter_frequencies(z)
    return float(sum(abs(vec[a]) ** 2 * float(mu[a]) for a in range(z.size)))


def mean_under_frequencies(z: Substitution, f: Sequence) -> complex:
    """Exact mean sum_a b_a mu[a] of a cylindrical function."""
    vec = _coefficient_vector(z, f)
    mu = letter_frequencies(z)
    return complex(sum(vec[a] * float(mu[a]) for a in range(z.size)))
