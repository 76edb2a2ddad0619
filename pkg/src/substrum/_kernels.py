"""Pair-count kernels: a numba direct loop and a pure-numpy FFT fallback.

The hot computation behind every correlation estimate is the table of lag
counts

    N[k, a, b] = #{ 0 <= n < L : u[n] = a and u[n + k] = b },  0 <= k <= K,

taken over a fixed-point prefix of length L + K.  Two interchangeable
backends produce this table:

* ``numba`` -- a parallel direct counting loop (O(L*K) integer increments,
  one lag per thread, no large temporaries);
* ``numpy`` -- linear cross-correlation of letter indicators via real FFTs
  (O(m*(m+2)*M*log M) flops with M the padded length), rounded back to
  exact integers.

Both return bit-identical int64 tables: the FFT roundoff at these sizes is
orders of magnitude below 1/2, which we assert before rounding.  Backend
choice is governed by the SUBSTRUM_BACKEND environment variable ("numba",
"numpy", or "auto"); in auto mode a crude operation-count model picks the
cheaper backend for the given (L, K, m), which matters because the direct
loop wins for narrow lag windows while the FFT wins decisively at the
default K = 4096.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via SUBSTRUM_BACKEND=numpy
    numba = None
    NUMBA_AVAILABLE = False


# Relative cost of one FFT "flop" against one direct-loop increment,
# calibrated once on a single core; only the crossover location depends on
# it, never the results.
_FFT_COST_RATIO = 4.0


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if NUMBA_AVAILABLE else ("numpy",)


def resolve_backend(L: int, K: int, m: int, backend: str | None = None) -> str:
    """Pick the backend for a pair-count of shape (L, K, m).

    Explicit *backend* wins, then SUBSTRUM_BACKEND, then the cost model.
    """
    choice = backend or os.environ.get("SUBSTRUM_BACKEND", "auto")
    choice = choice.strip().lower()
    if choice == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba backend requested but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    if choice != "auto":
        raise ValueError(f"unknown backend {choice!r} (expected numba, numpy or auto)")
    if not NUMBA_AVAILABLE:
        return "numpy"
    direct_cost = float(L) * float(K + 1)
    M = _padded_length(L + K)
    fft_cost = _FFT_COST_RATIO * m * (m + 2) * M * np.log2(M)
    return "numba" if direct_cost <= fft_cost else "numpy"


def set_thread_count(n: int | None) -> int:
    """Clamp and apply a worker-thread count; returns the effective value.

    Harmless no-op on the numpy backend (single threaded by construction).
    Thread count never affects results: each lag's counter row is owned by
    exactly one worker and the counts are exact integers.
    """
    if not NUMBA_AVAILABLE:
        return 1
    limit = numba.config.NUMBA_NUM_THREADS
    eff = limit if n is None else max(1, min(int(n), limit))
    numba.set_num_threads(eff)
    return eff


if NUMBA_AVAILABLE:

    @numba.njit(parallel=True, cache=True)
    def _pair_counts_numba(u, L, K, m):  # pragma: no cover - compiled
        out = np.zeros((K + 1, m, m), dtype=np.int64)
        for k in numba.prange(K + 1):
            for n in range(L):
                out[k, u[n], u[n + k]] += 1
        return out


def _padded_length(n: int) -> int:
    M = 1
    while M < n:
        M <<= 1
    return M


def _pair_counts_fft(u: np.ndarray, L: int, K: int, m: int) -> np.ndarray:
    # N[k,a,b] = sum_n x_a[n] * y_b[n+k] with x the indicator over u[:L] and
    # y over u[:L+K]; zero-padding to M >= L+K makes the circular correlation
    # irfft(conj(X_a) * Y_b) linear on lags 0..K.
    M = _padded_length(L + K)
    head = u[:L]
    full = u[: L + K]
    y_specs = [np.fft.rfft(full == b, n=M) for b in range(m)]
    out = np.empty((K + 1, m, m), dtype=np.int64)
    for a in range(m):
        x_spec = np.conj(np.fft.rfft(head == a, n=M))
        for b in range(m):
            corr = np.fft.irfft(x_spec * y_specs[b], n=M)[: K + 1]
            rounded = np.rint(corr)
            assert np.max(np.abs(corr - rounded)) < 0.1, "FFT roundoff too large to round to counts"
            out[:, a, b] = rounded.astype(np.int64)
    return out


def pair_counts(
    u: np.ndarray, L: int, K: int, m: int, backend: str | None = None
) -> np.ndarray:
    """Exact int64 lag-count table N of shape (K+1, m, m) over u[:L+K].

    N[k, a, b] counts positions n < L with u[n] = a, u[n+k] = b.  The result
    is independent of backend and thread count.
    """
    if L < 1:
        raise ValueError("prefix length L must be >= 1")
    if K < 0:
        raise ValueError("max lag K must be >= 0")
    if len(u) < L + K:
        raise ValueError(f"need a prefix of length L+K = {L + K}, got {len(u)}")
    which = resolve_backend(L, K, m, backend)
    if which == "numba":
        return _pair_counts_numba(np.ascontiguousarray(u), L, K, m)
    return _pair_counts_fft(u, L, K, m)
