"""Batched segment scoring: the hot inner loop of screening and DP.

On a standard grid the Fejer-kernel quadrature convolution is, exactly, a
triangular multiplier on the DFT coefficients of the periodogram (the
sampled kernel row aliases to the continuous Bartlett weights whenever the
bandwidth is below N_lambda/2).  The DFT coefficients of a segment
periodogram are in turn wrapped sums of lagged sample products, so scoring
one segment reduces to a handful of prefix-sum lookups plus one pass over
the half grid for the f*log(f) quadrature.  The baseline cross term
(integral of f * log-baseline) is linear in the coefficients and collapses
to a dot product with precomputed baseline coefficients.

Two implementations are provided: a numba-compiled pair loop and a
vectorized pure-numpy fallback.  Selection order: the ``SPECSEG_DISABLE_NUMBA``
environment variable (any non-empty value forces numpy), then numba
availability.  Both paths agree to floating-point roundoff and are compared
by tests and by ``benchmarks/kernel_bench.py``.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "active_backend",
    "cos_table",
    "half_weights",
    "lag_tables",
    "lag_prefix",
    "segment_scores_batch",
    "dp_fill",
]

_DISABLE = bool(os.environ.get("SPECSEG_DISABLE_NUMBA", ""))

try:  # pragma: no cover - exercised implicitly
    if _DISABLE:
        raise ImportError
    import numba
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # no-op decorator fallback
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def active_backend() -> str:
    return "numba" if _HAVE_NUMBA else "numpy"


def cos_table(n_lam: int, max_m: int) -> np.ndarray:
    """COS[k, i] = cos(2*pi*k*i/n_lam) for k < max_m, i <= n_lam/2."""
    h = n_lam // 2 + 1
    k = np.arange(max_m)[:, None]
    i = np.arange(h)[None, :]
    return np.ascontiguousarray(np.cos(2 * np.pi * k * i / n_lam))


def half_weights(n_lam: int) -> np.ndarray:
    """Quadrature multiplicities of the non-positive half grid: 1,2,...,2,1."""
    w = np.full(n_lam // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


def _bandwidth(seg_len: int, alpha: float) -> int:
    return max(2, int(np.floor(seg_len**alpha + 0.5)))


# ---------------------------------------------------------------------------
# lag tables: which lagged products feed coefficient k, and how
# ---------------------------------------------------------------------------


def lag_tables(n_lam: int, max_m: int, n: int):
    """Wrapped-lag bookkeeping for periodogram DFT coefficients.

    On the standard grid, coefficient k of a length-L segment periodogram is
    ``(-1)**k * (n_lam / L) * sum_r coef_r * S_r`` over positive lags
    r = c*n_lam +/- k below L, where ``S_r`` is the sum of lagged sample
    products at lag r inside the segment.  Returns

    - ``lags``: sorted unique lags needing a prefix-sum row,
    - ``wrap_row[k, w]``: row of ``lags`` for the w-th lag of coefficient k,
    - ``wrap_lag[k, w]``: the lag itself (ascending; sentinel n when unused),
    - ``wrap_coef[k, w]``: its multiplicity (2.0 for the k = 0 wraps).
    """
    families = []
    for k in range(max_m):
        fam = {}
        if k == 0:
            fam[0] = 1.0
            r = n_lam
            while r < n:
                fam[r] = 2.0
                r += n_lam
        else:
            c = 0
            while c * n_lam - k < n:
                for r in (c * n_lam - k, c * n_lam + k):
                    if 0 <= r < n:
                        fam[r] = 1.0
                c += 1
        families.append(sorted(fam.items()))
    width = max(len(f) for f in families)
    lags = np.array(sorted({r for f in families for r, _ in f}), dtype=np.int64)
    row_of = {int(r): i for i, r in enumerate(lags)}
    wrap_row = np.zeros((max_m, width), dtype=np.int64)
    wrap_lag = np.full((max_m, width), n, dtype=np.int64)
    wrap_coef = np.zeros((max_m, width), dtype=np.float64)
    for k, fam in enumerate(families):
        for w, (r, cf) in enumerate(fam):
            wrap_row[k, w] = row_of[r]
            wrap_lag[k, w] = r
            wrap_coef[k, w] = cf
    return lags, wrap_row, wrap_lag, wrap_coef


def lag_prefix(x: np.ndarray, lags: np.ndarray) -> np.ndarray:
    """Q[li, t] = sum of x[u] * x[u - lags[li]] over lags[li] <= u < t.

    The lagged-product sum of a segment (a, b] at lag r is then exactly
    ``Q[li, b] - Q[li, min(a + r, b)]`` (zero when r >= b - a).
    """
    n = len(x)
    q = np.zeros((len(lags), n + 1), dtype=np.float64)
    for li, r in enumerate(lags):
        r = int(r)
        if r < n:
            np.cumsum(x[r:] * x[: n - r], out=q[li, r + 1 :])
    return q


# ---------------------------------------------------------------------------
# numpy path: group pairs by bandwidth, process in chunks of rows
# ---------------------------------------------------------------------------

_CHUNK = 65536


def _coeffs_numpy(q, wrap_row, wrap_lag, wrap_coef, a, b, m, n_lam):
    """Raw coefficients c_k (k < m) for a batch of equal-bandwidth segments."""
    length = b - a
    c = np.empty((len(a), m), dtype=np.float64)
    l_max = int(length.max())
    for k in range(m):
        acc = np.zeros(len(a), dtype=np.float64)
        for w in range(wrap_lag.shape[1]):
            r = int(wrap_lag[k, w])
            if r >= l_max:
                break
            row = q[wrap_row[k, w]]
            acc += wrap_coef[k, w] * (row[b] - row[np.minimum(a + r, b)])
        c[:, k] = (1.0 if k % 2 == 0 else -1.0) * acc
    c *= (n_lam / length)[:, None]
    return c


def _scores_numpy(q, wrap_row, wrap_lag, wrap_coef, a_arr, b_arr, alpha, beta, whw, cos_t, dlam, n_lam):
    out = np.empty(len(a_arr), dtype=np.float64)
    lengths = b_arr - a_arr
    ms = np.maximum(2, np.floor(lengths.astype(np.float64) ** alpha + 0.5).astype(np.int64))
    order = np.argsort(ms, kind="stable")
    pos = 0
    while pos < len(order):
        m = int(ms[order[pos]])
        end = pos
        while end < len(order) and ms[order[end]] == m:
            end += 1
        idx_m = order[pos:end]
        tri2 = 2.0 * (1.0 - np.arange(m) / m)
        tri2[0] = 1.0
        cos_m = cos_t[:m]
        for lo in range(0, len(idx_m), _CHUNK):
            idx = idx_m[lo : lo + _CHUNK]
            a = a_arr[idx]
            b = b_arr[idx]
            coef = _coeffs_numpy(q, wrap_row, wrap_lag, wrap_coef, a, b, m, n_lam)
            coef *= tri2
            mass = dlam * coef[:, 0]
            base_term = (dlam / n_lam) * (coef @ beta[:m])
            f = coef @ cos_m
            f /= n_lam
            np.maximum(f, 0.0, out=f)
            with np.errstate(divide="ignore", invalid="ignore"):
                flogf = np.where(f > 0.0, f * np.log(np.maximum(f, 1e-300)), 0.0)
            kl = dlam * (flogf @ whw) - base_term - np.log(mass) * mass
            out[idx] = lengths[idx] * kl / mass
        pos = end
    return out


# ---------------------------------------------------------------------------
# numba path: straight loop over pairs
# ---------------------------------------------------------------------------


@njit(cache=True, fastmath=True)
def _scores_numba_impl(q, wrap_row, wrap_lag, wrap_coef, a_arr, b_arr, alpha, beta, whw, cos_tt, dlam, n_lam):
    n_pairs = len(a_arr)
    h = cos_tt.shape[0]
    max_m = cos_tt.shape[1]
    n_wrap = wrap_lag.shape[1]
    out = np.empty(n_pairs, dtype=np.float64)
    coef = np.empty(max_m, dtype=np.float64)
    for p in range(n_pairs):
        a = a_arr[p]
        b = b_arr[p]
        length = b - a
        m = int(np.floor(length**alpha + 0.5))
        if m < 2:
            m = 2
        scale = n_lam / length
        for k in range(m):
            acc = 0.0
            for w in range(n_wrap):
                r = wrap_lag[k, w]
                if r >= length:
                    break
                row = wrap_row[k, w]
                acc += wrap_coef[k, w] * (q[row, b] - q[row, a + r])
            ck = scale * acc
            if k % 2 == 1:
                ck = -ck
            coef[k] = ck
        for k in range(1, m):
            coef[k] *= 2.0 * (1.0 - k / m)
        mass = dlam * coef[0]
        base_term = 0.0
        for k in range(m):
            base_term += coef[k] * beta[k]
        base_term *= dlam / n_lam
        acc = 0.0
        for i in range(h):
            f = coef[0]
            for k in range(1, m):
                f += coef[k] * cos_tt[i, k]
            f /= n_lam
            if f > 0.0:
                acc += whw[i] * f * np.log(f)
        kl = dlam * acc - base_term - np.log(mass) * mass
        out[p] = length * kl / mass
    return out


def segment_scores_batch(
    q: np.ndarray,
    wrap_row: np.ndarray,
    wrap_lag: np.ndarray,
    wrap_coef: np.ndarray,
    a_arr: np.ndarray,
    b_arr: np.ndarray,
    alpha: float,
    beta: np.ndarray,
    whw: np.ndarray,
    cos_t: np.ndarray,
    cos_tt: np.ndarray,
    dlam: float,
    n_lam: int,
    backend: str | None = None,
) -> np.ndarray:
    """Scores (b-a) * KL(st(f_hat_(a,b]) || st(baseline)) for a batch of segments.

    ``q`` is the lag-product prefix table, ``beta`` the half-grid cosine
    coefficients of the weighted log-baseline (beta[k] = sum_i whw[i] *
    lsb[i] * cos_t[k, i]).
    """
    a_arr = np.ascontiguousarray(a_arr, dtype=np.int64)
    b_arr = np.ascontiguousarray(b_arr, dtype=np.int64)
    use = backend or active_backend()
    if use == "numba" and _HAVE_NUMBA:
        return _scores_numba_impl(
            q, wrap_row, wrap_lag, wrap_coef, a_arr, b_arr, alpha, beta, whw, cos_tt, dlam, n_lam
        )
    return _scores_numpy(
        q, wrap_row, wrap_lag, wrap_coef, a_arr, b_arr, alpha, beta, whw, cos_t, dlam, n_lam
    )


# ---------------------------------------------------------------------------
# dynamic-programming layer fill (suffix recursion over a score matrix)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _dp_fill_numba(score, k_max):
    n_pos = score.shape[0]
    g = np.full((k_max + 1, n_pos), -np.inf)
    for i in range(n_pos):
        g[0, i] = score[i, n_pos - 1]
    for t in range(1, k_max + 1):
        for i in range(n_pos - 1):
            best = -np.inf
            for j in range(i + 1, n_pos - 1):
                if score[i, j] == -np.inf or g[t - 1, j] == -np.inf:
                    continue
                v = score[i, j] + g[t - 1, j]
                if v > best:
                    best = v
            g[t, i] = best
    return g


def _dp_fill_numpy(score, k_max):
    n_pos = score.shape[0]
    g = np.full((k_max + 1, n_pos), -np.inf)
    g[0] = score[:, n_pos - 1]
    for t in range(1, k_max + 1):
        prev = g[t - 1]
        for i in range(n_pos - 1):
            v = score[i, i + 1 : n_pos - 1] + prev[i + 1 : n_pos - 1]
            if v.size:
                g[t, i] = v.max()
    return g


def dp_fill(score: np.ndarray, k_max: int, backend: str | None = None) -> np.ndarray:
    """g[t, i] = best score of splitting (P_i, N] with exactly t more cuts."""
    use = backend or active_backend()
    if use == "numba" and _HAVE_NUMBA:
        return _dp_fill_numba(score, k_max)
    return _dp_fill_numpy(score, k_max)
