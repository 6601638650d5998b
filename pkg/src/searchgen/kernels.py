"""Hot numeric kernels, each with a numba loop version and a numpy version.

``token_probs`` and ``edit_table`` dispatch to the numba implementation when
it is available and not disabled through ``SEARCHGEN_DISABLE_NUMBA``.  Both
implementations are always importable so they can be compared directly.

N-gram tables use the flattened layout built by :mod:`searchgen.lm`: for a
context length ``j`` the sorted keys live in ``keys[off[j]:off[j + 1]]``.  An
n-gram ``(t_1, ..., t_k)`` is encoded as ``((t_1 * base + t_2) * base + ...)``.
"""

from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit


def encode_rows(rows: np.ndarray, base: int) -> np.ndarray:
    """Encode every row of an integer matrix as one int64 key."""
    keys = np.zeros(rows.shape[0], dtype=np.int64)
    for col in range(rows.shape[1]):
        keys = keys * base + rows[:, col]
    return keys


def _lookup(keys, lo, hi, query):
    """Vectorised exact-match search in the sorted slice ``keys[lo:hi]``."""
    seg = keys[lo:hi]
    if seg.size == 0:
        return np.zeros(query.shape, dtype=np.int64), np.zeros(query.shape, dtype=bool)
    idx = np.searchsorted(seg, query)
    idx = np.minimum(idx, seg.size - 1)
    found = seg[idx] == query
    return idx + lo, found


def token_probs_numpy(hist, words, p1, ng_keys, ng_counts, ng_off,
                      cx_keys, cx_tot, cx_norm, cx_off, base, backoff):
    n, width = hist.shape
    s = p1[words].astype(np.float64)
    norm = np.ones(n)
    alive = np.ones(n, dtype=bool)
    hkey = np.zeros(n, dtype=np.int64)
    mult = 1
    for j in range(1, width + 1):
        # context of length j is the last j history tokens
        hkey = hkey + hist[:, width - j] * mult
        mult *= base
        cidx, cfound = _lookup(cx_keys, cx_off[j], cx_off[j + 1], hkey)
        alive &= cfound
        if not alive.any():
            break
        nidx, nfound = _lookup(ng_keys, ng_off[j], ng_off[j + 1], hkey * base + words)
        hit = alive & nfound
        ml = np.where(hit, ng_counts[nidx] / np.where(alive, cx_tot[cidx], 1.0), 0.0)
        s = np.where(alive, np.where(hit, ml, backoff * s), s)
        norm = np.where(alive, cx_norm[cidx], norm)
    return s / norm


@njit
def _find(keys, lo, hi, q):
    if hi <= lo:
        return -1
    i = lo + np.searchsorted(keys[lo:hi], q)
    if i < hi and keys[i] == q:
        return i
    return -1


@njit
def token_probs_numba(hist, words, p1, ng_keys, ng_counts, ng_off,
                      cx_keys, cx_tot, cx_norm, cx_off, base, backoff):
    n, width = hist.shape
    out = np.empty(n)
    for r in range(n):
        w = words[r]
        s = p1[w]
        norm = 1.0
        hkey = 0
        mult = 1
        for j in range(1, width + 1):
            hkey += hist[r, width - j] * mult
            mult *= base
            ci = _find(cx_keys, cx_off[j], cx_off[j + 1], hkey)
            if ci < 0:
                break
            ni = _find(ng_keys, ng_off[j], ng_off[j + 1], hkey * base + w)
            if ni >= 0:
                s = ng_counts[ni] / cx_tot[ci]
            else:
                s = backoff * s
            norm = cx_norm[ci]
        out[r] = s / norm
    return out


def edit_table_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Levenshtein table with unit costs, one vectorised row at a time.

    Within a row the insertion chain ``d[i, j] = min(d[i, j - 1] + 1, ...)``
    is a running minimum of ``base[k] - k`` shifted back by ``j``.
    """
    m, n = len(a), len(b)
    d = np.empty((m + 1, n + 1), dtype=np.int64)
    d[0] = np.arange(n + 1)
    cols = np.arange(n + 1)
    for i in range(1, m + 1):
        prev = d[i - 1]
        row = np.empty(n + 1, dtype=np.int64)
        row[0] = i
        row[1:] = np.minimum(prev[1:] + 1, prev[:-1] + (b != a[i - 1]))
        d[i] = np.minimum.accumulate(row - cols) + cols
    return d


@njit
def edit_table_numba(a, b):
    m, n = len(a), len(b)
    d = np.empty((m + 1, n + 1), dtype=np.int64)
    for j in range(n + 1):
        d[0, j] = j
    for i in range(1, m + 1):
        d[i, 0] = i
        for j in range(1, n + 1):
            sub = d[i - 1, j - 1] + (1 if a[i - 1] != b[j - 1] else 0)
            dele = d[i - 1, j] + 1
            ins = d[i, j - 1] + 1
            best = sub
            if dele < best:
                best = dele
            if ins < best:
                best = ins
            d[i, j] = best
    return d


if USE_NUMBA:
    token_probs = token_probs_numba
    edit_table = edit_table_numba
else:
    token_probs = token_probs_numpy
    edit_table = edit_table_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
