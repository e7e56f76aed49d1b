"""Hot numeric kernels: longest-common-subsequence dynamic programs.

The LCS table dominates evaluation runtime (dialogues run ~1,300 tokens,
notes ~500), so the kernels are JIT-compiled with numba by default. Set
``MEDIPIPE_KERNELS=numpy`` to force the pure-numpy fallback (row-vectorized
via the prefix-max identity); ``MEDIPIPE_KERNELS=numba`` fails loudly when
numba is unavailable. Both paths compute the identical DP table, so the
backtracked match masks agree bit-for-bit.

``benchmarks/bench_kernels.py`` compares the two paths on realistic sizes.
"""

from __future__ import annotations

import os

import numpy as np

_BACKEND_ENV = os.environ.get("MEDIPIPE_KERNELS", "auto").strip().lower()
if _BACKEND_ENV not in ("auto", "numba", "numpy"):
    raise RuntimeError(f"MEDIPIPE_KERNELS must be auto|numba|numpy, got {_BACKEND_ENV!r}")

_HAVE_NUMBA = False
if _BACKEND_ENV != "numpy":
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _BACKEND_ENV == "numba":
            raise RuntimeError("MEDIPIPE_KERNELS=numba but numba is not importable")

USE_NUMBA = _HAVE_NUMBA and _BACKEND_ENV != "numpy"


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def _as_ids(seq) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(seq, dtype=np.int64))


# --- pure-numpy path ---------------------------------------------------------
#
# Row recurrence: cur[j] = max(prev[j], cur[j-1], prev[j-1]+1 if match).
# Rows are nondecreasing, so unrolling cur[j-1] collapses to
# cur[j] = max(prev[j], running_max_{k<=j}(prev[k-1]+1 where a_i == b_k)),
# which vectorizes with a prefix max.


def lcs_table_numpy(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, m = a.shape[0], b.shape[0]
    table = np.zeros((n + 1, m + 1), dtype=np.int32)
    if n == 0 or m == 0:
        return table
    for i in range(1, n + 1):
        prev = table[i - 1]
        match_vals = np.where(b == a[i - 1], prev[:-1] + 1, 0)
        table[i, 1:] = np.maximum(prev[1:], np.maximum.accumulate(match_vals))
    return table


def lcs_length_numpy(a: np.ndarray, b: np.ndarray) -> int:
    n, m = a.shape[0], b.shape[0]
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int32)
    for i in range(1, n + 1):
        match_vals = np.where(b == a[i - 1], prev[:-1] + 1, 0)
        cur = np.empty(m + 1, dtype=np.int32)
        cur[0] = 0
        np.maximum(prev[1:], np.maximum.accumulate(match_vals), out=cur[1:])
        prev = cur
    return int(prev[m])


# --- numba path --------------------------------------------------------------

if USE_NUMBA:

    @njit(cache=True)
    def _lcs_table_nb(a, b):  # pragma: no cover - exercised via lcs_table
        n = a.shape[0]
        m = b.shape[0]
        table = np.zeros((n + 1, m + 1), dtype=np.int32)
        for i in range(1, n + 1):
            ai = a[i - 1]
            for j in range(1, m + 1):
                if b[j - 1] == ai:
                    table[i, j] = table[i - 1, j - 1] + 1
                elif table[i - 1, j] >= table[i, j - 1]:
                    table[i, j] = table[i - 1, j]
                else:
                    table[i, j] = table[i, j - 1]
        return table

    @njit(cache=True)
    def _lcs_length_nb(a, b):  # pragma: no cover - exercised via lcs_length
        n = a.shape[0]
        m = b.shape[0]
        if n == 0 or m == 0:
            return 0
        prev = np.zeros(m + 1, dtype=np.int32)
        cur = np.zeros(m + 1, dtype=np.int32)
        for i in range(1, n + 1):
            ai = a[i - 1]
            for j in range(1, m + 1):
                if b[j - 1] == ai:
                    cur[j] = prev[j - 1] + 1
                elif prev[j] >= cur[j - 1]:
                    cur[j] = prev[j]
                else:
                    cur[j] = cur[j - 1]
            prev, cur = cur, prev
        return int(prev[m])


# --- public surface ----------------------------------------------------------


def lcs_table(a, b) -> np.ndarray:
    """Full (|a|+1) x (|b|+1) LCS dynamic-programming table."""
    a, b = _as_ids(a), _as_ids(b)
    if USE_NUMBA and a.shape[0] > 0 and b.shape[0] > 0:
        return _lcs_table_nb(a, b)
    return lcs_table_numpy(a, b)


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two id sequences."""
    a, b = _as_ids(a), _as_ids(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0
    if USE_NUMBA:
        return int(_lcs_length_nb(a, b))
    return lcs_length_numpy(a, b)


def lcs_match_mask(ref, cand) -> np.ndarray:
    """Boolean mask over ``ref`` positions matched by one canonical LCS.

    Backtracks the DP table with a fixed tie rule (prefer dropping a ref
    token when table values tie), so the mask is deterministic. The mask's
    popcount always equals ``lcs_length(ref, cand)``.
    """
    ref_ids, cand_ids = _as_ids(ref), _as_ids(cand)
    n, m = ref_ids.shape[0], cand_ids.shape[0]
    mask = np.zeros(n, dtype=bool)
    if n == 0 or m == 0:
        return mask
    table = lcs_table(ref_ids, cand_ids)
    i, j = n, m
    while i > 0 and j > 0:
        if ref_ids[i - 1] == cand_ids[j - 1]:
            mask[i - 1] = True
            i -= 1
            j -= 1
        elif table[i - 1, j] >= table[i, j - 1]:
            i -= 1
        else:
            j -= 1
    return mask


def warmup() -> None:
    """Trigger JIT compilation (or cache load) outside timed sections."""
    a = np.array([1, 2, 3], dtype=np.int64)
    b = np.array([3, 1, 2], dtype=np.int64)
    lcs_length(a, b)
    lcs_match_mask(a, b)
