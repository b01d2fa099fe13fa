"""Array kernels for the LTS algorithms.

Each kernel has a numba version and a plain numpy version with the same
signature. Setting OPSEM_NO_JIT=1 (or running without numba) selects the
numpy versions; BACKEND tells which one is active.
"""
from __future__ import annotations

import os

import numpy as np

_WANT_JIT = os.environ.get("OPSEM_NO_JIT", "") in ("", "0")

try:
    if not _WANT_JIT:
        raise ImportError
    from numba import njit
except ImportError:  # numba missing or disabled
    njit = None

BACKEND = "numba" if njit is not None else "numpy"


# ------------------------------------------------------------ numpy versions

def _closure_np(n, src, dst):
    """Reflexive-transitive closure of the relation src -> dst."""
    r = np.eye(n, dtype=bool)
    r[src, dst] = True
    while True:
        r2 = (r.astype(np.int64) @ r.astype(np.int64)) > 0
        if np.array_equal(r2, r):
            return r
        r = r2


def _compose3_np(c, a):
    """Boolean product c . a . c."""
    ci = c.astype(np.int64)
    return (ci @ a.astype(np.int64) @ ci) > 0


def _signatures_np(n, src, codes):
    """Per-state sorted distinct codes, as CSR (offsets, values)."""
    if len(src) == 0:
        return np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    width = int(codes.max()) + 1
    keys = np.unique(src.astype(np.int64) * width + codes)
    owner = keys // width
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, owner + 1, 1)
    return np.cumsum(offsets), keys % width


def _pre_dia_np(n, src, dst, sel, x):
    out = np.zeros(n, dtype=bool)
    m = sel & x[dst]
    out[src[m]] = True
    return out


def _pre_box_np(n, src, dst, sel, x):
    out = np.ones(n, dtype=bool)
    m = sel & ~x[dst]
    out[src[m]] = False
    return out


# ------------------------------------------------------------ numba versions

if njit is not None:

    @njit(cache=True)
    def _closure_jit(n, src, dst):
        r = np.zeros((n, n), dtype=np.bool_)
        for i in range(n):
            r[i, i] = True
        for j in range(len(src)):
            r[src[j], dst[j]] = True
        for k in range(n):  # Warshall
            for i in range(n):
                if r[i, k]:
                    for j in range(n):
                        if r[k, j]:
                            r[i, j] = True
        return r

    @njit(cache=True)
    def _compose3_jit(c, a):
        n = c.shape[0]
        ca = np.zeros((n, n), dtype=np.bool_)
        for i in range(n):
            for k in range(n):
                if c[i, k]:
                    for j in range(n):
                        if a[k, j]:
                            ca[i, j] = True
        out = np.zeros((n, n), dtype=np.bool_)
        for i in range(n):
            for k in range(n):
                if ca[i, k]:
                    for j in range(n):
                        if c[k, j]:
                            out[i, j] = True
        return out

    @njit(cache=True)
    def _signatures_jit(n, src, codes):
        counts = np.zeros(n + 1, dtype=np.int64)
        for j in range(len(src)):
            counts[src[j] + 1] += 1
        start = np.cumsum(counts)
        fill = start[:-1].copy()
        buf = np.empty(len(src), dtype=np.int64)
        for j in range(len(src)):
            buf[fill[src[j]]] = codes[j]
            fill[src[j]] += 1
        offsets = np.zeros(n + 1, dtype=np.int64)
        vals = np.empty(len(src), dtype=np.int64)
        k = 0
        for s in range(n):
            seg = np.sort(buf[start[s]:start[s + 1]])
            for i in range(len(seg)):
                if i == 0 or seg[i] != seg[i - 1]:
                    vals[k] = seg[i]
                    k += 1
            offsets[s + 1] = k
        return offsets, vals[:k]

    @njit(cache=True)
    def _pre_dia_jit(n, src, dst, sel, x):
        out = np.zeros(n, dtype=np.bool_)
        for j in range(len(src)):
            if sel[j] and x[dst[j]]:
                out[src[j]] = True
        return out

    @njit(cache=True)
    def _pre_box_jit(n, src, dst, sel, x):
        out = np.ones(n, dtype=np.bool_)
        for j in range(len(src)):
            if sel[j] and not x[dst[j]]:
                out[src[j]] = False
        return out

    closure, compose3 = _closure_jit, _compose3_jit
    signatures, pre_dia, pre_box = _signatures_jit, _pre_dia_jit, _pre_box_jit
else:
    closure, compose3 = _closure_np, _compose3_np
    signatures, pre_dia, pre_box = _signatures_np, _pre_dia_np, _pre_box_np

NUMPY = {
    "closure": _closure_np,
    "compose3": _compose3_np,
    "signatures": _signatures_np,
    "pre_dia": _pre_dia_np,
    "pre_box": _pre_box_np,
}
