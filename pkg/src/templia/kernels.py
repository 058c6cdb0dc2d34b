"""Hot escape-time kernels: numba @njit versions with pure-numpy fallbacks.

The numba path is the default; set TEMPLIA_NUMBA=0 to force the numpy path
(or it is selected automatically when numba cannot be imported). Both paths
perform the identical sequence of binary64 operations, so their outputs are
byte-identical; benchmarks/bench_kernels.py compares their speed.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit, prange
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(func):
            return func
        if args and callable(args[0]):
            return args[0]
        return wrap

ENV_FLAG = "TEMPLIA_NUMBA"


def numba_enabled() -> bool:
    """True when the jit path is active (numba importable and not disabled)."""
    return HAVE_NUMBA and os.environ.get(ENV_FLAG, "1") != "0"


def set_threads(n) -> int:
    """Pin the jit thread count, clamped to numba's launch-time maximum.

    Outputs are independent of the thread count by construction; this only
    affects speed. Returns the effective count (1 on the numpy path).
    """
    if not HAVE_NUMBA:
        return 1
    import numba

    if n is None:
        n = numba.config.NUMBA_NUM_THREADS
    eff = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(eff)
    return eff


# ---------------------------------------------------------------------------
# Julia raster: fixed pair, fixed bit word, pixel = initial point
# ---------------------------------------------------------------------------

@njit(cache=True, parallel=True)
def _julia_escape_jit(re_ax, im_ax, bits, c0re, c0im, c1re, c1im, r2, max_iter):
    ny = im_ax.shape[0]
    nx = re_ax.shape[0]
    out = np.full((ny, nx), -1, dtype=np.int32)
    for j in prange(ny):
        for i in range(nx):
            zre = re_ax[i]
            zim = im_ax[j]
            if zre * zre + zim * zim > r2:
                out[j, i] = 0
                continue
            for n in range(max_iter):
                if bits[n]:
                    cre = c1re
                    cim = c1im
                else:
                    cre = c0re
                    cim = c0im
                t = zre * zre - zim * zim + cre
                zim = 2.0 * zre * zim + cim
                zre = t
                if zre * zre + zim * zim > r2:
                    out[j, i] = n + 1
                    break
    return out


def _julia_escape_numpy(re_ax, im_ax, bits, c0re, c0im, c1re, c1im, r2, max_iter):
    ny, nx = im_ax.shape[0], re_ax.shape[0]
    out = np.full((ny, nx), -1, dtype=np.int32)
    zre = np.repeat(re_ax[None, :], ny, axis=0).ravel()
    zim = np.repeat(im_ax[:, None], nx, axis=1).ravel()
    idx = np.arange(ny * nx)
    escaped0 = zre * zre + zim * zim > r2
    out.ravel()[idx[escaped0]] = 0
    keep = ~escaped0
    zre, zim, idx = zre[keep], zim[keep], idx[keep]
    flat = out.ravel()
    for n in range(max_iter):
        if idx.size == 0:
            break
        if bits[n]:
            cre, cim = c1re, c1im
        else:
            cre, cim = c0re, c0im
        t = zre * zre - zim * zim + cre
        zim = 2.0 * zre * zim + cim
        zre = t
        esc = zre * zre + zim * zim > r2
        flat[idx[esc]] = n + 1
        keep = ~esc
        zre, zim, idx = zre[keep], zim[keep], idx[keep]
    return out


def julia_escape(re_ax, im_ax, bits, c0: complex, c1: complex, radius: float,
                 max_iter: int) -> np.ndarray:
    """Escape index per pixel center (-1 = prisoner) for a fixed template word."""
    args = (np.ascontiguousarray(re_ax, dtype=np.float64),
            np.ascontiguousarray(im_ax, dtype=np.float64),
            np.ascontiguousarray(bits, dtype=np.uint8),
            float(c0.real), float(c0.imag), float(c1.real), float(c1.imag),
            float(radius) * float(radius), int(max_iter))
    if numba_enabled():
        return _julia_escape_jit(*args)
    return _julia_escape_numpy(*args)


# ---------------------------------------------------------------------------
# Mandelbrot slice: pixel = c1, orbit of 0, per-pixel escape radius
# ---------------------------------------------------------------------------

@njit(cache=True, parallel=True)
def _slice_escape_jit(re_ax, im_ax, bits, c0re, c0im, c0mag2, max_iter):
    ny = im_ax.shape[0]
    nx = re_ax.shape[0]
    out = np.full((ny, nx), -1, dtype=np.int32)
    for j in prange(ny):
        for i in range(nx):
            c1re = re_ax[i]
            c1im = im_ax[j]
            r2 = max(4.0, c0mag2, c1re * c1re + c1im * c1im)
            zre = 0.0
            zim = 0.0
            for n in range(max_iter):
                if bits[n]:
                    cre = c1re
                    cim = c1im
                else:
                    cre = c0re
                    cim = c0im
                t = zre * zre - zim * zim + cre
                zim = 2.0 * zre * zim + cim
                zre = t
                if zre * zre + zim * zim > r2:
                    out[j, i] = n + 1
                    break
    return out


def _slice_escape_numpy(re_ax, im_ax, bits, c0re, c0im, c0mag2, max_iter):
    ny, nx = im_ax.shape[0], re_ax.shape[0]
    out = np.full((ny, nx), -1, dtype=np.int32)
    c1re = np.repeat(re_ax[None, :], ny, axis=0).ravel()
    c1im = np.repeat(im_ax[:, None], nx, axis=1).ravel()
    r2 = np.maximum(np.maximum(4.0, c0mag2), c1re * c1re + c1im * c1im)
    idx = np.arange(ny * nx)
    zre = np.zeros(ny * nx)
    zim = np.zeros(ny * nx)
    flat = out.ravel()
    for n in range(max_iter):
        if idx.size == 0:
            break
        if bits[n]:
            cre, cim = c1re, c1im
        else:
            cre, cim = c0re, c0im
        t = zre * zre - zim * zim + cre
        zim = 2.0 * zre * zim + cim
        zre = t
        esc = zre * zre + zim * zim > r2
        flat[idx[esc]] = n + 1
        keep = ~esc
        zre, zim, idx = zre[keep], zim[keep], idx[keep]
        c1re, c1im, r2 = c1re[keep], c1im[keep], r2[keep]
    return out


def slice_escape(re_ax, im_ax, bits, c0: complex, max_iter: int) -> np.ndarray:
    """Escape index of the orbit of 0 per c1 pixel (-1 = bounded)."""
    c0mag2 = float(c0.real) ** 2 + float(c0.imag) ** 2
    args = (np.ascontiguousarray(re_ax, dtype=np.float64),
            np.ascontiguousarray(im_ax, dtype=np.float64),
            np.ascontiguousarray(bits, dtype=np.uint8),
            float(c0.real), float(c0.imag), c0mag2, int(max_iter))
    if numba_enabled():
        return _slice_escape_jit(*args)
    return _slice_escape_numpy(*args)


# ---------------------------------------------------------------------------
# Hybrid counts: per c1 pixel, how many length-L words keep the orbit of 0
# bounded when the word is iterated cyclically for `budget` steps.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _hybrid_count_one(c0re, c0im, c1re, c1im, r2, length, budget,
                      word, szre, szim, sbit):
    # DFS over the prefix tree: an escaped prefix prunes all 2^(L-d) words
    # sharing it. Leaves continue cyclically through the remaining budget.
    count = 0
    szre[0] = 0.0
    szim[0] = 0.0
    sbit[0] = 0
    d = 0
    while d >= 0:
        if d == length:
            zre = szre[d]
            zim = szim[d]
            ok = True
            for n in range(length, budget):
                if word[n % length]:
                    cre = c1re
                    cim = c1im
                else:
                    cre = c0re
                    cim = c0im
                t = zre * zre - zim * zim + cre
                zim = 2.0 * zre * zim + cim
                zre = t
                if zre * zre + zim * zim > r2:
                    ok = False
                    break
            if ok:
                count += 1
            d -= 1
            continue
        b = sbit[d]
        if b > 1:
            d -= 1
            continue
        sbit[d] = b + 1
        zre = szre[d]
        zim = szim[d]
        if b:
            cre = c1re
            cim = c1im
        else:
            cre = c0re
            cim = c0im
        t = zre * zre - zim * zim + cre
        zim2 = 2.0 * zre * zim + cim
        zre2 = t
        if zre2 * zre2 + zim2 * zim2 > r2:
            continue
        word[d] = b
        szre[d + 1] = zre2
        szim[d + 1] = zim2
        sbit[d + 1] = 0
        d += 1
    return count


@njit(cache=True, parallel=True)
def _hybrid_exact_jit(re_ax, im_ax, c0re, c0im, c0mag2, length, budget):
    ny = im_ax.shape[0]
    nx = re_ax.shape[0]
    out = np.zeros((ny, nx), dtype=np.int64)
    for j in prange(ny):
        word = np.empty(length, dtype=np.uint8)
        szre = np.empty(length + 1, dtype=np.float64)
        szim = np.empty(length + 1, dtype=np.float64)
        sbit = np.empty(length + 1, dtype=np.uint8)
        for i in range(nx):
            c1re = re_ax[i]
            c1im = im_ax[j]
            r2 = max(4.0, c0mag2, c1re * c1re + c1im * c1im)
            out[j, i] = _hybrid_count_one(c0re, c0im, c1re, c1im, r2,
                                          length, budget, word, szre, szim, sbit)
    return out


def _hybrid_exact_numpy(re_ax, im_ax, c0re, c0im, c0mag2, length, budget):
    ny, nx = im_ax.shape[0], re_ax.shape[0]
    out = np.zeros((ny, nx), dtype=np.int64)
    for j in range(ny):
        for i in range(nx):
            c1re = re_ax[i]
            c1im = im_ax[j]
            r2 = max(4.0, c0mag2, c1re * c1re + c1im * c1im)
            # breadth-first over prefixes, pruning escaped states
            zre = np.zeros(1)
            zim = np.zeros(1)
            words = np.zeros((1, 0), dtype=np.uint8)
            for d in range(length):
                t0 = zre * zre - zim * zim + c0re
                i0 = 2.0 * zre * zim + c0im
                t1 = zre * zre - zim * zim + c1re
                i1 = 2.0 * zre * zim + c1im
                nzre = np.concatenate([t0, t1])
                nzim = np.concatenate([i0, i1])
                half = np.concatenate([
                    np.hstack([words, np.zeros((words.shape[0], 1), np.uint8)]),
                    np.hstack([words, np.ones((words.shape[0], 1), np.uint8)]),
                ])
                keep = nzre * nzre + nzim * nzim <= r2
                zre, zim, words = nzre[keep], nzim[keep], half[keep]
            for n in range(length, budget):
                if zre.size == 0:
                    break
                bit = words[:, n % length].astype(bool)
                cre = np.where(bit, c1re, c0re)
                cim = np.where(bit, c1im, c0im)
                t = zre * zre - zim * zim + cre
                zim = 2.0 * zre * zim + cim
                zre = t
                keep = zre * zre + zim * zim <= r2
                zre, zim, words = zre[keep], zim[keep], words[keep]
            out[j, i] = zre.size
    return out


def hybrid_exact(re_ax, im_ax, c0: complex, length: int, budget: int) -> np.ndarray:
    """Count bounded words among all 2^length cyclic words, per c1 pixel."""
    if budget < length:
        raise ValueError("iteration budget must be >= word length")
    c0mag2 = float(c0.real) ** 2 + float(c0.imag) ** 2
    args = (np.ascontiguousarray(re_ax, dtype=np.float64),
            np.ascontiguousarray(im_ax, dtype=np.float64),
            float(c0.real), float(c0.imag), c0mag2, int(length), int(budget))
    if numba_enabled():
        return _hybrid_exact_jit(*args)
    return _hybrid_exact_numpy(*args)


@njit(cache=True, parallel=True)
def _hybrid_mc_jit(re_ax, im_ax, words, c0re, c0im, c0mag2, budget):
    ny = im_ax.shape[0]
    nx = re_ax.shape[0]
    n_words = words.shape[0]
    length = words.shape[1]
    out = np.zeros((ny, nx), dtype=np.int64)
    for j in prange(ny):
        for i in range(nx):
            c1re = re_ax[i]
            c1im = im_ax[j]
            r2 = max(4.0, c0mag2, c1re * c1re + c1im * c1im)
            count = 0
            for w in range(n_words):
                zre = 0.0
                zim = 0.0
                ok = True
                for n in range(budget):
                    if words[w, n % length]:
                        cre = c1re
                        cim = c1im
                    else:
                        cre = c0re
                        cim = c0im
                    t = zre * zre - zim * zim + cre
                    zim = 2.0 * zre * zim + cim
                    zre = t
                    if zre * zre + zim * zim > r2:
                        ok = False
                        break
                if ok:
                    count += 1
            out[j, i] = count
    return out


def _hybrid_mc_numpy(re_ax, im_ax, words, c0re, c0im, c0mag2, budget):
    ny, nx = im_ax.shape[0], re_ax.shape[0]
    length = words.shape[1]
    out = np.zeros((ny, nx), dtype=np.int64)
    for j in range(ny):
        for i in range(nx):
            c1re = re_ax[i]
            c1im = im_ax[j]
            r2 = max(4.0, c0mag2, c1re * c1re + c1im * c1im)
            zre = np.zeros(words.shape[0])
            zim = np.zeros(words.shape[0])
            live = words
            for n in range(budget):
                if zre.size == 0:
                    break
                bit = live[:, n % length].astype(bool)
                cre = np.where(bit, c1re, c0re)
                cim = np.where(bit, c1im, c0im)
                t = zre * zre - zim * zim + cre
                zim = 2.0 * zre * zim + cim
                zre = t
                keep = zre * zre + zim * zim <= r2
                zre, zim, live = zre[keep], zim[keep], live[keep]
            out[j, i] = zre.size
    return out


def hybrid_monte_carlo(re_ax, im_ax, words, c0: complex, budget: int) -> np.ndarray:
    """Count bounded words among a fixed sampled word set, per c1 pixel.

    The same word matrix is used at every pixel, so the result does not
    depend on any scheduling or pixel order.
    """
    length = words.shape[1]
    if budget < length:
        raise ValueError("iteration budget must be >= word length")
    c0mag2 = float(c0.real) ** 2 + float(c0.imag) ** 2
    args = (np.ascontiguousarray(re_ax, dtype=np.float64),
            np.ascontiguousarray(im_ax, dtype=np.float64),
            np.ascontiguousarray(words, dtype=np.uint8),
            float(c0.real), float(c0.imag), c0mag2, int(budget))
    if numba_enabled():
        return _hybrid_mc_jit(*args)
    return _hybrid_mc_numpy(*args)


def cyclic_bounded_mask(words: np.ndarray, c0: complex, c1: complex,
                        budget: int) -> np.ndarray:
    """Boundedness of the orbit of 0 for each row word, iterated cyclically.

    Vectorized over words; used by the fixed-map construction where the pair
    is constant and only the word varies.
    """
    words = np.ascontiguousarray(words, dtype=np.uint8)
    n_words, length = words.shape
    if budget < length:
        raise ValueError("iteration budget must be >= word length")
    r = max(2.0, abs(c0), abs(c1))
    r2 = r * r
    c0re, c0im = float(c0.real), float(c0.imag)
    c1re, c1im = float(c1.real), float(c1.imag)
    bounded = np.ones(n_words, dtype=bool)
    zre = np.zeros(n_words)
    zim = np.zeros(n_words)
    idx = np.arange(n_words)
    live = words
    for n in range(budget):
        if idx.size == 0:
            break
        bit = live[:, n % length].astype(bool)
        cre = np.where(bit, c1re, c0re)
        cim = np.where(bit, c1im, c0im)
        t = zre * zre - zim * zim + cre
        zim = 2.0 * zre * zim + cim
        zre = t
        esc = zre * zre + zim * zim > r2
        bounded[idx[esc]] = False
        keep = ~esc
        zre, zim, idx, live = zre[keep], zim[keep], idx[keep], live[keep]
    return bounded
