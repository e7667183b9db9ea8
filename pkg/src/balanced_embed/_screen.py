"""Exact integer pre-screen kernels for the supports oracle.

For a vertex subset W the equal-transport-cost measure solves
D_WW w = c 1 with sum(w) = 1. By Cramer's rule over the integer distance
submatrix, w_i = Y_i / sum(Y) and c = det(D_WW) / sum(Y) where Y_i is the
determinant with column i replaced by ones. All quantities fit int64 while
distances stay small (guarded by the caller), so the screens below decide
nonnegativity, the minimax bound c >= diam/2, and the off-support maximum
by exact integer comparisons; every rejection carries an exact witness.
Survivors are re-derived and confirmed by the rational refinement path.

Subsets with det(D_WW) = 0 (possible only for size 4; sizes 2 and 3 have
det -d^2 and 2 d01 d02 d12, never zero) are reported separately so the
generic rational solver can decide them.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_CAP = 1 << 20


if njit is not None:

    @njit(cache=True)
    def _screen2(d, diam, cand):
        n = d.shape[0]
        nc = 0
        for a in range(n - 1):
            for b in range(a + 1, n):
                ab = d[a, b]
                # w = (1/2, 1/2), c = ab/2; c >= diam/2 forces ab = diam
                if ab < diam:
                    continue
                ok = True
                for v in range(n):
                    if d[v, a] + d[v, b] > ab:
                        ok = False
                        break
                if ok:
                    if nc >= cand.shape[0]:
                        return -1
                    cand[nc, 0] = a
                    cand[nc, 1] = b
                    nc += 1
        return nc

    @njit(cache=True)
    def _screen3(d, diam, cand):
        n = d.shape[0]
        nc = 0
        for a in range(n - 2):
            for b in range(a + 1, n - 1):
                p = d[a, b]
                for c_ in range(b + 1, n):
                    q = d[a, c_]
                    r = d[b, c_]
                    m = max(p, max(q, r))
                    if 2 * m < diam:  # c <= max pairwise distance
                        continue
                    det0 = 2 * p * q * r
                    y0 = r * (p + q - r)
                    y1 = q * (p + r - q)
                    y2 = p * (q + r - p)
                    sy = y0 + y1 + y2
                    if sy == 0:
                        continue  # no normalized solution
                    s = 1 if sy > 0 else -1
                    if s * y0 < 0 or s * y1 < 0 or s * y2 < 0:
                        continue
                    if s * 2 * det0 < s * diam * sy:
                        continue
                    ok = True
                    for v in range(n):
                        tv = d[v, a] * y0 + d[v, b] * y1 + d[v, c_] * y2
                        if s * tv > s * det0:
                            ok = False
                            break
                    if ok:
                        if nc >= cand.shape[0]:
                            return -1
                        cand[nc, 0] = a
                        cand[nc, 1] = b
                        cand[nc, 2] = c_
                        nc += 1
        return nc

    @njit(cache=True, inline="always")
    def _det3(a00, a01, a02, a10, a11, a12, a20, a21, a22):
        return (
            a00 * (a11 * a22 - a12 * a21)
            - a01 * (a10 * a22 - a12 * a20)
            + a02 * (a10 * a21 - a11 * a20)
        )

    @njit(cache=True, inline="always")
    def _det4(m):
        return (
            m[0, 0] * _det3(m[1, 1], m[1, 2], m[1, 3],
                            m[2, 1], m[2, 2], m[2, 3],
                            m[3, 1], m[3, 2], m[3, 3])
            - m[0, 1] * _det3(m[1, 0], m[1, 2], m[1, 3],
                              m[2, 0], m[2, 2], m[2, 3],
                              m[3, 0], m[3, 2], m[3, 3])
            + m[0, 2] * _det3(m[1, 0], m[1, 1], m[1, 3],
                              m[2, 0], m[2, 1], m[2, 3],
                              m[3, 0], m[3, 1], m[3, 3])
            - m[0, 3] * _det3(m[1, 0], m[1, 1], m[1, 2],
                              m[2, 0], m[2, 1], m[2, 2],
                              m[3, 0], m[3, 1], m[3, 2])
        )

    @njit(cache=True)
    def _screen4(d, diam, cand, sing):
        n = d.shape[0]
        nc = 0
        ns = 0
        base = np.empty((4, 4), dtype=np.int64)
        work = np.empty((4, 4), dtype=np.int64)
        y = np.empty(4, dtype=np.int64)
        idx = np.empty(4, dtype=np.int64)
        for a in range(n - 3):
            for b in range(a + 1, n - 2):
                dab = d[a, b]
                for c_ in range(b + 1, n - 1):
                    m3 = max(dab, max(d[a, c_], d[b, c_]))
                    for e in range(c_ + 1, n):
                        mx = max(m3, max(d[a, e], max(d[b, e], d[c_, e])))
                        if 2 * mx < diam:
                            continue
                        idx[0] = a
                        idx[1] = b
                        idx[2] = c_
                        idx[3] = e
                        for i in range(4):
                            for j in range(4):
                                base[i, j] = d[idx[i], idx[j]]
                        det0 = _det4(base)
                        if det0 == 0:
                            if ns >= sing.shape[0]:
                                return -1, ns
                            sing[ns, 0] = a
                            sing[ns, 1] = b
                            sing[ns, 2] = c_
                            sing[ns, 3] = e
                            ns += 1
                            continue
                        for col in range(4):
                            for i in range(4):
                                for j in range(4):
                                    work[i, j] = base[i, j]
                                work[i, col] = 1
                            y[col] = _det4(work)
                        sy = y[0] + y[1] + y[2] + y[3]
                        if sy == 0:
                            continue
                        s = 1 if sy > 0 else -1
                        if s * y[0] < 0 or s * y[1] < 0 or s * y[2] < 0 or s * y[3] < 0:
                            continue
                        if s * 2 * det0 < s * diam * sy:
                            continue
                        ok = True
                        for v in range(n):
                            tv = (d[v, a] * y[0] + d[v, b] * y[1]
                                  + d[v, c_] * y[2] + d[v, e] * y[3])
                            if s * tv > s * det0:
                                ok = False
                                break
                        if ok:
                            if nc >= cand.shape[0]:
                                return -1, ns
                            cand[nc, 0] = a
                            cand[nc, 1] = b
                            cand[nc, 2] = c_
                            cand[nc, 3] = e
                            nc += 1
        return nc, ns


def screen_supports(d_uint16: np.ndarray, diam: int, k: int):
    """Run the size-k screen; returns (candidates, singular) vertex tuples.

    Returns None when no kernel is available (no numba), in which case the
    caller must fall back to refining every subset.
    """
    if njit is None:  # pragma: no cover
        return None
    d = d_uint16.astype(np.int64)
    cand = np.empty((_CAP, k), dtype=np.int64)
    if k == 2:
        nc = _screen2(d, diam, cand)
        ns = 0
        sing = np.empty((0, k), dtype=np.int64)
    elif k == 3:
        nc = _screen3(d, diam, cand)
        ns = 0
        sing = np.empty((0, k), dtype=np.int64)
    elif k == 4:
        sing = np.empty((_CAP, 4), dtype=np.int64)
        nc, ns = _screen4(d, diam, cand, sing)
    else:
        return None
    if nc < 0:
        raise RuntimeError("supports screen overflowed its candidate buffer")
    cands = [tuple(int(x) for x in row) for row in cand[:nc]]
    singular = [tuple(int(x) for x in row) for row in sing[:ns]]
    return cands, singular
