"""Compiled inner loops for the recurrent trunks.

The unrolled forward/backward recursions are plain scalar loops; compiling
them removes the per-op numpy overhead that otherwise dominates at batch
size 32. The math is identical to the tape primitives in models.py that
call these kernels.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def lstm_fwd(X, wx, wh, b):
    """Forward unroll. X (B, w); wx (4H,); wh (H, 4H); b (4H,).

    Returns (HS, CS, ACT, HC): hidden/cell states entering each step
    (index w = final), post-activation gates (i, f, o, g), and tanh of the
    updated cell.
    """
    B, w = X.shape
    H = wh.shape[0]
    H4 = 4 * H
    HS = np.zeros((w + 1, B, H))
    CS = np.zeros((w + 1, B, H))
    ACT = np.empty((w, B, H4))
    HC = np.empty((w, B, H))
    for t in range(w):
        a = np.dot(HS[t], wh)
        for bi in range(B):
            xv = X[bi, t]
            for j in range(H4):
                v = a[bi, j] + xv * wx[j] + b[j]
                if j < 3 * H:
                    ACT[t, bi, j] = 1.0 / (1.0 + np.exp(-v))
                else:
                    ACT[t, bi, j] = np.tanh(v)
            for j in range(H):
                i_ = ACT[t, bi, j]
                f_ = ACT[t, bi, H + j]
                o_ = ACT[t, bi, 2 * H + j]
                g_ = ACT[t, bi, 3 * H + j]
                cn = f_ * CS[t, bi, j] + i_ * g_
                CS[t + 1, bi, j] = cn
                hc = np.tanh(cn)
                HC[t, bi, j] = hc
                HS[t + 1, bi, j] = o_ * hc
    return HS, CS, ACT, HC


@njit(cache=True)
def lstm_bwd(X, wh, gh, HS, CS, ACT, HC):
    """Backward unroll; returns (dwx, dwh, db)."""
    w, B, H4 = ACT.shape
    H = H4 // 4
    dwx = np.zeros(H4)
    dwh = np.zeros((H, H4))
    db = np.zeros(H4)
    dh = gh.copy()
    dc = np.zeros((B, H))
    da = np.empty((B, H4))
    for t in range(w - 1, -1, -1):
        for bi in range(B):
            for j in range(H):
                i_ = ACT[t, bi, j]
                f_ = ACT[t, bi, H + j]
                o_ = ACT[t, bi, 2 * H + j]
                g_ = ACT[t, bi, 3 * H + j]
                hc = HC[t, bi, j]
                dct = dh[bi, j] * o_ * (1.0 - hc * hc) + dc[bi, j]
                da[bi, j] = dct * g_ * i_ * (1.0 - i_)
                da[bi, H + j] = dct * CS[t, bi, j] * f_ * (1.0 - f_)
                da[bi, 2 * H + j] = dh[bi, j] * hc * o_ * (1.0 - o_)
                da[bi, 3 * H + j] = dct * i_ * (1.0 - g_ * g_)
                dc[bi, j] = dct * f_
        for bi in range(B):
            xv = X[bi, t]
            for j in range(H4):
                v = da[bi, j]
                dwx[j] += xv * v
                db[j] += v
        dwh += np.dot(HS[t].T, da)
        dh = np.dot(da, wh.T)
    return dwx, dwh, db


@njit(cache=True)
def gru_fwd(X, wx_rz, wh_rz, b_rz, wx_n, wh_n, b_n):
    """Forward unroll. Returns (HS, RZ, N, RH)."""
    B, w = X.shape
    H = wh_n.shape[0]
    H2 = 2 * H
    HS = np.zeros((w + 1, B, H))
    RZ = np.empty((w, B, H2))
    N = np.empty((w, B, H))
    RH = np.empty((w, B, H))
    for t in range(w):
        a = np.dot(HS[t], wh_rz)
        for bi in range(B):
            xv = X[bi, t]
            for j in range(H2):
                RZ[t, bi, j] = 1.0 / (1.0 + np.exp(-(a[bi, j] + xv * wx_rz[j]
                                                     + b_rz[j])))
            for j in range(H):
                RH[t, bi, j] = RZ[t, bi, j] * HS[t, bi, j]
        an = np.dot(RH[t], wh_n)
        for bi in range(B):
            xv = X[bi, t]
            for j in range(H):
                n = np.tanh(an[bi, j] + xv * wx_n[j] + b_n[j])
                N[t, bi, j] = n
                z = RZ[t, bi, H + j]
                HS[t + 1, bi, j] = (1.0 - z) * n + z * HS[t, bi, j]
    return HS, RZ, N, RH


@njit(cache=True)
def gru_bwd(X, wh_rz, wh_n, gh, HS, RZ, N, RH):
    """Backward unroll; returns (dwx_rz, dwh_rz, db_rz, dwx_n, dwh_n, db_n)."""
    w, B, H = N.shape
    H2 = 2 * H
    dwx_rz = np.zeros(H2)
    dwh_rz = np.zeros((H, H2))
    db_rz = np.zeros(H2)
    dwx_n = np.zeros(H)
    dwh_n = np.zeros((H, H))
    db_n = np.zeros(H)
    dh = gh.copy()
    dan = np.empty((B, H))
    da = np.empty((B, H2))
    for t in range(w - 1, -1, -1):
        for bi in range(B):
            for j in range(H):
                z = RZ[t, bi, H + j]
                n = N[t, bi, j]
                dan[bi, j] = dh[bi, j] * (1.0 - z) * (1.0 - n * n)
        drh = np.dot(dan, wh_n.T)
        for bi in range(B):
            xv = X[bi, t]
            for j in range(H):
                v = dan[bi, j]
                dwx_n[j] += xv * v
                db_n[j] += v
                r = RZ[t, bi, j]
                z = RZ[t, bi, H + j]
                h_prev = HS[t, bi, j]
                dz = dh[bi, j] * (h_prev - N[t, bi, j])
                da[bi, j] = drh[bi, j] * h_prev * r * (1.0 - r)
                da[bi, H + j] = dz * z * (1.0 - z)
        dwh_n += np.dot(RH[t].T, dan)
        for bi in range(B):
            xv = X[bi, t]
            for j in range(H2):
                v = da[bi, j]
                dwx_rz[j] += xv * v
                db_rz[j] += v
        dwh_rz += np.dot(HS[t].T, da)
        dh_next = np.dot(da, wh_rz.T)
        for bi in range(B):
            for j in range(H):
                r = RZ[t, bi, j]
                z = RZ[t, bi, H + j]
                dh_next[bi, j] += dh[bi, j] * z + drh[bi, j] * r
        dh = dh_next
    return dwx_rz, dwh_rz, db_rz, dwx_n, dwh_n, db_n


@njit(cache=True)
def css_residuals_loop(z, ar, ma):
    """One-step CSS residuals: ar(B) z = ma(B) e, zero pre-sample residuals.

    ar/ma are ascending lag polynomials with leading 1; residuals start at
    the first index where every AR lag of z exists.
    """
    L = ar.shape[0] - 1
    n = z.shape[0]
    m = n - L
    ar_nz = np.nonzero(ar)[0]
    ma_nz = np.nonzero(ma)[0]
    e = np.empty(m)
    for t in range(m):
        acc = 0.0
        for ii in range(ar_nz.shape[0]):
            k = ar_nz[ii]
            acc += ar[k] * z[t + L - k]
        for jj in range(ma_nz.shape[0]):
            j = ma_nz[jj]
            if 1 <= j <= t:
                acc -= ma[j] * e[t - j]
        e[t] = acc
    return e
