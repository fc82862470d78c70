# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time-stepping kernels; same contracts as ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def ou_euler(initial, double coeff, const double[:] dt, const double[:, :] dW):
    cdef Py_ssize_t n_paths = dW.shape[0], n = dW.shape[1], p, i
    out_arr = np.empty((n_paths, n + 1))
    cdef double[:, :] out = out_arr
    cdef double[:] init = np.broadcast_to(np.asarray(initial, dtype=float), (n_paths,)).copy()
    cdef double w
    for p in range(n_paths):
        w = init[p]
        out[p, 0] = w
        for i in range(n):
            w = w + coeff * w * dt[i] + dW[p, i]
            out[p, i + 1] = w
    return out_arr


def kalman_bucy(const double[:, :] x, const double[:, :] dW_obs, const double[:] gain,
                const double[:] dt, double y0):
    cdef Py_ssize_t n_paths = dW_obs.shape[0], n = dW_obs.shape[1], p, i
    yhat_arr = np.empty((n_paths, n + 1))
    innov_arr = np.empty((n_paths, n))
    cdef double[:, :] yhat = yhat_arr
    cdef double[:, :] innov = innov_arr
    cdef double y, dN
    for p in range(n_paths):
        y = y0
        yhat[p, 0] = y
        for i in range(n):
            dN = x[p, i] * dt[i] + dW_obs[p, i] - y * dt[i]
            innov[p, i] = dN
            y = y + gain[i] * dN
            yhat[p, i + 1] = y
    return yhat_arr, innov_arr


def absorb_scan(x0, y0, const double[:, :] dX, const double[:, :] dY):
    cdef Py_ssize_t n_paths = dX.shape[0], n = dX.shape[1], p, i
    frac_arr = np.zeros((n_paths, n))
    cdef double[:, :] frac = frac_arr
    cdef double[:] xs = np.broadcast_to(np.asarray(x0, dtype=float), (n_paths,)).copy()
    cdef double[:] ys = np.broadcast_to(np.asarray(y0, dtype=float), (n_paths,)).copy()
    cdef double x, y, xn, yn, lam, cand
    cdef bint hit
    for p in range(n_paths):
        x = xs[p]
        y = ys[p]
        if x <= 0.0 or y <= 0.0:
            continue
        for i in range(n):
            lam = 1.0
            xn = x + dX[p, i]
            yn = y + dY[p, i]
            hit = False
            if xn <= 0.0:
                cand = x / (x - xn)
                if cand < lam:
                    lam = cand
                hit = True
            if yn <= 0.0:
                cand = y / (y - yn)
                if cand < lam:
                    lam = cand
                hit = True
            frac[p, i] = lam
            x = x + lam * dX[p, i]
            y = y + lam * dY[p, i]
            if hit:
                break
    return frac_arr


def doleans(const double[:, :] cont, const double[:, :] qv, const double[:, :] jumps):
    cdef Py_ssize_t n_paths = cont.shape[0], n = cont.shape[1], p, i
    out_arr = np.empty((n_paths, n + 1))
    cdef double[:, :] out = out_arr
    cdef double e
    for p in range(n_paths):
        e = 1.0
        out[p, 0] = e
        for i in range(n):
            e = e * exp(cont[p, i] - 0.5 * qv[p, i]) * (1.0 + jumps[p, i])
            out[p, i + 1] = e
    return out_arr
