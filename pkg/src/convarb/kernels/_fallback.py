"""Pure numpy implementations of the time-stepping kernels.

Every kernel loops over time and vectorises across paths. Inputs are 2-D
``(n_paths, n_steps)`` float64 arrays; 1-D inputs are the single-path case and
are handled by the dispatcher in :mod:`convarb.kernels`.
"""

import numpy as np


def ou_euler(initial, coeff, dt, dW):
    n_paths, n = dW.shape
    out = np.empty((n_paths, n + 1))
    out[:, 0] = initial
    for i in range(n):
        out[:, i + 1] = out[:, i] + coeff * out[:, i] * dt[i] + dW[:, i]
    return out


def kalman_bucy(x, dW_obs, gain, dt, y0):
    n_paths, n = dW_obs.shape
    yhat = np.empty((n_paths, n + 1))
    innov = np.empty((n_paths, n))
    yhat[:, 0] = y0
    for i in range(n):
        dN = x[:, i] * dt[i] + dW_obs[:, i] - yhat[:, i] * dt[i]
        innov[:, i] = dN
        yhat[:, i + 1] = yhat[:, i] + gain[i] * dN
    return yhat, innov


def absorb_scan(x0, y0, dX, dY):
    # fraction of each cell actually traversed before min(X, Y) reaches 0
    n_paths, n = dX.shape
    frac = np.zeros((n_paths, n))
    x = np.array(x0, dtype=float, copy=True)
    y = np.array(y0, dtype=float, copy=True)
    alive = (x > 0.0) & (y > 0.0)
    for i in range(n):
        lam = np.ones(n_paths)
        xn = x + dX[:, i]
        yn = y + dY[:, i]
        hit_x = xn <= 0.0
        hit_y = yn <= 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = np.where(hit_x, np.minimum(lam, x / (x - xn)), lam)
            lam = np.where(hit_y, np.minimum(lam, y / (y - yn)), lam)
        lam = np.where(alive, lam, 0.0)
        frac[:, i] = lam
        x = x + lam * dX[:, i]
        y = y + lam * dY[:, i]
        alive = alive & ~(hit_x | hit_y)
    return frac


def doleans(cont, qv, jumps):
    n_paths, n = cont.shape
    out = np.empty((n_paths, n + 1))
    out[:, 0] = 1.0
    for i in range(n):
        out[:, i + 1] = out[:, i] * np.exp(cont[:, i] - 0.5 * qv[:, i]) * (1.0 + jumps[:, i])
    return out
