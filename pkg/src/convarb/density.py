"""Candidate fundamental supermartingale density and its Monte Carlo checks.

``D* = E(-int a1 dM1) * E(-int a2 dM2)`` where ``a1``, ``a2`` are the
densities produced by :mod:`convarb.structure`. :func:`verify_C3` tests
``E[D*_T] = 1``; :func:`verify_supermartingale_under_Pstar` tests that
``E[D*_t Z_t]`` does not increase across checkpoint times for both prices.

Monte Carlo runs are split into fixed chunks of consecutive path indices.
Chunks may run on several threads; per-path results are stored by index and
reduced once at the end, so estimates do not depend on the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels, structure
from .errors import PreconditionError
from .models import build, get_entry
from .models.base import DecomposedPath

__all__ = [
    "DensityPath",
    "MCVerdict",
    "mc_verdict",
    "build_density",
    "density_batch",
    "simulate_density",
    "verify_C3",
    "verify_supermartingale_under_Pstar",
    "supermartingale_summary",
    "density_report",
    "K_SIGMA",
    "N_CHECKPOINTS",
    "INCONCLUSIVE_RATIO",
]

K_SIGMA = 3.0
N_CHECKPOINTS = 5
INCONCLUSIVE_RATIO = 0.2
CHUNK = 5000


@dataclass
class DensityPath:
    values: np.ndarray
    positive: object
    factor1: np.ndarray
    factor2: np.ndarray


@dataclass
class MCVerdict:
    estimate: float
    stderr: float
    n: int
    verdict: str
    target: float = 1.0
    k_sigma: float = K_SIGMA
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"estimate": self.estimate, "stderr": self.stderr, "n": self.n, "verdict": self.verdict,
                "target": self.target, "k_sigma": self.k_sigma, **self.extra}


def mc_verdict(samples, target: float = 1.0, k_sigma: float = K_SIGMA, one_sided: bool = False) -> MCVerdict:
    """Verdict on ``mean(samples)`` against ``target``.

    ``pass`` when the estimate is within ``k_sigma`` standard errors of the
    target (or, with ``one_sided``, not above it by more than that);
    ``inconclusive`` when the standard error exceeds 20% of the estimate.
    """
    x = np.asarray(samples, dtype=float)
    n = len(x)
    est = float(np.mean(x))
    se = float(np.std(x, ddof=1) / np.sqrt(n)) if n > 1 else float("inf")
    if se == 0.0:
        ok = est <= target if one_sided else est == target
        return MCVerdict(est, se, n, "pass" if ok else "fail", target, k_sigma)
    if se > INCONCLUSIVE_RATIO * abs(est):
        return MCVerdict(est, se, n, "inconclusive", target, k_sigma)
    dev = est - target
    ok = dev <= k_sigma * se if one_sided else abs(dev) <= k_sigma * se
    return MCVerdict(est, se, n, "pass" if ok else "fail", target, k_sigma)


def _factor(a, dM, jumps, dQV):
    cont = -a * (dM - jumps)
    jmp = -a * jumps
    qv = np.where(jumps != 0, 0.0, a * a * dQV)
    return kernels.doleans(cont, qv, jmp), jmp


def density_batch(path: DecomposedPath, a1_tilde, a2_tilde):
    """Density values for a path or batch, with no C1 gate."""
    f1, j1 = _factor(a1_tilde, path.dM1, path.jumpM1, path.dQV_M1)
    f2, j2 = _factor(a2_tilde, path.dM2, path.jumpM2, path.dQV_M2)
    positive = np.all((j1 > -1.0) & (j2 > -1.0), axis=-1)
    if not path.is_batch:
        positive = bool(positive)
    return DensityPath(f1 * f2, positive, f1, f2)


def build_density(path: DecomposedPath, a1_tilde=None, a2_tilde=None) -> DensityPath:
    """Density process on one path; refused when ``A2`` has no density against ``<M2>``."""
    sa = structure.split_A(path)
    c1, a2, _ = structure.check_C1_C2(path, sa.A2)
    if not np.all(c1.holds):
        raise PreconditionError("C1 fails: A2 charges cells where <M2> does not")
    a1 = sa.a1_tilde if a1_tilde is None else np.asarray(a1_tilde, dtype=float)
    a2 = a2 if a2_tilde is None else np.asarray(a2_tilde, dtype=float)
    return density_batch(path, a1, a2)


def _chunk_paths(name, params, seed, lo, m):
    entry = get_entry(name)
    if entry.batched:
        return [build(name, params, seed=seed, path_index=lo, n_paths=m)]
    return [build(name, params, seed=seed, path_index=lo + j) for j in range(m)]


def _chunk_density(name, params, seed, lo, m, times):
    """Per-path ``D*_t``, ``D*_t X_t``, ``D*_t Y_t`` at ``times`` plus C1 flags."""
    out_d = np.empty((m, len(times)))
    out_x = np.empty((m, len(times)))
    out_y = np.empty((m, len(times)))
    c1_ok = np.empty(m, dtype=bool)
    row = 0
    for p in _chunk_paths(name, params, seed, lo, m):
        sa = structure.split_A(p)
        c1, a2, _ = structure.check_C1_C2(p, sa.A2)
        dens = density_batch(p, sa.a1_tilde, a2)
        idx = np.searchsorted(p.grid.points, np.asarray(times) * (1 + 1e-12), side="right") - 1
        k = p.n_paths
        out_d[row:row + k] = np.atleast_2d(dens.values)[:, idx]
        out_x[row:row + k] = np.atleast_2d(dens.values * p.X)[:, idx]
        out_y[row:row + k] = np.atleast_2d(dens.values * p.Y)[:, idx]
        c1_ok[row:row + k] = np.atleast_1d(c1.holds)
        row += k
    return out_d, out_x, out_y, c1_ok


def simulate_density(config: dict, n_paths: int, times, seed: int | None = None, threads: int = 1,
                     chunk: int = CHUNK):
    """Simulate ``n_paths`` paths and return ``(D, DX, DY, c1_ok)`` sampled at ``times``."""
    name = config["model"]
    params = dict(config.get("params", {}))
    seed = int(config.get("seed", 0) if seed is None else seed)
    starts = list(range(0, n_paths, chunk))
    jobs = [(name, params, seed, lo, min(chunk, n_paths - lo), tuple(times)) for lo in starts]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda a: _chunk_density(*a), jobs))
    else:
        parts = [_chunk_density(*a) for a in jobs]
    return tuple(np.concatenate([p[i] for p in parts]) for i in range(4))


def _horizon(config):
    entry = get_entry(config["model"])
    kw = dict(entry.defaults)
    kw.update(config.get("params", {}))
    return float(kw.get("horizon_bar", kw.get("horizon", 1.0)))


def verify_C3(config: dict, n_paths: int, k_sigma: float = K_SIGMA, seed: int | None = None,
              threads: int = 1) -> MCVerdict:
    """Monte Carlo test of ``E[D*_T] = 1`` over paths where the density exists."""
    T = _horizon(config)
    D, _, _, ok = simulate_density(config, n_paths, [T], seed, threads)
    v = mc_verdict(D[ok, 0], 1.0, k_sigma)
    v.extra["refused_paths"] = int(np.sum(~ok))
    return v


def verify_supermartingale_under_Pstar(config: dict, n_paths: int, checkpoints=None,
                                       k_sigma: float = K_SIGMA, seed: int | None = None,
                                       threads: int = 1) -> dict:
    """Check ``E[D*_t Z_t]`` is nonincreasing across checkpoints for ``Z = X, Y``.

    Each consecutive pair is compared through paired per-path differences;
    a comparison passes when the mean increase is at most ``k_sigma``
    standard errors. Returns per-asset lists of verdicts, the checkpoint
    means, and an overall ``pass``/``fail``.
    """
    T = _horizon(config)
    times = np.linspace(0.0, T, N_CHECKPOINTS) if checkpoints is None else np.asarray(checkpoints, float)
    D, DX, DY, ok = simulate_density(config, n_paths, times, seed, threads)
    return supermartingale_summary(times, D, DX, DY, ok, k_sigma)


def supermartingale_summary(times, D, DX, DY, ok, k_sigma: float = K_SIGMA) -> dict:
    """Checkpoint comparisons from sampled ``D*``, ``D* X``, ``D* Y``."""
    out = {"checkpoints": np.asarray(times, dtype=float).tolist(), "refused_paths": int(np.sum(~ok))}
    overall = True
    for label, arr in (("X", DX[ok]), ("Y", DY[ok]), ("D", D[ok])):
        verdicts = []
        for k in range(len(times) - 1):
            v = mc_verdict(arr[:, k + 1] - arr[:, k], 0.0, k_sigma, one_sided=True)
            if v.verdict == "inconclusive":
                # a difference near zero has a tiny mean by design; judge it on the bound alone
                v.verdict = "pass" if v.estimate <= k_sigma * v.stderr else "fail"
            verdicts.append(v)
        out[label] = verdicts
        out[label + "_means"] = arr.mean(axis=0).tolist()
        if label != "D":
            overall &= all(v.verdict == "pass" for v in verdicts)
    out["verdict"] = "pass" if overall else "fail"
    return out


def density_report(config: dict, n_paths: int, k_sigma: float = K_SIGMA, seed: int | None = None,
                   threads: int = 1, n_checkpoints: int = N_CHECKPOINTS) -> dict:
    """Both density checks from one simulation: ``E[D*_T] = 1`` and the checkpoint test."""
    T = _horizon(config)
    times = np.linspace(0.0, T, n_checkpoints)
    D, DX, DY, ok = simulate_density(config, n_paths, times, seed, threads)
    c3 = mc_verdict(D[ok, -1], 1.0, k_sigma) if np.any(ok) else None
    sm = supermartingale_summary(times, D, DX, DY, ok, k_sigma) if np.any(ok) else None
    se = D[ok].std(axis=0, ddof=1) / np.sqrt(max(int(np.sum(ok)), 1)) if np.sum(ok) > 1 else np.zeros(len(times))
    return {"times": times, "C3": c3, "supermartingale": sm, "refused_paths": int(np.sum(~ok)),
            "stderr_D": se}
