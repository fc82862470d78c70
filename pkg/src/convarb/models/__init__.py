"""Example economies, each emitting a :class:`DecomposedPath`.

:data:`CATALOG` lists every model in a stable order with its parameter
defaults, parameter domains and a short description of the example it
reproduces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from ..errors import DomainError
from .base import DecomposedPath, assemble, check_invariants
from .deterministic_h import model_deterministic_h
from .filtering import model_filtering, riccati_gain
from .insider import bridge_drift_energy, model_insider_defaultable
from .predictable_default import model_predictable_default_variant
from .random_barrier import model_random_barrier
from .risk_attitudes import model_risk_attitudes
from .survival_claim import model_survival_claim
from .two_defaults import model_two_defaults

__all__ = [
    "CATALOG",
    "DecomposedPath",
    "ModelEntry",
    "assemble",
    "bridge_drift_energy",
    "build",
    "check_invariants",
    "get_entry",
    "model_deterministic_h",
    "model_filtering",
    "model_insider_defaultable",
    "model_predictable_default_variant",
    "model_random_barrier",
    "model_risk_attitudes",
    "model_survival_claim",
    "model_two_defaults",
    "riccati_gain",
]


@dataclass(frozen=True)
class ModelEntry:
    name: str
    builder: Callable[..., DecomposedPath]
    defaults: dict
    domains: dict
    reference: str
    batched: bool
    convergence: bool


CATALOG: tuple[ModelEntry, ...] = (
    ModelEntry("two_defaults", model_two_defaults,
               dict(C1_rate=1.0, C2_rate=1.0, barrier1=1.0, barrier2=1.0, horizon=1.0, n_steps=200,
                    mode="analytic"),
               dict(C1_rate="> 0", C2_rate="> 0", barrier1="> 0", barrier2="> 0", horizon="> 0",
                    mode="analytic | euler"),
               "two predictable default times, insider buys Y just before the second one", False, True),
    ModelEntry("random_barrier", model_random_barrier,
               dict(barrier={"distribution": "expon", "params": {"scale": 1.0}}, X0=1.0, horizon=1.0,
                    n_steps=200),
               dict(barrier="scipy.stats law on (0, inf)", X0="> 0", horizon="> 0"),
               "Brownian hitting of an independent random barrier, price drifts up below the running maximum",
               False, False),
    ModelEntry("survival_claim", model_survival_claim,
               dict(lambdaX=0.1, lambdaY=0.3, horizon=1.0, n_steps=200),
               dict(lambdaX="> 0", lambdaY="> 0", horizon="> 0"),
               "survival claim priced with two constant default intensities", False, True),
    ModelEntry("predictable_default_variant", model_predictable_default_variant,
               dict(lambdaY=0.5, horizon=1.0, n_steps=200, barrier=1.0, mode="analytic"),
               dict(lambdaY="> 0", horizon="> 0", barrier="> 0", mode="analytic | euler"),
               "survival claim whose default is announced to one market", False, True),
    ModelEntry("insider_defaultable", model_insider_defaultable,
               dict(lam=0.1, horizon=1.0, n_steps=200),
               dict(lam="> 0", horizon="> 0"),
               "defaultable Brownian exponential with an insider who knows the terminal value", False, True),
    ModelEntry("risk_attitudes", model_risk_attitudes,
               dict(rho=0.8, X0=10.0, horizon_bar=2.0, n_steps=400, wy0=0.0),
               dict(rho="[-1, 1]", X0="> 0", horizon_bar="> 0"),
               "same Brownian payoff priced under an Ornstein-Uhlenbeck risk premium", True, False),
    ModelEntry("filtering", model_filtering,
               dict(horizon=1.0, X0=1.0, n_steps=1000),
               dict(horizon="> 0"),
               "Kalman-Bucy estimate of a Brownian signal revealed at the horizon", True, True),
    ModelEntry("deterministic_h", model_deterministic_h,
               dict(r=1.0, horizon=1.5, X0=10.0, Y0=10.0, n_steps=300),
               dict(r="> 0", horizon="> 0", X0="> 0", Y0="> 0"),
               "second asset with a deterministic loading on the first asset's martingale", True, False),
)

_BY_NAME = {e.name: e for e in CATALOG}


def get_entry(name: str) -> ModelEntry:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise DomainError(f"unknown model {name!r}; catalog: {', '.join(_BY_NAME)}") from None


def build(name: str, params: dict | None = None, *, seed: int = 0, path_index: int = 0,
          n_paths: int | None = None) -> DecomposedPath:
    """Build one path (or a batch for batched models) with defaults filled in."""
    entry = get_entry(name)
    kw = dict(entry.defaults)
    params = dict(params or {})
    unknown = set(params) - set(kw)
    if unknown:
        raise DomainError(f"unknown parameters for {name}: {sorted(unknown)}")
    kw.update(params)
    if n_paths is not None:
        if not entry.batched:
            raise DomainError(f"model {name} does not simulate batches")
        kw["n_paths"] = n_paths
    try:
        return entry.builder(seed=seed, path_index=path_index, **kw)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"invalid parameters for {name}: {exc}") from exc
