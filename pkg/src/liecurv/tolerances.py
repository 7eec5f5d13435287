"""Numerical tolerances shared by every module.

Functions read the active set through :func:`tols` at call time, so a
scenario or the ``LIECURV_TOL_OVERRIDE`` environment variable can tighten
or loosen them without threading a config object through every call.
"""

from __future__ import annotations

import contextlib
import contextvars
import dataclasses
import json
import os
from dataclasses import dataclass

ENV_VAR = "LIECURV_TOL_OVERRIDE"


@dataclass(frozen=True)
class Tolerances:
    sym: float = 1e-9  # symmetry of Gram matrices
    tol: float = 1e-9  # generic absolute residual on unit-scaled data
    degenerate: float = 1e-8  # relative to the largest |Gram eigenvalue|
    cluster: float = 1e-6  # eigenvalue clustering, times max(1, spectral radius)
    commute: float = 1e-9
    cond_max: float = 1e8  # eigenvector condition number above which we call it defective
    jacobi: float = 1e-10
    closed: float = 1e-8
    cc: float = 1e-8  # constant-curvature test
    theorem: float = 1e-8  # verdict threshold for explicit (exact) germ data
    fd: float = 5e-6  # verdict threshold for finite-difference germ data
    fd_step: float = 1e-5

    def replace(self, **changes) -> "Tolerances":
        unknown = set(changes) - {f.name for f in dataclasses.fields(self)}
        if unknown:
            raise KeyError(f"unknown tolerance(s): {sorted(unknown)}")
        return dataclasses.replace(self, **{k: float(v) for k, v in changes.items()})

    def as_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


def _from_env() -> Tolerances:
    raw = os.environ.get(ENV_VAR)
    if not raw:
        return Tolerances()
    return Tolerances().replace(**json.loads(raw))


_current: contextvars.ContextVar[Tolerances | None] = contextvars.ContextVar(
    "liecurv_tolerances", default=None
)


def tols() -> Tolerances:
    active = _current.get()
    return active if active is not None else _from_env()


@contextlib.contextmanager
def override(**changes):
    """Temporarily replace some tolerances for the current context."""
    token = _current.set(tols().replace(**changes))
    try:
        yield tols()
    finally:
        _current.reset(token)
