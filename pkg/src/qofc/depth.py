"""Lee nonclassicality depth.

Two routes:

* ``tau_eigen``: for a two-mode state, the least eigenvalue of the assembled
  4x4 covariance matrix taken with opposite sign (clamped at zero for
  classical states).  Necessary and sufficient for two-mode nonclassicality.
* ``tau_m``: for arbitrary bipartitions, the unique positive root of the
  quartic obtained by superposing thermal noise of mean tau onto both arms,

      tau^4 + 2 tau^3 (w_s + w_i)
            + tau^2 (var_s + var_i + 4 w_s w_i)
            + 2 tau (var_s w_i + var_i w_s) + e2 = 0,

  which is sufficient-only but avoids eigensolves on large matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .identifiers import e2 as _e2
from .moments import ArmMoments
from .state import GaussianCombState, assemble_full_matrix

METHOD_EIGEN = "eigenvalue"
METHOD_QUARTIC = "quartic_root"

_BISECT_INTERVAL = 1e-12
_BISECT_MAX_ITER = 200
_NEWTON_STEPS = 5


@dataclass(frozen=True)
class DepthResult:
    tau: float
    method: str
    residual: float


def tau_eigen(state: GaussianCombState) -> DepthResult:
    """Depth of a two-mode state from the 4x4 eigenvalue spectrum."""
    if state.n_modes != 2:
        raise ValueError("tau_eigen is defined for two-mode states only")
    a = assemble_full_matrix(state.cov)
    w = np.linalg.eigvalsh(a)
    tau = max(0.0, float(-w[0]))
    residual = float(np.finfo(float).eps * max(1.0, float(np.abs(w).max())))
    return DepthResult(tau=tau, method=METHOD_EIGEN, residual=residual)


def _quartic_coefficients(moments: ArmMoments) -> tuple[float, float, float, float]:
    c3 = 2.0 * (moments.w_s + moments.w_i)
    c2 = moments.var_s + moments.var_i + 4.0 * moments.w_s * moments.w_i
    c1 = 2.0 * (moments.var_s * moments.w_i + moments.var_i * moments.w_s)
    return c3, c2, c1, _e2(moments)


def tau_m(moments: ArmMoments) -> DepthResult:
    """Depth of a bipartition from the thermal-noise quartic.

    Zero whenever e2 >= 0.  Otherwise all non-constant coefficients are
    nonnegative and the constant term is negative, so there is exactly one
    positive root; it is bracketed, bisected and polished with Newton steps.
    """
    c3, c2, c1, e_m = _quartic_coefficients(moments)
    if e_m >= 0.0:
        return DepthResult(tau=0.0, method=METHOD_QUARTIC, residual=0.0)

    def f(t: float) -> float:
        return (((t + c3) * t + c2) * t + c1) * t + e_m

    def fp(t: float) -> float:
        return ((4.0 * t + 3.0 * c3) * t + 2.0 * c2) * t + c1

    upper = 1.0 + moments.w_s + moments.w_i + moments.var_s + moments.var_i + abs(e_m)
    if f(upper) <= 0.0:
        raise RuntimeError(
            f"positive quartic root not bracketed on [0, {upper:.6g}]; "
            "the arm moments are inconsistent"
        )
    lo, hi = 0.0, upper
    for _ in range(_BISECT_MAX_ITER):
        if hi - lo <= _BISECT_INTERVAL:
            break
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    for _ in range(_NEWTON_STEPS):
        slope = fp(tau)
        if slope <= 0.0:
            break
        step = f(tau) / slope
        tau -= step
        if tau < 0.0:
            tau = 0.5 * (lo + hi)
            break
    residual = abs(f(tau))
    if residual > 1e-10 * max(1.0, abs(e_m)):
        raise RuntimeError(
            f"quartic residual {residual:.3g} above tolerance for e2 = {e_m:.6g}"
        )
    return DepthResult(tau=float(tau), method=METHOD_QUARTIC, residual=float(residual))
