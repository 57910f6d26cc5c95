"""Integrated-intensity moments of Gaussian comb states.

Second-order moments come from closed forms in the covariance blocks:

    <W_j>          = b_j + |xi_j|^2
    <dW_j^2>       = b_j^2 + |c_j|^2 + 2 b_j |xi_j|^2 + 2 Re[c_j conj(xi_j)^2]
    <dW_j dW_k>    = |d_jk|^2 + |d_bar_jk|^2
                     + 2 Re[d_jk conj(xi_j) conj(xi_k)]
                     + 2 Re[d_bar_jk xi_j conj(xi_k)]

The moment generating function is implemented in a regularised determinant
form that is finite at lambda = 0, and a finite-difference oracle
differentiates it numerically.  The oracle exists purely to cross-check the
closed forms; production code never differentiates the generating function.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .state import Bipartition, GaussianCombState, assemble_full_matrix

_CONSISTENCY_TOL = 1e-10


class OracleError(RuntimeError):
    """Finite-difference oracle could not produce a trustworthy estimate."""


class GeneratingFunctionError(RuntimeError):
    """The regularised determinant form hit a (near-)singular matrix."""


@dataclass(frozen=True)
class ArmMoments:
    """First and second integrated-intensity moments of a bipartition.

    ``second_s``, ``second_i`` and ``cross_sq`` are the raw moments
    <W_s^2>, <W_i^2> and <W_s W_i>; the central quantities must satisfy
    var = second - mean^2.
    """

    w_s: float
    w_i: float
    var_s: float
    var_i: float
    cov_si: float
    second_s: float
    second_i: float
    cross_sq: float

    def __post_init__(self) -> None:
        if self.w_s < 0 or self.w_i < 0:
            raise ValueError("arm intensity means must be nonnegative")
        scale = max(1.0, abs(self.second_s), abs(self.second_i))
        if abs(self.second_s - self.w_s**2 - self.var_s) > _CONSISTENCY_TOL * scale:
            raise ValueError("second_s inconsistent with w_s and var_s")
        if abs(self.second_i - self.w_i**2 - self.var_i) > _CONSISTENCY_TOL * scale:
            raise ValueError("second_i inconsistent with w_i and var_i")

    @classmethod
    def from_central(cls, w_s: float, w_i: float, var_s: float, var_i: float,
                     cov_si: float) -> "ArmMoments":
        return cls(
            w_s=float(w_s), w_i=float(w_i),
            var_s=float(var_s), var_i=float(var_i), cov_si=float(cov_si),
            second_s=float(var_s + w_s * w_s),
            second_i=float(var_i + w_i * w_i),
            cross_sq=float(cov_si + w_s * w_i),
        )


def mode_mean(state: GaussianCombState, j: int) -> float:
    """<W_j> = b_j + |xi_j|^2."""
    return float(state.cov.b[j] + np.abs(state.xi[j]) ** 2)


def mode_variance(state: GaussianCombState, j: int) -> float:
    """<dW_j^2>; reduces to b (b + 2 |xi|^2) when c = 0."""
    b = state.cov.b[j]
    c = state.cov.c[j]
    x = state.xi[j]
    return float(
        b * b + np.abs(c) ** 2 + 2.0 * b * np.abs(x) ** 2 + 2.0 * np.real(c * np.conj(x) ** 2)
    )


def mode_covariance(state: GaussianCombState, j: int, k: int) -> float:
    """<dW_j dW_k> for two distinct modes."""
    if j == k:
        raise ValueError("mode_covariance needs two distinct modes; use mode_variance")
    d = state.cov.d[j, k]
    db = state.cov.d_bar[j, k]
    xj, xk = state.xi[j], state.xi[k]
    return float(
        np.abs(d) ** 2 + np.abs(db) ** 2
        + 2.0 * np.real(d * np.conj(xj) * np.conj(xk))
        + 2.0 * np.real(db * xj * np.conj(xk))
    )


def _pair_covariances(state: GaussianCombState, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Matrix of <dW_j dW_k> over rows x cols (entries with j == k are garbage)."""
    d = state.cov.d[np.ix_(rows, cols)]
    db = state.cov.d_bar[np.ix_(rows, cols)]
    xr = state.xi[rows][:, None]
    xc = state.xi[cols][None, :]
    return (
        np.abs(d) ** 2 + np.abs(db) ** 2
        + 2.0 * np.real(d * np.conj(xr) * np.conj(xc))
        + 2.0 * np.real(db * xr * np.conj(xc))
    )


def arm_moments(state: GaussianCombState, bipartition: Bipartition) -> ArmMoments:
    """Aggregate intensity moments of the two arms of a bipartition.

    Arm variances include every intra-arm pair covariance; the cross moment
    sums the covariances across the arms.
    """
    bipartition.check_against(state.n_modes)
    idx_s = np.asarray(bipartition.signal_modes)
    idx_i = np.asarray(bipartition.idler_modes)

    def _arm(idx: np.ndarray) -> tuple[float, float]:
        b = state.cov.b[idx]
        c = state.cov.c[idx]
        x = state.xi[idx]
        var = np.sum(
            b * b + np.abs(c) ** 2 + 2.0 * b * np.abs(x) ** 2 + 2.0 * np.real(c * np.conj(x) ** 2)
        )
        if idx.size > 1:
            pair = _pair_covariances(state, idx, idx)
            np.fill_diagonal(pair, 0.0)
            var += pair.sum()
        mean = np.sum(b + np.abs(x) ** 2)
        return float(mean), float(var)

    w_s, var_s = _arm(idx_s)
    w_i, var_i = _arm(idx_i)
    cov_si = float(_pair_covariances(state, idx_s, idx_i).sum())
    return ArmMoments.from_central(w_s, w_i, var_s, var_i, cov_si)


def apply_efficiency(moments: ArmMoments, eta_s: float, eta_i: float) -> ArmMoments:
    """Scale moments by detector efficiencies: each power of W picks up one eta."""
    if not (0.0 <= eta_s <= 1.0 and 0.0 <= eta_i <= 1.0):
        raise ValueError("efficiencies must lie in [0, 1]")
    return ArmMoments.from_central(
        eta_s * moments.w_s,
        eta_i * moments.w_i,
        eta_s**2 * moments.var_s,
        eta_i**2 * moments.var_i,
        eta_s * eta_i * moments.cov_si,
    )


# ---------------------------------------------------------------------------
# Generating function and its finite-difference oracle.


def _interleaved_xi(xi: np.ndarray) -> np.ndarray:
    big = np.empty(2 * xi.size, dtype=complex)
    big[0::2] = xi
    big[1::2] = np.conj(xi)
    return big


def _gf_value(a_mat: np.ndarray, big_xi: np.ndarray, lam: np.ndarray) -> float:
    """exp(-Xi+ L (I + A L)^-1 Xi / 2) / sqrt(det(I + A L)) with L = diag(lam, lam)."""
    lam_rep = np.repeat(lam, 2)
    t = np.eye(a_mat.shape[0]) + a_mat * lam_rep[None, :]
    det = np.linalg.det(t)
    if not np.isfinite(det) or det.real <= 0.0 or abs(det.imag) > 1e-8 * abs(det):
        cond = float(np.linalg.cond(t))
        raise GeneratingFunctionError(
            f"I + A*Lambda is singular or indefinite (det={det:.3g}, cond~{cond:.3g})"
        )
    try:
        z = np.linalg.solve(t, big_xi)
    except np.linalg.LinAlgError as exc:
        raise GeneratingFunctionError(f"I + A*Lambda is singular: {exc}") from exc
    quad = np.vdot(big_xi, lam_rep * z)
    return float(np.exp(-0.5 * quad.real) / np.sqrt(det.real))


def generating_function(state: GaussianCombState, lam) -> float:
    """Intensity-moment generating function at nonnegative lambda.

    Normalised so that G(0) = 1; raw moments are alternating-sign partial
    derivatives at lambda = 0.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.shape != (state.n_modes,):
        raise ValueError(f"lambda must have shape ({state.n_modes},), got {lam.shape}")
    if np.any(lam < 0):
        raise ValueError("lambda entries must be nonnegative")
    return _gf_value(assemble_full_matrix(state.cov), _interleaved_xi(state.xi), lam)


_STENCILS: dict[int, tuple[tuple[int, float], ...]] = {
    0: ((0, 1.0),),
    1: ((-1, -0.5), (1, 0.5)),
    2: ((-1, 1.0), (0, -2.0), (1, 1.0)),
    3: ((-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)),
    4: ((-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)),
}


def _fd_estimate(a_mat, big_xi, orders: np.ndarray, h: float) -> float:
    active = np.nonzero(orders)[0]
    total = int(orders.sum())
    value = 0.0
    stencils = [_STENCILS[int(orders[j])] for j in active]
    for combo in itertools.product(*stencils):
        lam = np.zeros(orders.size)
        coeff = 1.0
        for j, (offset, weight) in zip(active, combo):
            lam[j] = offset * h
            coeff *= weight
        value += coeff * _gf_value(a_mat, big_xi, lam)
    value /= h ** total
    return ((-1.0) ** total) * value


def fd_moment_oracle(state: GaussianCombState, orders, h: float | None = None) -> float:
    """Raw moment <prod_j W_j^k_j> by central finite differences of G.

    Central stencils of second-order accuracy are Richardson extrapolated
    and a cancellation detector compares the extrapolants of adjacent step
    pairs.  An explicit ``h`` is refined as (h, h/2, h/4); otherwise a ladder
    spanning two decades below a spectral-norm-aware coarsest step is swept
    and the estimate with the smallest disagreement wins.  Raises
    ``OracleError`` when even the best window disagrees with itself, the
    signature of a step small enough to be dominated by roundoff.
    """
    orders = np.atleast_1d(np.asarray(orders, dtype=int))
    if orders.shape != (state.n_modes,):
        raise ValueError(f"orders must have shape ({state.n_modes},), got {orders.shape}")
    if np.any(orders < 0):
        raise ValueError("orders must be nonnegative")
    total = int(orders.sum())
    if total > 4:
        raise ValueError("the oracle only supports total order <= 4")
    if total == 0:
        return 1.0
    if h is not None and h <= 0:
        raise ValueError("h must be positive")

    a_mat = assemble_full_matrix(state.cov)
    big_xi = _interleaved_xi(state.xi)
    if h is not None:
        steps = [h, h / 2.0, h / 4.0]
    else:
        # stencil offsets reach 2h, and I + A*Lambda must stay definite at
        # negative lambda, so the coarsest step backs off the spectral norm
        norm = float(np.linalg.norm(a_mat, 2))
        h0 = min(0.32, 0.2 / max(norm, 0.625))
        steps = [h0 / 2**k for k in range(8)]
    estimates = [_fd_estimate(a_mat, big_xi, orders, s) for s in steps]
    richardson = [
        (4.0 * estimates[k + 1] - estimates[k]) / 3.0 for k in range(len(estimates) - 1)
    ]
    # candidate windows are adjacent extrapolant pairs whose finest step is
    # not yet dominated by roundoff; agreement of pure noise must not win
    l1 = float(np.prod([sum(abs(w) for _, w in _STENCILS[int(k)]) for k in orders if k > 0]))
    best: tuple[float, float] | None = None
    for k in range(len(richardson) - 1):
        value = richardson[k + 1]
        spread = abs(richardson[k + 1] - richardson[k])
        floor = np.finfo(float).eps * l1 / steps[k + 2] ** total
        if floor > max(1e-6 * abs(value), 1e-9):
            continue
        if best is None or spread < best[0]:
            best = (spread, value)
    if best is None:
        raise OracleError(
            f"all steps in {steps[0]:.3g}..{steps[-1]:.3g} are roundoff "
            "dominated; increase the step"
        )
    spread, value = best
    if spread > max(1e-5 * max(1.0, abs(value)), 1e-9):
        raise OracleError(
            f"Richardson windows disagree by {spread:.3g} at value {value:.6g}; "
            "the moment is too ill-conditioned for the oracle"
        )
    return value
