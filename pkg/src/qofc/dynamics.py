"""Comb constructors and dynamics.

Two coupling topologies are supported:

* ``NonOverlappingTopology``: independent signal/idler pairs, each driven with
  its own coupling rate.  The comb factorises into two-mode twin beams.
* ``FullyOverlappingTopology``: every mode couples to every other mode with
  the same rate (hollow coupling matrix), so each mode is pair-correlated
  with all the others.

The equations of motion for the interleaved operator vector
A = (a_1, a+_1, ..., a_N, a+_N) are dA/dt = i M A with a real antisymmetric
M, so i M is Hermitian and the propagator S = exp(i M t) is computed by a
Hermitian eigendecomposition.  Analytic constructors are provided for both
topologies; the test suite pins them against an independent series-summation
matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import CovarianceBlocks, GaussianCombState

#: Largest hyperbolic argument allowed anywhere in a construction.  Beyond
#: this, cosh/sinh results stop being trustworthy in double precision, so
#: constructors fail loudly instead of returning near-overflow numbers.
DEFAULT_GT_CAP = 25.0


@dataclass(frozen=True)
class NonOverlappingTopology:
    """Perfect pairing of modes; each pair (signal, idler, coupling rate)."""

    pairs: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        pairs = tuple((int(s), int(i), float(g)) for s, i, g in self.pairs)
        if not pairs:
            raise ValueError("at least one pair is required")
        indices = [j for s, i, _ in pairs for j in (s, i)]
        if len(set(indices)) != len(indices):
            raise ValueError("pair indices must not repeat")
        if sorted(indices) != list(range(len(indices))):
            raise ValueError("pairs must form a perfect pairing of modes 0..2M-1")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n_modes(self) -> int:
        return 2 * len(self.pairs)


@dataclass(frozen=True)
class FullyOverlappingTopology:
    """All-to-all coupling of ``n_modes`` modes with a single rate."""

    n_modes: int
    coupling: float = 1.0

    def __post_init__(self) -> None:
        if self.n_modes < 2:
            raise ValueError("a fully overlapping comb needs at least 2 modes")
        if self.coupling < 0:
            raise ValueError("coupling must be nonnegative")


CombTopology = NonOverlappingTopology | FullyOverlappingTopology


def coupling_time_for_gain(b_p) -> np.ndarray | float:
    """Invert b_p = sinh(gt)^2 for a single pair: gt = asinh(sqrt(b_p))."""
    return np.arcsinh(np.sqrt(b_p))


def gain_for_coupling_time(gt) -> np.ndarray | float:
    """Pair gain b_p = sinh(gt)^2."""
    return np.sinh(gt) ** 2


def evolution_matrix(topology: CombTopology) -> np.ndarray:
    """Generator M of dA/dt = i M A in the interleaved operator ordering.

    Mode j couples to the conjugate slot of mode k with the pair's rate:
    M[2j, 2k+1] = g and M[2j+1, 2k] = -g.
    """
    if isinstance(topology, NonOverlappingTopology):
        n = topology.n_modes
        m = np.zeros((2 * n, 2 * n), dtype=complex)
        for s, i, g in topology.pairs:
            m[2 * s, 2 * i + 1] = g
            m[2 * i, 2 * s + 1] = g
            m[2 * s + 1, 2 * i] = -g
            m[2 * i + 1, 2 * s] = -g
        return m
    n = topology.n_modes
    g = topology.coupling
    hollow = np.ones((n, n)) - np.eye(n)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    m[0::2, 1::2] = g * hollow
    m[1::2, 0::2] = -g * hollow
    return m


def propagator(topology: CombTopology, t: float, gt_cap: float = DEFAULT_GT_CAP) -> np.ndarray:
    """Propagator S = exp(i M t), computed by Hermitian eigendecomposition.

    i M is Hermitian for every supported topology (M is real antisymmetric),
    so S = Q exp(w t) Q+ with real w.  Satisfies S(t1 + t2) = S(t1) S(t2)
    exactly up to roundoff because the eigenbasis is shared.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    m = evolution_matrix(topology)
    h = 1j * m
    if np.abs(h - h.conj().T).max() > 1e-12:
        raise ValueError("evolution matrix is not antisymmetric; cannot exponentiate stably")
    w, q = np.linalg.eigh(h)
    if np.abs(w).max() * t > gt_cap:
        raise ValueError(
            f"hyperbolic argument {np.abs(w).max() * t:.3g} exceeds the cap {gt_cap}; "
            "reduce t or raise gt_cap explicitly"
        )
    return (q * np.exp(w * t)) @ q.conj().T


def state_from_propagator(s_mat: np.ndarray, meta: dict | None = None) -> GaussianCombState:
    """Propagate the vacuum through S and read the covariance blocks off.

    With a(t) = U a(0) + V a+(0) (U, V the even-row sub-blocks of S), vacuum
    input gives b = sum_j |V|^2, c = diag(U V^T), d = U V^T off-diagonal and
    d_bar = conj(V) V^T off-diagonal.
    """
    if s_mat.ndim != 2 or s_mat.shape[0] != s_mat.shape[1] or s_mat.shape[0] % 2:
        raise ValueError("propagator must be a 2N x 2N matrix")
    u = s_mat[0::2, 0::2]
    v = s_mat[0::2, 1::2]
    b = np.einsum("kj,kj->k", v, v.conj()).real
    uvt = u @ v.T
    c = np.diagonal(uvt).copy()
    d_bar = v.conj() @ v.T
    n = u.shape[0]
    cov = CovarianceBlocks(np.maximum(b, 0.0), c, uvt, d_bar)
    return GaussianCombState(cov, np.zeros(n, dtype=complex), meta or {"topology": "propagated"})


def twin_beam_state(b_p: float, gt_cap: float = DEFAULT_GT_CAP) -> GaussianCombState:
    """Two-mode twin beam with pair gain ``b_p``.

    b = (b_p, b_p), d_01 = i sqrt(b_p (b_p + 1)), everything else zero.
    """
    if b_p < 0:
        raise ValueError("b_p must be nonnegative")
    if float(np.arcsinh(np.sqrt(b_p))) > gt_cap:
        raise ValueError(f"gain {b_p:.3g} exceeds the gt cap {gt_cap}")
    d = np.zeros((2, 2), dtype=complex)
    d[0, 1] = 1j * np.sqrt(b_p * (b_p + 1.0))
    cov = CovarianceBlocks(np.full(2, float(b_p)), np.zeros(2, dtype=complex), d, np.zeros((2, 2), complex))
    return GaussianCombState(cov, np.zeros(2, complex), {"topology": "pairs", "gains": [float(b_p)]})


def comb_nonoverlapping(gains, gt_cap: float = DEFAULT_GT_CAP) -> GaussianCombState:
    """Block composition of independent twin beams, mode order (s1, i1, s2, i2, ...).

    ``gains`` are the per-pair mean pair photon numbers b_p; cross blocks
    between different pairs are zero.
    """
    gains = np.atleast_1d(np.asarray(gains, dtype=float))
    if gains.size == 0:
        raise ValueError("at least one gain is required")
    if np.any(gains < 0):
        raise ValueError("gains must be nonnegative")
    if float(np.arcsinh(np.sqrt(gains.max()))) > gt_cap:
        raise ValueError(f"largest gain {gains.max():.3g} exceeds the gt cap {gt_cap}")
    n = 2 * gains.size
    b = np.repeat(gains, 2)
    d = np.zeros((n, n), dtype=complex)
    d[0::2, 1::2][np.diag_indices(gains.size)] = 1j * np.sqrt(gains * (gains + 1.0))
    cov = CovarianceBlocks(b, np.zeros(n, complex), d, np.zeros((n, n), complex))
    return GaussianCombState(
        cov, np.zeros(n, complex), {"topology": "pairs", "gains": [float(g) for g in gains]}
    )


def overlap_covariance_elements(n_modes: int, gt):
    """Closed-form covariance elements of the uniform all-to-all comb.

    Returns (b, c, d, d_bar); accepts scalar or array ``gt``.  Derived from
    the two-eigenspace split of the hollow coupling matrix (collective mode
    at rate (N-1)g, the N-1 remaining modes at rate -g) and cross-checked
    against the dense matrix exponential in the test suite.
    """
    if n_modes < 2:
        raise ValueError("a fully overlapping comb needs at least 2 modes")
    gt = np.asarray(gt, dtype=float)
    nn = n_modes - 1
    s_fast, s_slow = np.sinh(nn * gt), np.sinh(gt)
    c_fast, c_slow = np.cosh(nn * gt), np.cosh(gt)
    b = (s_fast**2 + nn * s_slow**2) / n_modes
    c = 1j * (c_fast * s_fast - nn * c_slow * s_slow) / n_modes
    d = 1j * (c_fast * s_fast + c_slow * s_slow) / n_modes
    d_bar = (s_fast**2 - s_slow**2) / n_modes
    return b, c, d, d_bar


def overlap_seed_response(n_modes: int, gt):
    """Coefficients (u_diag, u_off, v_diag, v_off) of the propagator in mode space.

    A coherent seed z in mode m arrives in mode j as
    xi_j(t) = u z + v conj(z) with (u, v) = (u_diag, v_diag) for j = m and
    (u_off, v_off) otherwise.
    """
    if n_modes < 2:
        raise ValueError("a fully overlapping comb needs at least 2 modes")
    gt = np.asarray(gt, dtype=float)
    nn = n_modes - 1
    u_diag = (np.cosh(nn * gt) + nn * np.cosh(gt)) / n_modes
    u_off = (np.cosh(nn * gt) - np.cosh(gt)) / n_modes
    v_diag = 1j * (np.sinh(nn * gt) - nn * np.sinh(gt)) / n_modes
    v_off = 1j * (np.sinh(nn * gt) + np.sinh(gt)) / n_modes
    return u_diag, u_off, v_diag, v_off


def overlap_mean_photon(n_modes: int, gt):
    """Per-mode occupation b of the all-to-all comb; monotone in gt."""
    return overlap_covariance_elements(n_modes, gt)[0]


def overlap_gt_for_gain(n_modes: int, b_p):
    """Invert the monotone map gt -> b(gt; N) by bisection (vectorised)."""
    target = np.asarray(b_p, dtype=float)
    if np.any(target < 0):
        raise ValueError("target occupation must be nonnegative")
    hi = np.full(target.shape, 1.0 / (n_modes - 1))
    for _ in range(200):
        need = overlap_mean_photon(n_modes, hi) < target
        if not need.any():
            break
        hi = np.where(need, 2.0 * hi, hi)
    else:
        raise ValueError("target occupation too large to bracket")
    lo = np.zeros_like(hi)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        low = overlap_mean_photon(n_modes, mid) < target
        lo = np.where(low, mid, lo)
        hi = np.where(low, hi, mid)
    out = np.where(target == 0.0, 0.0, 0.5 * (lo + hi))
    return out if out.ndim else float(out)


def comb_overlapping(n_modes: int, gt: float, gt_cap: float = DEFAULT_GT_CAP) -> GaussianCombState:
    """Uniform all-to-all comb after interaction gt, built from closed forms.

    All modes share (b, c); all pairs share (d, d_bar).  Equals the vacuum
    propagated through ``propagator`` and reduces to ``twin_beam_state`` at
    N = 2.
    """
    if n_modes < 2:
        raise ValueError("a fully overlapping comb needs at least 2 modes")
    if gt < 0:
        raise ValueError("gt must be nonnegative")
    if (n_modes - 1) * gt > gt_cap:
        raise ValueError(
            f"hyperbolic argument {(n_modes - 1) * gt:.3g} exceeds the cap {gt_cap}"
        )
    b, c, d, d_bar = overlap_covariance_elements(n_modes, gt)
    off = np.ones((n_modes, n_modes)) - np.eye(n_modes)
    cov = CovarianceBlocks(
        np.full(n_modes, float(b)),
        np.full(n_modes, complex(c)),
        complex(d) * off,
        complex(d_bar) * off,
    )
    return GaussianCombState(
        cov,
        np.zeros(n_modes, complex),
        {"topology": "overlap", "n_modes": int(n_modes), "gt": float(gt)},
    )


def propagate_seed(topology: CombTopology, t: float, xi0, gt_cap: float = DEFAULT_GT_CAP) -> np.ndarray:
    """Propagate coherent seed amplitudes through the comb: Xi(t) = S Xi(0).

    ``xi0`` holds the mode amplitudes at t = 0.  The interleaved
    (xi, conj(xi)) vector is pushed through the numerically computed S and
    the conjugate-pair consistency of the result is enforced before the mode
    amplitudes are returned.
    """
    n = topology.n_modes
    xi0 = np.atleast_1d(np.asarray(xi0, dtype=complex))
    if xi0.shape != (n,):
        raise ValueError(f"xi0 must have shape ({n},), got {xi0.shape}")
    s_mat = propagator(topology, t, gt_cap=gt_cap)
    big = np.empty(2 * n, dtype=complex)
    big[0::2] = xi0
    big[1::2] = np.conj(xi0)
    out = s_mat @ big
    scale = max(1.0, float(np.abs(out).max()))
    mismatch = float(np.abs(out[1::2] - np.conj(out[0::2])).max())
    if mismatch > 1e-12 * scale:
        raise RuntimeError(
            f"conjugate-pair consistency violated by {mismatch:.3g}; propagator is corrupt"
        )
    return out[0::2]
