"""Gaussian comb states: normally ordered covariance blocks plus coherent amplitudes.

The data model stores the second moments of the fluctuation operators of an
N-mode field in normal order (all daggers to the left),

    b[k]      = <: da+_k da_k :>    mean photon number of fluctuations, real
    c[k]      = <: da_k  da_k :>    single-mode anomalous moment
    d[j,l]    = <: da_j  da_l :>    pair anomalous moment, symmetric
    d_bar[j,l]= <: da+_j da_l :>    pair occupation coherence, conjugate symmetric

together with the coherent amplitudes xi[k] of the (possibly seeded) field.
All intensity moments and nonclassicality identifiers are closed-form
functions of these blocks, so they are the single source of truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

HERMITICITY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
#: Most negative eigenvalue the full covariance matrix of a Gaussian state can
#: reach; used as a validation heuristic, not enforced at construction.
GAUSSIAN_EIGENVALUE_FLOOR = -0.5

STATE_SCHEMA = "qofc.state/1"


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CovarianceBlocks:
    """Normally ordered covariance data of an N-mode Gaussian state.

    Only the strict upper triangles of ``d`` and ``d_bar`` are read;
    construction mirrors them into the lower triangle (``d`` symmetric,
    ``d_bar`` conjugate symmetric) and zeroes both diagonals.  The diagonal
    information lives in ``c`` and ``b`` respectively.
    """

    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    d_bar: np.ndarray

    def __post_init__(self) -> None:
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=complex))
        d = np.asarray(self.d, dtype=complex)
        d_bar = np.asarray(self.d_bar, dtype=complex)
        n = b.shape[0]
        if b.ndim != 1:
            raise ValueError("b must be a one dimensional real array")
        if c.shape != (n,):
            raise ValueError(f"c must have shape ({n},), got {c.shape}")
        if d.shape != (n, n):
            raise ValueError(f"d must have shape ({n}, {n}), got {d.shape}")
        if d_bar.shape != (n, n):
            raise ValueError(f"d_bar must have shape ({n}, {n}), got {d_bar.shape}")
        if np.any(b < 0):
            raise ValueError("b entries must be nonnegative")
        up_d = np.triu(d, 1)
        up_db = np.triu(d_bar, 1)
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "d", _frozen(up_d + up_d.T))
        object.__setattr__(self, "d_bar", _frozen(up_db + up_db.conj().T))

    @property
    def n_modes(self) -> int:
        return self.b.shape[0]

    @classmethod
    def vacuum(cls, n_modes: int) -> "CovarianceBlocks":
        if n_modes < 1:
            raise ValueError("n_modes must be positive")
        z = np.zeros((n_modes, n_modes), dtype=complex)
        return cls(np.zeros(n_modes), np.zeros(n_modes, dtype=complex), z, z.copy())


@dataclass(frozen=True)
class GaussianCombState:
    """Covariance blocks plus coherent amplitudes and a provenance record.

    Instances are immutable; every operation returns a new state, so states
    can be shared freely between concurrent workers.
    """

    cov: CovarianceBlocks
    xi: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        xi = np.atleast_1d(np.asarray(self.xi, dtype=complex))
        if xi.shape != (self.cov.n_modes,):
            raise ValueError(
                f"xi must have shape ({self.cov.n_modes},), got {xi.shape}"
            )
        object.__setattr__(self, "xi", _frozen(xi))

    @property
    def n_modes(self) -> int:
        return self.cov.n_modes


@dataclass(frozen=True)
class Bipartition:
    """Two disjoint, non-empty groups of mode indices (signal arm, idler arm)."""

    signal_modes: tuple[int, ...]
    idler_modes: tuple[int, ...]

    def __post_init__(self) -> None:
        s = tuple(int(j) for j in self.signal_modes)
        i = tuple(int(j) for j in self.idler_modes)
        if not s or not i:
            raise ValueError("both arms of a bipartition must be non-empty")
        if len(set(s)) != len(s) or len(set(i)) != len(i):
            raise ValueError("bipartition arms must not repeat indices")
        if set(s) & set(i):
            raise ValueError("bipartition arms must be disjoint")
        if min(s + i) < 0:
            raise ValueError("mode indices must be nonnegative")
        object.__setattr__(self, "signal_modes", s)
        object.__setattr__(self, "idler_modes", i)

    def check_against(self, n_modes: int) -> None:
        top = max(self.signal_modes + self.idler_modes)
        if top >= n_modes:
            raise ValueError(f"bipartition index {top} out of range for {n_modes} modes")


@dataclass(frozen=True)
class ValidationReport:
    """Diagnostics of a state's covariance matrix."""

    n_modes: int
    hermiticity_residual: float
    min_eigenvalue: float
    physical: bool


def vacuum_state(n_modes: int) -> GaussianCombState:
    """N-mode vacuum: all blocks and amplitudes zero."""
    return GaussianCombState(
        CovarianceBlocks.vacuum(n_modes),
        np.zeros(n_modes, dtype=complex),
        meta={"topology": "vacuum"},
    )


def assemble_full_matrix(cov: CovarianceBlocks) -> np.ndarray:
    """Assemble the 2N x 2N covariance matrix in the (a_1, a+_1, ..., a_N, a+_N) ordering.

    Diagonal 2x2 blocks are [[b, c], [c*, b]]; the (j, l) off-diagonal block
    is [[d_bar*, d], [d*, d_bar]] with its (l, j) partner the conjugate
    transpose, which makes the result Hermitian by construction.
    """
    n = cov.n_modes
    a = np.zeros((2 * n, 2 * n), dtype=complex)
    a[0::2, 0::2] = np.conj(cov.d_bar) + np.diag(cov.b)
    a[1::2, 1::2] = cov.d_bar + np.diag(cov.b)
    a[0::2, 1::2] = cov.d + np.diag(cov.c)
    a[1::2, 0::2] = np.conj(cov.d) + np.diag(np.conj(cov.c))
    return a


def add_thermal_noise(state: GaussianCombState, n_bar) -> GaussianCombState:
    """Superpose independent thermal noise with mean photon numbers ``n_bar``.

    Only the occupations ``b`` change (b_k -> b_k + n_bar_k); the anomalous
    moments, pair coherences and coherent amplitudes are untouched.
    """
    n_bar = np.atleast_1d(np.asarray(n_bar, dtype=float))
    if n_bar.shape != (state.n_modes,):
        raise ValueError(
            f"n_bar must have shape ({state.n_modes},), got {n_bar.shape}"
        )
    if np.any(n_bar < 0):
        raise ValueError("thermal noise photon numbers must be nonnegative")
    cov = CovarianceBlocks(state.cov.b + n_bar, state.cov.c, state.cov.d, state.cov.d_bar)
    return replace(state, cov=cov)


def restrict(state: GaussianCombState, modes: Sequence[int]) -> GaussianCombState:
    """Reduced state over a subset of modes.

    Gaussian marginalisation only drops rows and columns; the retained blocks
    are untouched.
    """
    idx = [int(j) for j in modes]
    if len(set(idx)) != len(idx):
        raise ValueError("mode indices must be distinct")
    if not idx:
        raise ValueError("at least one mode must be kept")
    if min(idx) < 0 or max(idx) >= state.n_modes:
        raise ValueError(f"mode index out of range for {state.n_modes} modes")
    sel = np.asarray(idx)
    cov = CovarianceBlocks(
        state.cov.b[sel],
        state.cov.c[sel],
        state.cov.d[np.ix_(sel, sel)],
        state.cov.d_bar[np.ix_(sel, sel)],
    )
    meta = dict(state.meta)
    meta["restricted_to"] = idx
    return GaussianCombState(cov, state.xi[sel], meta)


def validate(state: GaussianCombState) -> ValidationReport:
    """Report Hermiticity residual, minimum eigenvalue and the physicality verdict.

    A Gaussian state cannot push any eigenvalue of the assembled matrix below
    -0.5; states violating that floor (within ``PHYSICALITY_TOL``) are flagged
    as unphysical.
    """
    a = assemble_full_matrix(state.cov)
    residual = float(np.abs(a - a.conj().T).max())
    min_eig = float(np.linalg.eigvalsh(a)[0])
    physical = min_eig >= GAUSSIAN_EIGENVALUE_FLOOR - PHYSICALITY_TOL
    return ValidationReport(state.n_modes, residual, min_eig, physical)


# ---------------------------------------------------------------------------
# JSON serialisation.  Complex numbers are stored as [re, im] pairs.


def _pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _cvec(v: np.ndarray) -> list[list[float]]:
    return [_pair(z) for z in v]


def _cmat(m: np.ndarray) -> list[list[list[float]]]:
    return [[_pair(z) for z in row] for row in m]


def _unpair(p) -> complex:
    return complex(p[0], p[1])


def state_to_json(state: GaussianCombState, indent: int | None = None) -> str:
    """Serialise a state to JSON (schema ``qofc.state/1``)."""
    doc = {
        "schema": STATE_SCHEMA,
        "n_modes": state.n_modes,
        "b": [float(x) for x in state.cov.b],
        "c": _cvec(state.cov.c),
        "d": _cmat(state.cov.d),
        "d_bar": _cmat(state.cov.d_bar),
        "xi": _cvec(state.xi),
        "meta": state.meta,
    }
    return json.dumps(doc, indent=indent)


def state_from_json(text: str) -> GaussianCombState:
    doc = json.loads(text)
    schema = doc.get("schema")
    if schema != STATE_SCHEMA:
        raise ValueError(f"unsupported state schema {schema!r}, expected {STATE_SCHEMA!r}")
    n = int(doc["n_modes"])
    b = np.asarray(doc["b"], dtype=float)
    c = np.asarray([_unpair(p) for p in doc["c"]], dtype=complex)
    d = np.asarray([[_unpair(p) for p in row] for row in doc["d"]], dtype=complex)
    d_bar = np.asarray([[_unpair(p) for p in row] for row in doc["d_bar"]], dtype=complex)
    xi = np.asarray([_unpair(p) for p in doc["xi"]], dtype=complex)
    if b.shape != (n,):
        raise ValueError("n_modes does not match array lengths")
    return GaussianCombState(CovarianceBlocks(b, c, d, d_bar), xi, dict(doc.get("meta", {})))
