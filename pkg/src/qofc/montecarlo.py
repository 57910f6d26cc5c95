"""Deterministic, seeded Monte Carlo experiments.

Each experiment draws its per-sample parameters from a counter-based RNG
stream (Philox): draw ``i`` always consumes counter block ``i`` of the master
seed's stream, so any partitioning of draws across chunks or worker threads
produces byte-identical results.  Experiments that trace curve families
(seed amplitude, arm size) share one parameter draw across the family, so a
record's index is ``draw * n_series + series_position``.

Experiments
-----------
fig1  scatter (tau, e2) for mixed two-mode twin beams
fig2  curves e2 vs tau for pure twin beams seeded in the signal mode
fig3  pair comb with a Gaussian gain spectrum, arm identifier vs quartic depth
fig4  as fig3 with a Gaussian seed spectrum in the signal arm
fig5  all-to-all comb, two-mode scatter, noiseless and noisy panels
fig6  all-to-all comb, two-mode curves with one out-of-pair mode seeded
fig7  all-to-all comb, bipartitions of 1, 3 and 6 modes per arm
fig8  as fig7 with 3 modes per arm and one out-of-bipartition mode seeded
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from numpy.random import Philox

from . import dynamics
from .depth import METHOD_EIGEN, METHOD_QUARTIC, tau_m
from .moments import ArmMoments

_TWO53 = 2.0**-53
_CHUNK_DRAWS = 32768

CSV_COLUMNS = ("experiment", "sample_index", "param_json", "e1", "e2", "tau", "tau_method")

EXPERIMENT_IDS = tuple(f"fig{k}" for k in range(1, 9))


@dataclass(frozen=True)
class SweepConfig:
    """Everything a run needs; ``samples`` counts parameter draws, and
    experiments with series emit ``samples * len(series)`` records."""

    experiment: str
    samples: int
    seed: int = 42
    threads: int = 1
    b_p_range: tuple[float, float] = (0.0, 1.0)
    noise_range: tuple[float, float] = (0.0, 1.0)
    sigma_range: tuple[float, float] = (0.0, 5.0)
    xi_list: tuple[float, ...] = ()
    m_list: tuple[int, ...] = (1, 3, 6)
    n_modes: int = 100
    m_pairs: int = 200
    m_arm: int = 3
    nu_span: tuple[float, float] = (-5.0, 5.0)
    spectrum_amplitude: float = 1e-3
    out: str | None = None

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        for name in ("b_p_range", "noise_range", "sigma_range", "nu_span"):
            lo, hi = getattr(self, name)
            if not (lo <= hi):
                raise ValueError(f"{name} must satisfy min <= max")
        if self.n_modes < 2 or self.m_pairs < 1 or self.m_arm < 1:
            raise ValueError("mode counts must be positive (n_modes >= 2)")
        if any(m < 1 for m in self.m_list):
            raise ValueError("m_list entries must be positive")


@dataclass(frozen=True)
class SampleRecord:
    experiment: str
    sample_index: int
    params: dict
    e1: float
    e2: float
    tau: float
    tau_method: str
    seed: int


_EXPERIMENT_DEFAULTS: dict[str, dict] = {
    "fig1": dict(samples=1_000_000),
    "fig2": dict(samples=4000, xi_list=(0.0, 10.0, 100.0)),
    "fig3": dict(samples=1500),
    "fig4": dict(samples=1000, xi_list=(0.0, 1.0, 10.0, 100.0)),
    "fig5": dict(samples=100_000),
    "fig6": dict(samples=1500, xi_list=(0.0, 10.0, 50.0, 100.0)),
    "fig7": dict(samples=1500, m_list=(1, 3, 6)),
    "fig8": dict(samples=1000, xi_list=(0.0, 10.0, 50.0, 100.0)),
}


def default_config(experiment: str, **overrides) -> SweepConfig:
    """Config with the experiment's baked-in defaults, then overrides."""
    if experiment not in _EXPERIMENT_DEFAULTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    kwargs = dict(_EXPERIMENT_DEFAULTS[experiment])
    kwargs.update(overrides)
    return SweepConfig(experiment=experiment, **kwargs)


def config_from_dict(doc: dict) -> SweepConfig:
    """Build a config from a parsed JSON/TOML document."""
    doc = dict(doc)
    experiment = doc.pop("experiment", None)
    if experiment is None:
        raise ValueError("config must name an experiment (fig1..fig8)")
    allowed = {
        "samples", "seed", "threads", "b_p_range", "noise_range", "sigma_range",
        "xi_list", "m_list", "n_modes", "m_pairs", "m_arm", "nu_span",
        "spectrum_amplitude", "out",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for key in ("b_p_range", "noise_range", "sigma_range", "nu_span"):
        if key in doc:
            doc[key] = tuple(float(x) for x in doc[key])
    if "xi_list" in doc:
        doc["xi_list"] = tuple(float(x) for x in doc["xi_list"])
    if "m_list" in doc:
        doc["m_list"] = tuple(int(x) for x in doc["m_list"])
    return default_config(experiment, **doc)


# ---------------------------------------------------------------------------
# Counter-based draws.


def _raw_blocks(seed: int, start_draw: int, n_draws: int, stride: int) -> np.ndarray:
    """Raw 64-bit words for draws [start_draw, start_draw + n_draws).

    Draw i owns Philox counter blocks [i * stride, (i + 1) * stride), which is
    what makes the stream independent of chunk and thread boundaries.
    """
    ph = Philox(key=seed, counter=[start_draw * stride, 0, 0, 0])
    return ph.random_raw(4 * stride * n_draws).reshape(n_draws, 4 * stride)


def _u_halfopen(raw: np.ndarray) -> np.ndarray:
    """Uniform doubles in [0, 1)."""
    return (raw >> np.uint64(11)).astype(np.float64) * _TWO53


def _u_leftopen(raw: np.ndarray) -> np.ndarray:
    """Uniform doubles in (0, 1]."""
    return ((raw >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * _TWO53


def _series_stack(per_series: list[np.ndarray]) -> np.ndarray:
    """Stack per-series draw vectors into one record vector (draw-major)."""
    return np.stack(per_series, axis=1).reshape(-1)


def _tau_quartic_from_moments(w_s, w_i, var_s, var_i, cov) -> np.ndarray:
    out = np.empty(np.shape(w_s)[0])
    for idx in range(out.shape[0]):
        m = ArmMoments.from_central(
            float(w_s[idx]), float(w_i[idx]), float(var_s[idx]), float(var_i[idx]),
            float(cov[idx]),
        )
        out[idx] = tau_m(m).tau
    return out


def _tau_pair_eig_batch(b0, b1, c, d, dbar) -> np.ndarray:
    """Depth of restricted two-mode states from batched 4x4 eigensolves."""
    n = np.shape(b0)[0]
    a = np.zeros((n, 4, 4), dtype=complex)
    a[:, 0, 0] = b0
    a[:, 0, 1] = c
    a[:, 0, 2] = np.conj(dbar)
    a[:, 0, 3] = d
    a[:, 1, 0] = np.conj(c)
    a[:, 1, 1] = b0
    a[:, 1, 2] = np.conj(d)
    a[:, 1, 3] = dbar
    a[:, 2, 0] = dbar
    a[:, 2, 1] = d
    a[:, 2, 2] = b1
    a[:, 2, 3] = c
    a[:, 3, 0] = np.conj(d)
    a[:, 3, 1] = np.conj(dbar)
    a[:, 3, 2] = np.conj(c)
    a[:, 3, 3] = b1
    w = np.linalg.eigvalsh(a)
    return np.maximum(0.0, -w[:, 0])


# ---------------------------------------------------------------------------
# Kernels.  Each returns (params, e1, e2, tau) with record-length arrays.


def _kernel_fig1(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    lo, hi = cfg.b_p_range
    b_p = lo + (hi - lo) * _u_leftopen(raw[:, 0])
    nlo, nhi = cfg.noise_range
    n_s = nlo + (nhi - nlo) * _u_halfopen(raw[:, 1])
    n_i = nlo + (nhi - nlo) * _u_halfopen(raw[:, 2])
    b_s = b_p + n_s
    b_i = b_p + n_i
    q = b_p * (b_p + 1.0)
    e2 = (b_s * b_i - q) * (b_s * b_i + q)
    e1 = 4.0 * (b_s * b_i) ** 2 - (q + b_s * b_i) ** 2
    # exact 4x4 spectrum: the matrix splits into two conjugate 2x2 blocks
    tau = np.maximum(0.0, np.sqrt(0.25 * (b_s - b_i) ** 2 + q) - 0.5 * (b_s + b_i))
    return {"b_p": b_p, "n_s": n_s, "n_i": n_i}, e1, e2, tau


def _kernel_fig2(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    lo, hi = cfg.b_p_range
    b_p = lo + (hi - lo) * _u_leftopen(raw[:, 0])
    gt = np.arcsinh(np.sqrt(b_p))
    c2 = np.cosh(gt) ** 2
    s2 = np.sinh(gt) ** 2
    q = b_p * (b_p + 1.0)
    tau_draw = np.maximum(0.0, np.sqrt(q) - b_p)
    xi = np.asarray(cfg.xi_list)
    per_e1, per_e2, per_tau, per_xi = [], [], [], []
    for x in xi:
        x2 = x * x
        var_s = b_p * (b_p + 2.0 * c2 * x2)
        var_i = b_p * (b_p + 2.0 * s2 * x2)
        cov = q * (1.0 + 2.0 * x2)
        w_s = b_p + c2 * x2
        w_i = b_p + s2 * x2
        per_e2.append(var_s * var_i - cov**2)
        per_e1.append((var_s + w_s**2) * (var_i + w_i**2) - (cov + w_s * w_i) ** 2)
        per_tau.append(tau_draw)
        per_xi.append(np.full(n, x))
    params = {"b_p": np.repeat(b_p, xi.size), "xi_s": _series_stack(per_xi)}
    return params, _series_stack(per_e1), _series_stack(per_e2), _series_stack(per_tau)


def _gain_envelope(cfg: SweepConfig, sigma: np.ndarray) -> np.ndarray:
    """exp(-nu^2 / 2 sigma^2) on the comb grid; zero spectrum at sigma = 0."""
    nu = np.linspace(cfg.nu_span[0], cfg.nu_span[1], cfg.m_pairs)
    with np.errstate(divide="ignore", invalid="ignore"):
        env = np.exp(-(nu[None, :] ** 2) / (2.0 * sigma[:, None] ** 2))
    return np.where(sigma[:, None] > 0.0, np.nan_to_num(env), 0.0)


def _kernel_fig3(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    slo, shi = cfg.sigma_range
    sigma = slo + (shi - slo) * _u_halfopen(raw[:, 0])
    b_n = cfg.spectrum_amplitude * _gain_envelope(cfg, sigma)
    w = b_n.sum(axis=1)
    var = (b_n**2).sum(axis=1)
    cov = (b_n * (b_n + 1.0)).sum(axis=1)
    e2 = var**2 - cov**2
    e1 = (var + w**2) ** 2 - (cov + w**2) ** 2
    tau = _tau_quartic_from_moments(w, w, var, var, cov)
    return {"sigma": sigma}, e1, e2, tau


def _kernel_fig4(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    slo, shi = cfg.sigma_range
    sigma = slo + (shi - slo) * _u_halfopen(raw[:, 0])
    env = _gain_envelope(cfg, sigma)
    b_n = cfg.spectrum_amplitude * env
    gt_n = np.arcsinh(np.sqrt(b_n))
    c2 = np.cosh(gt_n) ** 2
    s2 = np.sinh(gt_n) ** 2
    q = b_n * (b_n + 1.0)
    xi = np.asarray(cfg.xi_list)
    per_e1, per_e2, per_tau, per_xi = [], [], [], []
    for x in xi:
        r2 = (x * env) ** 2
        var_s = (b_n * (b_n + 2.0 * c2 * r2)).sum(axis=1)
        var_i = (b_n * (b_n + 2.0 * s2 * r2)).sum(axis=1)
        cov = (q * (1.0 + 2.0 * r2)).sum(axis=1)
        w_s = (b_n + c2 * r2).sum(axis=1)
        w_i = (b_n + s2 * r2).sum(axis=1)
        per_e2.append(var_s * var_i - cov**2)
        per_e1.append((var_s + w_s**2) * (var_i + w_i**2) - (cov + w_s * w_i) ** 2)
        per_tau.append(_tau_quartic_from_moments(w_s, w_i, var_s, var_i, cov))
        per_xi.append(np.full(n, x))
    params = {"sigma": np.repeat(sigma, xi.size), "xi_s": _series_stack(per_xi)}
    return params, _series_stack(per_e1), _series_stack(per_e2), _series_stack(per_tau)


def _interleave(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty(a.shape[0] * 2, dtype=np.result_type(a, b))
    out[0::2] = a
    out[1::2] = b
    return out


def _kernel_fig5(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    lo, hi = cfg.b_p_range
    target = lo + (hi - lo) * _u_halfopen(raw[:, 0])
    gt = dynamics.overlap_gt_for_gain(cfg.n_modes, target)
    b, c, d, dbar = dynamics.overlap_covariance_elements(cfg.n_modes, gt)
    nlo, nhi = cfg.noise_range
    n_0 = nlo + (nhi - nlo) * _u_halfopen(raw[:, 1])
    n_1 = nlo + (nhi - nlo) * _u_halfopen(raw[:, 2])
    # records alternate panels: even = noiseless "a", odd = noisy "b"
    b0 = _interleave(b, b + n_0)
    b1 = _interleave(b, b + n_1)
    c_r = _interleave(c, c)
    d_r = _interleave(d, d)
    db_r = _interleave(dbar, dbar)
    var0 = b0**2 + np.abs(c_r) ** 2
    var1 = b1**2 + np.abs(c_r) ** 2
    cov = np.abs(d_r) ** 2 + np.abs(db_r) ** 2
    e2 = var0 * var1 - cov**2
    e1 = (var0 + b0**2) * (var1 + b1**2) - (cov + b0 * b1) ** 2
    tau = _tau_pair_eig_batch(b0, b1, c_r, d_r, db_r)
    params = {
        "gt": np.repeat(gt, 2),
        "panel": np.tile(np.array(["a", "b"]), n),
        "n_0": _interleave(np.zeros(n), n_0),
        "n_1": _interleave(np.zeros(n), n_1),
    }
    return params, e1, e2, tau


def _kernel_fig6(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    lo, hi = cfg.b_p_range
    target = lo + (hi - lo) * _u_halfopen(raw[:, 0])
    gt = dynamics.overlap_gt_for_gain(cfg.n_modes, target)
    b, c, d, dbar = dynamics.overlap_covariance_elements(cfg.n_modes, gt)
    _, u_off, _, v_off = dynamics.overlap_seed_response(cfg.n_modes, gt)
    tau_draw = _tau_pair_eig_batch(b, b, c, d, dbar)
    xi = np.asarray(cfg.xi_list)
    per_e1, per_e2, per_tau, per_xi = [], [], [], []
    for x in xi:
        alpha = u_off * x + v_off * x  # real seed: conj(z) = z
        a2 = np.abs(alpha) ** 2
        var = b**2 + np.abs(c) ** 2 + 2.0 * b * a2 + 2.0 * np.real(c * np.conj(alpha) ** 2)
        cov = (
            np.abs(d) ** 2 + np.abs(dbar) ** 2
            + 2.0 * np.real(d * np.conj(alpha) ** 2)
            + 2.0 * np.real(dbar * alpha * np.conj(alpha))
        )
        w = b + a2
        per_e2.append(var**2 - cov**2)
        per_e1.append((var + w**2) ** 2 - (cov + w**2) ** 2)
        per_tau.append(tau_draw)
        per_xi.append(np.full(n, x))
    params = {"gt": np.repeat(gt, xi.size), "xi": _series_stack(per_xi)}
    return params, _series_stack(per_e1), _series_stack(per_e2), _series_stack(per_tau)


def _kernel_fig7(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    lo, hi = cfg.b_p_range
    target = lo + (hi - lo) * _u_halfopen(raw[:, 0])
    gt = dynamics.overlap_gt_for_gain(cfg.n_modes, target)
    b, c, d, dbar = dynamics.overlap_covariance_elements(cfg.n_modes, gt)
    var_mode = b**2 + np.abs(c) ** 2
    cov_pair = np.abs(d) ** 2 + np.abs(dbar) ** 2
    per_e1, per_e2, per_tau, per_m = [], [], [], []
    for m in cfg.m_list:
        var_arm = m * var_mode + m * (m - 1) * cov_pair
        cross = (m * m) * cov_pair
        w_arm = m * b
        per_e2.append(var_arm**2 - cross**2)
        per_e1.append((var_arm + w_arm**2) ** 2 - (cross + w_arm**2) ** 2)
        per_tau.append(_tau_quartic_from_moments(w_arm, w_arm, var_arm, var_arm, cross))
        per_m.append(np.full(n, m, dtype=float))
    params = {"gt": np.repeat(gt, len(cfg.m_list)), "m": _series_stack(per_m)}
    return params, _series_stack(per_e1), _series_stack(per_e2), _series_stack(per_tau)


def _kernel_fig8(cfg: SweepConfig, start: int, n: int):
    raw = _raw_blocks(cfg.seed, start, n, 1)
    lo, hi = cfg.b_p_range
    target = lo + (hi - lo) * _u_halfopen(raw[:, 0])
    gt = dynamics.overlap_gt_for_gain(cfg.n_modes, target)
    b, c, d, dbar = dynamics.overlap_covariance_elements(cfg.n_modes, gt)
    _, u_off, _, v_off = dynamics.overlap_seed_response(cfg.n_modes, gt)
    m = cfg.m_arm
    xi = np.asarray(cfg.xi_list)
    per_e1, per_e2, per_tau, per_xi = [], [], [], []
    for x in xi:
        alpha = u_off * x + v_off * x
        a2 = np.abs(alpha) ** 2
        var_mode = b**2 + np.abs(c) ** 2 + 2.0 * b * a2 + 2.0 * np.real(c * np.conj(alpha) ** 2)
        cov_pair = (
            np.abs(d) ** 2 + np.abs(dbar) ** 2
            + 2.0 * np.real(d * np.conj(alpha) ** 2)
            + 2.0 * np.real(dbar * alpha * np.conj(alpha))
        )
        var_arm = m * var_mode + m * (m - 1) * cov_pair
        cross = (m * m) * cov_pair
        w_arm = m * (b + a2)
        per_e2.append(var_arm**2 - cross**2)
        per_e1.append((var_arm + w_arm**2) ** 2 - (cross + w_arm**2) ** 2)
        per_tau.append(_tau_quartic_from_moments(w_arm, w_arm, var_arm, var_arm, cross))
        per_xi.append(np.full(n, x))
    params = {"gt": np.repeat(gt, xi.size), "xi": _series_stack(per_xi)}
    return params, _series_stack(per_e1), _series_stack(per_e2), _series_stack(per_tau)


@dataclass(frozen=True)
class _ExperimentSpec:
    kernel: Callable
    tau_method: str
    param_keys: tuple[str, ...]
    n_series: Callable[[SweepConfig], int]
    needs: tuple[str, ...] = ()


_EXPERIMENTS: dict[str, _ExperimentSpec] = {
    "fig1": _ExperimentSpec(_kernel_fig1, METHOD_EIGEN, ("b_p", "n_s", "n_i"), lambda c: 1),
    "fig2": _ExperimentSpec(_kernel_fig2, METHOD_EIGEN, ("b_p", "xi_s"),
                            lambda c: len(c.xi_list), needs=("xi_list",)),
    "fig3": _ExperimentSpec(_kernel_fig3, METHOD_QUARTIC, ("sigma",), lambda c: 1),
    "fig4": _ExperimentSpec(_kernel_fig4, METHOD_QUARTIC, ("sigma", "xi_s"),
                            lambda c: len(c.xi_list), needs=("xi_list",)),
    "fig5": _ExperimentSpec(_kernel_fig5, METHOD_EIGEN, ("gt", "panel", "n_0", "n_1"),
                            lambda c: 2),
    "fig6": _ExperimentSpec(_kernel_fig6, METHOD_EIGEN, ("gt", "xi"),
                            lambda c: len(c.xi_list), needs=("xi_list",)),
    "fig7": _ExperimentSpec(_kernel_fig7, METHOD_QUARTIC, ("gt", "m"),
                            lambda c: len(c.m_list), needs=("m_list",)),
    "fig8": _ExperimentSpec(_kernel_fig8, METHOD_QUARTIC, ("gt", "xi"),
                            lambda c: len(c.xi_list), needs=("xi_list",)),
}


def _spec_for(cfg: SweepConfig) -> _ExperimentSpec:
    spec = _EXPERIMENTS[cfg.experiment]
    for need in spec.needs:
        if not getattr(cfg, need):
            raise ValueError(f"{cfg.experiment} requires a non-empty {need}")
    return spec


def _guard_finite(cfg: SweepConfig, spec: _ExperimentSpec, arrays: dict) -> None:
    bad = ~(
        np.isfinite(arrays["e1"]) & np.isfinite(arrays["e2"]) & np.isfinite(arrays["tau"])
    )
    if bad.any():
        first = int(np.argmax(bad))
        detail = {
            key: arrays[key][first].item() if arrays[key].dtype.kind != "U" else str(arrays[key][first])
            for key in spec.param_keys
        }
        raise ValueError(
            f"{cfg.experiment}: {int(bad.sum())} non-finite sample(s); "
            f"first at record {first} with parameters {detail}"
        )


def experiment_arrays(cfg: SweepConfig) -> dict[str, np.ndarray]:
    """Run an experiment and return columnar arrays keyed by CSV field.

    The result is a dict with ``sample_index``, ``e1``, ``e2``, ``tau`` and
    one array per drawn parameter; identical for every thread count and
    chunking of the draw range.
    """
    spec = _spec_for(cfg)
    chunks = [
        (s, min(_CHUNK_DRAWS, cfg.samples - s)) for s in range(0, cfg.samples, _CHUNK_DRAWS)
    ]

    def work(bounds: tuple[int, int]):
        # overflowing parameters are allowed to propagate to the non-finite
        # guard below, which reports them loudly
        with np.errstate(over="ignore", invalid="ignore"):
            return spec.kernel(cfg, bounds[0], bounds[1])

    if cfg.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(ch) for ch in chunks]

    arrays: dict[str, np.ndarray] = {}
    for key in spec.param_keys:
        arrays[key] = np.concatenate([p[0][key] for p in parts])
    arrays["e1"] = np.concatenate([p[1] for p in parts])
    arrays["e2"] = np.concatenate([p[2] for p in parts])
    arrays["tau"] = np.concatenate([p[3] for p in parts])
    arrays["sample_index"] = np.arange(arrays["e2"].shape[0], dtype=np.int64)
    _guard_finite(cfg, spec, arrays)
    return arrays


def _param_value(arr: np.ndarray, i: int):
    if arr.dtype.kind == "U":
        return str(arr[i])
    if arr.dtype.kind in "iu":
        return int(arr[i])
    return float(arr[i])


def run_experiment(cfg: SweepConfig) -> Iterator[SampleRecord]:
    """Stream the experiment's records in index order."""
    spec = _spec_for(cfg)
    arrays = experiment_arrays(cfg)
    for i in range(arrays["e2"].shape[0]):
        params = {key: _param_value(arrays[key], i) for key in spec.param_keys}
        yield SampleRecord(
            experiment=cfg.experiment,
            sample_index=i,
            params=params,
            e1=float(arrays["e1"][i]),
            e2=float(arrays["e2"][i]),
            tau=float(arrays["tau"][i]),
            tau_method=spec.tau_method,
            seed=cfg.seed,
        )


def write_csv(cfg: SweepConfig, fh) -> int:
    """Write the experiment as CSV to an open text file handle.

    Column order is fixed; floats carry 17 significant digits so every value
    round-trips exactly.  Output bytes depend only on (config, seed).
    """
    spec = _spec_for(cfg)
    arrays = experiment_arrays(cfg)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    n = arrays["e2"].shape[0]
    for i in range(n):
        params = {key: _param_value(arrays[key], i) for key in spec.param_keys}
        writer.writerow(
            (
                cfg.experiment,
                i,
                json.dumps(params, separators=(",", ":")),
                format(arrays["e1"][i], ".17g"),
                format(arrays["e2"][i], ".17g"),
                format(arrays["tau"][i], ".17g"),
                spec.tau_method,
            )
        )
    return n


def records_to_json(cfg: SweepConfig) -> str:
    """The same records as a JSON array (for --json output)."""
    spec = _spec_for(cfg)
    arrays = experiment_arrays(cfg)
    rows = []
    for i in range(arrays["e2"].shape[0]):
        rows.append(
            {
                "experiment": cfg.experiment,
                "sample_index": i,
                "params": {key: _param_value(arrays[key], i) for key in spec.param_keys},
                "e1": float(arrays["e1"][i]),
                "e2": float(arrays["e2"][i]),
                "tau": float(arrays["tau"][i]),
                "tau_method": spec.tau_method,
            }
        )
    return json.dumps(rows, indent=2)
