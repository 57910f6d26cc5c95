"""Independent numerical oracles and random-state factories for the tests.

The matrix exponential here is a plain scaling-and-squaring Taylor series,
deliberately independent of the eigendecomposition route used by the
library, so propagator tests are a genuine dual-route check.
"""

from __future__ import annotations

import numpy as np

from qofc import (
    FullyOverlappingTopology,
    GaussianCombState,
    NonOverlappingTopology,
    add_thermal_noise,
    comb_nonoverlapping,
    comb_overlapping,
    coupling_time_for_gain,
    propagate_seed,
)


def series_expm(a: np.ndarray, terms: int = 60) -> np.ndarray:
    """exp(a) by Taylor series with scaling and squaring."""
    norm = np.linalg.norm(a, 1)
    squarings = 0
    if norm > 0:
        squarings = max(0, int(np.ceil(np.log2(norm))) + 4)
    x = a / (2.0**squarings)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ x / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


def pairs_topology_for_gains(gains) -> NonOverlappingTopology:
    """Topology whose unit-time propagation realises the given pair gains."""
    return NonOverlappingTopology(
        tuple(
            (2 * k, 2 * k + 1, float(coupling_time_for_gain(g)))
            for k, g in enumerate(np.atleast_1d(gains))
        )
    )


def random_state(rng: np.random.Generator, seeded: bool | None = None,
                 noisy: bool | None = None, kind: str | None = None) -> GaussianCombState:
    """Random small comb state covering both topologies, seeds and noise."""
    kind = kind or ("pairs" if rng.random() < 0.5 else "overlap")
    seeded = bool(rng.random() < 0.5) if seeded is None else seeded
    noisy = bool(rng.random() < 0.5) if noisy is None else noisy
    if kind == "pairs":
        n_pairs = int(rng.integers(1, 4))
        gains = rng.uniform(0.05, 1.2, n_pairs)
        state = comb_nonoverlapping(gains)
        topology: object = pairs_topology_for_gains(gains)
        t = 1.0
    else:
        n = int(rng.integers(2, 6))
        gt = float(rng.uniform(0.02, 1.2 / (n - 1)))
        state = comb_overlapping(n, gt)
        topology = FullyOverlappingTopology(n, 1.0)
        t = gt
    if seeded:
        xi0 = (rng.uniform(-1.0, 1.0, state.n_modes)
               + 1j * rng.uniform(-1.0, 1.0, state.n_modes))
        xi0 *= rng.random(state.n_modes) < 0.7
        xi_t = propagate_seed(topology, t, xi0)
        state = GaussianCombState(state.cov, xi_t, dict(state.meta))
    if noisy:
        state = add_thermal_noise(state, rng.uniform(0.0, 0.8, state.n_modes))
    return state
