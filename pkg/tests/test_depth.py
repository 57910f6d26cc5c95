import numpy as np
import pytest

from qofc import (
    ArmMoments,
    Bipartition,
    add_thermal_noise,
    arm_moments,
    comb_overlapping,
    tau_eigen,
    tau_m,
    twin_beam_state,
    vacuum_state,
)

PAIR_BIP = Bipartition((0,), (1,))
RNG = np.random.default_rng(31)


def test_tau_eigen_examples():
    assert tau_eigen(vacuum_state(2)).tau == 0.0

    res = tau_eigen(twin_beam_state(1.0))
    assert res.method == "eigenvalue"
    assert res.tau == pytest.approx(np.sqrt(2.0) - 1.0, abs=1e-12)

    noisy = add_thermal_noise(twin_beam_state(1.0), [0.5, 0.5])
    assert tau_eigen(noisy).tau == 0.0  # sqrt(2) - 1.5 < 0, clamped

    with pytest.raises(ValueError):
        tau_eigen(vacuum_state(3))


def test_tau_eigen_closed_form_grid():
    for b_p in np.linspace(0.05, 10.0, 40):
        got = tau_eigen(twin_beam_state(float(b_p))).tau
        assert got == pytest.approx(np.sqrt(b_p * (b_p + 1.0)) - b_p, abs=1e-11)


def test_tau_m_quartic_anchors():
    m1 = arm_moments(twin_beam_state(1.0), PAIR_BIP)
    res = tau_m(m1)
    assert res.method == "quartic_root"
    assert res.tau == pytest.approx(np.sqrt(2.0) - 1.0, abs=1e-10)
    assert res.residual <= 1e-10 * 3.0

    m3 = arm_moments(twin_beam_state(3.0), PAIR_BIP)
    assert tau_m(m3).tau == pytest.approx(2.0 * np.sqrt(3.0) - 3.0, abs=1e-10)


def test_tau_m_zero_for_nonnegative_e2():
    noisy = add_thermal_noise(twin_beam_state(1.0), [0.5, 0.5])
    res = tau_m(arm_moments(noisy, PAIR_BIP))
    assert res.tau == 0.0
    assert res.residual == 0.0

    handmade = ArmMoments.from_central(1.0, 1.0, 2.0, 2.0, 1.0)
    assert tau_m(handmade).tau == 0.0


def test_two_route_agreement_pure_twin_beams():
    for b_p in np.linspace(0.01, 10.0, 100):
        st = twin_beam_state(float(b_p))
        t_e = tau_eigen(st).tau
        t_q = tau_m(arm_moments(st, PAIR_BIP)).tau
        assert abs(t_e - t_q) <= 1e-9


def test_two_route_gap_reported_not_asserted_for_noisy_states():
    # the quartic route is sufficient-only; for mixed states the two depths
    # may differ, and both must still be nonnegative and finite
    gaps = []
    for _ in range(50):
        b_p = float(RNG.uniform(0.1, 3.0))
        noise = RNG.uniform(0.0, 0.4, 2)
        st = add_thermal_noise(twin_beam_state(b_p), noise)
        t_e = tau_eigen(st).tau
        t_q = tau_m(arm_moments(st, PAIR_BIP)).tau
        assert t_e >= 0.0 and t_q >= 0.0
        gaps.append(abs(t_e - t_q))
    assert np.isfinite(gaps).all()


def test_tau_m_bracket_and_residual_on_extreme_moments():
    # huge stimulated arms: coefficients span 10 orders of magnitude
    m = ArmMoments.from_central(2.0e6, 2.0e6, 4.0e3, 4.0e3, 1.2e5)
    res = tau_m(m)
    assert res.tau > 0.0
    assert res.residual <= 1e-10 * max(1.0, abs(4.0e3 * 4.0e3 - 1.2e5**2))


def test_tau_m_monotone_in_identifier_magnitude():
    taus = []
    for cov in np.linspace(1.1, 3.0, 12):
        m = ArmMoments.from_central(1.0, 1.0, 1.0, 1.0, float(cov))
        taus.append(tau_m(m).tau)
    assert all(b >= a for a, b in zip(taus, taus[1:]))


def test_tau_m_on_multimode_bipartitions():
    comb = comb_overlapping(12, 0.08)
    for m_arm in (1, 3, 6):
        bip = Bipartition(tuple(range(m_arm)), tuple(range(m_arm, 2 * m_arm)))
        res = tau_m(arm_moments(comb, bip))
        assert res.method == "quartic_root"
        assert res.tau > 0.0
