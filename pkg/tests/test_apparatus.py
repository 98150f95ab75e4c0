import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvpol.apparatus import (
    CONFIG_PLATES,
    NOMINAL_EFFICIENCY,
    Beam,
    DetectionChain,
    MeasurementConfig,
    WavePlate,
    apply_jones,
    apply_loss,
    apply_unitary,
    calibration_error_db,
    combine_on_pbs,
    half_wave,
    measure_stokes,
    quarter_wave,
    shot_noise_reference,
)
from cvpol.polstate import NoiseCovariance, PolarizationState, StateError, coherent_state
from cvpol.stokes import stokes_means, stokes_variances_general

from conftest import SEED, physical_states, random_state

H_BEAM = coherent_state(1.0)


def amp_squeezed_pair(alpha=10.0):
    return combine_on_pbs(Beam(alpha, 0.5, 2.0), Beam(alpha, 0.5, 2.0), 0.5 * math.pi)


# ---- wave plates


def test_half_wave_rotates_to_diagonal():
    out = apply_jones(H_BEAM, half_wave(math.pi / 8))
    assert np.allclose(stokes_means(out), (1, 0, 1, 0), atol=1e-12)


def test_quarter_wave_gives_right_circular():
    out = apply_jones(H_BEAM, quarter_wave(-math.pi / 4))
    s = stokes_means(out)
    assert s[3] == pytest.approx(s[0])


def test_zero_retardance_is_identity():
    rng = np.random.default_rng(SEED)
    state = random_state(rng)
    out = apply_jones(state, WavePlate(0.0, 0.7))
    assert np.allclose(stokes_means(out), stokes_means(state))
    assert np.allclose(stokes_variances_general(out), stokes_variances_general(state))


def test_two_quarter_waves_make_a_half_wave():
    for angle in (0.0, 0.3, 1.2):
        q = quarter_wave(angle).jones()
        assert np.max(np.abs(q @ q - half_wave(angle).jones())) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_plates_are_unitary(retardance, angle):
    j = WavePlate(retardance, angle).jones()
    assert np.max(np.abs(j.conj().T @ j - np.eye(2))) <= 1e-12


def test_non_unitary_rejected():
    with pytest.raises(StateError):
        apply_unitary(H_BEAM, np.diag([1.0, 0.5]))


@settings(max_examples=200, deadline=None)
@given(physical_states(), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_jones_preserves_flux_and_physicality(state, retardance, angle):
    out = apply_jones(state, WavePlate(retardance, angle))
    assert out.photon_number == pytest.approx(state.photon_number, rel=1e-10, abs=1e-10)
    assert stokes_means(out)[0] == pytest.approx(stokes_means(state)[0], rel=1e-10, abs=1e-10)
    assert np.trace(out.noise.m) == pytest.approx(np.trace(state.noise.m), rel=1e-10)
    assert out.noise.is_physical()


@settings(max_examples=100, deadline=None)
@given(physical_states(), st.floats(0, 2 * math.pi), st.floats(0, math.pi))
def test_jones_rotates_stokes_vector_rigidly(state, retardance, angle):
    # plates are SU(2) rotations of the Poincare sphere, so |S| and S0-variance survive
    out = apply_jones(state, WavePlate(retardance, angle))
    s_in, s_out = stokes_means(state), stokes_means(out)
    assert np.linalg.norm(s_out[1:]) == pytest.approx(np.linalg.norm(s_in[1:]), rel=1e-9, abs=1e-9)
    assert stokes_variances_general(out)[0] == pytest.approx(stokes_variances_general(state)[0], rel=1e-9)


# ---- loss


def test_loss_examples():
    state = PolarizationState(2.0, 0.0, 0.0, NoiseCovariance.from_modes((0.2, 5.0, 0.0)))
    assert apply_loss(state, 1.0) == state
    out = apply_loss(state, 0.76)
    assert out.noise.block("H")[0] == pytest.approx(0.392)
    assert out.alpha_h == pytest.approx(2.0 * math.sqrt(0.76))
    assert np.array_equal(apply_loss(coherent_state(3.0), 0.5).noise.m, np.eye(4))
    for eta in (0.0, -0.1, 1.1):
        with pytest.raises(StateError):
            apply_loss(state, eta)


def test_loss_monte_carlo():
    rng = np.random.default_rng(SEED)
    n, eta, v = 1_000_000, 0.76, 0.2
    out = math.sqrt(eta) * rng.normal(size=n) * math.sqrt(v) + math.sqrt(1 - eta) * rng.normal(size=n)
    predicted = eta * v + 1 - eta
    assert abs(out.var() - predicted) < 3 * predicted * math.sqrt(2 / (n - 1))


@settings(max_examples=200, deadline=None)
@given(physical_states(), st.floats(0.01, 1.0))
def test_loss_is_contraction_to_identity(state, eta):
    out = apply_loss(state, eta)
    assert out.noise.is_physical()
    before = np.linalg.norm(state.noise.m - np.eye(4))
    after = np.linalg.norm(out.noise.m - np.eye(4))
    assert after == pytest.approx(eta * before, rel=1e-9, abs=1e-12)


# ---- combining beams


def test_combine_examples():
    state = amp_squeezed_pair()
    s = stokes_means(state)
    assert s[3] == pytest.approx(s[0]) and state.noise.is_block_diagonal()
    fig7 = combine_on_pbs(Beam(10.0), Beam(0.0, 0.5, 2.0), 0.5 * math.pi)
    assert fig7.alpha_v == 0.0 and fig7.noise.block("V") == (0.5, 2.0, 0.0)
    vac = combine_on_pbs(Beam(), Beam(), 0.0)
    assert vac.photon_number == 0 and np.array_equal(vac.noise.m, np.eye(4))


# ---- measurement


def test_config_a_on_coherent_beam():
    result = measure_stokes(coherent_state(5.0), "a")
    assert result.dc_mean == pytest.approx(25.0)
    assert result.variance == pytest.approx(1.0) and result.absolute_variance == pytest.approx(25.0)


def test_config_c_on_squeezed_h_beam_is_shot_noise():
    state = combine_on_pbs(Beam(10.0, 0.3, 4.0), Beam(), 0.0)
    result = measure_stokes(state, "c")
    assert result.variance == pytest.approx(1.0)
    assert result.dc_mean == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("config", "abcd")
def test_ideal_chain_matches_stokes_module(config):
    rng = np.random.default_rng(SEED)
    j = "abcd".index(config)
    for _ in range(100):
        state = random_state(rng)
        result = measure_stokes(state, config)
        expected = stokes_variances_general(state)[j]
        assert result.absolute_variance == pytest.approx(expected, rel=1e-9)
        assert result.dc_mean == pytest.approx(stokes_means(state)[j], rel=1e-9, abs=1e-9 * state.photon_number)


def test_loss_on_two_amplitude_squeezed():
    state = amp_squeezed_pair()
    ideal = stokes_variances_general(state)[1]
    result = measure_stokes(state, "b", DetectionChain(0.76))
    n = state.photon_number
    expected = (0.76 * ideal + 0.24 * n) / n
    assert result.variance == pytest.approx(expected, rel=1e-12)


def test_loss_measurement_monte_carlo():
    # sample the quadratures, apply the beamsplitter, then linearize S1 per sample
    rng = np.random.default_rng(SEED)
    state = amp_squeezed_pair()
    n, eta = 1_000_000, 0.76
    x = rng.multivariate_normal(np.zeros(4), state.noise.m, size=n)
    x = math.sqrt(eta) * x + math.sqrt(1 - eta) * rng.normal(size=(n, 4))
    a = math.sqrt(eta) * state.alpha_h
    s1 = a * x[:, 0] - a * x[:, 2]
    shot = eta * state.photon_number
    result = measure_stokes(state, "b", DetectionChain(0.76))
    predicted = result.variance * shot
    assert abs(s1.var() - predicted) < 3 * predicted * math.sqrt(2 / (n - 1))


def test_dark_noise():
    chain = DetectionChain(1.0, dark_noise=0.1)
    raw = measure_stokes(coherent_state(5.0), "a", chain, dark_correct=False)
    corrected = measure_stokes(coherent_state(5.0), "a", chain)
    assert raw.variance == pytest.approx(1.1) and corrected.variance == pytest.approx(1.0)
    assert corrected.dark_corrected and not raw.dark_corrected


def test_theta_jitter_mixes_quadratures():
    state = amp_squeezed_pair()
    clean = measure_stokes(state, "d").variance
    jittered = measure_stokes(state, "d", theta_jitter=0.2).variance
    assert jittered > clean
    assert measure_stokes(state, "a", theta_jitter=0.2).variance == pytest.approx(measure_stokes(state, "a").variance)


def test_unknown_config_and_dark_vacuum():
    with pytest.raises(ValueError):
        measure_stokes(H_BEAM, "e")
    with pytest.raises(StateError):
        measure_stokes(coherent_state(0.0), "a")


def test_chain_validation_and_nominal_budget():
    assert NOMINAL_EFFICIENCY == pytest.approx(0.76, abs=0.001)
    assert DetectionChain(0.76, 0, 0.5).effective == pytest.approx(0.38)
    for kw in ({"efficiency": 0}, {"mode_match": 1.5}, {"dark_noise": -1}):
        with pytest.raises(ValueError):
            DetectionChain(**{"efficiency": 1.0, **kw})


def test_measurement_config_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"config": "c", "efficiency": 0.76, "dark_noise_db": -10.0, "mode_match": 1.0, "dark_correct": False}))
    cfg = MeasurementConfig.load(path)
    assert cfg.config == "c" and cfg.chain.dark_noise == pytest.approx(0.1) and not cfg.dark_correct
    assert MeasurementConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        MeasurementConfig("z")
    assert set(CONFIG_PLATES) == set("abcd")


# ---- shot-noise calibration


def test_shot_noise_reference():
    assert shot_noise_reference(100.0) == pytest.approx(100.0)
    assert shot_noise_reference(100.0, mismatch=0.02) == pytest.approx(102.0)
    assert calibration_error_db(0.02) == pytest.approx(0.086, abs=5e-4)
    assert shot_noise_reference(100.0, source=(1.0, 1.0)) == shot_noise_reference(100.0)
    with pytest.raises(ValueError):
        shot_noise_reference(0.0)
