"""Linear-optics measurement of the Stokes operators.

Wave plates act on the lab-frame mode pair; the noise covariance is
carried along by the matching orthogonal-symplectic 4x4 map and then
re-expressed relative to each output mode's own carrier phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cvpol.polstate import NoiseCovariance, PolarizationState, StateError
from cvpol.stokes import stokes_means, stokes_variances_general

__all__ = [
    "WavePlate",
    "half_wave",
    "quarter_wave",
    "Beam",
    "DetectionChain",
    "MeasurementConfig",
    "MeasurementResult",
    "CONFIG_PLATES",
    "apply_unitary",
    "apply_jones",
    "apply_loss",
    "combine_on_pbs",
    "measure_stokes",
    "shot_noise_reference",
    "calibration_error_db",
    "NOMINAL_EFFICIENCY",
]

_UNITARY_TOL = 1e-12
_AMPLITUDE_FLOOR = 1e-150

# escape, detector and optics losses folded into one beamsplitter
NOMINAL_EFFICIENCY = 0.86 * 0.93 * 0.95


@dataclass(frozen=True)
class WavePlate:
    retardance: float
    axis_angle: float = 0.0

    def jones(self) -> np.ndarray:
        c, s = math.cos(self.axis_angle), math.sin(self.axis_angle)
        rot = np.array([[c, s], [-s, c]])
        phase = np.diag([np.exp(-0.5j * self.retardance), np.exp(0.5j * self.retardance)])
        return rot.T @ phase @ rot


def half_wave(axis_angle: float) -> WavePlate:
    return WavePlate(math.pi, axis_angle)


def quarter_wave(axis_angle: float) -> WavePlate:
    return WavePlate(0.5 * math.pi, axis_angle)


def _complex_to_real(u: np.ndarray) -> np.ndarray:
    """4x4 action on (X+, X-) pairs of ``b -> u b``; a = (X+ + i X-)/2."""
    r = np.empty((4, 4))
    for j in range(2):
        for k in range(2):
            z = u[j, k]
            r[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = [[z.real, -z.imag], [z.imag, z.real]]
    return r


def apply_unitary(state: PolarizationState, u) -> PolarizationState:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.max(np.abs(u.conj().T @ u - np.eye(2))) > _UNITARY_TOL:
        raise StateError("polarization optics must be a 2x2 unitary")
    carrier_in = np.array([state.alpha_h, state.alpha_v * np.exp(1j * state.theta)])
    carrier = u @ carrier_in
    amp = np.abs(carrier)
    phase = np.angle(carrier)
    # undefined phases of empty modes follow the other mode, so theta' = 0 there
    if amp[0] <= _AMPLITUDE_FLOOR and amp[1] <= _AMPLITUDE_FLOOR:
        phase[:] = 0.0
    elif amp[0] <= _AMPLITUDE_FLOOR:
        phase[0] = phase[1]
    elif amp[1] <= _AMPLITUDE_FLOOR:
        phase[1] = phase[0]
    to_lab = np.diag([1.0, np.exp(1j * state.theta)])
    to_frame = np.diag(np.exp(-1j * phase))
    r = _complex_to_real(to_frame @ u @ to_lab)
    m = r @ state.noise.m @ r.T
    return PolarizationState(
        alpha_h=float(amp[0]),
        alpha_v=float(amp[1]),
        theta=float(phase[1] - phase[0]),
        noise=NoiseCovariance(0.5 * (m + m.T)),
        label=state.label,
    )


def apply_jones(state: PolarizationState, plate: WavePlate) -> PolarizationState:
    return apply_unitary(state, plate.jones())


def apply_loss(state: PolarizationState, eta: float) -> PolarizationState:
    """Vacuum admixture on both modes through a beamsplitter of transmittivity ``eta``."""
    if not 0.0 < eta <= 1.0:
        raise StateError(f"efficiency must lie in (0, 1], got {eta}")
    root = math.sqrt(eta)
    m = eta * state.noise.m + (1.0 - eta) * np.eye(4)
    return state.replace(alpha_h=root * state.alpha_h, alpha_v=root * state.alpha_v, noise=NoiseCovariance(m))


@dataclass(frozen=True)
class Beam:
    """Single-mode input: real carrier amplitude plus (V+, V-, C) noise."""

    alpha: float = 0.0
    v_plus: float = 1.0
    v_minus: float = 1.0
    c: float = 0.0

    @property
    def block(self):
        return (self.v_plus, self.v_minus, self.c)


def combine_on_pbs(h_beam: Beam, v_beam: Beam, theta: float, label: str = "") -> PolarizationState:
    """Overlap two independent beams with orthogonal polarization."""
    noise = NoiseCovariance.from_modes(h_beam.block, v_beam.block)
    return PolarizationState(h_beam.alpha, v_beam.alpha, theta, noise, label)


# Plates placed before the PBS for each arrangement; (plates, summed?)
CONFIG_PLATES = {
    "a": ((), True),
    "b": ((), False),
    "c": ((half_wave(math.pi / 8),), False),
    "d": ((quarter_wave(math.pi / 4),), False),
}


@dataclass(frozen=True)
class DetectionChain:
    efficiency: float = 1.0
    dark_noise: float = 0.0
    mode_match: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("detection efficiency must lie in (0, 1]")
        if not 0.0 < self.mode_match <= 1.0:
            raise ValueError("mode matching must lie in (0, 1]")
        if self.dark_noise < 0:
            raise ValueError("dark noise must be non-negative")

    @property
    def effective(self) -> float:
        return self.efficiency * self.mode_match

    @classmethod
    def ideal(cls) -> DetectionChain:
        return cls()


@dataclass(frozen=True)
class MeasurementConfig:
    config: str = "a"
    chain: DetectionChain = DetectionChain()
    dark_correct: bool = True

    def __post_init__(self):
        if self.config not in CONFIG_PLATES:
            raise ValueError(f"unknown measurement config {self.config!r}")

    @classmethod
    def from_dict(cls, data: dict) -> MeasurementConfig:
        dark_db = data.get("dark_noise_db")
        dark = 0.0 if dark_db is None else 10.0 ** (dark_db / 10.0)
        chain = DetectionChain(data.get("efficiency", 1.0), dark, data.get("mode_match", 1.0))
        return cls(data.get("config", "a"), chain, data.get("dark_correct", True))

    @classmethod
    def load(cls, path) -> MeasurementConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        dark = self.chain.dark_noise
        return {
            "config": self.config,
            "efficiency": self.chain.efficiency,
            "dark_noise_db": None if dark == 0 else 10.0 * math.log10(dark),
            "mode_match": self.chain.mode_match,
            "dark_correct": self.dark_correct,
        }


@dataclass(frozen=True)
class MeasurementResult:
    dc_mean: float
    variance: float
    dark_corrected: bool
    shot: float

    @property
    def absolute_variance(self) -> float:
        return self.variance * self.shot

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.variance)


def _gauss_hermite(theta, jitter, order=24):
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    return theta + jitter * nodes, weights / weights.sum()


def measure_stokes(
    state: PolarizationState,
    config: str = "a",
    chain: DetectionChain | None = None,
    dark_correct: bool = True,
    theta_jitter: float = 0.0,
) -> MeasurementResult:
    """Sum or difference photocurrent statistics for one of the four arrangements.

    ``variance`` is normalized to the detected shot noise. Dark noise, in
    the same units, is added to the raw trace and removed again when
    ``dark_correct`` is set. ``theta_jitter`` (rad, Gaussian) averages the
    spectral variance over a slowly wandering relative-phase lock.
    """
    chain = chain or DetectionChain.ideal()
    if config not in CONFIG_PLATES:
        raise ValueError(f"unknown measurement config {config!r}")
    plates, summed = CONFIG_PLATES[config]
    index = 0 if summed else 1
    if theta_jitter > 0:
        thetas, weights = _gauss_hermite(state.theta, theta_jitter)
    else:
        thetas, weights = np.array([state.theta]), np.array([1.0])
    dc = variance = shot = 0.0
    for theta, weight in zip(thetas, weights):
        out = state.replace(theta=theta)
        for plate in plates:
            out = apply_jones(out, plate)
        if chain.effective < 1.0:
            out = apply_loss(out, chain.effective)
        dc += weight * stokes_means(out)[index]
        variance += weight * stokes_variances_general(out)[index]
        shot += weight * out.photon_number
    if shot <= 0:
        raise StateError("no light reaches the detectors")
    normalized = variance / shot + chain.dark_noise
    if dark_correct:
        normalized -= chain.dark_noise
    return MeasurementResult(float(dc), float(normalized), dark_correct, float(shot))


def shot_noise_reference(power: float, mismatch: float = 0.0, source=(1.0, 1.0)) -> float:
    """Absolute variance of the calibration beam measured in arrangement c.

    ``mismatch`` is the fractional power error of the calibration beam and
    ``source`` its ``(V+, V-)``; an unpumped OPA gives ``(1, 1)``.
    """
    if power <= 0:
        raise ValueError("calibration power must be positive")
    beam = Beam(math.sqrt(power * (1.0 + mismatch)), *source)
    result = measure_stokes(combine_on_pbs(beam, Beam(), 0.0), "c")
    return result.absolute_variance


def calibration_error_db(mismatch: float) -> float:
    """Shot-noise level error caused by a fractional calibration power mismatch."""
    return 10.0 * math.log10(1.0 + mismatch)
