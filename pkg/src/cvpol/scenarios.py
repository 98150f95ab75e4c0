"""Named state-preparation scenarios reproducing the measured variance spectra.

Each scenario builds a PolarizationState per sideband frequency from OPA
presets, then runs it through the four Stokes measurement arrangements.
The source presets are fits to a few quoted numbers, so the spectra are
calibrated pattern reproductions rather than predictions.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from cvpol.apparatus import Beam, DetectionChain, combine_on_pbs, measure_stokes
from cvpol.opa_model import SourcePreset, frequency_grid, laser_excess, load_preset, quadrature_spectrum, two_beam_covariance
from cvpol.polstate import PolarizationState
from cvpol.stokes import NoiseEllipsoid

__all__ = [
    "Scenario",
    "ScenarioResult",
    "SpectrumPoint",
    "SCENARIOS",
    "get_scenario",
    "run_scenario",
    "DEFAULT_GRID",
    "SPOT_FREQUENCY_MHZ",
]

# carrier power is arbitrary in the linearized model; keep it bright
BRIGHT = 1.0e6
SPOT_FREQUENCY_MHZ = 8.5
DEFAULT_GRID = tuple(frequency_grid(3.0, 10.0, 0.1))
CONFIGS = "abcd"


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    build: Callable[[float], PolarizationState] = field(repr=False)
    chain: DetectionChain = DetectionChain(0.76)
    theta_jitter: float = 0.0
    grid: tuple = DEFAULT_GRID
    presets: tuple = ()

    def state_at(self, f: float) -> PolarizationState:
        return self.build(f)


def _coherent(f):
    return combine_on_pbs(Beam(math.sqrt(BRIGHT)), Beam(), 0.0, "coherent")


def _single_squeezed(f):
    preset = load_preset("paper-amplitude")
    vp, vm = quadrature_spectrum(preset.opa, preset.laser, f)
    return combine_on_pbs(Beam(math.sqrt(BRIGHT), vp, vm), Beam(), 0.0, "single amplitude squeezed")


def _squeezed_vacuum_plus_coherent(f):
    preset = load_preset("paper-amplitude")
    # a vacuum beam carries no laser noise; the bright coherent beam does
    vp, vm = quadrature_spectrum(preset.opa, None, f)
    excess = float(laser_excess(preset.laser, f))
    return combine_on_pbs(
        Beam(math.sqrt(BRIGHT), 1.0 + excess, 1.0), Beam(0.0, vp, vm), 0.5 * math.pi, "squeezed vacuum + coherent"
    )


def _two_beams(preset_name):
    def build(f):
        preset: SourcePreset = load_preset(preset_name)
        vp, vm = quadrature_spectrum(preset.opa, preset.laser, f)
        excess = float(laser_excess(preset.laser, f))
        noise = two_beam_covariance((vp, vm), (vp, vm), preset.laser_correlation, excess, excess)
        amp = math.sqrt(BRIGHT / 2.0)
        return PolarizationState(amp, amp, 0.5 * math.pi, noise, f"two beams ({preset.opa.lock.value})")

    return build


_FIG7_CHAIN = DetectionChain(0.76, 0.0, 0.71 / 0.76)
_PHASE_JITTER = 0.1217

SCENARIOS = {
    s.name: s
    for s in (
        Scenario("fig5_single_sqz", "single bright amplitude-squeezed beam, horizontally polarized", _single_squeezed, presets=("paper-amplitude",)),
        Scenario(
            "fig7_sqz_vacuum_plus_coherent",
            "amplitude-squeezed vacuum (V) on a bright coherent beam (H), theta = pi/2",
            _squeezed_vacuum_plus_coherent,
            _FIG7_CHAIN,
            presets=("paper-amplitude",),
        ),
        Scenario(
            "fig8_two_phase_sqz",
            "two phase-squeezed beams, equal power, theta = pi/2, fitted lock jitter",
            _two_beams("paper-phase"),
            theta_jitter=_PHASE_JITTER,
            presets=("paper-phase",),
        ),
        Scenario(
            "fig11_two_amp_sqz", "two amplitude-squeezed beams, equal power, theta = pi/2", _two_beams("paper-amplitude"),
            presets=("paper-amplitude",),
        ),
        Scenario("ball_a", "coherent beam", _coherent, grid=(SPOT_FREQUENCY_MHZ,)),
        Scenario("ball_b", "single bright amplitude-squeezed beam", _single_squeezed, grid=(SPOT_FREQUENCY_MHZ,), presets=("paper-amplitude",)),
        Scenario(
            "ball_c",
            "squeezed vacuum plus bright coherent beam",
            _squeezed_vacuum_plus_coherent,
            _FIG7_CHAIN,
            grid=(SPOT_FREQUENCY_MHZ,),
            presets=("paper-amplitude",),
        ),
        Scenario(
            "ball_d",
            "two phase-squeezed beams",
            _two_beams("paper-phase"),
            theta_jitter=_PHASE_JITTER,
            grid=(SPOT_FREQUENCY_MHZ,),
            presets=("paper-phase",),
        ),
        Scenario(
            "ball_e",
            "two amplitude-squeezed beams",
            _two_beams("paper-amplitude"),
            grid=(SPOT_FREQUENCY_MHZ,),
            presets=("paper-amplitude",),
        ),
    )
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}") from None


class SpectrumPoint(NamedTuple):
    freq_mhz: float
    means: tuple
    variances: tuple  # shot-noise normalized

    @property
    def db(self) -> tuple:
        return tuple(10.0 * math.log10(v) for v in self.variances)


def _measure(scenario: Scenario, f: float) -> SpectrumPoint:
    state = scenario.state_at(f)
    results = [measure_stokes(state, c, scenario.chain, theta_jitter=scenario.theta_jitter) for c in CONFIGS]
    return SpectrumPoint(f, tuple(r.dc_mean for r in results), tuple(r.variance for r in results))


@dataclass(frozen=True)
class ScenarioResult:
    scenario: Scenario
    spectrum: tuple
    ellipsoid: NoiseEllipsoid
    spot_mhz: float

    def metadata(self) -> dict:
        # shipped presets are fits to quoted numbers, never measurements
        presets = {name: {"fitted": load_preset(name).fitted} for name in self.scenario.presets}
        return {"presets": presets, "theta_jitter": self.scenario.theta_jitter}

    def db_table(self) -> np.ndarray:
        return np.array([[p.freq_mhz, *p.db] for p in self.spectrum])

    def spectra_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["freq_mhz", "v0_db", "v1_db", "v2_db", "v3_db"])
        for p in self.spectrum:
            writer.writerow([f"{p.freq_mhz:.6g}", *(f"{d:.6g}" for d in p.db)])
        return buf.getvalue()

    def ellipsoid_json(self) -> str:
        data = self.ellipsoid.to_dict()
        data.update(scenario=self.scenario.name, freq_mhz=self.spot_mhz, **self.metadata())
        return json.dumps(data, indent=2) + "\n"


def run_scenario(scenario, spot_mhz: float = SPOT_FREQUENCY_MHZ, grid=None) -> ScenarioResult:
    """Spectra over the scenario grid plus the normalized ellipsoid at ``spot_mhz``."""
    if isinstance(scenario, str):
        scenario = get_scenario(scenario)
    grid = tuple(grid) if grid is not None else scenario.grid
    spectrum = tuple(_measure(scenario, f) for f in grid)
    spot = _measure(scenario, spot_mhz)
    ellipsoid = NoiseEllipsoid(
        center=np.array(spot.means[1:]) / spot.means[0],
        semi_axes=np.sqrt(spot.variances[1:]),
        radial_thickness=math.sqrt(spot.variances[0]),
        normalized=True,
    )
    return ScenarioResult(scenario, spectrum, ellipsoid, spot_mhz)
