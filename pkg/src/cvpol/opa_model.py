"""Phenomenological quadrature-variance spectra of bright below-threshold OPAs.

The squeezed/anti-squeezed pair is the usual cavity Lorentzian; excess
laser noise from the relaxation oscillation sits on the amplitude
quadrature. Shipped presets are least-squares fits to a handful of
quoted experimental numbers, not measurements.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from typing import NamedTuple

import numpy as np

from cvpol.polstate import NoiseCovariance

__all__ = [
    "Lock",
    "OpaParams",
    "LaserNoise",
    "SourcePreset",
    "SpectrumRow",
    "laser_excess",
    "quadrature_spectrum",
    "spectrum_sweep",
    "frequency_grid",
    "two_beam_covariance",
    "load_preset",
    "preset_names",
]


class Lock(enum.Enum):
    DEAMPLIFICATION = "deamplification"  # amplitude squeezed
    AMPLIFICATION = "amplification"  # phase squeezed

    @classmethod
    def parse(cls, value) -> Lock:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class OpaParams:
    x: float
    gamma_mhz: float
    eta_esc: float = 1.0
    lock: Lock = Lock.DEAMPLIFICATION

    def __post_init__(self):
        if not 0.0 <= self.x < 1.0:
            raise ValueError(f"pump parameter must lie in [0, 1), got {self.x}")
        if self.gamma_mhz <= 0:
            raise ValueError("cavity half-linewidth must be positive")
        if not 0.0 <= self.eta_esc <= 1.0:
            raise ValueError("escape efficiency must lie in [0, 1]")
        object.__setattr__(self, "lock", Lock.parse(self.lock))


@dataclass(frozen=True)
class LaserNoise:
    f_relax_mhz: float = 1.0
    peak_db: float = 0.0
    width_mhz: float = 1.0

    def __post_init__(self):
        if self.peak_db < 0:
            raise ValueError("laser noise peak must be >= 0 dB above shot noise")
        if self.width_mhz <= 0:
            raise ValueError("laser noise width must be positive")


def laser_excess(laser: LaserNoise | None, f):
    """Excess amplitude-quadrature variance (shot noise = 1) from the laser."""
    if laser is None:
        return np.zeros_like(np.asarray(f, dtype=float))
    peak = 10.0 ** (laser.peak_db / 10.0) - 1.0
    return peak / (1.0 + ((np.asarray(f, dtype=float) - laser.f_relax_mhz) / laser.width_mhz) ** 2)


def _squeezed(params: OpaParams, f):
    x, w = params.x, (f / params.gamma_mhz) ** 2
    return 1.0 - params.eta_esc * 4.0 * x / ((1.0 + x) ** 2 + w)


def _anti_squeezed(params: OpaParams, f):
    x, w = params.x, (f / params.gamma_mhz) ** 2
    return 1.0 + params.eta_esc * 4.0 * x / ((1.0 - x) ** 2 + w)


def quadrature_spectrum(params: OpaParams, laser: LaserNoise | None, f):
    """``(V+, V-)`` of the OPA output at sideband frequency ``f`` (MHz)."""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise ValueError("sideband frequency must be positive")
    excess = laser_excess(laser, f_arr)
    if params.lock is Lock.DEAMPLIFICATION:
        v_plus, v_minus = _squeezed(params, f_arr) + excess, _anti_squeezed(params, f_arr)
    else:
        v_plus, v_minus = _anti_squeezed(params, f_arr) + excess, _squeezed(params, f_arr)
    if f_arr.ndim == 0:
        return float(v_plus), float(v_minus)
    return v_plus, v_minus


class SpectrumRow(NamedTuple):
    freq_mhz: float
    v_plus: float
    v_minus: float
    laser_excess: float


def frequency_grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive grid ``start, start+step, ..., stop`` without float drift."""
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def spectrum_sweep(params: OpaParams, laser: LaserNoise | None, grid) -> list[SpectrumRow]:
    grid = [float(f) for f in grid]
    if not grid:
        raise ValueError("frequency grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("frequency grid must be strictly ascending")
    if grid[0] <= 0 or grid[-1] > 100:
        raise ValueError("frequency grid must lie within (0, 100] MHz")
    f = np.array(grid)
    v_plus, v_minus = quadrature_spectrum(params, laser, f)
    excess = laser_excess(laser, f)
    return [SpectrumRow(*row) for row in zip(grid, v_plus.tolist(), v_minus.tolist(), excess.tolist())]


def two_beam_covariance(h, v, correlation: float = 0.0, excess_h: float = 0.0, excess_v: float = 0.0):
    """Covariance for two independent beams sharing correlated laser noise.

    ``h`` and ``v`` are ``(V+, V-)`` pairs. A common laser puts covariance
    ``correlation * sqrt(excess_h * excess_v)`` between the two amplitude
    quadratures.
    """
    if not -1.0 <= correlation <= 1.0:
        raise ValueError("laser correlation must lie in [-1, 1]")
    cross = np.zeros((2, 2))
    cross[0, 0] = correlation * math.sqrt(max(excess_h, 0.0) * max(excess_v, 0.0))
    return NoiseCovariance.from_modes((h[0], h[1], 0.0), (v[0], v[1], 0.0), cross)


@dataclass(frozen=True)
class SourcePreset:
    """OPA + laser parameters as stored in preset files."""

    name: str
    opa: OpaParams
    laser: LaserNoise
    laser_correlation: float = 1.0
    fitted: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "x": self.opa.x,
            "gamma_mhz": self.opa.gamma_mhz,
            "eta_esc": self.opa.eta_esc,
            "lock": self.opa.lock.value,
            "laser": asdict(self.laser),
            "laser_correlation": self.laser_correlation,
            "fitted": self.fitted,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict, name: str = "") -> SourcePreset:
        opa = OpaParams(data["x"], data["gamma_mhz"], data.get("eta_esc", 1.0), data.get("lock", "deamplification"))
        laser = LaserNoise(**data.get("laser", {}))
        return cls(
            name=data.get("name", name),
            opa=opa,
            laser=laser,
            laser_correlation=data.get("laser_correlation", 1.0),
            fitted=data.get("fitted", False),
            note=data.get("note", ""),
        )

    def with_lock(self, lock) -> SourcePreset:
        opa = OpaParams(self.opa.x, self.opa.gamma_mhz, self.opa.eta_esc, Lock.parse(lock))
        return SourcePreset(self.name, opa, self.laser, self.laser_correlation, self.fitted, self.note)


def preset_names() -> list[str]:
    files = resources.files("cvpol").joinpath("presets")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".json"))


def load_preset(name_or_path) -> SourcePreset:
    """Load a shipped preset by name, or any preset JSON file by path."""
    candidate = resources.files("cvpol").joinpath("presets", f"{name_or_path}.json")
    if candidate.is_file():
        return SourcePreset.from_dict(json.loads(candidate.read_text()), str(name_or_path))
    with open(name_or_path) as fh:
        return SourcePreset.from_dict(json.load(fh))
