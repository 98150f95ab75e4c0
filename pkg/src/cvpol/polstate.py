"""Linearized two-mode Gaussian polarization states.

A state is described by two real carrier amplitudes, the relative phase
between the horizontal and vertical modes, and a 4x4 covariance of the
quadrature noise operators in the ordered basis ``(H+, H-, V+, V-)``.
The covariance is normalized so that the identity is a coherent state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "BASIS",
    "StateError",
    "NoiseCovariance",
    "PolarizationState",
    "coherent_state",
    "quadrature_variance",
    "cross_quadrature_covariance",
    "state_to_dict",
    "state_from_dict",
    "load_state",
    "save_state",
]

BASIS = ("H+", "H-", "V+", "V-")

_PSD_TOL = 1e-12
_HEISENBERG_TOL = 1e-9
_SYMMETRY_TOL = 1e-12

# symplectic form for (X+, X-) of each mode, with [X+, X-] = 2i
_OMEGA = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class StateError(ValueError):
    """Raised when a state or covariance violates its invariants."""


def _mode_slice(mode: str) -> slice:
    mode = mode.upper()
    if mode == "H":
        return slice(0, 2)
    if mode == "V":
        return slice(2, 4)
    raise StateError(f"mode must be 'H' or 'V', got {mode!r}")


def _rotation_vector(xi: float) -> np.ndarray:
    return np.array([math.cos(xi), math.sin(xi)])


@dataclass(frozen=True)
class NoiseCovariance:
    """Symmetric quadrature-noise covariance, identity for a coherent state."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float)
        if m.shape != (4, 4):
            raise StateError(f"covariance must be 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise StateError("covariance has non-finite entries")
        if np.max(np.abs(m - m.T)) > _SYMMETRY_TOL * max(1.0, np.max(np.abs(m))):
            raise StateError("covariance is not symmetric")
        m = 0.5 * (m + m.T)
        eig = np.linalg.eigvalsh(m)
        if eig[0] < -_PSD_TOL:
            raise StateError(f"covariance is not positive semi-definite (min eig {eig[0]:.3g})")
        for mode in ("H", "V"):
            s = _mode_slice(mode)
            vp, vm, c = m[s, s][0, 0], m[s, s][1, 1], m[s, s][0, 1]
            if vp * vm - c * c < 1.0 - _HEISENBERG_TOL:
                raise StateError(
                    f"mode {mode} violates the Heisenberg bound: "
                    f"V+ V- - C^2 = {vp * vm - c * c:.6g} < 1"
                )
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NoiseCovariance):
            return NotImplemented
        return bool(np.array_equal(self.m, other.m))

    def __hash__(self) -> int:
        return hash(self.m.tobytes())

    @classmethod
    def identity(cls) -> NoiseCovariance:
        return cls(np.eye(4))

    @classmethod
    def from_modes(cls, h=(1.0, 1.0, 0.0), v=(1.0, 1.0, 0.0), cross=None) -> NoiseCovariance:
        """Build from per-mode ``(V+, V-, C)`` triples and an optional 2x2 H-V block."""
        m = np.zeros((4, 4))
        for s, (vp, vm, c) in ((slice(0, 2), h), (slice(2, 4), v)):
            m[s, s] = [[vp, c], [c, vm]]
        if cross is not None:
            cross = np.asarray(cross, dtype=float)
            m[0:2, 2:4] = cross
            m[2:4, 0:2] = cross.T
        return cls(m)

    def block(self, mode: str) -> tuple[float, float, float]:
        """Return ``(V+, V-, C)`` for one mode."""
        s = _mode_slice(mode)
        b = self.m[s, s]
        return float(b[0, 0]), float(b[1, 1]), float(b[0, 1])

    @property
    def cross_block(self) -> np.ndarray:
        return self.m[0:2, 2:4]

    def is_block_diagonal(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.cross_block)) <= tol)

    def is_physical(self, tol: float = 1e-9) -> bool:
        """Full two-mode uncertainty principle ``m + i*Omega >= 0``.

        Stronger than the per-mode bound checked on construction; cross-mode
        correlations can break it while each block still looks fine.
        """
        eig = np.linalg.eigvalsh(self.m + 1j * _OMEGA)
        return bool(eig[0] >= -tol)

    @property
    def max_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.m)[-1])


@dataclass(frozen=True)
class PolarizationState:
    """Two real mode amplitudes, relative phase ``theta`` and quadrature noise."""

    alpha_h: float
    alpha_v: float
    theta: float = 0.0
    noise: NoiseCovariance = field(default_factory=NoiseCovariance.identity)
    label: str = ""

    def __post_init__(self):
        for name in ("alpha_h", "alpha_v", "theta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise StateError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.alpha_h < 0 or self.alpha_v < 0:
            raise StateError("amplitudes must be non-negative; carry phase in theta")
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))
        if not isinstance(self.noise, NoiseCovariance):
            object.__setattr__(self, "noise", NoiseCovariance(self.noise))

    @property
    def photon_number(self) -> float:
        return self.alpha_h**2 + self.alpha_v**2

    @property
    def linearization_suspect(self) -> bool:
        """True when carrier power is too small for first-order noise expansion."""
        return self.photon_number < 10.0 * self.noise.max_eigenvalue

    def replace(self, **changes) -> PolarizationState:
        values = dict(
            alpha_h=self.alpha_h,
            alpha_v=self.alpha_v,
            theta=self.theta,
            noise=self.noise,
            label=self.label,
        )
        values.update(changes)
        return PolarizationState(**values)


def coherent_state(alpha_h: float, alpha_v: float = 0.0, theta: float = 0.0, label: str = "coherent"):
    return PolarizationState(alpha_h, alpha_v, theta, NoiseCovariance.identity(), label)


def quadrature_variance(state: PolarizationState, mode: str, xi: float) -> float:
    """Variance of ``cos(xi) dX+ + sin(xi) dX-`` for the chosen mode."""
    s = _mode_slice(mode)
    u = _rotation_vector(xi)
    return float(u @ state.noise.m[s, s] @ u)


def cross_quadrature_covariance(state: PolarizationState, xi_h: float, xi_v: float) -> float:
    """Symmetrized covariance between ``dX_H(xi_h)`` and ``dX_V(xi_v)``."""
    return float(_rotation_vector(xi_h) @ state.noise.cross_block @ _rotation_vector(xi_v))


def state_to_dict(state: PolarizationState) -> dict:
    return {
        "alpha_h": state.alpha_h,
        "alpha_v": state.alpha_v,
        "theta": state.theta,
        "covariance": state.noise.m.tolist(),
        "label": state.label,
    }


def state_from_dict(data: dict) -> PolarizationState:
    try:
        return PolarizationState(
            alpha_h=data["alpha_h"],
            alpha_v=data["alpha_v"],
            theta=data.get("theta", 0.0),
            noise=NoiseCovariance(data.get("covariance", np.eye(4))),
            label=data.get("label", ""),
        )
    except KeyError as exc:
        raise StateError(f"state file is missing field {exc.args[0]!r}") from None


def load_state(path) -> PolarizationState:
    return state_from_dict(json.loads(Path(path).read_text()))


def save_state(state: PolarizationState, path) -> None:
    Path(path).write_text(json.dumps(state_to_dict(state), indent=2) + "\n")
