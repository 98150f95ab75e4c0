"""Stokes-operator statistics of linearized polarization states."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from cvpol._backend import kernels
from cvpol.polstate import PolarizationState, StateError

__all__ = [
    "StokesStatistics",
    "NoiseEllipsoid",
    "UncertaintyCheck",
    "UncertaintyReport",
    "PairBoundReport",
    "stokes_means",
    "stokes_variances_general",
    "stokes_variances_uncorrelated",
    "stokes_statistics",
    "uncertainty_products",
    "poincare_radius",
    "pair_squeezing_bound",
    "poincare_ellipsoid",
    "to_db",
]

_UNCERTAINTY_TOL = -1e-6
_PAIR_TOL = 1e-9
_CROSS_TOL = 1e-12


def to_db(variance, shot):
    """Variance relative to shot noise in dB."""
    return 10.0 * np.log10(np.asarray(variance, dtype=float) / shot)


@dataclass(frozen=True)
class StokesStatistics:
    mean: np.ndarray
    variance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(4)
        variance = np.array(self.variance, dtype=float).reshape(4)
        mean.setflags(write=False)
        variance.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "variance", variance)

    @property
    def photon_number(self) -> float:
        return float(self.mean[0])

    def normalized(self) -> np.ndarray:
        """Variances divided by the shot noise of an equal-power coherent beam."""
        return self.variance / self.photon_number

    def db(self) -> np.ndarray:
        return to_db(self.variance, self.photon_number)


def stokes_means(state: PolarizationState) -> np.ndarray:
    ah, av, th = state.alpha_h, state.alpha_v, state.theta
    return np.array(
        [ah * ah + av * av, ah * ah - av * av, 2 * ah * av * math.cos(th), 2 * ah * av * math.sin(th)]
    )


def stokes_variances_general(state: PolarizationState) -> np.ndarray:
    """V0..V3 including H-V cross correlations."""
    return kernels.stokes_variances_batch(
        np.array([state.alpha_h]), np.array([state.alpha_v]), np.array([state.theta]), state.noise.m[None]
    )[0]


def stokes_variances_uncorrelated(state: PolarizationState) -> np.ndarray:
    """V0..V3 for independent H and V noise, via the cos^2/sin^2 decomposition.

    Intra-mode X+/X- correlations enter through the ``sin(2 theta)`` terms,
    which vanish for pure amplitude- or phase-squeezed inputs.
    """
    if not state.noise.is_block_diagonal(_CROSS_TOL):
        raise StateError("H-V cross covariance is non-zero; use stokes_variances_general")
    ah2, av2 = state.alpha_h**2, state.alpha_v**2
    hp, hm, hc = state.noise.block("H")
    vp, vm, vc = state.noise.block("V")
    v01 = ah2 * hp + av2 * vp
    plus = av2 * hp + ah2 * vp
    minus = av2 * hm + ah2 * vm
    skew = av2 * hc - ah2 * vc

    def v2(theta):
        c, s = math.cos(theta), math.sin(theta)
        return c * c * plus + s * s * minus + 2 * s * c * skew

    return np.array([v01, v01, v2(state.theta), v2(state.theta - 0.5 * math.pi)])


def stokes_statistics(state: PolarizationState) -> StokesStatistics:
    return StokesStatistics(stokes_means(state), stokes_variances_general(state))


class UncertaintyCheck(NamedTuple):
    product: float
    bound: float
    slack: float
    holds: bool


class UncertaintyReport(NamedTuple):
    v1v2: UncertaintyCheck
    v2v3: UncertaintyCheck
    v3v1: UncertaintyCheck

    @property
    def all_hold(self) -> bool:
        return all(check.holds for check in self)


def _check(product, bound):
    slack = product - bound
    scale = max(abs(product), abs(bound), 1e-300)
    return UncertaintyCheck(product, bound, slack, slack / scale >= _UNCERTAINTY_TOL)


def uncertainty_products(stats: StokesStatistics) -> UncertaintyReport:
    """Check V1 V2 >= <S3>^2 and its cyclic permutations (relative tolerance 1e-6)."""
    v, s = stats.variance, stats.mean
    return UncertaintyReport(
        _check(v[1] * v[2], s[3] ** 2),
        _check(v[2] * v[3], s[1] ** 2),
        _check(v[3] * v[1], s[2] ** 2),
    )


def poincare_radius(stats: StokesStatistics) -> float:
    """Quantum Poincare radius sqrt(<S0^2> + 2<S0>)."""
    s0 = stats.mean[0]
    return math.sqrt(stats.variance[0] + s0 * s0 + 2.0 * s0)


class PairBoundReport(NamedTuple):
    sums: dict
    bound: float
    violations: tuple

    @property
    def holds(self) -> bool:
        return not self.violations


def pair_squeezing_bound(variances, n: float) -> PairBoundReport:
    """V_i + V_j >= <n> for all pairs of S1, S2, S3.

    Only guaranteed when at most one squeezed input was used; a violation
    flags a state outside that class.
    """
    v = np.asarray(variances, dtype=float)
    sums = {(i, j): float(v[i] + v[j]) for i, j in ((1, 2), (2, 3), (1, 3))}
    violations = tuple(pair for pair, total in sums.items() if total < n - _PAIR_TOL)
    return PairBoundReport(sums, float(n), violations)


@dataclass(frozen=True)
class NoiseEllipsoid:
    center: np.ndarray
    semi_axes: np.ndarray
    radial_thickness: float
    normalized: bool

    def to_dict(self) -> dict:
        return {
            "center": [float(c) for c in self.center],
            "semi_axes": [float(a) for a in self.semi_axes],
            "radial_thickness": float(self.radial_thickness),
            "normalized": self.normalized,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def poincare_ellipsoid(state: PolarizationState, normalize_to_shot: bool = True) -> NoiseEllipsoid:
    """Axis-aligned one-sigma noise ellipsoid at the tip of the Stokes vector."""
    stats = stokes_statistics(state)
    widths = np.sqrt(np.clip(stats.variance, 0.0, None))
    if normalize_to_shot:
        if stats.photon_number <= 0:
            raise StateError("cannot normalize the ellipsoid of a vacuum state")
        widths = widths / math.sqrt(stats.photon_number)
    return NoiseEllipsoid(stats.mean[1:].copy(), widths[1:], float(widths[0]), normalize_to_shot)
