"""Direct-detection channel capacity of coherent and squeezed polarization channels.

Photon bookkeeping: a signal of variance ``V_s`` costs ``V_s / 4`` sideband
photons and squeezing a dimension to variance ``v`` costs the
minimum-uncertainty amount ``(v + 1/v - 2) / 4``. Closed forms are exact
under that bookkeeping; ``optimize_partition`` reproduces them numerically
with nested golden-section searches in the kernel backend.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from scipy.optimize import bisect

from cvpol._backend import kernels

__all__ = [
    "SCHEMES",
    "PhotonBudget",
    "Allocation",
    "SchemeResult",
    "ExperimentalReport",
    "CapacityTable",
    "shannon_capacity",
    "squeezing_photons",
    "capacity_coh_i",
    "capacity_coh_ii",
    "capacity_coh_iii",
    "capacity_sqz1_i",
    "capacity_sqz1_ii",
    "capacity_sqz2_ii",
    "best_coherent",
    "optimize_partition",
    "coherent_crossover",
    "experimental_capacity",
    "capacity_curve",
]

SCHEMES = ("coh_i", "coh_ii", "coh_iii", "sqz1_i", "sqz1_ii", "sqz2_ii")
_SCHEME_IDS = {
    "coh_i": kernels.COH_I,
    "coh_ii": kernels.COH_II,
    "coh_iii": kernels.COH_III,
    "sqz1_i": kernels.SQZ1_I,
    "sqz1_ii": kernels.SQZ1_II,
    "sqz2_ii": kernels.SQZ2_II,
    "sqz2_iii": kernels.SQZ2_III,
}
LARGE_N_EPSILON = 2.0 / 3.0


@dataclass(frozen=True)
class PhotonBudget:
    """Mean sideband photons per bandwidth-second, signal and squeezing combined."""

    n_bar: float

    def __post_init__(self):
        if not (self.n_bar >= 0 and math.isfinite(self.n_bar)):
            raise ValueError(f"photon budget must be finite and >= 0, got {self.n_bar}")

    @classmethod
    def of(cls, n) -> PhotonBudget:
        return n if isinstance(n, cls) else cls(float(n))

    def signal_variance(self, photons: float) -> float:
        return 4.0 * photons


@dataclass(frozen=True)
class Allocation:
    """Per-dimension photon split. ``epsilon`` is the receiver beamsplitter transmittivity."""

    signal: tuple
    squeezing: tuple
    epsilon: float | None = None

    @property
    def total(self) -> float:
        return math.fsum(self.signal) + math.fsum(self.squeezing)

    def to_dict(self) -> dict:
        out = {"signal": list(self.signal), "squeezing": list(self.squeezing)}
        if self.epsilon is not None:
            out["epsilon"] = self.epsilon
        return out


@dataclass(frozen=True)
class SchemeResult:
    scheme: str
    capacity_bits: float
    allocation: Allocation = field(repr=False)

    def to_dict(self) -> dict:
        return {"scheme": self.scheme, "capacity_bits": self.capacity_bits, "allocation": self.allocation.to_dict()}


def shannon_capacity(r: float) -> float:
    """Bits per dimension for signal-to-noise ratio ``r``."""
    if r < 0:
        raise ValueError(f"signal-to-noise ratio must be >= 0, got {r}")
    return 0.5 * math.log2(1.0 + r)


def squeezing_photons(v: float) -> float:
    """Photon cost of a minimum-uncertainty variance ``v`` (equals sinh^2 r)."""
    if v <= 0:
        raise ValueError(f"variance must be positive, got {v}")
    return (v + 1.0 / v - 2.0) / 4.0


def _allocation(scheme: str, n: float, x) -> Allocation:
    if scheme == "coh_i":
        return Allocation((n,), (0.0,))
    if scheme == "coh_ii":
        return Allocation((n * x[0], n * (1.0 - x[0])), (0.0, 0.0))
    if scheme == "coh_iii":
        eps, s1 = x[0], x[1]
        rest = 0.5 * n * (1.0 - s1)
        return Allocation((n * s1, rest, rest), (0.0, 0.0, 0.0), eps)
    if scheme == "sqz1_i":
        return Allocation((n * (1.0 - x[0]),), (n * x[0],))
    if scheme == "sqz1_ii":
        q, s = x[0], x[1]
        signal = n * (1.0 - q)
        # first dimension unsqueezed, second carries the squeezing
        return Allocation((signal * s, signal * (1.0 - s)), (0.0, n * q))
    if scheme == "sqz2_ii":
        d, q1, q2 = x[0], x[1], x[2]
        a, b = n * d, n * (1.0 - d)
        return Allocation((a * (1.0 - q1), b * (1.0 - q2)), (a * q1, b * q2))
    if scheme == "sqz2_iii":
        eps, s1, q = x[0], x[1], x[2]
        m = 0.5 * n * (1.0 - s1)
        return Allocation((n * s1, m * (1.0 - q), m * (1.0 - q)), (0.0, m * q, m * q), eps)
    raise ValueError(f"unknown scheme {scheme!r}")


def optimize_partition(scheme: str, n_bar, tol: float = 1e-10) -> SchemeResult:
    """Numerically maximize capacity over the photon split (and ``epsilon``).

    ``scheme`` may also be ``"sqz2_iii"``: two squeezed beams read out on
    three Stokes dimensions through a beamsplitter of transmittivity
    ``epsilon``. Its optimum collapses onto ``sqz2_ii`` with ``epsilon -> 1``.
    Raises ``RuntimeError`` if a search fails to converge.
    """
    if scheme not in _SCHEME_IDS:
        raise ValueError(f"unknown scheme {scheme!r}")
    n = PhotonBudget.of(n_bar).n_bar
    bits, x = kernels.optimize_scheme(_SCHEME_IDS[scheme], n, tol)
    return SchemeResult(scheme, max(float(bits), 0.0), _allocation(scheme, n, x))


def _closed(scheme: str, n_bar, bits_fn, allocation: Allocation | None = None) -> SchemeResult:
    n = PhotonBudget.of(n_bar).n_bar
    if allocation is None:
        allocation = optimize_partition(scheme, n).allocation
    return SchemeResult(scheme, bits_fn(n), allocation)


def capacity_coh_i(n_bar) -> SchemeResult:
    """One coherent dimension: ``1/2 log2(1 + 4 n)``."""
    n = PhotonBudget.of(n_bar).n_bar
    return _closed("coh_i", n, lambda n: 0.5 * math.log2(1.0 + 4.0 * n), Allocation((n,), (0.0,)))


def capacity_coh_ii(n_bar) -> SchemeResult:
    """Two coherent dimensions with equal signal: ``log2(1 + 2 n)``."""
    n = PhotonBudget.of(n_bar).n_bar
    return _closed("coh_ii", n, lambda n: math.log2(1.0 + 2.0 * n), Allocation((n / 2, n / 2), (0.0, 0.0)))


def capacity_coh_iii(n_bar, epsilon: float | str = LARGE_N_EPSILON) -> SchemeResult:
    """Three coherent dimensions split by a receiver beamsplitter.

    With a fixed ``epsilon`` the photons go in equal thirds, giving
    ``1/2 log2(1 + (1-eps) 4n/3) + log2(1 + eps 4n/3)``; at ``eps = 2/3``
    this is the large-``n`` optimum. ``epsilon="auto"`` optimizes both the
    split and ``epsilon``, which beats the fixed form at small ``n``.
    """
    if epsilon == "auto":
        return optimize_partition("coh_iii", n_bar)
    eps = float(epsilon)
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1) or be 'auto', got {epsilon!r}")
    n = PhotonBudget.of(n_bar).n_bar
    third = n / 3.0

    def bits(n):
        return 0.5 * math.log2(1.0 + (1.0 - eps) * 4.0 * n / 3.0) + math.log2(1.0 + eps * 4.0 * n / 3.0)

    return _closed("coh_iii", n, bits, Allocation((third, third, third), (0.0, 0.0, 0.0), eps))


def capacity_sqz1_i(n_bar) -> SchemeResult:
    """One squeezed dimension: ``log2(1 + 2 n)``; squeezing share is ``n / (2n + 1)``."""
    n = PhotonBudget.of(n_bar).n_bar
    sq = n * n / (2.0 * n + 1.0)
    return _closed("sqz1_i", n, lambda n: math.log2(1.0 + 2.0 * n), Allocation((n - sq,), (sq,)))


def capacity_sqz1_ii(n_bar) -> SchemeResult:
    """One squeezed beam read on two dimensions: ``3/2 log2(1 + 4n/3)``."""
    return _closed("sqz1_ii", n_bar, lambda n: 1.5 * math.log2(1.0 + 4.0 * n / 3.0))


def capacity_sqz2_ii(n_bar) -> SchemeResult:
    """Two squeezed dimensions: ``2 log2(1 + n)``."""
    return _closed("sqz2_ii", n_bar, lambda n: 2.0 * math.log2(1.0 + n))


_CLOSED_FORMS = {
    "coh_i": capacity_coh_i,
    "coh_ii": capacity_coh_ii,
    "coh_iii": capacity_coh_iii,
    "sqz1_i": capacity_sqz1_i,
    "sqz1_ii": capacity_sqz1_ii,
    "sqz2_ii": capacity_sqz2_ii,
}


def best_coherent(n_bar) -> SchemeResult:
    """Largest of the three coherent schemes (``coh_iii`` at ``epsilon = 2/3``)."""
    results = (capacity_coh_i(n_bar), capacity_coh_ii(n_bar), capacity_coh_iii(n_bar))
    return max(results, key=lambda r: r.capacity_bits)


def coherent_crossover(lo: float = 1.0, hi: float = 100.0, xtol: float = 1e-4) -> float:
    """Photon number above which three coherent dimensions beat two."""

    def diff(n):
        return capacity_coh_iii(n).capacity_bits - capacity_coh_ii(n).capacity_bits

    return float(bisect(diff, lo, hi, xtol=xtol))


class ExperimentalReport(NamedTuple):
    n_sq_per_dim: float
    n_bar: float
    squeezed_bits: float
    coherent_bits: float
    coherent_scheme: str

    @property
    def ratio(self) -> float:
        return self.squeezed_bits / self.coherent_bits if self.coherent_bits > 0 else 1.0

    @property
    def gain_percent(self) -> float:
        return 100.0 * (self.ratio - 1.0)

    def to_dict(self) -> dict:
        return {**self._asdict(), "ratio": self.ratio, "gain_percent": self.gain_percent}


def experimental_capacity(n_sq_per_dim: float) -> ExperimentalReport:
    """Two squeezed dimensions holding ``n_sq_per_dim`` squeezing photons each.

    Optimal signal matches the squeezing photons in each dimension, so the
    total budget is four times the per-dimension squeezing.
    """
    if n_sq_per_dim < 0:
        raise ValueError("squeezing photons must be >= 0")
    n = 4.0 * n_sq_per_dim
    coh = best_coherent(n)
    return ExperimentalReport(n_sq_per_dim, n, capacity_sqz2_ii(n).capacity_bits, coh.capacity_bits, coh.scheme)


@dataclass(frozen=True)
class CapacityTable:
    schemes: tuple
    rows: tuple  # (n_bar, bits...)

    def column(self, scheme: str) -> list:
        j = self.schemes.index(scheme) + 1
        return [row[j] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n_bar", *self.schemes])
        for row in self.rows:
            writer.writerow([f"{v:.6g}" for v in row])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"schemes": list(self.schemes), "rows": [list(r) for r in self.rows]}


def _closed_bits(scheme: str, n: float) -> float:
    # curve generation only needs the value, not the optimizer's allocation
    if scheme == "sqz1_ii":
        return 1.5 * math.log2(1.0 + 4.0 * n / 3.0)
    if scheme == "sqz2_ii":
        return 2.0 * math.log2(1.0 + n)
    return _CLOSED_FORMS[scheme](n).capacity_bits


def capacity_curve(grid, schemes=SCHEMES) -> CapacityTable:
    """Closed-form capacities on an ascending ``n_bar`` grid (``0`` allowed)."""
    grid = [float(n) for n in grid]
    schemes = tuple(schemes)
    if not grid or not schemes:
        raise ValueError("capacity curve needs a non-empty grid and scheme list")
    if grid[0] < 0 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be non-negative and strictly ascending")
    unknown = [s for s in schemes if s not in _CLOSED_FORMS]
    if unknown:
        raise ValueError(f"unknown schemes: {', '.join(unknown)}")
    rows = tuple((n, *(_closed_bits(s, n) for s in schemes)) for n in grid)
    return CapacityTable(schemes, rows)
