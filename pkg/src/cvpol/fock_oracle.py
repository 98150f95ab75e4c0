"""Exact number-basis evaluation of Stokes statistics.

Independent check on the linearized formulas: states are prepared with
matrix exponentials of the displacement and squeezing generators, and
the Stokes operators are built directly from ladder operators. Bright
two-mode product states are evaluated term by term from single-mode
moments, so cutoffs of ~10^4 per mode stay cheap.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from cvpol.polstate import NoiseCovariance, PolarizationState
from cvpol.stokes import stokes_means, stokes_variances_general

__all__ = [
    "TruncationError",
    "NonHermitianError",
    "StokesOperator",
    "FockState",
    "OracleSpec",
    "ComparisonRow",
    "ComparisonReport",
    "annihilation_matrix",
    "cutoff_for",
    "displaced_squeezed_state",
    "stokes_matrices",
    "mean_and_variance",
    "stokes_moments",
    "commutator_residuals",
    "squeezed_covariance_block",
    "oracle_compare",
]

STATISTICS = ("S0", "S1", "S2", "S3", "V0", "V1", "V2", "V3")
_NORM_TOL = 1e-9
_TAIL_TOL = 1e-8
_HERMITIAN_TOL = 1e-12
_DENSE_LIMIT = 4000


class TruncationError(ValueError):
    """Cutoff too small for the requested state."""


class NonHermitianError(ValueError):
    pass


def annihilation_matrix(n: int) -> sp.csr_matrix:
    """Lowering operator on levels 0..n."""
    if n < 2:
        raise ValueError("cutoff must be at least 2")
    return sp.diags(np.sqrt(np.arange(1, n + 1, dtype=float)), 1, format="csr").astype(complex)


def cutoff_for(alpha: complex, r: float = 0.0) -> int:
    """Cutoff obeying ``N >= |a|^2 + 10|a| + 20``, widened for squeezing tails."""
    a = abs(alpha)
    n = a * a + 10.0 * a * math.exp(abs(r)) + 20.0
    if r:
        # squeezed-vacuum populations fall off like tanh(r)^n
        n += 28.0 / -math.log(math.tanh(abs(r)))
    return int(math.ceil(n))


def _tail_population(vec: np.ndarray) -> float:
    return float(np.sum(np.abs(vec[-2:]) ** 2))


def displaced_squeezed_state(alpha: complex, r: float = 0.0, phi: float = 0.0, n: int | None = None) -> np.ndarray:
    """``D(alpha) S(r e^{i phi}) |0>`` on levels 0..n.

    ``phi = 0`` squeezes the amplitude quadrature ``a + a^dagger`` of a
    real-amplitude beam.
    """
    policy = cutoff_for(alpha, r)
    if n is None:
        n = policy
    elif n < abs(alpha) ** 2 + 10 * abs(alpha) + 20:
        raise TruncationError(f"cutoff {n} is below the policy minimum for |alpha| = {abs(alpha):.3g}")
    return _cached_state(complex(alpha), float(r), float(phi), int(n)).copy()


@lru_cache(maxsize=16)
def _cached_state(alpha: complex, r: float, phi: float, n: int) -> np.ndarray:
    a = annihilation_matrix(n)
    ad = a.conj().T.tocsr()
    vec = np.zeros(n + 1, dtype=complex)
    vec[0] = 1.0
    if r:
        xi = r * np.exp(1j * phi)
        gen = 0.5 * (np.conj(xi) * (a @ a) - xi * (ad @ ad))
        vec = _expm_apply(gen, vec)
    if alpha:
        vec = _expm_apply(alpha * ad - np.conj(alpha) * a, vec)
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > _NORM_TOL:
        raise TruncationError(f"state norm {norm:.12f} deviates from 1; raise the cutoff")
    if _tail_population(vec) > _TAIL_TOL:
        raise TruncationError("top Fock levels are populated; raise the cutoff")
    return vec


def _expm_apply(gen: sp.csr_matrix, vec: np.ndarray) -> np.ndarray:
    if gen.shape[0] <= 200:
        from scipy.linalg import expm

        return expm(gen.toarray()) @ vec
    return expm_multiply(gen.tocsc(), vec)


@dataclass(frozen=True)
class StokesOperator:
    """Two-mode operator ``sum_k c_k A_k (x) B_k`` (H factor first)."""

    name: str
    terms: tuple

    @property
    def dim(self) -> int:
        return self.terms[0][1].shape[0] ** 2

    def matrix(self) -> sp.csr_matrix:
        out = None
        for c, a, b in self.terms:
            term = c * sp.kron(a, b, format="csr")
            out = term if out is None else out + term
        return out.tocsr()


def stokes_matrices(n: int) -> tuple[StokesOperator, ...]:
    """S0..S3 with theta = 0; the relative phase lives in the V-mode state."""
    a = annihilation_matrix(n)
    ad = a.conj().T.tocsr()
    num = (ad @ a).tocsr()
    eye = sp.identity(n + 1, dtype=complex, format="csr")
    return (
        StokesOperator("S0", ((1.0, num, eye), (1.0, eye, num))),
        StokesOperator("S1", ((1.0, num, eye), (-1.0, eye, num))),
        StokesOperator("S2", ((1.0, ad, a), (1.0, a, ad))),
        StokesOperator("S3", ((1j, a, ad), (-1j, ad, a))),
    )


@dataclass(frozen=True)
class FockState:
    """Two-mode state, stored as a product ``h (x) v`` or as a full vector."""

    cutoff: int
    h: np.ndarray | None = None
    v: np.ndarray | None = None
    full: np.ndarray | None = None

    def __post_init__(self):
        if self.full is None and (self.h is None or self.v is None):
            raise ValueError("need either both mode vectors or the full amplitude vector")
        if abs(self.norm - 1.0) > _NORM_TOL:
            raise TruncationError(f"state norm {self.norm:.12f} deviates from 1")

    @property
    def is_product(self) -> bool:
        return self.full is None

    @property
    def amplitudes(self) -> np.ndarray:
        if self.full is not None:
            return self.full
        return np.kron(self.h, self.v)

    @property
    def norm(self) -> float:
        if self.full is not None:
            return float(np.linalg.norm(self.full))
        return float(np.linalg.norm(self.h) * np.linalg.norm(self.v))

    @classmethod
    def product(cls, h: np.ndarray, v: np.ndarray) -> FockState:
        if h.shape != v.shape:
            raise ValueError("mode vectors must share one cutoff")
        return cls(cutoff=h.shape[0] - 1, h=h, v=v)


def _expect(op, vec) -> complex:
    return complex(np.vdot(vec, op @ vec))


def _check_hermitian_matrix(op: sp.spmatrix) -> None:
    if abs(op - op.conj().T).max() > _HERMITIAN_TOL:
        raise NonHermitianError("operator is not Hermitian")


def mean_and_variance(op, state: FockState) -> tuple[float, float]:
    """``(<op>, <op^2> - <op>^2)`` of a Hermitian operator."""
    if isinstance(op, StokesOperator) and state.is_product:
        mean = sum(c * _expect(a, state.h) * _expect(b, state.v) for c, a, b in op.terms)
        second = sum(
            c1 * c2 * _expect(a1 @ a2, state.h) * _expect(b1 @ b2, state.v)
            for c1, a1, b1 in op.terms
            for c2, a2, b2 in op.terms
        )
    else:
        matrix = op.matrix() if isinstance(op, StokesOperator) else sp.csr_matrix(op)
        _check_hermitian_matrix(matrix)
        vec = state.amplitudes
        applied = matrix @ vec
        mean = complex(np.vdot(vec, applied))
        second = complex(np.vdot(applied, applied))
    scale = max(1.0, abs(mean))
    if abs(mean.imag) > 1e-10 * scale or abs(second.imag) > 1e-10 * max(1.0, abs(second)):
        raise NonHermitianError("expectation value is not real")
    return mean.real, second.real - mean.real**2


def stokes_moments(state: FockState, operators=None) -> tuple[np.ndarray, np.ndarray]:
    """Exact means and variances of S0..S3."""
    operators = operators or stokes_matrices(state.cutoff)
    pairs = [mean_and_variance(op, state) for op in operators]
    return np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs])


def _interior_projector(n: int, max_total: int) -> sp.csr_matrix:
    levels = np.arange(n + 1)
    keep = (levels[:, None] + levels[None, :]).ravel() <= max_total
    return sp.diags(keep.astype(float), format="csr")


def commutator_residuals(n: int) -> dict:
    """Max-norm residuals of the Stokes algebra on states with total photons <= n - 2."""
    s0, s1, s2, s3 = (op.matrix() for op in stokes_matrices(n))
    p = _interior_projector(n, n - 2)

    def residual(x):
        x = (x @ p).tocsr()
        return float(abs(x).max()) if x.nnz else 0.0

    out = {
        "[S1,S2]-2iS3": residual(s1 @ s2 - s2 @ s1 - 2j * s3),
        "[S2,S3]-2iS1": residual(s2 @ s3 - s3 @ s2 - 2j * s1),
        "[S3,S1]-2iS2": residual(s3 @ s1 - s1 @ s3 - 2j * s2),
    }
    for name, s in (("S1", s1), ("S2", s2), ("S3", s3)):
        out[f"[S0,{name}]"] = residual(s0 @ s - s @ s0)
    return out


def squeezed_covariance_block(r: float, phi: float) -> tuple[float, float, float]:
    """``(V+, V-, C)`` of ``S(r e^{i phi})`` in the coherent-normalized convention."""
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    return ch - sh * math.cos(phi), ch + sh * math.cos(phi), -sh * math.sin(phi)


@dataclass(frozen=True)
class OracleSpec:
    """Product of two displaced squeezed beams; amplitudes real, theta on V."""

    alpha_h: float
    alpha_v: float = 0.0
    theta: float = 0.0
    r_h: float = 0.0
    phi_h: float = 0.0
    r_v: float = 0.0
    phi_v: float = 0.0
    label: str = ""

    def linearized(self) -> PolarizationState:
        noise = NoiseCovariance.from_modes(
            squeezed_covariance_block(self.r_h, self.phi_h), squeezed_covariance_block(self.r_v, self.phi_v)
        )
        return PolarizationState(self.alpha_h, self.alpha_v, self.theta, noise, self.label)

    def cutoff(self) -> int:
        return max(cutoff_for(self.alpha_h, self.r_h), cutoff_for(self.alpha_v, self.r_v))

    def fock(self, n: int | None = None) -> FockState:
        n = n or self.cutoff()
        h = displaced_squeezed_state(self.alpha_h, self.r_h, self.phi_h, n)
        v = displaced_squeezed_state(self.alpha_v, self.r_v, self.phi_v, n)
        # exp(i theta n) moves the relative phase of the theta = 0 operators into the state
        v = np.exp(1j * self.theta * np.arange(n + 1)) * v
        return FockState.product(h, v)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class ComparisonRow(NamedTuple):
    statistic: str
    linearized: float
    exact: float
    rel_dev: float


@dataclass(frozen=True)
class ComparisonReport:
    spec: OracleSpec
    rows: tuple
    cutoff: int
    linearization_suspect: bool

    @property
    def max_deviation(self) -> float:
        return max(row.rel_dev for row in self.rows)

    def passes(self, threshold: float) -> bool:
        return self.max_deviation <= threshold

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "cutoff": self.cutoff,
            "linearization_suspect": self.linearization_suspect,
            "rows": [row._asdict() for row in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def oracle_compare(spec: OracleSpec, n: int | None = None) -> ComparisonReport:
    """Linearized versus exact Stokes means and variances.

    Means are compared relative to max(|exact|, <S0>) so vanishing Stokes
    components do not blow up the ratio; variances relative to themselves.
    """
    state = spec.linearized()
    fock = spec.fock(n)
    exact_mean, exact_var = stokes_moments(fock)
    lin = np.concatenate([stokes_means(state), stokes_variances_general(state)])
    exact = np.concatenate([exact_mean, exact_var])
    scale = np.concatenate(
        [np.maximum(np.abs(exact_mean), exact_mean[0]), np.maximum(np.abs(exact_var), 1e-300)]
    )
    rows = tuple(
        ComparisonRow(name, float(l), float(e), float(abs(l - e) / s))
        for name, l, e, s in zip(STATISTICS, lin, exact, scale)
    )
    return ComparisonReport(spec, rows, fock.cutoff, state.linearization_suspect)
