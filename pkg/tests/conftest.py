"""Shared generators for random physical states and an independent linearization oracle."""

import math

import numpy as np
import pytest
from hypothesis import strategies as st

from cvpol.polstate import NoiseCovariance, PolarizationState

SEED = 20260101


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def _complex_to_real(u):
    r = np.empty((4, 4))
    for j in range(2):
        for k in range(2):
            z = u[j, k]
            r[2 * j : 2 * j + 2, 2 * k : 2 * k + 2] = [[z.real, -z.imag], [z.imag, z.real]]
    return r


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_physical_covariance(rng, max_r=1.0, max_thermal=0.5, correlated=True):
    """``S diag(nu) S^T`` with ``S`` passive * squeezers * passive, ``nu >= 1``."""
    nu = 1.0 + max_thermal * rng.random(2)
    m = np.diag([nu[0], nu[0], nu[1], nu[1]])
    r = max_r * rng.random(2)
    sq = np.diag([math.exp(-r[0]), math.exp(r[0]), math.exp(-r[1]), math.exp(r[1])])
    if correlated:
        s = _complex_to_real(random_unitary(rng)) @ sq @ _complex_to_real(random_unitary(rng))
    else:
        # independent per-mode phase rotations keep the cross block zero
        phases = np.diag(np.exp(1j * rng.uniform(0, 2 * math.pi, 2)))
        s = _complex_to_real(phases) @ sq
    m = s @ m @ s.T
    return NoiseCovariance(0.5 * (m + m.T))


def random_state(rng, correlated=True, max_alpha=50.0, **kw):
    return PolarizationState(
        alpha_h=max_alpha * rng.random(),
        alpha_v=max_alpha * rng.random(),
        theta=rng.uniform(0, 2 * math.pi),
        noise=random_physical_covariance(rng, correlated=correlated, **kw),
    )


@st.composite
def physical_states(draw, correlated=True):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_state(np.random.default_rng(seed), correlated=correlated)


def classical_stokes(a_h, a_v):
    return np.array(
        [
            abs(a_h) ** 2 + abs(a_v) ** 2,
            abs(a_h) ** 2 - abs(a_v) ** 2,
            2 * (np.conj(a_h) * a_v).real,
            2 * (np.conj(a_h) * a_v).imag,
        ]
    )


def stokes_gradient(state):
    """Jacobian of the classical Stokes map in the quadratures ``(H+, H-, V+, V-)``.

    Independent of the closed-form Stokes variance expressions: it only uses
    the classical Stokes map and ``a = (alpha + (X+ + i X-)/2) e^{i phase}``.
    """
    h = 0.1  # Stokes maps are quadratic, so central differences are exact

    def fields(d):
        a_h = state.alpha_h + 0.5 * (d[0] + 1j * d[1])
        a_v = (state.alpha_v + 0.5 * (d[2] + 1j * d[3])) * np.exp(1j * state.theta)
        return classical_stokes(a_h, a_v)

    g = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        g[:, k] = (fields(e) - fields(-e)) / (2 * h)
    return g


def gradient_variances(state):
    """First-order propagation ``g m g^T``."""
    g = stokes_gradient(state)
    return np.einsum("ik,kl,il->i", g, state.noise.m, g)
