"""Pure-Python implementations of the hot kernels.

Mirrors ``_kernels.pyx`` function for function; used when the compiled
extension is unavailable or ``CVPOL_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
LOG2 = math.log(2.0)

# scheme ids shared with the compiled kernel
COH_I, COH_II, COH_III, SQZ1_I, SQZ1_II, SQZ2_II, SQZ2_III = range(7)


def stokes_variances_batch(alpha_h, alpha_v, theta, m):
    """Linearized Stokes variances for ``k`` states at once.

    ``m`` has shape (k, 4, 4); returns an array of shape (k, 4).
    """
    ah = np.asarray(alpha_h, dtype=float)
    av = np.asarray(alpha_v, dtype=float)
    th = np.asarray(theta, dtype=float)
    m = np.asarray(m, dtype=float)
    ah2, av2, cross = ah * ah, av * av, 2.0 * ah * av
    out = np.empty(ah.shape + (4,))
    out[..., 0] = ah2 * m[..., 0, 0] + av2 * m[..., 2, 2] + cross * m[..., 0, 2]
    out[..., 1] = ah2 * m[..., 0, 0] + av2 * m[..., 2, 2] - cross * m[..., 0, 2]
    for j, t in ((2, th), (3, th - 0.5 * math.pi)):
        c, s = np.cos(t), np.sin(t)
        # dX_V(-t) = c X_V+ - s X_V-,  dX_H(t) = c X_H+ + s X_H-
        var_v = c * c * m[..., 2, 2] + s * s * m[..., 3, 3] - 2.0 * c * s * m[..., 2, 3]
        var_h = c * c * m[..., 0, 0] + s * s * m[..., 1, 1] + 2.0 * c * s * m[..., 0, 1]
        cov = c * c * m[..., 0, 2] - c * s * m[..., 0, 3] + s * c * m[..., 1, 2] - s * s * m[..., 1, 3]
        out[..., j] = ah2 * var_v + av2 * var_h + cross * cov
    return out


def golden_max(f, a, b, tol=1e-10, max_iter=200):
    """Maximize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``."""
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    else:
        raise RuntimeError("golden-section search did not converge")
    return (c, fc) if fc >= fd else (d, fd)


def squeezed_variance(n_sq):
    """Noise variance bought by ``n_sq`` squeezing photons (minimum uncertainty)."""
    if n_sq <= 0.0:
        return 1.0
    root = math.sqrt(n_sq + 1.0) + math.sqrt(n_sq)
    return 1.0 / (root * root)


def half_log2(x):
    return 0.5 * math.log1p(x) / LOG2


def _squeezed_dimension(m, noise_gain, tol):
    """Best ``(share, bits)`` for one squeezed dimension holding ``m`` photons.

    ``noise_gain`` is the receiver transmittivity in front of the detector.
    """
    if m <= 0.0:
        return 0.0, 0.0

    def bits(q):
        v = squeezed_variance(q * m)
        return half_log2(noise_gain * 4.0 * m * (1.0 - q) / (noise_gain * v + 1.0 - noise_gain))

    return golden_max(bits, 0.0, 1.0, tol)


def optimize_scheme(scheme, n, tol=1e-10):
    """Numerically maximize capacity for ``scheme`` at ``n`` sideband photons.

    Returns ``(bits, x)`` with ``x`` a 4-vector of decision variables whose
    meaning depends on the scheme (see ``capacity.optimize_partition``).
    """
    x = [0.0, 0.0, 0.0, 0.0]
    if n <= 0.0:
        if scheme in (COH_III, SQZ2_III):
            x[0] = 1.0
        return 0.0, x
    if scheme == COH_I:
        return half_log2(4.0 * n), x
    if scheme == COH_II:
        s, bits = golden_max(lambda s: half_log2(4.0 * n * s) + half_log2(4.0 * n * (1.0 - s)), 0.0, 1.0, tol)
        x[0] = s
        return bits, x
    if scheme == COH_III:
        def inner(eps):
            return golden_max(
                lambda s1: half_log2((1.0 - eps) * 4.0 * n * s1)
                + 2.0 * half_log2(eps * 2.0 * n * (1.0 - s1)),
                0.0,
                1.0,
                tol,
            )

        eps, bits = golden_max(lambda e: inner(e)[1], 0.0, 1.0, tol)
        x[0], x[1] = eps, inner(eps)[0]
        return bits, x
    if scheme == SQZ1_I:
        q, bits = _squeezed_dimension(n, 1.0, tol)
        x[0] = q
        return bits, x
    if scheme == SQZ1_II:
        def inner(q):
            v = squeezed_variance(q * n)
            budget = 4.0 * n * (1.0 - q)
            return golden_max(
                lambda s: half_log2(budget * s) + half_log2(budget * (1.0 - s) / v), 0.0, 1.0, tol
            )

        q, bits = golden_max(lambda q: inner(q)[1], 0.0, 1.0, tol)
        x[0], x[1] = q, inner(q)[0]
        return bits, x
    if scheme == SQZ2_II:
        def split(d):
            return _squeezed_dimension(n * d, 1.0, tol)[1] + _squeezed_dimension(n * (1.0 - d), 1.0, tol)[1]

        d, bits = golden_max(split, 0.0, 1.0, tol)
        x[0], x[1], x[2] = d, _squeezed_dimension(n * d, 1.0, tol)[0], _squeezed_dimension(n * (1.0 - d), 1.0, tol)[0]
        return bits, x
    if scheme == SQZ2_III:
        # S2, S3 squeezed (shared v) behind transmittivity eps, S1 anti-squeezed (1/v) on the reflection
        def given_eps_s1(eps, s1):
            m = 0.5 * n * (1.0 - s1)

            def bits(q):
                v = squeezed_variance(q * m)
                r23 = eps * 4.0 * m * (1.0 - q) / (eps * v + 1.0 - eps)
                r1 = (1.0 - eps) * 4.0 * n * s1 / ((1.0 - eps) / v + eps)
                return 2.0 * half_log2(r23) + half_log2(r1)

            return golden_max(bits, 0.0, 1.0, tol)

        def given_eps(eps):
            return golden_max(lambda s1: given_eps_s1(eps, s1)[1], 0.0, 1.0, tol)

        eps, bits = golden_max(lambda e: given_eps(e)[1], 0.0, 1.0, tol)
        s1 = given_eps(eps)[0]
        x[0], x[1], x[2] = eps, s1, given_eps_s1(eps, s1)[0]
        return bits, x
    raise ValueError(f"unknown scheme id {scheme}")
