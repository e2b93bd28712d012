"""Independent oracles and random-instance generators shared by the tests.

Everything here deliberately avoids the library's own computational paths:
quadrature instead of closed forms, majorization instead of the simplex,
explicit measurement simulation instead of trace identities.
"""

import numpy as np
from numpy.polynomial.hermite_e import hermegauss


def haar_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_permutation_mixture(rng, n, terms):
    """Exactly bi-stochastic matrix as a convex mixture of random permutations."""
    weights = rng.dirichlet(np.ones(terms))
    out = np.zeros((n, n))
    for w in weights:
        perm = rng.permutation(n)
        out[np.arange(n), perm] += w
    return out


def sinkhorn_bistochastic(rng, n, iters=4000):
    """Full-support bi-stochastic matrix via Sinkhorn normalization."""
    m = rng.uniform(0.1, 1.0, size=(n, n))
    for _ in range(iters):
        m /= m.sum(axis=1, keepdims=True)
        m /= m.sum(axis=0, keepdims=True)
    return m


def majorization_max_range(levels, ratios):
    """Closed-form optimum of the max-range design problem.

    A vector mu is reachable as (bi-stochastic) @ levels iff mu is majorized
    by levels; with mu = a + ratios * d and the trace fixing a, every sorted
    partial-sum constraint is linear in d, so the optimum is a minimum of
    ratios of top-k mean excesses.
    """
    lam = np.asarray(levels, dtype=float)
    t = np.asarray(ratios, dtype=float)
    n = lam.size
    top_lam = np.cumsum(np.sort(lam)[::-1])
    top_t = np.cumsum(np.sort(t)[::-1])
    k = np.arange(1, n)
    num = top_lam[:-1] - k * lam.sum() / n
    den = top_t[:-1] - k * t.mean()
    mask = den > 1e-14
    return float(np.min(num[mask] / den[mask]))


def gauss_hermite_prior(deg=140):
    """Nodes/weights integrating f against the unit-variance Gaussian prior."""
    x, w = hermegauss(deg)
    return x, w / np.sqrt(2.0 * np.pi)


def gamma_eta_by_quadrature(amplitudes, levels, tau, deg=140):
    """Prior-averaged state and first moment via direct integration."""
    nodes, weights = gauss_hermite_prior(deg)
    n = len(levels)
    gamma = np.zeros((n, n), dtype=complex)
    eta = np.zeros((n, n), dtype=complex)
    for omega, w in zip(nodes, weights):
        psi = np.exp(-1j * tau * omega * np.asarray(levels)) * amplitudes
        rho = np.outer(psi, psi.conj())
        gamma += w * rho
        eta += w * omega * rho
    return gamma, eta


def t_operator_by_quadrature(l_mat, levels, tau, deg=140):
    nodes, weights = gauss_hermite_prior(deg)
    levels = np.asarray(levels, dtype=float)
    n = len(levels)
    out = np.zeros((n, n), dtype=complex)
    for omega, w in zip(nodes, weights):
        u = np.diag(np.exp(1j * tau * omega * levels))
        out += w * (u @ (l_mat @ l_mat - 2.0 * omega * l_mat) @ u.conj().T)
    return out


def bmse_by_measurement_simulation(amplitudes, levels, tau, l_mat, deg=160):
    """Average squared error of the eigen-measurement of the observable.

    Diagonalizes the observable into projectors with the eigenvalues as
    estimates and integrates the defining double sum over the prior grid.
    """
    estimates, vecs = np.linalg.eigh(l_mat)
    nodes, weights = gauss_hermite_prior(deg)
    total = 0.0
    levels = np.asarray(levels, dtype=float)
    for omega, w in zip(nodes, weights):
        psi = np.exp(-1j * tau * omega * levels) * amplitudes
        probs = np.abs(vecs.conj().T @ psi) ** 2
        total += w * float(probs @ (omega - estimates) ** 2)
    return total


def wrapped_gaussian_fourier_by_quadrature(variance, t, k, wraps=60, points=200_001):
    """Fourier coefficient of the wrapped Gaussian by direct integration."""
    phi = np.linspace(-np.pi, np.pi, points)
    density = np.zeros_like(phi)
    width = np.sqrt(variance)
    for wrap in range(-wraps, wraps + 1):
        omega = (phi + 2.0 * np.pi * wrap) / t
        density += np.exp(-0.5 * omega**2 / variance) / (
            np.sqrt(2.0 * np.pi) * width * t
        )
    integrand = density * np.exp(-1j * k * phi)
    return np.trapezoid(integrand, phi)


def apply_swaps(n, swaps):
    """Arrangement produced by exchanging positions (i, j) in order."""
    arrangement = list(range(n))
    for i, j in swaps:
        arrangement[i], arrangement[j] = arrangement[j], arrangement[i]
    return tuple(arrangement)
