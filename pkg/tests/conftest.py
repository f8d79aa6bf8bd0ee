"""Shared test helpers: random stable polynomials and a reference update loop."""

from __future__ import annotations

import numpy as np

from daglms import Polynomial, StepSizePolicy
from daglms.adapt import step_size


def random_roots(rng: np.random.Generator, degree: int, max_radius: float) -> list:
    """Random real-coefficient root set: real roots and conjugate pairs."""
    roots = []
    remaining = degree
    while remaining > 0:
        if remaining >= 2 and rng.random() < 0.5:
            r = max_radius * np.sqrt(rng.random())
            ang = rng.uniform(0.0, np.pi)
            z = r * np.exp(1j * ang)
            roots.extend([z, np.conj(z)])
            remaining -= 2
        else:
            roots.append(rng.uniform(-max_radius, max_radius))
            remaining -= 1
    return roots


def random_stable_poly(
    rng: np.random.Generator, max_degree: int = 2, max_radius: float = 0.95
) -> Polynomial:
    """Monic delay-operator polynomial with zeros inside ``max_radius``."""
    degree = int(rng.integers(0, max_degree + 1))
    if degree == 0:
        return Polynomial((1.0,))
    coeffs = np.poly(random_roots(rng, degree, max_radius))
    return Polynomial(tuple(np.real(coeffs)))


def reference_vslms(policy: StepSizePolicy, phis: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Plain tap-weight update loop, the no-shaping-filter oracle.

    Uses the same floating-point operation order as the engine so
    trajectories can be compared bit for bit.
    """
    n = phis.shape[1]
    theta = np.zeros(n)
    out = np.empty_like(phis)
    for t in range(phis.shape[0]):
        phi = phis[t]
        e0 = float(xs[t]) - float(np.dot(theta, phi))
        mu_t = step_size(policy, phi)
        theta = theta + (mu_t * e0) * phi
        out[t] = theta
    return out
