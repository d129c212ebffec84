"""Canonical benchmark systems with closed-form answers.

Two standard configurations recur throughout the test suite and the CLI
scenarios: the two-level double-slit analogue with a nearly orthogonal
post-selection, and the three-state "boxes" configuration measured with
projectors.
"""

from __future__ import annotations

import math

import numpy as np

from .quantum import FiniteSystem, ImpulsiveCoupling, TransitionSpec


def two_level(epsilon: float, total_time: float = 1.0):
    """Two-level system, zero Hamiltonian, position-like observable
    diag(1, 2), prepared in (|1> + |2>)/sqrt(2) and post-selected in
    the nearly orthogonal N1 (|1> - (1 - eps)|2>).

    The virtual-path amplitudes are 1 and eps - 1 (up to normalization),
    the weak mean is 2 - 1/eps and the weak second moment (4 eps - 3)/eps.
    """
    n1 = 1.0 / math.sqrt(1.0 + (1.0 - epsilon) ** 2)
    sys = FiniteSystem(
        hamiltonian=np.zeros((2, 2), dtype=complex),
        observable=np.diag([1.0, 2.0]).astype(complex),
    )
    spec = TransitionSpec(
        psi0=np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
        psi1=np.array([1.0, -(1.0 - epsilon)], dtype=complex) * n1,
        total_time=total_time,
        coupling=ImpulsiveCoupling(t0=total_time / 2.0),
    )
    return sys, spec


def two_level_weak_mean(epsilon: float) -> float:
    return 2.0 - 1.0 / epsilon


def two_level_weak_second(epsilon: float) -> float:
    return (4.0 * epsilon - 3.0) / epsilon


def two_level_pointer_mean(epsilon: float, alpha: float) -> float:
    """Exact mean pointer reading of the two-level benchmark for a Gaussian
    profile of standard deviation alpha.

    The overlap of the two shifted pointer Gaussians enters through
    E = exp(-1/(4 alpha^2)):

        <f> = (1 + 2 (1-eps)^2 - 3 (1-eps) E) / (1 + (1-eps)^2 - 2 (1-eps) E)
    """
    u = 1.0 - epsilon
    e = math.exp(-1.0 / (4.0 * alpha * alpha))
    return (1.0 + 2.0 * u * u - 3.0 * u * e) / (1.0 + u * u - 2.0 * u * e)


def two_level_pointer_second(epsilon: float, alpha: float) -> float:
    """Exact second moment of the two-level pointer reading (same
    conventions as :func:`two_level_pointer_mean`)."""
    u = 1.0 - epsilon
    e = math.exp(-1.0 / (4.0 * alpha * alpha))
    half = 0.5 * alpha * alpha
    num = (1.0 + half) + (4.0 + half) * u * u - 2.0 * u * e * (2.25 + half)
    den = 1.0 + u * u - 2.0 * u * e
    return num / den


def three_box(total_time: float = 1.0):
    """Three-state system with zero Hamiltonian, observable diag(1, 2, 3),
    prepared in (|1>+|2>+|3>)/sqrt(3), post-selected in (|1>+|2>-|3>)/sqrt(3).

    Virtual-path amplitudes are (1/3, 1/3, -1/3).
    """
    s3 = 1.0 / math.sqrt(3.0)
    sys = FiniteSystem(
        hamiltonian=np.zeros((3, 3), dtype=complex),
        observable=np.diag([1.0, 2.0, 3.0]).astype(complex),
    )
    spec = TransitionSpec(
        psi0=np.array([1.0, 1.0, 1.0], dtype=complex) * s3,
        psi1=np.array([1.0, 1.0, -1.0], dtype=complex) * s3,
        total_time=total_time,
        coupling=ImpulsiveCoupling(t0=total_time / 2.0),
    )
    return sys, spec


def random_system(
    dim: int, rng: np.random.Generator, zero_hamiltonian: bool = False
):
    """Random Hermitian system plus a random impulsive transition spec."""
    def herm():
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return (m + m.conj().T) / 2.0

    def unit():
        v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return v / np.linalg.norm(v)

    h = np.zeros((dim, dim), dtype=complex) if zero_hamiltonian else herm()
    sys = FiniteSystem(hamiltonian=h, observable=herm())
    t = float(rng.uniform(0.5, 2.0))
    spec = TransitionSpec(
        psi0=unit(),
        psi1=unit(),
        total_time=t,
        coupling=ImpulsiveCoupling(t0=float(rng.uniform(0.0, t))),
    )
    return sys, spec
