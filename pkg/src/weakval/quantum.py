"""Finite-dimensional quantum systems coupled to a pointer.

Provides the coupling-strength-dependent evolution operator, the transition
amplitude distribution over virtual paths and its complex-valued moments
(weak values), with and without post-selection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .distributions import HybridDistribution
from .errors import DegenerateNormalizationError, PreconditionError
from .numerics import central_difference, fourier_to_grid

HERMITICITY_RTOL = 1e-12
PATH_ENUMERATION_CAP = 10_000


def _require_hermitian(m: np.ndarray, name: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    scale = max(np.linalg.norm(m), 1.0)
    if np.linalg.norm(m - m.conj().T) > HERMITICITY_RTOL * scale:
        raise ValueError(f"{name} is not Hermitian")
    m.flags.writeable = False
    return m


def _require_unit(v: np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=complex).ravel()
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"{name} must be normalized")
    v.flags.writeable = False
    return v


@dataclass(frozen=True)
class FiniteSystem:
    """Hermitian Hamiltonian and observable on a dim >= 2 Hilbert space."""

    hamiltonian: np.ndarray
    observable: np.ndarray

    def __post_init__(self):
        h = _require_hermitian(self.hamiltonian, "hamiltonian")
        a = _require_hermitian(self.observable, "observable")
        if h.shape != a.shape or h.shape[0] < 2:
            raise ValueError("hamiltonian and observable must share dim >= 2")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "observable", a)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @cached_property
    def observable_eigen(self) -> tuple[np.ndarray, np.ndarray]:
        vals, vecs = np.linalg.eigh(self.observable)
        recon = (vecs * vals) @ vecs.conj().T
        if np.linalg.norm(recon - self.observable) > 1e-10 * max(
            1.0, np.linalg.norm(self.observable)
        ):
            raise ValueError("observable eigendecomposition failed tolerance")
        return vals, vecs

    @cached_property
    def hamiltonian_eigen(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.hamiltonian)

    def propagator(self, duration: float) -> np.ndarray:
        """exp(-i H duration) via the Hermitian eigendecomposition."""
        vals, vecs = self.hamiltonian_eigen
        return (vecs * np.exp(-1j * vals * duration)) @ vecs.conj().T


@dataclass(frozen=True)
class ImpulsiveCoupling:
    """Pointer kicked at the single instant t0 inside [0, t]."""

    t0: float


@dataclass(frozen=True)
class WindowCoupling:
    """Constant coupling over the whole interval, normalized to unit
    time integral."""


@dataclass(frozen=True)
class TransitionSpec:
    """Prepared state, optional post-selected state, duration and coupling."""

    psi0: np.ndarray
    psi1: np.ndarray | None
    total_time: float
    coupling: ImpulsiveCoupling | WindowCoupling

    def __post_init__(self):
        object.__setattr__(self, "psi0", _require_unit(self.psi0, "psi0"))
        if self.psi1 is not None:
            object.__setattr__(self, "psi1", _require_unit(self.psi1, "psi1"))
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if isinstance(self.coupling, ImpulsiveCoupling):
            if not 0.0 <= self.coupling.t0 <= self.total_time:
                raise ValueError("impulsive instant must lie in [0, total_time]")

    @property
    def post_selected(self) -> bool:
        return self.psi1 is not None


# -- evolution ---------------------------------------------------------------


def evolve_lambda(sys: FiniteSystem, spec: TransitionSpec, lam: float) -> np.ndarray:
    """Evolution operator at meter-coupling strength ``lam``.

    Impulsive coupling gives exp(-iH(t-t0)) exp(-i lam A) exp(-iH t0);
    the constant window gives exp(-i (H + lam A / t) t).
    """
    if isinstance(spec.coupling, ImpulsiveCoupling):
        t0 = spec.coupling.t0
        vals, vecs = sys.observable_eigen
        kick = (vecs * np.exp(-1j * lam * vals)) @ vecs.conj().T
        return sys.propagator(spec.total_time - t0) @ kick @ sys.propagator(t0)
    gen = sys.hamiltonian + (lam / spec.total_time) * sys.observable
    vals, vecs = np.linalg.eigh(gen)
    return (vecs * np.exp(-1j * vals * spec.total_time)) @ vecs.conj().T


def transition_amplitude(sys: FiniteSystem, spec: TransitionSpec, lam) -> complex | np.ndarray:
    """<psi1| U_lam |psi0> for scalar or array ``lam``."""
    if not spec.post_selected:
        raise PreconditionError(
            "no post-selection state; use the final-state-average operations"
        )
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if isinstance(spec.coupling, ImpulsiveCoupling):
        locs, weights = impulsive_spike_weights(sys, spec)
        out = np.exp(-1j * np.outer(lam_arr, locs)) @ weights
    else:
        t = spec.total_time
        gens = sys.hamiltonian[None, :, :] + (
            lam_arr[:, None, None] / t
        ) * sys.observable[None, :, :]
        vals, vecs = np.linalg.eigh(gens)
        phases = np.exp(-1j * vals * t)
        right = np.einsum("kij,j->ki", vecs.conj().transpose(0, 2, 1), spec.psi0)
        left = np.einsum("kij,j->ki", vecs.conj().transpose(0, 2, 1), spec.psi1)
        out = np.einsum("ki,ki,ki->k", left.conj(), phases, right)
    return complex(out[0]) if np.isscalar(lam) or np.asarray(lam).ndim == 0 else out


def amplitude_ratio_function(sys: FiniteSystem, spec: TransitionSpec):
    """lam -> <psi1|U_lam|psi0> / <psi1|U_0|psi0> (post-selected) or
    lam -> <psi0|U_0^-1 U_lam|psi0> (no post-selection; a final-state
    average over any complete basis)."""
    if spec.post_selected:
        g0 = transition_amplitude(sys, spec, 0.0)
        if abs(g0) == 0.0:
            raise DegenerateNormalizationError(0.0, 0.0)
        return lambda lam: transition_amplitude(sys, spec, lam) / g0
    u0 = evolve_lambda(sys, spec, 0.0)
    bra = (u0 @ spec.psi0).conj()

    def ratio(lam):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.empty(len(lam_arr), dtype=complex)
        for i, lv in enumerate(lam_arr):
            out[i] = bra @ (evolve_lambda(sys, spec, float(lv)) @ spec.psi0)
        return complex(out[0]) if np.asarray(lam).ndim == 0 else out

    return ratio


# -- amplitude distribution ---------------------------------------------------


def impulsive_spike_weights(sys: FiniteSystem, spec: TransitionSpec):
    """Spike locations (observable eigenvalues) and unnormalized weights
    <psi1|e^{-iH(t-t0)}|a_k><a_k|e^{-iH t0}|psi0>."""
    t0 = spec.coupling.t0
    vals, vecs = sys.observable_eigen
    right = vecs.conj().T @ (sys.propagator(t0) @ spec.psi0)
    left = (sys.propagator(spec.total_time - t0).conj().T @ spec.psi1).conj() @ vecs
    return vals, left * right


def amplitude_distribution(
    sys: FiniteSystem,
    spec: TransitionSpec,
    f_window: tuple[float, float] | None = None,
    n_points: int = 4096,
    normalized: bool = False,
) -> HybridDistribution:
    """Amplitude distribution Phi(f) of the pointer-functional value f.

    Impulsive coupling yields an exact spike distribution on the observable
    spectrum.  The constant window yields a smooth distribution obtained by
    discrete Fourier transform of lam -> <psi1|U_lam|psi0> over a symmetric
    lam grid conjugate to the requested f grid.

    By default Phi is unnormalized so that integral(Phi) equals the bare
    transition amplitude <psi1|e^{-iHt}|psi0>; with ``normalized`` the
    distribution is divided by that amplitude.
    """
    if not spec.post_selected:
        raise PreconditionError(
            "amplitude_distribution requires post-selection; "
            "use average_over_final_states for open final states"
        )
    if isinstance(spec.coupling, ImpulsiveCoupling):
        locs, weights = impulsive_spike_weights(sys, spec)
        dist = HybridDistribution.from_spikes(list(zip(locs, weights)))
    else:
        eigvals = sys.observable_eigen[0]
        if f_window is None:
            span = float(eigvals.max() - eigvals.min())
            pad = 0.25 * span if span > 0 else 1.0
            f_window = (float(eigvals.min()) - pad, float(eigvals.max()) + pad)
        f_lo, f_hi = f_window
        f_step = (f_hi - f_lo) / (n_points - 1)
        lam_step = 2.0 * np.pi / (n_points * f_step)
        lam = (np.arange(n_points) - n_points // 2) * lam_step
        g = transition_amplitude(sys, spec, lam)
        values = fourier_to_grid(g, lam_step, f_lo, f_step, n_points)
        dist = HybridDistribution(f_lo, f_step, values)
    if normalized:
        norm = transition_amplitude(sys, spec, 0.0)
        if abs(norm) < dist.degeneracy_threshold():
            raise DegenerateNormalizationError(abs(norm), dist.degeneracy_threshold())
        dist = dist.scaled(1.0 / norm)
    return dist


# -- weak values ---------------------------------------------------------------


def weak_value(sys: FiniteSystem, spec: TransitionSpec, order: int = 1) -> complex:
    """Complex weak value: the order-th moment of Phi(f) normalized by the
    transition amplitude.

    The impulsive case is an exact spike sum; the window case uses
    derivatives of the lam-space amplitude (the two routes agree, and the
    spike sum is cross-checked against finite differences in the tests).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not spec.post_selected:
        raise PreconditionError("weak_value requires a post-selection state")
    if isinstance(spec.coupling, ImpulsiveCoupling):
        locs, weights = impulsive_spike_weights(sys, spec)
        norm = weights.sum()
        scale = np.abs(weights).sum()
        if abs(norm) < 1e-12 * max(scale, 1e-300):
            raise DegenerateNormalizationError(abs(norm), 1e-12 * scale)
        return complex((locs**order * weights).sum() / norm)
    return weak_value_fd(sys, spec, order)


def weak_value_fd(
    sys: FiniteSystem, spec: TransitionSpec, order: int = 1, step: float = 1e-4
) -> complex:
    """Weak value from central finite differences of the lam amplitude,
    i^n d^n/dlam^n of <psi1|U_lam|psi0>, normalized at lam = 0."""
    g0 = transition_amplitude(sys, spec, 0.0)
    scale = 1.0  # amplitudes are bounded by 1
    if abs(g0) < 1e-12 * scale:
        raise DegenerateNormalizationError(abs(g0), 1e-12 * scale)

    def g(lam: float) -> complex:
        return transition_amplitude(sys, spec, float(lam))

    deriv = central_difference(g, 0.0, order, step, richardson=True)
    return complex((1j**order) * deriv / g0)


# -- virtual path enumeration ---------------------------------------------------


def virtual_path_amplitudes(
    sys: FiniteSystem, spec: TransitionSpec, n_slices: int | None = None
):
    """Enumerate virtual paths in the observable eigenbasis.

    A path is a sequence of eigenvalue labels at the n_slices+1 time-slice
    boundaries; its amplitude is the product of short-time propagator matrix
    elements sandwiched between the boundary states.  The amplitudes sum
    exactly to <psi1|e^{-iHt}|psi0> because the inserted eigenbases are
    complete.

    With a zero Hamiltonian one slice suffices (paths are constant); the
    default picks 0 slices then, else 3.  Enumeration is capped at
    10^4 paths; beyond that use the Fourier route.
    """
    if not spec.post_selected:
        raise PreconditionError("path enumeration requires a post-selection state")
    h_is_zero = np.allclose(sys.hamiltonian, 0.0)
    if n_slices is None:
        n_slices = 0 if h_is_zero else 3
    dim = sys.dim
    n_labels = n_slices + 1
    count = dim**n_labels
    if count > PATH_ENUMERATION_CAP:
        raise PreconditionError(
            f"{count} paths exceed the enumeration cap "
            f"{PATH_ENUMERATION_CAP}; use amplitude_distribution instead"
        )
    vals, vecs = sys.observable_eigen
    start = vecs.conj().T @ spec.psi0
    end = (spec.psi1.conj() @ vecs).conj()
    if n_slices > 0:
        u_slice = sys.propagator(spec.total_time / n_slices)
        u_eig = vecs.conj().T @ u_slice @ vecs
    paths = []
    for labels in itertools.product(range(dim), repeat=n_labels):
        amp = start[labels[0]]
        for j in range(1, n_labels):
            amp *= u_eig[labels[j], labels[j - 1]]
        amp *= np.conj(end[labels[-1]])
        paths.append((tuple(float(vals[k]) for k in labels), complex(amp)))
    return paths
