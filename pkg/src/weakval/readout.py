"""Quantum meter readings.

The pointer amplitude is the convolution of the apparatus profile with the
transition amplitude distribution; the observable reading statistics come
from its squared modulus.  This module provides the exact reading moments,
their broad-meter asymptotics, averages over uncontrolled final states and
the detector that exposes vanishing improper variance as a non-signature
of sharpness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .distributions import HybridDistribution, decompose_complex
from .errors import PreconditionError
from .numerics import central_difference, fourier_to_grid, trapezoid
from .profiles import ApparatusProfile, readout_second_moment_factor
from .quantum import (
    FiniteSystem,
    ImpulsiveCoupling,
    TransitionSpec,
    WindowCoupling,
    amplitude_distribution,
    amplitude_ratio_function,
    evolve_lambda,
    transition_amplitude,
    weak_value,
)

# -- direct reading moments ----------------------------------------------------


@dataclass(frozen=True)
class ReadoutResult:
    """Pointer amplitude, reading density and its first two moments."""

    psi_f: HybridDistribution
    rho_f: HybridDistribution
    mean: float
    second_moment: float
    weak_mean: complex | None
    weak_second: complex | None

    @property
    def variance(self) -> float:
        return self.second_moment - self.mean**2


def _pointer_grid(
    phi: HybridDistribution, profile: ApparatusProfile, n_cap: int = 1 << 18
):
    pad = profile.base_half_width * profile.alpha + 2.0
    lo, hi = phi.support()
    lo, hi = lo - pad, hi + pad
    step_candidates = [profile.alpha / 40.0] if profile.alpha > 0 else []
    if phi.has_smooth:
        step_candidates.append(phi.grid_step)
    if phi.has_spikes and len(phi.spike_locations) > 1:
        sep = np.diff(np.sort(phi.spike_locations)).min()
        step_candidates.append(sep / 50.0)
    step = min(step_candidates) if step_candidates else (hi - lo) / 8192
    n = int(math.ceil((hi - lo) / step)) + 1
    if n > n_cap:
        n = n_cap
        step = (hi - lo) / (n - 1)
    return lo + step * np.arange(n), step


def read_meter(
    sys: FiniteSystem,
    spec: TransitionSpec,
    profile: ApparatusProfile,
) -> ReadoutResult:
    """Convolve the amplitude distribution with the pointer profile and take
    the exact first two moments of the reading density |Psi(f)|^2."""
    if profile.alpha <= 0:
        raise PreconditionError("read_meter needs alpha > 0 (finite resolution)")
    phi = amplitude_distribution(sys, spec)
    grid, step = _pointer_grid(phi, profile)
    psi = np.zeros(len(grid), dtype=complex)
    for loc, w in zip(phi.spike_locations, phi.spike_weights):
        psi += w * profile.amplitude(grid - loc)
    if phi.has_smooth:
        kernel = profile.amplitude(grid - grid[len(grid) // 2])
        vals = np.interp(grid, phi.grid, phi.values.real) + 1j * np.interp(
            grid, phi.grid, phi.values.imag
        )
        p_lo, p_hi = phi.support()
        vals = np.where((grid >= p_lo) & (grid <= p_hi), vals, 0.0)
        m = 1
        while m < 2 * len(grid):
            m *= 2
        conv = np.fft.ifft(np.fft.fft(vals, m) * np.fft.fft(kernel, m))
        psi += conv[len(grid) // 2 : len(grid) // 2 + len(grid)] * step
    rho = np.abs(psi) ** 2
    norm = float(trapezoid(rho, dx=step))
    if norm <= 0.0 or not np.isfinite(norm):
        raise PreconditionError("reading density has zero norm")
    mean = float(trapezoid(grid * rho, dx=step) / norm)
    second = float(trapezoid(grid**2 * rho, dx=step) / norm)
    try:
        wv1 = weak_value(sys, spec, 1)
        wv2 = weak_value(sys, spec, 2)
    except PreconditionError:
        wv1 = wv2 = None
    return ReadoutResult(
        HybridDistribution(float(grid[0]), step, psi),
        HybridDistribution(float(grid[0]), step, rho.astype(complex)),
        mean,
        second,
        wv1,
        wv2,
    )


def reading_mean_lambda_route(
    sys: FiniteSystem,
    spec: TransitionSpec,
    profile: ApparatusProfile,
    lam_half_width: float | None = None,
    n_lam: int = 4097,
) -> float:
    """First reading moment from the Fourier-side ratio form.

    <f> = integral(i Gt* Pt* (Gt' Pt + Gt Pt') dlam) /
          integral(|Gt|^2 |Pt|^2 dlam)
    with Gt the profile transform at scale alpha and Pt the lam-space
    transition amplitude.  Serves as an independent cross-check of the
    f-space quadrature in :func:`read_meter`.
    """
    if lam_half_width is None:
        lam_half_width = 12.0 / max(profile.alpha, 1e-6)
    lam = np.linspace(-lam_half_width, lam_half_width, n_lam)
    gt = profile.base_transform(lam * profile.alpha)
    # d/dlam of the scaled transform: quadrature with a (-i z) weight
    z, gbase = profile._z, profile._g
    dz = z[1] - z[0]
    gt_prime = (
        np.sin(np.outer(lam * profile.alpha, z)) @ (z * gbase * dz)
        / (2.0 * np.pi)
        * (-profile.alpha)
    )
    pt = transition_amplitude(sys, spec, lam)
    h = 1e-4
    pt_prime = (
        8.0 * (transition_amplitude(sys, spec, lam + h / 2)
               - transition_amplitude(sys, spec, lam - h / 2))
        - (transition_amplitude(sys, spec, lam + h)
           - transition_amplitude(sys, spec, lam - h))
    ) / (6.0 * h)
    dlam = lam[1] - lam[0]
    num = 1j * trapezoid(
        np.conj(gt) * np.conj(pt) * (gt_prime * pt + gt * pt_prime), dx=dlam
    )
    den = trapezoid((np.abs(gt) ** 2) * (np.abs(pt) ** 2), dx=dlam)
    return float(np.real(num / den))


# -- broad-meter asymptotics ----------------------------------------------------


@dataclass(frozen=True)
class AsymptoticMoments:
    weak_mean: complex
    weak_second: complex
    c_factor: float
    predicted_mean: float
    predicted_second: float


def asymptotic_moments(
    sys: FiniteSystem, spec: TransitionSpec, profile: ApparatusProfile
) -> AsymptoticMoments:
    """Broad-meter predictions for the reading moments.

    predicted mean = Re weak_mean; predicted second moment =
    alpha^2 <z^2>_{G^2} + C (Re weak_second - |weak_mean|^2) + |weak_mean|^2
    with C the profile-dependent quadrature factor (1/2 for Gaussian).
    """
    if profile.alpha < 1.0:
        raise PreconditionError("asymptotic expansion assumes alpha >= 1")
    wv1 = weak_value(sys, spec, 1)
    wv2 = weak_value(sys, spec, 2)
    c = readout_second_moment_factor(profile)
    lead = profile.second_moment_intensity()
    predicted_second = (
        lead + c * (wv2.real - abs(wv1) ** 2) + abs(wv1) ** 2
    )
    return AsymptoticMoments(wv1, wv2, c, wv1.real, predicted_second)


def weak_limit_convergence_order(
    sys: FiniteSystem, spec: TransitionSpec, alphas
) -> float:
    """Fitted log-log slope of |<f>(alpha) - Re weak_mean| against alpha.

    The broad-meter theory guarantees at least O(1/alpha); Gaussian
    profiles typically converge faster.  The measured order is reported
    rather than assumed.
    """
    wv = weak_value(sys, spec, 1)
    errs = []
    for alpha in alphas:
        res = read_meter(sys, spec, ApparatusProfile(alpha=float(alpha)))
        errs.append(abs(res.mean - wv.real))
    errs = np.asarray(errs)
    if np.any(errs <= 0):
        return -np.inf
    return float(np.polyfit(np.log(np.asarray(alphas, float)), np.log(errs), 1)[0])


# -- averages over uncontrolled final states -------------------------------------


@dataclass(frozen=True)
class FinalStateAverage:
    """Reading statistics averaged over a complete set of final states."""

    basis: np.ndarray
    probabilities: np.ndarray
    averaged_distribution: HybridDistribution
    w1: HybridDistribution
    w2: HybridDistribution
    weak_mean: complex
    weak_second: complex
    born_second: float

    @property
    def reading_mean(self) -> float:
        return float(self.weak_mean.real)

    def predicted_reading_second(self, profile: ApparatusProfile) -> float:
        return profile.second_moment_intensity() + float(self.weak_second.real)


def _combine_distributions(dists, weights) -> HybridDistribution:
    smooth = None
    spikes: list[tuple[float, complex]] = []
    ref = None
    for d, p in zip(dists, weights):
        if d.has_smooth:
            if ref is None:
                ref = d
                smooth = p * d.values.astype(complex)
            else:
                if len(d.values) != len(ref.values) or not np.isclose(
                    d.grid_start, ref.grid_start
                ):
                    raise ValueError("cannot combine distributions on different grids")
                smooth = smooth + p * d.values
        for loc, w in zip(d.spike_locations, d.spike_weights):
            spikes.append((float(loc), p * complex(w)))
    if ref is None:
        return HybridDistribution.from_spikes(spikes)
    locs, ws = zip(*spikes) if spikes else ((), ())
    return HybridDistribution(
        ref.grid_start, ref.grid_step, smooth, np.asarray(locs), np.asarray(ws, complex)
    )


def average_over_final_states(
    sys: FiniteSystem,
    spec: TransitionSpec,
    basis: np.ndarray | None = None,
    negligible: float = 1e-14,
) -> FinalStateAverage:
    """Average the post-selected statistics over an orthonormal complete set
    of final states, weighted by the unperturbed transition probabilities.

    The averaged amplitude distribution is the probability-weighted sum of
    the normalized per-final-state distributions; its real part integrates
    to one and its imaginary part to zero.  The averaged weak mean is real
    and the real part of the averaged weak second moment equals the
    probability-weighted |weak mean|^2 sum.
    """
    if spec.post_selected:
        spec = replace(spec, psi1=None)
    dim = sys.dim
    if basis is None:
        basis = np.eye(dim, dtype=complex)
    basis = np.asarray(basis, dtype=complex)
    gram_defect = float(np.linalg.norm(basis.conj().T @ basis - np.eye(dim)))
    if gram_defect > 1e-10:
        raise PreconditionError(
            f"final-state basis is not orthonormal/complete (Gram defect {gram_defect:.3e})"
        )
    u0_psi0 = evolve_lambda(sys, spec, 0.0) @ spec.psi0
    probs = np.abs(basis.conj().T @ u0_psi0) ** 2
    dists, weights = [], []
    weak_mean = 0.0 + 0.0j
    weak_second = 0.0 + 0.0j
    born_second = 0.0
    for m in range(dim):
        p = float(probs[m])
        if p < negligible:
            continue
        spec_m = replace(spec, psi1=basis[:, m])
        dists.append(amplitude_distribution(sys, spec_m, normalized=True))
        weights.append(p)
        f1 = weak_value(sys, spec_m, 1)
        f2 = weak_value(sys, spec_m, 2)
        weak_mean += p * f1
        weak_second += p * f2
        born_second += p * abs(f1) ** 2
    averaged = _combine_distributions(dists, weights)
    w1, w2 = decompose_complex(averaged)
    return FinalStateAverage(
        basis, probs, averaged, w1, w2, weak_mean, weak_second, born_second
    )


def final_state_sum_rule_defect(
    sys: FiniteSystem, spec: TransitionSpec, basis: np.ndarray, lam_values
) -> float:
    """Max over lam of |sum_m |<m|U_lam|psi0>|^2 - 1| (unitarity plus
    completeness of the final basis)."""
    worst = 0.0
    for lam in np.atleast_1d(lam_values):
        u = evolve_lambda(sys, spec, float(lam))
        amps = basis.conj().T @ (u @ spec.psi0)
        worst = max(worst, abs(float(np.sum(np.abs(amps) ** 2)) - 1.0))
    return worst


# -- window-coupling moment identities -------------------------------------------


def time_integral_moments(
    sys: FiniteSystem, spec: TransitionSpec, n_time: int = 8193
) -> tuple[complex, complex]:
    """First two averaged weak moments for the constant window coupling,
    from time quadrature of Heisenberg-picture matrix elements:

    <fbar>   = (1/t) integral <psi(s)|A|psi(s)> ds
    <fbar^2> = (2/t^2) integral_{s' < s} <u(s), u(s')> ds ds',
               u(s) = e^{iHs} A e^{-iHs} |psi0>.

    These must agree with the lam-derivative route.
    """
    if not isinstance(spec.coupling, WindowCoupling):
        raise PreconditionError("time_integral_moments applies to window coupling")
    t = spec.total_time
    e_vals, e_vecs = sys.hamiltonian_eigen
    c0 = e_vecs.conj().T @ spec.psi0
    s_grid = np.linspace(0.0, t, n_time)
    phases = np.exp(-1j * np.outer(s_grid, e_vals))
    psi_t = phases * c0  # coefficients of psi(s) in the H eigenbasis
    a_eig = e_vecs.conj().T @ sys.observable @ e_vecs
    a_psi = psi_t @ a_eig.T  # A psi(s), H-eigenbasis coefficients
    first = trapezoid(np.einsum("si,si->s", psi_t.conj(), a_psi), dx=s_grid[1]) / t
    u = np.conj(phases) * a_psi  # e^{iHs} A psi(s)
    du = s_grid[1] - s_grid[0]
    centers = 0.5 * (u[1:] + u[:-1]) * du
    u_cum = np.vstack([np.zeros_like(u[0]), np.cumsum(centers, axis=0)])
    inner = np.einsum("si,si->s", u.conj(), u_cum)
    second = 2.0 * trapezoid(inner, dx=du) / t**2
    return complex(first), complex(second)


# -- improper sharpness detector ---------------------------------------------------


@dataclass(frozen=True)
class SharpnessReport:
    unimodular: bool
    max_modulus_deviation: float
    weak_mean: float
    weak_second_real: float
    variance_residual: float
    support_count: int
    resolution_count: int
    classification: str
    distribution: HybridDistribution | None


def detect_improper_sharpness(
    ratio_fn,
    f_window: tuple[float, float],
    n_points: int = 4096,
    smear_cells: float = 2.0,
    modulus_tol: float = 1e-8,
    support_fraction: float = 0.01,
) -> SharpnessReport:
    """Decide whether a vanishing improper variance reflects a genuinely
    sharp value.

    ``ratio_fn`` maps coupling strength lam to the normalized transition
    amplitude ratio (1 at lam = 0).  The precondition is unimodularity of
    the ratio across the grid; its transform is then a normalized (possibly
    improper) distribution whose first two moments satisfy
    Re<f^2> = <f>^2.  The transform's support is inspected: if it extends
    well beyond the smear-limited width of a point mass, the zero variance
    is classified as improper rather than sharp.
    """
    f_lo, f_hi = f_window
    f_step = (f_hi - f_lo) / (n_points - 1)
    lam_step = 2.0 * np.pi / (n_points * f_step)
    lam = (np.arange(n_points) - n_points // 2) * lam_step
    g = np.asarray(ratio_fn(lam), dtype=complex)
    deviation = float(np.max(np.abs(np.abs(g) - 1.0)))
    if deviation > modulus_tol:
        return SharpnessReport(
            False, deviation, math.nan, math.nan, math.nan, 0, 0,
            "precondition violated: amplitude ratio is not unimodular", None,
        )
    d1 = central_difference(ratio_fn, 0.0, 1, 1e-5 * max(1.0, lam_step))
    d2 = central_difference(ratio_fn, 0.0, 2, 1e-3 * max(1.0, lam_step))
    mean = float((1j * d1).real)
    second = float((-d2).real)
    residual = abs(second - mean * mean)
    sigma = smear_cells * f_step
    apodized = g * np.exp(-0.5 * sigma**2 * lam**2)
    values = fourier_to_grid(apodized, lam_step, f_lo, f_step, n_points)
    dist = HybridDistribution(f_lo, f_step, values)
    mag = np.abs(values)
    support_count = int(np.count_nonzero(mag >= support_fraction * mag.max()))
    resolution_count = int(2.0 * sigma * math.sqrt(2.0 * math.log(100.0)) / f_step) + 1
    if residual > 1e-6 * max(1.0, mean * mean):
        label = "variance nonzero"
    elif support_count <= 1.5 * resolution_count:
        label = "genuinely sharp"
    else:
        label = "improper sharpness"
    return SharpnessReport(
        True, deviation, mean, second, residual,
        support_count, resolution_count, label, dist,
    )


def zero_variance_detector(
    sys: FiniteSystem,
    spec: TransitionSpec,
    f_window: tuple[float, float] | None = None,
    n_points: int = 4096,
) -> SharpnessReport:
    """Improper-sharpness detector for a finite system.

    Without post-selection the ratio is the final-state-averaged amplitude
    <psi0|U_0^{-1} U_lam|psi0>; with post-selection it is the normalized
    transition amplitude, which generally fails the unimodularity
    precondition and is reported as such.
    """
    ratio = amplitude_ratio_function(sys, spec)
    if f_window is None:
        vals = sys.observable_eigen[0]
        span = float(vals.max() - vals.min())
        pad = 0.25 * span if span > 0 else 1.0
        f_window = (float(vals.min()) - pad, float(vals.max()) + pad)
    return detect_improper_sharpness(ratio, f_window, n_points)
