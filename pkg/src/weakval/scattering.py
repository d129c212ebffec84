"""Time observables in 1D and s-wave scattering.

Covers analytic transmission amplitudes for delta and rectangular barriers,
the s-wave scattering matrix of a radial square potential, phase time from
wavepacket centroids, the time-delay amplitude distribution, the traversal
time weak value with its vanishing improper variance, and the finite-spin
Larmor clock.  Units: hbar = 1, unit mass throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import HybridDistribution
from .errors import GridResolutionError, PreconditionError
from .numerics import central_difference, fourier_to_grid, trapezoid

MODULUS_FLOOR = 1e-12


@dataclass(frozen=True)
class DeltaBarrier:
    """V(x) = strength * delta(x); any real strength (barrier or well)."""

    strength: float


@dataclass(frozen=True)
class RectangularBarrier:
    """V(x) = strength on 0 < x < width, zero elsewhere."""

    strength: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError("width must be positive")


@dataclass(frozen=True)
class RadialSquare:
    """s-wave radial square potential V(r) = strength for r < radius."""

    strength: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


ScatterModel = DeltaBarrier | RectangularBarrier | RadialSquare


# -- transmission amplitudes / scattering matrix --------------------------------


def _sin_over(z: np.ndarray) -> np.ndarray:
    """sin(z)/z, even and regular at 0 (complex-safe)."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-6
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z * z / 6.0, np.sin(safe) / safe)


def _transmission_values(model: ScatterModel, k: np.ndarray) -> np.ndarray:
    """T(k) (or S(k) for the radial model) for arbitrary real k.

    All formulas are written in combinations even in the interior wave
    number, so the analytic continuation below the barrier top needs no
    branch handling.
    """
    k = np.asarray(k, dtype=float)
    if isinstance(model, DeltaBarrier):
        return k / (k + 1j * model.strength)
    if isinstance(model, RectangularBarrier):
        om, a = model.strength, model.width
        kappa_sq = k * k - 2.0 * om
        kappa = np.sqrt(kappa_sq.astype(complex))
        c = np.cos(kappa * a)
        s_over = _sin_over(kappa * a) * a  # sin(kappa a) / kappa
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = c - 1j * ((k * k - om) / k) * s_over
            t = np.exp(-1j * k * a) / denom
        return np.where(k == 0.0, 0.0, t)
    om, r = model.strength, model.radius
    kappa = np.sqrt((k * k - 2.0 * om).astype(complex))
    c = np.cos(kappa * r)
    s_over = _sin_over(kappa * r) * r  # sin(kappa r) / kappa
    return np.exp(-2j * k * r) * (c + 1j * k * s_over) / (c - 1j * k * s_over)


def transmission(model: ScatterModel, k: float) -> complex:
    """Transmission amplitude T(k), or the unimodular S(k) = e^{2 i delta}
    for the radial square potential."""
    if k <= 0:
        raise PreconditionError("transmission requires k > 0")
    return complex(_transmission_values(model, np.asarray([k]))[0])


def reflection(model: DeltaBarrier | RectangularBarrier, k: float) -> complex:
    """Reflection amplitude paired with :func:`transmission`."""
    if k <= 0:
        raise PreconditionError("reflection requires k > 0")
    if isinstance(model, DeltaBarrier):
        return complex(-1j * model.strength / (k + 1j * model.strength))
    om, a = model.strength, model.width
    kappa = complex(np.sqrt(complex(k * k - 2.0 * om)))
    c = np.cos(kappa * a)
    s_over = complex(_sin_over(np.asarray([kappa * a]))[0]) * a
    denom = c - 1j * ((k * k - om) / k) * s_over
    return complex(-1j * (om / k) * s_over / denom)


def phase_shift_function(model: RadialSquare) -> Callable[[np.ndarray], np.ndarray]:
    """k -> continuous s-wave phase shift delta0(k) on an increasing grid."""

    def shift(k: np.ndarray) -> np.ndarray:
        s = _transmission_values(model, np.asarray(k, dtype=float))
        return 0.5 * np.unwrap(np.angle(s))

    return shift


# -- phase time -------------------------------------------------------------------


def phase_time(
    model_or_t: ScatterModel | Callable[[float], complex],
    p: float,
    step: float | None = None,
) -> float:
    """Energy derivative of the transmission phase at momentum p.

    Computed as Im[T'(p)/T(p)] / p by central differences with one
    Richardson extrapolation; no phase unwrapping is needed because only
    the logarithmic derivative enters.
    """
    if p <= 0:
        raise PreconditionError("phase_time requires p > 0")
    if callable(model_or_t):
        tf = model_or_t
    else:
        tf = lambda k: complex(_transmission_values(model_or_t, np.asarray([k]))[0])
    t0 = tf(p)
    if abs(t0) < MODULUS_FLOOR:
        raise PreconditionError(
            f"|T({p})| = {abs(t0):.3e} is below the phase-definition threshold"
        )
    if step is None:
        step = 1e-5 * max(1.0, abs(p))
    deriv = central_difference(tf, p, 1, step, richardson=True)
    return float((deriv / t0).imag / p)


def opaque_transmission_approx(height: float, width: float) -> Callable[[float], complex]:
    """Exponential-only transmission of a high barrier (pre-exponential
    factor dropped): exp(-q a - i p a) with q = sqrt(2 height - p^2).

    Its phase is exactly -p a, so the phase time is exactly -a / p: a
    speed-up as if the barrier were crossed in no time at all.
    """

    def t(p: float) -> complex:
        if 2.0 * height <= p * p:
            raise PreconditionError("opaque approximation needs height > p^2/2")
        q = math.sqrt(2.0 * height - p * p)
        return complex(math.exp(-q * width)) * np.exp(-1j * p * width)

    return t


# -- time-delay amplitude distribution ---------------------------------------------


def _pole_match(model: DeltaBarrier | RectangularBarrier) -> tuple[complex, float]:
    """Rational asymptote c/(k + i mu) matched to T(k) - 1 at large |k|.

    For the delta barrier the match is exact (T - 1 is itself that
    rational); for the rectangular barrier it matches the first two
    asymptotic orders, leaving an O(k^-3) residual for the transform.
    """
    if isinstance(model, DeltaBarrier):
        return -1j * model.strength, model.strength
    om, a = model.strength, model.width
    return -1j * om * a, 0.5 * om * a


def delay_amplitude(
    model: DeltaBarrier | RectangularBarrier,
    p: float,
    x_lo: float,
    x_hi: float,
    n_points: int = 1 << 14,
    pole_scale: float | None = None,
    tail_tolerance: float = 1e-7,
) -> HybridDistribution:
    """Amplitude distribution of spatial shifts x of the transmitted
    envelope relative to free flight (delay tau = -x / p).

    Built as (2 pi)^-1 exp(-i p x) integral(T(k) e^{i k x} dk) on a k grid
    centred at p.  The constant large-|k| asymptote of T produces a unit
    spike at x = 0 and a matched simple pole is transformed analytically;
    only the fast-decaying residual goes through the windowed FFT.
    """
    if p <= 0:
        raise PreconditionError("delay_amplitude requires p > 0")
    if x_hi <= x_lo:
        raise ValueError("need x_hi > x_lo")
    dx = (x_hi - x_lo) / (n_points - 1)
    # keep x = 0 on the grid: the pole part jumps there and the trapezoid
    # rule stays second-order only with the node carrying the half-sum value
    x_lo = round(x_lo / dx) * dx
    dk = 2.0 * np.pi / (n_points * dx)
    u = (np.arange(n_points) - n_points // 2) * dk
    k = p + u
    c, mu = _pole_match(model)
    if pole_scale is not None:
        mu = pole_scale
    t_vals = _transmission_values(model, k)
    if mu != 0.0:
        h_vals = c / (k + 1j * mu)
    else:
        h_vals = np.zeros_like(t_vals)
    resid = t_vals - 1.0 - h_vals
    tail = max(abs(resid[0]) * abs(k[0]), abs(resid[-1]) * abs(k[-1])) / (4.0 * np.pi)
    if tail > tail_tolerance:
        raise GridResolutionError(
            f"windowed-transform residual {tail:.2e} above tolerance "
            f"{tail_tolerance:.2e}; widen the k window (smaller dx)"
        )
    values = fourier_to_grid(resid, dk, x_lo, dx, n_points)
    x = x_lo + dx * np.arange(n_points)
    at_jump = np.abs(x) < 0.5 * dx
    if mu > 0.0:
        side = (x < 0.0) + 0.5 * at_jump
        pole_part = -1j * c * np.exp((mu - 1j * p) * x) * side
    elif mu < 0.0:
        side = (x > 0.0) + 0.5 * at_jump
        pole_part = 1j * c * np.exp((mu - 1j * p) * x) * side
    else:
        pole_part = 0.0
    return HybridDistribution(
        x_lo, dx, values + pole_part,
        np.asarray([0.0]), np.asarray([1.0 + 0.0j]),
    )


# -- wavepacket centroid delay -------------------------------------------------------


@dataclass(frozen=True)
class WavepacketDelay:
    centroid_delay: float
    transmitted_probability: float
    plane_wave_probability: float
    barrier_region_norm: float
    time: float


def wavepacket_delay(
    model: DeltaBarrier | RectangularBarrier,
    p: float,
    sigma_k: float,
    time: float,
    n_k: int = 2049,
    clearance_tolerance: float = 1e-6,
) -> WavepacketDelay:
    """Propagate a Gaussian packet through the barrier and compare the
    transmitted centroid with free flight.

    The envelope is A(k) = exp(-(k-p)^2 / (4 sigma_k^2)), so sigma_k is the
    standard deviation of |A|^2.  The reported delay is (p t - <x>) / p:
    positive when the transmitted packet lags the free one.  An error is
    raised if the packet has not cleared the barrier region at the
    requested time.
    """
    if p <= 0 or sigma_k <= 0:
        raise PreconditionError("need p > 0 and sigma_k > 0")
    # the incident packet is right-moving; for broad momentum spreads the
    # (exponentially small) unphysical k <= 0 tail is clipped away
    k_lo = max(p - 8.0 * sigma_k, 0.05 * p)
    k = np.linspace(k_lo, p + 8.0 * sigma_k, n_k)
    a_k = np.exp(-((k - p) ** 2) / (4.0 * sigma_k**2))
    t_vals = _transmission_values(model, k)
    w2 = np.abs(a_k) ** 2
    p_trans = float(trapezoid(np.abs(t_vals) ** 2 * w2, k) / trapezoid(w2, k))
    barrier_hi = model.width if isinstance(model, RectangularBarrier) else 0.0
    sigma_x = 1.0 / (2.0 * sigma_k)
    spread = math.sqrt(sigma_x**2 + (sigma_k * time) ** 2)
    x_lo = min(-barrier_hi - 5.0, barrier_hi - 8.0 * spread)
    x_hi = p * time + 10.0 * spread
    dx = min(2.0 * np.pi / p / 24.0, sigma_x / 8.0)
    n_x = int(math.ceil((x_hi - x_lo) / dx)) + 1
    x = x_lo + dx * np.arange(n_x)
    dk = k[1] - k[0]
    coeff = t_vals * a_k * dk
    phase_t = np.exp(-0.5j * k**2 * time)
    psi = np.zeros(n_x, dtype=complex)
    chunk = 4096
    for i in range(0, n_x, chunk):
        xs = x[i : i + chunk]
        psi[i : i + chunk] = np.exp(1j * np.outer(xs, k)) @ (coeff * phase_t)
    rho = np.abs(psi) ** 2
    norm = float(trapezoid(rho, dx=dx))
    if norm <= 0:
        raise PreconditionError("transmitted packet has zero norm")
    region = (x >= -barrier_hi - 2.0) & (x <= barrier_hi + 2.0)
    region_norm = float(trapezoid(np.where(region, rho, 0.0), dx=dx) / norm)
    if region_norm > clearance_tolerance:
        raise PreconditionError(
            f"packet has not cleared the barrier (fraction {region_norm:.2e} "
            f"in the barrier region); increase the propagation time"
        )
    centroid = float(trapezoid(x * rho, dx=dx) / norm)
    delay = (p * time - centroid) / p
    return WavepacketDelay(
        delay, p_trans, float(abs(transmission(model, p)) ** 2), region_norm, time
    )


# -- traversal time (s-wave collision clock) ------------------------------------------


def coupling_ratio_function(model: RadialSquare, k: float) -> Callable:
    """lam -> S(k; strength + lam) / S(k; strength): the amplitude ratio a
    clock weakly coupled to the interior region imprints on the collision.
    """
    if k <= 0:
        raise PreconditionError("need k > 0")
    s0 = complex(_transmission_values(model, np.asarray([k]))[0])

    def ratio(lam):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        shifted = np.empty(len(lam_arr), dtype=complex)
        for i, lv in enumerate(lam_arr):
            m = RadialSquare(model.strength + float(lv), model.radius)
            shifted[i] = _transmission_values(m, np.asarray([k]))[0]
        out = shifted / s0
        return complex(out[0]) if np.asarray(lam).ndim == 0 else out

    return ratio


def traversal_weak_value(
    model: RadialSquare,
    k: float,
    order: int = 1,
    first_step: float = 1e-6,
    second_step: float = 1e-3,
) -> complex:
    """Weak value of the time spent inside the interaction sphere:
    tau_bar = i d/dlam ln S(strength + lam) at lam = 0 (order 1) and
    tau_bar_sq = -S^-1 d^2/dlam^2 S (order 2).

    For the single-channel radial model S is unimodular, so tau_bar is
    real and Re tau_bar_sq equals tau_bar^2: a vanishing improper variance
    that does not imply a sharply defined duration.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    ratio = coupling_ratio_function(model, k)
    if order == 1:
        d1 = central_difference(ratio, 0.0, 1, first_step, richardson=True)
        return complex(1j * d1)
    d2 = central_difference(ratio, 0.0, 2, second_step, richardson=True)
    return complex(-d2)


def traversal_weak_value_analytic(model: RadialSquare, k: float) -> float:
    """Closed-form tau_bar = -2 d(delta0)/d(strength), by differentiating
    the matching condition; independent of the finite-difference route."""
    om, r = model.strength, model.radius
    kappa = complex(np.sqrt(complex(k * k - 2.0 * om)))
    c = complex(np.cos(kappa * r))
    s_over = complex(_sin_over(np.asarray([kappa * r]))[0]) * r
    num = c + 1j * k * s_over
    den = c - 1j * k * s_over
    # d/dOm with dkappa/dOm = -1/kappa; the even combinations stay regular
    dc = r * s_over  # d cos(kappa r)/dOm = sin(kappa r) r / kappa
    # d s_over/dOm = d/dOm [sin(kappa r)/kappa]
    #             = (-r cos(kappa r)/kappa + sin(kappa r)/kappa^2) / kappa... careful:
    # d/dkappa [sin(kr r)/kappa] = r cos(kappa r)/kappa - sin(kappa r)/kappa^2
    # times dkappa/dOm = -1/kappa
    kappa_sq = k * k - 2.0 * om
    if abs(kappa_sq) > 1e-8:
        ds_over = -(r * c - s_over) / kappa_sq
    else:
        ds_over = r**3 / 3.0  # series limit at kappa -> 0
    dnum = dc + 1j * k * ds_over
    dden = dc - 1j * k * ds_over
    dlog = dnum / num - dden / den
    return float((1j * dlog).real)


def traversal_amplitude(
    ratio_or_model,
    k: float | None = None,
    tau_lo: float = -2.0,
    tau_hi: float = 8.0,
    n_points: int = 2048,
    smear: float = 0.03,
) -> HybridDistribution:
    """Amplitude distribution of traversal durations, smeared with a
    Gaussian of width ``smear`` (applied as Gaussian apodization of the
    coupling-space amplitude, which is the same thing).

    Accepts either a RadialSquare model plus k or a ready amplitude-ratio
    callable.  The distribution integrates to one exactly.
    """
    if callable(ratio_or_model):
        ratio = ratio_or_model
    else:
        ratio = coupling_ratio_function(ratio_or_model, k)
    if smear <= 0:
        raise ValueError("smear must be positive")
    d_tau = (tau_hi - tau_lo) / (n_points - 1)
    d_lam = 2.0 * np.pi / (n_points * d_tau)
    lam_max = 0.5 * n_points * d_lam
    if math.exp(-0.5 * (smear * lam_max) ** 2) > 1e-8:
        raise GridResolutionError(
            "coupling window too narrow for the requested smear; "
            "decrease the tau grid step"
        )
    lam = (np.arange(n_points) - n_points // 2) * d_lam
    g = np.asarray(ratio(lam), dtype=complex)
    apod = g * np.exp(-0.5 * (smear * lam) ** 2)
    # coverage: instantaneous delays over the effective coupling range must
    # fit inside the tau window, else the transform wraps around
    eff = np.abs(lam) <= min(lam_max, 8.0 / smear)
    phase = np.unwrap(np.angle(g[eff]))
    inst = np.diff(phase) / d_lam
    lo_need, hi_need = float(-inst.max()) , float(-inst.min())
    lo_need, hi_need = min(lo_need, 0.0), max(hi_need, 0.0)
    if lo_need - 5.0 * smear < tau_lo or hi_need + 5.0 * smear > tau_hi:
        raise GridResolutionError(
            f"tau window [{tau_lo}, {tau_hi}] does not cover the delay sweep "
            f"[{lo_need:.3g}, {hi_need:.3g}] plus smearing margins"
        )
    values = fourier_to_grid(apod, d_lam, tau_lo, d_tau, n_points)
    return HybridDistribution(tau_lo, d_tau, values)


# -- Larmor clock ----------------------------------------------------------------------


@dataclass(frozen=True)
class SpinClock:
    """Large spin polarized along x, precessing while the particle stays in
    the interaction region.

    Levels m = -j..j carry initial amplitudes proportional to
    exp(-m^2 / (2 j)).
    """

    j: float
    omega: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.j < 1:
            raise ValueError("need j >= 1")
        if abs(2 * self.j - round(2 * self.j)) > 1e-12:
            raise ValueError("j must be integer or half-integer")

    @property
    def levels(self) -> np.ndarray:
        n = int(round(2 * self.j)) + 1
        return -self.j + np.arange(n)

    def initial_amplitudes(self) -> np.ndarray:
        m = self.levels
        amp = np.exp(-(m**2) / (2.0 * self.j))
        return amp / np.linalg.norm(amp)


def _jy_apply(j: float, m: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Tridiagonal action of the spin y-component on level amplitudes."""
    a = np.sqrt(np.clip((j - m) * (j + m + 1.0), 0.0, None))  # raising weights
    out = np.zeros_like(psi)
    out[1:] += a[:-1] * psi[:-1]
    out[:-1] -= a[:-1] * psi[1:]
    return out / 2j


@dataclass(frozen=True)
class LarmorReadout:
    duration_mean: float
    duration_second: float
    jy_mean: float
    jy_second: float
    final_norm: float

    @property
    def variance_residual(self) -> float:
        return abs(self.duration_second - self.duration_mean**2)


def larmor_clock(
    ratio_or_model,
    clock: SpinClock,
    k: float | None = None,
) -> LarmorReadout:
    """Read the collision duration off a weakly coupled spin clock.

    Each level m picks up the scattering ratio at coupling m * omega; the
    duration estimates are T = <j_y> / (omega j) and
    T2 = (<j_y^2> - j/2) / (omega j)^2, which converge to the weak values
    of the traversal time as the clock weakens.
    """
    if callable(ratio_or_model):
        ratio = ratio_or_model
    else:
        ratio = coupling_ratio_function(ratio_or_model, k)
    m = clock.levels
    psi = ratio(m * clock.omega) * clock.initial_amplitudes()
    norm = float(np.linalg.norm(psi))
    if not np.isfinite(norm) or norm < 1e-12:
        raise PreconditionError("final clock state is not normalizable")
    psi = psi / norm
    jy_psi = _jy_apply(clock.j, m, psi)
    jy_mean = float(np.real(np.vdot(psi, jy_psi)))
    jy_second = float(np.real(np.vdot(jy_psi, jy_psi)))
    wj = clock.omega * clock.j
    return LarmorReadout(
        jy_mean / wj,
        (jy_second - clock.j / 2.0) / wj**2,
        jy_mean,
        jy_second,
        norm,
    )
