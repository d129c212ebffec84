"""Partial-wave scattering amplitude, differential cross-section, the local
angular momentum LAM(theta) and its decomposition over even Fourier modes.

LAM is the angle derivative of the amplitude's phase.  Rewriting the
amplitude as a Fourier series in even integer modes L expresses LAM as an
average of L over a normalized, generally sign-changing weight set
w_L(theta): another improper distribution, which near deep cross-section
minima takes values outside anything a probability could produce.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, GridResolutionError, PreconditionError

AMPLITUDE_FLOOR = 1e-13


@dataclass(frozen=True)
class PartialWaveSet:
    """Complex S-matrix elements S^J for J = 0..J_max at fixed energy."""

    energy: float
    wavevector: float
    s_elements: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s_elements, dtype=complex)
        if s.ndim != 1 or len(s) == 0:
            raise ValueError("s_elements must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(s.real)) or not np.all(np.isfinite(s.imag)):
            raise ValueError("s_elements must be finite")
        if self.wavevector <= 0:
            raise ValueError("wavevector must be positive")
        s.flags.writeable = False
        object.__setattr__(self, "s_elements", s)

    @property
    def j_max(self) -> int:
        return len(self.s_elements) - 1


def _legendre_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """P_0..P_n_max at points x by upward recurrence; shape (n_max+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = np.empty((n_max + 1, len(x)))
    table[0] = 1.0
    if n_max >= 1:
        table[1] = x
    for n in range(1, n_max):
        table[n + 1] = ((2 * n + 1) * x * table[n] - n * table[n - 1]) / (n + 1)
    return table


def default_prefactor(k: float) -> complex:
    """The literal (i k)^{-1/2} amplitude prefactor.

    Every reported quantity (DCS shape, LAM, w_L) is invariant under a
    constant rescaling of the amplitude, so the choice only fixes overall
    units; a different prefactor may be passed to the amplitude functions.
    """
    return complex(1.0 / np.sqrt(1j * k))


def amplitude(
    pw: PartialWaveSet, theta, prefactor: complex | None = None
) -> complex | np.ndarray:
    """Scattering amplitude f(theta) = prefactor * sum (J + 1/2) P_J S^J."""
    pref = default_prefactor(pw.wavevector) if prefactor is None else prefactor
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    table = _legendre_table(pw.j_max, np.cos(th))
    j = np.arange(pw.j_max + 1)
    vals = pref * ((j + 0.5) * pw.s_elements) @ table
    return complex(vals[0]) if np.asarray(theta).ndim == 0 else vals


def amplitude_theta_derivative(
    pw: PartialWaveSet, theta, prefactor: complex | None = None
) -> complex | np.ndarray:
    """d f / d theta via the Legendre derivative recurrence
    dP_J/dtheta = -J (P_{J-1} - cos(theta) P_J) / sin(theta)."""
    pref = default_prefactor(pw.wavevector) if prefactor is None else prefactor
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    x = np.cos(th)
    s = np.sin(th)
    if np.any(np.abs(s) < 1e-12):
        raise PreconditionError("amplitude derivative is singular at theta = 0, pi")
    table = _legendre_table(pw.j_max, x)
    vals = np.zeros(len(th), dtype=complex)
    for j in range(1, pw.j_max + 1):
        dp = -j * (table[j - 1] - x * table[j]) / s
        vals += (j + 0.5) * pw.s_elements[j] * dp
    vals *= pref
    return complex(vals[0]) if np.asarray(theta).ndim == 0 else vals


def differential_cross_section(pw: PartialWaveSet, theta) -> np.ndarray:
    f = amplitude(pw, theta)
    return np.abs(np.atleast_1d(f)) ** 2


def local_angular_momentum(pw: PartialWaveSet, theta) -> float | np.ndarray:
    """LAM(theta) = Re[-i f'(theta) / f(theta)].

    Near zeros of the cross-section LAM legitimately spikes; the error
    below fires only when |f| is at machine level and the log-derivative
    is numerically meaningless.
    """
    f = np.atleast_1d(amplitude(pw, theta))
    scale = float(np.abs(pw.s_elements).max()) * (pw.j_max + 1) ** 2
    scale /= math.sqrt(pw.wavevector)
    if np.any(np.abs(f) < AMPLITUDE_FLOOR * max(scale, 1e-300)):
        tiny = float(np.abs(f).min())
        raise PreconditionError(
            f"|f| = {tiny:.3e} below the log-derivative floor at this angle"
        )
    fp = np.atleast_1d(amplitude_theta_derivative(pw, theta))
    vals = np.real(-1j * fp / f)
    return float(vals[0]) if np.asarray(theta).ndim == 0 else vals


def lam_from_phase(
    f_of_theta, theta: float, step: float = 1e-6
) -> float:
    """LAM from the central phase difference of an amplitude callable:
    arg(f(theta+h) / f(theta-h)) / (2h).  Independent of the recurrence
    route; accurate while the phase change across 2h stays below pi."""
    ratio = complex(f_of_theta(theta + step)) / complex(f_of_theta(theta - step))
    return float(np.angle(ratio) / (2.0 * step))


# -- even-mode decomposition -------------------------------------------------------


@dataclass(frozen=True)
class LamDecomposition:
    theta: float
    modes: np.ndarray          # even L values
    phi_l: np.ndarray          # Phi_L(theta) per mode
    w_l: np.ndarray            # normalized real weights per mode
    lam: float                 # sum of L * w_L
    lam_log_derivative: float  # analytic route, for comparison
    reconstruction_error: float


def decompose(
    pw: PartialWaveSet,
    theta: float,
    l_max: int | None = None,
    n_quad: int = 4096,
    reconstruction_tol: float = 1e-6,
    prefactor: complex | None = None,
) -> LamDecomposition:
    """Express f(theta) over even Fourier modes and read off the LAM as a
    weighted mode average.

    Phi_L(theta) = pi^-1 e^{i L theta} integral_0^pi f(theta') e^{-i L theta'},
    for even L in [-l_max, l_max] (composite Simpson quadrature);
    w_L = Re[Phi_L / sum Phi_L'].  The weights sum to one by construction
    and sum(L w_L) reproduces LAM up to truncation.  If the truncated mode
    sum fails to reconstruct f at this angle the set is not resolvable at
    this l_max (odd-J content decays only slowly in L) and an error asks
    for a larger l_max.
    """
    if not 0.0 < theta < math.pi:
        raise PreconditionError("theta must lie strictly inside (0, pi)")
    if l_max is None:
        l_max = 2 * (pw.j_max + pw.j_max % 2) + 8
    if l_max % 2 or l_max <= 0:
        raise ValueError("l_max must be a positive even integer")
    if n_quad % 2:
        raise ValueError("n_quad (Simpson interval count) must be even")
    nodes = np.linspace(0.0, math.pi, n_quad + 1)
    weights = np.ones(n_quad + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= (math.pi / n_quad) / 3.0
    f_nodes = amplitude(pw, nodes, prefactor=prefactor)
    modes = np.arange(-l_max, l_max + 1, 2)
    coeffs = np.exp(-1j * np.outer(modes, nodes)) @ (weights * f_nodes) / math.pi
    phi_l = coeffs * np.exp(1j * modes * theta)
    f_here = complex(amplitude(pw, theta, prefactor=prefactor))
    total = phi_l.sum()
    recon = abs(total - f_here) / max(abs(f_here), 1e-300)
    if recon > reconstruction_tol:
        raise GridResolutionError(
            f"mode sum misses f(theta) by {recon:.2e} relative at l_max = {l_max}; "
            f"increase l_max"
        )
    w_l = np.real(phi_l / total)
    lam_w = float(np.dot(modes, w_l))
    lam_ld = float(local_angular_momentum(pw, theta))
    return LamDecomposition(theta, modes, phi_l, w_l, lam_w, lam_ld, recon)


# -- ingestion ----------------------------------------------------------------------


def ingest_partial_waves(path) -> PartialWaveSet:
    """Load a partial-wave set from CSV (``J,re,im``, contiguous J from 0)
    or JSON (``{"energy":, "k":, "s_elements": [[re, im], ...]}``).

    CSV carries no wavevector; it defaults to 1, which only fixes the
    (reported-quantity-invariant) amplitude prefactor.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"partial-wave file {path} does not exist")
    if path.suffix.lower() == ".json":
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        try:
            energy = float(payload["energy"])
            k = float(payload["k"])
            elements = [complex(re, im) for re, im in payload["s_elements"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad partial-wave JSON schema in {path}: {exc}") from exc
        if k <= 0:
            raise ConfigError(f"wavevector k = {k} must be positive in {path}")
        try:
            return PartialWaveSet(energy, k, np.asarray(elements))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ConfigError(f"{path} is empty")
        if [h.strip() for h in header] != ["J", "re", "im"]:
            raise ConfigError(f"{path} line 1: expected header 'J,re,im'")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                j = int(row[0])
                val = complex(float(row[1]), float(row[2]))
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"{path} line {lineno}: {exc}") from exc
            if not (np.isfinite(val.real) and np.isfinite(val.imag)):
                raise ConfigError(f"{path} line {lineno}: non-finite S element")
            if j != len(rows):
                raise ConfigError(
                    f"{path} line {lineno}: J values must be contiguous from 0, got {j}"
                )
            rows.append(val)
    if not rows:
        raise ConfigError(f"{path} contains no S elements")
    return PartialWaveSet(energy=0.5, wavevector=1.0, s_elements=np.asarray(rows))
