"""Meter apparatus profiles.

The profile G describes the meter pointer's initial state: a real, even,
normalized function with scale parameter alpha.  The same object serves the
classical meter (G as a probability density for the initial pointer
position) and the quantum meter (G as the pointer amplitude, where the
reading statistics weight by G^2).

The Gaussian default is parametrized so that alpha is the standard
deviation of the density: G(f) proportional to exp(-f^2 / (2 alpha^2)).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numerics import trapezoid, uniform_grid


@dataclass(frozen=True)
class ApparatusProfile:
    """Real, even, normalized meter profile with scale ``alpha``.

    ``base`` is the unit-scale shape g(z); the physical profile is
    G(f) = g(f / alpha) (amplitude convention, normalization handled where
    it matters).  Custom bases must be even and decay within
    ``base_half_width``.
    """

    alpha: float
    base: str | Callable[[np.ndarray], np.ndarray] = "gaussian"
    base_half_width: float = 12.0
    base_points: int = 8193
    _z: np.ndarray = field(init=False, repr=False)
    _g: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        z = np.linspace(-self.base_half_width, self.base_half_width, self.base_points)
        g = np.asarray(self.base_callable()(z), dtype=float)
        if not np.allclose(g, g[::-1], rtol=0.0, atol=1e-12 * np.abs(g).max()):
            raise ValueError("profile base must be even")
        if g.min() < -1e-12 * np.abs(g).max():
            raise ValueError("profile base must be non-negative")
        edge = max(abs(g[0]), abs(g[-1]))
        if edge > 1e-10 * np.abs(g).max():
            raise ValueError("profile base does not decay within base_half_width")
        for name, arr in (("_z", z), ("_g", g)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def base_callable(self) -> Callable[[np.ndarray], np.ndarray]:
        if callable(self.base):
            return self.base
        if self.base == "gaussian":
            return lambda z: np.exp(-0.5 * z * z)
        raise ValueError(f"unknown base profile {self.base!r}")

    @property
    def is_gaussian(self) -> bool:
        return self.base == "gaussian"

    # -- evaluations --------------------------------------------------------

    def amplitude(self, f: np.ndarray) -> np.ndarray:
        """Unnormalized profile G(f) = g(f / alpha)."""
        if self.alpha == 0:
            raise ValueError("alpha = 0 profile is a delta; handle separately")
        return self.base_callable()(np.asarray(f) / self.alpha)

    def density(self, f: np.ndarray) -> np.ndarray:
        """G as a unit-integral probability density."""
        base_integral = float(trapezoid(self._g, self._z)) * self.alpha
        return self.amplitude(f) / base_integral

    # -- moments -------------------------------------------------------------

    def _base_moment(self, order: int, squared: bool) -> float:
        w = self._g**2 if squared else self._g
        return float(trapezoid(self._z**order * w, self._z) / trapezoid(w, self._z))

    def second_moment(self) -> float:
        """<f^2> of the profile density (classical pointer spread)."""
        return self.alpha**2 * self._base_moment(2, squared=False)

    def second_moment_intensity(self) -> float:
        """<f^2> weighted by G^2 (quantum pointer reading spread)."""
        return self.alpha**2 * self._base_moment(2, squared=True)

    # -- Fourier side --------------------------------------------------------

    def base_transform(self, lam: np.ndarray) -> np.ndarray:
        """(2*pi)^-1 * integral(exp(-i*lam*z) g(z) dz) on the given grid.

        Real and even for a real even base.
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        kernel = np.cos(np.outer(lam, self._z))
        vals = kernel @ (self._g * np.gradient(self._z)) / (2.0 * np.pi)
        return vals

    def base_transform_second_derivative(self, lam: np.ndarray) -> np.ndarray:
        """Second lambda-derivative of :meth:`base_transform`, by quadrature
        of the (-i z)^2-weighted integrand."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        kernel = np.cos(np.outer(lam, self._z))
        vals = kernel @ (-self._z**2 * self._g * np.gradient(self._z)) / (2.0 * np.pi)
        return vals

    # -- sampling ------------------------------------------------------------

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw pointer-noise samples from the profile density."""
        if self.alpha == 0:
            return np.zeros(size)
        if self.is_gaussian:
            return rng.normal(0.0, self.alpha, size)
        from .numerics import build_inverse_cdf

        sampler = build_inverse_cdf(self._z * self.alpha, self._g)
        return sampler(rng.random(size))


def readout_second_moment_factor(profile: ApparatusProfile) -> float:
    """The dimensionless correction factor weighting (Re <f^2>_w - |<f>_w|^2)
    in the broad-meter expansion of the reading's second moment.

    Evaluated by quadrature from the profile's Fourier transform:
    C = <z^2 Gt Gt''> / <Gt^2> - <z^2 Gt^2>/<Gt^2> * <Gt Gt''>/<Gt^2>,
    with all brackets plain integrals over the transform variable.
    For a Gaussian profile C = 1/2.
    """
    # The transform of a decaying base profile decays too; reuse the base
    # grid range, which is ample for the Gaussian-like shapes supported.
    z = np.linspace(-24.0, 24.0, 16385)
    gt = profile.base_transform(z)
    # second derivative with respect to the transform variable, i.e. the
    # (-i z')^2-weighted transform of the base
    lamlike = z
    kernel = np.cos(np.outer(lamlike, profile._z))
    gt2 = kernel @ (-profile._z**2 * profile._g * np.gradient(profile._z)) / (2.0 * np.pi)
    denom = float(trapezoid(gt * gt, z))
    t1 = float(trapezoid(z * z * gt * gt2, z)) / denom
    t2 = float(trapezoid(z * z * gt * gt, z)) / denom
    t3 = float(trapezoid(gt * gt2, z)) / denom
    return t1 - t2 * t3
