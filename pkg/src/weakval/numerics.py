"""Small numerical helpers used across the package.

Everything here is deliberately plain: uniform-grid trapezoid quadrature,
central finite differences with one Richardson extrapolation, and local
polynomial fits for derivatives at a point.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

# numpy renamed trapz -> trapezoid in 2.0
trapezoid = getattr(np, "trapezoid", None) or np.trapz


def next_pow_two(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def central_difference(
    func: Callable[[float], complex],
    x0: float,
    order: int,
    step: float,
    richardson: bool = True,
) -> complex:
    """Central finite difference of ``func`` at ``x0``.

    ``order`` is 1 or 2.  With ``richardson`` the stencil is evaluated at
    step ``h`` and ``h/2`` and extrapolated once, giving O(h^4) truncation.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")

    def stencil(h: float) -> complex:
        if order == 1:
            return (func(x0 + h) - func(x0 - h)) / (2.0 * h)
        return (func(x0 + h) - 2.0 * func(x0) + func(x0 - h)) / (h * h)

    if not richardson:
        return stencil(step)
    coarse = stencil(step)
    fine = stencil(step / 2.0)
    return (4.0 * fine - coarse) / 3.0


def poly_derivatives_at_zero(
    func: Callable[[np.ndarray], np.ndarray],
    max_order: int,
    radius: float,
    degree: int | None = None,
) -> np.ndarray:
    """Derivatives of an analytic function at 0 from a local polynomial fit.

    Samples ``func`` on Chebyshev points in [-radius, radius], fits a
    polynomial of the given degree by least squares and returns
    ``[f(0), f'(0), ..., f^(max_order)(0)]``.  Far more robust than high
    order finite differences when ``func`` is smooth on the window.
    """
    if degree is None:
        degree = max(max_order + 6, 12)
    n_nodes = 2 * degree + 1
    theta = np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    x = radius * np.cos(theta)
    y = np.asarray(func(x), dtype=complex)
    # fit in the scaled variable x/radius for conditioning
    coeffs = np.polynomial.polynomial.polyfit(x / radius, y, degree)
    out = np.empty(max_order + 1, dtype=complex)
    fact = 1.0
    for n in range(max_order + 1):
        if n > 0:
            fact *= n
        out[n] = coeffs[n] * fact / radius**n
    return out


def uniform_grid(start: float, step: float, n: int) -> np.ndarray:
    return start + step * np.arange(n)


def piecewise_linear_integral(
    x: np.ndarray, y: np.ndarray, a: float, b: float
) -> complex:
    """Exact integral over [a, b] of the polyline through (x, y).

    The polyline is treated as zero outside [x[0], x[-1]].  ``x`` must be
    uniformly increasing.
    """
    if a > b:
        raise ValueError("a must not exceed b")
    lo = max(a, x[0])
    hi = min(b, x[-1])
    if lo >= hi:
        return 0.0 + 0.0j
    step = x[1] - x[0]
    i_lo = int(np.searchsorted(x, lo, side="right")) - 1
    i_hi = int(np.searchsorted(x, hi, side="left"))
    i_lo = max(i_lo, 0)
    i_hi = min(i_hi, len(x) - 1)
    xs = np.concatenate(([lo], x[i_lo + 1 : i_hi], [hi]))
    ys = np.interp(xs, x, y.real) + 1j * np.interp(xs, x, y.imag)
    return complex(trapezoid(ys, xs))


def build_inverse_cdf(x: np.ndarray, density: np.ndarray, table_size: int = 1 << 17):
    """Tabulated inverse CDF for a non-negative density sampled on a grid.

    Returns a callable mapping uniform deviates in [0, 1) to samples.  The
    CDF is the exact integral of the piecewise-linear density, inverted on
    a uniform probability grid; lookups are vectorized interpolation.
    """
    dens = np.clip(density.astype(float), 0.0, None)
    step = x[1] - x[0]
    cell = 0.5 * (dens[1:] + dens[:-1]) * step
    cdf = np.concatenate(([0.0], np.cumsum(cell)))
    total = cdf[-1]
    if total <= 0.0:
        raise ValueError("density integrates to zero")
    cdf /= total
    u_grid = np.linspace(0.0, 1.0, table_size)
    inv = np.interp(u_grid, cdf, x)

    def sample(u: np.ndarray) -> np.ndarray:
        pos = u * (table_size - 1)
        idx = pos.astype(np.int64)
        frac = pos - idx
        idx = np.clip(idx, 0, table_size - 2)
        return inv[idx] * (1.0 - frac) + inv[idx + 1] * frac

    return sample


def fourier_to_grid(
    g_values: np.ndarray, lam_step: float, f_start: float, f_step: float, n_f: int
) -> np.ndarray:
    """Evaluate (2*pi)^-1 * integral(exp(i*f*lam) g(lam) dlam) on an f grid.

    ``g_values`` are samples of g on the symmetric grid
    ``lam_j = -N/2*dlam ... (N/2-1)*dlam``.  The f grid must satisfy the
    DFT pairing ``f_step * lam_step = 2*pi / N``; callers normally derive
    one grid from the other.
    """
    n = len(g_values)
    lam0 = -0.5 * n * lam_step
    if not np.isclose(f_step * lam_step * n, 2.0 * np.pi, rtol=1e-9):
        raise ValueError("f grid and lambda grid are not DFT conjugate")
    j = np.arange(n)
    h = g_values * np.exp(1j * f_start * j * lam_step)
    spectrum = np.fft.ifft(h) * n
    f = f_start + f_step * np.arange(n_f)
    if n_f > n:
        raise ValueError("requested more f points than the transform provides")
    phase = np.exp(1j * f * lam0)
    return (lam_step / (2.0 * np.pi)) * phase * spectrum[:n_f]
