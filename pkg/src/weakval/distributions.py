"""Algebra of proper, improper and complex normalized distributions.

The central object is :class:`HybridDistribution`: a complex-valued density
sampled on a uniform grid plus a list of weighted point spikes.  A single
carrier type lets every moment routine handle smooth densities, delta combs
and mixtures of the two uniformly.  Smooth parts integrate by the trapezoid
rule; spikes integrate exactly.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DegenerateNormalizationError, PreconditionError
from .numerics import piecewise_linear_integral, trapezoid, uniform_grid

#: relative factor entering the degeneracy threshold for |integral(rho)|
DEGENERACY_RELATIVE = 1e-12


def _merged_spikes(spikes: Iterable[tuple[float, complex]]):
    locs: list[float] = []
    weights: list[complex] = []
    for loc, w in sorted(spikes, key=lambda s: s[0]):
        loc = float(loc)
        if not np.isfinite(loc):
            raise ValueError("spike locations must be finite")
        if locs and loc == locs[-1]:
            weights[-1] += complex(w)
        else:
            locs.append(loc)
            weights.append(complex(w))
    return np.asarray(locs, dtype=float), np.asarray(weights, dtype=complex)


@dataclass(frozen=True)
class HybridDistribution:
    """Complex density on a uniform grid plus weighted point spikes.

    Either part may be empty.  Values are immutable after construction;
    all operations are pure functions, so instances are safe to share
    across threads.
    """

    grid_start: float = 0.0
    grid_step: float = 1.0
    values: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    spike_locations: np.ndarray = field(default_factory=lambda: np.empty(0))
    spike_weights: np.ndarray = field(
        default_factory=lambda: np.empty(0, dtype=complex)
    )

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.size == 1:
            raise ValueError("smooth part needs at least 2 samples (or none)")
        if self.grid_step <= 0:
            raise ValueError("grid_step must be positive")
        locs, weights = _merged_spikes(
            zip(np.asarray(self.spike_locations, float), self.spike_weights)
        )
        for name, arr in (
            ("values", values),
            ("spike_locations", locs),
            ("spike_weights", weights),
        ):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (np.all(np.isfinite(values.real)) and np.all(np.isfinite(values.imag))):
            raise ValueError("smooth samples must be finite")

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_spikes(cls, spikes: Sequence[tuple[float, complex]]) -> "HybridDistribution":
        locs, weights = _merged_spikes(spikes)
        return cls(0.0, 1.0, np.empty(0, dtype=complex), locs, weights)

    @classmethod
    def from_callable(
        cls, fn: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int
    ) -> "HybridDistribution":
        if n < 2 or b <= a:
            raise ValueError("need b > a and n >= 2")
        step = (b - a) / (n - 1)
        grid = uniform_grid(a, step, n)
        return cls(a, step, np.asarray(fn(grid), dtype=complex))

    # -- basic structure ---------------------------------------------------

    @property
    def grid(self) -> np.ndarray:
        return uniform_grid(self.grid_start, self.grid_step, len(self.values))

    @property
    def has_smooth(self) -> bool:
        return len(self.values) > 0

    @property
    def has_spikes(self) -> bool:
        return len(self.spike_locations) > 0

    def support(self) -> tuple[float, float]:
        los, his = [], []
        if self.has_smooth:
            los.append(self.grid_start)
            his.append(self.grid_start + self.grid_step * (len(self.values) - 1))
        if self.has_spikes:
            los.append(float(self.spike_locations.min()))
            his.append(float(self.spike_locations.max()))
        if not los:
            raise PreconditionError("empty distribution has no support")
        return min(los), max(his)

    def scaled(self, c: complex) -> "HybridDistribution":
        return HybridDistribution(
            self.grid_start,
            self.grid_step,
            self.values * c,
            self.spike_locations,
            self.spike_weights * c,
        )

    # -- integration and moments -------------------------------------------

    def integrate(self, a: float | None = None, b: float | None = None) -> complex:
        """Trapezoid integral of the smooth part over [a, b] plus the exact
        sum of spike weights located inside [a, b].

        With no bounds the full support is used, which returns the
        normalization integral.
        """
        if a is None and b is None:
            total = 0.0 + 0.0j
            if self.has_smooth:
                total += complex(trapezoid(self.values, dx=self.grid_step))
            if self.has_spikes:
                total += complex(self.spike_weights.sum())
            return total
        if a is None or b is None:
            raise ValueError("give both bounds or neither")
        if not (np.isfinite(a) and np.isfinite(b)) or a > b:
            raise ValueError("need finite a <= b")
        total = 0.0 + 0.0j
        if self.has_smooth:
            total += piecewise_linear_integral(self.grid, self.values, a, b)
        if self.has_spikes:
            mask = (self.spike_locations >= a) & (self.spike_locations <= b)
            total += complex(self.spike_weights[mask].sum())
        return total

    def norm(self) -> complex:
        return self.integrate()

    def degeneracy_threshold(self) -> float:
        """Scale below which |integral(rho)| is treated as vanishing."""
        scale = 0.0
        if self.has_smooth:
            span = self.grid_step * (len(self.values) - 1)
            scale += float(np.abs(self.values).max(initial=0.0)) * span
        if self.has_spikes:
            scale += float(np.abs(self.spike_weights).sum())
        return DEGENERACY_RELATIVE * scale

    def raw_integral(self, order: int) -> complex:
        """Unnormalized integral of f^order against the distribution."""
        total = 0.0 + 0.0j
        if self.has_smooth:
            total += complex(
                trapezoid(self.grid**order * self.values, dx=self.grid_step)
            )
        if self.has_spikes:
            total += complex((self.spike_locations**order * self.spike_weights).sum())
        return total

    def moments(self, max_order: int = 2) -> "MomentReport":
        """Normalized moments <f^n> for n = 1..max_order.

        When |integral(rho)| falls below the degeneracy threshold the report
        is flagged degenerate and carries no moment values; this marks the
        anomalous-weak-value regime, not a failure.
        """
        if max_order < 1:
            raise ValueError("max_order must be >= 1")
        norm = self.norm()
        threshold = self.degeneracy_threshold()
        if abs(norm) < threshold:
            return MomentReport(norm, (), None, True, threshold)
        raw = tuple(self.raw_integral(n) / norm for n in range(1, max_order + 1))
        variance = None
        if max_order >= 2:
            variance = raw[1] - raw[0] ** 2
        return MomentReport(norm, raw, variance, False, threshold)

    def mean(self) -> complex:
        return self.moments(1).raw_moments[0]

    def variance(self) -> complex:
        return self.moments(2).variance


@dataclass(frozen=True)
class MomentReport:
    """Normalization integral and normalized raw moments of a distribution."""

    norm: complex
    raw_moments: tuple[complex, ...]
    variance: complex | None
    degenerate: bool
    threshold: float

    def require_proper(self) -> "MomentReport":
        if self.degenerate:
            raise DegenerateNormalizationError(abs(self.norm), self.threshold)
        return self


# -- operations on distributions ------------------------------------------


def decompose_complex(d: HybridDistribution) -> tuple[HybridDistribution, HybridDistribution]:
    """Split the normalized distribution d / integral(d) into real and
    imaginary parts w1 + i*w2 with integral(w1) = 1 and integral(w2) = 0.
    """
    norm = d.norm()
    if abs(norm) < d.degeneracy_threshold():
        raise DegenerateNormalizationError(abs(norm), d.degeneracy_threshold())
    w = d.scaled(1.0 / norm)
    w1 = HybridDistribution(
        w.grid_start,
        w.grid_step,
        w.values.real.astype(complex),
        w.spike_locations,
        w.spike_weights.real.astype(complex),
    )
    w2 = HybridDistribution(
        w.grid_start,
        w.grid_step,
        w.values.imag.astype(complex),
        w.spike_locations,
        w.spike_weights.imag.astype(complex),
    )
    return w1, w2


@dataclass(frozen=True)
class VarianceRootReport:
    roots: tuple[float, ...]
    identically_zero: bool


def variance_zero_locus(
    family: Callable[[float], HybridDistribution],
    bracket: tuple[float, float],
    tolerance: float = 1e-10,
    scan_points: int = 64,
) -> VarianceRootReport:
    """Roots of epsilon -> Var[family(epsilon)] inside the bracket.

    The variance (real part) is sampled on ``scan_points`` values, sign
    changes are bisected to ``tolerance``.  A family whose variance stays
    below machine scale across the whole bracket is reported as identically
    zero instead.
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")

    def var(eps: float) -> float:
        return float(family(eps).variance().real)

    xs = np.linspace(lo, hi, scan_points)
    vs = np.array([var(x) for x in xs])
    if np.all(np.abs(vs) < 1e-13 * max(1.0, np.abs(xs).max())):
        return VarianceRootReport((), True)
    roots = []
    for i in range(scan_points - 1):
        va, vb = vs[i], vs[i + 1]
        if va == 0.0:
            roots.append(float(xs[i]))
            continue
        if va * vb < 0.0:
            a, b = float(xs[i]), float(xs[i + 1])
            fa = va
            while b - a > tolerance:
                m = 0.5 * (a + b)
                fm = var(m)
                if fa * fm <= 0.0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    if vs[-1] == 0.0:
        roots.append(float(xs[-1]))
    return VarianceRootReport(tuple(roots), False)


def sine_offset_family(
    epsilon: float,
    n_points: int = 262145,
    support: tuple[float, float] = (0.0, 1.0),
) -> HybridDistribution:
    """The benchmark alternating density sin(2*pi*u) + epsilon on [a, b],
    with u the coordinate rescaled to [0, 1]; zero outside.

    For |epsilon| < 1 the density changes sign, making the normalized
    distribution improper; closed-form moments on [0, 1] are
    integral = epsilon, <f> = 1/2 - 1/(2*pi*epsilon) and
    <f^2> = 1/3 - 1/(2*pi*epsilon).
    """
    a, b = support
    if not b > a:
        raise ValueError("support must satisfy b > a")

    def density(f: np.ndarray) -> np.ndarray:
        u = (f - a) / (b - a)
        return np.sin(2.0 * np.pi * u) + epsilon

    return HybridDistribution.from_callable(density, a, b, n_points)


# -- CSV serialization -----------------------------------------------------


def write_distribution_csv(
    d: HybridDistribution, smooth_path, spikes_path=None
) -> None:
    """Write the smooth part as ``f,re,im`` rows and, optionally, the spike
    list as ``location,re,im`` rows to a companion file."""
    with open(smooth_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["f", "re", "im"])
        for f, v in zip(d.grid, d.values):
            writer.writerow([f"{f:.12g}", f"{v.real:.12g}", f"{v.imag:.12g}"])
    if spikes_path is not None:
        with open(spikes_path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["location", "re", "im"])
            for loc, w in zip(d.spike_locations, d.spike_weights):
                writer.writerow([f"{loc:.12g}", f"{w.real:.12g}", f"{w.imag:.12g}"])


def read_distribution_csv(smooth_path, spikes_path=None) -> HybridDistribution:
    """Inverse of :func:`write_distribution_csv`; grids must be uniform."""
    grid, values = [], []
    with open(smooth_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["f", "re", "im"]:
            raise ValueError(f"unexpected header {header!r} in {smooth_path}")
        for row in reader:
            grid.append(float(row[0]))
            values.append(float(row[1]) + 1j * float(row[2]))
    spikes: list[tuple[float, complex]] = []
    if spikes_path is not None:
        with open(spikes_path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for row in reader:
                spikes.append((float(row[0]), float(row[1]) + 1j * float(row[2])))
    if grid:
        steps = np.diff(grid)
        if steps.size and not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ValueError("smooth grid in CSV is not uniform")
        locs, weights = _merged_spikes(spikes)
        return HybridDistribution(
            grid[0], float(steps[0]) if steps.size else 1.0,
            np.asarray(values, dtype=complex), locs, weights,
        )
    return HybridDistribution.from_spikes(spikes)
