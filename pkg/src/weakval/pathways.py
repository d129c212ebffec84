"""Interfering versus exclusive alternatives.

When a meter resolves one group of pathways against the rest, amplitudes
add coherently inside each group and the squared group totals become the
exclusive-outcome probabilities.  This grouped-coherence rule reproduces
the intermediate-measurement probabilities for projectors with degenerate
outcomes, including the three-box configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import PreconditionError
from .quantum import FiniteSystem


@dataclass(frozen=True)
class PathAmplitudeSet:
    """Complex amplitudes of the distinguishable pathways."""

    amplitudes: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or len(amps) == 0:
            raise ValueError("amplitudes must form a non-empty 1-D sequence")
        if not np.any(np.abs(amps) > 0):
            raise ValueError("at least one amplitude must be non-zero")
        labels = self.labels or tuple(str(i + 1) for i in range(len(amps)))
        if len(labels) != len(amps):
            raise ValueError("labels must match amplitudes in length")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "labels", tuple(labels))

    def __len__(self) -> int:
        return len(self.amplitudes)


@dataclass(frozen=True)
class WatchPartition:
    """Disjoint covering groups of path indices (0-based)."""

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in g) for g in self.groups)
        flat = [i for g in groups for i in g]
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("groups must partition indices 0..d-1 exactly")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def watch_single(cls, index: int, total: int) -> "WatchPartition":
        rest = tuple(i for i in range(total) if i != index)
        return cls(((index,), rest))


def path_amplitudes(
    sys: FiniteSystem, psi0: np.ndarray, psi1: np.ndarray
) -> PathAmplitudeSet:
    """Constant-path amplitudes <psi1|n><n|psi0> in the observable
    eigenbasis; requires a zero Hamiltonian so paths cannot hop."""
    if not np.allclose(sys.hamiltonian, 0.0):
        raise PreconditionError(
            "path_amplitudes needs H = 0; use virtual_path_amplitudes for dynamics"
        )
    psi0 = np.asarray(psi0, dtype=complex)
    psi1 = np.asarray(psi1, dtype=complex)
    _, vecs = sys.observable_eigen
    amps = (psi1.conj() @ vecs).conj() * (vecs.conj().T @ psi0)
    return PathAmplitudeSet(amps)


def watched_probabilities(
    paths: PathAmplitudeSet, partition: WatchPartition
) -> np.ndarray:
    """Exclusive-outcome probabilities when the groups are resolved:
    amplitudes add coherently within a group, squared moduli across groups.
    """
    if max(i for g in partition.groups for i in g) >= len(paths):
        raise ValueError("partition indexes beyond the amplitude set")
    sums = np.array(
        [paths.amplitudes[list(g)].sum() for g in partition.groups], dtype=complex
    )
    weights = np.abs(sums) ** 2
    total = weights.sum()
    if total <= 0.0:
        raise PreconditionError(
            "every group amplitude vanishes: the watching extinguishes the transition"
        )
    return weights / total


@dataclass(frozen=True)
class ShutterReport:
    """Effect of plugging a pair of pathways on the detector count."""

    pair: tuple[int, int] | None
    pair_amplitude_sum: complex | None
    count_before: float
    count_after: float | None
    count_changed: bool | None
    preserving_pairs: tuple[tuple[int, int], ...]


def shutter_sensitivity(
    paths: PathAmplitudeSet,
    pair: tuple[int, int] | None = None,
    tol: float = 1e-12,
) -> ShutterReport:
    """Report whether zeroing a pair of pathways changes the detector count
    |sum A|^2, and list every count-preserving pair.

    A pair is count-preserving when its two amplitudes cancel exactly:
    removal then leaves the total amplitude itself unchanged, so the count
    is unaffected no matter how the remaining paths interfere downstream.
    (A pair may coincidentally leave |sum A|^2 unchanged while altering the
    amplitude; the per-pair report exposes that case.)
    """
    amps = paths.amplitudes
    scale = float(np.abs(amps).max())
    total = amps.sum()
    count_before = float(abs(total) ** 2)
    preserving = tuple(
        (i, j)
        for i, j in combinations(range(len(amps)), 2)
        if abs(amps[i] + amps[j]) <= tol * max(scale, 1e-300)
    )
    if pair is None:
        return ShutterReport(None, None, count_before, None, None, preserving)
    i, j = pair
    after = total - amps[i] - amps[j]
    count_after = float(abs(after) ** 2)
    changed = abs(count_after - count_before) > tol * max(count_before, scale**2, 1e-300)
    return ShutterReport(
        (i, j), complex(amps[i] + amps[j]), count_before, count_after,
        bool(changed), preserving,
    )
