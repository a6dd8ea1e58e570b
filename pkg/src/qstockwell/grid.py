"""Uniformly sampled quaternion fields and integrals under the normalized measure.

The measure on the plane is ``dx / (2 pi)``, so a Riemann sum over a grid
carries the weight ``step_x * step_y / (2 pi)``.  Reductions go through
``math.fsum`` in row-major order, which makes them independent of how the
work producing the summands was scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quat
from .analytic import Evaluator

TWO_PI = 2.0 * math.pi

__all__ = [
    "Axis",
    "QField",
    "RegionMask",
    "GridMismatchError",
    "canonical_axis",
    "offset_axis",
    "exact_sum",
    "integrate",
    "lp_norm",
    "inner",
    "scalar_inner",
    "sample_analytic",
]


class GridMismatchError(ValueError):
    """Two fields were combined on different grids."""


@dataclass(frozen=True)
class Axis:
    """Sample positions ``start + n * step`` for ``n = 0 .. count-1``."""

    count: int
    start: float
    step: float

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis needs at least 2 samples, got {self.count}")
        if not self.step > 0:
            raise ValueError(f"axis step must be positive, got {self.step}")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "step", float(self.step))

    @property
    def points(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @property
    def stop(self) -> float:
        """One step past the last sample."""
        return self.start + self.count * self.step

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the point set is mirror-symmetric about 0."""
        return abs(2 * self.start + (self.count - 1) * self.step) <= tol * self.step * self.count

    def lattice_index(self, x: float, tol: float = 1e-9) -> Optional[int]:
        """Index ``n`` with ``start + n*step == x`` on the infinite lattice, else None."""
        pos = (x - self.start) / self.step
        n = round(pos)
        return int(n) if abs(pos - n) <= tol else None

    def contains_zero(self) -> bool:
        n = self.lattice_index(0.0)
        return n is not None and 0 <= n < self.count


def canonical_axis(half_extent: float = 8.0, count: int = 64) -> Axis:
    """``count`` samples covering ``[-L, L)``."""
    return Axis(count, -half_extent, 2.0 * half_extent / count)


def offset_axis(half_extent: float, count: int) -> Axis:
    """Midpoints of ``count`` equal cells on ``[-L, L]``; with even count no point is 0."""
    step = 2.0 * half_extent / count
    return Axis(count, -half_extent + step / 2, step)


def exact_sum(values: np.ndarray) -> float:
    """Correctly rounded sum of all entries, traversed in row-major order."""
    return math.fsum(np.ravel(np.asarray(values, float)))


@dataclass(frozen=True, eq=False)
class QField:
    """Quaternion samples of shape ``(count_x, count_y, 4)`` on a product grid."""

    axis_x: Axis
    axis_y: Axis
    samples: np.ndarray
    evaluator: Optional[Evaluator] = field(default=None, repr=False)

    def __post_init__(self):
        s = np.array(self.samples, dtype=float)
        expected = (self.axis_x.count, self.axis_y.count, 4)
        if s.shape != expected:
            raise ValueError(f"samples have shape {s.shape}, expected {expected}")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @classmethod
    def zeros(cls, axis_x: Axis, axis_y: Axis) -> "QField":
        return cls(axis_x, axis_y, np.zeros((axis_x.count, axis_y.count, 4)))

    @property
    def axes(self) -> tuple[Axis, Axis]:
        return (self.axis_x, self.axis_y)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.axis_x.count, self.axis_y.count)

    @property
    def cell_area(self) -> float:
        return self.axis_x.step * self.axis_y.step

    @property
    def weight(self) -> float:
        """Riemann weight of one cell under the normalized measure."""
        return self.cell_area / TWO_PI

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Broadcastable coordinate arrays of shapes ``(Nx, 1)`` and ``(1, Ny)``."""
        return self.axis_x.points[:, None], self.axis_y.points[None, :]

    def congruent(self, other: "QField") -> bool:
        return self.axis_x == other.axis_x and self.axis_y == other.axis_y

    def require_congruent(self, other: "QField") -> None:
        if not self.congruent(other):
            raise GridMismatchError(
                f"grid mismatch: {self.axes} vs {other.axes}"
            )

    def with_samples(self, samples: np.ndarray, evaluator: Optional[Evaluator] = None) -> "QField":
        return type(self)(self.axis_x, self.axis_y, samples, evaluator)

    def __add__(self, other: "QField") -> "QField":
        self.require_congruent(other)
        ev = None
        if self.evaluator is not None and other.evaluator is not None:
            ev = self.evaluator + other.evaluator
        return self.with_samples(self.samples + other.samples, ev)

    def __sub__(self, other: "QField") -> "QField":
        return self + other.lmul(-1.0)

    def lmul(self, q) -> "QField":
        """Multiply every sample on the left by ``q`` (quaternion or real)."""
        q = _as_scalar_quat(q)
        ev = self.evaluator.lscale(q) if self.evaluator is not None else None
        return self.with_samples(quat.mul(q, self.samples), ev)

    def rmul(self, q) -> "QField":
        """Multiply every sample on the right by ``q``; drops the evaluator."""
        return self.with_samples(quat.mul(self.samples, _as_scalar_quat(q)))

    def conj(self) -> "QField":
        from .analytic import Conjugated

        ev = Conjugated(self.evaluator) if self.evaluator is not None else None
        return self.with_samples(quat.conj(self.samples), ev)

    def modulus(self) -> np.ndarray:
        return quat.modulus(self.samples)


def _as_scalar_quat(q) -> np.ndarray:
    q = np.asarray(q, float)
    if q.shape == ():
        return np.array([float(q), 0.0, 0.0, 0.0])
    return quat.as_quat(q)


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Boolean selection of cells in a coefficient volume, with its normalized measure.

    ``cell_volume`` is the raw (unnormalized) volume of one cell.  For a
    4-D volume the normalized measure divides by ``(2 pi)^2``; in general by
    ``(2 pi)^(ndim/2)``.
    """

    mask: np.ndarray
    cell_volume: float
    measure: float = field(init=False)

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        m.flags.writeable = False
        object.__setattr__(self, "mask", m)
        norm = TWO_PI ** (m.ndim / 2.0)
        object.__setattr__(self, "measure", int(m.sum()) * self.cell_volume / norm)

    def complement(self) -> "RegionMask":
        return RegionMask(~self.mask, self.cell_volume)

    def __or__(self, other: "RegionMask") -> "RegionMask":
        return RegionMask(self.mask | other.mask, self.cell_volume)


def integrate(f: QField) -> np.ndarray:
    """Riemann sum of ``f`` under the normalized measure; returns a quaternion."""
    w = f.weight
    return np.array([exact_sum(f.samples[..., c]) * w for c in range(4)])


def lp_norm(f: QField, p: float) -> float:
    """``(integral |f|^p)^(1/p)``; ``p = inf`` gives the largest sample modulus."""
    if p == math.inf:
        return float(np.max(f.modulus()))
    if not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    if p == 2:
        total = exact_sum(quat.modulus2(f.samples))
    else:
        total = exact_sum(f.modulus() ** p)
    return (total * f.weight) ** (1.0 / p)


def inner(f: QField, g: QField) -> np.ndarray:
    """Quaternion inner product ``integral f * conj(g)``."""
    f.require_congruent(g)
    prod = quat.mul(f.samples, quat.conj(g.samples))
    w = f.weight
    return np.array([exact_sum(prod[..., c]) * w for c in range(4)])


def scalar_inner(f: QField, g: QField) -> float:
    """Real part of :func:`inner`, computed without the imaginary parts."""
    f.require_congruent(g)
    return exact_sum(np.einsum("...c,...c->...", f.samples, g.samples)) * f.weight


def sample_analytic(descriptor: Evaluator, axes: tuple[Axis, Axis]) -> QField:
    """Sample a closed-form evaluator on a product grid, keeping the evaluator."""
    if not isinstance(descriptor, Evaluator):
        raise TypeError(f"not an evaluator: {descriptor!r}")
    ax, ay = axes
    samples = descriptor(ax.points[:, None], ay.points[None, :])
    samples = np.broadcast_to(samples, (ax.count, ay.count, 4))
    return QField(ax, ay, samples, descriptor)
