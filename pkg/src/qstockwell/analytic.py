"""Closed-form field evaluators.

An evaluator is a small frozen object that maps coordinate arrays
``(x1, x2)`` (anything that broadcasts) to quaternion values with a
trailing axis of 4.  Fields that carry one can be resampled exactly under
translation, dilation and reflection, which keeps interpolation error out
of operator-identity checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import quat

__all__ = [
    "Evaluator",
    "Gaussian",
    "ModulatedGaussian",
    "DifferenceOfGaussians",
    "Combination",
    "Modulated",
    "Translated",
    "Dilated",
    "Reflected",
    "Conjugated",
    "SplineEvaluator",
    "dog_profile",
    "dog_spectrum",
    "make_descriptor",
]


class Evaluator:
    """Base class; subclasses implement ``__call__(x1, x2)``."""

    def __call__(self, x1, x2) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def __add__(self, other: "Evaluator") -> "Combination":
        return Combination(((quat.ONE, self), (quat.ONE, other)))

    def lscale(self, q) -> "Combination":
        """Left multiplication by a constant quaternion."""
        return Combination(((quat.Quaternion(*np.asarray(q, float)), self),))


def _real_to_quat(values: np.ndarray) -> np.ndarray:
    out = np.zeros(values.shape + (4,))
    out[..., 0] = values
    return out


@dataclass(frozen=True)
class Gaussian(Evaluator):
    """``amplitude * exp(-(x1-c1)^2/(2 s1^2) - (x2-c2)^2/(2 s2^2))``."""

    sigma1: float = 1.0
    sigma2: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)
    amplitude: float = 1.0

    def __post_init__(self):
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("Gaussian widths must be positive")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, float) - self.center[0]
        x2 = np.asarray(x2, float) - self.center[1]
        g = self.amplitude * np.exp(
            -(x1 * x1) / (2 * self.sigma1**2) - (x2 * x2) / (2 * self.sigma2**2)
        )
        return _real_to_quat(g)


@dataclass(frozen=True)
class ModulatedGaussian(Evaluator):
    """A Gaussian carrying the two-sided plane wave ``e^{i w1 x1} g e^{j w2 x2}``.

    Its spectrum is the Gaussian's spectrum moved to ``(w1, w2)``.
    """

    sigma1: float = 1.0
    sigma2: float = 1.0
    omega: tuple[float, float] = (0.0, 0.0)
    center: tuple[float, float] = (0.0, 0.0)
    amplitude: float = 1.0

    def __post_init__(self):
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValueError("Gaussian widths must be positive")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        base = Gaussian(self.sigma1, self.sigma2, self.center, self.amplitude)(x1, x2)
        left = quat.exp_i(self.omega[0] * x1)
        right = quat.exp_j(self.omega[1] * x2)
        return quat.mul(quat.mul(left, base), right)


def dog_spectrum(u, alpha: float, beta: float) -> np.ndarray:
    """Per-axis spectral profile ``e^{-a u^2} - e^{b-a} e^{-b u^2}``; zero at |u| = 1."""
    u = np.asarray(u, float)
    return np.exp(-alpha * u * u) - math.exp(beta - alpha) * np.exp(-beta * u * u)


def dog_profile(x, alpha: float, beta: float) -> np.ndarray:
    """Spatial profile whose normalized 1-D transform is :func:`dog_spectrum`."""
    x = np.asarray(x, float)
    return (2 * alpha) ** -0.5 * np.exp(-x * x / (4 * alpha)) - math.exp(
        beta - alpha
    ) * (2 * beta) ** -0.5 * np.exp(-x * x / (4 * beta))


@dataclass(frozen=True)
class DifferenceOfGaussians(Evaluator):
    """Separable window ``w(x1) w(x2)`` built from :func:`dog_profile`."""

    alpha: float = 0.5
    beta: float = 2.0

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.alpha == self.beta:
            raise ValueError("alpha and beta must differ")

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        return _real_to_quat(
            dog_profile(x1, self.alpha, self.beta) * dog_profile(x2, self.alpha, self.beta)
        )

    def spectrum(self, u, v) -> np.ndarray:
        """Exact two-sided transform; real and even."""
        return _real_to_quat(
            dog_spectrum(u, self.alpha, self.beta) * dog_spectrum(v, self.alpha, self.beta)
        )

    def integral(self) -> float:
        """Integral under the normalized measure, i.e. the spectrum at the origin."""
        return float(dog_spectrum(0.0, self.alpha, self.beta)) ** 2


@dataclass(frozen=True)
class Combination(Evaluator):
    """``sum_k q_k * e_k(x)`` with constant quaternions on the left."""

    terms: tuple[tuple[quat.Quaternion, Evaluator], ...]

    def __call__(self, x1, x2):
        out = None
        for q, ev in self.terms:
            term = quat.mul(np.asarray(q, float), ev(x1, x2))
            out = term if out is None else out + term
        return out


@dataclass(frozen=True)
class Modulated(Evaluator):
    """``e^{-i x1 xi1} e(x) e^{-j x2 xi2}``."""

    base: Evaluator
    xi: tuple[float, float]

    def __call__(self, x1, x2):
        x1 = np.asarray(x1, float)
        x2 = np.asarray(x2, float)
        left = quat.exp_i(-self.xi[0] * x1)
        right = quat.exp_j(-self.xi[1] * x2)
        return quat.mul(quat.mul(left, self.base(x1, x2)), right)


@dataclass(frozen=True)
class Translated(Evaluator):
    """``e(x - shift)``."""

    base: Evaluator
    shift: tuple[float, float]

    def __call__(self, x1, x2):
        return self.base(np.asarray(x1, float) - self.shift[0], np.asarray(x2, float) - self.shift[1])


@dataclass(frozen=True)
class Dilated(Evaluator):
    """``|a1 a2|^{1/2} e(a1 x1, a2 x2)``, or without the prefactor when ``normalize`` is off."""

    base: Evaluator
    factors: tuple[float, float]
    normalize: bool = True

    def __call__(self, x1, x2):
        a1, a2 = self.factors
        values = self.base(a1 * np.asarray(x1, float), a2 * np.asarray(x2, float))
        if self.normalize:
            values = math.sqrt(abs(a1 * a2)) * values
        return values


@dataclass(frozen=True)
class Reflected(Evaluator):
    """``e(-x1, -x2)``."""

    base: Evaluator

    def __call__(self, x1, x2):
        return self.base(-np.asarray(x1, float), -np.asarray(x2, float))


@dataclass(frozen=True)
class Conjugated(Evaluator):
    """Pointwise quaternion conjugate."""

    base: Evaluator

    def __call__(self, x1, x2):
        return quat.conj(self.base(x1, x2))


@dataclass(frozen=True, eq=False)
class SplineEvaluator(Evaluator):
    """Bicubic spline through sampled data, zero outside the sampled box.

    Used for windows loaded from files, which have no closed form but still
    need to be evaluated on dilated lattices.
    """

    x1_nodes: np.ndarray
    x2_nodes: np.ndarray
    samples: np.ndarray
    _splines: tuple = field(init=False, repr=False)

    def __post_init__(self):
        from scipy.interpolate import RectBivariateSpline

        splines = tuple(
            RectBivariateSpline(self.x1_nodes, self.x2_nodes, self.samples[..., c], kx=3, ky=3)
            for c in range(4)
        )
        object.__setattr__(self, "_splines", splines)

    def __call__(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, float), np.asarray(x2, float))
        flat1, flat2 = x1.ravel(), x2.ravel()
        out = np.stack([s.ev(flat1, flat2) for s in self._splines], axis=-1)
        inside = (
            (flat1 >= self.x1_nodes[0])
            & (flat1 <= self.x1_nodes[-1])
            & (flat2 >= self.x2_nodes[0])
            & (flat2 <= self.x2_nodes[-1])
        )
        out[~inside] = 0.0
        return out.reshape(x1.shape + (4,))


_KINDS: dict[str, Callable[..., Evaluator]] = {
    "gaussian": Gaussian,
    "modulated-gaussian": ModulatedGaussian,
    "difference-of-gaussians": DifferenceOfGaussians,
}


def make_descriptor(kind: str, **params) -> Evaluator:
    """Build an evaluator from its registered name."""
    try:
        factory = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown descriptor kind {kind!r}; known: {sorted(_KINDS)}") from None
    return factory(**params)
