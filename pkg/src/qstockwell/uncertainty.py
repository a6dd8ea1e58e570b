"""Entropy, moments, concentration and the constants of the uncertainty bounds.

Every check returns a :class:`BoundReport`.  A bound counts as satisfied
when it holds after the permissive side is inflated by ``1e-9`` relative,
which keeps exact-equality cases from flipping on rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import quat
from .grid import TWO_PI, RegionMask, exact_sum
from .stockwell import StockwellField, volume_energy, volume_lp_norm

__all__ = [
    "BoundReport",
    "Density",
    "REL_TOL",
    "entropy",
    "beckner_check",
    "gamma",
    "heisenberg_constant",
    "heisenberg_check",
    "local_constant",
    "local_check",
    "concentration_alpha",
    "donoho_stark_check",
    "lieb_concentration_check",
    "lp_lemma_check",
    "lieb_product_check",
    "energy_box",
    "central_box",
    "full_region",
]

REL_TOL = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """One inequality instance: ``lhs >= rhs`` (``direction='>='``) or ``lhs <= rhs``."""

    name: str
    lhs: float
    rhs: float
    satisfied: bool
    margin: float
    direction: str

    @classmethod
    def build(cls, name: str, lhs: float, rhs: float, direction: str, tol: float = REL_TOL) -> "BoundReport":
        lhs = float(lhs)
        rhs = float(rhs)
        scale = abs(rhs) if rhs != 0 else 1.0
        if direction == ">=":
            ok = lhs >= rhs - tol * abs(rhs)
            margin = (lhs - rhs) / scale
        elif direction == "<=":
            ok = lhs <= rhs + tol * abs(rhs)
            margin = (rhs - lhs) / scale
        else:
            raise ValueError(f"unknown direction {direction!r}")
        return cls(name, lhs, rhs, bool(ok), float(margin), direction)


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative values on a coefficient volume with their normalized cell volume."""

    values: np.ndarray
    cell_volume: float

    def __post_init__(self):
        v = np.asarray(self.values, float)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density entries must be finite and nonnegative")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_stockwell(cls, S: StockwellField, scale: float = 1.0) -> "Density":
        return cls(S.density() * scale, S.weight)


def entropy(P: Density) -> float:
    """``-integral P ln P``, with ``0 ln 0 = 0``."""
    v = P.values
    positive = v > 0
    terms = np.zeros_like(v)
    terms[positive] = v[positive] * np.log(v[positive])
    return -exact_sum(terms) * P.cell_volume


def beckner_check(S: StockwellField, norm_f: float, norm_phi: float) -> BoundReport:
    """Entropy of ``|S|^2`` against ``N ln(1/N)`` with ``N = ||f||^2 ||phi||^2``."""
    n = (norm_f * norm_phi) ** 2
    rhs = n * math.log(1.0 / n) if n > 0 else 0.0
    return BoundReport.build("beckner", entropy(Density.from_stockwell(S)), rhs, ">=")


def gamma(x: float) -> float:
    """Gamma function for ``x > 0`` (libm ``tgamma``, about 1e-15 relative)."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"gamma is only provided for x > 0, got {x}")
    return math.gamma(x)


def heisenberg_constant(p: float, q: float) -> float:
    if not (p > 0 and q > 0):
        raise ValueError("p and q must be positive")
    return (
        2.0 / (math.e * p)
        * (p / q) ** (p / (p + q))
        * (p * q / (gamma(2.0 / p) * gamma(2.0 / q))) ** (p * q / (2.0 * (p + q)))
    )


def _moment(S: StockwellField, weights: np.ndarray) -> float:
    return exact_sum(weights * S.density()) * S.weight


def heisenberg_check(S: StockwellField, p: float, q: float, norm_f: float, norm_phi: float) -> BoundReport:
    """Mixed moment ``(int |xi|^p |S|^2)^{q/(p+q)} (int |b|^q |S|^2)^{p/(p+q)}`` against ``D_{p,q} N``."""
    d = heisenberg_constant(p, q)
    xi1, xi2 = S.xi_mesh()
    b1, b2 = S.b_mesh()
    shape = S.density().shape
    xi_norm = np.broadcast_to(np.hypot(xi1, xi2), shape)
    b_norm = np.broadcast_to(np.hypot(b1, b2), shape)
    m_xi = _moment(S, xi_norm**p)
    m_b = _moment(S, b_norm**q)
    lhs = m_xi ** (q / (p + q)) * m_b ** (p / (p + q))
    rhs = d * (norm_f * norm_phi) ** 2
    return BoundReport.build(f"heisenberg(p={p:g},q={q:g})", lhs, rhs, ">=")


def local_constant(alpha: float, p: float) -> float:
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not p >= 1:
        raise ValueError("p must be at least 1")
    a = alpha
    return (
        (3 * a + 2) / (2 * a)
        * (2 * a / (a + 2)) ** ((a + 2) / (3 * a + 2))
        * (1.0 / (2.0 * math.sqrt(a + 2))) ** (2 * a / ((3 * a + 2) * (p + 1)))
    )


def local_check(
    S: StockwellField,
    region: RegionMask,
    alpha: float,
    p: float,
    norm_f: float,
    norm_phi: float,
) -> BoundReport:
    """``||S chi_region||_p`` against the weighted-norm bound with ``M_{alpha,p}``."""
    m = local_constant(alpha, p)
    dens = S.density()
    _require_congruent(region, dens)
    lhs = (exact_sum(np.where(region.mask, dens ** (p / 2.0), 0.0)) * S.weight) ** (1.0 / p)
    xi1, xi2 = S.xi_mesh()
    b1, b2 = S.b_mesh()
    radius2 = xi1**2 + xi2**2 + b1**2 + b2**2
    weighted = math.sqrt(exact_sum(np.broadcast_to(radius2 ** (-alpha), dens.shape) * dens) * S.weight)
    e = 4.0 * (alpha + 1) / ((3 * alpha + 2) * (p + 1))
    rhs = m * (norm_f * norm_phi) ** (1.0 - e) * region.measure ** (1.0 / (p * (p + 1))) * weighted**e
    return BoundReport.build(f"local(alpha={alpha:g},p={p:g})", lhs, rhs, "<=")


def _require_congruent(region: RegionMask, dens: np.ndarray) -> None:
    if region.mask.shape != dens.shape:
        raise ValueError(f"region shape {region.mask.shape} does not match volume {dens.shape}")


def concentration_alpha(S: StockwellField, region: RegionMask) -> float:
    """Square root of the share of energy outside ``region``."""
    dens = S.density()
    _require_congruent(region, dens)
    total = exact_sum(dens)
    if total == 0:
        raise ValueError("concentration is undefined for a zero field")
    outside = exact_sum(np.where(region.mask, 0.0, dens))
    return math.sqrt(outside / total)


def donoho_stark_check(
    S: StockwellField,
    region: RegionMask,
    c_phi: float,
    norm_phi: float,
    alpha: Optional[float] = None,
) -> BoundReport:
    """``mu(region) >= (1 - alpha^2) C_phi / ||phi||^2``."""
    if alpha is None:
        alpha = concentration_alpha(S, region)
    rhs = (1.0 - alpha**2) * c_phi / norm_phi**2
    return BoundReport.build(f"donoho-stark(alpha={alpha:.3g})", region.measure, rhs, ">=")


def lieb_concentration_check(
    S: StockwellField,
    region: RegionMask,
    p: float,
    c_phi: float,
    norm_phi: float,
    alpha: Optional[float] = None,
) -> BoundReport:
    """``mu(region) >= C_phi (1 - alpha^2)^{p/(p-2)} / ||phi||^2`` for ``p > 2``."""
    if not p > 2:
        raise ValueError("the concentration bound needs p > 2")
    if alpha is None:
        alpha = concentration_alpha(S, region)
    rhs = c_phi * (1.0 - alpha**2) ** (p / (p - 2.0)) / norm_phi**2
    return BoundReport.build(f"lieb-concentration(p={p:g},alpha={alpha:.3g})", region.measure, rhs, ">=")


def lp_lemma_check(S: StockwellField, p: float, c_phi: float, norm_f: float, norm_phi: float) -> BoundReport:
    """``||S||_p <= C_phi^{1/p} ||phi||^{1-2/p} ||f||``."""
    rhs = c_phi ** (1.0 / p) * norm_phi ** (1.0 - 2.0 / p) * norm_f
    return BoundReport.build(f"lp-lemma(p={p:g})", volume_lp_norm(S, p), rhs, "<=")


def lieb_product_check(
    Sf: StockwellField,
    Sg: StockwellField,
    p: float,
    c_phi: float,
    c_psi: float,
    norms: tuple[float, float, float, float],
) -> BoundReport:
    """``||S_phi f . S_psi g||_p <= (C_phi C_psi)^{1/(2p)} ||f|| ||g|| (||phi|| ||psi||)^{1-1/p}``.

    ``norms`` is ``(||f||, ||g||, ||phi||, ||psi||)``.
    """
    if Sf.coeffs.shape != Sg.coeffs.shape:
        raise ValueError("coefficient volumes differ in shape")
    nf, ng, nphi, npsi = norms
    prod = quat.mul(Sf.coeffs, Sg.coeffs)
    mod = quat.modulus(prod)
    lhs = (exact_sum(mod**p) * Sf.weight) ** (1.0 / p)
    rhs = math.sqrt(c_phi * c_psi) ** (1.0 / p) * nf * ng * (nphi * npsi) ** (1.0 - 1.0 / p)
    return BoundReport.build(f"lieb-product(p={p:g})", lhs, rhs, "<=")


# ---------------------------------------------------------------------------
# Regions


def full_region(S: StockwellField) -> RegionMask:
    return RegionMask(np.ones(S.density().shape, bool), S.cell_volume)


def _coordinates(S: StockwellField):
    xi1, xi2 = S.xi_mesh()
    b1, b2 = S.b_mesh()
    return [xi1, xi2, b1, b2]


def energy_box(S: StockwellField, fraction: float) -> RegionMask:
    """Smallest box of the form ``|coord_k - mean_k| <= r std_k`` holding ``fraction`` of the energy.

    Means and standard deviations are energy-weighted per coordinate; ``r``
    runs over the discrete set of values at which the box changes.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    dens = S.density()
    total = exact_sum(dens)
    if total == 0:
        raise ValueError("energy box is undefined for a zero field")
    scaled = []
    for c in _coordinates(S):
        full = np.broadcast_to(c, dens.shape)
        mean = exact_sum(full * dens) / total
        var = exact_sum((full - mean) ** 2 * dens) / total
        std = math.sqrt(var) if var > 0 else 1.0
        scaled.append(np.abs(c - mean) / std)
    radius = scaled[0]
    for s in scaled[1:]:
        radius = np.maximum(radius, s)
    radius = np.broadcast_to(radius, dens.shape)
    order = np.argsort(radius, axis=None, kind="stable")
    r_sorted = radius.ravel()[order]
    cum = np.cumsum(dens.ravel()[order])
    target = fraction * cum[-1]
    k = int(np.searchsorted(cum, target * (1 - 1e-12)))
    k = min(k, r_sorted.size - 1)
    mask = radius <= r_sorted[k]
    return RegionMask(mask, S.cell_volume)


def central_box(S: StockwellField, measure: float) -> RegionMask:
    """Smallest origin-centred box ``|coord_k| <= r extent_k`` whose measure reaches ``measure``."""
    coords = _coordinates(S)
    shape = S.density().shape
    radius = None
    for c in coords:
        extent = float(np.max(np.abs(c)))
        s = np.abs(c) / extent
        radius = s if radius is None else np.maximum(radius, s)
    radius = np.broadcast_to(radius, shape)
    cell = S.cell_volume / TWO_PI**2
    levels = np.unique(radius)
    for r in levels:
        mask = radius <= r
        if int(mask.sum()) * cell >= measure:
            return RegionMask(mask, S.cell_volume)
    return RegionMask(np.ones(shape, bool), S.cell_volume)
