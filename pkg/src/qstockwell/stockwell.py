"""Continuous quaternion Stockwell transform on sampled fields.

For a window ``phi`` and a frequency ``xi`` with dilation ``A = diag(xi1, xi2)``

    S(xi, b) = |xi1 xi2|^{1/2} sum_x e^{-i x1 xi1} f(x) e^{-j x2 xi2} conj(phi(A (x - b))) dmu(x)

with ``dmu = dx1 dx2 / (2 pi)``.  :func:`forward` evaluates this sum as
written.  :func:`forward_fast` uses the convolution form, valid for windows
whose transform commutes with the right-hand kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import quat
from ._parallel import compensated_sum, map_ordered
from .analytic import (
    DifferenceOfGaussians,
    Dilated,
    Evaluator,
    Gaussian,
    SplineEvaluator,
)
from .grid import (
    TWO_PI,
    Axis,
    QField,
    canonical_axis,
    exact_sum,
    integrate,
    lp_norm,
    offset_axis,
    sample_analytic,
)
from .qft import (
    SpectralField,
    _iqft_split,
    _qft_split,
    check_convolution_hypothesis,
    dual_axis,
    iqft,
    modulate,
    parity,
    qft_eval,
    qft_fast,
)

__all__ = [
    "DilationMatrix",
    "WindowSpec",
    "StockwellField",
    "AdmissibilityReport",
    "XiQuadrature",
    "ConfigurationError",
    "CoverageError",
    "make_window",
    "admissibility_constant",
    "cross_admissibility",
    "lemma_integral",
    "forward",
    "streamed_energy",
    "forward_fast",
    "aggregate",
    "invert",
    "inversion_diagnostic",
    "scaling_dilate",
    "canonical_xi_axes",
    "volume_energy",
    "volume_lp_norm",
    "plancherel_ratio",
]


class ConfigurationError(ValueError):
    """The requested transform configuration cannot be evaluated."""


class CoverageError(ValueError):
    """The frequency grid does not resolve the aggregated spectrum."""


@dataclass(frozen=True)
class DilationMatrix:
    """``diag(xi1, xi2)`` with both entries nonzero."""

    xi1: float
    xi2: float

    def __post_init__(self):
        if self.xi1 == 0 or self.xi2 == 0:
            raise ValueError("dilation matrix needs nonzero diagonal entries")

    @property
    def det(self) -> float:
        return self.xi1 * self.xi2

    @property
    def T(self) -> "DilationMatrix":
        return self

    def inverse(self) -> "DilationMatrix":
        return DilationMatrix(1.0 / self.xi1, 1.0 / self.xi2)

    def apply(self, x1, x2):
        return self.xi1 * np.asarray(x1, float), self.xi2 * np.asarray(x2, float)

    def as_array(self) -> np.ndarray:
        return np.diag([self.xi1, self.xi2])


# ---------------------------------------------------------------------------
# Windows


@dataclass(frozen=True, eq=False)
class WindowSpec:
    """A window field with cached flags.

    ``evaluator`` is what the transforms call at dilated positions: the
    field's closed form when it has one, otherwise a bicubic spline through
    its samples.
    """

    field: QField
    unit_integral: bool
    conv_hypothesis: bool
    c_phi: Optional[float] = None
    kind: str = "from_field"
    params: dict = field(default_factory=dict)

    @property
    def evaluator(self) -> Evaluator:
        if self.field.evaluator is not None:
            return self.field.evaluator
        cached = self.__dict__.get("_spline")
        if cached is None:
            cached = SplineEvaluator(self.field.axis_x.points, self.field.axis_y.points, self.field.samples)
            object.__setattr__(self, "_spline", cached)
        return cached

    @property
    def norm(self) -> float:
        return lp_norm(self.field, 2)

    def with_c_phi(self, value: float) -> "WindowSpec":
        return WindowSpec(self.field, self.unit_integral, self.conv_hypothesis, value, self.kind, self.params)


def _window_flags(phi: QField) -> tuple[bool, bool]:
    total = integrate(phi)
    unit = bool(abs(total[0] - 1.0) <= 1e-6 and np.max(np.abs(total[1:])) <= 1e-6)
    conv = bool(check_convolution_hypothesis(phi).passed)
    return unit, conv


def make_window(kind: str, axes: Optional[tuple[Axis, Axis]] = None, **params) -> WindowSpec:
    """Build a window.

    ``gaussian_unit(sigma | sigma1, sigma2)``
        ``e^{-x1^2/2s1^2 - x2^2/2s2^2} / (s1 s2)``; integrates to 1 but is not admissible.
    ``admissible_dog(alpha, beta)``
        separable window with per-axis spectrum ``e^{-a u^2} - e^{b-a} e^{-b u^2}``,
        which vanishes at ``|u| = 1`` and makes the admissibility constant finite.
    ``from_field(field)``
        wraps given samples and computes the flags.
    """
    if axes is None:
        ax = canonical_axis()
        axes = (ax, ax)
    if kind == "gaussian_unit":
        s1 = float(params.pop("sigma1", params.get("sigma", 1.0)))
        s2 = float(params.pop("sigma2", params.pop("sigma", s1)))
        if params:
            raise ValueError(f"unexpected parameters for gaussian_unit: {sorted(params)}")
        if s1 <= 0 or s2 <= 0:
            raise ValueError("gaussian_unit widths must be positive")
        ev = Gaussian(s1, s2, amplitude=1.0 / (s1 * s2))
        phi = sample_analytic(ev, axes)
        unit, conv = _window_flags(phi)
        return WindowSpec(phi, unit, conv, None, kind, {"sigma1": s1, "sigma2": s2})
    if kind == "admissible_dog":
        alpha = float(params.pop("alpha", 0.5))
        beta = float(params.pop("beta", 2.0))
        if params:
            raise ValueError(f"unexpected parameters for admissible_dog: {sorted(params)}")
        ev = DifferenceOfGaussians(alpha, beta)
        phi = sample_analytic(ev, axes)
        unit, conv = _window_flags(phi)
        return WindowSpec(phi, unit, conv, None, kind, {"alpha": alpha, "beta": beta})
    if kind == "from_field":
        phi = params.pop("field")
        if params:
            raise ValueError(f"unexpected parameters for from_field: {sorted(params)}")
        unit, conv = _window_flags(phi)
        return WindowSpec(phi, unit, conv, None, kind, {})
    raise ValueError(f"unknown window kind {kind!r}")


# ---------------------------------------------------------------------------
# Admissibility


@dataclass(frozen=True)
class XiQuadrature:
    """Per-axis nodes and weights for integrals over the frequency plane.

    ``uniform`` uses cell midpoints on ``[-X, X]``, so no node sits on an axis.
    ``log`` uses nodes ``+-e^s`` with ``s`` on a midpoint grid; its weights
    absorb the ``|xi|`` Jacobian, which suits integrands with ``1/|xi|`` factors.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    spacing: float
    extent: tuple[float, float]

    @classmethod
    def uniform(cls, half_extent: float, step: float) -> "XiQuadrature":
        count = round(2 * half_extent / step)
        if count < 2 or count % 2 or abs(count * step - 2 * half_extent) > 1e-9 * half_extent:
            raise ValueError("half_extent must be a whole, even number of steps")
        nodes = offset_axis(half_extent, count).points
        return cls(nodes, np.full(count, step), "uniform", step, (-half_extent, half_extent))

    @classmethod
    def log(cls, s_min: float, s_max: float, ds: float) -> "XiQuadrature":
        count = max(1, round((s_max - s_min) / ds))
        s = s_min + ds * (np.arange(count) + 0.5)
        pos = np.exp(s)
        nodes = np.concatenate([-pos[::-1], pos])
        weights = np.concatenate([pos[::-1], pos]) * ds
        return cls(nodes, weights, "log", ds, (s_min, s_max))

    def refined(self) -> "XiQuadrature":
        if self.kind == "uniform":
            return XiQuadrature.uniform(self.extent[1], self.spacing / 2)
        return XiQuadrature.log(self.extent[0], self.extent[1], self.spacing / 2)


@dataclass(frozen=True)
class AdmissibilityReport:
    """Admissibility constant with its refinement history.

    ``estimates`` holds the constant (or its modulus, for a pair) at each
    resolution; ``refinement_error`` compares the last two.
    """

    c_phi: float
    c_phi_psi: Optional[np.ndarray]
    verdict: str
    estimates: tuple[float, ...]
    spacings: tuple[float, ...]
    refinement_error: float
    quadrature: XiQuadrature

    @property
    def admissible(self) -> bool:
        return self.verdict == "admissible"


def _band(phi: QField) -> tuple[float, float]:
    """Largest frequency the sampled window resolves on each axis."""
    return math.pi / phi.axis_x.step, math.pi / phi.axis_y.step


def _default_uniform(phi: QField, step: float = 0.5) -> XiQuadrature:
    band = min(_band(phi))
    half = math.floor((band - 1.0) / step) * step
    return XiQuadrature.uniform(half, step)


def _admissibility_sum(Fa: QField, Fb: Optional[QField], q1: XiQuadrature, q2: XiQuadrature):
    """Quadrature of ``F_a(1-xi) conj(F_b(1-xi)) / (2 pi |xi1 xi2|)``; ``F_b=None`` means modulus squared."""
    band1, band2 = _band(Fa)
    u = 1.0 - q1.nodes
    v = 1.0 - q2.nodes
    w1 = np.where(np.abs(u) <= band1, q1.weights / np.abs(q1.nodes), 0.0)
    w2 = np.where(np.abs(v) <= band2, q2.weights / np.abs(q2.nodes), 0.0)
    weight = np.outer(w1, w2) / TWO_PI
    A = qft_eval(Fa, u, v)
    if Fb is None:
        return exact_sum(quat.modulus2(A) * weight)
    B = qft_eval(Fb, u, v)
    prod = quat.mul(A, quat.conj(B))
    return np.array([exact_sum(prod[..., c] * weight) for c in range(4)])


def _classify(estimates: Sequence[float], zero_label: str) -> tuple[str, float]:
    last = estimates[-1]
    if not last > 0 or last < 1e-300:
        return zero_label, 0.0
    err = abs(last - estimates[-2]) / last
    growth = [b / a - 1.0 if a > 0 else math.inf for a, b in zip(estimates, estimates[1:])]
    if len(growth) >= 2 and growth[-1] > 0.25 and growth[-2] > 0.25:
        return "divergent", err
    if err <= 0.02:
        return "admissible", err
    return "unconverged", err


def _conj_window(phi: WindowSpec | QField) -> QField:
    f = phi.field if isinstance(phi, WindowSpec) else phi
    return f.conj()


def admissibility_constant(
    phi: WindowSpec | QField,
    xi_quadrature: Optional[XiQuadrature] = None,
    levels: int = 4,
) -> AdmissibilityReport:
    """``C = integral |F(conj phi)(1 - xi)|^2 dmu(xi) / |xi1 xi2|`` under successive refinement.

    Starting from ``xi_quadrature`` (default: midpoints with step 0.5 over the
    window's resolved band) the step is halved ``levels - 1`` times.  The
    verdict is ``divergent`` when the last two halvings each grew the value
    by more than 25%, ``admissible`` when the last two values agree to 2%,
    ``not admissible`` for a zero constant, and ``unconverged`` otherwise.
    """
    if levels < 2:
        raise ValueError("need at least two resolutions")
    Fa = _conj_window(phi)
    q = xi_quadrature or _default_uniform(Fa)
    estimates, spacings = [], []
    for _ in range(levels):
        estimates.append(float(_admissibility_sum(Fa, None, q, q)))
        spacings.append(q.spacing)
        last_q = q
        q = q.refined()
    verdict, err = _classify(estimates, "not admissible")
    c = estimates[-1] if verdict != "not admissible" else 0.0
    return AdmissibilityReport(c, None, verdict, tuple(estimates), tuple(spacings), err, last_q)


def cross_admissibility(
    phi: WindowSpec | QField,
    psi: WindowSpec | QField,
    xi_quadrature: Optional[XiQuadrature] = None,
    levels: int = 3,
) -> AdmissibilityReport:
    """Quaternion constant ``integral F(conj phi)(1-xi) conj(F(conj psi)(1-xi)) dmu/|det|``."""
    if levels < 2:
        raise ValueError("need at least two resolutions")
    Fa = _conj_window(phi)
    Fb = _conj_window(psi)
    Fa.require_congruent(Fb)
    q = xi_quadrature or _default_uniform(Fa)
    values, spacings = [], []
    for _ in range(levels):
        values.append(_admissibility_sum(Fa, Fb, q, q))
        spacings.append(q.spacing)
        last_q = q
        q = q.refined()
    mods = [float(np.linalg.norm(v)) for v in values]
    verdict, err = _classify(mods, "not admissible pair")
    if verdict == "not admissible pair":
        return AdmissibilityReport(0.0, np.zeros(4), verdict, tuple(mods), tuple(spacings), err, last_q)
    return AdmissibilityReport(float(values[-1][0]), values[-1], verdict, tuple(mods), tuple(spacings), err, last_q)


def lemma_integral(
    phi: WindowSpec | QField,
    zeta: tuple[float, float],
    xi_quadrature: Optional[XiQuadrature] = None,
) -> float:
    """``integral |F(reflected conj phi)(A_xi^{-1}(zeta - xi))|^2 dmu(xi) / |det A_xi|``.

    Per axis the argument is ``zeta/xi - 1``.  The default quadrature is
    logarithmic, ``xi = +-e^s`` with ``s`` in ``[-10, 12]``; frequencies the
    sampled window cannot resolve contribute zero.
    """
    z1, z2 = float(zeta[0]), float(zeta[1])
    if z1 == 0 or z2 == 0:
        raise ValueError("zeta must have nonzero components")
    f = phi.field if isinstance(phi, WindowSpec) else phi
    reflected = parity(f.conj())
    q = xi_quadrature or XiQuadrature.log(-10.0, 12.0, 0.025)
    band1, band2 = _band(reflected)
    u = z1 / q.nodes - 1.0
    v = z2 / q.nodes - 1.0
    w1 = np.where(np.abs(u) <= band1, q.weights / np.abs(q.nodes), 0.0)
    w2 = np.where(np.abs(v) <= band2, q.weights / np.abs(q.nodes), 0.0)
    keep1 = w1 > 0
    keep2 = w2 > 0
    A = qft_eval(reflected, u[keep1], v[keep2])
    weight = np.outer(w1[keep1], w2[keep2]) / TWO_PI
    return exact_sum(quat.modulus2(A) * weight)


# ---------------------------------------------------------------------------
# Coefficient volumes


@dataclass(frozen=True, eq=False)
class StockwellField:
    """Coefficients indexed ``(xi1, xi2, b1, b2, component)``.

    ``space_axes`` records the grid of the analysed signal (the default
    reconstruction grid).
    """

    xi_axes: tuple[Axis, Axis]
    b_axes: tuple[Axis, Axis]
    coeffs: np.ndarray
    space_axes: Optional[tuple[Axis, Axis]] = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        shape = (self.xi_axes[0].count, self.xi_axes[1].count, self.b_axes[0].count, self.b_axes[1].count, 4)
        if c.shape != shape:
            raise ValueError(f"coefficients have shape {c.shape}, expected {shape}")
        for ax in self.xi_axes:
            if np.any(ax.points == 0.0) or ax.contains_zero():
                raise ValueError("frequency grid must avoid the coordinate axes")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @property
    def cell_volume(self) -> float:
        """Raw volume ``dxi1 dxi2 db1 db2`` of one cell."""
        return self.xi_axes[0].step * self.xi_axes[1].step * self.b_axes[0].step * self.b_axes[1].step

    @property
    def weight(self) -> float:
        """Cell volume under the normalized measure on R^4."""
        return self.cell_volume / TWO_PI**2

    def density(self) -> np.ndarray:
        """``|S|^2`` per cell, shape ``(n1, n2, m1, m2)``."""
        return quat.modulus2(self.coeffs)

    def xi_mesh(self):
        return self.xi_axes[0].points[:, None, None, None], self.xi_axes[1].points[None, :, None, None]

    def b_mesh(self):
        return self.b_axes[0].points[None, None, :, None], self.b_axes[1].points[None, None, None, :]

    def scaled(self, c: float) -> "StockwellField":
        return StockwellField(self.xi_axes, self.b_axes, self.coeffs * c, self.space_axes)


def canonical_xi_axes(half_extent: float = 4.0, count: int = 16) -> tuple[Axis, Axis]:
    ax = offset_axis(half_extent, count)
    return ax, ax


def _check_xi_axes(xi_axes) -> tuple[Axis, Axis]:
    xi_axes = tuple(xi_axes)
    for ax in xi_axes:
        if np.any(np.abs(ax.points) < 1e-300) or ax.contains_zero():
            raise ConfigurationError("frequency grid points must avoid the coordinate axes (xi1, xi2 != 0)")
    return xi_axes


def _xi_list(xi_axes):
    p1, p2 = xi_axes[0].points, xi_axes[1].points
    return [(i1, i2, float(p1[i1]), float(p2[i2])) for i1 in range(p1.size) for i2 in range(p2.size)]


def _assemble(xi_axes, b_axes, slices, space_axes) -> StockwellField:
    n1, n2 = xi_axes[0].count, xi_axes[1].count
    out = np.empty((n1, n2, b_axes[0].count, b_axes[1].count, 4))
    k = 0
    for i1 in range(n1):
        for i2 in range(n2):
            out[i1, i2] = slices[k]
            k += 1
    return StockwellField(xi_axes, b_axes, out, space_axes)


def _differences(x: Axis, b: Axis):
    """Values of ``x_n - b_m`` and an index map ``(n, m) -> position``.

    On a shared lattice the differences collapse to ``N + M - 1`` values.
    """
    n = np.arange(x.count)[:, None]
    m = np.arange(b.count)[None, :]
    offset = (x.start - b.start) / x.step
    if math.isclose(x.step, b.step, rel_tol=1e-12) and abs(offset - round(offset)) < 1e-9:
        values = x.start - b.start - (b.count - 1) * x.step + x.step * np.arange(x.count + b.count - 1)
        index = n - m + (b.count - 1)
    else:
        values = (x.points[:, None] - b.points[None, :]).ravel()
        index = n * b.count + m
    return values, index


def forward(
    f: QField,
    phi: WindowSpec,
    xi_axes: tuple[Axis, Axis],
    b_axes: Optional[tuple[Axis, Axis]] = None,
    workers: Optional[int] = None,
) -> StockwellField:
    """Direct quadrature of the defining sum for every ``(xi, b)``.

    Per frequency the window is evaluated once on the set of differences
    ``x - b``; the sum over ``x`` then becomes complex matrix products in
    split form, ``(a + b j)(c + d j) = (a c - b conj d) + (a d + b conj c) j``.
    """
    xi_axes = _check_xi_axes(xi_axes)
    b_axes = tuple(b_axes) if b_axes is not None else f.axes
    ev = phi.evaluator
    d1, idx1 = _differences(f.axis_x, b_axes[0])
    d2, idx2 = _differences(f.axis_y, b_axes[1])
    x1, x2 = f.mesh()
    base_a, base_b = quat.split(f.samples)
    weight = f.weight

    def one(item):
        _, _, xi1, xi2 = item
        # e^{-i x1 xi1} (a + b j) e^{-j x2 xi2} = e^{-i x1 xi1} [(a c2 + b s2) + (b c2 - a s2) j]
        left = np.exp(-1j * xi1 * x1)
        cos2 = np.cos(xi2 * x2)
        sin2 = np.sin(xi2 * x2)
        scale = math.sqrt(abs(xi1 * xi2)) * weight
        ga = scale * left * (base_a * cos2 + base_b * sin2)
        gb = scale * left * (base_b * cos2 - base_a * sin2)
        win = quat.conj(ev(xi1 * d1[:, None], xi2 * d2[None, :]))
        wc, wd = quat.split(win)
        # rows gathered per (n1, m1): (M1, N1, D2)
        rows_c = np.transpose(wc[idx1], (1, 0, 2))
        rows_d = np.transpose(wd[idx1], (1, 0, 2))
        lhs1 = np.concatenate([ga.T, -gb.T], axis=1)  # (N2, 2 N1)
        lhs2 = np.concatenate([ga.T, gb.T], axis=1)
        rhs1 = np.concatenate([rows_c, np.conj(rows_d)], axis=1)  # (M1, 2 N1, D2)
        rhs2 = np.concatenate([rows_d, np.conj(rows_c)], axis=1)
        h1 = np.matmul(lhs1, rhs1)  # (M1, N2, D2)
        h2 = np.matmul(lhs2, rhs2)
        gather = np.broadcast_to(idx2[None], (h1.shape[0],) + idx2.shape)
        s1 = np.take_along_axis(h1, gather, axis=2).sum(axis=1)
        s2 = np.take_along_axis(h2, gather, axis=2).sum(axis=1)
        return quat.join(s1, s2)

    slices = map_ordered(one, _xi_list(xi_axes), workers)
    return _assemble(xi_axes, b_axes, slices, f.axes)


def forward_fast(
    f: QField,
    phi: WindowSpec,
    xi_axes: tuple[Axis, Axis],
    b_axes: Optional[tuple[Axis, Axis]] = None,
    workers: Optional[int] = None,
) -> StockwellField:
    """Convolution route: ``S(xi, .) = M_xi f * k_xi`` with ``k_xi(y) = |det|^{1/2} conj phi(-A_xi y)``.

    Each slice is the inverse transform of ``F(M_xi f) F(k_xi)``.  The kernel
    lives on a lattice symmetric about 0 and the zero padding keeps every
    wrapped term away from the retained b-range, so the discrete product
    formula is exact there and agrees with :func:`forward` to rounding.
    """
    if not phi.conv_hypothesis:
        raise ConfigurationError(
            "fast path needs a window that passes the convolution hypothesis check; use forward()"
        )
    xi_axes = _check_xi_axes(xi_axes)
    b_axes = tuple(b_axes) if b_axes is not None else f.axes
    offsets, radii = [], []
    for ax, bx in zip(f.axes, b_axes):
        if not math.isclose(ax.step, bx.step, rel_tol=1e-12):
            raise ConfigurationError("fast path needs the b-grid step to equal the signal step")
        o0 = ax.lattice_index(bx.start)
        if o0 is None:
            raise ConfigurationError("fast path needs the b-grid on the signal lattice")
        offsets.append(o0)
        radii.append(max(ax.count - 1 - o0, o0 + bx.count - 1))
    from scipy.fft import next_fast_len

    ev = phi.evaluator
    # Linear-convolution positions run over [-r, n-1+r] (in steps from the signal
    # start); the period only has to keep wrapped copies off the kept b-range.
    pads = [
        next_fast_len(max(ax.count - 1 + r - o, o + bx.count - 1 + r, 2 * r + 1) + 1)
        for ax, bx, r, o in zip(f.axes, b_axes, radii, offsets)
    ]
    sig_axes = tuple(Axis(p, ax.start, ax.step) for p, ax in zip(pads, f.axes))
    ker_axes = tuple(Axis(p, -r * ax.step, ax.step) for p, r, ax in zip(pads, radii, f.axes))
    out_axes = tuple(Axis(p, ax.start - r * ax.step, ax.step) for p, r, ax in zip(pads, radii, f.axes))
    freq_axes = (dual_axis(sig_axes[0]), dual_axis(sig_axes[1]))
    ky = [ax.points[: 2 * r + 1] for ax, r in zip(ker_axes, radii)]
    take = [slice(o + r, o + r + bx.count) for o, r, bx in zip(offsets, radii, b_axes)]
    n1, n2 = f.shape
    x1, x2 = f.mesh()
    base_a, base_b = quat.split(f.samples)
    # sum weight of the convolution and of the inverse transform
    weight = f.weight * freq_axes[0].step * freq_axes[1].step / TWO_PI * f.weight

    def one(item):
        _, _, xi1, xi2 = item
        left = np.exp(-1j * xi1 * x1)
        cos2 = np.cos(xi2 * x2)
        sin2 = np.sin(xi2 * x2)
        ga = np.zeros(pads, complex)
        gb = np.zeros(pads, complex)
        ga[:n1, :n2] = left * (base_a * cos2 + base_b * sin2)
        gb[:n1, :n2] = left * (base_b * cos2 - base_a * sin2)
        kvals = quat.conj(ev(-xi1 * ky[0][:, None], -xi2 * ky[1][None, :]))
        kc, kd = quat.split(kvals)
        ka = np.zeros(pads, complex)
        kb = np.zeros(pads, complex)
        ka[: ky[0].size, : ky[1].size] = kc
        kb[: ky[0].size, : ky[1].size] = kd
        Ga, Gb = _qft_split(ga, gb, sig_axes, freq_axes)
        Ka, Kb = _qft_split(ka, kb, ker_axes, freq_axes)
        Pa = Ga * Ka - Gb * np.conj(Kb)
        Pb = Ga * Kb + Gb * np.conj(Ka)
        c1, c2 = _iqft_split(Pa, Pb, freq_axes, out_axes)
        scale = math.sqrt(abs(xi1 * xi2)) * weight
        return quat.join(c1[take[0], take[1]], c2[take[0], take[1]]) * scale

    slices = map_ordered(one, _xi_list(xi_axes), workers)
    return _assemble(xi_axes, b_axes, slices, f.axes)


# ---------------------------------------------------------------------------
# Aggregation and inversion


def aggregate(S: StockwellField) -> SpectralField:
    """``|det A_xi|^{1/2} integral S(xi, b) dmu(b)`` on the frequency grid."""
    b1, b2 = S.b_axes
    n1, n2 = S.xi_axes[0].count, S.xi_axes[1].count
    flat = S.coeffs.reshape(n1, n2, b1.count * b2.count, 4)
    sums = compensated_sum(flat, axis=2)
    xi1 = S.xi_axes[0].points[:, None]
    xi2 = S.xi_axes[1].points[None, :]
    scale = np.sqrt(np.abs(xi1 * xi2)) * (b1.step * b2.step / TWO_PI)
    return SpectralField(S.xi_axes[0], S.xi_axes[1], sums * scale[..., None], None, S.space_axes)


@dataclass(frozen=True)
class InversionDiagnostic:
    """How well the frequency grid covers the aggregated spectrum.

    ``edge_fraction`` is the share of energy on the outer ring of the grid;
    ``steps_per_width`` is the spectral standard deviation over the grid
    step (smallest over both axes).
    """

    edge_fraction: float
    steps_per_width: float
    matched: bool

    def ok(self, edge_tol: float = 1e-2, min_steps: float = 1.0) -> bool:
        return self.edge_fraction <= edge_tol and self.steps_per_width >= min_steps


def inversion_diagnostic(A: SpectralField, target: Optional[tuple[Axis, Axis]] = None) -> InversionDiagnostic:
    e = quat.modulus2(A.samples)
    total = float(e.sum())
    if total == 0.0:
        return InversionDiagnostic(0.0, math.inf, target is None or target == A.axes)
    ring = total - float(e[1:-1, 1:-1].sum())
    widths = []
    for axis, ax in enumerate(A.axes):
        marginal = e.sum(axis=1 - axis) / total
        p = ax.points
        mean = float((marginal * p).sum())
        std = math.sqrt(max(float((marginal * (p - mean) ** 2).sum()), 0.0))
        widths.append(std / ax.step)
    matched = target is None or all(
        a.count == t.count and math.isclose(a.start, t.start, abs_tol=1e-12 * t.step) and math.isclose(a.step, t.step)
        for a, t in zip(A.axes, target)
    )
    return InversionDiagnostic(ring / total, min(widths), matched)


def invert(
    S: StockwellField,
    space_axes: Optional[tuple[Axis, Axis]] = None,
    edge_tol: float = 1e-2,
) -> QField:
    """Inverse transform of :func:`aggregate` onto ``space_axes``.

    When the coefficient frequency grid is not the dual grid of
    ``space_axes`` the aggregate is first moved there by tensor cubic
    interpolation (zero outside the sampled range).  Raises
    :class:`CoverageError` when the grid misses spectral energy at its edges
    or is coarser than the spectrum's width.
    """
    if space_axes is None:
        space_axes = S.space_axes or S.b_axes
    space_axes = tuple(space_axes)
    target = (dual_axis(space_axes[0]), dual_axis(space_axes[1]))
    A = aggregate(S)
    diag = inversion_diagnostic(A, target)
    if np.any(A.samples) and not diag.ok(edge_tol):
        raise CoverageError(
            f"frequency grid does not resolve the spectrum: {diag.edge_fraction:.2e} of the energy "
            f"sits on the grid edge, {diag.steps_per_width:.2f} steps per spectral width; "
            "widen or refine the xi-grid"
        )
    if diag.matched:
        spec = SpectralField(target[0], target[1], A.samples)
    else:
        from scipy.interpolate import RegularGridInterpolator

        pts = (A.axis_x.points, A.axis_y.points)
        tu, tv = np.meshgrid(target[0].points, target[1].points, indexing="ij")
        query = np.stack([tu.ravel(), tv.ravel()], axis=-1)
        comps = []
        for c in range(4):
            interp = RegularGridInterpolator(pts, A.samples[..., c], method="cubic", bounds_error=False, fill_value=0.0)
            comps.append(interp(query).reshape(tu.shape))
        spec = SpectralField(target[0], target[1], np.stack(comps, axis=-1))
    return iqft(spec, space_axes)


def scaling_dilate(f: QField, lam: float) -> QField:
    """``x -> f(lam x)`` without amplitude normalization; needs a closed-form field."""
    if lam == 0:
        raise ValueError("scaling factor must be nonzero")
    if f.evaluator is None:
        raise ConfigurationError("scaling_dilate needs a field with an analytic evaluator")
    ev = Dilated(f.evaluator, (float(lam), float(lam)), normalize=False)
    x1, x2 = f.mesh()
    return f.with_samples(np.broadcast_to(ev(x1, x2), f.samples.shape), ev)


# ---------------------------------------------------------------------------
# Volume norms


def volume_energy(S: StockwellField) -> float:
    """``integral |S|^2 dmu_4``."""
    return exact_sum(S.density()) * S.weight


def streamed_energy(
    f: QField,
    phi: WindowSpec,
    xi_axes: tuple[Axis, Axis],
    b_axes: Optional[tuple[Axis, Axis]] = None,
    rows_per_block: int = 1,
    workers: Optional[int] = None,
) -> float:
    """``integral |S|^2 dmu_4`` computed a block of xi1-rows at a time.

    Same value as ``volume_energy(forward(...))`` without holding the whole
    volume; the fast path is used when the window allows it.
    """
    xi_axes = _check_xi_axes(xi_axes)
    ax1 = xi_axes[0]
    route = forward_fast if phi.conv_hypothesis else forward
    partials = []
    for lo in range(0, ax1.count, rows_per_block):
        n = min(rows_per_block, ax1.count - lo)
        rows = Axis(n, ax1.start + lo * ax1.step, ax1.step)
        S = route(f, phi, (rows, xi_axes[1]), b_axes, workers)
        partials.append(exact_sum(S.density()) * S.weight)
    return math.fsum(partials)


def volume_lp_norm(S: StockwellField, p: float) -> float:
    if p == math.inf:
        return float(np.sqrt(S.density().max()))
    if not p >= 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    if p == 2:
        return math.sqrt(volume_energy(S))
    return (exact_sum(S.density() ** (p / 2)) * S.weight) ** (1.0 / p)


def plancherel_ratio(S: StockwellField, c_phi: float, f: QField) -> float:
    """``||S||_2^2 / (C_phi ||f||_2^2)``; 1 in the continuum limit."""
    return volume_energy(S) / (c_phi * lp_norm(f, 2) ** 2)
