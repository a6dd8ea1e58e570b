"""Two-sided quaternion Fourier transform on sampled fields.

    F(u, v) = sum_x  e^{-i x1 u} f(x) e^{-j x2 v}  dx1 dx2 / (2 pi)

The default frequency grid has ``du = 2 pi / (N dx)`` and is placed
symmetrically with a half-step offset, ``u_m = (m - (N-1)/2) du``.  With
that choice the kernel samples are roots of unity (up to fixed phase
ramps), the discrete pair is exactly unitary for any spatial start, and
``-v`` is an index reversal.

Three evaluation routes are provided:

* :func:`qft_direct` sums Hamilton products of the kernels with ``f``; it is
  slow and serves as the reference.
* :func:`qft_fast` writes ``f = c1 + c2 j`` and needs only two complex 2-D
  FFTs plus a reflection of the second frequency axis.
* :func:`qft_eval` evaluates the transform at arbitrary tensor frequency
  points with complex matrix products.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import quat
from .analytic import Dilated, Modulated, Reflected, Translated
from .grid import TWO_PI, Axis, GridMismatchError, QField

__all__ = [
    "SpectralField",
    "OffLatticeError",
    "HypothesisReport",
    "dual_axis",
    "space_axis",
    "qft",
    "qft_direct",
    "qft_fast",
    "qft_eval",
    "iqft",
    "modulate",
    "translate",
    "dilate",
    "parity",
    "convolve",
    "check_convolution_hypothesis",
]


class OffLatticeError(ValueError):
    """A lattice-only operator was asked for a shift or scale that leaves the lattice."""


@dataclass(frozen=True, eq=False)
class SpectralField(QField):
    """A :class:`QField` on frequency axes ``(u, v)``.

    ``space_axes`` remembers the spatial grid the spectrum came from, which
    is the default target of :func:`iqft`.
    """

    space_axes: Optional[tuple[Axis, Axis]] = field(default=None, repr=False)

    frequency_domain = True

    def with_samples(self, samples, evaluator=None):
        return SpectralField(self.axis_x, self.axis_y, samples, evaluator, self.space_axes)


def dual_axis(axis: Axis) -> Axis:
    """Frequency axis paired with a spatial axis: same count, step 2 pi/(N dx), half-step offset."""
    n = axis.count
    du = TWO_PI / (n * axis.step)
    return Axis(n, -0.5 * (n - 1) * du, du)


def space_axis(freq: Axis) -> Axis:
    """Spatial axis paired with a frequency axis: ``[-N dx/2, N dx/2)``."""
    n = freq.count
    dx = TWO_PI / (n * freq.step)
    return Axis(n, -0.5 * n * dx, dx)


def _are_dual(a: Axis, b: Axis) -> bool:
    return a.count == b.count and math.isclose(a.step * b.step * a.count, TWO_PI, rel_tol=1e-12)


# ---------------------------------------------------------------------------
# 1-D building block


def _dft_axis(c: np.ndarray, src: Axis, dst: Axis, sign: int, axis: int) -> np.ndarray:
    """``out[m] = sum_n c[n] exp(sign * i * x_n * u_m)`` along ``axis``.

    Dual axes go through an FFT with phase ramps; anything else falls back to
    an explicit matrix product.
    """
    c = np.moveaxis(np.asarray(c, complex), axis, -1)
    x = src.points
    u = dst.points
    if _are_dual(src, dst):
        n = src.count
        ramp_in = np.exp(sign * 1j * np.arange(n) * src.step * dst.start)
        ramp_out = np.exp(sign * 1j * src.start * u)
        if sign < 0:
            out = np.fft.fft(c * ramp_in, axis=-1)
        else:
            out = np.fft.ifft(c * ramp_in, axis=-1) * n
        out = out * ramp_out
    else:
        kernel = np.exp(sign * 1j * np.outer(x, u))
        out = c @ kernel
    return np.moveaxis(out, -1, axis)


# ---------------------------------------------------------------------------
# Transforms


def _default_freq_axes(f: QField, freq_axes) -> tuple[Axis, Axis]:
    if freq_axes is None:
        return dual_axis(f.axis_x), dual_axis(f.axis_y)
    return tuple(freq_axes)


def qft_direct(f: QField, freq_axes: Optional[tuple[Axis, Axis]] = None) -> SpectralField:
    """Reference transform by explicit Hamilton products, ``O(N^3)``.

    The x1 sum is taken first for every (u, x2), then the x2 sum with the
    right kernel; both kernels factor, so this equals the full double sum.
    """
    fu, fv = _default_freq_axes(f, freq_axes)
    x1 = f.axis_x.points
    x2 = f.axis_y.points
    u = fu.points
    v = fv.points
    partial = np.empty((u.size, x2.size, 4))
    for m, um in enumerate(u):
        left = quat.exp_i(-um * x1)[:, None, :]
        partial[m] = quat.mul(left, f.samples).sum(axis=0)
    out = np.empty((u.size, v.size, 4))
    right = quat.exp_j(-np.outer(x2, v))  # (x2, v, 4)
    for m in range(u.size):
        out[m] = quat.mul(partial[m][:, None, :], right).sum(axis=0)
    return SpectralField(fu, fv, out * f.weight, None, f.axes)


def _qft_split(c1: np.ndarray, c2: np.ndarray, src: tuple[Axis, Axis], dst: tuple[Axis, Axis]):
    """Split-form core of :func:`qft_fast` (unweighted)."""
    stacked = np.stack([c1, c2])  # (2, Nx, Ny)
    over_x = _dft_axis(stacked, src[0], dst[0], -1, 1)
    minus = _dft_axis(over_x, src[1], dst[1], -1, 2)
    if dst[1].is_symmetric():
        plus = minus[:, :, ::-1]
    else:
        plus = _dft_axis(over_x, src[1], dst[1], +1, 2)
    C1m, C2m = minus
    C1p, C2p = plus
    a = 0.5 * (C1m + C1p) + (C2p - C2m) / 2j
    b = 0.5 * (C2m + C2p) - (C1p - C1m) / 2j
    return a, b


def _iqft_split(a: np.ndarray, b: np.ndarray, src: tuple[Axis, Axis], dst: tuple[Axis, Axis]):
    """Split-form core of :func:`iqft` (unweighted)."""
    stacked = np.stack([a, b])
    over_u = _dft_axis(stacked, src[0], dst[0], +1, 1)
    plus = _dft_axis(over_u, src[1], dst[1], +1, 2)
    if dst[1].is_symmetric():
        minus = plus[:, :, ::-1]
    else:
        minus = _dft_axis(over_u, src[1], dst[1], -1, 2)
    Ap, Bp = plus
    Am, Bm = minus
    c1 = 0.5 * (Ap + Am) - (Bp - Bm) / 2j
    c2 = (Ap - Am) / 2j + 0.5 * (Bp + Bm)
    return c1, c2


def qft_fast(f: QField, freq_axes: Optional[tuple[Axis, Axis]] = None) -> SpectralField:
    """FFT route.  With ``C_k(u, v)`` the ordinary transform of ``c_k``:

        scalar slot: (C1(u,v) + C1(u,-v))/2 + (C2(u,-v) - C2(u,v))/(2i)
        j slot:      (C2(u,v) + C2(u,-v))/2 - (C1(u,-v) - C1(u,v))/(2i)
    """
    fu, fv = _default_freq_axes(f, freq_axes)
    c1, c2 = quat.split(f.samples)
    a, b = _qft_split(c1, c2, f.axes, (fu, fv))
    return SpectralField(fu, fv, quat.join(a, b) * f.weight, None, f.axes)


def qft(f: QField, freq_axes: Optional[tuple[Axis, Axis]] = None, method: str = "fast") -> SpectralField:
    if method == "fast":
        return qft_fast(f, freq_axes)
    if method == "direct":
        return qft_direct(f, freq_axes)
    raise ValueError(f"unknown QFT method {method!r}")


def qft_eval(f: QField, u, v) -> np.ndarray:
    """Transform of ``f`` on the tensor grid ``u x v`` (any 1-D arrays).

    Returns shape ``(len(u), len(v), 4)``.  Cost is a handful of complex
    matrix products, so it suits quadrature over irregular frequency nodes.
    """
    u = np.atleast_1d(np.asarray(u, float))
    v = np.atleast_1d(np.asarray(v, float))
    x1 = f.axis_x.points
    x2 = f.axis_y.points
    c1, c2 = quat.split(f.samples)
    left = np.exp(-1j * np.outer(u, x1))  # (U, Nx)
    arg = np.outer(x2, v)
    cos = np.cos(arg)
    sin = np.sin(arg)
    # f e^{-j x2 v} = (c1 cos + c2 sin) + (c2 cos - c1 sin) j
    a = left @ (c1 @ cos + c2 @ sin)
    b = left @ (c2 @ cos - c1 @ sin)
    return quat.join(a, b) * f.weight


def iqft(F: QField, space_axes: Optional[tuple[Axis, Axis]] = None) -> QField:
    """Inverse transform ``sum e^{i x1 u} F e^{j x2 v} du dv / (2 pi)``.

    ``(A + B j)(cos + j sin) = (A cos - B sin) + (A sin + B cos) j``, and the
    cos/sin sums come from the ``e^{+i x2 v}`` and ``e^{-i x2 v}`` transforms.
    """
    if space_axes is None:
        space_axes = getattr(F, "space_axes", None) or (space_axis(F.axis_x), space_axis(F.axis_y))
    space_axes = tuple(space_axes)
    a, b = quat.split(F.samples)
    c1, c2 = _iqft_split(a, b, F.axes, space_axes)
    return QField(space_axes[0], space_axes[1], quat.join(c1, c2) * F.weight)


# ---------------------------------------------------------------------------
# Covariance operators


def _lattice_gather(f: QField, scale: tuple[float, float], offset: tuple[float, float]) -> np.ndarray:
    """Samples of ``x -> f(scale*x + offset)`` on f's grid, zero where the target leaves the grid.

    Raises :class:`OffLatticeError` when a target point misses the lattice.
    """
    indices = []
    for ax, a, c in zip(f.axes, scale, offset):
        targets = a * ax.points + c
        pos = (targets - ax.start) / ax.step
        idx = np.rint(pos)
        if np.max(np.abs(pos - idx)) > 1e-9:
            raise OffLatticeError(
                "requested map leaves the sample lattice; use a field with an analytic evaluator"
            )
        indices.append(idx.astype(int))
    i1, i2 = indices
    ok1 = (i1 >= 0) & (i1 < f.axis_x.count)
    ok2 = (i2 >= 0) & (i2 < f.axis_y.count)
    out = np.zeros_like(f.samples)
    sub = f.samples[np.clip(i1, 0, f.axis_x.count - 1)][:, np.clip(i2, 0, f.axis_y.count - 1)]
    keep = ok1[:, None] & ok2[None, :]
    out[keep] = sub[keep]
    return out


def _resample(f: QField, evaluator) -> QField:
    x1, x2 = f.mesh()
    return f.with_samples(np.broadcast_to(evaluator(x1, x2), f.samples.shape), evaluator)


def modulate(f: QField, xi) -> QField:
    """``e^{-i x1 xi1} f(x) e^{-j x2 xi2}``."""
    xi = (float(xi[0]), float(xi[1]))
    x1, x2 = f.mesh()
    left = quat.exp_i(-xi[0] * x1)
    right = quat.exp_j(-xi[1] * x2)
    samples = quat.mul(quat.mul(left, f.samples), right)
    ev = Modulated(f.evaluator, xi) if f.evaluator is not None else None
    return f.with_samples(samples, ev)


def translate(f: QField, b) -> QField:
    """``x -> f(x - b)``.  Sampled fields need ``b`` on the lattice and are zero-filled."""
    b = (float(b[0]), float(b[1]))
    if f.evaluator is not None:
        return _resample(f, Translated(f.evaluator, b))
    for ax, shift in zip(f.axes, b):
        n = shift / ax.step
        if abs(n - round(n)) > 1e-9:
            raise OffLatticeError(f"shift {shift} is not a multiple of the step {ax.step}")
    return f.with_samples(_lattice_gather(f, (1.0, 1.0), (-b[0], -b[1])))


def dilate(f: QField, xi) -> QField:
    """``|xi1 xi2|^{1/2} f(xi1 x1, xi2 x2)``."""
    xi = (float(xi[0]), float(xi[1]))
    if xi[0] == 0 or xi[1] == 0:
        raise ValueError("dilation matrix must be invertible")
    if f.evaluator is not None:
        return _resample(f, Dilated(f.evaluator, xi))
    scale = math.sqrt(abs(xi[0] * xi[1]))
    return f.with_samples(scale * _lattice_gather(f, xi, (0.0, 0.0)))


def parity(f: QField) -> QField:
    """``x -> f(-x)``."""
    if f.evaluator is not None:
        return _resample(f, Reflected(f.evaluator))
    return f.with_samples(_lattice_gather(f, (-1.0, -1.0), (0.0, 0.0)))


# ---------------------------------------------------------------------------
# Convolution


def convolve(f: QField, g: QField) -> QField:
    """Periodic convolution ``sum_t f(t) g(x - t) dt / (2 pi)``, ``f`` on the left.

    ``g`` must have the origin on its lattice; positions ``x - t`` are then
    lattice offsets from it, wrapped around the sampling window.
    In split form ``(a + b j)(c + d j) = (a c - b conj(d)) + (a d + b conj(c)) j``,
    so the quaternion convolution is four complex circular convolutions.
    """
    f.require_congruent(g)
    origin = [ax.lattice_index(0.0) for ax in g.axes]
    if any(o is None for o in origin):
        raise GridMismatchError("convolution needs the origin on the sample lattice")
    shifted = np.roll(g.samples, shift=(-origin[0], -origin[1]), axis=(0, 1))
    a, b = quat.split(f.samples)
    c, d = quat.split(shifted)
    fft2, ifft2 = np.fft.fft2, np.fft.ifft2
    A, B = fft2(a), fft2(b)
    Cc, Dc = fft2(c), fft2(d)
    Cbar, Dbar = fft2(np.conj(c)), fft2(np.conj(d))
    first = ifft2(A * Cc - B * Dbar)
    second = ifft2(A * Dc + B * Cbar)
    return QField(f.axis_x, f.axis_y, quat.join(first, second) * f.weight)


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of :func:`check_convolution_hypothesis`."""

    structural: bool
    spectral: bool
    max_ik: float
    max_asymmetry: float
    commutator: float
    j_commutator: float
    tolerance: float

    @property
    def passed(self) -> bool:
        """Either condition is enough for the convolution theorem."""
        return self.structural or self.spectral

    def __bool__(self) -> bool:
        return self.passed


def check_convolution_hypothesis(g: QField, tol: float = 1e-9) -> HypothesisReport:
    """Check whether ``g`` lets the transform factor a convolution.

    Structural: no i or k part, and even in x1 on the lattice.
    Spectral: with ``G = F(g)`` and ``E = e^{-j v y}`` for ``y`` on the
    second spatial axis, ``G E = E G`` and ``F(j g) E = j E G``.  Both
    residuals are measured relative to ``max(1, max|G|)``.
    """
    scale = max(1.0, float(np.max(np.abs(g.samples))))
    max_ik = float(np.max(np.abs(g.samples[..., [1, 3]]))) / scale

    # mirror x1 -> -x1 where the mirrored point is on the grid
    ax = g.axis_x
    pos = (-ax.points - ax.start) / ax.step
    idx = np.rint(pos)
    on_lattice = np.abs(pos - idx) <= 1e-9
    if not np.all(on_lattice):
        max_asym = math.inf
    else:
        idx = idx.astype(int)
        inside = (idx >= 0) & (idx < ax.count)
        diff = g.samples[inside] - g.samples[idx[inside]]
        max_asym = float(np.max(np.abs(diff))) / scale if diff.size else 0.0
    structural = max_ik <= tol and max_asym <= tol

    G = qft_fast(g)
    jG = qft_fast(g.lmul(quat.J))
    v = G.axis_y.points
    y = g.axis_y.points
    E = quat.exp_j(-np.outer(v, y))  # (v, y, 4)
    Gs = G.samples[:, :, None, :]  # (u, v, 1, 4)
    jGs = jG.samples[:, :, None, :]
    Eb = E[None, :, :, :]
    gscale = max(1.0, float(np.max(quat.modulus(G.samples))))
    comm = quat.mul(Gs, Eb) - quat.mul(Eb, Gs)
    jcomm = quat.mul(jGs, Eb) - quat.mul(np.asarray(quat.J, float), quat.mul(Eb, Gs))
    c1 = float(np.max(quat.modulus(comm))) / gscale
    c2 = float(np.max(quat.modulus(jcomm))) / gscale
    spectral = c1 <= tol and c2 <= tol
    return HypothesisReport(structural, spectral, max_ik, max_asym, c1, c2, tol)
