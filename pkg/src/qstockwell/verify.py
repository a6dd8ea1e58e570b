"""Numerical verification suites behind ``qsw verify``.

Each check yields a :class:`Record` ``(name, lhs, rhs, margin, passed)``.
For identities ``lhs`` is the measured discrepancy and ``rhs`` the
tolerance; for inequalities they are the two sides of the bound.  A
failing check whose outcome depends on grid resolution or truncation is
labelled ``"resolution"``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import integrate as sp_integrate

from . import quat
from . import stockwell as sw
from . import uncertainty as un
from .analytic import Gaussian, ModulatedGaussian
from .grid import Axis, QField, canonical_axis, exact_sum, integrate, lp_norm, offset_axis, sample_analytic, scalar_inner
from .qft import (
    check_convolution_hypothesis,
    convolve,
    dilate,
    dual_axis,
    iqft,
    modulate,
    parity,
    qft_direct,
    qft_eval,
    qft_fast,
    translate,
)

__all__ = ["VerifyConfig", "Record", "SUITES", "run_suite", "quadrature_gamma"]


@dataclass(frozen=True)
class VerifyConfig:
    """Grids and windows used by the suites; defaults are the canonical configuration."""

    extent: float = 8.0
    count: int = 64
    xi_extent: float = 4.0
    xi_count: int = 16
    b_extent: Optional[float] = None
    window: str = "admissible_dog"
    alpha: float = 0.5
    beta: float = 2.0
    signal_sigma: float = 1.0
    inversion_sigma: float = 0.35
    seed: int = 20240601
    threads: int = 1

    def __post_init__(self):
        n = self.count
        if n < 16 or n > 256 or n & (n - 1):
            raise ValueError(f"sample count must be a power of two in [16, 256], got {n}")
        if not self.extent > 0:
            raise ValueError("grid extent must be positive")
        if self.threads < 1:
            raise ValueError("thread count must be at least 1")
        if self.xi_count < 2 or self.xi_count % 2:
            raise ValueError("xi count must be even so the grid avoids the axes")
        if not self.xi_extent > 0:
            raise ValueError("xi extent must be positive")
        if self.window != "admissible_dog":
            raise ValueError("the uncertainty and Plancherel checks need an admissible_dog window")

    @property
    def axis(self) -> Axis:
        return canonical_axis(self.extent, self.count)

    @property
    def axes(self) -> tuple[Axis, Axis]:
        return (self.axis, self.axis)

    @property
    def b_axes(self) -> tuple[Axis, Axis]:
        if self.b_extent is None:
            return self.axes
        ax = self.axis
        n = round(2 * self.b_extent / ax.step)
        b = Axis(n, -n * ax.step / 2, ax.step)
        return (b, b)

    def xi_axes(self, refine: int = 1) -> tuple[Axis, Axis]:
        ax = offset_axis(self.xi_extent, self.xi_count * refine)
        return (ax, ax)


@dataclass(frozen=True)
class Record:
    suite: str
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool
    label: str = ""
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _tol_record(suite, name, error, tol, sensitive=True, note="") -> Record:
    error = float(error)
    ok = bool(error <= tol)
    label = "resolution" if (sensitive and not ok) else ""
    return Record(suite, name, error, float(tol), (tol - error) / tol, ok, label, note)


def _bound_record(suite, report: un.BoundReport, sensitive=True, note="") -> Record:
    label = "resolution" if (sensitive and not report.satisfied) else ""
    return Record(suite, report.name, report.lhs, report.rhs, report.margin, report.satisfied, label, note)


def _rel_max(a: np.ndarray, b: np.ndarray) -> float:
    scale = float(np.max(np.abs(b)))
    return float(np.max(np.abs(a - b))) / (scale if scale > 0 else 1.0)


def quadrature_gamma(x: float) -> float:
    """Gamma by adaptive quadrature of ``t^{x-1} e^{-t}``; an independent cross-check."""
    head, _ = sp_integrate.quad(lambda t: t ** (x - 1) * math.exp(-t), 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)
    tail, _ = sp_integrate.quad(lambda t: t ** (x - 1) * math.exp(-t), 1.0, math.inf, epsabs=0, epsrel=1e-13, limit=200)
    return head + tail


def heisenberg_constant_by_quadrature(p: float, q: float) -> float:
    g = quadrature_gamma
    return (
        2.0 / (math.e * p)
        * (p / q) ** (p / (p + q))
        * (p * q / (g(2.0 / p) * g(2.0 / q))) ** (p * q / (2.0 * (p + q)))
    )


class Context:
    """Lazily computed objects shared between checks of one run."""

    def __init__(self, cfg: VerifyConfig):
        self.cfg = cfg

    @cached_property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.cfg.seed)

    @cached_property
    def gaussian(self) -> QField:
        return sample_analytic(Gaussian(1.0, 1.0), self.cfg.axes)

    @cached_property
    def signal(self) -> QField:
        s = self.cfg.signal_sigma
        return sample_analytic(Gaussian(s, s), self.cfg.axes)

    @cached_property
    def signal2(self) -> QField:
        return sample_analytic(ModulatedGaussian(0.8, 0.9, omega=(0.6, -0.4), center=(0.3, -0.2)), self.cfg.axes)

    @cached_property
    def window(self) -> sw.WindowSpec:
        return sw.make_window("admissible_dog", axes=self.cfg.axes, alpha=self.cfg.alpha, beta=self.cfg.beta)

    @cached_property
    def window2(self) -> sw.WindowSpec:
        return sw.make_window("admissible_dog", axes=self.cfg.axes, alpha=0.4, beta=1.5)

    @cached_property
    def admissibility(self) -> sw.AdmissibilityReport:
        return sw.admissibility_constant(self.window)

    @cached_property
    def admissibility2(self) -> sw.AdmissibilityReport:
        return sw.admissibility_constant(self.window2)

    @cached_property
    def c_phi(self) -> float:
        return self.admissibility.c_phi

    @cached_property
    def volume(self) -> sw.StockwellField:
        return sw.forward_fast(self.signal, self.window, self.cfg.xi_axes(), self.cfg.b_axes, self.cfg.threads)

    @cached_property
    def norms(self) -> tuple[float, float]:
        return lp_norm(self.signal, 2), self.window.norm


# ---------------------------------------------------------------------------
# QFT suite


def _qft_checks(ctx: Context) -> list[Record]:
    S = "qft"
    out = []
    worst = 0.0
    for n in (16, 32):
        for _ in range(10):
            ax = Axis(n, -0.5 * n * 0.3, 0.3)
            f = QField(ax, ax, ctx.rng.standard_normal((n, n, 4)))
            worst = max(worst, _rel_max(qft_fast(f).samples, qft_direct(f).samples))
    out.append(_tol_record(S, "oracle equivalence (random 16x16, 32x32)", worst, 1e-10, sensitive=False))

    f = ctx.signal2
    out.append(
        _tol_record(S, "oracle equivalence (configured grid)", _rel_max(qft_fast(f).samples, qft_direct(f).samples), 1e-10, False)
    )

    G = qft_fast(ctx.gaussian)
    u1, u2 = G.mesh()
    expected = np.zeros_like(G.samples)
    expected[..., 0] = np.exp(-(u1**2 + u2**2) / 2)
    out.append(_tol_record(S, "gaussian fixed point", np.max(np.abs(G.samples - expected)), 1e-6))

    g = sample_analytic(Gaussian(0.9, 0.7, center=(0.2, 0.5)), ctx.cfg.axes)
    F, Gg = qft_fast(f), qft_fast(g)
    nf, nF = lp_norm(f, 2), lp_norm(F, 2)
    out.append(_tol_record(S, "plancherel", abs(nF - nf) / nf, 1e-8))
    out.append(_tol_record(S, "parseval", abs(scalar_inner(F, Gg) - scalar_inner(f, g)), 1e-8))

    back = iqft(F, f.axes)
    out.append(_tol_record(S, "inversion round trip", np.max(np.abs(back.samples - f.samples)), 1e-8))

    kernel = sample_analytic(Gaussian(0.8, 0.6).lscale(quat.ONE) + Gaussian(0.8, 0.8, center=(0.0, 0.7)).lscale(quat.J), ctx.cfg.axes)
    report = check_convolution_hypothesis(kernel)
    out.append(
        Record(S, "convolution hypothesis (span{1,j}, even in x1)", report.commutator, report.tolerance,
               (report.tolerance - report.commutator) / report.tolerance, bool(report.structural and report.spectral))
    )
    conv = convolve(f, kernel)
    lhs = qft_fast(conv).samples
    K = qft_fast(kernel)
    rhs = quat.mul(F.samples, K.samples)
    out.append(_tol_record(S, "convolution theorem", np.max(np.abs(lhs - rhs)), 1e-8))
    e_space = lp_norm(conv, 2) ** 2
    e_freq = exact_sum(quat.modulus2(F.samples) * quat.modulus2(K.samples)) * F.weight
    out.append(_tol_record(S, "convolution energy identity", abs(e_space - e_freq), 1e-8))

    # modulation by a lattice frequency moves the spectrum by whole steps
    du = (F.axis_x.step, F.axis_y.step)
    k, l = 3, -2
    Fm = qft_fast(modulate(f, (k * du[0], l * du[1]))).samples
    n1, n2 = F.shape
    lo1, hi1 = max(0, -k), n1 - max(0, k)
    lo2, hi2 = max(0, -l), n2 - max(0, l)
    shifted = F.samples[lo1 + k : hi1 + k, lo2 + l : hi2 + l]
    out.append(_tol_record(S, "modulation law (lattice shift)", np.max(np.abs(Fm[lo1:hi1, lo2:hi2] - shifted)), 1e-10))

    sampled = QField(f.axis_x, f.axis_y, f.samples)
    step = f.axis_x.step
    b = (3 * step, -5 * step)
    Ft = qft_fast(translate(sampled, b)).samples
    modF = quat.mul(quat.mul(quat.exp_i(-b[0] * u1), F.samples), quat.exp_j(-b[1] * u2))
    out.append(_tol_record(S, "translation law (lattice shift)", np.max(np.abs(Ft - modF)), 1e-10))

    Fd = qft_fast(dilate(ctx.gaussian, (2.0, 2.0))).samples
    ref = 0.5 * qft_eval(ctx.gaussian, G.axis_x.points / 2, G.axis_y.points / 2)
    out.append(_tol_record(S, "dilation law (analytic resampling)", np.max(np.abs(Fd - ref)), 1e-8))
    return out


# ---------------------------------------------------------------------------
# Stockwell suite


def _small_axes(ctx: Context):
    xi = (offset_axis(2.0, 4), offset_axis(2.0, 4))
    step = ctx.cfg.axis.step
    b = (Axis(8, -4 * step, step), Axis(8, -4 * step, step))
    return xi, b


def _stockwell_checks(ctx: Context) -> list[Record]:
    S = "stockwell"
    cfg = ctx.cfg
    out = []
    threads = cfg.threads
    f = ctx.signal2
    phi = ctx.window

    direct = sw.forward(f, phi, cfg.xi_axes(), cfg.b_axes, threads)
    fast = sw.forward_fast(f, phi, cfg.xi_axes(), cfg.b_axes, threads)
    out.append(_tol_record(S, "fast path vs direct", _rel_max(fast.coeffs, direct.coeffs), 1e-8, False))

    xi, b = _small_axes(ctx)
    g = ctx.signal
    alpha = np.array([0.7, -0.3, 0.0, 0.0])
    beta = np.array([-0.2, 0.9, 0.0, 0.0])
    combo = QField(f.axis_x, f.axis_y, quat.mul(alpha, f.samples) + quat.mul(beta, g.samples))
    lhs = sw.forward(combo, phi, xi, b, threads).coeffs
    rhs = quat.mul(alpha, sw.forward(f, phi, xi, b, threads).coeffs) + quat.mul(beta, sw.forward(g, phi, xi, b, threads).coeffs)
    out.append(_tol_record(S, "linearity (complex coefficients)", _rel_max(lhs, rhs), 1e-12, False))

    psi = sw.make_window("gaussian_unit", axes=cfg.axes, sigma=0.7)
    qa = np.array([0.3, -0.2, 0.5, 0.1])
    qb = np.array([-0.4, 0.6, 0.2, -0.3])
    mixed = sample_analytic(phi.evaluator.lscale(qa) + psi.evaluator.lscale(qb), cfg.axes)
    lhs = sw.forward(f, sw.make_window("from_field", field=mixed), xi, b, threads).coeffs
    rhs = quat.mul(sw.forward(f, phi, xi, b, threads).coeffs, quat.conj(qa)) + quat.mul(
        sw.forward(f, psi, xi, b, threads).coeffs, quat.conj(qb)
    )
    out.append(_tol_record(S, "anti-linearity in the window", _rel_max(lhs, rhs), 1e-12, False))

    # parity: S(f(-.))(xi, b) against S(f)(-xi, -b) on the mirrored grid
    ev = f.evaluator
    lhs = sw.forward(parity(f), phi, xi, b, threads).coeffs
    mirror = tuple(Axis(a.count, -(a.start + (a.count - 1) * a.step), a.step) for a in f.axes)
    bm = tuple(Axis(a.count, -(a.start + (a.count - 1) * a.step), a.step) for a in b)
    rhs = sw.forward(sample_analytic(ev, mirror), phi, xi, bm, threads).coeffs[::-1, ::-1, ::-1, ::-1]
    out.append(_tol_record(S, "parity", np.max(np.abs(lhs - rhs)), 1e-10, False))

    lam = 2.0
    lhs = sw.forward(sw.scaling_dilate(f, lam), phi, xi, b, threads).coeffs
    wide = tuple(Axis(a.count, lam * a.start, lam * a.step) for a in f.axes)
    xs = tuple(Axis(a.count, a.start / lam, a.step / lam) for a in xi)
    bs = tuple(Axis(a.count, lam * a.start, lam * a.step) for a in b)
    rhs = sw.forward(sample_analytic(ev, wide), phi, xs, bs, threads).coeffs / lam
    out.append(_tol_record(S, "scaling (lambda=2)", np.max(np.abs(lhs - rhs)), 1e-8, False))

    # inversion with a unit-integral window on the dual frequency grid
    unit = sw.make_window("gaussian_unit", axes=cfg.axes, sigma=cfg.inversion_sigma)
    dual = (dual_axis(cfg.axis), dual_axis(cfg.axis))
    vol = sw.forward_fast(ctx.signal, unit, dual, cfg.axes, threads)
    try:
        rec = sw.invert(vol, cfg.axes)
        err = math.sqrt(exact_sum(quat.modulus2(rec.samples - ctx.signal.samples))) / math.sqrt(
            exact_sum(quat.modulus2(ctx.signal.samples))
        )
        out.append(_tol_record(S, "inversion (gaussian_unit, matched grids)", err, 1e-3))
    except sw.CoverageError as exc:
        out.append(Record(S, "inversion (gaussian_unit, matched grids)", math.inf, 1e-3, -math.inf, False, "resolution", str(exc)))

    # Plancherel and its behaviour under refinement of the xi-grid
    c = ctx.c_phi
    ratio = sw.plancherel_ratio(ctx.volume, c, ctx.signal)
    fine = sw.forward_fast(ctx.signal, phi, cfg.xi_axes(2), cfg.b_axes, threads)
    ratio_fine = sw.plancherel_ratio(fine, c, ctx.signal)
    note = f"ratio={ratio!r} refined={ratio_fine!r}"
    out.append(_tol_record(S, "plancherel energy ratio within 5%", abs(ratio - 1), 0.05, note=note))
    dev, dev_fine = abs(ratio - 1), abs(ratio_fine - 1)
    ok = dev_fine < dev
    out.append(
        Record(S, "plancherel deviation shrinks under xi refinement", dev_fine, dev, (dev - dev_fine) / dev if dev else 0.0,
               ok, "" if ok else "resolution", note)
    )

    # Parseval with two windows and two signals
    phi2 = ctx.window2
    cross = sw.cross_admissibility(phi, phi2)
    Sg = sw.forward_fast(ctx.signal2, phi2, cfg.xi_axes(), cfg.b_axes, threads)
    lhs = exact_sum(np.einsum("...c,...c->...", ctx.volume.coeffs, Sg.coeffs)) * ctx.volume.weight
    mid = quat.mul(quat.mul(ctx.signal.samples, cross.c_phi_psi), quat.conj(ctx.signal2.samples))
    rhs = exact_sum(mid[..., 0]) * ctx.signal.weight
    out.append(_tol_record(S, "parseval with a window pair within 5%", abs(lhs - rhs) / abs(rhs), 0.05,
                           note=f"lhs={lhs!r} rhs={rhs!r}"))

    values = [sw.lemma_integral(phi, z) for z in ((0.5, 0.5), (1.0, 1.0), (2.0, 1.0))]
    spread = (max(values) - min(values)) / max(values)
    out.append(_tol_record(S, "lemma integral independent of zeta", spread, 0.02))
    out.append(_tol_record(S, "lemma integral equals C_phi", max(abs(v - c) / c for v in values), 0.02))

    rep = ctx.admissibility
    out.append(_tol_record(S, "admissible_dog constant converges", rep.refinement_error if rep.verdict == "admissible" else math.inf, 0.02,
                           note=f"verdict={rep.verdict}"))
    gau = sw.admissibility_constant(sw.make_window("gaussian_unit", axes=cfg.axes, sigma=1.0))
    growth = gau.estimates[-1] / gau.estimates[-2] - 1
    out.append(Record(S, "gaussian_unit flagged divergent", growth, 0.25, (growth - 0.25) / 0.25, gau.verdict == "divergent",
                      "" if gau.verdict == "divergent" else "resolution", f"verdict={gau.verdict}"))

    nf, nphi = ctx.norms
    for p in (2, 4, 8):
        out.append(_bound_record(S, un.lp_lemma_check(ctx.volume, p, c, nf, nphi)))
    c2 = ctx.admissibility2.c_phi
    norms = (nf, lp_norm(ctx.signal2, 2), nphi, phi2.norm)
    for p in (1, 2, 4):
        out.append(_bound_record(S, un.lieb_product_check(ctx.volume, Sg, p, c, c2, norms)))
    return out


# ---------------------------------------------------------------------------
# Uncertainty suite


def _uncertainty_checks(ctx: Context) -> list[Record]:
    S = "uncertainty"
    out = []
    vol = ctx.volume
    nf, nphi = ctx.norms
    c = ctx.c_phi
    out.append(_bound_record(S, un.beckner_check(vol, nf, nphi)))
    out.append(_bound_record(S, un.heisenberg_check(vol, 2, 2, nf, nphi)))
    d_closed = un.heisenberg_constant(2, 2)
    out.append(_tol_record(S, "D_{2,2} closed form = 2/e", abs(d_closed - 2 / math.e), 1e-12, False))
    out.append(_tol_record(S, "D_{2,2} against quadrature gamma", abs(d_closed - heisenberg_constant_by_quadrature(2, 2)), 1e-8, False))
    out.append(_tol_record(S, "M_{2,1} closed form = sqrt(2)", abs(un.local_constant(2, 1) - math.sqrt(2)), 1e-12, False))
    region = un.central_box(vol, 1.0)
    out.append(_bound_record(S, un.local_check(vol, region, 1.0, 2.0, nf, nphi), note=f"measure={region.measure!r}"))
    for alpha in (0.0, 0.3, 0.5):
        region = un.full_region(vol) if alpha == 0 else un.energy_box(vol, 1 - alpha**2)
        out.append(_bound_record(S, un.donoho_stark_check(vol, region, c, nphi)))
        if alpha == 0.3:
            out.append(_bound_record(S, un.lieb_concentration_check(vol, region, 4.0, c, nphi)))
    return out


SUITES: dict[str, Callable[[Context], list[Record]]] = {
    "qft": _qft_checks,
    "stockwell": _stockwell_checks,
    "uncertainty": _uncertainty_checks,
}


def run_suite(name: str, cfg: VerifyConfig) -> list[Record]:
    """Run one suite (or ``all``) and return its records in a fixed order."""
    ctx = Context(cfg)
    names = list(SUITES) if name == "all" else [name]
    records: list[Record] = []
    for n in names:
        if n not in SUITES:
            raise ValueError(f"unknown suite {n!r}; choose from all, {', '.join(SUITES)}")
        records.extend(SUITES[n](ctx))
    return records
