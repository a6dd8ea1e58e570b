import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qstockwell import quat
from qstockwell.analytic import DifferenceOfGaussians, Gaussian, ModulatedGaussian
from qstockwell.grid import Axis, QField, canonical_axis, lp_norm, sample_analytic, scalar_inner
from qstockwell.qft import (
    OffLatticeError,
    check_convolution_hypothesis,
    convolve,
    dilate,
    dual_axis,
    iqft,
    modulate,
    parity,
    qft,
    qft_direct,
    qft_eval,
    qft_fast,
    space_axis,
    translate,
)

AX = canonical_axis()
AXES = (AX, AX)


def rel(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


def random_field(rng, n1, n2, start=-2.0, step=0.3):
    return QField(Axis(n1, start, step), Axis(n2, start * 0.7, step * 1.1), rng.standard_normal((n1, n2, 4)))


def test_dual_and_space_axes_pair_up():
    u = dual_axis(AX)
    assert math.isclose(u.step * AX.step * AX.count, 2 * math.pi)
    assert u.is_symmetric()
    back = space_axis(u)
    assert back.count == AX.count and math.isclose(back.start, AX.start) and math.isclose(back.step, AX.step)


@pytest.mark.parametrize("shape", [(16, 16), (32, 32), (12, 20), (7, 9)])
def test_fast_matches_direct(shape):
    rng = np.random.default_rng(sum(shape))
    f = random_field(rng, *shape)
    assert rel(qft_fast(f).samples, qft_direct(f).samples) < 1e-12


def test_fast_matches_direct_on_non_dual_frequency_grid():
    rng = np.random.default_rng(5)
    f = random_field(rng, 12, 10)
    freq = (Axis(9, -1.3, 0.31), Axis(11, -0.4, 0.17))
    assert rel(qft_fast(f, freq).samples, qft_direct(f, freq).samples) < 1e-12


def test_eval_matches_direct():
    rng = np.random.default_rng(11)
    f = random_field(rng, 10, 14)
    F = qft_direct(f)
    assert rel(qft_eval(f, F.axis_x.points, F.axis_y.points), F.samples) < 1e-13


def test_method_dispatch():
    f = sample_analytic(Gaussian(), AXES)
    assert np.allclose(qft(f, method="direct").samples, qft(f).samples, atol=1e-13)
    with pytest.raises(ValueError):
        qft(f, method="magic")


def test_gaussian_is_a_fixed_point():
    F = qft_fast(sample_analytic(Gaussian(), AXES))
    u, v = F.mesh()
    assert np.max(np.abs(F.samples[..., 0] - np.exp(-(u**2 + v**2) / 2))) < 1e-12
    assert np.max(np.abs(F.samples[..., 1:])) < 1e-13
    # the offset frequency grid has no origin sample; evaluate there directly
    centre = qft_eval(sample_analytic(Gaussian(), AXES), np.array([0.0]), np.array([0.0]))[0, 0]
    assert abs(centre[0] - 1.0) < 1e-12


def test_modulated_gaussian_spectrum_is_shifted():
    f = sample_analytic(ModulatedGaussian(1.0, 1.0, omega=(1.0, -0.5)), AXES)
    F = qft_fast(f)
    u, v = F.mesh()
    expected = np.exp(-((u - 1.0) ** 2 + (v + 0.5) ** 2) / 2)
    assert np.max(np.abs(F.samples[..., 0] - expected)) < 1e-10
    assert np.max(np.abs(F.samples[..., 1:])) < 1e-10


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (8, 12, 4), elements=st.floats(-10, 10)))
def test_discrete_plancherel_and_round_trip(a):
    ax1, ax2 = Axis(8, -1.0, 0.25), Axis(12, -1.5, 0.25)
    f = QField(ax1, ax2, a)
    F = qft_fast(f)
    nf = lp_norm(f, 2)
    assert math.isclose(lp_norm(F, 2), nf, rel_tol=1e-12, abs_tol=1e-12)
    back = iqft(F, f.axes)
    assert np.max(np.abs(back.samples - a)) <= 1e-12 * (1 + np.max(np.abs(a)))


def test_parseval():
    f = sample_analytic(ModulatedGaussian(0.8, 0.9, omega=(0.6, -0.4), center=(0.3, -0.2)), AXES)
    g = sample_analytic(Gaussian(0.9, 0.7, center=(0.2, 0.5)), AXES)
    assert abs(scalar_inner(qft_fast(f), qft_fast(g)) - scalar_inner(f, g)) < 1e-12


def test_inverse_default_grid():
    f = sample_analytic(Gaussian(0.7, 0.9), AXES)
    back = iqft(qft_fast(f))
    assert back.axis_x.start == AX.start
    assert np.max(np.abs(back.samples - f.samples)) < 1e-12


def narrow():
    return sample_analytic(ModulatedGaussian(0.7, 0.8, omega=(0.5, 0.3), center=(0.4, -0.3)), AXES)


def test_modulation_moves_spectrum_on_lattice():
    f = narrow()
    F = qft_fast(f)
    du = F.axis_x.step
    Fm = qft_fast(modulate(f, (2 * du, -3 * du))).samples
    assert np.max(np.abs(Fm[:-2, 3:] - F.samples[2:, :-3])) < 1e-12


def test_translation_multiplies_by_phases():
    f = narrow()
    sampled = QField(f.axis_x, f.axis_y, f.samples)
    b = (4 * AX.step, -2 * AX.step)
    F = qft_fast(f)
    u, v = F.mesh()
    expected = quat.mul(quat.mul(quat.exp_i(-b[0] * u), F.samples), quat.exp_j(-b[1] * v))
    assert np.max(np.abs(qft_fast(translate(sampled, b)).samples - expected)) < 1e-10
    # with a closed form the shift need not be on the lattice
    b = (0.37, -0.21)
    expected = quat.mul(quat.mul(quat.exp_i(-b[0] * u), F.samples), quat.exp_j(-b[1] * v))
    assert np.max(np.abs(qft_fast(translate(f, b)).samples - expected)) < 1e-10


def test_translate_off_lattice_needs_closed_form():
    f = narrow()
    with pytest.raises(OffLatticeError):
        translate(QField(f.axis_x, f.axis_y, f.samples), (0.1, 0.0))


def test_dilation_rescales_spectrum():
    # the dilated field must stay resolved by the 0.25 step
    f = sample_analytic(ModulatedGaussian(1.0, 1.0, omega=(0.5, 0.3), center=(0.4, -0.3)), AXES)
    xi = (1.5, 1.25)
    F = qft_fast(f)
    ref = qft_eval(f, F.axis_x.points / xi[0], F.axis_y.points / xi[1]) / math.sqrt(xi[0] * xi[1])
    assert np.max(np.abs(qft_fast(dilate(f, xi)).samples - ref)) < 1e-8
    with pytest.raises(ValueError):
        dilate(f, (0.0, 1.0))


def test_lattice_dilation_by_integer_factor():
    f = narrow()
    sampled = QField(f.axis_x, f.axis_y, f.samples)
    assert np.max(np.abs(dilate(sampled, (2.0, 2.0)).samples - dilate(f, (2.0, 2.0)).samples)) < 1e-9


def test_parity_sampled_and_closed_form_agree_inside_grid():
    f = narrow()
    sampled = parity(QField(f.axis_x, f.axis_y, f.samples)).samples
    exact = parity(f).samples
    # row/column 0 has no mirror partner and is zero-filled
    assert np.array_equal(sampled[0], np.zeros_like(sampled[0]))
    assert np.max(np.abs(sampled[1:, 1:] - exact[1:, 1:])) < 1e-15


def test_hypothesis_check_structural_for_even_span_1_j():
    g = sample_analytic(DifferenceOfGaussians(0.5, 2.0), AXES)
    report = check_convolution_hypothesis(g)
    assert report.structural and report.passed
    # the x1 = -8 row has no mirror sample, so the exact commutator test is a few 1e-5
    assert not report.spectral


def test_hypothesis_check_spectral_on_symmetric_grid():
    ax = Axis(63, -7.75, 0.25)
    g = sample_analytic(Gaussian(0.8, 0.6).lscale(quat.ONE) + Gaussian(0.8, 0.8, center=(0, 0.7)).lscale(quat.J), (ax, ax))
    report = check_convolution_hypothesis(g)
    assert report.structural and report.spectral


@pytest.mark.parametrize("bad", ["i-part", "odd-in-x1"])
def test_hypothesis_check_rejects(bad):
    if bad == "i-part":
        g = sample_analytic(Gaussian().lscale(quat.I), AXES)
    else:
        g = sample_analytic(Gaussian(center=(1.0, 0.0)), AXES)
    report = check_convolution_hypothesis(g)
    assert not report.passed and not bool(report)


def test_convolution_theorem():
    f = sample_analytic(ModulatedGaussian(0.8, 0.8, omega=(0.6, 0.4), center=(0.5, 0.2)), AXES)
    g = sample_analytic(Gaussian(0.8, 0.8, center=(0.0, 0.7)).lscale(quat.J) + Gaussian(0.8, 0.6), AXES)
    assert check_convolution_hypothesis(g).passed
    lhs = qft_fast(convolve(f, g)).samples
    rhs = quat.mul(qft_fast(f).samples, qft_fast(g).samples)
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_convolution_matches_direct_sum():
    rng = np.random.default_rng(2)
    ax = Axis(6, -0.75, 0.25)
    f = QField(ax, ax, rng.standard_normal((6, 6, 4)))
    g = QField(ax, ax, rng.standard_normal((6, 6, 4)))
    out = np.zeros((6, 6, 4))
    o = ax.lattice_index(0.0)
    for x1 in range(6):
        for x2 in range(6):
            for t1 in range(6):
                for t2 in range(6):
                    gi = ((x1 - t1 + o) % 6, (x2 - t2 + o) % 6)
                    out[x1, x2] += quat.mul(f.samples[t1, t2], g.samples[gi])
    out *= f.weight
    assert np.max(np.abs(convolve(f, g).samples - out)) < 1e-13
