import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qstockwell import quat
from qstockwell.analytic import Gaussian
from qstockwell.grid import (
    Axis,
    GridMismatchError,
    QField,
    RegionMask,
    TWO_PI,
    canonical_axis,
    exact_sum,
    inner,
    integrate,
    lp_norm,
    offset_axis,
    sample_analytic,
    scalar_inner,
)


def test_canonical_axis_layout():
    ax = canonical_axis()
    assert ax.count == 64 and ax.step == 0.25 and ax.start == -8.0
    assert ax.points[-1] == 7.75
    assert ax.lattice_index(0.0) == 32
    assert ax.lattice_index(0.1) is None
    assert not ax.is_symmetric()


def test_offset_axis_avoids_zero():
    ax = offset_axis(4.0, 16)
    assert ax.is_symmetric()
    assert not ax.contains_zero()
    assert ax.points[0] == -3.75 and ax.points[-1] == 3.75


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis(0, 0.0, 1.0)
    with pytest.raises(ValueError):
        Axis(4, 0.0, -1.0)


def test_field_is_read_only_and_shape_checked():
    ax = canonical_axis(2.0, 16)
    f = QField.zeros(ax, ax)
    with pytest.raises(ValueError):
        f.samples[0, 0, 0] = 1.0
    with pytest.raises(ValueError):
        QField(ax, ax, np.zeros((16, 15, 4)))


def test_gaussian_integral_and_norm():
    # under dmu = dx dy / (2 pi): integral of e^{-|x|^2/2} is 1, squared norm is 1/2
    ax = canonical_axis()
    g = sample_analytic(Gaussian(), (ax, ax))
    assert abs(integrate(g)[0] - 1.0) < 1e-12
    assert abs(lp_norm(g, 2) ** 2 - 0.5) < 1e-12
    assert lp_norm(g, math.inf) == 1.0


def test_lp_norm_rejects_p_below_one():
    ax = canonical_axis(2.0, 16)
    with pytest.raises(ValueError):
        lp_norm(QField.zeros(ax, ax), 0.5)


def test_mismatched_grids_rejected():
    a = canonical_axis(2.0, 16)
    b = canonical_axis(4.0, 16)
    with pytest.raises(GridMismatchError):
        QField.zeros(a, a) + QField.zeros(b, b)
    with pytest.raises(GridMismatchError):
        inner(QField.zeros(a, a), QField.zeros(b, b))


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (8, 8, 4), elements=st.floats(-10, 10)), arrays(np.float64, (8, 8, 4), elements=st.floats(-10, 10)))
def test_inner_product_properties(a, b):
    ax = Axis(8, -1.0, 0.25)
    f, g = QField(ax, ax, a), QField(ax, ax, b)
    fg, gf = inner(f, g), inner(g, f)
    assert np.allclose(fg, quat.conj(gf), atol=1e-9)
    assert math.isclose(scalar_inner(f, g), fg[0], rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(inner(f, f)[0], lp_norm(f, 2) ** 2, rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (6, 6, 4), elements=st.floats(-5, 5)), st.sampled_from([1.0, 1.5, 2.0, 3.0, 4.0]))
def test_minkowski(a, p):
    ax = Axis(6, 0.0, 0.5)
    f = QField(ax, ax, a)
    g = QField(ax, ax, a[::-1])
    assert lp_norm(f + g, p) <= lp_norm(f, p) + lp_norm(g, p) + 1e-12


def test_left_and_right_scaling_differ():
    ax = canonical_axis(2.0, 16)
    f = QField(ax, ax, np.broadcast_to(quat.as_quat(quat.J), (16, 16, 4)))
    left = f.lmul(quat.I).samples[0, 0]
    right = f.rmul(quat.I).samples[0, 0]
    assert np.array_equal(left, [0, 0, 0, 1]) and np.array_equal(right, [0, 0, 0, -1])


def test_region_measure():
    m = np.zeros((4, 4, 4, 4), bool)
    m[:2] = True
    region = RegionMask(m, 0.5)
    assert math.isclose(region.measure, 128 * 0.5 / TWO_PI**2)
    assert math.isclose(region.complement().measure + region.measure, 256 * 0.5 / TWO_PI**2)
    assert (region | region.complement()).mask.all()


def test_exact_sum_is_order_independent():
    rng = np.random.default_rng(3)
    v = rng.standard_normal(10000) * 10.0 ** rng.integers(-8, 8, 10000)
    assert exact_sum(v) == exact_sum(v[::-1]) == math.fsum(v)
