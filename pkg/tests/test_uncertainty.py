import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qstockwell import uncertainty as un
from qstockwell.grid import RegionMask
from qstockwell.verify import heisenberg_constant_by_quadrature, quadrature_gamma


def test_bound_report_directions():
    ok = un.BoundReport.build("x", 2.0, 1.0, ">=")
    assert ok.satisfied and ok.margin == 1.0
    bad = un.BoundReport.build("x", 2.0, 1.0, "<=")
    assert not bad.satisfied and bad.margin == -1.0
    # the permissive side is inflated by 1e-9 relative
    assert un.BoundReport.build("x", 1.0 + 5e-10, 1.0, "<=").satisfied
    assert not un.BoundReport.build("x", 1.0 + 5e-9, 1.0, "<=").satisfied
    with pytest.raises(ValueError):
        un.BoundReport.build("x", 1.0, 1.0, "<")


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 30.0))
def test_gamma_against_quadrature(x):
    assert math.isclose(un.gamma(x), quadrature_gamma(x), rel_tol=1e-10)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_gamma_domain(x):
    with pytest.raises(ValueError):
        un.gamma(x)


def test_heisenberg_constant_values():
    assert un.heisenberg_constant(2, 2) == pytest.approx(2 / math.e, rel=1e-15)
    for p, q in [(1, 1), (1, 3), (4, 2), (2.5, 0.7)]:
        assert math.isclose(un.heisenberg_constant(p, q), heisenberg_constant_by_quadrature(p, q), rel_tol=1e-10)
    with pytest.raises(ValueError):
        un.heisenberg_constant(0, 1)


def test_local_constant_values():
    assert un.local_constant(2, 1) == pytest.approx(math.sqrt(2), rel=1e-15)
    with pytest.raises(ValueError):
        un.local_constant(0, 1)
    with pytest.raises(ValueError):
        un.local_constant(1, 0.5)


def test_entropy_of_flat_density():
    values = np.full((2, 3, 4, 5), 0.3)
    P = un.Density(values, 0.01)
    assert un.entropy(P) == pytest.approx(-0.3 * math.log(0.3) * 120 * 0.01, rel=1e-14)
    assert un.entropy(un.Density(np.zeros((2, 2)), 1.0)) == 0.0
    with pytest.raises(ValueError):
        un.Density(np.array([-1.0]), 1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.01, 100.0))
def test_heisenberg_lhs_is_quadratic_in_amplitude(canonical_volume, canonical_norms, c):
    nf, nphi = canonical_norms
    base = un.heisenberg_check(canonical_volume, 2, 2, nf, nphi)
    scaled = un.heisenberg_check(canonical_volume.scaled(c), 2, 2, nf * c, nphi)
    assert scaled.lhs == pytest.approx(base.lhs * c * c, rel=1e-12)
    assert scaled.rhs == pytest.approx(base.rhs * c * c, rel=1e-12)


def test_energy_box_captures_fraction(canonical_volume):
    dens = canonical_volume.density()
    for fraction in (0.5, 0.75, 0.91):
        box = un.energy_box(canonical_volume, fraction)
        captured = math.fsum(dens[box.mask].ravel()) / math.fsum(dens.ravel())
        assert captured >= fraction * (1 - 1e-12)
        assert un.concentration_alpha(canonical_volume, box) == pytest.approx(math.sqrt(1 - captured), abs=1e-12)
    with pytest.raises(ValueError):
        un.energy_box(canonical_volume, 0.0)


def test_central_box_reaches_measure(canonical_volume):
    box = un.central_box(canonical_volume, 1.0)
    assert box.measure >= 1.0
    # boxes grow in discrete shells; the first nonempty one holds 2x2 xi cells
    smaller = un.central_box(canonical_volume, 0.02)
    assert 0.02 <= smaller.measure < box.measure
    assert int(smaller.mask.sum()) == 4 * 25


def test_region_shape_checked(canonical_volume, canonical_norms, dog_admissibility):
    wrong = RegionMask(np.ones((2, 2, 2, 2), bool), 1.0)
    with pytest.raises(ValueError):
        un.donoho_stark_check(canonical_volume, wrong, dog_admissibility.c_phi, canonical_norms[1])


def test_lieb_concentration_needs_p_above_two(canonical_volume, canonical_norms, dog_admissibility):
    region = un.full_region(canonical_volume)
    with pytest.raises(ValueError):
        un.lieb_concentration_check(canonical_volume, region, 2.0, dog_admissibility.c_phi, canonical_norms[1])


def test_donoho_stark_with_explicit_alpha(canonical_volume, canonical_norms, dog_admissibility):
    region = un.full_region(canonical_volume)
    rep = un.donoho_stark_check(canonical_volume, region, dog_admissibility.c_phi, canonical_norms[1], alpha=0.0)
    assert rep.rhs == pytest.approx(dog_admissibility.c_phi / canonical_norms[1] ** 2)
    assert rep.satisfied


def test_lieb_product_shape_checked(canonical_volume):
    from qstockwell.grid import Axis
    from qstockwell.stockwell import StockwellField

    b = Axis(8, -1.0, 0.25)
    other = StockwellField(canonical_volume.xi_axes, (b, b), np.zeros((16, 16, 8, 8, 4)))
    with pytest.raises(ValueError):
        un.lieb_product_check(canonical_volume, other, 2, 1.0, 1.0, (1.0, 1.0, 1.0, 1.0))


def test_local_bound_with_larger_alpha(canonical_volume, canonical_norms):
    nf, nphi = canonical_norms
    region = un.central_box(canonical_volume, 1.0)
    assert un.local_check(canonical_volume, region, 2.0, 1.0, nf, nphi).satisfied
