import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qstockwell import quat

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
quats = arrays(np.float64, (4,), elements=finite)


def close(a, b, scale=1.0):
    return np.allclose(a, b, rtol=1e-12, atol=1e-12 * max(1.0, scale))


def test_basis_products():
    i, j, k, one = (quat.as_quat(q) for q in (quat.I, quat.J, quat.K, quat.ONE))
    assert np.array_equal(quat.mul(i, j), k)
    assert np.array_equal(quat.mul(j, k), i)
    assert np.array_equal(quat.mul(k, i), j)
    assert np.array_equal(quat.mul(j, i), -k)
    for q in (i, j, k):
        assert np.array_equal(quat.mul(q, q), -one)
    assert np.array_equal(quat.mul(quat.mul(i, j), k), -one)


def test_as_quat_rejects_wrong_trailing_axis():
    with pytest.raises(ValueError):
        quat.as_quat(np.zeros((3, 3)))


@given(quats, quats, quats)
def test_associative(p, q, r):
    scale = float(np.prod([np.linalg.norm(x) + 1 for x in (p, q, r)]))
    assert close(quat.mul(quat.mul(p, q), r), quat.mul(p, quat.mul(q, r)), scale)


@given(quats, quats)
def test_modulus_multiplicative(p, q):
    lhs = quat.modulus(quat.mul(p, q))
    rhs = quat.modulus(p) * quat.modulus(q)
    assert math.isclose(lhs, rhs, rel_tol=1e-12, abs_tol=1e-300)


@given(quats, quats)
def test_conjugation_reverses_products(p, q):
    scale = (np.linalg.norm(p) + 1) * (np.linalg.norm(q) + 1)
    assert close(quat.conj(quat.mul(p, q)), quat.mul(quat.conj(q), quat.conj(p)), scale)


@given(quats)
def test_conjugate_product_is_modulus(q):
    prod = quat.mul(q, quat.conj(q))
    expected = np.array([quat.modulus2(q), 0, 0, 0])
    assert close(prod, expected, float(quat.modulus2(q)) + 1)


@given(quats)
def test_split_join_round_trip(q):
    c1, c2 = quat.split(q)
    assert np.array_equal(quat.join(c1, c2), q)


@given(quats, quats)
def test_split_product_rule(p, q):
    # (a + b j)(c + d j) = (a c - b conj d) + (a d + b conj c) j
    a, b = quat.split(p)
    c, d = quat.split(q)
    expected = quat.join(a * c - b * np.conj(d), a * d + b * np.conj(c))
    scale = (np.linalg.norm(p) + 1) * (np.linalg.norm(q) + 1)
    assert close(quat.mul(p, q), expected, scale)


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_exponentials(s, t):
    # e^{i s} and e^{j t} have unit modulus and compose additively
    assert math.isclose(quat.modulus(quat.exp_i(s)), 1.0, rel_tol=1e-14)
    assert close(quat.mul(quat.exp_j(s), quat.exp_j(t)), quat.exp_j(s + t), 1.0)
    assert close(quat.mul(quat.exp_i(s), quat.exp_i(t)), quat.exp_i(s + t), 1.0)


def test_complex_embeddings():
    z = np.array([1 + 2j, -3 + 0.5j])
    assert np.array_equal(quat.from_complex_i(z), [[1, 2, 0, 0], [-3, 0.5, 0, 0]])
    assert np.array_equal(quat.from_complex_j(z), [[1, 0, 2, 0], [-3, 0, 0.5, 0]])


@settings(max_examples=50)
@given(arrays(np.float64, (3, 5, 4), elements=finite), arrays(np.float64, (5, 4), elements=finite))
def test_broadcasting_matches_pointwise(p, q):
    out = quat.mul(p, q)
    assert out.shape == (3, 5, 4)
    for a in range(3):
        for b in range(5):
            assert np.array_equal(out[a, b], quat.mul(p[a, b], q[b]))


def test_scalar_part_and_modulus_shapes():
    q = np.arange(24, dtype=float).reshape(2, 3, 4)
    assert quat.scalar_part(q).shape == (2, 3)
    assert np.allclose(quat.modulus(q) ** 2, quat.modulus2(q))
