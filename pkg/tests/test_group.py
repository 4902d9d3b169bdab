import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heisenlab.errors import DimensionMismatchError
from heisenlab.group import (
    GroupPoint,
    dilate,
    group_inverse,
    group_multiply,
    homogeneous_dimension,
    koranyi_distance,
    koranyi_norm,
)

coord = st.floats(-5, 5, allow_nan=False)


@st.composite
def points(draw, n=1):
    x = [draw(coord) for _ in range(n)]
    y = [draw(coord) for _ in range(n)]
    return GroupPoint(x, y, draw(coord))


def test_product_formula():
    a = GroupPoint([1.0], [2.0], 3.0)
    b = GroupPoint([-0.5], [4.0], 1.0)
    c = group_multiply(a, b)
    # tau + tau' + 2(x y' - x' y) = 4 + 2(4 + 1) = 14
    assert c.allclose(GroupPoint([0.5], [6.0], 14.0))


def test_homogeneous_dimension():
    assert [homogeneous_dimension(n) for n in (1, 2, 3)] == [4, 6, 8]
    assert GroupPoint.identity(2).n == 2


@given(points(), points(), points())
def test_associative(a, b, c):
    lhs = group_multiply(group_multiply(a, b), c)
    rhs = group_multiply(a, group_multiply(b, c))
    assert lhs.allclose(rhs, atol=1e-9)


@given(points())
def test_inverse_and_identity(a):
    e = GroupPoint.identity(1)
    assert group_multiply(a, group_inverse(a)).allclose(e, atol=1e-12)
    assert group_multiply(group_inverse(a), a).allclose(e, atol=1e-12)
    assert group_multiply(a, e).allclose(a)


@given(points(), points(), st.floats(0.1, 10))
def test_dilation_is_automorphism(a, b, lam):
    lhs = dilate(group_multiply(a, b), lam)
    rhs = group_multiply(dilate(a, lam), dilate(b, lam))
    assert lhs.allclose(rhs, atol=1e-8 * max(1.0, lam**2))


@given(points(), st.floats(0.1, 10))
def test_norm_homogeneous_and_symmetric(a, lam):
    assert koranyi_norm(dilate(a, lam)) == pytest.approx(lam * koranyi_norm(a), rel=1e-12, abs=1e-300)
    assert koranyi_norm(group_inverse(a)) == pytest.approx(koranyi_norm(a), rel=1e-15)


@given(points(), points())
def test_norm_triangle_inequality(a, b):
    # the gauge (|z|^4 + tau^2)^(1/4) is a norm for this group law
    assert koranyi_norm(group_multiply(a, b)) <= koranyi_norm(a) + koranyi_norm(b) + 1e-9


@given(points(), points(), points())
def test_distance_left_invariant(a, b, g):
    d = koranyi_distance(a, b)
    assert koranyi_distance(group_multiply(g, a), group_multiply(g, b)) == pytest.approx(d, rel=1e-8, abs=1e-8)


def test_norm_value():
    assert koranyi_norm(GroupPoint([1.0], [1.0], 0.0)) == pytest.approx(2**0.5)
    assert koranyi_norm(GroupPoint([0.0], [0.0], 16.0)) == pytest.approx(4.0)


def test_errors():
    with pytest.raises(DimensionMismatchError):
        GroupPoint([1.0, 2.0], [1.0], 0.0)
    with pytest.raises(DimensionMismatchError):
        group_multiply(GroupPoint.identity(1), GroupPoint.identity(2))
    with pytest.raises(DimensionMismatchError):
        GroupPoint.from_array([1.0, 2.0])
    with pytest.raises(ValueError):
        dilate(GroupPoint.identity(1), 0.0)


def test_array_round_trip():
    a = GroupPoint([1.0, 2.0], [3.0, 4.0], 5.0)
    assert GroupPoint.from_array(a.as_array()).allclose(a)
    assert np.array_equal(a.as_array(), [1, 2, 3, 4, 5])
