import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.integrate import quad

from hypspec import hyperbolic as hb
from hypspec.errors import ConfigError, DegenerateTransformError
from hypspec.hyperbolic import MoebiusTransform, Point

coord = st.floats(-5, 5)
height = st.floats(0.05, 5)
points = st.builds(Point, coord, height)


def _from_parts(x, lam, th):
    # translation * dilation * rotation covers PSL(2,R)
    t = np.array([[1.0, x], [0.0, 1.0]])
    d = np.diag([math.exp(lam / 2), math.exp(-lam / 2)])
    k = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    return MoebiusTransform.from_array(t @ d @ k)


transforms = st.builds(_from_parts, st.floats(-3, 3), st.floats(-3, 3), st.floats(0, math.pi))


@st.composite
def hyperbolic_elements(draw):
    g = draw(transforms).as_array()
    ell = draw(st.floats(0.1, 4))
    d = np.diag([math.exp(ell / 2), math.exp(-ell / 2)])
    return MoebiusTransform.from_array(g @ d @ np.linalg.inv(g))


def test_point_rejects_lower_half_plane():
    with pytest.raises(ConfigError):
        Point(0.0, 0.0)
    with pytest.raises(ConfigError):
        Point(float("nan"), 1.0)


def test_apply_examples():
    z = Point(0.0, 1.0)
    assert hb.apply(MoebiusTransform.identity(), z) == z
    dil = MoebiusTransform.from_entries(math.sqrt(2), 0, 0, 1 / math.sqrt(2))
    w = hb.apply(dil, z)
    assert w.x == pytest.approx(0.0, abs=1e-15) and w.y == pytest.approx(2.0)
    inv = MoebiusTransform.from_entries(0, -1, 1, 0)
    w = hb.apply(inv, Point(0.0, 2.0))
    assert w.x == pytest.approx(0.0, abs=1e-15) and w.y == pytest.approx(0.5)


def test_from_entries_normalises_and_rejects():
    m = MoebiusTransform.from_entries(-2, 0, 0, -2)
    assert (m.a, m.d) == (1.0, 1.0)
    with pytest.raises(DegenerateTransformError):
        MoebiusTransform.from_entries(1, 2, 2, 4)
    with pytest.raises(DegenerateTransformError):
        MoebiusTransform.from_entries(float("inf"), 0, 0, 1)


def test_distance_examples():
    z = Point(0.0, 1.0)
    assert hb.distance(z, z) == 0.0
    assert hb.distance(z, Point(0.0, 2.0)) == pytest.approx(math.log(2), rel=1e-14)
    assert hb.distance(z, Point(1.0, 1.0)) == pytest.approx(math.acosh(1.5), rel=1e-13)


def test_distance_matches_geodesic_length_integral():
    # geodesic from i to 1+i is the arc of the circle |z - 1/2| = sqrt(5)/2;
    # integrate ds = |dz|/y along it
    R = math.sqrt(5) / 2
    th0 = math.atan2(1.0, -0.5)
    th1 = math.atan2(1.0, 0.5)
    length, _ = quad(lambda th: R / (R * math.sin(th)), th1, th0, epsabs=1e-13, epsrel=1e-13)
    assert hb.distance(Point(0, 1), Point(1, 1)) == pytest.approx(length, rel=1e-11)


def test_distance_nearby_points_no_cancellation():
    z = Point(0.3, 1.7)
    w = Point(0.3 + 1e-9, 1.7)
    assert hb.distance(z, w) == pytest.approx(1e-9 / 1.7, rel=1e-6)


def test_compose_inverse_examples():
    m = MoebiusTransform.from_entries(1, 2, 0.5, 2)
    assert hb.compose(MoebiusTransform.identity(), m).isclose(m)
    dil = MoebiusTransform.from_entries(math.sqrt(2), 0, 0, 1 / math.sqrt(2))
    half = MoebiusTransform.from_entries(1 / math.sqrt(2), 0, 0, math.sqrt(2))
    assert hb.inverse(dil).isclose(half)
    assert hb.compose(m, hb.inverse(m)).isclose(MoebiusTransform.identity())


def test_classify_examples():
    assert hb.classify(MoebiusTransform.identity()).kind == "identity"
    dil4 = MoebiusTransform.from_entries(2, 0, 0, 0.5)
    c = hb.classify(dil4)
    assert c.kind == "hyperbolic"
    assert c.translation_length == pytest.approx(math.log(4), rel=1e-14)
    assert c.translation_length == pytest.approx(2 * math.acosh(1.25), rel=1e-14)
    assert hb.classify(MoebiusTransform.from_entries(1, 1, 0, 1)).kind == "parabolic"
    rot = MoebiusTransform.from_entries(math.cos(0.3), -math.sin(0.3), math.sin(0.3), math.cos(0.3))
    assert hb.classify(rot).kind == "elliptic"


def test_hyperbolic_root_inverts_power():
    m = MoebiusTransform.from_entries(2, 1, 1, 1)
    for k in (2, 3, 5):
        r = hb.hyperbolic_root(hb.power(m, k), k)
        assert r.isclose(m, 1e-9)


@given(transforms, points, points)
def test_isometry(m, z, w):
    try:
        mz, mw = hb.apply(m, z), hb.apply(m, w)
    except DegenerateTransformError:
        assume(False)
    assert abs(hb.distance(mz, mw) - hb.distance(z, w)) <= 1e-9 * max(1.0, hb.distance(z, w))


@given(points, points, points)
def test_symmetry_and_triangle(z, w, u):
    assert hb.distance(z, w) == hb.distance(w, z)
    assert hb.distance(z, u) <= hb.distance(z, w) + hb.distance(w, u) + 1e-12


@given(hyperbolic_elements(), points)
def test_displacement_at_least_translation_length(m, z):
    ell = hb.translation_length(m)
    assert hb.distance(z, hb.apply(m, z)) >= ell - 1e-9


def test_displacement_on_axis_equals_translation_length():
    m = MoebiusTransform.from_entries(3, 0, 0, 1 / 3)
    z = Point(0.0, 0.7)
    assert hb.distance(z, hb.apply(m, z)) == pytest.approx(hb.translation_length(m), rel=1e-12)


@given(hyperbolic_elements(), points, st.integers(1, 6))
def test_displacement_monotone_in_power(m, z, n):
    try:
        far = hb.apply(hb.power(m, n), z)
    except DegenerateTransformError:
        assume(False)
    assert hb.distance(z, far) >= hb.distance(z, hb.apply(m, z)) - 1e-9


@given(transforms, transforms)
def test_compose_keeps_det_one(m1, m2):
    m = hb.compose(m1, m2)
    assert abs(m.a * m.d - m.b * m.c - 1.0) <= 1e-10


@given(transforms)
def test_canonical_sign(m):
    first = next(v for v in (m.a, m.b, m.c, m.d) if v != 0.0)
    assert first > 0
    arr = -m.as_array()[None]
    assert np.array_equal(hb.canonical_sign(arr)[0], m.as_array())
