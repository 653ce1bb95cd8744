import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seqcvx.errors import InputError
from seqcvx.sets import (
    Ball,
    Box,
    EpiAbsProduct,
    FullSpace,
    Halfspaces,
    Intersection,
    Product,
    dykstra,
    project_epigraph_abs,
)

finite = st.floats(-50, 50, allow_nan=False)


def test_epigraph_projection_examples():
    assert project_epigraph_abs(1.0, 2.0) == (1.0, 2.0)
    assert project_epigraph_abs(0.0, -5.0) == (0.0, 0.0)
    # Dense grid search of the squared distance over the cone gives (2, 2).
    assert project_epigraph_abs(3.0, 1.0) == pytest.approx((2.0, 2.0), abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(finite, finite, finite, finite)
def test_epigraph_projection_is_nearest(a, b, x, y):
    px, py = project_epigraph_abs(a, b)
    assert py >= abs(px) - 1e-12
    if y >= abs(x):
        assert (px - a) ** 2 + (py - b) ** 2 <= (x - a) ** 2 + (y - b) ** 2 + 1e-9


def test_epigraph_product_separates_per_pair():
    rng = np.random.default_rng(0)
    S = EpiAbsProduct(4)
    for _ in range(50):
        z = 3 * rng.standard_normal(8)
        joint = S.project(z)
        for j in range(4):
            assert tuple(joint[[j, 4 + j]]) == pytest.approx(project_epigraph_abs(z[j], z[4 + j]))


def test_epigraph_product_with_box_omega():
    S = EpiAbsProduct(2, Box([-0.5, -0.5], [0.5, 0.5]))
    z = np.array([2.0, -3.0, 0.0, 0.0])
    p = S.project(z)
    assert S.membership(p, 1e-9)
    # Per pair, the nearest y for a given x is max(|x|, b); scan x on a grid.
    g = np.linspace(-0.5, 0.5, 100001)
    for j in range(2):
        a, b = z[j], z[2 + j]
        d = (g - a) ** 2 + (np.maximum(np.abs(g), b) - b) ** 2
        assert (p[j] - a) ** 2 + (p[2 + j] - b) ** 2 == pytest.approx(d.min(), abs=1e-8)


@pytest.mark.parametrize(
    "S",
    [
        Box([-1.0, 0.0], [1.0, 2.0]),
        Ball([1.0, -1.0], 2.0),
        Halfspaces([[1.0, 1.0], [-1.0, 2.0]], [1.0, 0.5]),
        Product([Box([0.0], [1.0]), Ball([0.0], 1.0)]),
        Intersection([Box([-1.0, -1.0], [1.0, 1.0]), Ball([1.0, 1.0], 1.0)]),
        EpiAbsProduct(1),
        FullSpace(2),
    ],
)
def test_projection_properties(S):
    rng = np.random.default_rng(1)
    for _ in range(100):
        z1, z2 = 4 * rng.standard_normal((2, 2))
        p1, p2 = S.project(z1), S.project(z2)
        assert S.membership(p1, 1e-9)
        assert np.allclose(S.project(p1), p1, atol=1e-9)
        assert np.linalg.norm(p1 - p2) <= np.linalg.norm(z1 - z2) + 1e-9
        # Nearest-point check against another member of the set.
        assert np.linalg.norm(p1 - z1) <= np.linalg.norm(p2 - z1) + 1e-9


def test_batch_membership_matches_pointwise():
    rng = np.random.default_rng(2)
    pts = 2 * rng.standard_normal((200, 2))
    for S in (Box([-1, -1], [1, 1]), Ball([0, 0], 1.0), Halfspaces([[1, 1]], [0.5])):
        assert np.array_equal(S.membership_batch(pts, 1e-9), [S.membership(p, 1e-9) for p in pts])


def test_dykstra_matches_closed_form():
    box = Box([0.0, 0.0], [1.0, 1.0])
    half = Halfspaces([[1.0, 1.0]], [1.0])
    z = np.array([2.0, 2.0])
    p = dykstra([box.project, half.project], z)
    assert p == pytest.approx([0.5, 0.5], abs=1e-10)


def test_dykstra_does_not_stop_while_increments_move():
    # The iterate repeats (0.5, 0.5) for a sweep although the answer is the corner (1, 0).
    X = Intersection([Box([-1.0, -1.0], [1.0, 1.0]), Halfspaces([[1.0, 1.0]], [1.0])])
    assert X.project(np.array([6.58935627, 3.66995193])) == pytest.approx([1.0, 0.0], abs=1e-9)


def test_set_validation():
    with pytest.raises(InputError):
        Box([1.0], [0.0])
    with pytest.raises(InputError):
        Ball([0.0], -1.0)
    with pytest.raises(InputError):
        EpiAbsProduct(2, Box([0.0], [1.0]))
    with pytest.raises(InputError):
        Intersection([Box([0.0], [1.0]), Ball([0.0, 0.0], 1.0)])
