import numpy as np
import pytest

from knotlinks.curves import Component, make_borromean, make_chain, make_circle, make_tight_hopf, make_torus_link
from knotlinks.errors import GeometricDegeneracyError
from knotlinks.linking import gauss_linking, linking_matrix
from oracles import crossing_linking_number, gauss_quadrature, random_rotation


def test_hopf(backend):
    res = gauss_linking(*make_tight_hopf(1.0).components, backend=backend)
    assert abs(res.rounded) == 1
    assert res.residual < 1e-9


def test_split_circles(backend):
    a = make_circle((0, 0, 0), (0, 0, 1), 1.0, 128)
    b = make_circle((0, 0, 10), (0, 0, 1), 1.0, 128)
    res = gauss_linking(a, b, backend=backend)
    assert res.rounded == 0 and res.residual < 1e-9


def test_borromean_pairs_unlinked(backend):
    b = make_borromean(2, 1)
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        res = gauss_linking(b.components[i], b.components[j], backend=backend)
        assert res.rounded == 0 and res.residual < 1e-9


def test_torus_link_2_4_against_crossings(rng, backend):
    t = make_torus_link(2, 4, n_vertices=256)
    p, q = (c.vertices for c in t.components)
    expected = crossing_linking_number(p, q, random_rotation(rng))
    assert abs(expected) == 2
    res = gauss_linking(*t.components, backend=backend)
    assert res.rounded == expected and res.residual < 1e-9


def test_ampere_sign():
    # counter-clockwise loop around a +z current: +1
    L = 50.0
    rect = np.array([[0, 0, -L], [0, 0, L], [L, 0, L], [L, 0, -L]])
    wire = np.array([a + s * (b - a) for a, b in zip(rect, np.roll(rect, -1, 0))
                     for s in np.linspace(0, 1, 50, endpoint=False)])
    loop = make_circle((0, 0, 0), (0, 0, 1), 1.0, 128)
    assert gauss_linking(loop, Component(wire)).rounded == 1


def test_matches_quadrature_on_random_polygons(rng):
    for _ in range(5):
        p = rng.normal(size=(7, 3))
        q = rng.normal(size=(6, 3)) + rng.normal(size=3) * 0.5
        try:
            res = gauss_linking(Component(p), Component(q))
        except GeometricDegeneracyError:
            continue
        ref = gauss_quadrature(p, q, sub=64)
        # midpoint rule is only approximate near close approaches
        assert res.raw_value == pytest.approx(ref, abs=2e-2)


def test_antisymmetry_and_symmetry(rng, backend):
    for link in (make_tight_hopf(1.0, 128), make_torus_link(2, 4, n_vertices=128)):
        c1, c2 = link.components[:2]
        raw = gauss_linking(c1, c2, backend=backend).raw_value
        assert gauss_linking(c1, c2.reversed(), backend=backend).raw_value == pytest.approx(-raw, abs=1e-12)
        assert gauss_linking(c1.reversed(), c2, backend=backend).raw_value == pytest.approx(-raw, abs=1e-12)
        assert gauss_linking(c2, c1, backend=backend).raw_value == pytest.approx(raw, abs=1e-12)


def test_rigid_motion_invariance(rng):
    link = make_torus_link(2, 4, n_vertices=128)
    raw = gauss_linking(*link.components).raw_value
    for _ in range(3):
        moved = link.transformed(random_rotation(rng), rng.normal(size=3) * 5)
        assert abs(gauss_linking(*moved.components).raw_value - raw) < 1e-10


def test_generator_outputs_are_near_integers():
    for link in (make_chain(4, 1.0, 128), make_borromean(3, 1, 128), make_torus_link(3, 6, n_vertices=200)):
        n = len(link.components)
        for i in range(n):
            for j in range(i + 1, n):
                assert gauss_linking(link.components[i], link.components[j]).residual < 1e-9


def test_chain_linking_matrix():
    m = linking_matrix(make_chain(4, 1.0, 128))
    np.testing.assert_array_equal(np.abs(m), [[0, 1, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 1, 0]])


def test_touching_curves_raise():
    a = make_circle((0, 0, 0), (0, 0, 1), 1.0, 64)
    b = make_circle((2, 0, 0), (0, 1, 0), 1.0, 64)  # passes through (1, 0, 0)
    with pytest.raises(GeometricDegeneracyError, match="segment"):
        gauss_linking(a, b)
