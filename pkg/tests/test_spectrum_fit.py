import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knotlinks import spectrum_fit as sf
from knotlinks.errors import AssignmentError, InsufficientDataError, InvalidParameterError, SingularFitError


def test_exact_proportional():
    res = sf.fit_scale([(10, 5, 1), (20, 10, 1), (30, 15, 1)])
    assert res.lam == 0.5
    assert res.chi2 == 0.0
    assert res.dof == 2


def test_closed_form_value():
    res = sf.fit_scale([(10, 5.0, 1), (20, 10.1, 1), (30, 14.9, 1)])
    assert res.lam == pytest.approx(699 / 1400, rel=1e-15)
    resid = np.array([5.0, 10.1, 14.9]) - 699 / 1400 * np.array([10, 20, 30])
    assert res.chi2 == pytest.approx(np.sum(resid ** 2), rel=1e-12)


def test_sigma_doubling():
    rows = [(10, 5.0, 1), (20, 10.1, 2), (30, 14.9, 0.5)]
    a = sf.fit_scale(rows)
    b = sf.fit_scale([(L, E, 2 * s) for L, E, s in rows])
    assert b.lam == pytest.approx(a.lam, rel=1e-15)
    assert b.chi2 == pytest.approx(a.chi2 / 4, rel=1e-14)


def test_fit_scale_errors():
    with pytest.raises(InsufficientDataError):
        sf.fit_scale([(1, 1, 1)])
    with pytest.raises(InvalidParameterError):
        sf.fit_scale([(1, 1, 1), (2, 2, 0)])


def test_affine():
    L = np.array([1.0, 2.0, 4.0, 7.0])
    res = sf.fit_affine([(x, 2 + 3 * x, 1) for x in L])
    assert res.intercept == pytest.approx(2, abs=1e-12)
    assert res.lam == pytest.approx(3, rel=1e-14)
    assert res.chi2 == pytest.approx(0, abs=1e-20)
    assert res.dof == 2


def test_affine_on_proportional_data_matches_scale():
    rows = [(x, 0.7 * x, s) for x, s in [(3, 1), (5, 2), (11, 0.5), (12, 3)]]
    aff, prop = sf.fit_affine(rows), sf.fit_scale(rows)
    assert aff.intercept == pytest.approx(0, abs=1e-12)
    assert aff.lam == pytest.approx(prop.lam, rel=1e-13)


def test_affine_singular():
    with pytest.raises(SingularFitError):
        sf.fit_affine([(2, 1, 1), (2, 2, 1), (2, 3, 1)])
    with pytest.raises(InsufficientDataError):
        sf.fit_affine([(1, 1, 1), (2, 2, 1)])


def _tables():
    knots = [sf.KnotEntry("b", 20.0), sf.KnotEntry("a", 10.0), sf.KnotEntry("c", 30.0)]
    states = [sf.StateEntry("y", 1000.0, 10), sf.StateEntry("x", 500.0, 10)]
    return knots, states


def test_assign_ordered():
    knots, states = _tables()
    pairs = sf.assign(knots, states)
    assert [(s.name, k.name) for s, k in pairs] == [("x", "a"), ("y", "b")]
    single = sf.assign([sf.KnotEntry("k", 3.0)], [sf.StateEntry("s", 9.0)])
    assert [(s.name, k.name) for s, k in single] == [("s", "k")]


def test_assign_ordered_needs_enough_knots():
    knots, states = _tables()
    with pytest.raises(AssignmentError):
        sf.assign(knots[:1], states)


def test_assign_explicit():
    knots, states = _tables()
    pairs = sf.assign(knots, states, {"x": "c", "y": "a"})
    assert [(s.name, k.name) for s, k in pairs] == [("x", "c"), ("y", "a")]
    with pytest.raises(AssignmentError, match="3_1"):
        sf.assign(knots, states, {"x": "3_1", "y": "a"})
    with pytest.raises(AssignmentError, match="y"):
        sf.assign(knots, states, {"x": "a"})


def test_duplicate_names_rejected():
    with pytest.raises(InvalidParameterError):
        sf.assign([sf.KnotEntry("a", 1.0), sf.KnotEntry("a", 2.0)], [sf.StateEntry("s", 1.0)])


def test_sample_tables_end_to_end(tmp_path):
    kpath, spath = sf.sample_tables()
    knots, states = sf.read_knots(kpath), sf.read_states(spath)
    pairs = sf.assign(knots, states)
    res = sf.fit_assigned(pairs)
    assert np.isfinite(res.lam) and res.lam > 0
    lengths = [k.length for _, k in pairs]
    masses = [s.mass for s, _ in pairs]
    assert lengths == sorted(lengths) and masses == sorted(masses)
    out = tmp_path / "plot.csv"
    sf.write_plot_csv(out, res, pairs)
    rows = out.read_text().splitlines()
    assert rows[0] == "state,knot,L,E,fit" and len(rows) == len(pairs) + 1


def test_missing_sigma_defaults_to_one(tmp_path, caplog):
    p = tmp_path / "s.csv"
    p.write_text("name,mass_mev,sigma_mev\nA,100,\nB,200,5\n")
    states = sf.read_states(p)
    assert states[0].sigma == 1.0 and states[1].sigma == 5.0
    assert "no sigma" in caplog.text


weights = st.floats(0.1, 10)
rows = st.lists(st.tuples(st.floats(1, 100), st.floats(1, 5000), weights), min_size=2, max_size=12)


@settings(max_examples=100)
@given(rows)
def test_normal_equation(data):
    res = sf.fit_scale(data)
    L, E, s = np.array(data).T
    w = 1 / s ** 2
    lhs = np.sum(w * L * (E - res.lam * L))
    assert abs(lhs) <= 1e-10 * np.sum(w * L * E)
    assert res.chi2 >= 0


@settings(max_examples=100)
@given(rows, st.floats(0.01, 100), st.randoms())
def test_rescaling_and_permutation(data, scale, rnd):
    base = sf.fit_scale(data)
    scaled = sf.fit_scale([(L * scale, E, s) for L, E, s in data])
    assert scaled.lam == pytest.approx(base.lam / scale, rel=1e-12)
    assert scaled.chi2 == pytest.approx(base.chi2, rel=1e-9, abs=1e-9 * sum(E * E / s / s for _, E, s in data))
    shuffled = list(data)
    rnd.shuffle(shuffled)
    assert sf.fit_scale(shuffled).lam == pytest.approx(base.lam, rel=1e-13)
