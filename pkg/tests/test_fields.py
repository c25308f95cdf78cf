import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pxlaplace.fields import (
    ExponentClassError,
    ExponentProfile,
    WeightClassError,
    WeightProfile,
    ball_bounds,
    check_embedding_hypotheses,
    check_jump_condition,
    check_log_holder,
    check_sobolev_embedding,
    check_weight_class,
    conjugate_exponent,
    dual_weight,
    exponent_bounds,
    integrability,
    jump_radius,
    sobolev_conjugate,
    weight_dominance,
)
from pxlaplace.mesh import build_mesh

I101 = build_mesh([(0, 1)], 101)
SQ = build_mesh([(0, 1), (0, 1)], 21)


def test_bounds_constant():
    assert exponent_bounds("2", I101) == (2.0, 2.0)
    p = ExponentProfile.from_expr("2", SQ)
    assert p.is_constant and (p.lower, p.upper) == (2.0, 2.0)


def test_bounds_reject_exponent_touching_one():
    with pytest.raises(ExponentClassError):
        exponent_bounds("1 + x", I101)
    with pytest.raises(ExponentClassError):
        ExponentProfile.from_expr("x", I101)


def test_bounds_are_nodal_extremes():
    p = ExponentProfile.from_expr("1.2 + x*(1-x)", I101)
    assert p.lower == pytest.approx(1.2) and p.upper == pytest.approx(1.45)
    assert np.all((p.lower <= p.values) & (p.values <= p.upper))


def test_weight_must_be_positive():
    with pytest.raises(WeightClassError):
        WeightProfile.from_expr("x", I101)
    assert WeightProfile.from_expr("1 + x", I101).floor == 1.0


def test_conjugate_examples():
    np.testing.assert_allclose(conjugate_exponent(ExponentProfile.from_expr("2", I101)).values, 2)
    np.testing.assert_allclose(conjugate_exponent(ExponentProfile.from_expr("3", I101)).values,
                               1.5)
    p = ExponentProfile.from_expr("1.5 + x", I101)
    pc = conjugate_exponent(p)
    assert pc.values[-1] == pytest.approx(2.5 / 1.5)
    assert pc.expr(1.0) == pytest.approx(2.5 / 1.5)


def test_sobolev_conjugate_examples():
    assert np.all(sobolev_conjugate(np.full(4, 1.5), 2) == 6.0)
    assert np.all(np.isinf(sobolev_conjugate(np.full(4, 2.0), 1)))
    assert np.all(sobolev_conjugate(np.full(4, 2.0), 3) == 6.0)


def test_dual_weight_examples():
    p2 = ExponentProfile.from_expr("2", I101)
    np.testing.assert_allclose(dual_weight(WeightProfile.from_expr("1", I101), p2).values, 1)
    w = WeightProfile.from_expr("0.1 + x", I101)
    np.testing.assert_allclose(dual_weight(w, p2).values, 1 / (0.1 + I101.coords[0]))
    w4 = WeightProfile.from_expr("4", I101)
    np.testing.assert_allclose(dual_weight(w4, ExponentProfile.from_expr("3", I101)).values, 0.5)


_exponents = st.sampled_from(["1.5 + x/2", "2 + sin(3*x)", "3 - x^2", "1.1 + exp(x)"])
_weights = st.sampled_from(["1", "1 + x", "exp(-x)", "0.2 + x^2"])


@given(_exponents)
def test_conjugate_is_involution(expr):
    p = ExponentProfile.from_expr(expr, I101)
    np.testing.assert_allclose(conjugate_exponent(conjugate_exponent(p)).values, p.values,
                               rtol=1e-12)


@given(_exponents, _weights)
def test_dual_weight_involution(pe, we):
    p, w = ExponentProfile.from_expr(pe, I101), WeightProfile.from_expr(we, I101)
    back = dual_weight(dual_weight(w, p), conjugate_exponent(p))
    np.testing.assert_allclose(back.values, w.values, rtol=1e-12)


@given(st.lists(st.floats(1.01, 10), min_size=1, max_size=20), st.integers(1, 3))
def test_sobolev_conjugate_dominates(values, d):
    p = np.array(values)
    ps = sobolev_conjugate(p, d)
    fin = np.isfinite(ps)
    assert np.all(ps[fin] >= p[fin])
    assert np.all(np.isinf(ps[p >= d]))


def test_log_holder_constant_and_lipschitz():
    r = check_log_holder(ExponentProfile.from_expr("2", I101))
    assert r.passed and r.value == 0.0
    m = build_mesh([(0, 1)], 64)
    r = check_log_holder(ExponentProfile.from_expr("1.5 + x/2", m))
    assert r.passed and 0 < r.value < 1
    # sup of t*ln(1/t)/2 over t <= 1/2 is 1/(2e)
    assert r.value <= 1 / (2 * math.e) + 1e-12


def test_log_holder_step_grows_with_resolution():
    values = []
    for n in (64, 256):
        m = build_mesh([(0, 1)], n)
        x = m.coords[0]
        p = ExponentProfile(m, np.where(x > 0.5, 2.0, 1.5))
        values.append(check_log_holder(p).value)
    assert values[1] > values[0]
    assert not check_log_holder(p).passed


def test_jump_condition_constant_2d():
    p = ExponentProfile.from_expr("1.5", SQ)
    r = check_jump_condition(p, r=0.2)
    assert r.passed and r.witness["p_star_ball"] == pytest.approx(6.0)


def test_jump_condition_large_jump_fails():
    x, y = SQ.coords
    p = ExponentProfile(SQ, np.where(x > 0.5, 50.0, 1.1))
    r = check_jump_condition(p, r=0.2)
    assert not r.passed
    assert r.witness["p_minus_ball"] == pytest.approx(1.1)
    assert r.witness["p_plus_ball"] == 50.0
    assert r.witness["p_star_ball"] == pytest.approx(2 * 1.1 / 0.9)


def test_jump_radius_for_continuous_exponent():
    p = ExponentProfile.from_expr("1.5 + x*y", SQ)
    r = jump_radius(p)
    assert r is not None and check_jump_condition(p, r=r).passed


def test_ball_bounds_brute_force():
    m = build_mesh([(0, 1), (0, 1)], 9)
    p = ExponentProfile.from_expr("1.2 + x + y^2", m)
    lo, hi = ball_bounds(p, 0.3)
    pts = m.points
    for k in range(m.size):
        inside = np.sqrt(((pts - pts[k]) ** 2).sum(1)) <= 0.3 + 1e-12
        assert lo[k] == p.values[inside].min() and hi[k] == p.values[inside].max()


def test_weight_class_examples():
    assert check_weight_class("1", "2", I101).passed
    assert check_weight_class("1", "1.5 + x", I101).passed
    r = check_weight_class("x^0.5", "2", I101)
    assert r.passed and r.value == pytest.approx(2.0, rel=1e-2)
    assert not check_weight_class("x", "2", I101).passed


def test_integrability_verdicts():
    good = integrability(lambda c: c[0] ** -0.5, [(0, 1)])
    assert good["finite"] and good["extrapolated"] == pytest.approx(2.0, rel=5e-3)
    assert not integrability(lambda c: 1 / c[0], [(0, 1)])["finite"]
    assert not integrability(lambda c: np.exp(1e4 * c[0]), [(0, 1)])["finite"]


def test_hypothesis_three_floor():
    (r,) = check_embedding_hypotheses(I101, w0="0.5", w="1", q="2", p="3", floor=0.1)
    assert r.name == "hypothesis_III" and r.passed
    (r,) = check_embedding_hypotheses(I101, w0="0.5", w="1", q="2", p="3", floor=1.0)
    assert not r.passed


def test_embedding_hypotheses_desk_config():
    reps = check_embedding_hypotheses(I101, w0="1", w="1", q="2.5", p="3", w1="1", alpha="2",
                                      t="2", floor=1.0, r="2")
    assert [r.name for r in reps] == ["hypothesis_I", "hypothesis_II_w0", "hypothesis_II_w",
                                      "hypothesis_III", "target_exponent_range"]
    assert all(reps)
    bad = check_embedding_hypotheses(I101, w0="1", w="1", q="2.5", p="3", t="2.7")
    assert not any(bad)


def test_target_range_in_two_dimensions():
    # t* = 2t/(2-t) = 6 for t = 1.5; beta = 2 for alpha = 2, so r must stay below 3
    m = build_mesh([(0, 1), (0, 1)], 9)
    ok = check_embedding_hypotheses(m, w0="1", w="1", q="1.8", p="2.5", alpha="2", t="1.5",
                                    r="2.9")
    assert ok[-1].name == "target_exponent_range" and ok[-1].passed
    bad = check_embedding_hypotheses(m, w0="1", w="1", q="1.8", p="2.5", alpha="2", t="1.5",
                                     r="3.1")
    assert not bad[-1].passed


def test_sobolev_embedding_predicate():
    m = build_mesh([(0, 1), (0, 1)], 9)
    ok = check_sobolev_embedding(ExponentProfile.from_expr("1.5 + x/4", m),
                                 ExponentProfile.from_expr("2", m))
    assert all(ok)
    bad = check_sobolev_embedding(ExponentProfile.from_expr("1.5", m),
                                  ExponentProfile.from_expr("7", m))
    assert not all(bad)


def test_weight_dominance():
    w0, w = WeightProfile.from_expr("1", I101), WeightProfile.from_expr("2", I101)
    assert weight_dominance(w0, w) == 0.5


def test_report_json_shape():
    r = check_weight_class("x", "2", I101)
    d = r.to_dict()
    assert set(d) == {"name", "pass", "witness", "value"}
    json.dumps(d)
