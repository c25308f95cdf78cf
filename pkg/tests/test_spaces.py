import math
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from pxlaplace.fields import ExponentProfile, WeightProfile
from pxlaplace.fieldspec import parse
from pxlaplace.mesh import GridFunction, build_mesh
from pxlaplace.sampling import SampleSpec, random_sample
from pxlaplace.spaces import (
    NORM_TOL,
    StandingAssumptionWarning,
    classical_norm,
    equivalent_norm,
    floor_modular_pair,
    floor_norm_pair,
    holder_pairing,
    luxemburg_norm,
    modular,
    sobolev_norm,
    standing_order_violation,
)

FINE = build_mesh([(0, 1)], 2049)
X = FINE.coords[0]
M65 = build_mesh([(0, 1)], 65)


def _oracle_norm(f, p, w, mesh):
    """Independent root of rho(f/lam) = 1 with scipy's brentq."""
    a = np.abs(f)

    def g(log_lam):
        return float(np.sum(mesh.weights * w * (a / math.exp(log_lam)) ** p)) - 1.0

    return math.exp(brentq(g, -60, 60, xtol=1e-15, rtol=1e-15))


def test_modular_examples():
    assert modular(np.ones(FINE.size), np.full(FINE.size, 2.0), mesh=FINE) == pytest.approx(1.0)
    assert modular(np.full(FINE.size, 2.0), 1 + X, mesh=FINE) == pytest.approx(
        2 / math.log(2), abs=1e-6)
    assert modular(np.zeros(FINE.size), 1 + X, mesh=FINE) == 0.0


def test_norm_of_constant_is_constant():
    for p in ("2", "1.3 + x", "4 - 2*x"):
        prof = ExponentProfile.from_expr(p, M65)
        assert luxemburg_norm(np.full(M65.size, 3.0), prof).value == pytest.approx(3.0, rel=1e-9)


def test_norm_of_x_in_l2():
    p = ExponentProfile.from_expr("2", FINE)
    assert luxemburg_norm(X, p).value == pytest.approx(1 / math.sqrt(3), rel=1e-6)


def test_norm_of_x_with_exponent_one_plus_x():
    # quadrature oracle on 1e5 points, independent of the mesh
    xs = np.linspace(0, 1, 100_001)

    def g(lam):
        return np.trapezoid((xs / lam) ** (1 + xs), xs) - 1.0

    oracle = brentq(g, 0.1, 5.0, xtol=1e-14)
    value = luxemburg_norm(X, 1 + X, mesh=FINE).value
    assert oracle == pytest.approx(0.586, abs=0.005)
    assert value == pytest.approx(oracle, rel=1e-6)


def test_zero_function_has_zero_norm():
    r = luxemburg_norm(np.zeros(M65.size), ExponentProfile.from_expr("2", M65))
    assert r.value == 0.0 and r.modular_at_value == 0.0


_pexpr = st.sampled_from(["1.5 + x/2", "2 + sin(3*x)", "3 - x^2", "1.2 + x*x*4"])
_wexpr = st.sampled_from(["1", "1 + x", "exp(-x)", "0.3 + x^2"])


@given(st.integers(0, 2**31), _pexpr, _wexpr, st.floats(-4, 4))
def test_norm_matches_independent_root(seed, pe, we, logscale):
    spec = random_sample(np.random.default_rng(seed), 1).scaled(10.0 ** logscale)
    f = spec.evaluate(M65).values
    if not f.any():
        return
    p, w = ExponentProfile.from_expr(pe, M65), WeightProfile.from_expr(we, M65)
    r = luxemburg_norm(f, p, w)
    assert abs(r.modular_at_value - 1.0) <= NORM_TOL
    assert r.value == pytest.approx(_oracle_norm(f, p.values, w.values, M65), rel=1e-9)


@given(st.integers(0, 2**31), _pexpr, _wexpr, st.floats(-4, 4))
def test_sandwich_property(seed, pe, we, logscale):
    spec = random_sample(np.random.default_rng(seed), 1).scaled(10.0 ** logscale)
    f = spec.evaluate(M65).values
    if not f.any():
        return
    p, w = ExponentProfile.from_expr(pe, M65), WeightProfile.from_expr(we, M65)
    rho, nrm = modular(f, p, w), luxemburg_norm(f, p, w).value
    slack = 1 + 1e-8
    if nrm <= 1:
        assert nrm ** p.upper <= rho * slack and rho <= nrm ** p.lower * slack
    else:
        assert nrm ** p.lower <= rho * slack and rho <= nrm ** p.upper * slack
    lo = min(rho ** (1 / p.lower), rho ** (1 / p.upper))
    hi = max(rho ** (1 / p.lower), rho ** (1 / p.upper))
    assert lo <= nrm * slack and nrm <= hi * slack


def test_sandwich_tight_at_unit_modular():
    p = ExponentProfile.from_expr("1.5 + x/2", M65)
    f = np.full(M65.size, 1.0)
    assert modular(f, p) == pytest.approx(1.0)
    assert luxemburg_norm(f, p).value == pytest.approx(1.0, rel=1e-10)


@given(st.integers(0, 2**31), st.floats(1.1, 6))
def test_constant_exponent_matches_classical(seed, p):
    f = random_sample(np.random.default_rng(seed), 1).evaluate(M65).values
    if not f.any():
        return
    prof = ExponentProfile.from_expr(repr(p), M65)
    assert luxemburg_norm(f, prof).value == pytest.approx(classical_norm(f, p, M65), rel=1e-10)


def _hat(mesh):
    return GridFunction.from_expr(mesh, parse("1 - abs(2*x - 1)"), trace_zero=True)


@pytest.mark.filterwarnings("ignore::pxlaplace.spaces.StandingAssumptionWarning")
def test_sobolev_norm_of_hat():
    m = build_mesh([(0, 1)], 1025)
    two = ExponentProfile.from_expr("2", m)
    one = WeightProfile.from_expr("1", m)
    value = sobolev_norm(_hat(m), two, two, one, one)
    assert value == pytest.approx(1 / math.sqrt(3) + 2.0, rel=2e-3)
    assert value >= equivalent_norm(_hat(m), two, one)
    assert sobolev_norm(GridFunction.zeros(m), two, two, one, one) == 0.0


def test_sobolev_norm_warns_outside_standing_order():
    q, p = ExponentProfile.from_expr("3", M65), ExponentProfile.from_expr("2", M65)
    with pytest.warns(StandingAssumptionWarning, match="1 < q- <= q\\+ < p-"):
        sobolev_norm(_hat(M65), q, p)


def test_standing_order_messages():
    q, p = ExponentProfile.from_expr("1.5", M65), ExponentProfile.from_expr("2", M65)
    assert standing_order_violation(q, p) is None
    assert "p+ < lambda" in standing_order_violation(q, p, lam=1.5)
    assert "q+" in standing_order_violation(p, q)


def test_equivalent_norm_examples():
    m = FINE
    f = GridFunction.from_expr(m, parse("x*(1-x)"), trace_zero=True)
    two = ExponentProfile.from_expr("2", m)
    assert equivalent_norm(f, two) == pytest.approx(1 / math.sqrt(3), rel=1e-6)
    assert equivalent_norm(GridFunction.zeros(m), two) == 0.0
    g = f * -3.7
    assert equivalent_norm(g, two) == pytest.approx(3.7 * equivalent_norm(f, two), rel=1e-8)
    with pytest.raises(ValueError):
        equivalent_norm(GridFunction(m, np.ones(m.size)), two)


def test_holder_examples():
    p = ExponentProfile.from_expr("2", M65)
    one = np.ones(M65.size)
    assert holder_pairing(one, np.zeros(M65.size), p) == (0.0, 0.0)
    lhs, rhs = holder_pairing(one, one, p)
    assert lhs == pytest.approx(1.0) and rhs == pytest.approx(2.0)


@given(st.integers(0, 2**31), _pexpr, _wexpr)
def test_holder_property(seed, pe, we):
    rng = np.random.default_rng(seed)
    f = random_sample(rng, 1).evaluate(M65).values
    g = random_sample(rng, 1).evaluate(M65).values
    p, w = ExponentProfile.from_expr(pe, M65), WeightProfile.from_expr(we, M65)
    lhs, rhs = holder_pairing(f, g, p, w)
    assert lhs <= rhs


def test_floor_embedding_examples():
    p = ExponentProfile.from_expr("1.5 + x/2", M65)
    f = _hat(M65)
    a, b = floor_modular_pair(f, p, WeightProfile.from_expr("1", M65), 1.0)
    assert a == b
    w = WeightProfile.from_expr("1 + x", M65)
    a, b = floor_modular_pair(f, p, w, 1.0)
    assert a <= b
    na, nb = floor_norm_pair(f, p, w, 1.0)
    assert na <= nb


@given(st.integers(0, 2**31), _pexpr, _wexpr, st.floats(-6, 6))
def test_floor_modular_exact(seed, pe, we, logscale):
    f = random_sample(np.random.default_rng(seed), 1).scaled(10.0 ** logscale).evaluate(M65)
    p, w = ExponentProfile.from_expr(pe, M65), WeightProfile.from_expr(we, M65)
    a, b = floor_modular_pair(f, p, w, w.floor)
    assert a <= b


def test_sample_spec_zero_trace():
    spec = SampleSpec((((2,), 1.0),), (0.3,), 0.1, 0.5)
    f = spec.evaluate(M65)
    assert f.trace_zero and f.values[0] == 0.0 and f.values[-1] == 0.0
