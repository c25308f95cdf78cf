import numpy as np
import pytest
from hypothesis import given, strategies as st

from pxlaplace.energy import (
    EnergyModel,
    Problem,
    derivative_pairing,
    energy,
    energy_gradient,
    lambda_value_and_pairing,
    weak_residual,
)
from pxlaplace.fields import ExponentProfile, WeightProfile
from pxlaplace.fieldspec import parse
from pxlaplace.mesh import GridFunction, build_mesh
from pxlaplace.sampling import random_samples

M1 = build_mesh([(0, 1)], 129)
M2 = build_mesh([(0, 1), (0, 1)], 17)


def _problem(mesh, p="1.8 + x/3", q="1.4 + x/5", w="1 + x", w0="exp(-x)"):
    return Problem.from_exprs(mesh, p, q, w, w0)


def _samples(mesh, seed, count):
    return [s.evaluate(mesh) for s in random_samples(seed, count, mesh.d)]


def test_energy_at_zero():
    pr = _problem(M1)
    e = energy(GridFunction.zeros(M1), pr.p, pr.q, pr.w, pr.w0)
    assert (e.lambda_part, e.q_part, e.total) == (0.0, 0.0, 0.0)


def test_energy_of_hat_quadratic_case():
    m = build_mesh([(0, 1)], 257)
    pr = Problem.from_exprs(m, "2", "2")
    hat = GridFunction.from_expr(m, parse("1 - abs(2*x - 1)"), trace_zero=True)
    e = EnergyModel(pr).energy(hat)
    h = 1 / 256
    assert e.lambda_part == pytest.approx(2.0, rel=1e-13)      # slope 2 everywhere
    assert e.q_part == pytest.approx(1 / 6, abs=h ** 2)          # trapezoid error O(h^2)
    assert e.total == e.lambda_part - e.q_part


def test_energy_grows_in_coercive_regime():
    pr = Problem.from_exprs(M1, "2", "1.5")
    model = EnergyModel(pr)
    f = _samples(M1, 1, 1)[0]
    vals = [model.value(f.values * 2.0 ** k) for k in range(0, 40)]
    assert vals[-1] > 1e6
    assert all(b > a for a, b in zip(vals[10:], vals[11:]))


def test_pairing_identities():
    pr = _problem(M1)
    model = EnergyModel(pr)
    f = _samples(M1, 2, 1)[0]
    assert derivative_pairing(GridFunction.zeros(M1), f, pr.p, pr.q, pr.w, pr.w0) == 0.0
    own = model.pairing(f, f)
    assert own == pytest.approx(model.grad_modular(f) - model.mass_modular(f), rel=1e-12)


@pytest.mark.parametrize("mesh", [M1, M2], ids=["1d", "2d"])
def test_pairing_matches_central_differences(mesh):
    model = EnergyModel(_problem(mesh))
    fs = _samples(mesh, 3, 10)
    gs = _samples(mesh, 4, 10)
    for f, g in zip(fs, gs):
        scale = max(1.0, np.abs(f.values).max()) / max(1.0, np.abs(g.values).max())
        eps = 1e-6 * scale
        fd = (model.value(f.values + eps * g.values) - model.value(f.values - eps * g.values))
        fd /= 2 * eps
        assert model.pairing(f, g) == pytest.approx(fd, rel=1e-5)


def test_gradient_representer_consistency():
    pr = _problem(M2)
    f = _samples(M2, 5, 1)[0]
    grad = energy_gradient(f, pr.p, pr.q, pr.w, pr.w0)
    assert grad.trace_zero
    for g in _samples(M2, 6, 20):
        lhs = float(np.dot(M2.weights, grad.values * g.values))
        rhs = derivative_pairing(f, g, pr.p, pr.q, pr.w, pr.w0)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-14)


def test_gradient_at_zero_vanishes():
    pr = _problem(M1)
    assert not energy_gradient(GridFunction.zeros(M1), pr.p, pr.q, pr.w, pr.w0).values.any()


def test_quadratic_gradient_is_divergence_stencil_1d():
    m = build_mesh([(0, 1)], 65)
    pr = Problem.from_exprs(m, "2", "1.5", "1 + x^2", 0)
    f = _samples(m, 7, 1)[0].values
    w = pr.w.values
    h = m.h[0]
    wm = 0.5 * (w[1:] + w[:-1])                      # edge weights
    flux = wm * np.diff(f) / h
    stencil = np.zeros_like(f)
    stencil[1:-1] = -(flux[1:] - flux[:-1]) / h
    got = EnergyModel(pr).gradient(f)
    np.testing.assert_allclose(got, stencil, rtol=1e-10, atol=1e-10)


def test_quadratic_gradient_is_five_point_laplacian_2d():
    m = build_mesh([(0, 1), (0, 1)], 17)
    pr = Problem.from_exprs(m, "2", "1.5", "1", 0)
    f = _samples(m, 8, 1)[0].values
    u = f.reshape(m.shape)
    h = m.h[0]
    lap = np.zeros_like(u)
    lap[1:-1, 1:-1] = -(u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2]
                        - 4 * u[1:-1, 1:-1]) / h ** 2
    np.testing.assert_allclose(EnergyModel(pr).gradient(f), lap.ravel(), rtol=1e-9, atol=1e-9)


def test_residual_examples():
    pr = _problem(M1)
    zero = GridFunction.zeros(M1)
    assert weak_residual(zero, pr.p, pr.q, pr.w, pr.w0) == 0.0
    f = _samples(M1, 9, 1)[0]
    assert weak_residual(f, pr.p, pr.q, pr.w, pr.w0) > 0.0


def test_hessian_matches_gradient_differences():
    model = EnergyModel(_problem(M2, p="3 + x", q="1.5"))
    f = _samples(M2, 10, 1)[0].values
    v = _samples(M2, 11, 1)[0].values
    i = M2.interior
    eps = 1e-6
    fd = (model.euclidean_gradient(f + eps * v) - model.euclidean_gradient(f - eps * v)) / (2 * eps)
    hv = model.hessian(f) @ v[i]
    np.testing.assert_allclose(hv, fd[i], rtol=1e-5, atol=1e-7 * np.abs(fd).max())


def test_lambda_pair_at_zero():
    p = ExponentProfile.from_expr("1.8 + x/3", M1)
    w = WeightProfile.from_expr("1", M1)
    g = _samples(M1, 12, 1)[0]
    assert lambda_value_and_pairing(GridFunction.zeros(M1), g, p, w) == (0.0, 0.0)


@given(st.integers(0, 2**31), st.sampled_from(["1.8 + x/3", "1.3 + x", "2.5 - x*x"]))
def test_lambda_convex_and_monotone(seed, pe):
    p = ExponentProfile.from_expr(pe, M1)
    w = WeightProfile.from_expr("1 + x", M1)
    f, g = _samples(M1, seed, 2)
    lf, _ = lambda_value_and_pairing(f, g, p, w)
    lg, dg = lambda_value_and_pairing(g, f - g, p, w)
    assert dg <= lf - lg + 1e-12
    _, df = lambda_value_and_pairing(f, f - g, p, w)
    if not np.array_equal(f.values, g.values):
        assert df - dg > 0


def test_ray_decomposition_and_exact_bounds():
    for p, q in (("2", "1.5"), ("1.8 + x/3", "1.3 + x/10")):
        model = EnergyModel(_problem(M1, p=p, q=q))
        for g in _samples(M1, 13, 5):
            for t in (0.0, 0.01, 0.5, 1.0, 3.0, 1e3):
                assert model.ray_energy(g, t) == pytest.approx(model.value(t * g.values),
                                                               rel=1e-12, abs=1e-300)
                assert model.coercivity_lower_bound(g, t) <= model.ray_energy(g, t)


def test_mp_ray_bound_exact_and_literal_form_fails():
    model = EnergyModel(Problem.from_exprs(M1, "2", "4"))
    g = _samples(M1, 14, 1)[0]
    for t in 2.0 ** np.arange(0, 30):
        assert model.ray_energy(g, t) <= model.ray_upper_bound(g, t)
    # with rho_q(g) > 2/3 rho_p(grad g) the bound without 1/p, 1/q factors breaks at t = 1
    big = g.values * 100
    assert model.mass_modular(big) > 2 / 3 * model.grad_modular(big)
    assert model.value(big) > model.literal_ray_bound(big, 1.0)
