"""Energy functional of the weighted p(x)-Laplace problem and its derivatives.

The gradient term is integrated exactly for the piecewise-linear
interpolant (one constant gradient per element, exponent and weight taken
as the vertex mean); the lower-order term uses the nodal trapezoid rule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fields import ExponentProfile, WeightProfile
from .mesh import GridFunction, Mesh

__all__ = [
    "EnergyBreakdown",
    "Problem",
    "EnergyModel",
    "energy",
    "derivative_pairing",
    "energy_gradient",
    "weak_residual",
    "lambda_value_and_pairing",
]


@dataclass(frozen=True)
class EnergyBreakdown:
    lambda_part: float
    q_part: float
    total: float

    @classmethod
    def of(cls, lambda_part: float, q_part: float) -> "EnergyBreakdown":
        return cls(lambda_part, q_part, lambda_part - q_part)

    def to_dict(self) -> dict:
        return {"lambda_part": self.lambda_part, "q_part": self.q_part, "total": self.total}


def _nodal(obj, size: int) -> np.ndarray:
    if isinstance(obj, (ExponentProfile, WeightProfile, GridFunction)):
        return obj.values
    arr = np.asarray(obj, dtype=float)
    return np.full(size, float(arr)) if arr.ndim == 0 else arr.reshape(-1)


@dataclass(eq=False)
class Problem:
    """Mesh and fields of one instance of the weighted Dirichlet problem.

    ``w0`` may be a nodal array of zeros to switch the lower-order term off.
    """

    mesh: Mesh
    p: ExponentProfile
    q: ExponentProfile
    w: WeightProfile
    w0: WeightProfile | np.ndarray

    @classmethod
    def from_exprs(cls, mesh: Mesh, p, q, w="1", w0="1") -> "Problem":
        w0_prof = (np.zeros(mesh.size) if isinstance(w0, (int, float)) and w0 == 0
                   else WeightProfile.from_expr(w0, mesh))
        return cls(mesh, ExponentProfile.from_expr(p, mesh), ExponentProfile.from_expr(q, mesh),
                   WeightProfile.from_expr(w, mesh), w0_prof)

    @property
    def coercive(self) -> bool:
        return self.q.upper < self.p.lower

    @property
    def superlinear(self) -> bool:
        return self.p.upper < self.q.lower


def _power_sign(v: np.ndarray, e: np.ndarray) -> np.ndarray:
    """``|v|^(e-2) v`` with the value 0 at v = 0."""
    out = np.zeros_like(v)
    nz = v != 0
    out[nz] = np.abs(v[nz]) ** (e[nz] - 2.0) * v[nz]
    return out


class EnergyModel:
    """Discrete energy ``J`` bound to one :class:`Problem`.

    Functions are passed as full nodal arrays or :class:`GridFunction` s;
    derivative outputs are full nodal arrays with zero boundary entries.
    """

    def __init__(self, problem: Problem):
        self.problem = problem
        mesh = self.mesh = problem.mesh
        op = self.op = mesh.p1
        n = mesh.size
        self.p_nodes = _nodal(problem.p, n)
        self.q_nodes = _nodal(problem.q, n)
        self.w0_nodes = _nodal(problem.w0, n)
        self.p_elem = op.average @ self.p_nodes
        self.w_elem = op.average @ _nodal(problem.w, n)
        self.elem_weight = op.area * self.w_elem
        self.node_weight = mesh.weights * self.w0_nodes
        self.p_minus, self.p_plus = problem.p.lower, problem.p.upper
        self.q_minus, self.q_plus = problem.q.lower, problem.q.upper
        self.interior = mesh.interior
        self._precond = None

    # -- elementary pieces -------------------------------------------------

    def _vals(self, f) -> np.ndarray:
        return f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)

    def slopes(self, f) -> np.ndarray:
        """Element gradients, shape (d, n_elements)."""
        return self.op.apply(self._vals(f))

    def grad_terms(self, f) -> np.ndarray:
        """Per-element ``area * w * |grad f|^p``."""
        g = self.slopes(f)
        s = np.sqrt((g ** 2).sum(0))
        with np.errstate(over="ignore"):
            return self.elem_weight * np.power(s, self.p_elem)

    def mass_terms(self, f) -> np.ndarray:
        """Per-node ``weight * w0 * |f|^q``."""
        with np.errstate(over="ignore"):
            return self.node_weight * np.power(np.abs(self._vals(f)), self.q_nodes)

    def grad_modular(self, f) -> float:
        return float(np.sum(self.grad_terms(f)))

    def mass_modular(self, f) -> float:
        return float(np.sum(self.mass_terms(f)))

    # -- functional and derivatives ---------------------------------------

    def energy(self, f) -> EnergyBreakdown:
        with np.errstate(over="ignore", invalid="ignore"):
            lam = float(np.sum(self.grad_terms(f) / self.p_elem))
            qp = float(np.sum(self.mass_terms(f) / self.q_nodes))
        return EnergyBreakdown.of(lam, qp)

    def value(self, f) -> float:
        return self.energy(f).total

    def flux(self, f) -> np.ndarray:
        """Per-element ``area * w * |grad f|^(p-2) grad f``, shape (d, E)."""
        g = self.slopes(f)
        s = np.sqrt((g ** 2).sum(0))
        factor = np.zeros_like(s)
        nz = s > 0
        factor[nz] = s[nz] ** (self.p_elem[nz] - 2.0)
        return g * (self.elem_weight * factor)

    def source(self, f) -> np.ndarray:
        """Per-node ``weight * w0 * |f|^(q-2) f``."""
        return self.node_weight * _power_sign(self._vals(f), self.q_nodes)

    def euclidean_gradient(self, f) -> np.ndarray:
        """Partial derivatives of J with respect to the nodal values (boundary zeroed)."""
        fl = self.flux(f)
        out = sum(gk.T @ fk for gk, fk in zip(self.op.grad, fl)) - self.source(f)
        out[self.mesh.boundary] = 0.0
        return out

    def gradient(self, f) -> np.ndarray:
        """Quadrature-weighted representer: ``sum_i weight_i G_i g_i = <J'(f), g>``."""
        return self.euclidean_gradient(f) / self.mesh.weights

    def pairing(self, f, g) -> float:
        """``<J'(f), g> = int w |grad f|^(p-2) grad f . grad g - w0 |f|^(q-2) f g``."""
        gg = self.slopes(g)
        lam = float(np.sum(self.flux(f) * gg))
        return lam - float(np.dot(self.source(f), self._vals(g)))

    def lambda_pairing(self, f, g) -> float:
        return float(np.sum(self.flux(f) * self.slopes(g)))

    def lambda_value(self, f) -> float:
        return float(np.sum(self.grad_terms(f) / self.p_elem))

    def residual(self, f) -> float:
        """Max over interior nodes of ``|<J'(f), e_i>| / weight_i``."""
        return float(np.max(np.abs(self.gradient(f)[self.interior]), initial=0.0))

    # -- second order and preconditioning ----------------------------------

    def hessian(self, f, eps: float = 1e-10) -> sp.csr_matrix:
        """Sparse Hessian of J on interior nodes, regularized where |grad f| or f vanish."""
        g = self.slopes(f)
        s = np.sqrt((g ** 2).sum(0))
        s_reg = np.maximum(s, eps * max(1.0, float(s.max(initial=0.0))))
        pe = self.p_elem
        base = self.elem_weight * s_reg ** (pe - 2.0)
        d = len(self.op.grad)
        unit = g / s_reg
        blocks = None
        for k in range(d):
            for m in range(d):
                coef = base * ((1.0 if k == m else 0.0) + (pe - 2.0) * unit[k] * unit[m])
                term = self.op.grad[k].T @ sp.diags(coef) @ self.op.grad[m]
                blocks = term if blocks is None else blocks + term
        fv = np.abs(self._vals(f))
        f_reg = np.maximum(fv, eps * max(1.0, float(fv.max(initial=0.0))))
        mass = self.node_weight * (self.q_nodes - 1.0) * f_reg ** (self.q_nodes - 2.0)
        h = (blocks - sp.diags(mass)).tocsr()
        i = self.interior
        return h[i][:, i].tocsc()

    def stiffness(self) -> sp.csc_matrix:
        """Weighted Laplace stiffness on interior nodes (the p = 2 gradient part)."""
        k = None
        for gk in self.op.grad:
            term = gk.T @ sp.diags(self.elem_weight) @ gk
            k = term if k is None else k + term
        i = self.interior
        return k.tocsr()[i][:, i].tocsc()

    def preconditioner(self):
        if self._precond is None:
            from scipy.sparse.linalg import splu

            self._precond = splu(self.stiffness())
        return self._precond

    # -- ray decomposition -------------------------------------------------

    def ray_energy(self, g, t: float) -> float:
        """``J(t g)`` evaluated as ``sum t^p X / p - sum t^q Y / q`` from the terms of g."""
        x, y = self.grad_terms(g), self.mass_terms(g)
        with np.errstate(over="ignore", invalid="ignore"):
            a = np.sum(np.power(t, self.p_elem) * x / self.p_elem)
            b = np.sum(np.power(t, self.q_nodes) * y / self.q_nodes)
        return float(a - b)

    def coercivity_lower_bound(self, g, t: float) -> float:
        """``(1/p+) rho_p(t grad g) - (1/q-) rho_q(t g)`` sharing rounding with :meth:`ray_energy`."""
        x, y = self.grad_terms(g), self.mass_terms(g)
        with np.errstate(over="ignore", invalid="ignore"):
            a = np.sum(np.power(t, self.p_elem) * x / self.p_plus)
            b = np.sum(np.power(t, self.q_nodes) * y / self.q_minus)
        return float(a - b)

    def ray_upper_bound(self, g, t: float) -> float:
        """``t^p+ rho_p(grad g) / p- - t^q- rho_q(g) / q+``; bounds J(t g) for t >= 1."""
        x, y = self.grad_terms(g), self.mass_terms(g)
        tp = np.power(t, np.full_like(self.p_elem, self.p_plus))
        tq = np.power(t, np.full_like(self.q_nodes, self.q_minus))
        with np.errstate(over="ignore", invalid="ignore"):
            a = np.sum(tp * x / self.p_minus)
            b = np.sum(tq * y / self.q_plus)
        return float(a - b)

    def literal_ray_bound(self, g, t: float) -> float:
        """``t^p+ rho_p(grad g) - t^q- rho_q(g)`` without the 1/p and 1/q factors."""
        return float(t ** self.p_plus * self.grad_modular(g)
                     - t ** self.q_minus * self.mass_modular(g))


# ---------------------------------------------------------------------------
# Functional interface


def _model(f, p, q, w, w0) -> EnergyModel:
    mesh = f.mesh if isinstance(f, GridFunction) else p.mesh
    return EnergyModel(Problem(mesh, p, q, w, w0))


def energy(f, p, q, w, w0) -> EnergyBreakdown:
    return _model(f, p, q, w, w0).energy(f)


def derivative_pairing(f, g, p, q, w, w0) -> float:
    return _model(f, p, q, w, w0).pairing(f, g)


def energy_gradient(f: GridFunction, p, q, w, w0) -> GridFunction:
    return GridFunction(f.mesh, _model(f, p, q, w, w0).gradient(f), True)


def weak_residual(f, p, q, w, w0) -> float:
    return _model(f, p, q, w, w0).residual(f)


def lambda_value_and_pairing(f, g, p, w) -> tuple:
    """``(Lambda(f), <Lambda'(f), g>)`` for the convex gradient part of J."""
    mesh = f.mesh if isinstance(f, GridFunction) else p.mesh
    model = EnergyModel(Problem(mesh, p, p, w, np.zeros(mesh.size)))
    return model.lambda_value(f), model.lambda_pairing(f, g)
