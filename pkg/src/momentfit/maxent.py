"""Maximum-entropy density estimate exp(sum u_alpha x^alpha), dimensions 1-2.

The Boltzmann-Shannon maximum-entropy estimate solves the concave problem

    max_u  <y, u> - integral_box exp(sum_alpha u_alpha x^alpha) dx,

whose stationarity conditions say the fitted density matches every given
moment.  Each objective/gradient evaluation needs integrals of exp(poly),
done here with a tensor Gauss-Legendre rule, which is why the method is
restricted to one or two variables.  The exponent is optimized in the
box-orthonormal Legendre coordinates (better conditioned than monomials at
moderate degree) by BFGS with a backtracking Armijo line search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bases import LEGENDRE, MONOMIAL, Polynomial, basis_change, orthonormal_basis
from .errors import DegreeTooLow, InputError
from .indices import enumerate_indices, s_dim
from .l2fit import orthonormal_moments
from .moments import gauss_legendre_rule

CONVERGED = "converged"
DIVERGED = "diverged"
LINE_SEARCH_FAILURE = "line_search_failure"
MAX_ITERATIONS = "max_iterations"

_OBJECTIVE_CAP = 1e12
_EXPONENT_CAP = 1e4


@dataclass(frozen=True)
class ExpPolyDensity:
    """Density exp(p(x)) with polynomial exponent; strictly positive."""

    exponent: Polynomial

    @property
    def box(self):
        return self.exponent.box

    def __call__(self, points):
        return np.exp(self.exponent.evaluate(points))

    evaluate = __call__


def maxent_fit(y, degree=None, box=None, quad_nodes=None, tol=1e-7, max_iter=500):
    """Fit exp(poly) to a moment vector; returns (ExpPolyDensity, diagnostics).

    Terminates when every monomial moment of the fitted density matches the
    data within tol.  diagnostics["status"] is one of converged / diverged /
    line_search_failure / max_iterations; an inconsistent moment vector (no
    representing nonnegative measure) makes the objective unbounded and is
    reported as diverged.
    """
    if degree is None:
        raise InputError("fit degree is required")
    if y.dim > 2:
        raise InputError("maximum-entropy fit supports dimensions 1 and 2 only")
    if y.degree < degree:
        raise DegreeTooLow(f"y has degree {y.degree}, need {degree}")
    if box is None:
        box = y.box
    if box is None:
        raise InputError("a box is required (y carries none)")
    if y.values[0] <= 0.0:
        raise InputError("mass moment y_0 must be positive")
    if quad_nodes is None:
        quad_nodes = 200 if y.dim == 1 else 80

    dim = y.dim
    n = s_dim(dim, degree)
    ob = orthonormal_basis(box, degree)
    _, yhat = orthonormal_moments(y, box, degree)
    pts, wts = gauss_legendre_rule(box, quad_nodes)
    basis_vals = ob.element_values(pts)  # (npts, n)
    mono_idx = enumerate_indices(dim, degree)
    mono_vals = np.ones((pts.shape[0], n))
    for i in range(dim):
        tab = np.vander(pts[:, i], degree + 1, increasing=True)
        cols = np.array([alpha[i] for alpha in mono_idx])
        mono_vals *= tab[:, cols]

    volume = float(np.prod([b - a for a, b in ob.box]))

    def objective_grad(w):
        expo = basis_vals @ w
        if expo.max() > 700.0:  # exp overflow: objective is effectively infinite
            return np.inf, None, None
        dens = np.exp(expo)
        integral = float(wts @ dens)
        f = float(yhat @ w) - integral
        grad = yhat - basis_vals.T @ (wts * dens)
        mono_moments = mono_vals.T @ (wts * dens)
        return f, grad, mono_moments

    # exact for degree 0; feasible start in general
    w = np.zeros(n)
    w[0] = math.log(y.values[0] / volume) * math.sqrt(volume)

    status = MAX_ITERATIONS
    H = np.eye(n)  # inverse-Hessian approximation (of the concave objective)
    f, grad, mono_m = objective_grad(w)
    objective_trace = [f]
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        if not np.isfinite(f) or f > _OBJECTIVE_CAP:
            status = DIVERGED
            break
        mono_residual = float(np.abs(mono_m - y.values[:n]).max())
        if mono_residual <= tol:
            status = CONVERGED
            break
        direction = H @ grad  # ascent direction for the concave objective
        if float(direction @ grad) <= 0.0:
            H = np.eye(n)
            direction = grad
        step, accepted = 1.0, False
        for _ in range(60):
            w_new = w + step * direction
            f_new, grad_new, mono_new = objective_grad(w_new)
            if f_new == np.inf:
                # stepped into overflow territory: unbounded ascent direction
                step *= 0.5
                continue
            if f_new >= f + 1e-4 * step * float(grad @ direction):
                accepted = True
                break
            step *= 0.5
        if not accepted:
            status = LINE_SEARCH_FAILURE
            break
        s = w_new - w
        g = grad_new - grad  # gradient of the concave objective falls along ascent
        sg = float(s @ g)
        if sg < 0.0:  # curvature condition for maximization (s'g < 0)
            rho = 1.0 / sg
            I = np.eye(n)
            H = (I - rho * np.outer(s, g)) @ H @ (I - rho * np.outer(g, s)) - rho * np.outer(s, s)
        w, f, grad, mono_m = w_new, f_new, grad_new, mono_new
        objective_trace.append(f)
        if f > _OBJECTIVE_CAP or np.abs(w).max() > _EXPONENT_CAP:
            # moment vectors of no nonnegative measure push the exponent to
            # infinity with the objective still ascending
            status = DIVERGED
            break

    exponent_leg = Polynomial(dim, degree, LEGENDRE, box, w)
    exponent = basis_change(exponent_leg, MONOMIAL)
    diagnostics = {
        "status": status,
        "iterations": iterations,
        "objective": float(f) if np.isfinite(f) else float("inf"),
        "objective_trace": [float(v) for v in objective_trace],
        "moment_residual_inf": float(np.abs(mono_m - y.values[:n]).max())
        if mono_m is not None
        else float("inf"),
        "quad_nodes": int(quad_nodes),
        "tol": float(tol),
    }
    return ExpPolyDensity(exponent=exponent), diagnostics
