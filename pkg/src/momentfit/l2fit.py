"""Mean-squared-error polynomial fits from moment data.

The unconstrained minimizer of ||u - p||_2^2 over polynomials of degree d
solves M_d(z) p = y, where z holds the reference-measure moments.  Expressed
in the basis orthonormal for Lebesgue on the box, the Gram matrix is the
identity and the coefficients *are* the orthonormal moments of y, so no
linear system is formed at all; that path is exact in rational arithmetic and
is the only numerically meaningful route beyond degree ~25.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bases import (
    LEGENDRE,
    MONOMIAL,
    Polynomial,
    basis_change,
    orthonormal_basis,
    polynomial_from_exact,
)
from .errors import DegreeTooLow, InputError, SingularMomentMatrix
from .indices import s_dim
from .moments import MomentVector, lebesgue_moments, moment_matrix


@dataclass(frozen=True)
class FitReport:
    """Fitted polynomial plus solver diagnostics.

    ``objective_shifted`` is u'Mu - 2u'y, the computable part of the squared
    L2 distance (it differs from ||u - u_d||^2 by the unknown constant
    integral of u^2).  ``moment_residual`` holds M_d(z)u - y entrywise, in
    ``residual_basis`` coordinates.
    """

    estimate: Polynomial
    objective_shifted: float
    moment_residual: np.ndarray
    condition_estimate: float
    basis_used: str
    residual_basis: str = MONOMIAL
    diagnostics: dict = field(default_factory=dict)


def _resolve_reference(y, z, needed_degree, box):
    if box is None:
        box = z.box if z is not None else y.box
    if z is None:
        if box is None:
            raise InputError(
                "no reference measure: pass z moments or a box for Lebesgue"
            )
        z = lebesgue_moments(box, needed_degree)
    if z.dim != y.dim:
        raise InputError("y and z dimensions differ")
    if z.degree < needed_degree:
        raise DegreeTooLow(
            f"reference moments reach degree {z.degree}, need {needed_degree}"
        )
    return z, box


def orthonormal_moments(y, box, degree):
    """Moments of y against the orthonormal Legendre family on the box.

    Returns (rational_parts, floats): the true generalized moment is
    rational_parts[k] * s_k, floats holds it materialized in float64.
    """
    if y.degree < degree:
        raise DegreeTooLow(
            f"moment vector degree {y.degree} below requested degree {degree}"
        )
    ob = orthonormal_basis(box, degree)
    parts = ob.project_rational(y.lookup())
    floats = np.array([float(r) for r in parts]) * ob.scales()
    return parts, floats


def _monomial_matrix_float(ob):
    # Columns are monomial coefficient vectors of the orthonormal elements.
    C = np.zeros((ob.size, ob.size))
    scales = ob.scales()
    for k, alpha in enumerate(ob.indices):
        for mono, c in ob.element_monomial_coeffs(alpha).items():
            C[ob.positions[mono], k] = float(c) * scales[k]
    return C


def _orthonormal_gram_exact(ob, z):
    """Gram of the orthonormal family under exact-valued moments z."""
    from .indices import add_indices, index_positions

    pos = index_positions(z.dim, z.degree)
    elems = [ob.element_monomial_coeffs(alpha) for alpha in ob.indices]
    scales = ob.scales()
    G = np.empty((ob.size, ob.size))
    for k in range(ob.size):
        for l in range(k, ob.size):
            acc = 0
            for m1, c1 in elems[k].items():
                for m2, c2 in elems[l].items():
                    acc += c1 * c2 * z.exact[pos[add_indices(m1, m2)]]
            G[k, l] = G[l, k] = float(acc) * scales[k] * scales[l]
    return G


def fit_unconstrained(y, z=None, degree=None, basis=LEGENDRE, box=None,
                      solve_path="auto"):
    """Minimize u'M_d(z)u - 2u'y over coefficient vectors of degree d.

    The optimum matches all moments of y up to degree d.  When z is Lebesgue
    on a box and output in the Legendre basis is acceptable internally, the
    coefficients are read off as orthonormal moments with no linear solve.
    solve_path = "solve" bypasses that shortcut and assembles the normal
    equations instead (the verification route); "fast" demands the shortcut.
    """
    if degree is None:
        raise InputError("fit degree is required")
    if solve_path not in ("auto", "fast", "solve"):
        raise InputError(f"unknown solve_path {solve_path!r}")
    if y.degree < degree:
        raise DegreeTooLow(
            f"y has degree {y.degree}, cannot fit degree {degree}"
        )
    z, box = _resolve_reference(y, z, 2 * degree, box)
    n = s_dim(y.dim, degree)
    fast_ok = (
        box is not None
        and z.is_lebesgue_on_box()
        and tuple(z.box) == tuple(box)
    )
    if solve_path == "fast" and not fast_ok:
        raise InputError("fast path requires Lebesgue reference moments on the box")
    if fast_ok and solve_path != "solve":
        ob = orthonormal_basis(box, degree)
        parts = ob.project_rational(y.lookup())
        estimate = polynomial_from_exact(y.dim, degree, LEGENDRE, box, parts)
        if basis != LEGENDRE:
            estimate = basis_change(estimate, basis)
        uhat = np.array([float(r) for r in parts]) * ob.scales()
        # coefficients equal the orthonormal moments, so u'u - 2u'y = -||u||^2
        objective = -float(uhat @ uhat)
        return FitReport(
            estimate=estimate,
            objective_shifted=objective,
            moment_residual=np.zeros(n),
            condition_estimate=1.0,
            basis_used=basis,
            residual_basis=LEGENDRE,
            diagnostics={"solve_path": "orthonormal-fast"},
        )
    # generic reference measure: dense solve
    M = moment_matrix(z, degree).array
    yv = y.values[:n]
    cond = float(np.linalg.cond(M))
    # a monomial Gram beyond ~1e7 cannot deliver 1e-8-accurate coefficients
    # in float64; treat it as numerically singular and re-pose the normal
    # equations over the orthonormal family (Gram ~ identity)
    use_monomial = cond <= 1e7 or box is None
    u = None
    path = "cholesky-monomial"
    if use_monomial:
        try:
            L = np.linalg.cholesky(M)
            u = np.linalg.solve(L.T, np.linalg.solve(L, yv))
        except np.linalg.LinAlgError:
            u = None
    if u is None:
        if box is None:
            raise SingularMomentMatrix(
                f"moment matrix numerically singular (cond ~ {cond:.3e})",
                condition_estimate=cond,
            ) from None
        ob = orthonormal_basis(box, degree)
        if z.exact is not None:
            # exact reference moments: assemble the orthonormal Gram in
            # rational arithmetic, dodging the enormous cancellation of the
            # float change-of-basis transform
            Mh = _orthonormal_gram_exact(ob, z)
            _, yh = orthonormal_moments(y, box, degree)
        else:
            C = _monomial_matrix_float(ob)
            Mh = C.T @ M @ C
            yh = C.T @ yv
        try:
            Lh = np.linalg.cholesky(Mh)
        except np.linalg.LinAlgError:
            raise SingularMomentMatrix(
                f"moment matrix numerically singular (cond ~ {cond:.3e})",
                condition_estimate=cond,
            ) from None
        uh = np.linalg.solve(Lh.T, np.linalg.solve(Lh, yh))
        u_leg = Polynomial(y.dim, degree, LEGENDRE, box, uh)
        cond = float(np.linalg.cond(Mh))
        residual = Mh @ uh - yh
        objective = float(uh @ Mh @ uh - 2.0 * uh @ yh)
        estimate = u_leg if basis == LEGENDRE else basis_change(u_leg, basis)
        return FitReport(
            estimate=estimate,
            objective_shifted=objective,
            moment_residual=residual,
            condition_estimate=cond,
            basis_used=basis,
            residual_basis=LEGENDRE,
            diagnostics={"solve_path": "cholesky-legendre"},
        )
    mono = Polynomial(y.dim, degree, MONOMIAL, box, u)
    residual = M @ u - yv
    objective = float(u @ M @ u - 2.0 * u @ yv)
    estimate = mono if basis == MONOMIAL else basis_change(mono, basis)
    return FitReport(
        estimate=estimate,
        objective_shifted=objective,
        moment_residual=residual,
        condition_estimate=cond,
        basis_used=basis,
        residual_basis=MONOMIAL,
        diagnostics={"solve_path": path},
    )


def fit_regularized(y, z=None, degree=None, eps=0.0, box=None):
    """Tikhonov-regularized fit: coefficients (M_d(z) + eps I)^{-1} y, monomial basis."""
    if eps < 0:
        raise InputError("regularization parameter must be >= 0")
    if eps == 0.0:
        return fit_unconstrained(y, z, degree, basis=MONOMIAL, box=box)
    if degree is None:
        raise InputError("fit degree is required")
    if y.degree < degree:
        raise DegreeTooLow(
            f"y has degree {y.degree}, cannot fit degree {degree}"
        )
    z, box = _resolve_reference(y, z, 2 * degree, box)
    n = s_dim(y.dim, degree)
    M = moment_matrix(z, degree).array
    A = M + eps * np.eye(n)
    yv = y.values[:n]
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise SingularMomentMatrix(
            "regularized moment matrix not positive definite",
            condition_estimate=float(np.linalg.cond(A)),
        ) from exc
    u = np.linalg.solve(L.T, np.linalg.solve(L, yv))
    estimate = Polynomial(y.dim, degree, MONOMIAL, box, u)
    return FitReport(
        estimate=estimate,
        objective_shifted=float(u @ M @ u - 2.0 * u @ yv),
        moment_residual=M @ u - yv,
        condition_estimate=float(np.linalg.cond(A)),
        basis_used=MONOMIAL,
        residual_basis=MONOMIAL,
        diagnostics={"solve_path": "cholesky-regularized", "eps": float(eps)},
    )


def l2_distance_shifted(u_d, y, z=None, box=None):
    """u'M_d(z)u - 2u'y for a candidate polynomial u_d.

    This is ||u - u_d||_2^2 minus the unknown constant integral of u^2; it is
    the quantity every fit in this package minimizes and it is comparable
    across degrees.
    """
    degree = u_d.degree
    if y.degree < degree:
        raise DegreeTooLow(
            f"moment degree {y.degree} below polynomial degree {degree}"
        )
    if box is None:
        box = u_d.box
    z, box = _resolve_reference(y, z, 2 * degree, box)
    if box is not None and z.is_lebesgue_on_box() and tuple(z.box) == tuple(box):
        u_leg = u_d if u_d.basis == LEGENDRE else basis_change(u_d, LEGENDRE)
        _, yhat = orthonormal_moments(y, box, degree)
        c = u_leg.coeffs
        return float(c @ c - 2.0 * c @ yhat)
    u_mono = u_d if u_d.basis == MONOMIAL else basis_change(u_d, MONOMIAL)
    M = moment_matrix(z, degree).array
    c = u_mono.coeffs
    return float(c @ M @ c - 2.0 * c @ y.values[: len(c)])
