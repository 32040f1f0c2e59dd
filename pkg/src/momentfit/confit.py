"""Nonnegativity-constrained mean-squared-error fits.

Two formulations, both compiled to the in-repo SDP solver:

* fit_localizing: minimize the shifted L2 objective subject to the localizing
  matrix of the candidate density against the reference measure being PSD, a
  *necessary* condition for nonnegativity on the support of lambda (the
  constraint is linear in the coefficients, so this is a small LMI problem in
  the fit coefficients themselves).

* fit_putinar: minimize the same objective subject to a weighted-SOS
  representation u = sigma_0 + sum_j sigma_j g_j over the domain generators, a
  *sufficient* condition: any feasible polynomial is nonnegative on the
  domain.  The Gram matrices of the sigma_j make the direct formulation
  enormous (s(d)^2 scalar unknowns), so the compile goes through the conic
  dual instead: pseudo-moment variables v of degree 2d with moment and
  localizing LMI blocks, whose interior-point *dual* blocks are exactly the
  Gram matrices of the certificate.  That keeps the variable count at s(2d)
  and makes degree-100 certified fits a few-second affair.

Everything runs in coefficients of the box-orthonormal Legendre family: the
reference Gram is the identity there, products of basis elements expand with
exactly computed linearization tensors, and no Hilbert-type matrix is ever
inverted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .bases import (
    LEGENDRE,
    MONOMIAL,
    Polynomial,
    as_fraction_box,
    basis_change,
    orthonormal_basis,
    orthonormal_product_1d,
)
from .errors import DegreeMismatch, DegreeTooLow, InputError
from .indices import enumerate_indices, index_positions, s_dim
from .l2fit import FitReport, _resolve_reference, orthonormal_moments
from .moments import SemialgebraicDomain, moment_matrix
from .sdp import OPTIMAL, SdpBlock, SdpProblem, epigraph_block, solve


# ---------------------------------------------------------------------------
# product tensors of the orthonormal family
# ---------------------------------------------------------------------------

def _product_expansion(box, alpha, beta, pos_total):
    """Positions and coefficients of phi_alpha * phi_beta in the phi family.

    Components above the degree covered by pos_total are dropped; callers
    only ever project onto the retained range.
    """
    per_axis = [
        orthonormal_product_1d(int(a), int(b), lo, hi)
        for a, b, (lo, hi) in zip(alpha, beta, box)
    ]
    idx = [()]
    vals = np.array([1.0])
    for ks, cs in per_axis:
        idx = [t + (int(k),) for t in idx for k in ks]
        vals = np.multiply.outer(vals, cs).ravel()
    positions, keep = [], []
    for i, t in enumerate(idx):
        p = pos_total.get(t)
        if p is not None:
            positions.append(p)
            keep.append(i)
    return np.array(positions, dtype=int), vals[keep]


@lru_cache(maxsize=None)
def _product_tensor_cached(box_key, d_pair, d_total):
    """(s(d_total), s(d_pair), s(d_pair)) tensor of triple coefficients.

    Entry [gamma, a, b] is the coefficient of phi_gamma in phi_a * phi_b,
    equivalently the Lebesgue integral of phi_a phi_b phi_gamma over the box.
    """
    box = box_key
    dim = len(box)
    pair_idx = enumerate_indices(dim, d_pair)
    pos_total = index_positions(dim, d_total)
    n = len(pair_idx)
    out = np.zeros((s_dim(dim, d_total), n, n))
    for i, alpha in enumerate(pair_idx):
        for j in range(i, n):
            positions, vals = _product_expansion(box, alpha, pair_idx[j], pos_total)
            out[positions, i, j] = vals
            out[positions, j, i] = vals
    return out


def product_tensor(box, d_pair, d_total):
    return _product_tensor_cached(as_fraction_box(box), d_pair, d_total)


def _generator_tensor(box, ghat, g_degree, d_pair, d_total):
    """[gamma, a, b] = coefficient of phi_gamma in phi_a phi_b g.

    ghat holds the generator's coefficients over the orthonormal family of
    total degree g_degree.
    """
    box_fr = as_fraction_box(box)
    dim = len(box_fr)
    base = product_tensor(box, d_pair, 2 * d_pair)
    mid_idx = enumerate_indices(dim, 2 * d_pair)
    pos_total = index_positions(dim, d_total)
    n = base.shape[1]
    out = np.zeros((s_dim(dim, d_total), n, n))
    g_idx = enumerate_indices(dim, g_degree)
    for e_alpha, ge in zip(g_idx, ghat):
        if ge == 0.0:
            continue
        for kpos, kappa in enumerate(mid_idx):
            slab = base[kpos]
            if not slab.any():
                continue
            positions, vals = _product_expansion(box_fr, kappa, e_alpha, pos_total)
            for p, v in zip(positions, vals):
                out[p] += ge * v * slab
    return out


def _generator_phi_coeffs(g, box, degree):
    """Orthonormal-family coefficients of a generator, padded to a degree."""
    gb = Polynomial(g.dim, g.degree, g.basis, box, g.coeffs, exact=g.exact)
    leg = gb if gb.basis == LEGENDRE else basis_change(gb, LEGENDRE)
    out = np.zeros(s_dim(g.dim, degree))
    out[: len(leg.coeffs)] = leg.coeffs
    return out, leg


def _box_generators(box):
    """Per-coordinate quadratics (b_i - x_i)(x_i - a_i) >= 0, exact."""
    fbox = as_fraction_box(box)
    dim = len(fbox)
    idx = index_positions(dim, 2)
    gens = []
    for i, (a, b) in enumerate(fbox):
        coeffs = [Fraction(0)] * s_dim(dim, 2)
        e1 = tuple(1 if j == i else 0 for j in range(dim))
        e2 = tuple(2 if j == i else 0 for j in range(dim))
        coeffs[idx[(0,) * dim]] = -a * b
        coeffs[idx[e1]] = a + b
        coeffs[idx[e2]] = Fraction(-1)
        gens.append(
            Polynomial(
                dim, 2, MONOMIAL, box, [float(c) for c in coeffs],
                exact=tuple(coeffs),
            )
        )
    return tuple(gens)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PutinarCertificate:
    """Weighted-SOS witness u = b'A_0 b + sum_j (b_j' A_j b_j) g_j.

    Gram matrices are expressed over the box-orthonormal Legendre family
    (``basis``); PSD-ness and the reconstruction identity are basis
    independent.  generator_degrees holds the half-degrees d_j, so block j+1
    has order s(d - d_j).
    """

    gram_matrices: tuple
    generators: tuple
    generator_degrees: tuple
    degree: int
    basis: str
    box: tuple

    def min_eigenvalues(self):
        return [float(np.linalg.eigvalsh(g)[0]) for g in self.gram_matrices]

    def reconstruct_coeffs(self):
        """Orthonormal-family coefficients (degree 2d) of the certified poly."""
        d = self.degree
        dim = len(self.box)
        total = s_dim(dim, 2 * d)
        C = product_tensor(self.box, d, 2 * d)
        out = np.einsum("kab,ab->k", C, self.gram_matrices[0])
        for g, gram, dj in zip(
            self.generators, self.gram_matrices[1:], self.generator_degrees
        ):
            ghat, _ = _generator_phi_coeffs(g, self.box, 2 * dj)
            E = _generator_tensor(self.box, ghat, 2 * dj, d - dj, 2 * d)
            out = out + np.einsum("kab,ab->k", E, gram)
        assert out.shape == (total,)
        return out

    def verify(self, estimate, tol=1e-7):
        """Check PSD-ness and the coefficient-wise reconstruction identity."""
        mins = self.min_eigenvalues()
        coeffs = self.reconstruct_coeffs()
        est = estimate if estimate.basis == LEGENDRE else basis_change(
            estimate, LEGENDRE
        )
        n_head = len(est.coeffs)
        head_err = float(np.abs(coeffs[:n_head] - est.coeffs).max())
        tail_err = float(np.abs(coeffs[n_head:]).max()) if len(coeffs) > n_head else 0.0
        return {
            "min_eigenvalues": mins,
            "identity_head_error": head_err,
            "identity_tail_error": tail_err,
            "psd_ok": min(mins) >= -tol,
            "identity_ok": max(head_err, tail_err) <= tol,
        }


# ---------------------------------------------------------------------------
# localizing-matrix constrained fit
# ---------------------------------------------------------------------------

def fit_localizing(y, z=None, degree=None, box=None, tol=1e-9, max_iter=100):
    """L2 fit subject to the localizing matrix M_d(u z) being PSD.

    Needs reference moments to degree 3d (entries y_{a+b+c} with |c| <= d).
    The feasible set relaxes {u >= 0 on the box}, so the optimum lies between
    the unconstrained fit and the Putinar-certified fit.
    """
    if degree is None:
        raise InputError("fit degree is required")
    if y.degree < degree:
        raise DegreeTooLow(f"y has degree {y.degree}, need {degree}")
    z, box = _resolve_reference(y, z, 3 * degree, box)
    if box is None:
        raise InputError("fit_localizing requires a box")
    dim = y.dim
    n = s_dim(dim, degree)
    _, yhat = orthonormal_moments(y, box, degree)
    scale = max(1.0, float(np.abs(yhat).max()))
    lebesgue_ref = z.is_lebesgue_on_box() and tuple(z.box) == tuple(box)
    if lebesgue_ref:
        # entry [k][a,b] = integral of phi_a phi_b phi_k d(lambda);
        # objective Gram is the identity in these coordinates
        ts = product_tensor(box, degree, degree)
        obj_rows = np.eye(n)
        gram = None
    else:
        # generic z: integral phi_a phi_b phi_k dz via double expansion
        _, zhat3 = orthonormal_moments(z, box, 3 * degree)
        pair = product_tensor(box, degree, 2 * degree)
        pos3 = index_positions(dim, 3 * degree)
        mid_idx = enumerate_indices(dim, 2 * degree)
        fbox = as_fraction_box(box)
        # mix[g, k] = integral of phi_g phi_k dz for |g| <= 2d, |k| <= d
        mix = np.zeros((len(mid_idx), n))
        for gpos, gamma in enumerate(mid_idx):
            for kpos, kappa in enumerate(enumerate_indices(dim, degree)):
                positions, vals = _product_expansion(fbox, gamma, kappa, pos3)
                mix[gpos, kpos] = float(vals @ zhat3[positions])
        ts = np.einsum("gab,gk->kab", pair, mix)
        # objective Gram of z over the orthonormal family: its leading
        # principal block is exactly mix restricted to degree-d rows
        gram = mix[:n, :]
        gram = 0.5 * (gram + gram.T)
        try:
            obj_rows = np.linalg.cholesky(gram).T
        except np.linalg.LinAlgError as exc:
            raise InputError(
                "reference Gram matrix not positive definite"
            ) from exc
    # the unconstrained optimum may already satisfy the LMI (constraint
    # inactive): it is then the exact optimum and no SDP is needed
    if lebesgue_ref:
        loc_at_uncon = np.einsum("kab,k->ab", ts, yhat)
        min_eig = float(np.linalg.eigvalsh(loc_at_uncon)[0])
        if min_eig >= -1e-12 * max(1.0, scale):
            estimate = Polynomial(dim, degree, LEGENDRE, box, yhat)
            return FitReport(
                estimate=estimate,
                objective_shifted=-float(yhat @ yhat),
                moment_residual=np.zeros(n),
                condition_estimate=1.0,
                basis_used=LEGENDRE,
                residual_basis=LEGENDRE,
                diagnostics={
                    "solve_path": "localizing-inactive",
                    "sdp_status": OPTIMAL,
                    "sdp_iterations": 0,
                    "sdp_gap": 0.0,
                    "localizing_min_eig": min_eig,
                },
            )

    # variable 0 is the epigraph t, the fit coefficients start at index 1
    loc = SdpBlock(
        order=n,
        f0=np.zeros((n, n)),
        coeffs={1 + k: ts[k] for k in range(n) if ts[k].any()},
    )
    blocks = [
        epigraph_block(1 + n, obj_rows, None, -yhat / scale, 0.0),
        loc,
    ]
    c = np.zeros(1 + n)
    c[0] = 1.0
    problem = SdpProblem(objective=c, blocks=blocks)
    sol = solve(problem, tol=tol, max_iter=max_iter)
    uhat = sol.x[1:] * scale
    estimate = Polynomial(dim, degree, LEGENDRE, box, uhat)
    loc_matrix = np.einsum("kab,k->ab", ts, uhat)
    if gram is None:
        objective = float(uhat @ uhat - 2.0 * uhat @ yhat)
    else:
        objective = float(uhat @ gram @ uhat - 2.0 * uhat @ yhat)
    return FitReport(
        estimate=estimate,
        objective_shifted=objective,
        moment_residual=uhat - yhat,
        condition_estimate=1.0,
        basis_used=LEGENDRE,
        residual_basis=LEGENDRE,
        diagnostics={
            "solve_path": "sdp-localizing",
            "sdp_status": sol.status,
            "sdp_iterations": sol.iterations,
            "sdp_gap": sol.gap,
            "localizing_min_eig": float(np.linalg.eigvalsh(loc_matrix)[0]),
        },
    )


# ---------------------------------------------------------------------------
# Putinar-certified fit
# ---------------------------------------------------------------------------

def fit_putinar(y, z=None, degree=None, domain=None, tol=1e-9, max_iter=100):
    """L2 fit over polynomials carrying a Putinar positivity certificate.

    Returns (FitReport, PutinarCertificate).  The estimate is reconstructed
    from the certificate Gram matrices, so it is nonnegative on the domain up
    to the certificate's PSD tolerance by construction.
    """
    if degree is None:
        raise InputError("fit degree is required")
    if domain is None:
        raise InputError("fit_putinar requires a SemialgebraicDomain")
    if y.degree < degree:
        raise DegreeTooLow(f"y has degree {y.degree}, need {degree}")
    box = domain.box
    generators = domain.inequalities or _box_generators(box)
    gen_degrees = tuple((g.degree + 1) // 2 for g in generators)
    if degree < max(gen_degrees):
        raise DegreeMismatch(
            f"fit degree {degree} below max generator half-degree {max(gen_degrees)}"
        )
    z, _ = _resolve_reference(y, z, 2 * degree, box)
    dim = y.dim
    n_head = s_dim(dim, degree)
    n_total = s_dim(dim, 2 * degree)
    _, yhat = orthonormal_moments(y, box, degree)
    scale = max(1.0, float(np.abs(yhat).max()))
    yh = yhat / scale

    # quadratic objective in pseudo-moment variables v:
    #   q(v) = (yhat + v_head/2)' Ghat^{-1} (yhat + v_head/2),
    # Ghat the orthonormal-family Gram of z (identity for box-Lebesgue).
    if z.is_lebesgue_on_box() and tuple(z.box) == tuple(box):
        rows = np.hstack([0.5 * np.eye(n_head), np.zeros((n_head, n_total - n_head))])
        offset = yh
    else:
        Mz = moment_matrix(z, degree).array
        from .l2fit import _monomial_matrix_float

        C = _monomial_matrix_float(orthonormal_basis(box, degree))
        Ghat = C.T @ Mz @ C
        try:
            Lh = np.linalg.cholesky(Ghat)
        except np.linalg.LinAlgError as exc:
            raise InputError(
                "reference Gram matrix not positive definite"
            ) from exc
        half = np.linalg.solve(Lh, np.eye(n_head))
        rows = np.hstack([0.5 * half, np.zeros((n_head, n_total - n_head))])
        offset = half @ yh

    blocks = [epigraph_block(1 + n_total, rows, offset, None, 0.0)]
    Cfull = product_tensor(box, degree, 2 * degree)
    blocks.append(
        SdpBlock(
            order=n_head,
            f0=np.zeros((n_head, n_head)),
            coeffs={
                1 + k: Cfull[k] for k in range(n_total) if Cfull[k].any()
            },
        )
    )
    gen_tensors = []
    for g, dj in zip(generators, gen_degrees):
        ghat, _ = _generator_phi_coeffs(g, box, 2 * dj)
        E = _generator_tensor(box, ghat, 2 * dj, degree - dj, 2 * degree)
        gen_tensors.append(E)
        nj = E.shape[1]
        blocks.append(
            SdpBlock(
                order=nj,
                f0=np.zeros((nj, nj)),
                coeffs={1 + k: E[k] for k in range(n_total) if E[k].any()},
            )
        )
    c = np.zeros(1 + n_total)
    c[0] = 1.0
    problem = SdpProblem(objective=c, blocks=blocks)
    sol = solve(problem, tol=tol, max_iter=max_iter)

    grams = tuple(scale * Y for Y in sol.duals[1:])
    coeffs_full = np.einsum("kab,ab->k", Cfull, grams[0])
    for E, gram in zip(gen_tensors, grams[1:]):
        coeffs_full = coeffs_full + np.einsum("kab,ab->k", E, gram)
    uhat = coeffs_full[:n_head]
    tail_max = float(np.abs(coeffs_full[n_head:]).max()) if n_total > n_head else 0.0
    estimate = Polynomial(dim, degree, LEGENDRE, box, uhat)
    certificate = PutinarCertificate(
        gram_matrices=grams,
        generators=tuple(generators),
        generator_degrees=gen_degrees,
        degree=degree,
        basis=LEGENDRE,
        box=box,
    )
    objective = float(uhat @ uhat - 2.0 * uhat @ yhat)
    report = FitReport(
        estimate=estimate,
        objective_shifted=objective,
        moment_residual=uhat - yhat,
        condition_estimate=1.0,
        basis_used=LEGENDRE,
        residual_basis=LEGENDRE,
        diagnostics={
            "solve_path": "sdp-putinar-dual",
            "sdp_status": sol.status,
            "sdp_iterations": sol.iterations,
            "sdp_gap": sol.gap,
            "certificate_tail_max": tail_max,
            "certificate_min_eigs": [float(np.linalg.eigvalsh(g)[0]) for g in grams],
        },
    )
    return report, certificate
