import numpy as np
import pytest

from momentfit.bases import LEGENDRE, MONOMIAL
from momentfit.errors import DegreeTooLow, SingularMomentMatrix
from momentfit.indices import enumerate_indices
from momentfit.l2fit import (
    fit_regularized,
    fit_unconstrained,
    l2_distance_shifted,
    orthonormal_moments,
)
from momentfit.moments import (
    MomentVector,
    gauss_legendre_rule,
    lebesgue_moments,
    moment_matrix,
    riesz,
)


def test_example1_exact_coefficients(ex1_moments):
    for d in (3, 5, 10):
        rep = fit_unconstrained(ex1_moments(d), degree=d, basis=MONOMIAL)
        expected = np.zeros(len(rep.estimate.coeffs))
        expected[1] = expected[2] = 1.0
        assert np.abs(rep.estimate.coeffs - expected).max() <= 1e-8
        assert np.abs(rep.moment_residual).max() <= 1e-12


def test_constant_density_recovered_exactly():
    from fractions import Fraction

    c = Fraction(37, 10)
    exact = tuple(c / (k + 1) for k in range(9))
    y = MomentVector(
        1, 8, np.array([float(v) for v in exact]), exact=exact, box=((0, 1),)
    )
    for d in (2, 5, 8):
        rep = fit_unconstrained(y, degree=d, basis=MONOMIAL)
        expected = np.zeros(d + 1)
        expected[0] = float(c)
        assert np.abs(rep.estimate.coeffs - expected).max() == 0.0
    # float-rounded input at modest degree still lands within 1e-10
    y_float = MomentVector(1, 8, y.values, box=((0, 1),))
    rep = fit_unconstrained(y_float, degree=4, basis=MONOMIAL)
    expected = np.zeros(5)
    expected[0] = float(c)
    assert np.abs(rep.estimate.coeffs - expected).max() <= 1e-10


def test_absx_agrees_with_quadrature_least_squares_oracle(absx_moments):
    # oracle: normal equations assembled by composite quadrature that is
    # exact on each half interval where |x| x^k is polynomial
    d = 4
    rep = fit_unconstrained(absx_moments(d), degree=d, basis=MONOMIAL)
    nodes, weights = np.polynomial.legendre.leggauss(20)
    xs = np.concatenate([0.5 * (nodes - 1.0), 0.5 * (nodes + 1.0)])
    ws = np.concatenate([0.5 * weights, 0.5 * weights])
    V = np.vander(xs, d + 1, increasing=True)
    A = V.T * ws @ V
    b = V.T @ (ws * np.abs(xs))
    oracle = np.linalg.solve(A, b)
    assert np.abs(rep.estimate.coeffs - oracle).max() <= 1e-6


def test_moment_matching_invariant(absx_moments):
    from momentfit.bases import Polynomial

    d = 8
    y = absx_moments(d)
    rep = fit_unconstrained(y, degree=d, basis=MONOMIAL)
    z = lebesgue_moments(((-1, 1),), 2 * d)
    for k, alpha in enumerate(enumerate_indices(1, d)):
        # integral of x^alpha * u_d d(lambda) via riesz over z-moments
        shifted = np.zeros(len(rep.estimate.coeffs) + alpha[0])
        shifted[alpha[0]:] = rep.estimate.coeffs
        p = Polynomial(1, d + alpha[0], MONOMIAL, ((-1, 1),), shifted)
        assert riesz(z, p) == pytest.approx(
            float(y.values[k]), rel=1e-8, abs=1e-8 * max(1, np.abs(y.values).max())
        )


def test_degree_guards(absx_moments):
    with pytest.raises(DegreeTooLow):
        fit_unconstrained(absx_moments(3), degree=4)
    z = lebesgue_moments(((-1, 1),), 4)
    with pytest.raises(DegreeTooLow):
        fit_unconstrained(absx_moments(4), z=z, degree=4)  # needs 2d = 8


def test_regularized_zero_eps_identical_to_unconstrained(absx_moments):
    y = absx_moments(4)
    a = fit_regularized(y, degree=4, eps=0.0)
    b = fit_unconstrained(y, degree=4, basis=MONOMIAL)
    assert np.array_equal(a.estimate.coeffs, b.estimate.coeffs)


def test_regularized_large_eps_washes_out(absx_moments):
    rep = fit_regularized(absx_moments(4), degree=4, eps=1e12)
    assert np.abs(rep.estimate.coeffs).max() <= 1e-11


def test_regularized_against_direct_formula(absx_moments):
    y = absx_moments(6)
    eps = 1e-3
    rep = fit_regularized(y, degree=6, eps=eps)
    M = moment_matrix(lebesgue_moments(((-1, 1),), 12), 6).array
    direct = np.linalg.solve(M + eps * np.eye(7), y.values[:7])
    assert np.abs(rep.estimate.coeffs - direct).max() <= 1e-10


def test_regularization_tames_noise_on_example1(ex1_moments):
    # derived check: with 3% relative noise at d=10, eps=1e-3 reduces the
    # worst-case grid deviation from the clean fit
    rng = np.random.default_rng(42)
    d = 10
    y = ex1_moments(d)
    deltas = rng.uniform(-0.03, 0.03, size=len(y.values))
    noisy = MomentVector(2, d, y.values * (1.0 + deltas), box=y.box)
    clean = fit_unconstrained(y, degree=d, basis=MONOMIAL)
    raw = fit_regularized(noisy, degree=d, eps=0.0)
    reg = fit_regularized(noisy, degree=d, eps=1e-3)
    xs = np.linspace(0, 1, 21)
    pts = np.stack(np.meshgrid(xs, xs), axis=-1).reshape(-1, 2)
    ref = clean.estimate.evaluate(pts)
    err_raw = np.abs(raw.estimate.evaluate(pts) - ref).max()
    err_reg = np.abs(reg.estimate.evaluate(pts) - ref).max()
    assert err_reg < err_raw


def test_l2_distance_shifted_values(absx_moments):
    y = absx_moments(4)
    z = lebesgue_moments(((-1, 1),), 8)
    rep = fit_unconstrained(y, degree=4, basis=MONOMIAL)
    M = moment_matrix(z, 4).array
    opt = l2_distance_shifted(rep.estimate, y)
    assert opt == pytest.approx(-y.values[:5] @ np.linalg.solve(M, y.values[:5]), abs=1e-12)
    from momentfit.bases import Polynomial

    zero = Polynomial(1, 4, MONOMIAL, ((-1, 1),), np.zeros(5))
    assert l2_distance_shifted(zero, y) == 0.0
    # quadratic expansion: perturbing the optimum by delta adds delta'M delta
    rng = np.random.default_rng(0)
    delta = rng.normal(size=5) * 0.1
    pert = Polynomial(1, 4, MONOMIAL, ((-1, 1),), rep.estimate.coeffs + delta)
    assert l2_distance_shifted(pert, y) - opt == pytest.approx(
        delta @ M @ delta, rel=1e-9, abs=1e-12
    )


def test_shifted_objective_monotone_in_degree_smooth_density():
    # smooth density exp(x) on [0,1] via accurate quadrature moments
    pts, w = gauss_legendre_rule(((0, 1),), 120)
    dens = np.exp(pts[:, 0])
    vals = [float(w @ (pts[:, 0] ** k * dens)) for k in range(25)]
    y = MomentVector(1, 24, np.array(vals), box=((0, 1),))
    objs = [
        fit_unconstrained(y, degree=d).objective_shifted for d in range(2, 13)
    ]
    for a, b in zip(objs, objs[1:]):
        assert b <= a + 1e-9


def test_basis_invariance_of_fit(absx_moments):
    y = absx_moments(15)
    leg = fit_unconstrained(y, degree=15, basis=LEGENDRE)
    mono = fit_unconstrained(y, degree=15, basis=MONOMIAL)
    xs = np.linspace(-1, 1, 100).reshape(-1, 1)
    assert np.abs(leg.estimate.evaluate(xs) - mono.estimate.evaluate(xs)).max() <= 1e-6


def test_fast_path_matches_generic_solve(indicator_half_moments):
    y = indicator_half_moments(10)
    fast = fit_unconstrained(y, degree=10)
    assert fast.diagnostics["solve_path"] == "orthonormal-fast"
    generic = fit_unconstrained(y, degree=10, solve_path="solve")
    assert generic.diagnostics["solve_path"].startswith("cholesky")
    xs = np.linspace(0, 1, 500).reshape(-1, 1)
    assert np.abs(fast.estimate.evaluate(xs) - generic.estimate.evaluate(xs)).max() <= 1e-8


def test_fast_path_matches_float_reference_solve(indicator_half_moments):
    # float64-rounded reference moments limit the agreement: at degree 5 the
    # monomial Gram is still well enough conditioned for 1e-8 pointwise
    y = indicator_half_moments(5)
    fast = fit_unconstrained(y, degree=5)
    z = lebesgue_moments(((0, 1),), 10)
    z_float = MomentVector(1, 10, z.values)  # no box, no exact: generic path
    generic = fit_unconstrained(y, z=z_float, degree=5, box=((0, 1),))
    assert generic.diagnostics["solve_path"].startswith("cholesky")
    xs = np.linspace(0, 1, 500).reshape(-1, 1)
    assert np.abs(fast.estimate.evaluate(xs) - generic.estimate.evaluate(xs)).max() <= 1e-8


def test_singular_moment_matrix_reported():
    # measure supported on a lower-dimensional set: moment matrix singular
    vals = np.zeros(15)
    idx = enumerate_indices(2, 4)
    for i, (a, b) in enumerate(idx):
        vals[i] = 0.0 if (a + b) % 2 else 1.0 / ((a + 1) * (b + 1))
    z_bad = MomentVector(2, 4, np.zeros(15))
    with pytest.raises(SingularMomentMatrix):
        fit_unconstrained(
            MomentVector(2, 2, np.ones(6)), z=z_bad, degree=2, box=None
        )


def test_orthonormal_moments_requires_degree(indicator_half_moments):
    with pytest.raises(DegreeTooLow):
        orthonormal_moments(indicator_half_moments(3), ((0, 1),), 5)


def test_fit_report_residual_invariant(absx_moments, indicator_half_moments):
    # unregularized fits match moments: residual below 1e-8 * max(1, ||y||_inf)
    for y, d in ((absx_moments(8), 8), (indicator_half_moments(6), 6)):
        for path in ("auto", "solve"):
            rep = fit_unconstrained(y, degree=d, solve_path=path)
            bound = 1e-8 * max(1.0, float(np.abs(y.values).max()))
            assert np.abs(rep.moment_residual).max() <= bound
