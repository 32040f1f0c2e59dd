import math
import warnings

import numpy as np
import pytest

from momentfit.bases import (
    CHEBYSHEV,
    LEGENDRE,
    MONOMIAL,
    Polynomial,
    basis_change,
    orthonormal_basis,
    orthonormal_gram,
)
from momentfit.errors import ConditioningWarning
from momentfit.moments import gauss_legendre_rule


def test_constant_is_constant_in_every_basis():
    p = Polynomial(1, 0, MONOMIAL, ((0, 3),), [4.2])
    for target in (LEGENDRE, CHEBYSHEV, MONOMIAL):
        q = basis_change(p, target)
        xs = np.linspace(0, 3, 7).reshape(-1, 1)
        assert np.allclose(q.evaluate(xs), 4.2, atol=1e-14)


def test_legendre_p2_monomial_shape():
    # orthonormal degree-2 element on [-1,1] is sqrt(5/2) * (3x^2 - 1)/2
    p = Polynomial(1, 2, LEGENDRE, ((-1, 1),), [0.0, 0.0, 1.0])
    m = basis_change(p, MONOMIAL)
    scale = math.sqrt(5.0 / 2.0)
    assert np.allclose(m.coeffs, scale * np.array([-0.5, 0.0, 1.5]), atol=1e-12)


def test_tensor_element_hits_xy_only():
    # phi_(1,1) on [-1,1]^2 is proportional to x*y
    p = Polynomial(2, 2, LEGENDRE, ((-1, 1), (-1, 1)), [0, 0, 0, 0, 1.0, 0])
    m = basis_change(p, MONOMIAL)
    from momentfit.indices import enumerate_indices

    idx = enumerate_indices(2, 2)
    for alpha, c in zip(idx, m.coeffs):
        if alpha == (1, 1):
            assert c == pytest.approx(1.5, abs=1e-12)  # (sqrt(3/2))^2
        else:
            assert c == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("n,d", [(1, 20), (2, 10), (3, 6)])
def test_roundtrip_monomial_legendre(n, d):
    rng = np.random.default_rng(n * 100 + d)
    from momentfit.indices import s_dim

    box = tuple((0.0, 1.0) for _ in range(n))
    coeffs = rng.normal(size=s_dim(n, d))
    p = Polynomial(n, d, MONOMIAL, box, coeffs)
    q = basis_change(basis_change(p, LEGENDRE), MONOMIAL)
    scale = np.maximum(1.0, np.abs(coeffs))
    assert np.max(np.abs(q.coeffs - coeffs) / scale) <= 1e-9


def test_roundtrip_chebyshev():
    rng = np.random.default_rng(7)
    coeffs = rng.normal(size=13)
    p = Polynomial(1, 12, MONOMIAL, ((-2, 1),), coeffs)
    q = basis_change(basis_change(p, CHEBYSHEV), MONOMIAL)
    assert np.max(np.abs(q.coeffs - coeffs)) <= 1e-9 * np.abs(coeffs).max()


def test_conditioning_warning_beyond_degree_30():
    p = Polynomial(1, 31, LEGENDRE, ((0, 1),), np.zeros(32))
    with pytest.warns(ConditioningWarning):
        basis_change(p, MONOMIAL)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        basis_change(Polynomial(1, 12, LEGENDRE, ((0, 1),), np.zeros(13)), MONOMIAL)


def test_evaluation_basis_independent():
    rng = np.random.default_rng(11)
    coeffs = rng.normal(size=11)
    p = Polynomial(1, 10, MONOMIAL, ((-1, 2),), coeffs)
    xs = np.linspace(-1, 2, 57).reshape(-1, 1)
    ref = p.evaluate(xs)
    scale = np.maximum(1.0, np.abs(ref))
    for target in (LEGENDRE, CHEBYSHEV):
        q = basis_change(p, target)
        assert np.max(np.abs(q.evaluate(xs) - ref) / scale) < 1e-10


def test_orthonormal_gram_identity():
    G = orthonormal_gram(((0, 1),), LEGENDRE, 8)
    assert np.abs(G.array - np.eye(G.order)).max() <= 1e-10
    G2 = orthonormal_gram(((0, 1), (-1, 1)), LEGENDRE, 4)
    assert np.abs(G2.array - np.eye(G2.order)).max() <= 1e-10


def test_orthonormal_gram_monomial_is_hilbert():
    G = orthonormal_gram(((0, 1),), MONOMIAL, 2)
    H = np.array([[1, 1 / 2, 1 / 3], [1 / 2, 1 / 3, 1 / 4], [1 / 3, 1 / 4, 1 / 5]])
    assert np.allclose(G.array, H, atol=1e-15)


def test_orthonormal_gram_affine_box_quadrature_oracle():
    # independent check by numerical integration on a mapped box
    box = ((0, 2),)
    d = 4
    ob = orthonormal_basis(box, d)
    pts, w = gauss_legendre_rule(box, 40)
    V = ob.element_values(pts)
    G_quad = V.T * w @ V
    assert np.abs(G_quad - np.eye(ob.size)).max() <= 1e-10


def test_chebyshev_gram_not_identity_for_lebesgue():
    G = orthonormal_gram(((-1, 1),), CHEBYSHEV, 3)
    assert np.abs(G.array - np.eye(G.order)).max() > 0.1


def test_polynomial_validation():
    from momentfit.errors import InputError

    with pytest.raises(InputError):
        Polynomial(1, 2, "fourier", ((0, 1),), [1, 2, 3])
    with pytest.raises(InputError):
        Polynomial(1, 2, MONOMIAL, ((0, 1),), [1, 2])
    with pytest.raises(InputError):
        Polynomial(1, 1, MONOMIAL, ((0, 1),), [1, np.nan])
