"""Polynomial bases on a box: monomial, Legendre, Chebyshev.

The Legendre basis used throughout is orthonormal for the Lebesgue measure on
the stored box (the affine-map Jacobian is folded into the normalization), so
its Gram matrix is exactly the identity and L2 fit coefficients equal
generalized moments in that basis.  Chebyshev is provided for evaluation and
conditioning experiments only; it is not orthonormal for Lebesgue.

Exact-coefficient plumbing: monomial coefficient vectors of high-degree
orthogonal polynomials are astronomically large with massive cancellation, so
every basis conversion and every projection of moment data runs in rational
arithmetic (`fractions.Fraction`).  Float64 only enters when a final
coefficient value is materialized.  For Legendre-basis polynomials the exact
payload stores the *rational part* r_k of each coefficient; the true
coefficient is r_k * s_k with s_k the (irrational) orthonormalization scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConditioningWarning, InputError
from .indices import add_indices, enumerate_indices, index_positions, s_dim

MONOMIAL = "monomial"
LEGENDRE = "legendre"
CHEBYSHEV = "chebyshev"
BASES = (MONOMIAL, LEGENDRE, CHEBYSHEV)

# Monomial coefficient storage degrades beyond this degree in float64.
MONOMIAL_DEGREE_WARN = 30

_EVAL_CHUNK = 32768


def as_fraction_box(box):
    """Normalize a box to a tuple of (Fraction, Fraction) intervals."""
    out = []
    for a, b in box:
        fa, fb = Fraction(a), Fraction(b)
        if not fa < fb:
            raise InputError(f"empty interval [{a}, {b}] in box")
        out.append((fa, fb))
    return tuple(out)


def float_box(box):
    return tuple((float(a), float(b)) for a, b in box)


# ---------------------------------------------------------------------------
# 1-D exact coefficient tables (ascending powers)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _legendre_1d(k):
    # Standard P_k on [-1, 1]; three-term recurrence in rationals.
    if k == 0:
        return (Fraction(1),)
    if k == 1:
        return (Fraction(0), Fraction(1))
    pm1, pm2 = _legendre_1d(k - 1), _legendre_1d(k - 2)
    out = [Fraction(0)] * (k + 1)
    for j, c in enumerate(pm1):
        out[j + 1] += Fraction(2 * k - 1, k) * c
    for j, c in enumerate(pm2):
        out[j] -= Fraction(k - 1, k) * c
    return tuple(out)


@lru_cache(maxsize=None)
def _chebyshev_1d(k):
    if k == 0:
        return (Fraction(1),)
    if k == 1:
        return (Fraction(0), Fraction(1))
    pm1, pm2 = _chebyshev_1d(k - 1), _chebyshev_1d(k - 2)
    out = [Fraction(0)] * (k + 1)
    for j, c in enumerate(pm1):
        out[j + 1] += 2 * c
    for j, c in enumerate(pm2):
        out[j] -= c
    return tuple(out)


def _compose_affine(coeffs, alpha, beta):
    # Coefficients of p(alpha*x + beta), exact, by Horner in (alpha*x + beta).
    acc = [coeffs[-1]]
    for j in range(len(coeffs) - 2, -1, -1):
        nxt = [Fraction(0)] * (len(acc) + 1)
        for i, c in enumerate(acc):
            nxt[i + 1] += c * alpha
            nxt[i] += c * beta
        nxt[0] += coeffs[j]
        acc = nxt
    return tuple(acc)


@lru_cache(maxsize=None)
def _mapped_1d(family, k, a, b):
    """Exact coefficients of the degree-k family polynomial mapped to [a, b]."""
    table = _legendre_1d if family == LEGENDRE else _chebyshev_1d
    alpha = Fraction(2) / (b - a)
    beta = -(a + b) / (b - a)
    return _compose_affine(table(k), alpha, beta)


@lru_cache(maxsize=None)
def _interval_power_moment(a, b, m):
    # integral of x^m over [a, b], exact.
    return (b ** (m + 1) - a ** (m + 1)) / (m + 1)


@lru_cache(maxsize=None)
def _mapped_legendre_moment(a, b, k, m):
    # integral of x^m * Q_k(x) over [a, b], Q_k the mapped (unnormalized) Legendre.
    q = _mapped_1d(LEGENDRE, k, a, b)
    return sum(c * _interval_power_moment(a, b, m + j) for j, c in enumerate(q) if c)


# ---------------------------------------------------------------------------
# Legendre product linearization (Adams/Neumann)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _adams_A(rmax):
    out = np.empty(rmax + 1)
    out[0] = 1.0
    for r in range(1, rmax + 1):
        out[r] = out[r - 1] * (2 * r - 1) / r
    return out


def legendre_product_1d(m, n):
    """Degrees and coefficients of P_m * P_n expanded in standard Legendre.

    Returns (degrees, coeffs) with P_m P_n = sum coeffs[i] * P_{degrees[i]}.
    """
    A = _adams_A(m + n)
    rs = np.arange(min(m, n) + 1)
    ks = m + n - 2 * rs
    coeffs = (A[rs] * A[m - rs] * A[n - rs] / A[m + n - rs]) * (
        (2.0 * ks + 1.0) / (2.0 * (m + n - rs) + 1.0)
    )
    return ks, coeffs


@lru_cache(maxsize=None)
def orthonormal_product_1d(m, n, a, b):
    """phi_m * phi_n = sum c_k phi_k for the orthonormal family on [a, b]."""
    ks, base = legendre_product_1d(m, n)
    width = float(b - a)
    scale = np.sqrt((2.0 * m + 1.0) * (2.0 * n + 1.0) / ((2.0 * ks + 1.0) * width))
    return ks, base * scale


# ---------------------------------------------------------------------------
# Tensor orthonormal basis on a box
# ---------------------------------------------------------------------------

class OrthonormalBasis:
    """Tensor Legendre basis of total degree <= d, orthonormal on a box."""

    def __init__(self, box, degree):
        self.box = as_fraction_box(box)
        self.dim = len(self.box)
        self.degree = int(degree)
        self.indices = enumerate_indices(self.dim, self.degree)
        self.positions = index_positions(self.dim, self.degree)
        self.size = len(self.indices)
        self._scales = None

    # -- scales ------------------------------------------------------------

    def scale2(self, alpha):
        """Exact squared orthonormalization factor of basis element alpha."""
        out = Fraction(1)
        for k, (a, b) in zip(alpha, self.box):
            out *= Fraction(2 * k + 1) / (b - a)
        return out

    def scales(self):
        if self._scales is None:
            self._scales = np.array(
                [math.sqrt(float(self.scale2(alpha))) for alpha in self.indices]
            )
        return self._scales

    # -- exact transforms ----------------------------------------------------

    def element_monomial_coeffs(self, alpha):
        """Exact monomial coefficients of the unnormalized element Q_alpha."""
        per_axis = [
            _mapped_1d(LEGENDRE, k, a, b) for k, (a, b) in zip(alpha, self.box)
        ]
        out = {}
        def rec(i, idx, val):
            if i == self.dim:
                out[idx] = val
                return
            for j, c in enumerate(per_axis[i]):
                if c:
                    rec(i + 1, idx + (j,), val * c)
        rec(0, (), Fraction(1))
        return out

    def project_rational(self, moment_lookup):
        """Rational parts r_k = L_y(Q_k) of the orthonormal moments of y.

        moment_lookup maps a multi-index to the exact moment y_alpha.  The
        true orthonormal moment is r_k * sqrt(scale2(k)).
        """
        out = []
        for alpha in self.indices:
            acc = Fraction(0)
            for mono, c in self.element_monomial_coeffs(alpha).items():
                acc += c * moment_lookup(mono)
            out.append(acc)
        return out

    def ortho_to_monomial_exact(self, rational_parts):
        """Monomial coefficients of sum_k r_k s_k phi_k (exact)."""
        out = [Fraction(0)] * self.size
        for alpha, r in zip(self.indices, rational_parts):
            if not r:
                continue
            w = r * self.scale2(alpha)
            for mono, c in self.element_monomial_coeffs(alpha).items():
                out[self.positions[mono]] += w * c
        return out

    def monomial_to_ortho_exact(self, mono_coeffs):
        """Rational parts of the orthonormal expansion of a monomial polynomial."""
        out = []
        for alpha in self.indices:
            acc = Fraction(0)
            for mono, c in zip(self.indices, mono_coeffs):
                if not c:
                    continue
                term = c
                for i in range(self.dim):
                    a, b = self.box[i]
                    term *= _mapped_legendre_moment(a, b, alpha[i], mono[i])
                acc += term
            out.append(acc)
        return out

    # -- float evaluation ----------------------------------------------------

    def element_values(self, points):
        """(npoints, size) array of orthonormal basis values."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        tabs = []
        for i, (a, b) in enumerate(self.box):
            t = (2.0 * pts[:, i] - float(a + b)) / float(b - a)
            tabs.append(_recurrence_values(LEGENDRE, t, self.degree))
        vals = np.ones((pts.shape[0], self.size))
        for i in range(self.dim):
            cols = np.array([alpha[i] for alpha in self.indices])
            vals *= tabs[i][:, cols]
        return vals * self.scales()


@lru_cache(maxsize=None)
def get_basis(box_key, degree):
    return OrthonormalBasis(box_key, degree)


def orthonormal_basis(box, degree):
    """Cached tensor-Legendre orthonormal basis for a box."""
    return get_basis(as_fraction_box(box), degree)


def _recurrence_values(family, t, kmax):
    # (npoints, kmax+1) table of P_k(t) or T_k(t) by three-term recurrence.
    out = np.empty((t.shape[0], kmax + 1))
    out[:, 0] = 1.0
    if kmax >= 1:
        out[:, 1] = t
    for k in range(2, kmax + 1):
        if family == LEGENDRE:
            out[:, k] = ((2 * k - 1) * t * out[:, k - 1] - (k - 1) * out[:, k - 2]) / k
        else:
            out[:, k] = 2.0 * t * out[:, k - 1] - out[:, k - 2]
    return out


# ---------------------------------------------------------------------------
# Polynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    """Coefficient vector over a declared basis on a declared box.

    ``coeffs`` follows the graded-lex enumeration of multi-indices.  ``exact``
    optionally retains rational coefficient data: true coefficients for the
    monomial and Chebyshev bases, rational parts (coefficient / scale) for the
    orthonormal Legendre basis.
    """

    dim: int
    degree: int
    basis: str
    box: tuple
    coeffs: np.ndarray
    exact: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.basis not in BASES:
            raise InputError(f"unknown basis {self.basis!r}")
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape != (s_dim(self.dim, self.degree),):
            raise InputError(
                f"coefficient vector has length {coeffs.shape}, "
                f"expected {s_dim(self.dim, self.degree)}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise InputError("polynomial coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "box", float_box(self.box))

    # -- evaluation ----------------------------------------------------------

    def evaluate(self, points):
        """Evaluate at an (npoints, dim) array (or scalar list for dim 1)."""
        pts = np.asarray(points, dtype=float)
        scalar = False
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
            scalar = True
        elif pts.ndim == 1:
            if self.dim == 1:
                pts = pts.reshape(-1, 1)
            else:
                pts = pts.reshape(1, -1)
                scalar = True
        out = np.empty(pts.shape[0])
        for lo in range(0, pts.shape[0], _EVAL_CHUNK):
            chunk = pts[lo : lo + _EVAL_CHUNK]
            out[lo : lo + chunk.shape[0]] = self._evaluate_chunk(chunk)
        return out[0] if scalar else out

    __call__ = evaluate

    def _evaluate_chunk(self, pts):
        idx = enumerate_indices(self.dim, self.degree)
        if self.basis == MONOMIAL:
            tabs = [
                np.vander(pts[:, i], self.degree + 1, increasing=True)
                for i in range(self.dim)
            ]
            weights = self.coeffs
        else:
            fam = LEGENDRE if self.basis == LEGENDRE else CHEBYSHEV
            tabs = []
            for i, (a, b) in enumerate(self.box):
                t = (2.0 * pts[:, i] - (a + b)) / (b - a)
                tabs.append(_recurrence_values(fam, t, self.degree))
            if self.basis == LEGENDRE:
                weights = self.coeffs * orthonormal_basis(self.box, self.degree).scales()
            else:
                weights = self.coeffs
        vals = np.ones((pts.shape[0], len(idx)))
        for i in range(self.dim):
            cols = np.array([alpha[i] for alpha in idx])
            vals *= tabs[i][:, cols]
        return vals @ weights

    # -- conversions -----------------------------------------------------------

    def exact_coeffs(self):
        """Rational coefficient payload, promoting floats if absent.

        For the Legendre basis the payload holds rational parts (true
        coefficient divided by the orthonormalization scale), so the float
        promotion divides the scale out first.
        """
        if self.exact is not None:
            return self.exact
        if self.basis == LEGENDRE:
            scales = orthonormal_basis(self.box, self.degree).scales()
            return tuple(Fraction(c / s) for c, s in zip(self.coeffs.tolist(), scales))
        return tuple(Fraction(c) for c in self.coeffs.tolist())

    def to_basis(self, target):
        return basis_change(self, target)


def polynomial_from_exact(dim, degree, basis, box, exact):
    """Build a Polynomial from rational payload, materializing float coeffs."""
    exact = tuple(exact)
    if basis == LEGENDRE:
        ob = orthonormal_basis(box, degree)
        coeffs = np.array([float(r) for r in exact]) * ob.scales()
    else:
        coeffs = np.array([float(c) for c in exact])
    return Polynomial(dim, degree, basis, box, coeffs, exact=exact)


# ---------------------------------------------------------------------------
# Basis conversion
# ---------------------------------------------------------------------------

def _monomial_from_chebyshev_exact(poly_exact, box, dim, degree):
    ob_idx = enumerate_indices(dim, degree)
    pos = index_positions(dim, degree)
    fbox = as_fraction_box(box)
    out = [Fraction(0)] * len(ob_idx)
    for alpha, c in zip(ob_idx, poly_exact):
        if not c:
            continue
        per_axis = [_mapped_1d(CHEBYSHEV, k, a, b) for k, (a, b) in zip(alpha, fbox)]
        def rec(i, idx, val):
            if i == dim:
                out[pos[idx]] += val
                return
            for j, q in enumerate(per_axis[i]):
                if q:
                    rec(i + 1, idx + (j,), val * q)
        rec(0, (), c)
    return out


def _chebyshev_from_monomial_exact(mono, box, dim, degree):
    # Back-substitution: the change matrix is triangular in graded-lex order.
    idx = enumerate_indices(dim, degree)
    pos = index_positions(dim, degree)
    fbox = as_fraction_box(box)
    residual = list(mono)
    out = [Fraction(0)] * len(idx)
    for k in range(len(idx) - 1, -1, -1):
        alpha = idx[k]
        elem = {}
        per_axis = [_mapped_1d(CHEBYSHEV, d, a, b) for d, (a, b) in zip(alpha, fbox)]
        def rec(i, m, val):
            if i == dim:
                elem[m] = val
                return
            for j, q in enumerate(per_axis[i]):
                if q:
                    rec(i + 1, m + (j,), val * q)
        rec(0, (), Fraction(1))
        lead = elem[alpha]
        c = residual[k] / lead
        out[k] = c
        if c:
            for m, val in elem.items():
                residual[pos[m]] -= c * val
    return out


def basis_change(p, target):
    """Re-express a polynomial in another basis; exact, same function.

    Conversions run in rational arithmetic; round trips are exact up to the
    final float64 rounding of each output coefficient.  Emits
    ConditioningWarning when monomial coefficients beyond degree 30 are
    involved, where float64 storage of the result carries little meaning.
    """
    if target not in BASES:
        raise InputError(f"unknown basis {target!r}")
    if target == p.basis:
        return p
    if p.degree > MONOMIAL_DEGREE_WARN and (MONOMIAL in (p.basis, target)):
        warnings.warn(
            f"monomial conversion at degree {p.degree} exceeds float64 precision",
            ConditioningWarning,
            stacklevel=2,
        )
    exact = p.exact_coeffs()
    # via exact monomial representation
    if p.basis == MONOMIAL:
        mono = list(exact)
    elif p.basis == LEGENDRE:
        ob = orthonormal_basis(p.box, p.degree)
        mono = ob.ortho_to_monomial_exact(exact)
    else:
        mono = _monomial_from_chebyshev_exact(exact, p.box, p.dim, p.degree)
    if target == MONOMIAL:
        out = mono
    elif target == LEGENDRE:
        ob = orthonormal_basis(p.box, p.degree)
        out = ob.monomial_to_ortho_exact(mono)
    else:
        out = _chebyshev_from_monomial_exact(mono, p.box, p.dim, p.degree)
    return polynomial_from_exact(p.dim, p.degree, target, p.box, out)


# ---------------------------------------------------------------------------
# Gram matrices of basis families
# ---------------------------------------------------------------------------

def orthonormal_gram(box, basis, degree):
    """Matrix of Lebesgue inner products of basis elements over the box.

    Identity (exactly, up to float rounding) for the Legendre family; the
    classical moment/Hilbert-type matrix for monomials.  The Chebyshev family
    is orthogonal for the Chebyshev weight, not for Lebesgue, so its Lebesgue
    Gram is a generic dense matrix.
    """
    from .moments import SymmetricMatrix  # deferred: moments imports bases

    fbox = as_fraction_box(box)
    dim = len(fbox)
    idx = enumerate_indices(dim, degree)
    n = len(idx)
    if basis == LEGENDRE:
        return SymmetricMatrix.from_array(np.eye(n))
    if basis == MONOMIAL:
        arr = np.empty((n, n))
        for i, a in enumerate(idx):
            for j in range(i, n):
                m = add_indices(a, idx[j])
                val = Fraction(1)
                for mi, (lo, hi) in zip(m, fbox):
                    val *= _interval_power_moment(lo, hi, mi)
                arr[i, j] = arr[j, i] = float(val)
        return SymmetricMatrix.from_array(arr)
    if basis == CHEBYSHEV:
        arr = np.empty((n, n))
        elems = [
            _monomial_from_chebyshev_exact(
                tuple(Fraction(1) if t == k else Fraction(0) for t in range(n)),
                fbox, dim, degree,
            )
            for k in range(n)
        ]
        def pair(u, v):
            val = Fraction(0)
            for mu, cu in zip(idx, u):
                if not cu:
                    continue
                for mv, cv in zip(idx, v):
                    if not cv:
                        continue
                    term = cu * cv
                    for mi, (lo, hi) in zip(add_indices(mu, mv), fbox):
                        term *= _interval_power_moment(lo, hi, mi)
                    val += term
            return float(val)
        for i in range(n):
            for j in range(i, n):
                arr[i, j] = arr[j, i] = pair(elems[i], elems[j])
        return SymmetricMatrix.from_array(arr)
    raise InputError(f"unknown basis {basis!r}")


# ---------------------------------------------------------------------------
# Monomial polynomial arithmetic helpers
# ---------------------------------------------------------------------------

def monomial_product_exact(dim, coeffs_a, degree_a, coeffs_b, degree_b):
    """Exact monomial coefficients of a product, graded-lex enumerations."""
    idx_a = enumerate_indices(dim, degree_a)
    idx_b = enumerate_indices(dim, degree_b)
    pos = index_positions(dim, degree_a + degree_b)
    out = [Fraction(0)] * s_dim(dim, degree_a + degree_b)
    for a, ca in zip(idx_a, coeffs_a):
        if not ca:
            continue
        for b, cb in zip(idx_b, coeffs_b):
            if not cb:
                continue
            out[pos[add_indices(a, b)]] += ca * cb
    return out
