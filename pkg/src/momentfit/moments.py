"""Moment vectors, moment and localizing matrices, Riesz functional.

A moment vector stores y_alpha = integral of x^alpha against an (unknown)
measure, truncated at total degree d and enumerated graded-lex.  Exact
rational values are retained whenever the generator knows them (closed-form
reference measures, builtin densities); all high-degree fitting paths depend
on that exactness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import bases
from .bases import MONOMIAL, Polynomial, as_fraction_box, float_box
from .errors import DegreeTooLow, InputError
from .indices import add_indices, enumerate_indices, index_positions, s_dim


@dataclass(frozen=True)
class SymmetricMatrix:
    """Dense symmetric matrix with single (packed lower-triangular) storage."""

    order: int
    packed: np.ndarray

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        n = arr.shape[0]
        if arr.shape != (n, n):
            raise InputError("symmetric matrix requires a square array")
        rows, cols = np.tril_indices(n)
        packed = np.ascontiguousarray(arr[rows, cols])
        packed.flags.writeable = False
        return cls(n, packed)

    def entry(self, i, j):
        if i < j:
            i, j = j, i
        return self.packed[i * (i + 1) // 2 + j]

    @property
    def array(self):
        n = self.order
        out = np.zeros((n, n))
        rows, cols = np.tril_indices(n)
        out[rows, cols] = self.packed
        out[cols, rows] = self.packed
        return out

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.array)

    def min_eigenvalue(self):
        return float(self.eigenvalues()[0])


@dataclass(frozen=True)
class MomentVector:
    """Truncated moment sequence of a measure, graded-lex enumerated."""

    dim: int
    degree: int
    values: np.ndarray
    exact: tuple | None = field(default=None, compare=False)
    box: tuple | None = field(default=None, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        expected = s_dim(self.dim, self.degree)
        if vals.shape != (expected,):
            raise InputError(
                f"moment vector has {vals.shape} values, expected {expected}"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("moment values must be finite reals")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        if self.exact is not None:
            exact = tuple(Fraction(v) for v in self.exact)
            if len(exact) != expected:
                raise InputError("exact moment payload has wrong length")
            object.__setattr__(self, "exact", exact)
        if self.box is not None:
            object.__setattr__(self, "box", float_box(self.box))

    def lookup(self):
        """Exact-valued position lookup alpha -> y_alpha (Fraction)."""
        pos = index_positions(self.dim, self.degree)
        if self.exact is not None:
            exact = self.exact
            return lambda alpha: exact[pos[alpha]]
        vals = self.values
        return lambda alpha: Fraction(vals[pos[alpha]])

    def value(self, alpha):
        return self.values[index_positions(self.dim, self.degree)[alpha]]

    def truncated(self, degree):
        if degree > self.degree:
            raise DegreeTooLow(
                f"moment vector of degree {self.degree} cannot be truncated to {degree}"
            )
        n = s_dim(self.dim, degree)
        return MomentVector(
            self.dim,
            degree,
            self.values[:n],
            exact=None if self.exact is None else self.exact[:n],
            box=self.box,
            meta=dict(self.meta),
        )

    def is_lebesgue_on_box(self, rel_tol=1e-12):
        """True when the vector matches Lebesgue moments of its own box."""
        if self.box is None:
            return False
        ref = lebesgue_moments(self.box, self.degree)
        if self.exact is not None:
            return self.exact == ref.exact
        scale = np.maximum(1.0, np.abs(ref.values))
        return bool(np.all(np.abs(self.values - ref.values) <= rel_tol * scale))


@dataclass(frozen=True)
class SemialgebraicDomain:
    """Bounding box plus polynomial inequalities g_j(x) >= 0."""

    box: tuple
    inequalities: tuple = ()

    def __post_init__(self):
        as_fraction_box(self.box)  # validates nonemptiness
        object.__setattr__(self, "box", float_box(self.box))
        ineqs = tuple(self.inequalities)
        for g in ineqs:
            if not isinstance(g, Polynomial):
                raise InputError("domain inequalities must be Polynomial instances")
            if g.dim != len(self.box):
                raise InputError("inequality dimension does not match box")
        object.__setattr__(self, "inequalities", ineqs)

    @property
    def dim(self):
        return len(self.box)

    def generator_degrees(self):
        """d_j = ceil(deg g_j / 2) for each inequality."""
        return tuple((g.degree + 1) // 2 for g in self.inequalities)

    def indicator(self, points):
        """Boolean mask of points satisfying every inequality."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        mask = np.ones(pts.shape[0], dtype=bool)
        for g in self.inequalities:
            mask &= g.evaluate(pts) >= 0.0
        return mask


def box_domain(box):
    return SemialgebraicDomain(box=tuple(box))


# ---------------------------------------------------------------------------
# Reference-measure moments
# ---------------------------------------------------------------------------

def box_moment_exact(alpha, box):
    fbox = as_fraction_box(box)
    if len(alpha) != len(fbox):
        raise InputError("multi-index dimension does not match box")
    out = Fraction(1)
    for k, (a, b) in zip(alpha, fbox):
        out *= (b ** (k + 1) - a ** (k + 1)) / (k + 1)
    return out


def box_moment(alpha, box):
    """Lebesgue moment of x^alpha over a box: prod (b^(k+1)-a^(k+1))/(k+1)."""
    return float(box_moment_exact(alpha, box))


def lebesgue_moments(box, degree):
    """Exact Lebesgue moment vector on a box up to total degree."""
    fbox = as_fraction_box(box)
    dim = len(fbox)
    exact = tuple(
        box_moment_exact(alpha, fbox) for alpha in enumerate_indices(dim, degree)
    )
    return MomentVector(
        dim, degree, np.array([float(v) for v in exact]), exact=exact, box=box
    )


def gauss_legendre_rule(box, nodes_per_axis):
    """Tensor Gauss-Legendre nodes (N, dim) and weights (N,) on a box."""
    fbox = float_box(box)
    axes, wts = [], []
    base_x, base_w = np.polynomial.legendre.leggauss(nodes_per_axis)
    for a, b in fbox:
        axes.append(0.5 * (b - a) * base_x + 0.5 * (a + b))
        wts.append(0.5 * (b - a) * base_w)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=-1)
    w = np.ones(pts.shape[0])
    wgrids = np.meshgrid(*wts, indexing="ij")
    for g in wgrids:
        w *= g.ravel()
    return pts, w


def quadrature_moments(domain, degree, nodes_per_axis):
    """Moments of Lebesgue restricted to a semialgebraic set, by quadrature.

    Tensor Gauss-Legendre on the bounding box with hard indicator weighting
    1{g_j(x) >= 0 for all j}.  Deterministic for fixed nodes_per_axis; the
    meta flag ``empty_indicator`` is set when no node survives.  Use at
    least (degree+2)/2 nodes per axis; with nontrivial inequalities the
    boundary error decays only like 1/nodes, so hundreds of nodes are normal.
    """
    if nodes_per_axis < 1:
        raise InputError("nodes_per_axis must be positive")
    pts, w = gauss_legendre_rule(domain.box, nodes_per_axis)
    mask = domain.indicator(pts)
    meta = {
        "quadrature_nodes_per_axis": int(nodes_per_axis),
        "nodes_used": int(mask.sum()),
        "empty_indicator": bool(not mask.any()),
    }
    pts, w = pts[mask], w[mask]
    dim = domain.dim
    idx = enumerate_indices(dim, degree)
    vals = np.empty(len(idx))
    if pts.shape[0] == 0:
        vals[:] = 0.0
    else:
        pows = [
            np.vander(pts[:, i], degree + 1, increasing=True) for i in range(dim)
        ]
        for j, alpha in enumerate(idx):
            prod = w.copy()
            for i, k in enumerate(alpha):
                if k:
                    prod = prod * pows[i][:, k]
            vals[j] = float(np.sum(prod))
    box = None if domain.inequalities else domain.box
    return MomentVector(dim, degree, vals, box=box, meta=meta)


# ---------------------------------------------------------------------------
# Moment / localizing matrices and the Riesz functional
# ---------------------------------------------------------------------------

def moment_matrix(y, d):
    """Moment matrix of order d: entry (alpha, beta) = y_{alpha+beta}."""
    if y.degree < 2 * d:
        raise DegreeTooLow(
            f"moment matrix of order {d} needs moments to degree {2 * d}, "
            f"vector has degree {y.degree}"
        )
    idx = enumerate_indices(y.dim, d)
    pos = index_positions(y.dim, y.degree)
    n = len(idx)
    arr = np.empty((n, n))
    for i, a in enumerate(idx):
        for j in range(i, n):
            v = y.values[pos[add_indices(a, idx[j])]]
            arr[i, j] = arr[j, i] = v
    return SymmetricMatrix.from_array(arr)


def localizing_matrix(y, g, d):
    """Localizing matrix: entry (alpha, beta) = sum_gamma g_gamma y_{alpha+beta+gamma}."""
    if g.basis != MONOMIAL:
        g = g.to_basis(MONOMIAL)
    if y.degree < 2 * d + g.degree:
        raise DegreeTooLow(
            f"localizing matrix of order {d} with a degree-{g.degree} factor "
            f"needs moments to degree {2 * d + g.degree}, vector has {y.degree}"
        )
    idx = enumerate_indices(y.dim, d)
    g_idx = enumerate_indices(g.dim, g.degree)
    pos = index_positions(y.dim, y.degree)
    support = [(gamma, c) for gamma, c in zip(g_idx, g.coeffs) if c != 0.0]
    n = len(idx)
    arr = np.empty((n, n))
    for i, a in enumerate(idx):
        for j in range(i, n):
            ab = add_indices(a, idx[j])
            v = 0.0
            for gamma, c in support:
                v += c * y.values[pos[add_indices(ab, gamma)]]
            arr[i, j] = arr[j, i] = v
    return SymmetricMatrix.from_array(arr)


def riesz(y, p):
    """Riesz functional L_y(p) = sum_alpha p_alpha y_alpha."""
    if p.degree > y.degree:
        raise DegreeTooLow(
            f"polynomial degree {p.degree} exceeds moment degree {y.degree}"
        )
    if p.basis != MONOMIAL:
        p = p.to_basis(MONOMIAL)
    if p.exact is not None and y.exact is not None:
        pos = index_positions(y.dim, y.degree)
        idx = enumerate_indices(p.dim, p.degree)
        acc = Fraction(0)
        for alpha, c in zip(idx, p.exact):
            if c:
                acc += c * y.exact[pos[alpha]]
        return float(acc)
    n = len(p.coeffs)
    return float(np.dot(p.coeffs, y.values[:n]))
