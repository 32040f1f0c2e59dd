"""Builtin moment generators and ground-truth densities for the experiments.

Closed-form generators carry exact rational moments; the disc and trefoil
are integrated by indicator quadrature on their bounding box (the trefoil
admits an exact genus-zero parametrization that is not implemented here, so
quadrature stands in; raise the node count to push the boundary error down).
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .bases import MONOMIAL, Polynomial
from .errors import InputError
from .indices import enumerate_indices
from .moments import (
    MomentVector,
    SemialgebraicDomain,
    box_moment_exact,
    quadrature_moments,
)

# Letter E as a union of axis-aligned rectangles inside the unit square.
# Measure-zero overlaps only; moments are frame independent.
E_RECTANGLES = (
    ((Fraction(0), Fraction(1, 5)), (Fraction(0), Fraction(1))),
    ((Fraction(1, 5), Fraction(1)), (Fraction(0), Fraction(1, 5))),
    ((Fraction(1, 5), Fraction(7, 10)), (Fraction(2, 5), Fraction(3, 5))),
    ((Fraction(1, 5), Fraction(1)), (Fraction(4, 5), Fraction(1))),
)


def _trefoil_polynomial():
    # x1^3 - 3 x1 x2^2 + (x1^2 + x2^2)^2 over the box [-1,1]^2
    idx = enumerate_indices(2, 4)
    pos = {a: i for i, a in enumerate(idx)}
    c = [0.0] * len(idx)
    c[pos[(3, 0)]] = 1.0
    c[pos[(1, 2)]] = -3.0
    c[pos[(4, 0)]] = 1.0
    c[pos[(2, 2)]] = 2.0
    c[pos[(0, 4)]] = 1.0
    return Polynomial(2, 4, MONOMIAL, ((-1, 1), (-1, 1)), c)


def _disc_domain():
    g = Polynomial(2, 2, MONOMIAL, ((-1, 1), (-1, 1)), [1, 0, 0, -1, 0, -1])
    return SemialgebraicDomain(box=((-1, 1), (-1, 1)), inequalities=(g,))


def _trefoil_domain():
    g_disc = Polynomial(2, 2, MONOMIAL, ((-1, 1), (-1, 1)), [1, 0, 0, -1, 0, -1])
    return SemialgebraicDomain(
        box=((-1, 1), (-1, 1)), inequalities=(_trefoil_polynomial(), g_disc)
    )


def _exact_vector(dim, degree, box, value_fn):
    idx = enumerate_indices(dim, degree)
    exact = tuple(value_fn(alpha) for alpha in idx)
    return MomentVector(
        dim, degree, np.array([float(v) for v in exact]), exact=exact, box=box
    )


def moments_ex1_sum(degree, nodes=None):
    """Moments of u(x) = x1 + x2 on the unit square, closed form."""
    def val(alpha):
        a, b = alpha
        return Fraction(1, (a + 1) * (b + 2)) + Fraction(1, (a + 2) * (b + 1))
    return _exact_vector(2, degree, ((0, 1), (0, 1)), val)


def moments_absx(degree, nodes=None):
    """Moments of |x| on [-1, 1]: y_k = (1 + (-1)^k)/(k + 2)."""
    return _exact_vector(
        1, degree, ((-1, 1),), lambda a: Fraction(1 + (-1) ** a[0], a[0] + 2)
    )


def moments_indicator_half(degree, nodes=None):
    """Moments of the indicator of [1/2, 1] on [0, 1]."""
    return _exact_vector(
        1,
        degree,
        ((0, 1),),
        lambda a: (1 - Fraction(1, 2) ** (a[0] + 1)) / (a[0] + 1),
    )


def moments_eshape(degree, nodes=None):
    """Moments of the letter-E indicator, exact rectangle sums."""
    def val(alpha):
        total = Fraction(0)
        for xr, yr in E_RECTANGLES:
            total += box_moment_exact(alpha, (xr, yr))
        return total
    mv = _exact_vector(2, degree, ((0, 1), (0, 1)), val)
    return mv


def moments_disc(degree, nodes=400):
    return quadrature_moments(_disc_domain(), degree, nodes)


def moments_trefoil(degree, nodes=400):
    return quadrature_moments(_trefoil_domain(), degree, nodes)


BUILTIN_MOMENTS = {
    "ex1-sum": moments_ex1_sum,
    "absx": moments_absx,
    "indicator-half": moments_indicator_half,
    "eshape": moments_eshape,
    "disc": moments_disc,
    "trefoil": moments_trefoil,
}


# ---------------------------------------------------------------------------
# ground-truth densities (vectorized over (n, dim) arrays)
# ---------------------------------------------------------------------------

def truth_ex1_sum(points):
    pts = np.atleast_2d(points)
    return pts[:, 0] + pts[:, 1]


def truth_absx(points):
    pts = np.atleast_2d(points)
    return np.abs(pts[:, 0])


def truth_indicator_half(points):
    pts = np.atleast_2d(points)
    return (pts[:, 0] >= 0.5).astype(float)


def truth_eshape(points):
    pts = np.atleast_2d(points)
    out = np.zeros(pts.shape[0])
    for (x0, x1), (y0, y1) in E_RECTANGLES:
        inside = (
            (pts[:, 0] >= float(x0))
            & (pts[:, 0] <= float(x1))
            & (pts[:, 1] >= float(y0))
            & (pts[:, 1] <= float(y1))
        )
        out = np.where(inside, 1.0, out)
    return out


def truth_disc(points):
    pts = np.atleast_2d(points)
    return (pts[:, 0] ** 2 + pts[:, 1] ** 2 <= 1.0).astype(float)


def truth_trefoil(points):
    pts = np.atleast_2d(points)
    g = _trefoil_polynomial().evaluate(pts)
    inside_disc = pts[:, 0] ** 2 + pts[:, 1] ** 2 <= 1.0
    return ((g >= 0.0) & inside_disc).astype(float)


BUILTIN_TRUTHS = {
    "ex1-sum": (truth_ex1_sum, ((0, 1), (0, 1))),
    "absx": (truth_absx, ((-1, 1),)),
    "indicator-half": (truth_indicator_half, ((0, 1),)),
    "eshape": (truth_eshape, ((0, 1), (0, 1))),
    "disc": (truth_disc, ((-1, 1), (-1, 1))),
    "trefoil": (truth_trefoil, ((-1, 1), (-1, 1))),
}


def builtin_moments(name, degree, nodes=None):
    try:
        gen = BUILTIN_MOMENTS[name]
    except KeyError:
        raise InputError(
            f"unknown builtin {name!r}; available: {', '.join(sorted(BUILTIN_MOMENTS))}"
        ) from None
    if nodes is None:
        return gen(degree)
    return gen(degree, nodes)


def builtin_truth(name):
    try:
        return BUILTIN_TRUTHS[name]
    except KeyError:
        raise InputError(
            f"unknown truth {name!r}; available: {', '.join(sorted(BUILTIN_TRUTHS))}"
        ) from None
