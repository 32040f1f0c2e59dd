"""Graded-lexicographic multi-index bookkeeping.

The canonical enumeration of all exponent tuples of total degree <= d in n
variables is graded lexicographic: ascending total degree, and within one
degree the leading coordinates carry the higher exponents first, e.g. for
n=2, d=2: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2).  With this ordering the
moment matrix of degree d is the leading principal submatrix of the one of
degree d+1.
"""

from functools import lru_cache
from math import comb


def s_dim(n, d):
    """Number of multi-indices of total degree <= d in n variables."""
    return comb(n + d, d)


def degree(alpha):
    return sum(alpha)


def _compositions(total, n):
    # Exponent tuples of exact total degree, lexicographically descending.
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def enumerate_indices(n, d):
    """Ordered tuple of all multi-indices with |alpha| <= d, graded lex."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if d < 0:
        raise ValueError("degree must be >= 0")
    out = []
    for total in range(d + 1):
        out.extend(_compositions(total, n))
    return tuple(out)


@lru_cache(maxsize=None)
def index_positions(n, d):
    """Mapping multi-index -> position in the canonical enumeration."""
    return {alpha: i for i, alpha in enumerate(enumerate_indices(n, d))}


def add_indices(a, b):
    return tuple(x + y for x, y in zip(a, b))
