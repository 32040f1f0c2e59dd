"""Evaluation grids, error metrics, superlevel-set shape recovery.

Average error is a cell-weighted Riemann sum of |u - u_d| over the box (the
integral, not the mean; both are reported since the two conventions coincide
only on unit-volume boxes).  Max error is the grid maximum.  Interior
variants exclude a margin strip along each axis.

Grid evaluation parallelizes over point chunks when MOMENTFIT_THREADS asks
for it; sums are compensated (math.fsum) and the maximum is order
independent, so results do not depend on the chunking.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, InputError

_DEFAULT_NODES = {1: 10000, 2: 400}
_CHUNK = 65536


def _threads():
    try:
        return max(1, int(os.environ.get("MOMENTFIT_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class EvaluationGrid:
    """Uniform inclusive grid over a box.

    Points enumerate row-major with the first coordinate fastest and the
    last coordinate *descending*, so a reshaped mask prints (and rasterizes)
    with the top row at the maximum of the last coordinate.
    """

    box: tuple
    nodes_per_axis: tuple

    def __post_init__(self):
        box = tuple((float(a), float(b)) for a, b in self.box)
        for a, b in box:
            if not a < b:
                raise InputError(f"empty interval [{a}, {b}] in grid box")
        object.__setattr__(self, "box", box)
        nodes = self.nodes_per_axis
        if isinstance(nodes, (int, np.integer)):
            nodes = (int(nodes),) * len(box)
        nodes = tuple(int(n) for n in nodes)
        if len(nodes) != len(box) or any(n < 2 for n in nodes):
            raise InputError("nodes_per_axis needs >= 2 nodes on every axis")
        object.__setattr__(self, "nodes_per_axis", nodes)

    @property
    def dim(self):
        return len(self.box)

    @property
    def shape(self):
        # raster shape: last coordinate = rows (descending), first = columns
        return tuple(reversed(self.nodes_per_axis))

    @property
    def num_points(self):
        return int(np.prod(self.nodes_per_axis))

    @property
    def cell_weight(self):
        vol = float(np.prod([b - a for a, b in self.box]))
        return vol / self.num_points

    def axes(self):
        return [
            np.linspace(a, b, n) for (a, b), n in zip(self.box, self.nodes_per_axis)
        ]

    def points(self):
        axes = self.axes()
        rev = [axes[-1][::-1]] + [ax for ax in axes[-2:0:-1]] + (
            [axes[0]] if self.dim > 1 else []
        )
        if self.dim == 1:
            return axes[0].reshape(-1, 1)
        mesh = np.meshgrid(*rev, indexing="ij")
        cols = list(reversed(mesh))
        return np.stack([c.ravel() for c in cols], axis=-1)

    def interior_mask(self, margin):
        """Boolean mask of points at least margin*length inside each axis."""
        pts = self.points()
        mask = np.ones(pts.shape[0], dtype=bool)
        for i, (a, b) in enumerate(self.box):
            pad = margin * (b - a)
            mask &= (pts[:, i] >= a + pad) & (pts[:, i] <= b - pad)
        return mask


def default_grid(box):
    dim = len(box)
    nodes = _DEFAULT_NODES.get(dim, max(2, int(round(10000 ** (1.0 / dim)))))
    return EvaluationGrid(box=tuple(box), nodes_per_axis=nodes)


def _as_evaluator(obj):
    if callable(obj):
        return obj
    evaluate = getattr(obj, "evaluate", None)
    if callable(evaluate):
        return evaluate
    raise InputError(f"cannot evaluate object of type {type(obj)!r} on a grid")


def evaluate_on_grid(fn, grid_or_points):
    """Vectorized evaluation, chunked across MOMENTFIT_THREADS workers."""
    fn = _as_evaluator(fn)
    pts = (
        grid_or_points.points()
        if isinstance(grid_or_points, EvaluationGrid)
        else np.asarray(grid_or_points, dtype=float)
    )
    workers = _threads()
    if workers == 1 or pts.shape[0] <= _CHUNK:
        return np.asarray(fn(pts), dtype=float)
    chunks = [pts[lo : lo + _CHUNK] for lo in range(0, pts.shape[0], _CHUNK)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda c: np.asarray(fn(c), dtype=float), chunks))
    return np.concatenate(parts)


@dataclass(frozen=True)
class ErrorReport:
    """Average (integral) and maximum pointwise errors, with interior variants."""

    avg_error: float
    max_error: float
    avg_error_interior: float
    max_error_interior: float
    interior_margin: float
    avg_error_mean: float
    grid_box: tuple
    grid_nodes: tuple
    num_points: int

    def to_doc(self):
        return {
            "avg_error": self.avg_error,
            "max_error": self.max_error,
            "avg_error_interior": self.avg_error_interior,
            "max_error_interior": self.max_error_interior,
            "interior_margin": self.interior_margin,
            "avg_error_mean": self.avg_error_mean,
            "grid": {
                "box": [[a, b] for a, b in self.grid_box],
                "nodes_per_axis": list(self.grid_nodes),
                "num_points": self.num_points,
            },
        }


def error_metrics(u_true, u_est, grid, interior_margin=0.05):
    """Integral and max absolute error between two functions on a grid.

    Symmetric in its two function arguments.  avg_error is the cell-weighted
    Riemann sum of the absolute difference (the integral over the box);
    avg_error_mean divides the box volume out.
    """
    vals_true = evaluate_on_grid(u_true, grid)
    vals_est = evaluate_on_grid(u_est, grid)
    diff = np.abs(vals_true - vals_est)
    w = grid.cell_weight
    avg = math.fsum(diff.tolist()) * w
    volume = float(np.prod([b - a for a, b in grid.box]))
    inner = grid.interior_mask(interior_margin)
    if inner.any():
        avg_in = math.fsum(diff[inner].tolist()) * w
        max_in = float(diff[inner].max())
    else:
        avg_in, max_in = 0.0, 0.0
    return ErrorReport(
        avg_error=float(avg),
        max_error=float(diff.max()),
        avg_error_interior=float(avg_in),
        max_error_interior=max_in,
        interior_margin=float(interior_margin),
        avg_error_mean=float(avg / volume),
        grid_box=grid.box,
        grid_nodes=grid.nodes_per_axis,
        num_points=grid.num_points,
    )


def superlevel_set(u_est, grid, threshold=0.5):
    """Raster mask of grid points where the estimate reaches the threshold."""
    vals = evaluate_on_grid(u_est, grid)
    return (vals >= threshold).reshape(grid.shape)


def symmetric_difference(mask_a, mask_b, grid):
    """Cell-weighted area of the XOR region of two rasters on one grid."""
    mask_a = np.asarray(mask_a, dtype=bool)
    mask_b = np.asarray(mask_b, dtype=bool)
    if mask_a.shape != grid.shape or mask_b.shape != grid.shape:
        raise GridMismatch(
            f"masks {mask_a.shape}/{mask_b.shape} do not match grid {grid.shape}"
        )
    return float(np.count_nonzero(mask_a ^ mask_b) * grid.cell_weight)
