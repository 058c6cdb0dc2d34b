"""Set metrics on boundary point sets: Hausdorff distance and box counting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


class EmptyPointSetError(ValueError):
    pass


class DegenerateRegressionError(ValueError):
    pass


def _as_points(obj) -> np.ndarray:
    pts = np.asarray(getattr(obj, "points", obj), dtype=np.complex128).ravel()
    if pts.size == 0:
        raise EmptyPointSetError("point set is empty")
    return pts


def hausdorff_distance(a, b) -> float:
    """max(sup_a inf_b |a-b|, sup_b inf_a |a-b|) over two nonempty point sets.

    Exact on the given points; nearest neighbours come from a k-d tree, which
    changes nothing about the value.
    """
    pa = _as_points(a)
    pb = _as_points(b)
    xa = np.column_stack([pa.real, pa.imag])
    xb = np.column_stack([pb.real, pb.imag])
    d_ab = cKDTree(xb).query(xa, k=1)[0].max()
    d_ba = cKDTree(xa).query(xb, k=1)[0].max()
    return float(max(d_ab, d_ba))


@dataclass(frozen=True)
class BoxCountResult:
    dimension: float
    scales: np.ndarray   # epsilon per level, ascending
    counts: np.ndarray   # occupied boxes per level

    def table(self):
        return list(zip(self.scales.tolist(), self.counts.tolist()))


def box_counting_dimension(points, min_scale: float, max_scale: float,
                           levels: int) -> BoxCountResult:
    """Least-squares slope of log N(eps) vs log(1/eps) over geometric scales.

    Boxes are anchored at the lower-left corner of the point bounding box.
    Raises DegenerateRegressionError when every level sees the same count.
    """
    pts = _as_points(points)
    if levels < 3:
        raise ValueError("need at least 3 scale levels")
    if not 0 < min_scale < max_scale:
        raise ValueError("scales must satisfy 0 < min_scale < max_scale")
    x = pts.real
    y = pts.imag
    x0 = x.min()
    y0 = y.min()
    scales = np.geomspace(min_scale, max_scale, levels)
    counts = np.empty(levels, dtype=np.int64)
    for k, eps in enumerate(scales):
        ix = np.floor((x - x0) / eps).astype(np.int64)
        iy = np.floor((y - y0) / eps).astype(np.int64)
        counts[k] = np.unique(ix + (iy - iy.min()) * (ix.max() + 2)).size
    if np.all(counts == counts[0]):
        raise DegenerateRegressionError(
            f"box counts are constant ({counts[0]}) across all scales")
    slope = np.polyfit(np.log(1.0 / scales), np.log(counts.astype(float)), 1)[0]
    return BoxCountResult(float(slope), scales, counts)


def default_box_scales(grid) -> tuple:
    """Default box-counting range: 2 pixels up to 1/8 of the window, 6 levels."""
    min_scale = 2.0 * min(grid.pixel_width, grid.pixel_height)
    max_scale = max(grid.width, grid.height) / 8.0
    return min_scale, max_scale, 6
