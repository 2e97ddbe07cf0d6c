"""2-D primitives: distance, linearized least-squares trilateration, centroid."""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateAnchorsError, InsufficientAnchorsError, NoDataError

# Relative threshold on the singular values of the linearized system.
COLLINEAR_TOL = 1e-9


class Point2D(NamedTuple):
    x: float
    y: float


class RangeAnchor(NamedTuple):
    position: Point2D
    range: float


def euclidean_distance(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def localization_error(actual, estimated) -> float:
    return euclidean_distance(actual, estimated)


def trilaterate_arrays(positions: np.ndarray, ranges: np.ndarray) -> Point2D:
    """Array form of :func:`trilaterate`; ``positions`` is (k, 2)."""
    k = len(positions)
    if k < 3:
        raise InsufficientAnchorsError(f"need at least 3 anchors, got {k}")
    if k == 3:
        return _trilaterate3(positions, ranges)
    positions = np.asarray(positions, dtype=float)
    ranges = np.asarray(ranges, dtype=float)
    # Subtracting circle 0 from circle i:
    #   2 (p_i - p_0) . L = r_0^2 - r_i^2 + |p_i|^2 - |p_0|^2
    p0 = positions[0]
    a = 2.0 * (positions[1:] - p0)
    sq = (positions * positions).sum(axis=1)
    b = ranges[0] ** 2 - ranges[1:] ** 2 + sq[1:] - sq[0]

    u, sv, vt = np.linalg.svd(a, full_matrices=False)
    if sv[0] <= 0 or sv[-1] <= COLLINEAR_TOL * sv[0]:
        raise DegenerateAnchorsError("anchor positions are collinear")
    x, y = vt.T @ ((u.T @ b) / sv)
    return Point2D(float(x), float(y))


def _trilaterate3(positions, ranges) -> Point2D:
    # Square 2x2 case in plain floats; same system as the general path.
    (x0, y0), (x1, y1), (x2, y2) = [(float(p[0]), float(p[1])) for p in positions]
    r0, r1, r2 = (float(r) for r in ranges)
    a11, a12 = 2.0 * (x1 - x0), 2.0 * (y1 - y0)
    a21, a22 = 2.0 * (x2 - x0), 2.0 * (y2 - y0)
    s0 = x0 * x0 + y0 * y0
    b1 = r0 * r0 - r1 * r1 + (x1 * x1 + y1 * y1) - s0
    b2 = r0 * r0 - r2 * r2 + (x2 * x2 + y2 * y2) - s0
    det = a11 * a22 - a12 * a21
    # singular values: s_max * s_min = |det|, s_max^2 + s_min^2 = ||A||_F^2
    fro2 = a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22
    disc = math.sqrt(max(fro2 * fro2 - 4.0 * det * det, 0.0))
    s_max2 = (fro2 + disc) / 2.0
    if s_max2 <= 0 or abs(det) <= COLLINEAR_TOL * s_max2:
        raise DegenerateAnchorsError("anchor positions are collinear")
    return Point2D((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det)


def trilaterate(anchors: Sequence[RangeAnchor]) -> Point2D:
    """Position from >= 3 (anchor, range) pairs by linearized least squares.

    The first anchor's circle equation is subtracted from the others, which
    leaves a linear system in (x, y), solved through its SVD.
    All anchors are used; with exact ranges the true point is returned.
    """
    if len(anchors) < 3:
        raise InsufficientAnchorsError(f"need at least 3 anchors, got {len(anchors)}")
    positions = np.array([a[0] for a in anchors], dtype=float)
    ranges = np.array([a[1] for a in anchors], dtype=float)
    return trilaterate_arrays(positions, ranges)


def centroid(points: Sequence) -> Point2D:
    if len(points) == 0:
        raise NoDataError("centroid of no points")
    n = len(points)
    return Point2D(sum(p[0] for p in points) / n, sum(p[1] for p in points) / n)
