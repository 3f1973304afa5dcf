"""2D oriented-bounding-box helpers: corners, overlap test, clearance."""
from __future__ import annotations

import math


def obb_corners(x, y, heading, half_len, half_wid):
    """Corners of a box centered at (x, y), long axis along `heading`."""
    c, s = math.cos(heading), math.sin(heading)
    local = ((half_len, half_wid), (half_len, -half_wid),
             (-half_len, -half_wid), (-half_len, half_wid))
    return [(x + dx * c - dy * s, y + dx * s + dy * c) for dx, dy in local]


def _interval(corners, ax):
    dots = [cx * ax[0] + cy * ax[1] for cx, cy in corners]
    return min(dots), max(dots)


def obb_overlap(c1, c2):
    """Separating-axis test between two convex quads (corner lists)."""
    for corners in (c1, c2):
        for i in range(4):
            x1, y1 = corners[i]
            x2, y2 = corners[(i + 1) % 4]
            nx, ny = y1 - y2, x2 - x1
            norm = math.hypot(nx, ny)
            if norm == 0.0:
                continue
            ax = (nx / norm, ny / norm)
            lo1, hi1 = _interval(c1, ax)
            lo2, hi2 = _interval(c2, ax)
            if hi1 < lo2 or hi2 < lo1:
                return False
    return True


def _point_segment_dist(px, py, x1, y1, x2, y2):
    dx, dy = x2 - x1, y2 - y1
    den = dx * dx + dy * dy
    if den == 0.0:
        return math.hypot(px - x1, py - y1)
    t = max(0.0, min(1.0, ((px - x1) * dx + (py - y1) * dy) / den))
    return math.hypot(px - (x1 + t * dx), py - (y1 + t * dy))


def obb_distance(c1, c2):
    """Clearance between two boxes: 0 when they touch or overlap."""
    if obb_overlap(c1, c2):
        return 0.0
    best = math.inf
    for a, b in ((c1, c2), (c2, c1)):
        for px, py in a:
            for i in range(4):
                x1, y1 = b[i]
                x2, y2 = b[(i + 1) % 4]
                d = _point_segment_dist(px, py, x1, y1, x2, y2)
                if d < best:
                    best = d
    return best


def segment_hits_aabb(x0, y0, x1, y1, xmin, xmax, ymin, ymax):
    """Liang-Barsky clip: does the segment touch the axis-aligned box?"""
    t0, t1 = 0.0, 1.0
    dx, dy = x1 - x0, y1 - y0
    for p, q in ((-dx, x0 - xmin), (dx, xmax - x0),
                 (-dy, y0 - ymin), (dy, ymax - y0)):
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            r = q / p
            if p < 0.0:
                if r > t1:
                    return False
                t0 = max(t0, r)
            else:
                if r < t0:
                    return False
                t1 = min(t1, r)
    return t0 <= t1
