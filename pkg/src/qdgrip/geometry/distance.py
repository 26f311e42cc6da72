"""Vectorized closest-point and distance kernels.

All functions broadcast over leading dimensions, so one call can evaluate a
grid of segment configurations against a set of triangles. Divisions are
guarded so fully vectorized evaluation never produces NaN in branches that
the final selection masks out.
"""

from __future__ import annotations

import numpy as np

_TINY = 1e-30


def _dot(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", u, v)


def _norm(u: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", u, u))


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    den = np.where(np.abs(den) < _TINY, _TINY, den)
    return num / den


def _pos_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Division for denominators that are nonnegative up to rounding."""
    return num / np.maximum(den, _TINY)


def closest_point_on_triangle(p, a, b, c) -> np.ndarray:
    """Closest point to p on triangle (a, b, c), broadcasting over all inputs."""
    p = np.asarray(p, float)
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = np.asarray(c, float)
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    bp = p - b
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    cp = p - c
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    # Denominators below are squared lengths or twice squared areas, so they
    # are nonnegative wherever their branch is selected.
    v_ab = _pos_div(d1, d1 - d3)[..., None]
    w_ac = _pos_div(d2, d2 - d6)[..., None]
    w_bc = _pos_div(d4 - d3, (d4 - d3) + (d5 - d6))[..., None]
    denom = _pos_div(np.ones_like(va), va + vb + vc)
    v_in = (vb * denom)[..., None]
    w_in = (vc * denom)[..., None]

    out = a + ab * v_in + ac * w_in  # interior default
    m_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    out = np.where(m_bc[..., None], b + (c - b) * w_bc, out)
    m_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    out = np.where(m_ac[..., None], a + ac * w_ac, out)
    m_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    out = np.where(m_ab[..., None], a + ab * v_ab, out)
    out = np.where(((d6 >= 0) & (d5 <= d6))[..., None], c, out)
    out = np.where(((d3 >= 0) & (d4 <= d3))[..., None], b, out)
    out = np.where(((d1 <= 0) & (d2 <= 0))[..., None], a, out)
    return out


def point_triangle_distance(p, a, b, c) -> np.ndarray:
    q = closest_point_on_triangle(p, a, b, c)
    return _norm(np.asarray(p, float) - q)


def segment_segment_closest(p1, q1, p2, q2) -> tuple[np.ndarray, np.ndarray]:
    """Closest points (on segment 1, on segment 2) between two segments."""
    p1 = np.asarray(p1, float)
    q1 = np.asarray(q1, float)
    p2 = np.asarray(p2, float)
    q2 = np.asarray(q2, float)
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    denom = a * e - b * b  # >= 0 by Cauchy-Schwarz

    s = np.minimum(1.0, np.maximum(0.0, _pos_div(b * f - c * e, denom)))
    s = np.where(denom <= _TINY, 0.0, s)
    t = _pos_div(b * s + f, e)

    s_low = np.minimum(1.0, np.maximum(0.0, _pos_div(-c, a)))
    s_high = np.minimum(1.0, np.maximum(0.0, _pos_div(b - c, a)))
    s = np.where(t < 0.0, s_low, np.where(t > 1.0, s_high, s))
    t = np.minimum(1.0, np.maximum(0.0, t))

    # Degenerate segments collapse to their start point.
    s = np.where(e <= _TINY, s_low, s)
    s = np.where(a <= _TINY, 0.0, s)
    t = np.where(e <= _TINY, 0.0, t)
    on1 = p1 + d1 * s[..., None]
    on2 = p2 + d2 * t[..., None]
    return on1, on2


def segment_triangle_distance(p0, p1, a, b, c, tri_normal=None) -> np.ndarray:
    """Minimum distance between segment [p0, p1] and triangle (a, b, c).

    Broadcasts; returns 0 where the segment pierces the triangle interior.
    ``tri_normal`` optionally supplies the precomputed (unnormalized) cross
    product of the triangle edges.
    """
    p0, p1 = np.broadcast_arrays(np.asarray(p0, float), np.asarray(p1, float))
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    c = np.asarray(c, float)

    # Both endpoints against the triangle in one cascade, then all three
    # edges against the segment in another; stacking beats separate calls.
    pts = np.stack([p0, p1])
    d_pt = point_triangle_distance(pts, a, b, c).min(axis=0)
    e0 = np.stack([a, b, c])
    e1 = np.stack([b, c, a])
    on_seg, on_edge = segment_segment_closest(p0[None], p1[None], e0, e1)
    dist = np.minimum(d_pt, _norm(on_seg - on_edge).min(axis=0))

    n = np.cross(b - a, c - a) if tri_normal is None else np.asarray(tri_normal, float)
    s0 = _dot(p0 - a, n)
    s1 = _dot(p1 - a, n)
    crossing = (s0 * s1 <= 0.0) & (np.abs(s0 - s1) > _TINY)
    if not crossing.any():
        return dist

    frac = _safe_div(s0, s0 - s1)[..., None]
    x = p0 + (p1 - p0) * frac
    # Barycentric inside test for the plane crossing point.
    v0 = b - a
    v1 = c - a
    v2 = x - a
    d00 = _dot(v0, v0)
    d01 = _dot(v0, v1)
    d11 = _dot(v1, v1)
    d20 = _dot(v2, v0)
    d21 = _dot(v2, v1)
    den = np.maximum(d00 * d11 - d01 * d01, _TINY)
    u = (d20 * d11 - d21 * d01) / den
    v = (d21 * d00 - d20 * d01) / den
    inside = (u >= -1e-12) & (v >= -1e-12) & (u + v <= 1.0 + 1e-12)
    return np.where(crossing & inside, 0.0, dist)


def closest_point_segment_triangle(p0, p1, a, b, c) -> tuple[np.ndarray, np.ndarray, float]:
    """Exact closest pair (point on segment, point on triangle) for one pair."""
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    n = np.cross(b - a, c - a)
    s0 = float(np.dot(p0 - a, n))
    s1 = float(np.dot(p1 - a, n))
    if s0 * s1 <= 0.0 and abs(s0 - s1) > _TINY:
        x = p0 + (p1 - p0) * (s0 / (s0 - s1))
        q = closest_point_on_triangle(x, a, b, c)
        if float(np.linalg.norm(q - x)) < 1e-9:
            return x, q, 0.0

    pts = np.stack([p0, p1])
    qs = closest_point_on_triangle(pts, a, b, c)
    on_seg, on_edge = segment_segment_closest(p0, p1, np.stack([a, b, c]), np.stack([b, c, a]))
    src = np.concatenate([pts, on_seg])
    dst = np.concatenate([qs, on_edge])
    d = _norm(src - dst)
    k = int(np.argmin(d))
    return src[k], dst[k], float(d[k])
