"""Shared planar/spatial geometry helpers.

All angle-singular expressions (terms with a 1/theta factor) are routed
through series-safe helpers so every operation is continuous through the
straight configuration.
"""

from __future__ import annotations

import math

import numpy as np

# Below this angle the closed-form 1/theta expressions switch to their
# series expansions (removes the 0/0 at the straight configuration).
ANGLE_EPS = 1e-6


def sinc(x: float) -> float:
    """sin(x)/x, series-safe at x = 0."""
    if abs(x) < ANGLE_EPS:
        x2 = x * x
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    return math.sin(x) / x


def cosm1_over(x: float) -> float:
    """(cos(x) - 1)/x, series-safe at x = 0."""
    if abs(x) < ANGLE_EPS:
        x2 = x * x
        return -x / 2.0 + x * x2 / 24.0 - x * x2 * x2 / 720.0
    return (math.cos(x) - 1.0) / x


def bisect(fn, a: float, b: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Root of fn in [a, b] by bisection; fn(a) and fn(b) must differ in sign.

    Returns the midpoint of the final bracket once its width is below tol.
    """
    fa = fn(a)
    fb = fn(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise ValueError("bisect: fn(a) and fn(b) must have opposite signs")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
        if b - a < tol:
            break
    return 0.5 * (a + b)


def rot2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def mirror_x(pts) -> np.ndarray:
    """Negate x of an (n, 2) point array (reflection across the y axis)."""
    pts = np.asarray(pts, dtype=float)
    return np.column_stack([-pts[:, 0], pts[:, 1]])


def point_to_segments(p, a, b):
    """Distances from point p (3,) to segments a[i]->b[i].

    Returns (dists (m,), fracs (m,)), frac = normalized projection parameter.
    """
    p = np.asarray(p, dtype=float)
    a = np.atleast_2d(a).astype(float)
    b = np.atleast_2d(b).astype(float)
    d = b - a
    den = np.einsum("ij,ij->i", d, d)
    den = np.where(den < 1e-30, 1.0, den)
    t = np.einsum("ij,ij->i", p - a, d) / den
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.linalg.norm(p - proj, axis=1), t
