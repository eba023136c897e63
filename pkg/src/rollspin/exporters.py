"""CSV and SVG writers.

Every writer formats floats with 12 significant digits and emits no
timestamps, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math

import numpy as np

from .profile import JointProfile


def fmt(x) -> str:
    """12-significant-digit float format used by all exporters."""
    v = float(x)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return f"{v:.12g}"


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def export_profile_csv(profile: JointProfile, path) -> None:
    """Contact-point loci: theta_rad, pl_x, pl_y, pr_x, pr_y."""
    write_csv(path, ["theta_rad", "pl_x", "pl_y", "pr_x", "pr_y"],
              profile.export_rows())


def _svg_path(pts, close=True) -> str:
    cmds = [f"M {fmt(pts[0][0])} {fmt(pts[0][1])}"]
    cmds += [f"L {fmt(x)} {fmt(y)}" for x, y in pts[1:]]
    if close:
        cmds.append("Z")
    return " ".join(cmds)


def export_svg(profile: JointProfile, path) -> None:
    """Joint contour as SVG, 1 user unit = 1 mm.

    Two closed paths: the segment head contour (closed with its body
    rectangle) and the central interleave contour.  A metadata comment
    carries the design parameters.
    """
    d = profile.design
    head = np.asarray(profile._head_polygon_points())
    lens = np.asarray(profile.lens_contour())
    # SVG y grows downward; flip y so the head points up in viewers.
    head = np.column_stack([head[:, 0], -head[:, 1]])
    lens = np.column_stack([lens[:, 0], -lens[:, 1]])
    pts = np.vstack([head, lens])
    margin = 0.5
    x0, y0 = pts.min(axis=0) - margin
    x1, y1 = pts.max(axis=0) + margin
    w, h = x1 - x0, y1 - y0
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{fmt(w)}mm" '
        f'height="{fmt(h)}mm" viewBox="{fmt(x0)} {fmt(y0)} {fmt(w)} {fmt(h)}">',
        f"<!-- rolling-joint contour: L={fmt(d.L)}mm N={fmt(d.N)} "
        f"theta_max={fmt(d.theta_max)}rad samples={len(profile.theta_samples)} -->",
        f'<path d="{_svg_path(head)}" fill="none" stroke="black" '
        'stroke-width="0.05"/>',
        f'<path d="{_svg_path(lens)}" fill="none" stroke="black" '
        'stroke-width="0.05"/>',
        "</svg>",
    ]
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def read_profile_csv(path):
    """Inverse of export_profile_csv; returns (thetas, branch_L, branch_R)."""
    thetas, bl, br = [], [], []
    with open(path) as fh:
        next(fh)
        for line in fh:
            t, plx, ply, prx, pry = (float(v) for v in line.strip().split(","))
            thetas.append(t)
            bl.append((plx, ply))
            br.append((prx, pry))
    return np.array(thetas), np.array(bl), np.array(br)
