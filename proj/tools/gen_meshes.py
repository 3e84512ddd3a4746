#!/usr/bin/env python3
"""Generates the shipped initial meshes in data/meshes.

Every mesh has the same layout: boundary vertices on the arcs, one interior
vertex w_i per boundary chord (pie triangle w_i b_i b_{i+1}), one buffer
triangle b_i w_i w_{i-1} per boundary vertex, and a Delaunay triangulation of
the convex ring of w's plus a few inner points for the ordinary triangles.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay


def circle_conic(cx, cy, r):
    return [-1.0, 0.0, -1.0, 2 * cx, 2 * cy, r * r - cx * cx - cy * cy]


def ellipse_conic(a, b, cx=0.0, cy=0.0):
    # 1 - (x-cx)^2/a^2 - (y-cy)^2/b^2
    ia, ib = 1 / (a * a), 1 / (b * b)
    return [-ia, 0.0, -ib, 2 * cx * ia, 2 * cy * ib, 1 - cx * cx * ia - cy * cy * ib]


def assemble(arcs, boundary, inner, offset):
    """arcs: list of dicts (coeffs, from, to); boundary: list of (point, arc of
    the edge starting at this point), counter-clockwise."""
    n = len(boundary)
    pts = [np.asarray(p, dtype=float) for p, _ in boundary]
    ws = []
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        d = b - a
        normal_in = np.array([-d[1], d[0]])  # left of the traversal = inside
        normal_in /= np.linalg.norm(normal_in)
        ws.append(0.5 * (a + b) + offset * np.linalg.norm(d) * normal_in)
    verts = pts + ws
    inner = [np.asarray(p, dtype=float) for p in inner]
    verts += inner
    tris, bedges = [], []
    for i in range(n):
        tris.append([n + i, i, (i + 1) % n])
        tris.append([i, n + i, n + (i - 1) % n])
        bedges.append([i, (i + 1) % n, boundary[i][1]])
    ring = np.array(ws + inner)
    dl = Delaunay(ring)
    for s in dl.simplices:
        ids = [n + int(k) for k in s]
        p = [verts[k] for k in ids]
        area = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0])
        if abs(area) < 1e-12:
            continue
        if area < 0:
            ids[1], ids[2] = ids[2], ids[1]
        tris.append(ids)
    return {
        "domain": {"arcs": arcs},
        "vertices": [[float(v[0]), float(v[1])] for v in verts],
        "triangles": tris,
        "boundary_edges": bedges,
    }


def quarter_arcs(conic, a, b):
    corners = [(a, 0.0), (0.0, b), (-a, 0.0), (0.0, -b)]
    return [{"coeffs": conic, "from": list(corners[j]), "to": list(corners[(j + 1) % 4])} for j in range(4)]


def disk(radius=0.62):
    arcs = quarter_arcs(circle_conic(0, 0, 1), 1.0, 1.0)
    boundary = []
    for k in range(8):
        t = k * math.pi / 4
        boundary.append(((math.cos(t), math.sin(t)), k // 2))
    m = assemble(arcs, boundary, [(0.0, 0.0)], 0.0)
    # Place the ring on a circle instead of the chord offset (keeps the mesh symmetric).
    for i in range(8):
        t = (i + 0.5) * math.pi / 4
        m["vertices"][8 + i] = [radius * math.cos(t), radius * math.sin(t)]
    return m


def ellipse(per_quarter=4, offset=0.45):
    a, b = 1.0, 0.4
    arcs = quarter_arcs(ellipse_conic(a, b), a, b)
    n = 4 * per_quarter
    boundary = []
    for k in range(n):
        t = 2 * math.pi * k / n
        boundary.append(((a * math.cos(t), b * math.sin(t)), k // per_quarter))
    inner = [(x, 0.0) for x in (-0.5, 0.0, 0.5)]
    return assemble(arcs, boundary, inner, offset)


def c2_parameters():
    a, b, t0 = 4.0, 1.3, 0.85 * math.pi
    p = np.array([a * math.cos(t0), b * math.sin(t0)])
    d1 = np.array([-a * math.sin(t0), b * math.cos(t0)])
    speed = np.linalg.norm(d1)
    kappa = a * b / (a * a * math.sin(t0) ** 2 + b * b * math.cos(t0) ** 2) ** 1.5
    inward = np.array([-d1[1], d1[0]]) / speed  # left normal of a counter-clockwise ellipse
    centre = p + inward / kappa
    return a, b, t0, float(centre[0]), float(centre[1]), 1 / kappa


def c2_domain(n_top=6, n_side=3, offset=0.45):
    a, b, t0, c1, c2, r = c2_parameters()
    top = ellipse_conic(a, b, 0.0, -c2)
    bottom = ellipse_conic(a, b, 0.0, c2)
    left = circle_conic(c1, 0.0, r)
    right = circle_conic(-c1, 0.0, r)

    def top_pt(t):
        return (a * math.cos(t), b * math.sin(t) - c2)

    z_tr, z_tl = top_pt(math.pi - t0), top_pt(t0)
    z_bl, z_br = (z_tl[0], -z_tl[1]), (z_tr[0], -z_tr[1])
    arcs = [
        {"coeffs": top, "from": list(z_tr), "to": list(z_tl)},
        {"coeffs": left, "from": list(z_tl), "to": list(z_bl)},
        {"coeffs": bottom, "from": list(z_bl), "to": list(z_br)},
        {"coeffs": right, "from": list(z_br), "to": list(z_tr)},
    ]
    boundary = []
    for k in range(n_top):
        t = (math.pi - t0) + (2 * t0 - math.pi) * k / n_top
        boundary.append((top_pt(t), 0))
    phi0 = math.atan2(z_tl[1], z_tl[0] - c1)
    phi1 = math.atan2(z_bl[1], z_bl[0] - c1) + 2 * math.pi
    for k in range(n_side):
        phi = phi0 + (phi1 - phi0) * k / n_side
        boundary.append(((c1 + r * math.cos(phi), r * math.sin(phi)), 1))
    for p, _ in boundary[:n_top]:
        boundary.append(((-p[0], -p[1]), 2))
    for p, _ in boundary[n_top:n_top + n_side]:
        boundary.append(((-p[0], -p[1]), 3))
    inner = [(x, 0.0) for x in (-2.4, -1.2, 0.0, 1.2, 2.4)]
    return assemble(arcs, boundary, inner, offset)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "meshes"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, mesh in (("disk", disk()), ("ellipse", ellipse()), ("c2_domain", c2_domain())):
        with open(out / f"{name}.json", "w") as f:
            json.dump(mesh, f, indent=1)
        print(f"{name}: {len(mesh['vertices'])} vertices, {len(mesh['triangles'])} triangles")


if __name__ == "__main__":
    main()
