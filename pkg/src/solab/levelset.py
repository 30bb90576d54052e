"""Extraction of extrinsic-distance level sets {r = R} in parameter space.

n = 1 gives isolated points by root finding, n = 2 a polyline contour by
marching through grid triangles, n = 3 a triangulated isosurface by marching
tetrahedra.  Product immersions (cylinders, planes) additionally admit a
closed reduction of all boundary integrals, used for n >= 3 catalog runs.

Boundary integrals use the induced metric: a parameter-space segment d at
midpoint m contributes sqrt(d^T g(m) d), a triangle half the square root of
the Gram determinant of its edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DimensionUnsupported, NonRegularLevel
from .geometry import Immersion, geometry, radius_values, unit_sphere_volume

GRAD_R_FLOOR = 1e-8  # below this |grad r| the level is treated as critical


@dataclass
class BoundaryData:
    radius: float
    area: float  # Vol(boundary of D_R)
    flux: float  # integral of |grad^Sigma r|
    coarea: float  # integral of 1/|grad^Sigma r| (= d/dR of the ball volume)
    element_count: int
    min_grad_r: float
    empty: bool = False
    method: str = ""
    notes: tuple = field(default=())


def _radius_on_grid(imm, axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return pts, radius_values(imm, pts).reshape(mesh[0].shape)


def _edge_root(imm, a, b, level):
    """Parameter point on [a, b] with r = level (bracketing assumed)."""

    def f(t):
        p = a + t * (b - a)
        return radius_values(imm, p.reshape(1, -1))[0] - level

    t = brentq(f, 0.0, 1.0, xtol=1e-14, rtol=1e-14)
    return a + t * (b - a)


def boundary_area_and_flux(
    imm: Immersion, R: float, resolution: int = 256, method: str = "auto"
) -> BoundaryData:
    """Area of the level set r = R plus the flux and co-area integrals."""
    imm.require_window(R)
    if method == "auto":
        if imm.constant_radius is not None:
            method = "constant"
        elif imm.dim <= 2:
            method = "marching"
        elif imm.radial is not None:
            method = "product"
        elif imm.dim == 3:
            method = "marching"
        else:
            raise DimensionUnsupported(
                f"no level-set extraction for generic dim {imm.dim}"
            )
    if method == "constant":
        R0 = imm.constant_radius
        if abs(R - R0) <= 1e-9 * max(1.0, R0):
            raise NonRegularLevel(R, "the whole image sits at this radius")
        return BoundaryData(R, 0.0, 0.0, 0.0, 0, math.inf, empty=True, method=method)
    if method == "product":
        return _product_boundary(imm, R)
    if imm.dim == 1:
        return _points_boundary(imm, R, resolution)
    if imm.dim == 2:
        return _marching_triangles(imm, R, resolution)
    if imm.dim == 3:
        return _marching_tetrahedra(imm, R, max(resolution // 6, 24))
    raise DimensionUnsupported(f"dim {imm.dim}")


def _product_boundary(imm: Immersion, R: float) -> BoundaryData:
    rad = imm.radial
    c, q = rad.offset, rad.euclid_dim
    if R <= c:
        return BoundaryData(R, 0.0, 0.0, 0.0, 0, math.inf, empty=True, method="product")
    t = math.sqrt(R**2 - c**2)
    if t <= GRAD_R_FLOOR * R:
        raise NonRegularLevel(R, "level tangent to the compact fiber")
    area = rad.fiber_volume * unit_sphere_volume(q - 1) * t ** (q - 1)
    grad = t / R  # |X^T|/r on the product
    return BoundaryData(
        R, area, area * grad, area / grad, 1, grad, method="product"
    )


def _points_boundary(imm: Immersion, R: float, resolution: int) -> BoundaryData:
    (lo,), (hi,) = imm.chart.box
    ts = np.linspace(lo, hi, resolution + 1)
    pts = ts.reshape(-1, 1)
    r = radius_values(imm, pts)
    if np.ptp(r) <= 1e-12 * max(1.0, abs(R)):
        raise NonRegularLevel(R, "radius is constant along the curve")
    roots = []
    for i in range(resolution):
        if (r[i] - R) * (r[i + 1] - R) < 0.0:
            roots.append(_edge_root(imm, pts[i], pts[i + 1], R))
        elif r[i] == R:
            roots.append(pts[i])
    if not roots:
        return BoundaryData(R, 0.0, 0.0, 0.0, 0, math.inf, empty=True, method="points")
    g = geometry(imm, np.vstack(roots), order=1)
    grads = g.grad_r_norm
    if grads.min() < GRAD_R_FLOOR:
        raise NonRegularLevel(R, "vanishing tangential gradient at a boundary point")
    return BoundaryData(
        R,
        float(len(roots)),
        float(math.fsum(grads.tolist())),
        float(math.fsum((1.0 / grads).tolist())),
        len(roots),
        float(grads.min()),
        method="points",
    )


def level_segments(imm: Immersion, R: float, resolution: int = 256):
    """Polyline segments of {r = R} for a 2-parameter chart (marching triangles)."""
    (lo0, lo1), (hi0, hi1) = imm.chart.box
    ax0 = np.linspace(lo0, hi0, resolution + 1)
    ax1 = np.linspace(lo1, hi1, resolution + 1)
    pts, r = _radius_on_grid(imm, (ax0, ax1))
    if np.ptp(r) <= 1e-12 * max(1.0, abs(R)):
        raise NonRegularLevel(R, "radius is constant on the chart")
    phi = r - R
    n1 = resolution + 1
    segments = []
    edge_cache = {}

    def crossing(i0, j0, i1, j1):
        key = (i0, j0, i1, j1)
        hit = edge_cache.get(key)
        if hit is None:
            a = np.array([ax0[i0], ax1[j0]])
            b = np.array([ax0[i1], ax1[j1]])
            hit = _edge_root(imm, a, b, R)
            edge_cache[key] = hit
        return hit

    for i in range(resolution):
        for j in range(resolution):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            # two triangles per cell, fixed diagonal
            for tri in ((0, 1, 2), (0, 2, 3)):
                nodes = [corners[t] for t in tri]
                vals = [phi[c] for c in nodes]
                cut = []
                for a in range(3):
                    b = (a + 1) % 3
                    va, vb = vals[a], vals[b]
                    if (va < 0.0 <= vb) or (vb < 0.0 <= va):
                        ia, ja = nodes[a]
                        ib, jb = nodes[b]
                        lo_key, hi_key = sorted([(ia, ja), (ib, jb)])
                        cut.append(crossing(*lo_key, *hi_key))
                if len(cut) == 2:
                    segments.append((cut[0], cut[1]))
    return segments


def _marching_triangles(imm: Immersion, R: float, resolution: int) -> BoundaryData:
    segments = level_segments(imm, R, resolution)
    if not segments:
        return BoundaryData(R, 0.0, 0.0, 0.0, 0, math.inf, empty=True, method="marching")
    a = np.array([s[0] for s in segments])
    b = np.array([s[1] for s in segments])
    mid = 0.5 * (a + b)
    g = geometry(imm, mid, order=1)
    d = b - a
    lengths = np.sqrt(np.einsum("ni,nij,nj->n", d, g.metric, d))
    grads = g.grad_r_norm
    if grads.min() < GRAD_R_FLOOR:
        raise NonRegularLevel(R, "vanishing tangential gradient on the contour")
    area = math.fsum(lengths.tolist())
    flux = math.fsum((lengths * grads).tolist())
    coarea = math.fsum((lengths / grads).tolist())
    return BoundaryData(
        R, area, flux, coarea, len(segments), float(grads.min()), method="marching"
    )


_CUBE_TETS = (  # six tetrahedra per cube, consistent across neighbors
    (0, 1, 3, 7),
    (0, 1, 7, 5),
    (0, 5, 7, 4),
    (0, 3, 2, 7),
    (0, 2, 6, 7),
    (0, 6, 4, 7),
)


def _marching_tetrahedra(imm: Immersion, R: float, resolution: int) -> BoundaryData:
    (lo0, lo1, lo2), (hi0, hi1, hi2) = imm.chart.box
    axes = [
        np.linspace(lo0, hi0, resolution + 1),
        np.linspace(lo1, hi1, resolution + 1),
        np.linspace(lo2, hi2, resolution + 1),
    ]
    pts, r = _radius_on_grid(imm, axes)
    if np.ptp(r) <= 1e-12 * max(1.0, abs(R)):
        raise NonRegularLevel(R, "radius is constant on the chart")
    phi = r - R
    cache = {}

    def corner(idx):
        return np.array([axes[0][idx[0]], axes[1][idx[1]], axes[2][idx[2]]])

    def crossing(ka, kb):
        key = (ka, kb) if ka < kb else (kb, ka)
        hit = cache.get(key)
        if hit is None:
            hit = _edge_root(imm, corner(key[0]), corner(key[1]), R)
            cache[key] = hit
        return hit

    triangles = []
    offs = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1)]
    for i in range(resolution):
        for j in range(resolution):
            for k in range(resolution):
                vals8 = [phi[i + o[0], j + o[1], k + o[2]] for o in offs]
                if all(v < 0 for v in vals8) or all(v >= 0 for v in vals8):
                    continue
                ids8 = [(i + o[0], j + o[1], k + o[2]) for o in offs]
                for tet in _CUBE_TETS:
                    vals = [vals8[t] for t in tet]
                    ids = [ids8[t] for t in tet]
                    inside = [v < 0 for v in vals]
                    cnt = sum(inside)
                    if cnt in (0, 4):
                        continue
                    cut = [
                        crossing(ids[a], ids[b])
                        for a in range(4)
                        for b in range(a + 1, 4)
                        if inside[a] != inside[b]
                    ]
                    if len(cut) == 3:
                        triangles.append(cut)
                    elif len(cut) == 4:
                        # order the quad so the two triangles do not cross:
                        # vertices sharing an uncut edge are adjacent
                        triangles.append([cut[0], cut[1], cut[2]])
                        triangles.append([cut[1], cut[2], cut[3]])
    if not triangles:
        return BoundaryData(R, 0.0, 0.0, 0.0, 0, math.inf, empty=True, method="marching")
    tri = np.asarray(triangles)
    cent = tri.mean(axis=1)
    g = geometry(imm, cent, order=1)
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    g11 = np.einsum("ni,nij,nj->n", e1, g.metric, e1)
    g22 = np.einsum("ni,nij,nj->n", e2, g.metric, e2)
    g12 = np.einsum("ni,nij,nj->n", e1, g.metric, e2)
    areas = 0.5 * np.sqrt(np.maximum(g11 * g22 - g12**2, 0.0))
    grads = g.grad_r_norm
    if grads.min() < GRAD_R_FLOOR:
        raise NonRegularLevel(R, "vanishing tangential gradient on the level set")
    area = math.fsum(areas.tolist())
    flux = math.fsum((areas * grads).tolist())
    coarea = math.fsum((areas / grads).tolist())
    return BoundaryData(
        R, area, flux, coarea, len(triangles), float(grads.min()), method="marching-tets"
    )
