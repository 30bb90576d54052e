"""Dirichlet solves on extrinsic regions with the induced metric.

Meshing: a structured parameter-space grid is clipped against the level sets
r = rho and r = R.  Grid vertices close to a level set are snapped onto it by
root finding along grid edges; remaining crossings cut triangles through
cached edge roots, so the mesh conforms to the curved boundary.  Periodic
chart axes are identified.  Boundary vertices carry tags: "inner" (r = rho),
"outer" (r = R), and "cut" where a non-proper window truncates the region.

Assembly: piecewise-linear Galerkin with the per-simplex induced metric
(centroid value), so the discrete Dirichlet energy is
  sum_T area_T sqrt(det g) grad^T g^{-1} grad.
The capacity solve minimizes exactly this energy; the solver is conjugate
gradients with diagonal preconditioning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import brentq
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import cg

from .errors import (
    DimensionUnsupported,
    DisconnectedRegion,
    MeshFailure,
    NonProportional,
    SolverDivergence,
)
from .geometry import Immersion, geometry, radius_values
from .levelset import boundary_area_and_flux
from .quadrature import ExtrinsicRegion
from .sampling import sample_box
from .solitons import SolitonSpec, imcf_residual

SNAP_FRACTION = 0.3  # grid vertices closer than this (in edge units) snap onto the level


@dataclass
class Mesh:
    imm: Immersion
    region: ExtrinsicRegion
    vertices: np.ndarray  # (V, n) parameter coordinates
    simplices: np.ndarray  # (S, n+1)
    tags: dict  # "inner" | "outer" | "cut" -> sorted vertex index arrays
    h: float
    metric: np.ndarray  # (S, n, n) induced metric at simplex centroids
    sqrt_det: np.ndarray  # (S,)
    r: np.ndarray  # (V,) extrinsic radius at the vertices
    dof_map: np.ndarray = None  # vertex -> degree of freedom (ties periodic seams)
    dof_count: int = 0
    notes: tuple = field(default=())

    def __post_init__(self):
        if self.dof_map is None:
            self.dof_map = np.arange(len(self.vertices))
            self.dof_count = len(self.vertices)

    @property
    def vertex_count(self):
        return len(self.vertices)

    def boundary_vertices(self):
        out = []
        for key in ("inner", "outer", "cut"):
            out.extend(self.tags.get(key, ()))
        return np.unique(np.asarray(out, dtype=int))

    def edge_set(self):
        edges = set()
        for s in self.simplices:
            m = len(s)
            for i in range(m):
                for j in range(i + 1, m):
                    edges.add((min(s[i], s[j]), max(s[i], s[j])))
        return edges

    def euler_characteristic(self):
        dof_edges = {
            (min(self.dof_map[a], self.dof_map[b]), max(self.dof_map[a], self.dof_map[b]))
            for a, b in self.edge_set()
        }
        return self.dof_count - len(dof_edges) + len(self.simplices)


def _region_window(imm, region):
    """Axis windows: full range on periodic axes, sampled bounding box else."""
    pts = sample_box(imm.chart, 4096, 37)
    r = radius_values(imm, pts)
    mask = (r > region.rho) & (r < region.R)
    if not mask.any():
        raise MeshFailure(
            f"{imm.name}: the region {region.rho} < r < {region.R} is empty"
        )
    lo, hi = imm.chart.box
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    pad = 0.05 * (hi - lo)
    wlo = np.maximum(lo, pts[mask].min(axis=0) - pad)
    whi = np.minimum(hi, pts[mask].max(axis=0) + pad)
    for i, p in enumerate(imm.chart.params):
        if p.periodic:
            wlo[i], whi[i] = p.min, p.max
    return wlo, whi


def mesh_region(imm: Immersion, region: ExtrinsicRegion, h: float = 0.1) -> Mesh:
    """Conforming simplicial mesh of {rho < r < R} in parameter space."""
    imm.require_window(region.R)
    if imm.dim == 1:
        return _mesh_segments(imm, region, h)
    if imm.dim == 2:
        return _mesh_triangles(imm, region, h)
    raise DimensionUnsupported(
        f"PDE solves run on curves and surfaces; {imm.name} has dim {imm.dim}"
    )


def _level_root(imm, a, b, level):
    def f(t):
        p = a + t * (b - a)
        return radius_values(imm, p.reshape(1, -1))[0] - level

    t = brentq(f, 0.0, 1.0, xtol=1e-15, rtol=8.9e-16)
    return a + t * (b - a), t


def _mesh_segments(imm, region, h):
    (lo,), (hi,) = imm.chart.box
    m = max(int(math.ceil((hi - lo) / h)), 8)
    ts = np.linspace(lo, hi, m + 1)
    r = radius_values(imm, ts.reshape(-1, 1))
    breaks = [lo, hi]
    for level in (region.rho, region.R):
        if level <= 0:
            continue
        for i in range(m + 1):
            if r[i] == level:  # root sits on a grid node
                breaks.append(float(ts[i]))
            elif i < m and (r[i] - level) * (r[i + 1] - level) < 0:
                p, _ = _level_root(imm, ts[i : i + 1], ts[i + 1 : i + 2], level)
                breaks.append(float(p[0]))
    breaks = sorted(set(breaks))
    verts, segs = [], []
    tags = {"inner": [], "outer": [], "cut": []}

    def vert_id(x):
        verts.append(x)
        return len(verts) - 1

    ids = {}
    for left, right in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (left + right)
        rm = radius_values(imm, np.array([[mid]]))[0]
        if not (region.rho < rm < region.R):
            continue
        k = max(int(math.ceil((right - left) / h)), 1)
        xs = np.linspace(left, right, k + 1)
        idlist = []
        for x in xs:
            if x not in ids:
                ids[x] = vert_id(x)
            idlist.append(ids[x])
        segs.extend([(a, b) for a, b in zip(idlist[:-1], idlist[1:])])
    if not segs:
        raise MeshFailure(f"{imm.name}: empty 1-d region")
    verts = np.asarray(verts).reshape(-1, 1)
    rv = radius_values(imm, verts)
    for i, x in enumerate(verts[:, 0]):
        if abs(rv[i] - region.R) < 1e-9 * max(1.0, region.R):
            tags["outer"].append(i)
        elif region.rho > 0 and abs(rv[i] - region.rho) < 1e-9 * max(1.0, region.rho):
            tags["inner"].append(i)
        elif min(abs(x - lo), abs(x - hi)) < 1e-12 * (hi - lo):
            tags["cut"].append(i)
    simplices = np.asarray(segs, dtype=int)
    cent = verts[simplices].mean(axis=1)
    g = geometry(imm, cent, order=1)
    return Mesh(
        imm,
        region,
        verts,
        simplices,
        {k: np.asarray(sorted(v), dtype=int) for k, v in tags.items()},
        h,
        g.metric,
        g.sqrt_det,
        rv,
    )


def _mesh_triangles(imm, region, h):
    (wlo, whi) = _region_window(imm, region)
    params = imm.chart.params
    counts, coords, wraps = [], [], []
    for i, p in enumerate(params):
        span = whi[i] - wlo[i]
        m = max(int(round(span / h)), 8) if p.periodic else max(int(math.ceil(span / h)), 6)
        counts.append(m)
        # periodic axes get duplicated seam columns whose degrees of freedom
        # are tied after meshing; geometry stays unwrapped
        wraps.append(p.periodic and (whi[i] - wlo[i]) >= p.span * (1 - 1e-12))
        coords.append(np.linspace(wlo[i], whi[i], m + 1))
    m0, m1 = counts
    n0, n1 = m0 + 1, m1 + 1

    def vid(i, j):
        return i * n1 + j

    verts = np.empty((n0 * n1, 2))
    for i in range(n0):
        for j in range(n1):
            verts[vid(i, j)] = (coords[0][i], coords[1][j])

    rv = radius_values(imm, verts)
    # keep phi <= 0: phi = r - R against the outer level, rho - r against the inner
    levels = [("outer", region.R, 1.0)]
    if region.rho > 0:
        levels.append(("inner", region.rho, -1.0))
    grid_edges = []
    for i in range(m0):  # edges along the first axis
        for j in range(m1 + 1):
            grid_edges.append((vid(i, j), vid(i + 1, j)))
    for i in range(m0 + 1):  # edges along the second axis
        for j in range(m1):
            grid_edges.append((vid(i, j), vid(i, j + 1)))

    on_level = {}  # vertex -> tag
    # snap pass: move near-crossing endpoints onto the level sets
    for tag, level, sign in levels:
        phi = sign * (rv - level)
        for a, b in grid_edges:
            pa, pb = phi[a], phi[b]
            if pa == 0.0 or pb == 0.0 or pa * pb > 0:
                continue
            point, t = _level_root(imm, verts[a], verts[b], level)
            for vtx, dist in ((a, t), (b, 1.0 - t)):
                if dist < SNAP_FRACTION and vtx not in on_level:
                    verts[vtx] = point
                    on_level[vtx] = tag
                    rv[vtx] = level
                    phi[vtx] = 0.0
                    break
        rv = radius_values(imm, verts)  # other level's phi sees moved vertices

    phi_by_tag = {tag: sign * (rv - level) for tag, level, sign in levels}
    for vtx, tag in on_level.items():
        phi_by_tag[tag][vtx] = 0.0

    vert_list = [verts]
    extra = []
    edge_roots = {}

    def crossing(a, b, tag, level):
        key = (min(a, b), max(a, b), tag)
        hit = edge_roots.get(key)
        if hit is None:
            pa = vert_list[0][a] if a < len(vert_list[0]) else extra[a - len(vert_list[0])]
            pb = vert_list[0][b] if b < len(vert_list[0]) else extra[b - len(vert_list[0])]
            point, _ = _level_root(imm, pa, pb, level)
            extra.append(point)
            hit = len(vert_list[0]) + len(extra) - 1
            edge_roots[key] = hit
        return hit

    def clip(poly, tag, level, sign):
        """Keep the phi <= 0 part of a polygon (vertex index loop)."""
        phi = phi_by_tag[tag]

        def val(v):
            if v < len(phi):
                return phi[v]
            p = extra[v - len(vert_list[0])]
            return sign * (radius_values(imm, p.reshape(1, -1))[0] - level)

        vals = [val(v) for v in poly]
        eps = 1e-13 * max(1.0, level)
        if all(v <= eps for v in vals):
            return [poly]
        if all(v >= -eps for v in vals):
            return []
        out = []
        for idx in range(len(poly)):
            a, b = poly[idx], poly[(idx + 1) % len(poly)]
            va, vb = vals[idx], vals[(idx + 1) % len(poly)]
            if va <= eps:
                out.append(a)
            if (va < -eps and vb > eps) or (va > eps and vb < -eps):
                out.append(crossing(a, b, tag, level))
        return [out] if len(out) >= 3 else []

    triangles = []
    for i in range(m0):
        for j in range(m1):
            quad = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
            if len(set(quad)) < 4:
                continue
            for tri in ([quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]):
                polys = [tri]
                for tag, level, sign in levels:
                    nxt = []
                    for poly in polys:
                        nxt.extend(clip(poly, tag, level, sign))
                    polys = nxt
                for poly in polys:
                    for k in range(1, len(poly) - 1):
                        triangles.append((poly[0], poly[k], poly[k + 1]))

    if not triangles:
        raise MeshFailure(
            f"{imm.name}: no mesh cells inside {region.rho} < r < {region.R}"
        )

    all_verts = np.vstack([verts] + [np.asarray(extra)]) if extra else verts
    tris = np.asarray(triangles, dtype=int)

    # drop degenerate slivers, reindex to used vertices
    e1 = all_verts[tris[:, 1]] - all_verts[tris[:, 0]]
    e2 = all_verts[tris[:, 2]] - all_verts[tris[:, 0]]
    area2 = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    keep = np.abs(area2) > 1e-12 * h * h
    tris = tris[keep]
    area2 = area2[keep]
    swap = area2 < 0  # positive orientation in parameter space
    tris[swap] = tris[swap][:, [0, 2, 1]]

    used = np.unique(tris)
    remap = -np.ones(len(all_verts), dtype=int)
    remap[used] = np.arange(len(used))
    tris = remap[tris]
    final_verts = all_verts[used]
    rv_final = radius_values(imm, final_verts)

    tags = {"inner": [], "outer": [], "cut": []}
    tol_r = 1e-9
    for idx in range(len(final_verts)):
        if abs(rv_final[idx] - region.R) < tol_r * max(1.0, region.R):
            tags["outer"].append(idx)
        elif region.rho > 0 and abs(rv_final[idx] - region.rho) < tol_r * max(1.0, region.rho):
            tags["inner"].append(idx)
    notes = []
    for axis in range(2):
        if wraps[axis]:
            continue
        box_lo, box_hi = imm.chart.params[axis].min, imm.chart.params[axis].max
        for idx in range(len(final_verts)):
            x = final_verts[idx, axis]
            at_box_edge = (
                abs(x - box_lo) < 1e-10 * max(1.0, abs(box_lo))
                or abs(x - box_hi) < 1e-10 * max(1.0, abs(box_hi))
            )
            if at_box_edge and idx not in tags["outer"] and idx not in tags["inner"]:
                tags["cut"].append(idx)
    if tags["cut"]:
        notes.append(
            "region truncated by the chart window; cut edges carry artificial "
            "boundary data"
        )

    dof_map = _tie_periodic_seams(final_verts, wraps, wlo, whi)
    cent = final_verts[tris].mean(axis=1)
    g = geometry(imm, cent, order=1)
    return Mesh(
        imm,
        region,
        final_verts,
        tris,
        {k: np.asarray(sorted(set(v)), dtype=int) for k, v in tags.items()},
        h,
        g.metric,
        g.sqrt_det,
        rv_final,
        dof_map=dof_map,
        dof_count=int(dof_map.max()) + 1 if len(dof_map) else 0,
        notes=tuple(notes),
    )


def _tie_periodic_seams(verts, wraps, wlo, whi):
    """Identify duplicate seam vertices of periodic axes as shared dofs."""
    V = len(verts)
    parent = np.arange(V)

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ax, per in enumerate(wraps):
        if not per:
            continue
        span = whi[ax] - wlo[ax]
        tol = 1e-9 * max(span, 1.0)
        left = np.nonzero(np.abs(verts[:, ax] - wlo[ax]) < tol)[0]
        right = np.nonzero(np.abs(verts[:, ax] - whi[ax]) < tol)[0]
        other = [i for i in range(verts.shape[1]) if i != ax]
        lkey = verts[np.ix_(left, other)].ravel()
        rkey = verts[np.ix_(right, other)].ravel()
        order_l = np.argsort(lkey)
        order_r = np.argsort(rkey)
        li, ri = 0, 0
        while li < len(left) and ri < len(right):
            a, b = lkey[order_l[li]], rkey[order_r[ri]]
            if abs(a - b) < 1e-6 * max(1.0, abs(a)):
                ra, rb = root(left[order_l[li]]), root(right[order_r[ri]])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
                li += 1
                ri += 1
            elif a < b:
                li += 1
            else:
                ri += 1
    reps = np.array([root(i) for i in range(V)])
    uniq, dof = np.unique(reps, return_inverse=True)
    return dof


# --- assembly and solves -----------------------------------------------------------

_REF_GRAD = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])  # barycentric gradients


def assemble(mesh: Mesh):
    """Stiffness matrix, Poisson load (f = 1) and lumped mass, induced metric."""
    if mesh.vertices.shape[1] == 1:
        return _assemble_segments(mesh)
    verts, tris = mesh.vertices, mesh.simplices
    p0, p1, p2 = (verts[tris[:, k]] for k in range(3))
    M = np.stack([p1 - p0, p2 - p0], axis=2)  # (S, 2, 2), columns are edges
    det = np.linalg.det(M)
    area = 0.5 * np.abs(det)
    Minv = np.linalg.inv(M)
    G = np.einsum("ski,vk->svi", Minv, _REF_GRAD)  # (S, 3, 2) param-space gradients
    ginv = np.linalg.inv(mesh.metric)
    Kloc = np.einsum(
        "s,svi,sij,swj->svw", area * mesh.sqrt_det, G, ginv, G
    )
    dofs = mesh.dof_map[tris]
    rows = np.repeat(dofs, 3, axis=1).ravel()
    cols = np.tile(dofs, (1, 3)).ravel()
    K = sparse.coo_matrix(
        (Kloc.ravel(), (rows, cols)), shape=(mesh.dof_count,) * 2
    ).tocsr()
    lump = area * mesh.sqrt_det / 3.0
    load = np.zeros(mesh.dof_count)
    np.add.at(load, dofs.ravel(), np.repeat(lump, 3))
    return K, load


def _assemble_segments(mesh: Mesh):
    verts, segs = mesh.vertices, mesh.simplices
    lengths = np.abs(verts[segs[:, 1], 0] - verts[segs[:, 0], 0])
    ginv = 1.0 / mesh.metric[:, 0, 0]
    w = mesh.sqrt_det * ginv / lengths
    V = mesh.dof_count
    dofs = mesh.dof_map[segs]
    rows = np.concatenate([dofs[:, 0], dofs[:, 1], dofs[:, 0], dofs[:, 1]])
    cols = np.concatenate([dofs[:, 0], dofs[:, 1], dofs[:, 1], dofs[:, 0]])
    vals = np.concatenate([w, w, -w, -w])
    K = sparse.coo_matrix((vals, (rows, cols)), shape=(V, V)).tocsr()
    lump = mesh.sqrt_det * lengths / 2.0
    load = np.zeros(V)
    np.add.at(load, dofs.ravel(), np.repeat(lump, 2))
    return K, load


@dataclass
class DirichletSolution:
    values: np.ndarray
    energy: float
    residual: float
    iterations_capped: int
    mesh: Mesh


def _check_components(mesh: Mesh, K, dirichlet_idx):
    n_comp, labels = connected_components(K != 0, directed=False)
    if n_comp <= 1:
        return
    with_bc = set(labels[dirichlet_idx])
    missing = [c for c in range(n_comp) if c not in with_bc]
    if missing:
        raise DisconnectedRegion(missing)


def solve_dirichlet(mesh: Mesh, K, rhs, bc_values: dict) -> DirichletSolution:
    """Reduce to the free dofs and solve by Jacobi-preconditioned CG.

    Boundary values are given per vertex; the returned field is also expanded
    back to vertices (periodic seam copies share their dof value).
    """
    V = mesh.dof_count
    fixed = np.zeros(V, bool)
    u = np.zeros(V)
    for idx, val in bc_values.items():
        fixed[mesh.dof_map[idx]] = True
        u[mesh.dof_map[idx]] = val
    if not fixed.any():
        raise MeshFailure("Dirichlet problem without any boundary vertices")
    _check_components(mesh, K, np.nonzero(fixed)[0])
    free = ~fixed
    Kff = K[free][:, free]
    b = rhs[free] - K[free][:, fixed] @ u[fixed]
    diag = Kff.diagonal()
    diag[diag <= 0] = 1.0
    precond = sparse.diags(1.0 / diag)
    cap = int(50 * math.sqrt(V)) + 10
    x, info = _cg(Kff, b, M=precond, rtol=1e-10, maxiter=cap)
    if info > 0:
        raise SolverDivergence(
            f"conjugate gradients missed 1e-10 within {cap} iterations"
        )
    u[free] = x
    res = float(np.linalg.norm(Kff @ x - b) / max(np.linalg.norm(b), 1e-300))
    energy = float(u @ (K @ u))
    return DirichletSolution(u[mesh.dof_map], energy, res, cap, mesh)


def _cg(A, b, M, rtol, maxiter):
    try:
        return cg(A, b, M=M, rtol=rtol, maxiter=maxiter)
    except TypeError:  # older scipy spells it tol
        return cg(A, b, M=M, tol=rtol, maxiter=maxiter)


# --- capacity ---------------------------------------------------------------------


@dataclass
class CapacityResult:
    cap: float  # Dirichlet energy of the equilibrium potential
    boundary_flux_form: float  # independent evaluation along the inner boundary
    solution: DirichletSolution
    rho: float
    R: float


def solve_laplace(mesh: Mesh) -> DirichletSolution:
    """Equilibrium potential: 1 on the inner boundary, 0 on the outer."""
    K, _ = assemble(mesh)
    inner = mesh.tags.get("inner", np.empty(0, int))
    outer = mesh.tags.get("outer", np.empty(0, int))
    if len(inner) == 0 or len(outer) == 0:
        raise MeshFailure("capacity needs both boundary components")
    bc = {int(i): 1.0 for i in inner}
    bc.update({int(i): 0.0 for i in outer})
    for i in mesh.tags.get("cut", ()):  # window cuts are grounded
        bc.setdefault(int(i), 0.0)
    return solve_dirichlet(mesh, K, np.zeros(mesh.dof_count), bc)


def capacity(imm: Immersion, rho: float, R: float, h: float = 0.05) -> CapacityResult:
    mesh = mesh_region(imm, ExtrinsicRegion(imm, rho, R), h)
    sol = solve_laplace(mesh)
    flux = _boundary_gradient_integral(mesh, sol.values, "inner")
    return CapacityResult(sol.energy, flux, sol, rho, R)


def _boundary_gradient_integral(mesh: Mesh, u, tag):
    """Integral of |grad u| along the tagged boundary (per-triangle gradients)."""
    if mesh.vertices.shape[1] != 2:
        raise DimensionUnsupported("boundary gradient integral needs a surface mesh")
    tris, verts = mesh.simplices, mesh.vertices
    edge_count = {}
    edge_tri = {}
    for s, tri in enumerate(tris):
        for a in range(3):
            e = (min(tri[a], tri[(a + 1) % 3]), max(tri[a], tri[(a + 1) % 3]))
            edge_count[e] = edge_count.get(e, 0) + 1
            edge_tri[e] = s
    tagged = set(int(i) for i in mesh.tags.get(tag, ()))
    total = []
    ginv = np.linalg.inv(mesh.metric)
    for e, cnt in edge_count.items():
        if cnt != 1 or e[0] not in tagged or e[1] not in tagged:
            continue
        s = edge_tri[e]
        tri = tris[s]
        p0 = verts[tri[0]]
        M = np.stack([verts[tri[1]] - p0, verts[tri[2]] - p0], axis=1)
        G = np.linalg.inv(M).T @ _REF_GRAD.T  # (2, 3)
        grad = G @ u[tri]
        norm2 = grad @ ginv[s] @ grad
        d = verts[e[1]] - verts[e[0]]
        length = math.sqrt(d @ mesh.metric[s] @ d)
        total.append(math.sqrt(max(norm2, 0.0)) * length)
    return float(math.fsum(total))


@dataclass
class CapacityBound:
    bound: float
    radii: np.ndarray
    flux: np.ndarray


def capacity_upper_bound(
    imm: Immersion, rho: float, R: float, grid_points: int = 21, resolution: int = 160
):
    """Dirichlet-energy bound from the radial foliation:
    cap <= ( integral of dt / flux(t) )^(-1) with flux(t) the level flux of r."""
    radii = np.linspace(rho, R, grid_points)
    flux = np.array(
        [boundary_area_and_flux(imm, t, resolution=resolution).flux for t in radii]
    )
    if np.any(flux <= 0):
        raise MeshFailure("vanishing level flux inside the window")
    integral = np.trapezoid(1.0 / flux, radii)
    return CapacityBound(1.0 / integral, radii, flux)


@dataclass
class CapacityLadder:
    rungs: list  # (R, cap) pairs on the growing radius ladder
    extrapolated: float | None  # Aitken-accelerated tail value, a trend only
    note: str = "extrapolation is a trend indicator, not a limit"

    def __iter__(self):
        return iter(self.rungs)


def capacity_ladder(imm: Immersion, rho: float, radii, h: float = 0.1):
    """cap(D_rho, D_R) along a growing radius ladder; a vanishing trend is
    the zero-capacity (parabolicity) diagnostic."""
    values = [capacity(imm, rho, R, h).cap for R in radii]
    extrapolated = None
    if len(values) >= 3:
        d1, d2 = values[-2] - values[-3], values[-1] - values[-2]
        if abs(d2 - d1) > 1e-15:
            extrapolated = values[-1] - d2 * d2 / (d2 - d1)
    return CapacityLadder(list(zip([float(R) for R in radii], values)), extrapolated)


# --- mean exit time -----------------------------------------------------------------


@dataclass
class ExitTimeField:
    mesh: Mesh
    values: np.ndarray  # discrete solution of  Delta E + 1 = 0, E = 0 on r = R
    transplanted: np.ndarray  # (R^2 - r^2) / (2n) at the vertices
    R: float


def solve_exit_time(imm: Immersion, R: float, h: float = 0.05) -> ExitTimeField:
    mesh = mesh_region(imm, ExtrinsicRegion(imm, 0.0, R), h)
    if len(mesh.tags.get("outer", ())) == 0:
        raise MeshFailure(
            "the extrinsic ball has no exit boundary (compact immersion swallowed it)"
        )
    K, load = assemble(mesh)
    bc = {int(i): 0.0 for i in mesh.tags["outer"]}
    for i in mesh.tags.get("cut", ()):
        bc.setdefault(int(i), 0.0)
    sol = solve_dirichlet(mesh, K, load, bc)
    n = imm.dim
    transplanted = (R**2 - mesh.r**2) / (2.0 * n)
    return ExitTimeField(mesh, sol.values, transplanted, R)


@dataclass
class ExitTimeComparison:
    R: float
    kind: str
    min_margin: float | None  # min of E - Ebar (direct flow comparison)
    ratio_target: float | None  # Cn/(Cn-1) for the inverse flow
    ratio_max_dev: float | None  # max relative deviation away from the boundary layer
    interior_count: int
    verdict: str
    notes: tuple = field(default=())


def exit_time_comparison(
    imm: Immersion, spec: SolitonSpec, R: float, h: float = 0.05, tol: float = 1e-3,
    field_: ExitTimeField | None = None,
) -> ExitTimeComparison:
    if field_ is None:
        field_ = solve_exit_time(imm, R, h)
    mesh = field_.mesh
    notes = tuple(mesh.notes)
    if spec.kind == "mcf":
        margin = float((field_.values - field_.transplanted).min())
        if spec.constant >= 0:
            ok = margin >= -tol
        else:
            ok = float((field_.transplanted - field_.values).min()) >= -tol
            margin = float((field_.transplanted - field_.values).min())
        return ExitTimeComparison(
            R, "mcf", margin, None, None, mesh.vertex_count,
            "PASS" if ok else "FAIL", notes,
        )
    target = spec.constant * imm.dim / (spec.constant * imm.dim - 1.0)
    interior = mesh.r <= R - 2.0 * h
    interior[mesh.boundary_vertices()] = False
    if not interior.any():
        raise MeshFailure("no interior vertices outside the boundary layer")
    ratio = field_.values[interior] / field_.transplanted[interior]
    dev = float(np.abs(ratio / target - 1.0).max())
    return ExitTimeComparison(
        R, "imcf", None, target, dev, int(interior.sum()),
        "PASS" if dev < max(tol, 0.02) else "FAIL", notes,
    )


@dataclass
class ExitTimeCharacterization:
    alpha: float
    alpha_spread: float
    implied_c_forward: float  # + alpha / ((alpha - 1) n), matches the worked flows
    implied_c_as_printed: float  # the opposite sign, kept for the record
    verdict: str
    notes: tuple


def soliton_from_exit_time(
    imm: Immersion, radii, h: float = 0.05, proportional_tol: float = 0.02
) -> ExitTimeCharacterization:
    """Estimate alpha with E_R = alpha * Ebar_R across extrinsic balls and
    invert it to an inverse-flow constant.

    Both signs of the inversion are reported: the proportionality law
    E = (Cn/(Cn-1)) Ebar inverts to C = + alpha/((alpha-1) n), while the
    characterization statement prints the negative of that; the worked
    cylinder (alpha = 2, n = 2, C = 1) matches the positive sign, so the
    verdict tests that one.  alpha near 1 means a minimal immersion, which
    admits no inverse-flow constant.
    """
    alphas = []
    for R in radii:
        field_ = solve_exit_time(imm, R, h)
        mesh = field_.mesh
        interior = mesh.r <= R - 2.0 * h
        interior[mesh.boundary_vertices()] = False
        if not interior.any():
            raise MeshFailure(f"R={R}: no interior vertices outside the boundary layer")
        ratio = field_.values[interior] / field_.transplanted[interior]
        med = float(np.median(ratio))
        spread = float(np.abs(ratio / med - 1.0).max())
        if spread > proportional_tol:
            raise NonProportional(
                f"R={R}: exit-time ratio varies by {spread:.3f} over the ball; "
                "the proportionality hypothesis fails"
            )
        alphas.append(med)
    alpha = float(np.mean(alphas))
    spread = float(np.ptp(alphas) / abs(alpha)) if len(alphas) > 1 else 0.0
    if spread > proportional_tol:
        raise NonProportional(
            f"exit-time ratio drifts across radii: alphas = {alphas}"
        )
    n = imm.dim
    if abs(alpha - 1.0) < 0.05:
        return ExitTimeCharacterization(
            alpha, spread, math.nan, math.nan, "REJECTED-MINIMAL",
            ("alpha = 1 means a minimal immersion: no inverse-flow constant exists",),
        )
    c_forward = alpha / ((alpha - 1.0) * n)
    check = imcf_residual(imm, c_forward, tol=1e-6)
    verdict = "CONSISTENT" if check.passed else "INCONSISTENT"
    return ExitTimeCharacterization(
        alpha, spread, c_forward, -c_forward, verdict,
        (f"inverse-flow residual at the forward constant: {check.sup:.3e}",),
    )


# --- export ------------------------------------------------------------------------


def export_off(mesh: Mesh, path) -> None:
    """OFF file with vertices at their ambient positions (first 3 coordinates)."""
    g = geometry(mesh.imm, mesh.vertices, order=1)
    X = g.X[:, :3]
    if X.shape[1] < 3:
        X = np.column_stack([X, np.zeros((len(X), 3 - X.shape[1]))])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("OFF\n")
        fh.write(f"{mesh.vertex_count} {len(mesh.simplices)} 0\n")
        for row in X:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")
        for s in mesh.simplices:
            fh.write(f"{len(s)} " + " ".join(str(int(v)) for v in s) + "\n")


def export_solution_csv(field_: ExitTimeField | DirichletSolution, path) -> None:
    mesh = field_.mesh
    values = field_.values
    with open(path, "w", encoding="utf-8") as fh:
        cols = [f"u{i + 1}" for i in range(mesh.vertices.shape[1])]
        fh.write("vertex," + ",".join(cols) + ",r,value\n")
        for i in range(mesh.vertex_count):
            coords = ",".join(f"{x:.17g}" for x in mesh.vertices[i])
            fh.write(f"{i},{coords},{mesh.r[i]:.17g},{values[i]:.17g}\n")
