"""Meshing, induced-metric Galerkin solves, capacity and mean exit time."""

import math

import numpy as np
import pytest

from solab.catalog import catalog
from solab.charts import ParamSpec, chart_from_sources
from solab.errors import (
    DimensionUnsupported,
    DisconnectedRegion,
    MeshFailure,
    NonProportional,
)
from solab.fem import (
    assemble,
    capacity,
    capacity_ladder,
    capacity_upper_bound,
    exit_time_comparison,
    export_off,
    export_solution_csv,
    mesh_region,
    solve_dirichlet,
    solve_exit_time,
    soliton_from_exit_time,
)
from solab.geometry import Immersion, RadialFunction, geometry, radial_laplacian
from solab.quadrature import ExtrinsicRegion
from solab.solitons import SolitonSpec


def steep_bowl():
    chart = chart_from_sources(
        2,
        3,
        ["u1", "u2", "(u1^2 + u2^2)/2"],
        [ParamSpec("u1", -3, 3), ParamSpec("u2", -3, 3)],
    )
    return Immersion(chart, properness_radius=3.0, name="steep_bowl")


# --- meshing -------------------------------------------------------------------


def test_annulus_mesh_topology():
    imm, _ = catalog("plane", n=2)
    mesh = mesh_region(imm, ExtrinsicRegion(imm, 1.0, math.e), h=0.1)
    assert mesh.euler_characteristic() == 0  # ring
    assert len(mesh.tags["inner"]) > 0 and len(mesh.tags["outer"]) > 0
    assert len(mesh.tags["cut"]) == 0
    # mesh area reproduces the annulus area
    v, tr = mesh.vertices, mesh.simplices
    e1, e2 = v[tr[:, 1]] - v[tr[:, 0]], v[tr[:, 2]] - v[tr[:, 0]]
    area = float(
        (0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]) * mesh.sqrt_det).sum()
    )
    assert area == pytest.approx(math.pi * (math.e**2 - 1), rel=2e-4)
    # boundary vertices sit exactly on the level sets
    assert np.abs(mesh.r[mesh.tags["outer"]] - math.e).max() < 1e-9
    assert np.abs(mesh.r[mesh.tags["inner"]] - 1.0).max() < 1e-9


def test_cylinder_strip_mesh_is_periodic():
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    mesh = mesh_region(imm, ExtrinsicRegion(imm, 0.0, 2.0), h=0.1)
    assert mesh.euler_characteristic() == 0  # closed strip around the cylinder
    # strip |z| < sqrt(3): both boundary circles present
    assert np.abs(np.abs(mesh.vertices[mesh.tags["outer"], 1]) - math.sqrt(3)).max() < 1e-9


def test_empty_region_is_a_mesh_failure():
    imm, _ = catalog("sphere", n=2, R=1.0)
    with pytest.raises(MeshFailure):
        mesh_region(imm, ExtrinsicRegion(imm, 0.0, 0.5), h=0.1)


def test_pde_dimension_guard():
    imm, _ = catalog("generalized_cylinder", n=3, k=1, rho=1.0)
    with pytest.raises(DimensionUnsupported):
        mesh_region(imm, ExtrinsicRegion(imm, 0.0, 2.0), h=0.2)


def test_one_dimensional_mesh():
    imm, _ = catalog("plane", n=1)
    mesh = mesh_region(imm, ExtrinsicRegion(imm, 1.0, 3.0), h=0.05)
    assert set(np.round(mesh.r[mesh.boundary_vertices()], 9)) <= {1.0, 3.0}


# --- capacity -------------------------------------------------------------------


def test_annulus_capacity_two_percent():
    imm, _ = catalog("plane", n=2)
    res = capacity(imm, 1.0, math.e, h=0.05)
    assert res.cap == pytest.approx(2 * math.pi, rel=0.02)
    # variational energy stays above the continuum minimum
    assert res.cap >= 2 * math.pi * (1 - 1e-6)


def test_capacity_monotone_under_growing_domain():
    imm, _ = catalog("plane", n=2)
    cyl, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0, z_extent=12.0)
    triples = [
        (imm, 1.0, 2.0, 4.0),
        (imm, 1.0, math.e, math.e**2),
        (cyl, math.sqrt(2.0), 3.0, 6.0),
    ]
    for obj, rho, r1, r2 in triples:
        c1 = capacity(obj, rho, r1, h=0.08).cap
        c2 = capacity(obj, rho, r2, h=0.08).cap
        assert c1 >= c2 - 0.02 * c1
    # doubling the log-width halves the annulus capacity: cap(1, e^2) = pi
    plane_far = capacity(imm, 1.0, math.e**2, h=0.08).cap
    assert plane_far == pytest.approx(math.pi, rel=0.03)


def test_capacity_below_radial_foliation_bound():
    imm, _ = catalog("plane", n=2)
    res = capacity(imm, 1.0, math.e, h=0.05)
    bound = capacity_upper_bound(imm, 1.0, math.e)
    assert bound.bound == pytest.approx(2 * math.pi, rel=1e-3)  # tight for the annulus
    assert res.cap <= bound.bound * 1.05

    cyl, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    resc = capacity(cyl, math.sqrt(2.0), 4.0, h=0.06)
    boundc = capacity_upper_bound(cyl, math.sqrt(2.0), 4.0)
    assert resc.cap <= boundc.bound * 1.05
    # hand value: cap = 2 * 2 pi / (z_R - z_rho)
    hand = 4 * math.pi / (math.sqrt(16.0 - 1.0) - 1.0)
    assert resc.cap == pytest.approx(hand, rel=0.02)


def test_cylinder_capacity_ladder_decays():
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0, z_extent=12.0)
    rungs = capacity_ladder(imm, math.sqrt(2.0), [2 * math.sqrt(2), 4 * math.sqrt(2), 8 * math.sqrt(2)], h=0.1)
    caps = [c for _, c in rungs]
    for a, b in zip(caps, caps[1:]):
        assert b <= 0.7 * a  # parabolic trend: >= 30% decay per radius doubling


def test_energy_identity_against_boundary_flux():
    imm, _ = catalog("plane", n=2)
    res = capacity(imm, 1.0, math.e, h=0.04)
    assert res.boundary_flux_form == pytest.approx(res.cap, rel=0.02)


def test_discrete_maximum_principle_on_aligned_mesh():
    # grid spacing chosen so the level circles land on grid lines: the mesh is
    # unclipped right triangles and the discrete maximum principle is exact
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    z1, z2 = math.sqrt(2.0**2 - 1), math.sqrt(3.0**2 - 1)
    h = (z2 - z1) / 24
    res = capacity(imm, 2.0, 3.0, h=h)
    u = res.solution.values
    assert u.min() >= -1e-9 and u.max() <= 1.0 + 1e-9


def test_galerkin_convergence_second_order():
    imm, _ = catalog("plane", n=2)
    errs = []
    for h in (0.1, 0.05):
        field = solve_exit_time(imm, 1.0, h=h)
        exact = (1.0 - field.mesh.r**2) / 4.0
        K, lump = assemble(field.mesh)
        diff = (field.values - exact)[np.argsort(field.mesh.dof_map)]  # per dof
        dof_diff = np.zeros(field.mesh.dof_count)
        dof_diff[field.mesh.dof_map] = field.values - exact
        errs.append(math.sqrt(float((dof_diff**2 * lump).sum())))
    assert 2.5 < errs[0] / errs[1] < 8.0


def test_disconnected_component_without_boundary_rejected():
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    mesh = mesh_region(imm, ExtrinsicRegion(imm, math.sqrt(2.0), 3.0), h=0.1)
    K, load = assemble(mesh)
    upper = mesh.tags["outer"][mesh.vertices[mesh.tags["outer"], 1] > 0]
    with pytest.raises(DisconnectedRegion):
        solve_dirichlet(mesh, K, load, {int(i): 0.0 for i in upper})


def test_mesh_laplacian_matches_radial_laplacian():
    # lumped mesh Laplacian of r^2 against the closed radial expression; on a
    # chart with curved metric the agreement is first order or better
    imm, _ = catalog("castro_lerma", delta=1.0, lam=-0.5)
    errs = []
    for h in (0.1, 0.05):
        mesh = mesh_region(imm, ExtrinsicRegion(imm, 0.0, 2.5), h=h)
        K, lump = assemble(mesh)
        lap = -(K @ mesh.r**2) / lump
        bnd = set(mesh.boundary_vertices().tolist())
        ring = set()
        for s in mesh.simplices:
            if bnd & set(s.tolist()):
                ring |= set(s.tolist())
        interior = np.array(
            sorted(set(range(mesh.vertex_count)) - ring - set(mesh.dof_map[sorted(ring)].tolist()))
        )
        g = geometry(imm, mesh.vertices[interior])
        exact = radial_laplacian(g, RadialFunction.r_squared())
        errs.append(float(np.abs(lap[mesh.dof_map[interior]] - exact).max()))
    assert errs[1] < errs[0]
    assert 1.5 < errs[0] / errs[1] < 4.0


# --- exit time ------------------------------------------------------------------


def test_disk_exit_time_one_percent():
    imm, _ = catalog("plane", n=2)
    field = solve_exit_time(imm, 1.0, h=0.05)
    exact = (1.0 - field.mesh.r**2) / 4.0
    assert float(np.abs(field.values - exact).max()) < 0.01 * 0.25
    assert field.values.max() == pytest.approx(0.25, abs=2e-3)
    # minimum (zero) is attained exactly on the exit boundary
    interior = np.setdiff1d(np.arange(field.mesh.vertex_count), field.mesh.tags["outer"])
    assert field.values[interior].min() > 0.0


def test_sphere_ball_swallows_boundary():
    imm, _ = catalog("sphere", n=2, R=1.0)
    with pytest.raises(MeshFailure):
        solve_exit_time(imm, 1.5, h=0.1)


def test_cylinder_imcf_exit_ratio():
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    rep = exit_time_comparison(imm, SolitonSpec("imcf", 1.0), 2.0, h=0.05)
    assert rep.ratio_target == pytest.approx(2.0)
    assert rep.ratio_max_dev < 0.02
    assert rep.verdict == "PASS"


def test_cylinder_mcf_exit_comparison():
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    rep = exit_time_comparison(imm, SolitonSpec("mcf", 1.0), 2.0, h=0.05)
    assert rep.min_margin >= -1e-3
    assert rep.verdict == "PASS"


def test_expander_exit_comparison_reverses():
    # lam <= 0: the transplanted radial solution dominates, also on the
    # window-truncated chart (extra grounded cuts only lower the solution)
    imm, _ = catalog("castro_lerma", delta=1.0, lam=-0.5)
    rep = exit_time_comparison(imm, SolitonSpec("mcf", -0.5), 3.0, h=0.08)
    assert rep.min_margin >= -1e-9
    assert rep.verdict == "PASS"
    assert any("truncated" in n for n in rep.notes)


def test_plane_exit_time_is_euclidean():
    imm, _ = catalog("plane", n=2)
    rep = exit_time_comparison(imm, SolitonSpec("mcf", 0.0), 1.0, h=0.05)
    assert abs(rep.min_margin) < 1e-3


def test_exit_time_characterization_cylinder():
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    res = soliton_from_exit_time(imm, [1.6, 2.0, 2.4], h=0.05)
    assert res.alpha == pytest.approx(2.0, abs=5e-3)
    assert res.implied_c_forward == pytest.approx(1.0, abs=5e-3)
    assert res.implied_c_as_printed == pytest.approx(-res.implied_c_forward)
    assert res.verdict == "CONSISTENT"


def test_exit_time_characterization_plane_is_minimal():
    imm, _ = catalog("plane", n=2)
    res = soliton_from_exit_time(imm, [1.0, 1.5], h=0.05)
    assert res.verdict == "REJECTED-MINIMAL"
    assert res.alpha == pytest.approx(1.0, abs=1e-3)


def test_exit_time_characterization_rejects_drifting_ratio():
    with pytest.raises(NonProportional):
        soliton_from_exit_time(steep_bowl(), [1.5, 2.0], h=0.06)


# --- export ---------------------------------------------------------------------


def test_exports(tmp_path):
    imm, _ = catalog("generalized_cylinder", n=2, k=1, rho=1.0)
    field = solve_exit_time(imm, 1.5, h=0.1)
    off = tmp_path / "strip.off"
    export_off(field.mesh, off)
    head = off.read_text().splitlines()
    assert head[0] == "OFF"
    counts = head[1].split()
    assert int(counts[0]) == field.mesh.vertex_count
    assert int(counts[1]) == len(field.mesh.simplices)
    csv = tmp_path / "field.csv"
    export_solution_csv(field, csv)
    lines = csv.read_text().splitlines()
    assert lines[0] == "vertex,u1,u2,r,value"
    assert len(lines) == field.mesh.vertex_count + 1
