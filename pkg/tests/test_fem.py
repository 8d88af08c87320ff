import math

import numpy as np
import pytest

from sphereig.cap_spectrum import CapProblem, solve_mode
from sphereig.errors import InputError, PointOutsideMeshError
from sphereig.fem import (assemble_phi_energy, assemble_s2,
                          assemble_s3_axisym, export_matrix, interpolate,
                          neumann_spectrum)
from sphereig.mesh import (DomainSpec, TriangleMesh, build_meridian_mesh,
                           build_planar_mesh, mesh_volume, refine)

PI = math.pi


def _single_triangle():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    tris = np.array([[0, 1, 2]])
    bnd = np.array([[0, 1], [1, 2], [2, 0]])
    return TriangleMesh(vertices=verts, triangles=tris, boundary_edges=bnd,
                        h=1.0, plane="chart")


def test_reference_triangle_stiffness():
    system = assemble_s2(_single_triangle())
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    assert np.max(np.abs(system.K.toarray() - expected)) < 1e-15


def test_degenerate_triangle_rejected():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 1e-16]])
    mesh = TriangleMesh(vertices=verts, triangles=np.array([[0, 1, 2]]),
                        boundary_edges=np.empty((0, 2), dtype=int), h=1.0,
                        plane="chart")
    with pytest.raises(InputError):
        assemble_s2(mesh)


@pytest.fixture(scope="module")
def cap_mesh():
    return build_planar_mesh(DomainSpec(kind="cap", dim=2, gamma=PI / 3), 0.08)


@pytest.fixture(scope="module")
def cap_system(cap_mesh):
    return assemble_s2(cap_mesh)


def test_total_mass_equals_mesh_volume(cap_mesh, cap_system):
    spec = DomainSpec(kind="cap", dim=2, gamma=PI / 3)
    assert abs(cap_system.M.sum() - mesh_volume(cap_mesh, spec).value) < 1e-12


def test_constant_in_stiffness_kernel(cap_system):
    ones = np.ones(cap_system.n)
    assert np.max(np.abs(cap_system.K @ ones)) < 1e-12


def test_spectrum_zero_mode_and_orthonormality(cap_system):
    vals, vecs = neumann_spectrum(cap_system, 4)
    assert abs(vals[0]) < 1e-10
    spread = np.max(vecs[:, 0]) - np.min(vecs[:, 0])
    assert spread < 1e-8 * np.max(np.abs(vecs[:, 0]))
    gram = vecs.T @ (cap_system.M @ vecs)
    assert np.max(np.abs(gram - np.eye(4))) < 1e-10


def test_hemisphere_degenerate_pair():
    mesh = build_planar_mesh(DomainSpec(kind="cap", dim=2, gamma=PI / 2), 0.05)
    vals, _ = neumann_spectrum(assemble_s2(mesh), 3)
    assert abs(vals[1] - 2.0) < 1e-2
    assert abs(vals[2] - 2.0) < 1e-2
    assert abs(vals[1] - vals[2]) / vals[1] < 1e-3


def test_s2_eigenvalue_convergence_second_order(cap_mesh):
    mu_exact = solve_mode(CapProblem(dim=2, gamma=PI / 3, mode_l=1), 1)[0].mu
    errs, hs = [], []
    mesh = cap_mesh
    for _ in range(3):
        vals, _ = neumann_spectrum(assemble_s2(mesh), 2)
        errs.append(vals[1] - mu_exact)
        hs.append(mesh.h)
        mesh = refine(mesh)
    assert all(e > 0.0 for e in errs)          # conforming upper bounds
    order = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert order == pytest.approx(2.0, abs=0.3)


@pytest.fixture(scope="module")
def meridian_mesh():
    return build_meridian_mesh(DomainSpec(kind="cap", dim=3, gamma=PI / 3), 0.04)


def test_s3_mode0_kernel(meridian_mesh):
    system = assemble_s3_axisym(meridian_mesh, 0)
    assert np.max(np.abs(system.K @ np.ones(system.n))) < 1e-12
    assert system.mode_m == 0


def test_s3_mode1_positive_definite(meridian_mesh):
    system = assemble_s3_axisym(meridian_mesh, 1)
    vals, _ = neumann_spectrum(system, 1)
    assert vals[0] > 0.5


def test_s3_rejects_negative_mode(meridian_mesh):
    with pytest.raises(InputError):
        assemble_s3_axisym(meridian_mesh, -1)


def test_s3_cross_check_tilt_and_zonal(meridian_mesh):
    """m=0/m=1 spectra against the radial cap solver, zonal modes classified
    by their meridian angular energy."""
    mu11 = solve_mode(CapProblem(dim=3, gamma=PI / 3, mode_l=1), 1)[0].mu
    mu02 = solve_mode(CapProblem(dim=3, gamma=PI / 3, mode_l=0), 2)[1].mu

    s1 = assemble_s3_axisym(meridian_mesh, 1)
    v1, _ = neumann_spectrum(s1, 2)
    assert abs(v1[0] - mu11) / mu11 < 1e-3

    s0 = assemble_s3_axisym(meridian_mesh, 0)
    v0, V0 = neumann_spectrum(s0, 6)
    B = assemble_phi_energy(meridian_mesh)
    zonal = []
    for j in range(1, 6):
        x = V0[:, j]
        frac = float(x @ (B @ x)) / float(x @ (s0.K @ x))
        if frac < 0.05:
            zonal.append(v0[j])
    assert zonal, "no zonal mode found among the first m=0 eigenvalues"
    assert abs(zonal[0] - mu02) / mu02 < 1e-3


def test_s3_mode2_matches_radial_l2(meridian_mesh):
    """The m=2 centrifugal term reproduces the l=2 radial eigenvalue."""
    mu21 = solve_mode(CapProblem(dim=3, gamma=PI / 3, mode_l=2), 1)[0].mu
    vals, _ = neumann_spectrum(assemble_s3_axisym(meridian_mesh, 2), 1)
    assert abs(vals[0] - mu21) / mu21 < 1e-3


def test_interpolate_reproduces_linears(cap_mesh):
    verts = cap_mesh.vertices
    linear = 2.0 * verts[:, 0] - 0.7 * verts[:, 1] + 0.25
    for pt in [(0.1, 0.05), (-0.2, 0.1), tuple(verts[10])]:
        exact = 2.0 * pt[0] - 0.7 * pt[1] + 0.25
        assert abs(interpolate(cap_mesh, linear, pt) - exact) < 1e-14

    const = np.full(cap_mesh.n_vertices, 3.25)
    assert interpolate(cap_mesh, const, (0.07, -0.11)) == pytest.approx(3.25)


def test_interpolate_outside_mesh(cap_mesh):
    with pytest.raises(PointOutsideMeshError):
        interpolate(cap_mesh, np.zeros(cap_mesh.n_vertices), (2.0, 2.0))


def test_export_matrix_lower_triangle(tmp_path, cap_system):
    path = tmp_path / "K.txt"
    export_matrix(cap_system.K, path)
    rows = [ln.split() for ln in path.read_text().splitlines()]
    assert all(int(r[0]) >= int(r[1]) for r in rows)
    # reassemble and compare against the symmetric original
    import scipy.sparse as sp

    i = np.array([int(r[0]) for r in rows])
    j = np.array([int(r[1]) for r in rows])
    v = np.array([float(r[2]) for r in rows])
    lower = sp.coo_matrix((v, (i, j)), shape=cap_system.K.shape).tocsr()
    full = lower + lower.T - sp.diags(lower.diagonal())
    assert abs(full - cap_system.K).max() < 1e-15
