"""P1 finite element assembly of the weighted Neumann weak forms.

S^2 chart domains use the conformally flat form: Euclidean stiffness and a
mass matrix weighted by p(s)^2.  Rotationally symmetric S^3 domains are
assembled per azimuthal mode m on the meridian half-strip with the weight
sin^2(theta) sin(phi); for m >= 1 the centrifugal potential carries the
1/sin(phi) factor whose integrable blow-up at the symmetry lines is handled
by interior-point quadrature (the weight itself enforces decay weakly, no
essential condition is imposed).

Neumann boundary conditions are natural: nothing is imposed on boundary
rows, so the constant vector spans the stiffness kernel whenever m is 0.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from sphereig.errors import InputError, PointOutsideMeshError, SolverError
from sphereig import eigensolve

__all__ = [
    "AssembledSystem",
    "assemble_s2",
    "assemble_s3_axisym",
    "neumann_spectrum",
    "interpolate",
    "export_matrix",
]

_MIN_AREA = 1e-14

# mid-edge rule: degree-2 exact, nodes strictly inside the closed triangle
_MID_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
_MID_W = np.array([1.0, 1.0, 1.0]) / 3.0

# 7-point degree-5 rule, all nodes in the open triangle; used next to the
# S^3 symmetry lines where the potential weight is singular
_A1 = 0.059715871789770
_B1 = 0.470142064105115
_A2 = 0.797426985353087
_B2 = 0.101286507323456
_P7_BARY = np.array([
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
_P7_W = np.array([0.225,
                  0.132394152788506, 0.132394152788506, 0.132394152788506,
                  0.125939180544827, 0.125939180544827, 0.125939180544827])


@dataclass
class AssembledSystem:
    """Stiffness/mass pair of one discretized eigenproblem."""

    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    n: int
    mode_m: int | None = None

    @property
    def K(self):
        return self.stiffness

    @property
    def M(self):
        return self.mass


def _grads_and_areas(mesh):
    tc = mesh.triangle_coords()
    d1 = tc[:, 1] - tc[:, 0]
    d2 = tc[:, 2] - tc[:, 0]
    det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
    areas = 0.5 * det
    if np.min(areas) < _MIN_AREA:
        raise InputError(f"degenerate triangle with area {np.min(areas):.2e}")
    # gradients of the barycentric functions on each triangle
    grads = np.empty((tc.shape[0], 3, 2))
    grads[:, 1, 0] = d2[:, 1] / det
    grads[:, 1, 1] = -d2[:, 0] / det
    grads[:, 2, 0] = -d1[:, 1] / det
    grads[:, 2, 1] = d1[:, 0] / det
    grads[:, 0] = -grads[:, 1] - grads[:, 2]
    return tc, grads, areas


def _scatter(mesh, local):
    """Accumulate (nt, 3, 3) local matrices into a global CSR matrix."""
    tri = mesh.triangles
    n = mesh.n_vertices
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n))
    return mat.tocsr()


def _weighted_mass_local(tc, areas, weight_fn, bary, wq):
    pts = np.einsum("qj,tjd->tqd", bary, tc)
    w = weight_fn(pts)                                # (nt, nq)
    lam = bary                                        # (nq, 3) P1 values at nodes
    return np.einsum("tq,q,qi,qj->tij", w, wq, lam, lam) * areas[:, None, None]


def assemble_s2(mesh):
    """Euclidean stiffness and p(s)^2-weighted mass on a chart mesh."""
    if mesh.plane != "chart":
        raise InputError("assemble_s2 expects a chart-plane mesh")
    tc, grads, areas = _grads_and_areas(mesh)
    k_local = np.einsum("tid,tjd->tij", grads, grads) * areas[:, None, None]

    def weight(pts):
        s2 = pts[..., 0] ** 2 + pts[..., 1] ** 2
        return (2.0 / (1.0 + s2)) ** 2

    m_local = _weighted_mass_local(tc, areas, weight, _MID_BARY, _MID_W)
    return AssembledSystem(stiffness=_scatter(mesh, k_local),
                           mass=_scatter(mesh, m_local),
                           n=mesh.n_vertices, mode_m=None)


def assemble_s3_axisym(mesh, mode_m):
    """Per-mode weak form on the meridian strip of an S^3 revolution domain.

    K = int [v_t w_t sin^2(t) sin(p) + v_p w_p sin(p)]
        + m^2 int v w / sin(p),
    M = int v w sin^2(t) sin(p),
    with (t, p) = (theta, phi).  The 2*pi azimuthal factor cancels in every
    Rayleigh quotient and is left out.
    """
    if mesh.plane != "meridian":
        raise InputError("assemble_s3_axisym expects a meridian-plane mesh")
    if mode_m < 0:
        raise InputError("mode_m must be >= 0")
    tc, grads, areas = _grads_and_areas(mesh)

    cent = tc.mean(axis=1)
    a_w = np.sin(cent[:, 0]) ** 2 * np.sin(cent[:, 1])
    b_w = np.sin(cent[:, 1])
    k_local = (a_w[:, None, None]
               * np.einsum("ti,tj->tij", grads[:, :, 0], grads[:, :, 0])
               + b_w[:, None, None]
               * np.einsum("ti,tj->tij", grads[:, :, 1], grads[:, :, 1]))
    k_local *= areas[:, None, None]

    # triangles touching a symmetry line get the interior-point rule
    v_theta = tc[..., 0]
    v_phi = tc[..., 1]
    singular = (np.any(v_theta < 1e-12, axis=1)
                | np.any(v_phi < 1e-12, axis=1)
                | np.any(v_phi > math.pi - 1e-12, axis=1))

    def mass_weight(pts):
        return np.sin(pts[..., 0]) ** 2 * np.sin(pts[..., 1])

    def pot_weight(pts):
        return 1.0 / np.sin(pts[..., 1])

    m_local = np.empty((tc.shape[0], 3, 3))
    m_local[~singular] = _weighted_mass_local(tc[~singular], areas[~singular],
                                              mass_weight, _MID_BARY, _MID_W)
    if np.any(singular):
        m_local[singular] = _weighted_mass_local(tc[singular], areas[singular],
                                                 mass_weight, _P7_BARY, _P7_W)
    K = _scatter(mesh, k_local)

    if mode_m >= 1:
        p_local = np.empty((tc.shape[0], 3, 3))
        p_local[~singular] = _weighted_mass_local(tc[~singular], areas[~singular],
                                                  pot_weight, _MID_BARY, _MID_W)
        if np.any(singular):
            p_local[singular] = _weighted_mass_local(tc[singular], areas[singular],
                                                     pot_weight, _P7_BARY, _P7_W)
        K = (K + mode_m ** 2 * _scatter(mesh, p_local)).tocsr()

    return AssembledSystem(stiffness=K, mass=_scatter(mesh, m_local),
                           n=mesh.n_vertices, mode_m=mode_m)


def assemble_phi_energy(mesh):
    """Matrix of the meridian phi-derivative energy int v_phi w_phi sin(phi).

    Vanishes on zonal (phi-independent) vertex functions; used to classify
    m = 0 eigenvectors by their angular structure.
    """
    if mesh.plane != "meridian":
        raise InputError("assemble_phi_energy expects a meridian-plane mesh")
    tc, grads, areas = _grads_and_areas(mesh)
    cent = tc.mean(axis=1)
    b_w = np.sin(cent[:, 1])
    b_local = (b_w[:, None, None]
               * np.einsum("ti,tj->tij", grads[:, :, 1], grads[:, :, 1])
               * areas[:, None, None])
    return _scatter(mesh, b_local)


DENSE_SWITCH = 900


def neumann_spectrum(system, count):
    """Ascending generalized eigenvalues of K x = mu M x with M-orthonormal vectors."""
    if count < 1:
        raise InputError("count must be >= 1")
    if count > system.n - 2:
        raise InputError(f"count={count} too large for n={system.n}")
    if system.n <= DENSE_SWITCH:
        vals, vecs = eigensolve.dense_generalized(system.K, system.M, count)
    else:
        vals, vecs = eigensolve.lanczos_shift_invert(system.K, system.M, count)
    vals, vecs = eigensolve.polish(system.K, system.M, vals, vecs)
    res = eigensolve.residual_norms(system.K, system.M, vals, vecs)
    if np.max(res) > 1e-8:
        raise SolverError(f"eigen residual {np.max(res):.2e} above 1e-8")
    return vals, vecs


def _tri_finder(mesh):
    if getattr(mesh, "_finder", None) is None:
        from matplotlib.tri import Triangulation

        tri = Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1],
                            mesh.triangles)
        mesh._finder = (tri.get_trifinder(), tri)
    return mesh._finder[0]


def interpolate(mesh, values, point):
    """Barycentric P1 interpolation of a vertex function at a chart point."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != mesh.n_vertices:
        raise InputError("vertex function length mismatch")
    x, y = float(point[0]), float(point[1])
    idx = int(_tri_finder(mesh)(x, y))
    if idx < 0:
        raise PointOutsideMeshError(f"point ({x}, {y}) outside the mesh")
    tri = mesh.triangles[idx]
    p0, p1, p2 = mesh.vertices[tri]
    det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
    l1 = ((x - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (y - p0[1])) / det
    l2 = ((p1[0] - p0[0]) * (y - p0[1]) - (x - p0[0]) * (p1[1] - p0[1])) / det
    l0 = 1.0 - l1 - l2
    return float(values[tri[0]] * l0 + values[tri[1]] * l1 + values[tri[2]] * l2)


def export_matrix(mat, path):
    """Coordinate text export of the symmetric lower triangle: `i j value`."""
    lower = sp.tril(mat).tocoo()
    order = np.lexsort((lower.col, lower.row))
    with open(path, "w", newline="\n") as fh:
        for r, c, v in zip(lower.row[order], lower.col[order], lower.data[order]):
            fh.write(f"{r} {c} {v:.17g}\n")
