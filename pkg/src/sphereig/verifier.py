"""End-to-end verification of the harmonic-mean eigenvalue inequality.

For a hemisphere domain Omega the pipeline computes the low Neumann
spectrum by FEM, the equal-volume cap radius gamma, the cap eigenvalue
mu_1(D_gamma) by the radial solver, and the margin of

    sum_{i=1}^{N-1} 1/mu_i(Omega)  >=  (N-1)/mu_1(D_gamma).

It also realizes the mean-zero orientation for the radial test functions
(a two-angle Newton search on S^2), and checks the intermediate integral
inequalities of the comparison argument on exact-geometry quadrature.
"""

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from sphereig.errors import InputError, InvalidDomainError, SolverError
from sphereig.cap_spectrum import CapProblem, extend_profile, mu1_cap, solve_mode
from sphereig.fem import (_P7_BARY, _P7_W, assemble_s2, assemble_s3_axisym,
                          neumann_spectrum)
from sphereig.mesh import (DomainSpec, build_meridian_mesh, build_planar_mesh,
                           mesh_volume, refine, _polygon_mesh, _MIDEDGE)
from sphereig.stereographic import (chart_to_sphere, equivalent_radius,
                                    unit_ball_volume)

__all__ = [
    "Rotation",
    "ProofSteps",
    "InequalityReport",
    "verify_domain",
    "find_balancing_rotation",
    "check_proof_steps",
    "sweep",
    "corpus",
    "load_domain_spec",
    "write_csv",
    "domain_quadrature",
    "margin_tolerance",
]

MARGIN_C = 3.0      # cap-calibrated constant in the h^2 part of the tolerance


def margin_tolerance(h):
    """Verification passes at margin >= -max(1e-3, C h^2)."""
    return max(1e-3, MARGIN_C * h * h)


# ---------------------------------------------------------------------------
# rotations of S^2 moving a chosen point to the North Pole


@dataclass(frozen=True)
class Rotation:
    """Rotation carrying the point at polar coordinates (alpha, beta) to the pole.

    For dim 3 only the trivial element is representable: moving the pole
    would break the revolution symmetry the meridian discretization needs.
    """

    alpha: float = 0.0
    beta: float = 0.0

    def matrix(self):
        ca, sa = math.cos(self.alpha), math.sin(self.alpha)
        cb, sb = math.cos(self.beta), math.sin(self.beta)
        rz = np.array([[cb, sb, 0.0], [-sb, cb, 0.0], [0.0, 0.0, 1.0]])
        ry = np.array([[ca, 0.0, -sa], [0.0, 1.0, 0.0], [sa, 0.0, ca]])
        return ry @ rz

    def is_identity(self):
        return abs(self.alpha) < 1e-15


def _rotated_frame(sphere_pts, rotation):
    """theta and chart direction cosines of sphere points in the rotated frame."""
    rp = sphere_pts @ rotation.matrix().T
    z = np.clip(rp[:, -1], -1.0, 1.0)
    theta = np.arccos(z)
    plane = rp[:, :-1]
    s = np.linalg.norm(plane, axis=1)
    safe = np.where(s > 1e-300, s, 1.0)
    dirs = plane / safe[:, None]
    dirs[s <= 1e-300] = 0.0
    return theta, dirs


# ---------------------------------------------------------------------------
# exact-geometry quadrature of hemisphere domains

_QUAD_PHI = 256
_QUAD_R = 48
_QUAD_GL = 64
_QUAD_POLY_H = 0.04


def _gl(n, a=0.0, b=1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    return a + (b - a) * 0.5 * (x + 1.0), (b - a) * 0.5 * w


@lru_cache(maxsize=64)
def domain_quadrature(spec):
    """Nodes and spherical-volume weights on the exact domain geometry.

    Chart domains return planar nodes with weights including p(s)^2;
    meridian domains return (theta, phi) nodes with weights including
    2 pi sin^2(theta) sin(phi).  Smooth star-shaped boundaries use a
    trapezoid (periodic) x Gauss-Legendre product rule; polygonal ones use
    a degree-5 rule on a fine triangulation of the exact polygon.
    """
    if spec.dim == 2 and spec.kind in ("cap", "disk_region", "perturbed_cap"):
        cx, cy = spec.center if spec.kind == "disk_region" else (0.0, 0.0)
        phis = 2.0 * math.pi * (np.arange(_QUAD_PHI) + 0.5) / _QUAD_PHI
        wphi = 2.0 * math.pi / _QUAD_PHI
        t, wt = _gl(_QUAD_R)
        R = spec.boundary_radius(phis)
        r = R[:, None] * t[None, :]
        x = cx + r * np.cos(phis)[:, None]
        y = cy + r * np.sin(phis)[:, None]
        jac = R[:, None] * wt[None, :] * r * wphi
        nodes = np.stack([x.ravel(), y.ravel()], axis=1)
        s2 = nodes[:, 0] ** 2 + nodes[:, 1] ** 2
        w = jac.ravel() * (2.0 / (1.0 + s2)) ** 2
        return nodes, w
    if spec.dim == 2 and spec.kind == "polygon_region":
        return _polygon_quadrature(np.asarray(spec.vertices, dtype=float), "chart")
    if spec.dim == 3 and spec.kind == "cap":
        th, wth = _gl(_QUAD_GL, 0.0, spec.gamma)
        ph, wph = _gl(_QUAD_GL, 0.0, math.pi)
        TT, PP = np.meshgrid(th, ph, indexing="ij")
        WW = wth[:, None] * wph[None, :]
        nodes = np.stack([TT.ravel(), PP.ravel()], axis=1)
        w = 2.0 * math.pi * WW.ravel() * np.sin(TT.ravel()) ** 2 * np.sin(PP.ravel())
        return nodes, w
    if spec.dim == 3 and spec.kind == "meridian_region":
        return _polygon_quadrature(np.asarray(spec.polyline, dtype=float), "meridian")
    raise InvalidDomainError(f"no quadrature rule for kind {spec.kind!r}")


def _polygon_quadrature(pts, plane):
    mesh = _polygon_mesh(pts, _QUAD_POLY_H, plane)
    tc = mesh.triangle_coords()
    areas = mesh.areas()
    nodes = np.einsum("qj,tjd->tqd", _P7_BARY, tc).reshape(-1, 2)
    w = (areas[:, None] * _P7_W[None, :]).ravel()
    if plane == "chart":
        s2 = nodes[:, 0] ** 2 + nodes[:, 1] ** 2
        w = w * (2.0 / (1.0 + s2)) ** 2
    else:
        w = 2.0 * math.pi * w * np.sin(nodes[:, 0]) ** 2 * np.sin(nodes[:, 1])
    return nodes, w


# ---------------------------------------------------------------------------
# radial integrals over the comparison cap


def _radial_integrals(G, dim):
    """(int g^2, int g^2/sin^2, int g'^2) over D_gamma with the sphere weight."""
    g = G.profile
    sp = g.hermite()
    spd = g.hermite_deriv()
    grid = g.theta_grid
    x, w = np.polynomial.legendre.leggauss(5)
    t = 0.5 * (x + 1.0)
    lefts, widths = grid[:-1], np.diff(grid)
    pts = (lefts[:, None] + widths[:, None] * t[None, :]).ravel()
    ww = (widths[:, None] * 0.5 * w[None, :]).ravel()
    sin_p = np.sin(pts)
    weight = sin_p ** (dim - 1)
    front = dim * unit_ball_volume(dim)
    vals = sp(pts)
    ratio = G.ratio(pts)
    dvals = spd(pts)
    i_g2 = front * float(np.sum(vals ** 2 * weight * ww))
    i_ratio2 = front * float(np.sum(ratio ** 2 * weight * ww))
    i_dg2 = front * float(np.sum(dvals ** 2 * weight * ww))
    return i_g2, i_ratio2, i_dg2


# ---------------------------------------------------------------------------
# balancing rotation (dim 2)


def find_balancing_rotation(spec, G, tol_factor=1e-12):
    """Pole position nulling the first-moment integrals of the test functions.

    Newton iteration on (alpha, beta) with a finite-difference Jacobian and
    step damping; falls back to a 32 x 32 pole grid when stalled.  Returns
    (rotation, residual, scale); success means residual < 1e-8 * scale.
    """
    if spec.dim != 2:
        raise InputError("the balancing search is a two-parameter dim-2 search")
    nodes, w = domain_quadrature(spec)
    sphere = chart_to_sphere(nodes)
    volume = float(np.sum(w))
    scale = float(G.plateau) * volume

    def moments(ab):
        theta, dirs = _rotated_frame(sphere, Rotation(alpha=ab[0], beta=ab[1]))
        phi = G.value(theta)
        return np.array([float(np.sum(w * phi * dirs[:, 0])),
                         float(np.sum(w * phi * dirs[:, 1]))])

    centroid = (w[:, None] * sphere).sum(axis=0)
    centroid /= np.linalg.norm(centroid)
    ab = np.array([math.acos(np.clip(centroid[2], -1.0, 1.0)),
                   math.atan2(centroid[1], centroid[0])])

    def newton(ab, iters=40):
        f = moments(ab)
        for _ in range(iters):
            if np.linalg.norm(f) <= tol_factor * scale:
                break
            step = 1e-6
            J = np.empty((2, 2))
            for j in range(2):
                e = np.zeros(2)
                e[j] = step
                J[:, j] = (moments(ab + e) - moments(ab - e)) / (2.0 * step)
            try:
                d = np.linalg.solve(J, -f)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            for _ in range(20):
                f_new = moments(ab + lam * d)
                if np.linalg.norm(f_new) < np.linalg.norm(f):
                    ab = ab + lam * d
                    f = f_new
                    break
                lam *= 0.5
            else:
                break
        return ab, f

    ab, f = newton(ab)
    if np.linalg.norm(f) > 1e-8 * scale:
        best = (np.linalg.norm(f), ab)
        for a in np.linspace(0.0, 1.2, 32):
            for b in np.linspace(0.0, 2.0 * math.pi, 32, endpoint=False):
                r = np.linalg.norm(moments(np.array([a, b])))
                if r < best[0]:
                    best = (r, np.array([a, b]))
        ab, f = newton(best[1])
    residual = float(np.linalg.norm(f))
    if residual > 1e-8 * scale:
        raise SolverError(
            f"balancing search stagnated at residual {residual:.3e} "
            f"(requires < {1e-8 * scale:.3e}); the zero exists, so this "
            "signals a numerical issue")
    return Rotation(alpha=float(ab[0]), beta=float(ab[1])), residual, scale


# ---------------------------------------------------------------------------
# proof-step checks


@dataclass
class ProofSteps:
    """Residuals of the intermediate inequalities and the trial-function data."""

    ratio_excess: float        # int_Omega G^2/sin^2 - int_Dgamma g^2/sin^2 (<= 0)
    mass_excess: float         # int_Omega G^2 - int_Dgamma g^2             (>= 0)
    rearrangement_max: float   # max over nodes of 1/mu_N - sum w_i/mu_i    (<= 0)
    trial_bounds: tuple         # ((lhs_i, rhs_i) per i), observed relation
    orthogonality: tuple   # ((i, j, integral) ...) measured residuals, dim 2
    equality_case: bool


def _direction_weights(spec, nodes, theta, dirs):
    """Squared direction cosines x_i^2/s^2 at quadrature nodes.

    dim 2: from the rotated chart directions.  dim 3 (revolution): the
    azimuthal angle is averaged analytically, and the worst case over it is
    handled separately in the pointwise check.
    """
    if spec.dim == 2:
        return np.stack([dirs[:, 0] ** 2, dirs[:, 1] ** 2], axis=1)
    phi = nodes[:, 1]
    return np.stack([np.cos(phi) ** 2,
                     0.5 * np.sin(phi) ** 2,
                     0.5 * np.sin(phi) ** 2], axis=1)


def check_proof_steps(spec, G, mus, rotation=None, mesh=None, eigvecs=None):
    """Evaluate the comparison-argument inequalities on the exact geometry.

    ``mus`` must hold at least the first N non-trivial eigenvalues of the
    domain, ascending.  The two integral inequalities compare Omega against
    the equal-volume cap; the rearrangement step is checked pointwise on
    the quadrature nodes with the computed eigenvalues.
    """
    N = spec.dim
    if len(mus) < N:
        raise InputError(f"need at least {N} eigenvalues, got {len(mus)}")
    mus = np.asarray(mus[:N], dtype=float)
    if np.any(mus <= 0.0):
        raise InputError("non-trivial eigenvalues must be positive")
    rotation = rotation or Rotation()

    nodes, w = domain_quadrature(spec)
    if spec.dim == 2:
        sphere = chart_to_sphere(nodes)
        theta, dirs = _rotated_frame(sphere, rotation)
    else:
        theta, dirs = nodes[:, 0], None

    ratio = G.ratio(theta)
    gvals = G.value(theta)
    i_g2, i_ratio2, i_dg2 = _radial_integrals(G, N)

    ratio_excess = float(np.sum(w * ratio ** 2)) - i_ratio2
    mass_excess = float(np.sum(w * gvals ** 2)) - i_g2

    dirw = _direction_weights(spec, nodes, theta, dirs)
    expr = 1.0 / mus[-1] - dirw @ (1.0 / mus)
    rearrangement = float(np.max(expr))
    if spec.dim == 3:
        # worst azimuth: the full weight sin^2(phi) on either fiber direction
        phi = nodes[:, 1]
        for k in (1, 2):
            alt = np.stack([np.cos(phi) ** 2,
                            np.sin(phi) ** 2 * (k == 1),
                            np.sin(phi) ** 2 * (k == 2)], axis=1)
            rearrangement = max(rearrangement,
                                float(np.max(1.0 / mus[-1] - alt @ (1.0 / mus))))

    trial_bounds = []
    for i in range(N):
        lhs_i = float(np.sum(w * gvals ** 2 * dirw[:, i]))
        rhs_i = (i_dg2 / (N * mus[i])
                 + float(np.sum(w * ratio ** 2 * (1.0 - dirw[:, i]))) / mus[i])
        trial_bounds.append((lhs_i, rhs_i))

    orth = []
    if spec.dim == 2 and mesh is not None and eigvecs is not None:
        tc = mesh.triangle_coords()
        areas = mesh.areas()
        mids = np.einsum("qj,tjd->tqd", _MIDEDGE, tc)
        flat = mids.reshape(-1, 2)
        s2 = flat[:, 0] ** 2 + flat[:, 1] ** 2
        wq = (areas[:, None] / 3.0 * (2.0 / (1.0 + s2)).reshape(mids.shape[:2]) ** 2)
        th_m, dir_m = _rotated_frame(chart_to_sphere(flat), rotation)
        phi_vals = G.value(th_m)
        tri = mesh.triangles
        for j in range(1, eigvecs.shape[1]):
            u = eigvecs[:, j]
            u_mid = (_MIDEDGE @ u[tri].T).T.ravel()
            for i in range(2):
                integrand = (phi_vals * dir_m[:, i] * u_mid).reshape(mids.shape[:2])
                orth.append((i + 1, j, float(np.sum(wq * integrand))))

    return ProofSteps(ratio_excess=ratio_excess, mass_excess=mass_excess,
                      rearrangement_max=rearrangement,
                      trial_bounds=tuple(trial_bounds), orthogonality=tuple(orth),
                      equality_case=spec.is_ball)


# ---------------------------------------------------------------------------
# the verification pipeline


@dataclass
class InequalityReport:
    """Everything the main inequality check produced for one domain."""

    dim: int
    eigenvalues: tuple            # mu_1 ... (ascending, excludes mu_0)
    domain_volume: float
    equivalent_gamma: float
    mu1_cap: float
    lhs: float
    rhs: float
    margin: float
    mesh_h: float
    refinements: int
    n_vertices: int
    spectrum_resolved: bool = True
    balancing_residual: float | None = None
    balancing_scale: float | None = None
    rotation: Rotation | None = None
    proof: ProofSteps | None = None
    name: str = ""

    def __post_init__(self):
        if not 0.0 < self.equivalent_gamma <= math.pi / 2.0 + 1e-12:
            raise SolverError(f"equivalent gamma {self.equivalent_gamma} out of range")
        if self.rhs <= 0.0 or any(m <= 0.0 for m in self.eigenvalues):
            raise SolverError("non-trivial eigenvalues and the cap bound must be positive")

    @property
    def passed(self):
        return self.margin >= -margin_tolerance(self.mesh_h)


def _merged_s3_spectrum(mesh, count):
    s0 = assemble_s3_axisym(mesh, 0)
    s1 = assemble_s3_axisym(mesh, 1)
    v0, V0 = neumann_spectrum(s0, count + 2)
    v1, V1 = neumann_spectrum(s1, count + 1)
    merged = np.sort(np.concatenate([v0[1:], np.repeat(v1, 2)]))
    return merged, (v0, V0, v1, V1)


def verify_domain(spec, h, count=None, refinements=0, proof_steps=False,
                  balance=True):
    """Full inequality check for one admissible hemisphere domain."""
    N = spec.dim
    count = int(count) if count is not None else N
    if count < N:
        raise InputError(f"count must cover the first N={N} eigenvalues")

    if N == 2:
        mesh = build_planar_mesh(spec, h)
    else:
        mesh = build_meridian_mesh(spec, h)
    for _ in range(refinements):
        mesh = refine(mesh)

    eigvecs = None
    if N == 2:
        system = assemble_s2(mesh)
        vals, vecs = neumann_spectrum(system, count + 2)
        mu0, mus = vals[0], vals[1:]
        eigvecs = vecs
    else:
        mus, _ = _merged_s3_spectrum(mesh, count)
        mu0 = 0.0
    if abs(mu0) > 1e-6:
        raise SolverError(f"constant mode not resolved: mu0 = {mu0}")
    resolved = bool(mus[count - 1] + 1e-10 < mus[count])
    mus = mus[:count]

    vol = mesh_volume(mesh, spec)
    gamma_eq = equivalent_radius(N, vol)
    cap = mu1_cap(N, gamma_eq)
    lhs = float(np.sum(1.0 / mus[:N - 1]))
    rhs = (N - 1) / cap.value
    margin = lhs - rhs

    rotation = Rotation()
    bal_res = bal_scale = None
    proof = None
    if (balance or proof_steps) and N == 2:
        g_pair = solve_mode(CapProblem(dim=2, gamma=gamma_eq, mode_l=1), 1)[0]
        G = extend_profile(g_pair, gamma_eq)
        if balance:
            rotation, bal_res, bal_scale = find_balancing_rotation(spec, G)
    if proof_steps:
        nodes, wq = domain_quadrature(spec)
        gamma_exact = equivalent_radius(N, float(np.sum(wq)))
        g_pair = solve_mode(CapProblem(dim=N, gamma=gamma_exact, mode_l=1), 1)[0]
        G_exact = extend_profile(g_pair, gamma_exact)
        proof = check_proof_steps(spec, G_exact, mus, rotation=rotation,
                                  mesh=mesh if N == 2 else None,
                                  eigvecs=eigvecs)

    return InequalityReport(
        dim=N, eigenvalues=tuple(float(m) for m in mus),
        domain_volume=vol.value, equivalent_gamma=gamma_eq,
        mu1_cap=cap.value, lhs=lhs, rhs=rhs, margin=margin,
        mesh_h=mesh.h, refinements=refinements, n_vertices=mesh.n_vertices,
        spectrum_resolved=resolved,
        balancing_residual=bal_res, balancing_scale=bal_scale,
        rotation=rotation, proof=proof)


# ---------------------------------------------------------------------------
# corpus, sweeps, file formats


def corpus():
    """The 20-domain verification corpus: (name, spec, equality_case)."""
    out = []
    for g in (0.45, 0.7, 1.0, math.pi / 3.0, math.pi / 2.0):
        out.append((f"s2_cap_{g:.3f}", DomainSpec(kind="cap", dim=2, gamma=g), True))
    perturbed = [
        (math.pi / 3.0, ((2, 0.15),)),
        (math.pi / 3.0, ((3, 0.15),)),
        (0.9, ((2, 0.2),)),
        (0.8, ((2, 0.1), (3, 0.1))),
        (1.0, ((4, 0.12),)),
        (0.7, ((2, 0.08), (4, 0.1))),
    ]
    for g, eps in perturbed:
        tag = "_".join(f"e{j}_{a:g}" for j, a in eps)
        out.append((f"s2_pert_{g:.3f}_{tag}",
                    DomainSpec(kind="perturbed_cap", dim=2, gamma=g, eps=eps), False))
    disks = [((0.25, 0.0), 0.35), ((0.15, 0.2), 0.3), ((0.3, 0.1), 0.25)]
    for c, r in disks:
        out.append((f"s2_disk_{c[0]:g}_{c[1]:g}_{r:g}",
                    DomainSpec(kind="disk_region", dim=2, center=c, radius=r), True))
    out.append(("s2_polygon_triangle",
                DomainSpec(kind="polygon_region", dim=2,
                           vertices=((0.55, 0.0), (-0.3, 0.5), (-0.3, -0.5))), False))
    for g in (0.7, math.pi / 3.0, 1.3):
        out.append((f"s3_cap_{g:.3f}", DomainSpec(kind="cap", dim=3, gamma=g), True))
    for g0, eps in ((0.8, 0.3), (1.0, -0.25)):
        out.append((f"s3_barrel_{g0:g}_{eps:g}", barrel_spec(g0, eps), False))
    return out


def barrel_spec(g0, eps, segments=48):
    """Revolution domain with meridian profile theta = g0 (1 + eps sin^2 phi)."""
    phis = np.linspace(0.0, math.pi, segments + 1)
    prof = g0 * (1.0 + eps * np.sin(phis) ** 2)
    poly = [(0.0, 0.0)]
    poly += [(float(prof[i]), float(phis[i])) for i in range(segments + 1)]
    poly += [(0.0, math.pi)]
    return DomainSpec(kind="meridian_region", dim=3, polyline=tuple(poly))


REPORT_COLUMNS = ("name", "dim", "h", "n_vertices", "volume", "gamma",
                  "mu1_cap", "mu1", "mu2", "mu3", "lhs", "rhs", "margin",
                  "balancing_residual", "ratio_excess", "mass_excess", "rearrangement_max",
                  "status")


def report_row(name, report, status="ok"):
    mus = list(report.eigenvalues) + [float("nan")] * 3
    return {
        "name": name, "dim": report.dim, "h": report.mesh_h,
        "n_vertices": report.n_vertices, "volume": report.domain_volume,
        "gamma": report.equivalent_gamma, "mu1_cap": report.mu1_cap,
        "mu1": mus[0], "mu2": mus[1], "mu3": mus[2],
        "lhs": report.lhs, "rhs": report.rhs, "margin": report.margin,
        "balancing_residual": (report.balancing_residual
                               if report.balancing_residual is not None
                               else float("nan")),
        "ratio_excess": report.proof.ratio_excess if report.proof else float("nan"),
        "mass_excess": report.proof.mass_excess if report.proof else float("nan"),
        "rearrangement_max": report.proof.rearrangement_max if report.proof else float("nan"),
        "status": status,
    }


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_csv(rows, path, columns=REPORT_COLUMNS):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c, "")) for c in columns) + "\n")


def sweep(template, param, values, h, cap_only=False, proof_steps=False):
    """One report row per parameter value; per-row failures are recorded.

    ``param`` is a DomainSpec field name (``gamma``, ``radius``) or
    ``eps_<j>`` for a perturbation amplitude.  With ``cap_only`` the rows
    carry just the radial cap data mu_1(D_gamma) against gamma.
    """
    rows = []
    for v in values:
        try:
            spec = _with_param(template, param, float(v))
            if cap_only:
                if spec.kind != "cap":
                    raise InputError("cap_only sweeps need a cap template")
                cap = mu1_cap(spec.dim, spec.gamma)
                rows.append({"name": f"cap_{v:.6f}", "dim": spec.dim,
                             "h": float("nan"), "gamma": spec.gamma,
                             "mu1_cap": cap.value, "mu1": cap.mu_11,
                             "mu2": cap.mu_02, "status": "ok"})
            else:
                rep = verify_domain(spec, h, proof_steps=proof_steps)
                rows.append(report_row(f"{param}={v:.6f}", rep))
        except (InputError, SolverError) as exc:
            rows.append({"name": f"{param}={v:.6f}", "status": f"error: {exc}"})
    return rows


def _with_param(spec, param, value):
    m = re.fullmatch(r"eps_(\d+)", param)
    if m:
        j = int(m.group(1))
        eps = tuple((jj, a) for jj, a in spec.eps if jj != j) + ((j, value),)
        return DomainSpec(kind="perturbed_cap", dim=spec.dim, gamma=spec.gamma,
                          eps=eps)
    if param == "gamma":
        return DomainSpec(kind=spec.kind, dim=spec.dim, gamma=value,
                          eps=spec.eps)
    if param == "radius":
        return DomainSpec(kind="disk_region", dim=2, center=spec.center,
                          radius=value)
    raise InputError(f"unknown sweep parameter {param!r}")


# ---------------------------------------------------------------------------
# domain spec files: `key = value` lines, # comments


_SAFE_EXPR = re.compile(r"^[0-9eE+\-*/. ()pi]*$")


def _num(text):
    text = text.strip()
    if not _SAFE_EXPR.match(text):
        raise InputError(f"invalid numeric value {text!r}")
    try:
        return float(eval(text, {"__builtins__": {}}, {"pi": math.pi}))
    except Exception as exc:
        raise InputError(f"invalid numeric value {text!r}: {exc}") from exc


def _pairs(text):
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise InputError(f"expected `x, y` pairs, got {chunk!r}")
        out.append((_num(parts[0]), _num(parts[1])))
    return tuple(out)


def load_domain_spec(path):
    """Parse a UTF-8 domain spec file into a DomainSpec."""
    data = {}
    eps = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected `key = value`")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lower()
            m = re.fullmatch(r"eps_(\d+)", key)
            if m:
                eps[int(m.group(1))] = _num(value)
            elif key in ("kind",):
                data["kind"] = value
            elif key == "dim":
                data["dim"] = int(_num(value))
            elif key == "gamma":
                data["gamma"] = _num(value)
            elif key == "radius":
                data["radius"] = _num(value)
            elif key == "center":
                pair = _pairs(value)
                if len(pair) != 1:
                    raise InputError(f"{path}:{lineno}: center needs one pair")
                data["center"] = pair[0]
            elif key == "vertices":
                data["vertices"] = _pairs(value)
            elif key == "polyline":
                data["polyline"] = _pairs(value)
            else:
                raise InputError(f"{path}:{lineno}: unknown key {key!r}")
    if "kind" not in data or "dim" not in data:
        raise InputError(f"{path}: `kind` and `dim` are required")
    if eps:
        data["eps"] = tuple(sorted(eps.items()))
    try:
        return DomainSpec(**data)
    except TypeError as exc:
        raise InputError(f"{path}: {exc}") from exc
