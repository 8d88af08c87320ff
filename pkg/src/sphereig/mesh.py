"""P1 triangulations of hemisphere domains.

Chart domains of S^2 (disks, perturbed caps, polygons inside the unit
disk) and meridian sections of rotationally symmetric S^3 domains are
meshed by three generators:

* ball-like domains get a structured concentric-ring mesh (6k vertices on
  ring k) mapped radially onto the boundary curve; the mesh inherits the
  six-fold symmetry of the rings, which keeps the discrete tilt pair
  exactly degenerate on caps;
* meridian rectangles [0, gamma] x [0, pi] get a criss-cross grid;
* polygons (chart or meridian) get boundary sampling, a triangular
  interior lattice, Delaunay triangulation and Laplacian smoothing.

All generators enforce hemisphere containment, conformity, positive
orientation and a 20-degree minimum angle.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay
import shapely
from shapely.geometry import Polygon as ShapelyPolygon

from sphereig.errors import InvalidDomainError, MeshQualityError
from sphereig.stereographic import SphereVolume

__all__ = [
    "DomainSpec",
    "TriangleMesh",
    "build_planar_mesh",
    "build_meridian_mesh",
    "mesh_volume",
    "refine",
    "export_mesh",
    "min_angle_degrees",
]

MIN_ANGLE_DEG = 20.0
CONTAINMENT_TOL = 1e-12

_KINDS = ("cap", "disk_region", "polygon_region", "perturbed_cap", "meridian_region")


@dataclass(frozen=True)
class DomainSpec:
    """Declarative description of a hemisphere domain.

    kind-specific parameters:
      cap             gamma (dim 2 chart disk or dim 3 meridian rectangle)
      disk_region     center, radius in chart coordinates (dim 2)
      polygon_region  vertices, a simple chart polygon (dim 2)
      perturbed_cap   gamma and eps = {j: amplitude} for the boundary
                      r(phi) = tan(gamma/2) (1 + sum_j eps_j cos(j phi))
      meridian_region polyline, a simple polygon in (theta, phi) (dim 3)
    """

    kind: str
    dim: int
    gamma: float = 0.0
    center: tuple = (0.0, 0.0)
    radius: float = 0.0
    vertices: tuple = ()
    eps: tuple = ()               # ((j, amplitude), ...)
    polyline: tuple = ()

    def __post_init__(self):
        # normalize sequence fields so specs stay hashable (quadrature caches)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "vertices",
                           tuple((float(x), float(y)) for x, y in self.vertices))
        object.__setattr__(self, "eps",
                           tuple((int(j), float(a)) for j, a in self.eps))
        object.__setattr__(self, "polyline",
                           tuple((float(t), float(p)) for t, p in self.polyline))
        if self.kind not in _KINDS:
            raise InvalidDomainError(f"unknown domain kind {self.kind!r}")
        if self.dim not in (2, 3):
            raise InvalidDomainError("dim must be 2 or 3")
        if self.kind == "meridian_region" and self.dim != 3:
            raise InvalidDomainError("meridian_region requires dim = 3")
        if self.kind in ("disk_region", "polygon_region") and self.dim != 2:
            raise InvalidDomainError(f"{self.kind} requires dim = 2")
        if self.kind in ("cap", "perturbed_cap"):
            if not 0.0 < self.gamma <= math.pi / 2.0 + CONTAINMENT_TOL:
                raise InvalidDomainError(f"gamma must lie in (0, pi/2], got {self.gamma}")
        if self.kind == "disk_region":
            c = math.hypot(*self.center)
            if self.radius <= 0.0:
                raise InvalidDomainError("disk radius must be positive")
            if c + self.radius > 1.0 + CONTAINMENT_TOL:
                raise InvalidDomainError("disk escapes the unit chart disk (hemisphere)")
        if self.kind == "perturbed_cap":
            amps = sum(abs(a) for _, a in self.eps)
            if amps >= 0.3:
                raise InvalidDomainError("perturbation amplitudes must satisfy sum |eps_j| < 0.3")
            rmax = self.boundary_radius(np.linspace(0.0, 2.0 * math.pi, 721)).max()
            if rmax > 1.0 + CONTAINMENT_TOL:
                raise InvalidDomainError("perturbed cap escapes the unit chart disk")
        if self.kind == "polygon_region":
            verts = np.asarray(self.vertices, dtype=float)
            if verts.shape[0] < 3:
                raise InvalidDomainError("polygon needs at least 3 vertices")
            if np.max(np.hypot(verts[:, 0], verts[:, 1])) > 1.0 + CONTAINMENT_TOL:
                raise InvalidDomainError("polygon escapes the unit chart disk")
            _validated_polygon(verts)
        if self.kind == "meridian_region":
            pts = np.asarray(self.polyline, dtype=float)
            if pts.shape[0] < 3:
                raise InvalidDomainError("meridian polyline needs at least 3 vertices")
            if (pts[:, 0].min() < -CONTAINMENT_TOL
                    or pts[:, 0].max() > math.pi / 2.0 + CONTAINMENT_TOL):
                raise InvalidDomainError("meridian theta must lie in [0, pi/2]")
            if pts[:, 1].min() < -CONTAINMENT_TOL or pts[:, 1].max() > math.pi + CONTAINMENT_TOL:
                raise InvalidDomainError("meridian phi must lie in [0, pi]")
            _validated_polygon(pts)

    def boundary_radius(self, phi):
        """Chart boundary radius r(phi) for the star-shaped kinds."""
        phi = np.asarray(phi, dtype=float)
        if self.kind == "cap":
            return np.full_like(phi, math.tan(self.gamma / 2.0))
        if self.kind == "disk_region":
            return np.full_like(phi, self.radius)
        if self.kind == "perturbed_cap":
            base = math.tan(self.gamma / 2.0)
            out = np.ones_like(phi)
            for j, amp in self.eps:
                out = out + amp * np.cos(j * phi)
            return base * out
        raise InvalidDomainError(f"{self.kind} has no star-shaped boundary radius")

    @property
    def is_ball(self):
        """True when the domain is a geodesic ball (chart disks of any center)."""
        if self.kind == "cap":
            return True
        if self.kind == "disk_region":
            return True
        if self.kind == "perturbed_cap":
            return all(a == 0.0 for _, a in self.eps)
        return False


def _validated_polygon(pts):
    poly = ShapelyPolygon(pts)
    if not poly.is_valid:
        raise InvalidDomainError("boundary polyline is self-intersecting or degenerate")
    if poly.area < 1e-10:
        raise InvalidDomainError("region has (near) zero area")
    return poly


@dataclass
class TriangleMesh:
    """Conforming P1 triangulation with positively oriented triangles."""

    vertices: np.ndarray          # (nv, 2)
    triangles: np.ndarray         # (nt, 3) int
    boundary_edges: np.ndarray    # (nb, 2) int
    h: float
    plane: str = "chart"          # "chart" (S^2) or "meridian" (S^3)
    projector: object = field(default=None, repr=False, compare=False)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    def triangle_coords(self):
        return self.vertices[self.triangles]

    def areas(self):
        tc = self.triangle_coords()
        d1 = tc[:, 1] - tc[:, 0]
        d2 = tc[:, 2] - tc[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def min_angle_degrees(mesh):
    tc = mesh.triangle_coords()
    angles = []
    for i in range(3):
        a = tc[:, (i + 1) % 3] - tc[:, i]
        b = tc[:, (i + 2) % 3] - tc[:, i]
        na = np.linalg.norm(a, axis=1)
        nb = np.linalg.norm(b, axis=1)
        cosang = np.clip(np.sum(a * b, axis=1) / (na * nb), -1.0, 1.0)
        angles.append(np.degrees(np.arccos(cosang)))
    return float(np.min(np.stack(angles)))


def _check_quality(mesh):
    areas = mesh.areas()
    if np.min(areas) <= 0.0:
        raise MeshQualityError("mesh contains a non-positively-oriented triangle")
    ang = min_angle_degrees(mesh)
    if ang < MIN_ANGLE_DEG - 1e-9:
        raise MeshQualityError(f"mesh minimum angle {ang:.2f} deg below {MIN_ANGLE_DEG}")
    return mesh


def _max_edge(mesh):
    tc = mesh.triangle_coords()
    e = 0.0
    for i in range(3):
        d = tc[:, (i + 1) % 3] - tc[:, i]
        e = max(e, float(np.max(np.hypot(d[:, 0], d[:, 1]))))
    return e


# ---------------------------------------------------------------------------
# structured concentric-ring mesh for star-shaped chart domains


def _ring_mesh(spec, h):
    base = float(np.mean(spec.boundary_radius(np.linspace(0.0, 2 * math.pi, 361))))
    n = max(1, math.ceil(base / (0.8 * h)))
    cx, cy = spec.center if spec.kind == "disk_region" else (0.0, 0.0)

    for _ in range(8):
        mesh = _ring_mesh_n(spec, n, cx, cy, h)
        if _max_edge(mesh) <= h:
            return _check_quality(mesh)
        n = math.ceil(1.3 * n)
    raise MeshQualityError("ring mesh could not reach the target edge length")


def _ring_mesh_n(spec, n, cx, cy, h):
    verts = [(cx, cy)]
    ring_start = [None]               # first vertex index of ring k
    for k in range(1, n + 1):
        m = 6 * k
        ring_start.append(len(verts))
        phis = 2.0 * math.pi * np.arange(m) / m
        r = spec.boundary_radius(phis) * (k / n)
        verts.extend(zip(cx + r * np.cos(phis), cy + r * np.sin(phis)))
    verts = np.asarray(verts, dtype=float)

    tris = []
    for j in range(6):                # center fan
        tris.append((0, 1 + j, 1 + (j + 1) % 6))
    for k in range(2, n + 1):
        m1, m2 = 6 * (k - 1), 6 * k
        s1, s2 = ring_start[k - 1], ring_start[k]
        i = j = 0
        while i < m1 or j < m2:
            # advance whichever ring has the smaller next angle; the
            # comparison (i+1)/m1 vs (j+1)/m2 is done on integers
            take_inner = j >= m2 or (i < m1 and (i + 1) * m2 <= (j + 1) * m1)
            if take_inner:
                tris.append((s1 + i % m1, s2 + j % m2, s1 + (i + 1) % m1))
                i += 1
            else:
                tris.append((s2 + j % m2, s2 + (j + 1) % m2, s1 + i % m1))
                j += 1
    tris = np.asarray(tris, dtype=np.int64)

    m_out = 6 * n
    s_out = ring_start[n]
    bnd = np.stack([np.arange(s_out, s_out + m_out),
                    np.concatenate([np.arange(s_out + 1, s_out + m_out), [s_out]])],
                   axis=1)

    def projector(pts):
        pts = np.atleast_2d(pts)
        dx = pts[:, 0] - cx
        dy = pts[:, 1] - cy
        phi = np.arctan2(dy, dx)
        r = spec.boundary_radius(phi)
        return np.stack([cx + r * np.cos(phi), cy + r * np.sin(phi)], axis=1)

    return TriangleMesh(vertices=verts, triangles=tris, boundary_edges=bnd,
                        h=h, plane="chart", projector=projector)


# ---------------------------------------------------------------------------
# criss-cross rectangle mesh for meridian caps


def _rect_mesh(th_max, ph_max, h):
    # keep diagonals (the longest edges) at or below h
    target = h / math.sqrt(2.0)
    ni = max(2, math.ceil(th_max / target))
    nj = max(2, math.ceil(ph_max / target))
    ths = np.linspace(0.0, th_max, ni + 1)
    phs = np.linspace(0.0, ph_max, nj + 1)
    TT, PP = np.meshgrid(ths, phs, indexing="ij")
    verts = np.stack([TT.ravel(), PP.ravel()], axis=1)

    def vid(i, j):
        return i * (nj + 1) + j

    tris = []
    for i in range(ni):
        for j in range(nj):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            if (i + j) % 2 == 0:
                tris.append((a, b, c))
                tris.append((a, c, d))
            else:
                tris.append((a, b, d))
                tris.append((b, c, d))
    tris = np.asarray(tris, dtype=np.int64)

    bnd = []
    for i in range(ni):
        bnd.append((vid(i, 0), vid(i + 1, 0)))
        bnd.append((vid(i, nj), vid(i + 1, nj)))
    for j in range(nj):
        bnd.append((vid(0, j), vid(0, j + 1)))
        bnd.append((vid(ni, j), vid(ni, j + 1)))
    bnd = np.asarray(bnd, dtype=np.int64)

    return TriangleMesh(vertices=verts, triangles=tris, boundary_edges=bnd,
                        h=h, plane="meridian", projector=None)


# ---------------------------------------------------------------------------
# unstructured polygon mesh: boundary chain + lattice + Delaunay + smoothing


def _polygon_boundary_chain(pts, h):
    if _signed_area(pts) < 0.0:
        pts = pts[::-1]
    chain = []
    npts = pts.shape[0]
    for i in range(npts):
        a = pts[i]
        b = pts[(i + 1) % npts]
        seglen = float(np.hypot(*(b - a)))
        nseg = max(1, math.ceil(seglen / (0.9 * h)))
        for t in range(nseg):
            chain.append(a + (b - a) * (t / nseg))
    return np.asarray(chain)


def _signed_area(pts):
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _guard_layer(chain, poly):
    """Pinned points one half-spacing inside each chain node.

    Subdivided polyline segments leave exactly collinear runs of chain
    points; without an inward anchor the Delaunay triangulation may bridge
    across them.  A guard behind every node gives each fine boundary edge a
    well-shaped inward triangle.
    """
    prev_e = chain - np.roll(chain, 1, axis=0)
    next_e = np.roll(chain, -1, axis=0) - chain

    def inward(e):
        n = np.stack([-e[:, 1], e[:, 0]], axis=1)
        return n / np.linalg.norm(n, axis=1)[:, None]

    n = inward(prev_e) + inward(next_e)
    norm = np.linalg.norm(n, axis=1)
    norm[norm < 1e-12] = 1.0
    n /= norm[:, None]
    spacing = 0.5 * (np.linalg.norm(prev_e, axis=1) + np.linalg.norm(next_e, axis=1))
    guards = chain + 0.5 * spacing[:, None] * n
    ok = shapely.contains_xy(poly, guards[:, 0], guards[:, 1])
    guards = guards[ok]
    sp = spacing[ok]

    # near corners the bisector guards converge; drop crowded ones
    from scipy.spatial import cKDTree

    tree = cKDTree(chain)
    d_chain, _ = tree.query(guards)
    keep = d_chain > 0.35 * sp
    guards, sp = guards[keep], sp[keep]

    accepted = []
    for i in range(guards.shape[0]):
        p = guards[i]
        if all(np.hypot(p[0] - q[0], p[1] - q[1]) > 0.55 * sp[i] for q in accepted):
            accepted.append(p)
    return np.asarray(accepted) if accepted else np.empty((0, 2))


def _hex_lattice(bbox, a):
    x0, y0, x1, y1 = bbox
    rows = []
    dy = a * math.sqrt(3.0) / 2.0
    ny = int((y1 - y0) / dy) + 2
    nx = int((x1 - x0) / a) + 2
    for j in range(ny):
        y = y0 + j * dy
        off = 0.5 * a if j % 2 else 0.0
        xs = x0 + off + a * np.arange(nx)
        rows.append(np.stack([xs, np.full(nx, y)], axis=1))
    return np.concatenate(rows)


def _polygon_mesh(pts, h, plane):
    poly = _validated_polygon(pts)
    chain = _polygon_boundary_chain(np.asarray(pts, dtype=float), h)
    nb = chain.shape[0]
    guards = _guard_layer(chain, poly)
    n_pinned = nb + guards.shape[0]

    inner = poly.buffer(-0.9 * h)
    lattice = _hex_lattice(poly.bounds, 0.95 * h)
    keep = shapely.contains_xy(inner, lattice[:, 0], lattice[:, 1])
    interior = lattice[keep]
    points = np.concatenate([chain, guards, interior])

    def triangulate(points):
        tri = Delaunay(points)
        cent = points[tri.simplices].mean(axis=1)
        kept = tri.simplices[shapely.contains_xy(poly, cent[:, 0], cent[:, 1])]
        d1 = points[kept[:, 1]] - points[kept[:, 0]]
        d2 = points[kept[:, 2]] - points[kept[:, 0]]
        area2 = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        flip = area2 < 0.0
        kept[flip] = kept[flip][:, ::-1]
        return kept[np.abs(area2) > 1e-10 * h * h]

    for _ in range(40):
        kept = triangulate(points)
        # Laplacian smoothing of free points over kept-triangle edges
        nbr_sum = np.zeros_like(points)
        nbr_cnt = np.zeros(points.shape[0])
        for (i, j) in ((0, 1), (1, 2), (2, 0)):
            np.add.at(nbr_sum, kept[:, i], points[kept[:, j]])
            np.add.at(nbr_cnt, kept[:, i], 1.0)
            np.add.at(nbr_sum, kept[:, j], points[kept[:, i]])
            np.add.at(nbr_cnt, kept[:, j], 1.0)
        new_pts = points.copy()
        mask = nbr_cnt > 0
        mask[:n_pinned] = False
        new_pts[mask] = nbr_sum[mask] / nbr_cnt[mask][:, None]
        shift = float(np.max(np.hypot(*(new_pts - points).T)))
        points = new_pts
        if shift < 1e-3 * h:
            break

    kept = triangulate(points)

    edge_count = {}
    for t in kept:
        for (i, j) in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (min(i, j), max(i, j))
            edge_count[key] = edge_count.get(key, 0) + 1
    bnd = np.asarray([e for e, c in edge_count.items() if c == 1], dtype=np.int64)

    expected = {(min(i, (i + 1) % nb), max(i, (i + 1) % nb)) for i in range(nb)}
    got = {tuple(e) for e in bnd}
    if got != expected:
        raise MeshQualityError("triangulation does not conform to the boundary chain")

    mesh = TriangleMesh(vertices=points, triangles=kept, boundary_edges=bnd,
                        h=h, plane=plane, projector=None)
    return _check_quality(mesh)


# ---------------------------------------------------------------------------
# public entry points


def build_planar_mesh(spec, h):
    """Triangulate the stereographic image of an S^2 domain."""
    if spec.dim != 2:
        raise InvalidDomainError("build_planar_mesh requires a dim-2 spec")
    if h <= 0.0:
        raise InvalidDomainError("target edge length h must be positive")
    if spec.kind in ("cap", "disk_region", "perturbed_cap"):
        return _ring_mesh(spec, h)
    if spec.kind == "polygon_region":
        return _polygon_mesh(np.asarray(spec.vertices, dtype=float), h, "chart")
    raise InvalidDomainError(f"cannot build a planar mesh for kind {spec.kind!r}")


def build_meridian_mesh(spec, h):
    """Triangulate the meridian (theta, phi) section of an S^3 revolution domain."""
    if spec.dim != 3:
        raise InvalidDomainError("build_meridian_mesh requires a dim-3 spec")
    if h <= 0.0:
        raise InvalidDomainError("target edge length h must be positive")
    if spec.kind == "cap":
        return _check_quality(_rect_mesh(spec.gamma, math.pi, h))
    if spec.kind == "meridian_region":
        return _polygon_mesh(np.asarray(spec.polyline, dtype=float), h, "meridian")
    raise InvalidDomainError(f"cannot build a meridian mesh for kind {spec.kind!r}")


_MIDEDGE = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])


def mesh_volume(mesh, spec):
    """Spherical N-volume of the meshed domain by mid-edge quadrature.

    Chart meshes integrate the conformal weight p(s)^2; meridian meshes
    integrate 2*pi*sin^2(theta)*sin(phi).
    """
    tc = mesh.triangle_coords()
    areas = mesh.areas()
    mids = np.einsum("qj,tjd->tqd", _MIDEDGE, tc)
    if spec.dim == 2:
        if mesh.plane != "chart":
            raise InvalidDomainError("dim-2 volume requires a chart mesh")
        s2 = mids[..., 0] ** 2 + mids[..., 1] ** 2
        w = (2.0 / (1.0 + s2)) ** 2
        total = float(np.sum(areas / 3.0 * np.sum(w, axis=1)))
    else:
        if mesh.plane != "meridian":
            raise InvalidDomainError("dim-3 volume requires a meridian mesh")
        w = np.sin(mids[..., 0]) ** 2 * np.sin(mids[..., 1])
        total = 2.0 * math.pi * float(np.sum(areas / 3.0 * np.sum(w, axis=1)))
    return SphereVolume(dim=spec.dim, value=total)


def refine(mesh):
    """Uniform red refinement; boundary midpoints return to the exact curve."""
    verts = [tuple(v) for v in mesh.vertices]
    nv = len(verts)
    midpoint = {}
    bnd_set = {(min(a, b), max(a, b)) for a, b in mesh.boundary_edges}

    new_pts = []

    def mid(i, j):
        nonlocal nv
        key = (min(i, j), max(i, j))
        if key not in midpoint:
            p = 0.5 * (mesh.vertices[i] + mesh.vertices[j])
            if key in bnd_set and mesh.projector is not None:
                p = mesh.projector(p[None, :])[0]
            midpoint[key] = nv
            new_pts.append(p)
            nv += 1
        return midpoint[key]

    tris = []
    for (a, b, c) in mesh.triangles:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])

    bnd = []
    for (a, b) in mesh.boundary_edges:
        m = midpoint[(min(a, b), max(a, b))]
        bnd.extend([(a, m), (m, b)])

    vertices = np.concatenate([mesh.vertices, np.asarray(new_pts)]) if new_pts \
        else mesh.vertices.copy()
    return TriangleMesh(vertices=vertices,
                        triangles=np.asarray(tris, dtype=np.int64),
                        boundary_edges=np.asarray(bnd, dtype=np.int64),
                        h=mesh.h / 2.0, plane=mesh.plane, projector=mesh.projector)


def export_mesh(mesh, path):
    """Plain-text export: header then v/t/b lines with 0-based indices."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"mesh {mesh.n_vertices} {mesh.n_triangles} "
                 f"{mesh.boundary_edges.shape[0]}\n")
        for x, y in mesh.vertices:
            fh.write(f"v {x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"t {i} {j} {k}\n")
        for i, j in mesh.boundary_edges:
            fh.write(f"b {i} {j}\n")
