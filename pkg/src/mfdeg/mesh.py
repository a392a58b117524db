"""Triangulated flat surfaces with boundary: loading, validation, topology, charts.

Geometry is restricted to planar domains (disk, annulus, multi-hole polygons)
with the induced Euclidean metric; curvature data is discrete (angle defects
interior, turning angles on the boundary).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


class MeshError(Exception):
    """Invalid mesh data (parse failure, non-manifold, orientation, ...)."""


class ChartError(Exception):
    """Chart construction failure (off-mesh center, radius too large)."""


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    return 0.5 * np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])


def _derive_boundary_loops(triangles, n_vertices):
    """Ordered boundary loops from directed edges that lack an opposite.

    With counterclockwise triangles the returned loops keep the domain on
    the left (outer loop CCW, hole loops CW).
    """
    directed = set()
    for a, b, c in triangles:
        directed.update([(int(a), int(b)), (int(b), int(c)), (int(c), int(a))])
    succ = {}
    for a, b in directed:
        if (b, a) not in directed:
            if a in succ:
                raise MeshError(f"non-manifold boundary at vertex {a}")
            succ[a] = b
    loops = []
    remaining = dict(succ)
    while remaining:
        start = min(remaining)
        loop = [start]
        v = remaining.pop(start)
        while v != start:
            loop.append(v)
            if v not in remaining:
                raise MeshError(f"open boundary chain at vertex {v}")
            v = remaining.pop(v)
        loops.append(np.asarray(loop, dtype=np.int64))
    loops.sort(key=lambda lp: (-len(lp), lp[0]))
    return loops


class SurfaceMesh:
    """Immutable triangulated planar surface with boundary.

    Parameters
    ----------
    vertices : (n, 2) float array
    triangles : (m, 3) int array, counterclockwise
    boundary_loops : optional list of ordered vertex cycles; derived from the
        triangles when omitted, validated against them when given.
    """

    def __init__(self, vertices, triangles, boundary_loops=None):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
            raise MeshError("vertices must be (n,2) or (n,3)")
        if vertices.shape[1] == 3:
            if np.max(np.abs(vertices[:, 2])) > 1e-9 * max(1.0, np.max(np.abs(vertices[:, :2]))):
                raise MeshError("non-planar mesh: nonzero z coordinates")
            vertices = vertices[:, :2]
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshError("triangles must be (m,3)")
        if triangles.min(initial=0) < 0 or triangles.max(initial=-1) >= len(vertices):
            raise MeshError("triangle index out of range")

        areas = _signed_areas(vertices, triangles)
        scale = np.sqrt(np.abs(areas).sum())
        if np.any(np.abs(areas) <= 1e-14 * scale**2):
            raise MeshError("degenerate (zero-area) triangle")
        if np.all(areas < 0):
            triangles = triangles[:, ::-1].copy()
            areas = -areas
        if np.any(areas < 0):
            raise MeshError("inconsistent orientation: mixed triangle windings")

        self.vertices = vertices
        self.triangles = triangles
        self.triangle_area = areas

        self._check_manifold()
        derived = _derive_boundary_loops(triangles, len(vertices))
        if not derived:
            raise MeshError("closed surface: meshes must have a boundary")
        if boundary_loops is not None:
            given = sorted(
                (frozenset(zip(lp, np.roll(lp, -1))) for lp in map(np.asarray, boundary_loops)),
                key=lambda s: sorted(s),
            )
            have = sorted(
                (frozenset(zip(lp, np.roll(lp, -1))) for lp in derived),
                key=lambda s: sorted(s),
            )
            if given != have:
                raise MeshError("boundary loops do not match the triangulation")
        self.boundary_loops = derived
        for lp in self.boundary_loops:
            if len(lp) < 3:
                raise MeshError("boundary loop shorter than 3 vertices")

        self.is_boundary = np.zeros(len(vertices), dtype=bool)
        for lp in self.boundary_loops:
            self.is_boundary[lp] = True

        self.total_area = float(areas.sum())
        self.vertex_area = np.zeros(len(vertices))
        np.add.at(self.vertex_area, triangles[:, 0], areas / 3.0)
        np.add.at(self.vertex_area, triangles[:, 1], areas / 3.0)
        np.add.at(self.vertex_area, triangles[:, 2], areas / 3.0)

        self._compute_curvature()
        self._hash = None

    # -- validation helpers -------------------------------------------------

    def _check_manifold(self):
        seen = set()
        undirected = {}
        for a, b, c in self.triangles:
            for e in ((int(a), int(b)), (int(b), int(c)), (int(c), int(a))):
                if e in seen:
                    raise MeshError(f"inconsistent orientation or duplicate edge {e}")
                seen.add(e)
                key = (min(e), max(e))
                undirected[key] = undirected.get(key, 0) + 1
        if any(cnt > 2 for cnt in undirected.values()):
            raise MeshError("non-manifold edge (more than two incident triangles)")
        self._n_edges = len(undirected)

    def _compute_curvature(self):
        n = len(self.vertices)
        angle_sum = np.zeros(n)
        p = self.vertices[self.triangles]
        for k in range(3):
            u = p[:, (k + 1) % 3] - p[:, k]
            v = p[:, (k + 2) % 3] - p[:, k]
            ang = np.arctan2(np.abs(np.cross(u, v)), (u * v).sum(axis=1))
            np.add.at(angle_sum, self.triangles[:, k], ang)
        self.gauss_curvature = np.zeros(n)
        interior = ~self.is_boundary
        self.gauss_curvature[interior] = (2 * np.pi - angle_sum[interior]) / self.vertex_area[interior]
        self.geodesic_curvature = np.zeros(n)
        for lp in self.boundary_loops:
            pts = self.vertices[lp]
            nxt = np.roll(pts, -1, axis=0)
            prv = np.roll(pts, 1, axis=0)
            half = 0.5 * (np.linalg.norm(pts - prv, axis=1) + np.linalg.norm(nxt - pts, axis=1))
            self.geodesic_curvature[lp] = (np.pi - angle_sum[lp]) / half

    # -- queries ------------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return self._n_edges

    @property
    def n_triangles(self):
        return len(self.triangles)

    def loop_lengths(self):
        """Polygonal arclength of each boundary loop."""
        out = []
        for lp in self.boundary_loops:
            pts = self.vertices[lp]
            out.append(float(np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1).sum()))
        return out

    def loop_point(self, loop_id, s):
        """Point on boundary loop `loop_id` at arclength parameter `s` (wraps)."""
        lp = self.boundary_loops[loop_id]
        pts = self.vertices[lp]
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        total = cum[-1]
        s = s % total
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(i, len(lp) - 1)
        t = (s - cum[i]) / seg[i]
        return (1 - t) * pts[i] + t * pts[(i + 1) % len(lp)]

    def loop_arclengths(self, loop_id):
        """Arclength parameter of every vertex on the loop, starting at 0."""
        lp = self.boundary_loops[loop_id]
        pts = self.vertices[lp]
        seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
        return np.concatenate([[0.0], np.cumsum(seg)[:-1]])

    def loop_tangent(self, loop_id, s):
        """Unit tangent along the loop at parameter s (domain on the left)."""
        eps = 1e-6 * self.loop_lengths()[loop_id]
        a = self.loop_point(loop_id, s - eps)
        b = self.loop_point(loop_id, s + eps)
        t = b - a
        return t / np.linalg.norm(t)

    def distance_to_boundary(self, x):
        x = np.asarray(x, dtype=float)
        best = np.inf
        for lp in self.boundary_loops:
            pts = self.vertices[lp]
            nxt = np.roll(pts, -1, axis=0)
            d = _point_segment_distance(x, pts, nxt)
            best = min(best, float(d.min()))
        return best

    def nearest_vertex(self, x):
        d = np.linalg.norm(self.vertices - np.asarray(x, dtype=float), axis=1)
        return int(np.argmin(d))

    def content_hash(self):
        """SHA-256 of the geometry, used to key Green caches."""
        if self._hash is None:
            h = hashlib.sha256()
            h.update(np.ascontiguousarray(self.vertices).tobytes())
            h.update(np.ascontiguousarray(self.triangles).tobytes())
            self._hash = h.hexdigest()
        return self._hash

    def rescaled_to_unit_area(self):
        """Copy scaled so that the total area is exactly 1."""
        s = 1.0 / np.sqrt(self.total_area)
        return SurfaceMesh(self.vertices * s, self.triangles)


def _point_segment_distance(x, a, b):
    ab = b - a
    t = ((x - a) * ab).sum(axis=1) / (ab * ab).sum(axis=1)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.linalg.norm(proj - x, axis=1)


# -- topology ----------------------------------------------------------------


@dataclass(frozen=True)
class TopologyReport:
    chi: int
    genus: int
    boundary_count: int


def topology(mesh: SurfaceMesh) -> TopologyReport:
    """Euler characteristic, genus and boundary count of the mesh."""
    chi = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
    b = len(mesh.boundary_loops)
    twice_genus = 2 - chi - b
    if twice_genus < 0 or twice_genus % 2 != 0:
        raise MeshError(f"inconsistent topology: chi={chi}, b={b}")
    return TopologyReport(chi=chi, genus=twice_genus // 2, boundary_count=b)


# -- file format --------------------------------------------------------------
# First line "V F B", then V vertex lines "x y [z]", F triangle lines "i j k"
# (0-based), then B lines each holding one ordered boundary loop.


def load_mesh(path) -> SurfaceMesh:
    """Read a mesh file, validate it, and rescale to unit total area."""
    try:
        with open(path) as fh:
            tokens = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise MeshError(f"cannot read mesh file {path}: {exc}") from exc
    try:
        nv, nf, nb = (int(t) for t in tokens[0])
        verts = np.array([[float(x) for x in tokens[1 + i]] for i in range(nv)])
        tris = np.array([[int(x) for x in tokens[1 + nv + i]] for i in range(nf)], dtype=np.int64)
        loops = [np.array([int(x) for x in tokens[1 + nv + nf + i]], dtype=np.int64) for i in range(nb)]
    except (IndexError, ValueError) as exc:
        raise MeshError(f"parse failure in {path}: {exc}") from exc
    mesh = SurfaceMesh(verts, tris, boundary_loops=loops)
    return mesh.rescaled_to_unit_area()


def save_mesh(mesh: SurfaceMesh, path):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles} {len(mesh.boundary_loops)}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x!r} {y!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
        for lp in mesh.boundary_loops:
            fh.write(" ".join(str(int(v)) for v in lp) + "\n")


# -- charts -------------------------------------------------------------------


@dataclass
class Chart:
    """Local flattening coordinates around a point.

    Interior charts are translations y = x - center with zero conformal
    factor.  Boundary charts compose a rigid motion (tangent to the first
    axis, domain in the upper half-plane) with the quadratic conformal
    correction z - i*(kg/2)*z**2 that flattens a curved boundary to fourth
    order; the leftover smooth distortion is carried by the conformal
    factor -2*ln|1 - i*kg*z|.
    """

    center: np.ndarray
    radius: float
    boundary: bool
    rotation: np.ndarray | None = None
    kg: float = 0.0
    vid: int | None = None
    _tol: float = field(default=2e-2, repr=False)

    def to_chart(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        if not self.boundary:
            return pts
        z = pts @ self.rotation.T
        zc = z[:, 0] + 1j * z[:, 1]
        w = zc - 0.5j * self.kg * zc**2
        return np.column_stack([w.real, w.imag])

    def conformal_factor(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        if not self.boundary:
            return np.zeros(len(pts))
        z = pts @ self.rotation.T
        zc = z[:, 0] + 1j * z[:, 1]
        return -2.0 * np.log(np.abs(1.0 - 1j * self.kg * zc))


def build_chart(mesh: SurfaceMesh, where, radius: float | None = None, tol: float = 2e-2) -> Chart:
    """Chart centered at a vertex id or an ambient point.

    Raises ChartError when the center is off the mesh or the requested
    radius cannot be flattened within `tol`·radius.
    """
    if np.isscalar(where):
        vid = int(where)
        if vid < 0 or vid >= mesh.n_vertices:
            raise ChartError(f"vertex {vid} not on the mesh")
        center = mesh.vertices[vid].copy()
        on_boundary = bool(mesh.is_boundary[vid])
    else:
        center = np.asarray(where, dtype=float)
        vid = None
        on_boundary = mesh.distance_to_boundary(center) < 1e-12 * np.sqrt(mesh.total_area)

    if not on_boundary:
        r = radius if radius is not None else 0.45 * mesh.distance_to_boundary(center)
        if r <= 0:
            raise ChartError("interior chart radius must be positive")
        return Chart(center=center, radius=float(r), boundary=False, vid=vid)

    loop_id, s = _locate_on_boundary(mesh, center)
    t = mesh.loop_tangent(loop_id, s)
    n = np.array([-t[1], t[0]])  # inward: domain on the left of the loop direction
    rot = np.array([t, n])
    if vid is not None:
        kg = float(mesh.geodesic_curvature[vid])
    else:
        lp = mesh.boundary_loops[loop_id]
        kg = float(mesh.geodesic_curvature[lp[np.argmin(
            np.linalg.norm(mesh.vertices[lp] - center, axis=1))]])
    r = radius if radius is not None else mesh.loop_lengths()[loop_id] / 20.0
    chart = Chart(center=center, radius=float(r), boundary=True, rotation=rot, kg=kg, vid=vid, _tol=tol)

    y = chart.to_chart(mesh.vertices)
    rr = np.linalg.norm(y, axis=1)
    inside = rr <= chart.radius
    if np.any(y[inside, 1] < -tol * chart.radius):
        raise ChartError(f"radius {r:g} too large: chart leaves the upper half-plane")
    bdy = inside & mesh.is_boundary
    # only the loop through the center is expected to flatten
    onloop = np.zeros(mesh.n_vertices, dtype=bool)
    onloop[mesh.boundary_loops[loop_id]] = True
    bdy &= onloop
    if np.any(np.abs(y[bdy, 1]) > tol * chart.radius):
        raise ChartError(f"radius {r:g} too large to flatten within tolerance")
    return chart


def _locate_on_boundary(mesh, x):
    best = (np.inf, 0, 0.0)
    for loop_id, lp in enumerate(mesh.boundary_loops):
        pts = mesh.vertices[lp]
        nxt = np.roll(pts, -1, axis=0)
        seg = nxt - pts
        seglen = np.linalg.norm(seg, axis=1)
        t = np.clip(((x - pts) * seg).sum(axis=1) / seglen**2, 0.0, 1.0)
        d = np.linalg.norm(pts + t[:, None] * seg - x, axis=1)
        i = int(np.argmin(d))
        if d[i] < best[0]:
            cum = np.concatenate([[0.0], np.cumsum(seglen)])
            best = (float(d[i]), loop_id, float(cum[i] + t[i] * seglen[i]))
    return best[1], best[2]


# -- refinement / snapping ----------------------------------------------------


def refine(mesh: SurfaceMesh) -> SurfaceMesh:
    """One sweep of uniform 1-to-4 midpoint refinement."""
    verts = list(mesh.vertices)
    mid = {}

    def midpoint(a, b):
        key = (min(a, b), max(a, b))
        if key not in mid:
            mid[key] = len(verts)
            verts.append(0.5 * (mesh.vertices[a] + mesh.vertices[b]))
        return mid[key]

    tris = []
    for a, b, c in mesh.triangles:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        tris.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]])
    return SurfaceMesh(np.array(verts), np.array(tris, dtype=np.int64))


def snap_to_vertex(mesh: SurfaceMesh, x, tol_factor: float = 0.25):
    """Snap an ambient point to a mesh vertex, inserting one if needed.

    Returns (mesh, vid).  The mesh is unchanged when `x` lies within
    `tol_factor` of the local edge length of an existing vertex; otherwise
    the containing triangle (or boundary edge) is split locally.
    """
    x = np.asarray(x, dtype=float)
    vid = mesh.nearest_vertex(x)
    local_h = np.sqrt(mesh.vertex_area[vid])
    if np.linalg.norm(mesh.vertices[vid] - x) <= tol_factor * local_h:
        return mesh, vid

    tri_idx, bary = _locate_triangle(mesh, x)
    if tri_idx is None:
        raise MeshError(f"point {x} is not on the mesh")
    tri = mesh.triangles[tri_idx]
    verts = np.vstack([mesh.vertices, x[None, :]])
    new = len(mesh.vertices)
    tris = [t for i, t in enumerate(mesh.triangles) if i != tri_idx]

    onedge = np.isclose(bary, 0.0, atol=1e-9)
    if onedge.any():
        k = int(np.argmin(bary))
        a, b = int(tri[(k + 1) % 3]), int(tri[(k + 2) % 3])
        c = int(tri[k])
        tris.extend([[a, new, c], [new, b, c]])
        # interior edge: split the neighbour too
        for i, t in enumerate(tris[:-2]):
            t = list(t)
            if a in t and b in t:
                d = next(v for v in t if v not in (a, b))
                tris.pop(i)
                tris.extend([[b, new, d], [new, a, d]])
                break
    else:
        a, b, c = (int(v) for v in tri)
        tris.extend([[a, b, new], [b, c, new], [c, a, new]])
    return SurfaceMesh(verts, np.array(tris, dtype=np.int64)), new


def _locate_triangle(mesh, x):
    p = mesh.vertices[mesh.triangles]
    v0 = p[:, 1] - p[:, 0]
    v1 = p[:, 2] - p[:, 0]
    d = x - p[:, 0]
    den = np.cross(v0, v1)
    w1 = np.cross(d, v1) / den
    w2 = np.cross(v0, d) / den
    w0 = 1.0 - w1 - w2
    ok = (w0 >= -1e-9) & (w1 >= -1e-9) & (w2 >= -1e-9)
    idx = np.flatnonzero(ok)
    if len(idx) == 0:
        return None, None
    i = int(idx[0])
    return i, np.array([w0[i], w1[i], w2[i]])


# -- generators ---------------------------------------------------------------


def _zip_chains(a_ids, b_ids, vertices):
    """Triangles between two open chains (a inner, b outer), both ordered the
    same way; greedy shortest-diagonal march, counterclockwise output."""
    tris = []
    i, j = 0, 0
    while i < len(a_ids) - 1 or j < len(b_ids) - 1:
        can_a = i < len(a_ids) - 1
        can_b = j < len(b_ids) - 1
        if can_a and can_b:
            da = np.linalg.norm(vertices[a_ids[i + 1]] - vertices[b_ids[j]])
            db = np.linalg.norm(vertices[a_ids[i]] - vertices[b_ids[j + 1]])
            adv_a = da <= db
        else:
            adv_a = can_a
        if adv_a:
            tris.append([a_ids[i], b_ids[j], a_ids[i + 1]])
            i += 1
        else:
            tris.append([a_ids[i], b_ids[j], b_ids[j + 1]])
            j += 1
    return tris


def _zip_rings(a_ids, b_ids, vertices, center):
    """Triangles between two closed concentric rings (both CCW around center)."""
    ang_a = np.arctan2(*(vertices[a_ids] - center).T[::-1])
    ang_b = np.arctan2(*(vertices[b_ids] - center).T[::-1])
    a = list(np.roll(a_ids, -int(np.argmin(ang_a % (2 * np.pi)))))
    b = list(np.roll(b_ids, -int(np.argmin(ang_b % (2 * np.pi)))))
    return _zip_chains(a + [a[0]], b + [b[0]], vertices)


def _mirror_mesh(verts, tris):
    """Complete an upper-half construction to a mesh symmetric in y -> -y.

    Vertices with y≈0 are shared; mirrored triangles are re-oriented.
    """
    verts = np.asarray(verts, dtype=float)
    scale = np.abs(verts).max()
    on_axis = np.abs(verts[:, 1]) <= 1e-12 * scale
    verts[on_axis, 1] = 0.0
    mirror_id = np.empty(len(verts), dtype=np.int64)
    new_verts = list(verts)
    for i, v in enumerate(verts):
        if on_axis[i]:
            mirror_id[i] = i
        else:
            mirror_id[i] = len(new_verts)
            new_verts.append(np.array([v[0], -v[1]]))
    out = list(map(list, tris))
    for a, b, c in tris:
        out.append([mirror_id[a], mirror_id[c], mirror_id[b]])
    return np.array(new_verts), np.array(out, dtype=np.int64)


def disk_mesh(n_rings: int = 24, radius: float | None = None, normalize: bool = True) -> SurfaceMesh:
    """Structured disk triangulation, mirror-symmetric about the x-axis.

    Ring j carries 6j vertices at radius j/n; the mesh edge length is about
    radius/n_rings.
    """
    radii = [(j + 1.0) / n_rings for j in range(n_rings)]
    counts = [6 * (j + 1) for j in range(n_rings)]
    mesh = _polar_mesh(radii, counts)
    if radius is not None:
        mesh = SurfaceMesh(mesh.vertices * radius, mesh.triangles)
    return mesh.rescaled_to_unit_area() if normalize else mesh


def graded_disk_mesh(r_core: float, ratio: float = 1.12, n_theta: int | None = None,
                     radius: float = 1.0, normalize: bool = True) -> SurfaceMesh:
    """Disk with ring spacing geometric from r_core at the center to the rim.

    Used to resolve concentration profiles around the disk center; cells stay
    isotropic (angular step matched to the grading ratio).
    """
    radii = [r_core]
    while radii[-1] * ratio < radius:
        radii.append(radii[-1] * ratio)
    radii.append(radius)
    if n_theta is None:
        n_theta = int(np.ceil(2 * np.pi / (ratio - 1.0)))
    n_theta += n_theta % 2  # even, so theta=0 and pi are vertices
    # vertex counts double away from the core until they saturate at n_theta
    counts = [6]
    for _ in radii[1:]:
        counts.append(min(n_theta, counts[-1] * 2))
    mesh = _polar_mesh(radii, counts)
    return mesh.rescaled_to_unit_area() if normalize else mesh


def _polar_mesh(radii, counts):
    """Mirror-symmetric polar mesh from ring radii and per-ring vertex counts."""
    verts = [np.zeros(2)]
    rings = []
    for r, n in zip(radii, counts):
        n += n % 2
        # upper-half sample of a ring with n vertices total
        ths = np.linspace(0.0, np.pi, n // 2 + 1)
        ids = []
        for th in ths:
            ids.append(len(verts))
            verts.append(np.array([r * np.cos(th), r * np.sin(th)]))
        rings.append(ids)
    tris = []
    for k in range(len(rings[0]) - 1):
        tris.append([0, rings[0][k], rings[0][k + 1]])
    for a, b in zip(rings[:-1], rings[1:]):
        tris.extend(_zip_chains(a, b, np.array(verts)))
    v, t = _mirror_mesh(np.array(verts), tris)
    return SurfaceMesh(v, t)


def annulus_mesh(n_r: int = 10, n_theta: int = 48, r_inner: float = 0.5,
                 r_outer: float = 1.0, normalize: bool = True) -> SurfaceMesh:
    """Tensor-product annulus; every ring is rotation-uniform (identical local
    patterns within a ring), which keeps per-ring discretization bias purely
    radial."""
    verts = []
    for i in range(n_r + 1):
        r = r_inner + (r_outer - r_inner) * i / n_r
        for j in range(n_theta):
            th = 2 * np.pi * j / n_theta
            verts.append([r * np.cos(th), r * np.sin(th)])
    verts = np.array(verts)
    tris = []
    for i in range(n_r):
        for j in range(n_theta):
            a = i * n_theta + j
            b = i * n_theta + (j + 1) % n_theta
            c = (i + 1) * n_theta + j
            d = (i + 1) * n_theta + (j + 1) % n_theta
            tris.append([a, b, d])
            tris.append([a, d, c])
    mesh = SurfaceMesh(verts, np.array(tris, dtype=np.int64))
    return mesh.rescaled_to_unit_area() if normalize else mesh


def boundary_graded_disk_mesh(r_core: float, ratio: float = 1.15, radius: float = 1.0,
                              pole_angle: float = 0.0, normalize: bool = True) -> SurfaceMesh:
    """Disk meshed in polar coordinates around the boundary point
    (radius*cos(pole_angle), radius*sin(pole_angle)), with geometric grading
    away from it; resolves boundary concentration profiles."""
    a = radius
    pole = np.array([a, 0.0])
    radii = [r_core]
    while radii[-1] * ratio < 1.9 * a:
        radii.append(radii[-1] * ratio)
    dtheta = ratio - 1.0

    verts = [pole]
    arcs = []
    for r in radii:
        # angles (around the pole) whose points lie inside the disk
        thc = np.arccos(np.clip(-r / (2 * a), -1.0, 1.0))
        span = 2 * np.pi - 2 * thc
        n = max(3, int(np.ceil(span / dtheta)) + 1)
        ths = np.linspace(thc, 2 * np.pi - thc, n)
        ids = []
        for th in ths:
            ids.append(len(verts))
            verts.append(pole + r * np.array([np.cos(th), np.sin(th)]))
        arcs.append(ids)
    verts = np.array(verts)
    tris = []
    first = arcs[0]
    for k in range(len(first) - 1):
        tris.append([0, first[k], first[k + 1]])
    for aa, bb in zip(arcs[:-1], arcs[1:]):
        tris.extend(_zip_chains(aa, bb, verts))
    # cap the leftover lens with a fan from the antipode
    far = np.array([-a, 0.0])
    verts = np.vstack([verts, far[None, :]])
    fid = len(verts) - 1
    last = arcs[-1]
    for k in range(len(last) - 1):
        tris.append([last[k], fid, last[k + 1]])
    mesh = SurfaceMesh(verts, np.array(tris, dtype=np.int64))
    if pole_angle != 0.0:
        c, s = np.cos(pole_angle), np.sin(pole_angle)
        rot = np.array([[c, -s], [s, c]])
        mesh = SurfaceMesh(mesh.vertices @ rot.T, mesh.triangles)
    return mesh.rescaled_to_unit_area() if normalize else mesh


def unit_square_mesh(n: int = 16, normalize: bool = True) -> SurfaceMesh:
    """Regular right-triangle grid on [0,1]^2."""
    xs = np.linspace(0.0, 1.0, n + 1)
    verts = np.array([[x, y] for y in xs for x in xs])
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b = a + 1
            c = a + n + 1
            d = c + 1
            tris.append([a, b, d])
            tris.append([a, d, c])
    mesh = SurfaceMesh(verts, np.array(tris, dtype=np.int64))
    return mesh.rescaled_to_unit_area() if normalize else mesh


def rect_with_holes_mesh(nx: int = 18, ny: int = 10, holes=((4, 3, 3, 4), (11, 3, 3, 4)),
                         normalize: bool = True) -> SurfaceMesh:
    """Rectangle grid with rectangular blocks removed (one per hole).

    Each hole is (i0, j0, w, h) in cell indices.  Two holes give the
    pair-of-pants topology chi = -1.
    """
    keep = np.ones((nx, ny), dtype=bool)
    for i0, j0, w, h in holes:
        if i0 <= 0 or j0 <= 0 or i0 + w >= nx or j0 + h >= ny:
            raise MeshError("hole touches the outer boundary")
        keep[i0:i0 + w, j0:j0 + h] = False
    used = {}
    verts = []

    def vid(i, j):
        if (i, j) not in used:
            used[(i, j)] = len(verts)
            verts.append([i / max(nx, ny), j / max(nx, ny)])
        return used[(i, j)]

    tris = []
    for i in range(nx):
        for j in range(ny):
            if not keep[i, j]:
                continue
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            tris.append([a, b, c])
            tris.append([a, c, d])
    mesh = SurfaceMesh(np.array(verts), np.array(tris, dtype=np.int64))
    return mesh.rescaled_to_unit_area() if normalize else mesh
