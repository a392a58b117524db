"""Neumann Green function, regular part, Robin function, and the weight kappa.

The Green field solves  -Δ G(.,ξ) = δ_ξ - 1/|Σ|  with zero Neumann data and
zero mean.  Near the pole G grows like (4/κ)·ln(1/|y_ξ|) with κ = 8π at
interior poles and 4π at boundary poles; subtracting the cutoff log leaves
the regular part H whose diagonal value is the Robin function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elliptic import NeumannLaplacian
from .mesh import Chart, SurfaceMesh, build_chart

KAPPA_INTERIOR = 8.0 * np.pi
KAPPA_BOUNDARY = 4.0 * np.pi


def kappa(mesh: SurfaceMesh, vid: int) -> float:
    """Concentration weight: 8π at interior points, 4π on the boundary."""
    return KAPPA_BOUNDARY if mesh.is_boundary[int(vid)] else KAPPA_INTERIOR


def cutoff_profile(s):
    """Quintic smoothstep profile: 1 for s<=1, 0 for s>=2, C^2 in between."""
    s = np.asarray(s, dtype=float)
    t = np.clip(s - 1.0, 0.0, 1.0)
    return 1.0 - t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


@dataclass
class GreenField:
    pole: int
    values: np.ndarray
    kappa: float


@dataclass
class RegularPart:
    pole: int
    values: np.ndarray
    robin: float
    chart: Chart
    quad_coeffs: np.ndarray  # local model of H around the pole in chart coords
    fit_radius: float

    def local_model(self, y):
        """Evaluate the fitted quadratic H-model at chart coordinates y."""
        y = np.atleast_2d(y)
        return _quad_design(y, self.chart.boundary) @ self.quad_coeffs


def green(L: NeumannLaplacian, vid: int) -> GreenField:
    """Green field with pole at a mesh vertex.

    The discrete right-hand side is the unit vertex functional minus the
    uniform compensating density, which is mean-free at matrix level.
    """
    vid = int(vid)
    load = L.point_load(vid) - L.mass / L.mesh.total_area
    u = L.solve_zero_mean(load)
    return GreenField(pole=vid, values=u, kappa=kappa(L.mesh, vid))


def regular_part(L: NeumannLaplacian, gf: GreenField, chart: Chart | None = None,
                 cutoff_radius: float | None = None, fit_rings: int = 3) -> RegularPart:
    """Regular part H = G - Γ and the Robin value at the pole.

    Γ carries the cutoff log (4/κ)·χ·ln(1/|y|) with χ supported on
    [cutoff_radius, 2·cutoff_radius].  The pole vertex carries the
    regularized delta and is excluded; the Robin value comes from a
    quadratic fit of H over the nearest `fit_rings` vertex rings (even in
    the normal coordinate at boundary poles).
    """
    mesh = L.mesh
    if chart is None:
        chart = build_chart(mesh, gf.pole)
    r_c = cutoff_radius if cutoff_radius is not None else chart.radius / 8.0
    if 2.0 * r_c > chart.radius * (1.0 + 1e-12):
        raise ValueError("cutoff support exceeds the chart radius")

    y = chart.to_chart(mesh.vertices)
    r = np.linalg.norm(y, axis=1)
    chi = cutoff_profile(np.divide(r, r_c, out=np.full_like(r, 2.0), where=r_c > 0))
    with np.errstate(divide="ignore"):
        logterm = np.log(1.0 / r)
    gamma = (4.0 / gf.kappa) * chi * logterm
    gamma[gf.pole] = 0.0  # placeholder; H at the pole is refitted below
    H = gf.values - gamma

    ring_ids = _vertex_rings(mesh, gf.pole, fit_rings)
    ys = y[ring_ids]
    # Near the pole the discrete point-load field carries a lattice-pattern
    # offset that does not vanish under refinement.  Subtracting a local
    # discrete solve of the same point load with Dirichlet log data on a
    # patch rim cancels that offset row-for-row; the difference is a
    # discretely smooth field whose value at the pole is the Robin value.
    local = _local_log_field(L, gf.pole, gf.kappa, chart, depth=max(fit_rings + 5, 8))
    if local is not None:
        vals = gf.values[ring_ids] - local[ring_ids]
    else:
        vals = gf.values[ring_ids] - (4.0 / gf.kappa) * np.log(1.0 / r[ring_ids])
    A = _quad_design(ys, chart.boundary)
    coeffs, *_ = np.linalg.lstsq(A, vals, rcond=None)
    robin = float(coeffs[0])
    H[gf.pole] = robin
    fit_radius = float(np.linalg.norm(ys, axis=1).max())
    return RegularPart(pole=gf.pole, values=H, robin=robin, chart=chart,
                       quad_coeffs=coeffs, fit_radius=fit_radius)


def robin_field(mesh: SurfaceMesh, L: NeumannLaplacian, vids, chart_radius=None,
                cache: dict | None = None) -> dict:
    """Robin values at the given (vertex) poles; deterministic and cached."""
    out = {}
    cache = cache if cache is not None else {}
    for vid in vids:
        vid = int(vid)
        if vid not in cache:
            gf = green(L, vid)
            chart = build_chart(mesh, vid, radius=chart_radius)
            cache[vid] = regular_part(L, gf, chart).robin
        out[vid] = cache[vid]
    return out


def _local_log_field(L: NeumannLaplacian, vid: int, kap: float, chart: Chart, depth: int = 8):
    """Discrete point-load field on a graph patch with Dirichlet log rim data.

    Its continuum limit is exactly (4/κ)·ln(1/|y|); near the pole it carries
    the same lattice artifact as the global Green field, so the difference of
    the two is smooth.  Returns a full-length array (zero off the patch), or
    None when the patch has no rim (mesh too small).
    """
    import scipy.sparse.linalg as spla

    mesh = L.mesh
    adj = _adjacency(mesh)
    dist = {vid: 0}
    frontier = [vid]
    for d in range(1, depth + 1):
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in dist:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    patch = sorted(dist)
    pole_on_boundary = bool(mesh.is_boundary[vid])
    # interior pole: clamp the physical boundary too, so the pure log is the
    # exact continuum solution of the local model (no spurious image term);
    # boundary pole: the physical boundary keeps its natural Neumann rows.
    def clamped(v):
        if dist[v] == depth:
            return True
        return (not pole_on_boundary) and mesh.is_boundary[v]

    rim = [v for v in patch if clamped(v)]
    free = [v for v in patch if not clamped(v)]
    if not rim:
        return None
    y = chart.to_chart(mesh.vertices[patch])
    r = np.linalg.norm(y, axis=1)
    logval = np.zeros(len(patch))
    pos = {v: i for i, v in enumerate(patch)}
    nonpole = r > 0
    logval[nonpole] = (4.0 / kap) * np.log(1.0 / r[nonpole])
    K = L.stiffness
    Kff = K[np.ix_(free, free)].tocsc()
    Kfr = K[np.ix_(free, rim)]
    rhs = np.zeros(len(free))
    rhs[free.index(vid)] = 1.0
    rhs -= Kfr @ logval[[pos[v] for v in rim]]
    sol = spla.splu(Kff).solve(rhs)
    out = np.zeros(mesh.n_vertices)
    out[free] = sol
    out[rim] = logval[[pos[v] for v in rim]]
    return out


def _quad_design(y, boundary):
    """Quadratic design matrix; boundary poles use the even-in-y2 model
    (Neumann symmetry kills odd normal powers)."""
    y1, y2 = y[:, 0], y[:, 1]
    if boundary:
        cols = [np.ones_like(y1), y1, y1**2, y2**2]
    else:
        cols = [np.ones_like(y1), y1, y2, y1**2, y1 * y2, y2**2]
    return np.column_stack(cols)


def _vertex_rings(mesh: SurfaceMesh, vid: int, n_rings: int):
    """Vertices at graph distance 1..n_rings from vid."""
    adj = _adjacency(mesh)
    seen = {vid}
    frontier = {vid}
    out = []
    for _ in range(n_rings):
        nxt = set()
        for v in frontier:
            nxt.update(adj[v])
        nxt -= seen
        out.extend(sorted(nxt))
        seen |= nxt
        frontier = nxt
    return np.asarray(out, dtype=np.int64)


_ADJ_CACHE: dict = {}


def _adjacency(mesh: SurfaceMesh):
    key = id(mesh)
    if key not in _ADJ_CACHE:
        adj = [set() for _ in range(mesh.n_vertices)]
        for a, b, c in mesh.triangles:
            adj[a].update((b, c))
            adj[b].update((a, c))
            adj[c].update((a, b))
        _ADJ_CACHE[key] = adj
        if len(_ADJ_CACHE) > 32:
            _ADJ_CACHE.pop(next(iter(_ADJ_CACHE)))
    return _ADJ_CACHE[key]
