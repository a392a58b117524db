"""Kirchhoff-Routh landscape over point configurations and its critical points.

A configuration holds p interior points and q boundary points (2p+q >= 1),
off the thick diagonal.  The landscape value is

    f(ξ) = Σ_i 2 κ_i ln V(ξ_i) + Σ_i κ_i² R(ξ_i) + Σ_{i≠j} κ_i κ_j G(ξ_i, ξ_j),

with κ = 8π interior / 4π boundary, R the Robin function and G the Neumann
Green function.  Green/Robin data lives in a lazy per-pole vertex cache;
evaluation between mesh points uses moving-least-squares quadratic models
with the ambient log singularity split off analytically, which is what makes
finite-difference gradients, Hessians and Morse indices meaningful.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree

from . import green as green_mod
from .elliptic import NeumannLaplacian
from .green import KAPPA_BOUNDARY, KAPPA_INTERIOR
from .mesh import SurfaceMesh, build_chart


class ConfigurationError(Exception):
    """Degenerate or out-of-domain configuration."""


@dataclass
class Configuration:
    """p interior points (ambient coords) and q boundary points (loop id +
    arclength)."""

    interior: np.ndarray  # (p, 2)
    boundary: list  # [(loop_id, s), ...]

    def __post_init__(self):
        self.interior = np.atleast_2d(np.asarray(self.interior, dtype=float)) \
            if np.size(self.interior) else np.zeros((0, 2))

    @property
    def p(self):
        return len(self.interior)

    @property
    def q(self):
        return len(self.boundary)

    def positions(self, mesh: SurfaceMesh) -> np.ndarray:
        pts = [self.interior[i] for i in range(self.p)]
        pts += [mesh.loop_point(l, s) for l, s in self.boundary]
        return np.array(pts) if pts else np.zeros((0, 2))

    def separation(self, mesh: SurfaceMesh) -> float:
        pts = self.positions(mesh)
        if len(pts) < 2:
            return np.inf
        d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        return float(d[np.triu_indices(len(pts), 1)].min())

    def boundary_clearance(self, mesh: SurfaceMesh) -> float:
        if self.p == 0:
            return np.inf
        return min(mesh.distance_to_boundary(x) for x in self.interior)


@dataclass
class CriticalPoint:
    config: Configuration
    value: float
    grad_norm: float
    morse_index: int
    hessian_eigs: np.ndarray
    L_value: float
    L_sigma: float
    classification: str  # V_minus | V_plus | degenerate
    multiplicity: int = 1  # distinct orderings of the point tuple
    degenerate_hessian: bool = False


class GreenCache:
    """Lazy per-pole Green fields, Robin values and local regular-part models.

    Poles are mesh vertices; fields are solved against the shared factorized
    Laplacian on first use.  Read-only once populated, safe to share across
    parallel searches.
    """

    def __init__(self, mesh: SurfaceMesh, L: NeumannLaplacian):
        self.mesh = mesh
        self.L = L
        self._fields: dict[int, np.ndarray] = {}
        self._regular: dict[int, green_mod.RegularPart] = {}
        interior_ids = np.flatnonzero(~mesh.is_boundary)
        self._interior_ids = interior_ids
        self._interior_tree = cKDTree(mesh.vertices[interior_ids])
        self._all_tree = cKDTree(mesh.vertices)
        self._loop_arcs = [mesh.loop_arclengths(i) for i in range(len(mesh.boundary_loops))]
        self._loop_lengths = mesh.loop_lengths()
        self.h_typical = float(np.sqrt(np.median(mesh.vertex_area)))
        self._robin_series: dict[int, tuple] = {}
        self._pair_series: dict[tuple, tuple] = {}
        self._loop_curves: dict[int, tuple] = {}

    # -- raw per-pole data ---------------------------------------------------

    def field(self, vid: int) -> np.ndarray:
        vid = int(vid)
        if vid not in self._fields:
            self._fields[vid] = green_mod.green(self.L, vid).values
        return self._fields[vid]

    def regular(self, vid: int) -> green_mod.RegularPart:
        vid = int(vid)
        if vid not in self._regular:
            gf = green_mod.GreenField(pole=vid, values=self.field(vid),
                                      kappa=green_mod.kappa(self.mesh, vid))
            chart = build_chart(self.mesh, vid)
            self._regular[vid] = green_mod.regular_part(self.L, gf, chart)
        return self._regular[vid]

    def robin(self, vid: int) -> float:
        return self.regular(vid).robin

    # -- boundary series -------------------------------------------------------
    # Per-loop Robin profiles and per-loop-pair Green matrices are low-pass
    # trigonometric fits of per-vertex data: the extraction jitter of single
    # vertices is averaged away globally and every boundary evaluation
    # becomes C-infinity and cheap.

    def _n_modes(self, n):
        return min(max(n // 7, 4), 20)

    def _n_pair_modes(self, n):
        # pair matrices tolerate very few modes: coefficient noise enters
        # Hessians multiplied by (2πk/L)^2, while the legitimate off-diagonal
        # structure at admissible separations decays geometrically in the
        # mode number (harmonic interaction between loops)
        return min(max(n // 48, 3), 4)

    def robin_series(self, loop_id: int):
        if loop_id not in self._robin_series:
            lp = self.mesh.boundary_loops[loop_id]
            vals = np.array([self.robin(int(v)) for v in lp])
            arcs = self._loop_arcs[loop_id]
            total = self._loop_lengths[loop_id]
            K = self._n_modes(len(lp))
            A = _trig_design(arcs, total, K)
            coeffs, *_ = np.linalg.lstsq(A, vals, rcond=None)
            self._robin_series[loop_id] = (coeffs, total, K)
        return self._robin_series[loop_id]

    def pair_series(self, la: int, lb: int):
        """2D low-pass model of the smooth part of G between two loops
        (the chordal log is split off on the diagonal loop)."""
        key = (min(la, lb), max(la, lb))
        if key not in self._pair_series:
            a, b = key
            lpa = self.mesh.boundary_loops[a]
            lpb = self.mesh.boundary_loops[b]
            if not (_uniform_arcs(self.mesh, a) and _uniform_arcs(self.mesh, b)):
                self._pair_series[key] = None
            else:
                xa = self.mesh.vertices[lpa]
                xb = self.mesh.vertices[lpb]
                n_a, n_b = len(lpa), len(lpb)
                S = np.empty((n_a, n_b))
                if a == b:
                    for j, vj in enumerate(lpb):
                        f = self.field(int(vj))
                        chord = np.linalg.norm(xa - xb[j], axis=1)
                        off = np.abs(np.arange(n_a) - j)
                        off = np.minimum(off, n_a - off)
                        far = off > 2
                        S[far, j] = f[lpa[far]] + np.log(chord[far]) / np.pi
                        rp = self.regular(int(vj))
                        for i in np.flatnonzero(~far):
                            if i == j:
                                S[i, j] = rp.robin
                            else:
                                y = rp.chart.to_chart(xa[i][None, :])[0]
                                ry = np.linalg.norm(y)
                                S[i, j] = float(rp.local_model(y[None, :])[0]) \
                                    - np.log(ry / chord[i]) / np.pi
                    S = 0.5 * (S + S.T)
                else:
                    for j, vj in enumerate(lpb):
                        S[:, j] = self.field(int(vj))[lpa]
                Ka = self._n_pair_modes(n_a)
                Kb = self._n_pair_modes(n_b)
                C = np.fft.fft2(S) / (n_a * n_b)
                ks = np.r_[-Ka:Ka + 1]
                ls = np.r_[-Kb:Kb + 1]
                Csel = C[np.ix_(ks % n_a, ls % n_b)]
                self._pair_series[key] = (Csel, ks, ls,
                                          self._loop_lengths[a], self._loop_lengths[b])
        return self._pair_series[key]

    def _eval_robin_series(self, loop_id, s):
        coeffs, total, K = self.robin_series(loop_id)
        return float(_trig_design(np.array([s]), total, K) @ coeffs)

    # -- smooth boundary curve ---------------------------------------------------
    # The polygonal loop makes any s-parametrized quantity only piecewise
    # smooth (kinks at vertices defeat FD gradients), so the landscape works
    # on a low-pass trigonometric fit of the loop coordinates: positions,
    # tangents and the geodesic curvature all come from the series.

    def loop_curve(self, loop_id: int):
        if loop_id not in self._loop_curves:
            lp = self.mesh.boundary_loops[loop_id]
            pts = self.mesh.vertices[lp]
            arcs = self._loop_arcs[loop_id]
            total = self._loop_lengths[loop_id]
            K = min(max(len(lp) // 4, 4), 40)
            A = _trig_design(arcs, total, K)
            cx, *_ = np.linalg.lstsq(A, pts[:, 0], rcond=None)
            cy, *_ = np.linalg.lstsq(A, pts[:, 1], rcond=None)
            self._loop_curves[loop_id] = (cx, cy, total, K)
        return self._loop_curves[loop_id]

    def curve_point(self, loop_id, s):
        cx, cy, total, K = self.loop_curve(loop_id)
        A = _trig_design(np.array([s]), total, K)
        return np.array([float(A @ cx), float(A @ cy)])

    def _curve_derivs(self, loop_id, s):
        cx, cy, total, K = self.loop_curve(loop_id)
        w = 2 * np.pi * np.arange(1, K + 1) / total
        ws = w * s
        d1 = np.concatenate([[0.0], np.ravel(np.column_stack([-w * np.sin(ws), w * np.cos(ws)]))])
        d2 = np.concatenate([[0.0], np.ravel(np.column_stack([-w**2 * np.cos(ws), -w**2 * np.sin(ws)]))])
        v = np.array([d1 @ cx, d1 @ cy])
        a = np.array([d2 @ cx, d2 @ cy])
        return v, a

    def curve_tangent(self, loop_id, s):
        v, _ = self._curve_derivs(loop_id, s)
        return v / np.linalg.norm(v)

    def curve_curvature(self, loop_id, s):
        """Signed curvature of the smooth loop (positive = convex for the
        outer loop, i.e. the geodesic curvature of the boundary)."""
        v, a = self._curve_derivs(loop_id, s)
        return float(np.cross(v, a) / np.linalg.norm(v) ** 3)

    def _eval_pair_series(self, la, sa, lb, sb):
        series = self.pair_series(la, lb)
        if series is None:
            return None
        C, ks, ls, L_a, L_b = series
        if la > lb:
            sa, sb = sb, sa
        ea = np.exp(2j * np.pi * ks * (sa / L_a))
        eb = np.exp(2j * np.pi * ls * (sb / L_b))
        return float(np.real(ea @ C @ eb))

    # -- neighbor selection ----------------------------------------------------

    def _interior_neighbors(self, x, k=12):
        k = min(k, len(self._interior_ids))
        _, idx = self._interior_tree.query(x, k=k)
        return self._interior_ids[np.atleast_1d(idx)]

    def _boundary_neighbors(self, loop_id, s, k=6):
        arcs = self._loop_arcs[loop_id]
        total = self._loop_lengths[loop_id]
        d = np.abs((arcs - s + total / 2) % total - total / 2)
        order = np.argsort(d)[:min(k, len(arcs))]
        return self.mesh.boundary_loops[loop_id][order]

    # -- moving least squares -------------------------------------------------

    @staticmethod
    def _edge_weights(r):
        # Gaussian in r with a hard-zero taper at the selection edge, so a
        # marginally included/excluded neighbor (a tie at a symmetric point)
        # cannot move the fit
        h = np.median(r) + 1e-300
        R = r.max() * (1.0 + 1e-9) + 1e-300
        taper = np.maximum(0.0, 1.0 - (r / R) ** 2) ** 2
        return np.exp(-((r / h) ** 2)) * taper

    @classmethod
    def _mls2d(cls, pts, vals, x, degree=2):
        d = pts - x
        r = np.linalg.norm(d, axis=1)
        w = cls._edge_weights(r)
        cols = [np.ones(len(d)), d[:, 0], d[:, 1],
                d[:, 0] ** 2, d[:, 0] * d[:, 1], d[:, 1] ** 2]
        if degree >= 3:
            cols += [d[:, 0] ** 3, d[:, 0] ** 2 * d[:, 1],
                     d[:, 0] * d[:, 1] ** 2, d[:, 1] ** 3]
        if degree >= 4:
            cols += [d[:, 0] ** 4, d[:, 0] ** 3 * d[:, 1], d[:, 0] ** 2 * d[:, 1] ** 2,
                     d[:, 0] * d[:, 1] ** 3, d[:, 1] ** 4]
        A = np.column_stack(cols)
        Aw = A * w[:, None]
        coeffs, *_ = np.linalg.lstsq(Aw.T @ A, Aw.T @ vals, rcond=None)
        return float(coeffs[0])

    @classmethod
    def _mls1d(cls, ts, vals, t):
        d = ts - t
        r = np.abs(d)
        w = cls._edge_weights(r)
        A = np.column_stack([np.ones(len(d)), d, d**2, d**3])
        Aw = A * w[:, None]
        coeffs, *_ = np.linalg.lstsq(Aw.T @ A, Aw.T @ vals, rcond=None)
        return float(coeffs[0])

    def _arc_delta(self, loop_id, s_ref):
        """Signed arclength offsets of the loop vertices relative to s_ref."""
        arcs = self._loop_arcs[loop_id]
        total = self._loop_lengths[loop_id]
        return (arcs - s_ref + total / 2) % total - total / 2

    # -- smooth field evaluation -----------------------------------------------

    def field_value_at(self, vid, spot):
        """Smooth x-slot evaluation of the pole-vid field at an ambient point
        or boundary location, with the pole's own log split off."""
        v_pos = self.mesh.vertices[vid]
        kap_v = green_mod.kappa(self.mesh, vid)
        fld = self.field(vid)

        def data(ids):
            pos = self.mesh.vertices[ids]
            rr = np.linalg.norm(pos - v_pos, axis=1)
            rr = np.maximum(rr, 1e-300)
            return fld[ids] + (4.0 / kap_v) * np.log(rr)

        if isinstance(spot, tuple):  # boundary location (loop_id, s)
            loop_id, s = spot
            ids = self._boundary_neighbors(loop_id, s, k=8)
            arcs_idx = [np.flatnonzero(self.mesh.boundary_loops[loop_id] == i)[0] for i in ids]
            ts = self._arc_delta(loop_id, s)[arcs_idx]
            val = self._mls1d(ts, data(ids), 0.0)
            x = self.mesh.loop_point(loop_id, s)
        else:
            x = np.asarray(spot, dtype=float)
            _, idx = self._all_tree.query(x, k=min(12, self.mesh.n_vertices))
            ids = np.atleast_1d(idx)
            val = self._mls2d(self.mesh.vertices[ids], data(ids), x)
        r = max(np.linalg.norm(x - v_pos), 1e-300)
        return val - (4.0 / kap_v) * np.log(r), val

    def green_value(self, spot_x, spot_z):
        """G(x, ζ) for two configuration slots (ambient points or boundary
        locations), both smooth in their arguments."""
        x = self._ambient(spot_x)
        z = self._ambient(spot_z)
        if isinstance(spot_x, tuple) and isinstance(spot_z, tuple):
            s_val = self._eval_pair_series(spot_x[0], spot_x[1], spot_z[0], spot_z[1])
            if s_val is not None:
                if spot_x[0] == spot_z[0]:
                    r = max(np.linalg.norm(x - z), 1e-300)
                    return s_val - np.log(r) / np.pi
                return s_val
        if isinstance(spot_z, tuple):
            loop_id, s = spot_z
            poles = self._boundary_neighbors(loop_id, s, k=6)
            smooth = []
            deltas = self._arc_delta(loop_id, s)
            ts = []
            for v in poles:
                _, sv = self.field_value_at(v, spot_x)
                smooth.append(sv)
                pos_in_loop = np.flatnonzero(self.mesh.boundary_loops[loop_id] == v)[0]
                ts.append(deltas[pos_in_loop])
            s_val = self._mls1d(np.asarray(ts), np.asarray(smooth), 0.0)
            kap_z = KAPPA_BOUNDARY
        else:
            poles = self._interior_neighbors(z, k=10)
            smooth = [self.field_value_at(v, spot_x)[1] for v in poles]
            s_val = self._mls2d(self.mesh.vertices[poles], np.asarray(smooth), z)
            kap_z = KAPPA_INTERIOR
        r = max(np.linalg.norm(x - z), 1e-300)
        return s_val - (4.0 / kap_z) * np.log(r)

    def robin_value(self, spot):
        """Robin function at a configuration slot (smooth interpolation of
        per-vertex Robin values; boundary slots use the per-loop low-pass
        series)."""
        if isinstance(spot, tuple):
            return self._eval_robin_series(spot[0], spot[1])
        x = np.asarray(spot, dtype=float)
        ids = self._interior_neighbors(x, k=36)
        vals = np.array([self.robin(v) for v in ids])
        return self._mls2d(self.mesh.vertices[ids], vals, x, degree=4)

    def regular_value(self, spot_x, spot_z):
        """H(x, ζ): Green minus its own chart log, smooth through x = ζ.

        Near the pole the per-vertex robin-fit quadratics are interpolated in
        the pole slot; far from it H is reconstructed from green_value.
        """
        x = self._ambient(spot_x)
        z = self._ambient(spot_z)
        dist = np.linalg.norm(x - z)
        if isinstance(spot_z, tuple):
            loop_id, s = spot_z
            pole_ids = self._boundary_neighbors(loop_id, s, k=6)
        else:
            pole_ids = self._interior_neighbors(z, k=10)
        window = 0.8 * min(self.regular(v).fit_radius for v in pole_ids[:3])
        if dist <= window:
            vals, ts, pos = [], [], []
            for v in pole_ids:
                rp = self.regular(v)
                y = rp.chart.to_chart(x[None, :])[0]
                vals.append(float(rp.local_model(y[None, :])[0]))
                pos.append(self.mesh.vertices[v])
            vals = np.asarray(vals)
            if isinstance(spot_z, tuple):
                deltas = self._arc_delta(loop_id, s)
                ts = [deltas[np.flatnonzero(self.mesh.boundary_loops[loop_id] == v)[0]]
                      for v in pole_ids]
                return self._mls1d(np.asarray(ts), vals, 0.0)
            return self._mls2d(np.asarray(pos), vals, z)
        # far branch: H = G + (4/κ) ln|y_ζ(x)|; ambient log and chart log
        # differ only by the smooth boundary-flattening factor
        g = self.green_value(spot_x, spot_z)
        if isinstance(spot_z, tuple):
            chart = self._transient_boundary_chart(spot_z)
            yx = chart.to_chart(x[None, :])[0]
            kap_z = KAPPA_BOUNDARY
            return g + (4.0 / kap_z) * np.log(max(np.linalg.norm(yx), 1e-300))
        return g + (4.0 / KAPPA_INTERIOR) * np.log(np.linalg.norm(x - z))

    def _transient_boundary_chart(self, spot):
        loop_id, s = spot
        x = self.mesh.loop_point(loop_id, s)
        return build_chart(self.mesh, x, radius=self._loop_lengths[loop_id] / 20.0)

    def _ambient(self, spot):
        if isinstance(spot, tuple):
            return self.curve_point(spot[0], spot[1])
        return np.asarray(spot, dtype=float)


def _trig_design(s, total, K):
    s = np.asarray(s, dtype=float)
    cols = [np.ones_like(s)]
    for k in range(1, K + 1):
        w = 2 * np.pi * k * s / total
        cols.append(np.cos(w))
        cols.append(np.sin(w))
    return np.column_stack(cols)


def _uniform_arcs(mesh, loop_id):
    lp = mesh.boundary_loops[loop_id]
    pts = mesh.vertices[lp]
    seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    return float(seg.max() - seg.min()) < 1e-9 * float(seg.mean())


class Landscape:
    """Evaluation, differentiation and critical-point census of the
    Kirchhoff-Routh landscape for a fixed potential."""

    def __init__(self, mesh: SurfaceMesh, L: NeumannLaplacian, V,
                 cache: GreenCache | None = None,
                 min_separation: float | None = None,
                 boundary_clearance: float | None = None):
        self.mesh = mesh
        self.L = L
        self.V = V
        self.cache = cache if cache is not None else GreenCache(mesh, L)
        bbox = mesh.vertices.max(axis=0) - mesh.vertices.min(axis=0)
        self.diam = float(np.linalg.norm(bbox))
        h = self.cache.h_typical
        self.min_separation = min_separation if min_separation is not None else max(4 * h, 0.02 * self.diam)
        self.clearance = boundary_clearance if boundary_clearance is not None else max(3 * h, 0.015 * self.diam)
        # floors tied to the mesh size: the interpolated landscape carries
        # mesh-wavelength ripples, and difference stencils must step over
        # them, not through them
        self.fd_step_grad = max(1e-3 * self.diam, 1.2 * h)
        self.fd_step_hess = max(5e-3 * self.diam, 2.5 * h)

    # -- configuration helpers -------------------------------------------------

    def _slots(self, config: Configuration):
        slots = [tuple(config.interior[i]) for i in range(config.p)]
        slots = [np.asarray(s) for s in slots]
        slots += [(l, s % self.cache._loop_lengths[l]) for l, s in config.boundary]
        return slots

    def _kappas(self, config: Configuration):
        return np.array([KAPPA_INTERIOR] * config.p + [KAPPA_BOUNDARY] * config.q)

    def _validate(self, config: Configuration):
        if config.p + config.q < 1 or 2 * config.p + config.q < 1:
            raise ConfigurationError("need at least one point (2p+q >= 1)")
        pos = self.positions(config)
        if len(pos) > 1:
            d = np.linalg.norm(pos[:, None] - pos[None, :], axis=2)
            if float(d[np.triu_indices(len(pos), 1)].min()) <= self.min_separation:
                raise ConfigurationError("configuration too close to the thick diagonal")
        if config.p and config.boundary_clearance(self.mesh) <= self.clearance:
            raise ConfigurationError("interior point too close to the boundary")
        for x in config.interior:
            if self.mesh.distance_to_boundary(x) <= 0 or not self._inside(x):
                raise ConfigurationError("interior point off the mesh")

    def _inside(self, x):
        from .mesh import _locate_triangle
        tri, _ = _locate_triangle(self.mesh, np.asarray(x, dtype=float))
        return tri is not None

    # -- landscape -------------------------------------------------------------

    def positions(self, config: Configuration) -> np.ndarray:
        """Ambient positions with boundary points on the smooth loop curve."""
        return np.array([self.cache._ambient(s) for s in self._slots(config)])

    def value(self, config: Configuration) -> float:
        self._validate(config)
        slots = self._slots(config)
        kap = self._kappas(config)
        pos = self.positions(config)
        # term-list + exact summation + a symmetrized pair kernel make the
        # value exactly invariant under permuting same-type points
        terms = [2.0 * kap[i] * float(np.log(self.V(pos[i]))) for i in range(len(slots))]
        terms += [kap[i] ** 2 * self.cache.robin_value(s) for i, s in enumerate(slots)]
        for i, j in itertools.combinations(range(len(slots)), 2):
            gij = 0.5 * (self.cache.green_value(slots[i], slots[j])
                         + self.cache.green_value(slots[j], slots[i]))
            terms.append(2.0 * kap[i] * kap[j] * gij)
        return math.fsum(terms)

    def f_interaction(self, x, config: Configuration, i: int) -> float:
        """The i-th interaction profile F^i at an ambient point or boundary
        location x: V(x)·exp{κ_i H(x,ξ_i) + Σ_{j≠i} κ_j G(x,ξ_j)}."""
        slots = self._slots(config)
        kap = self._kappas(config)
        xa = self.cache._ambient(x)
        for j, s in enumerate(slots):
            if j != i and np.linalg.norm(xa - self.cache._ambient(s)) < 1e-9 * self.diam:
                raise ConfigurationError("evaluation point coincides with another pole")
        expo = kap[i] * self.cache.regular_value(x, slots[i])
        for j, s in enumerate(slots):
            if j != i:
                expo += kap[j] * self.cache.green_value(x, s)
        return float(self.V(xa) * np.exp(expo))

    # -- coordinates for optimization -------------------------------------------

    def _to_theta(self, config: Configuration):
        return np.concatenate([config.interior.ravel(),
                               np.array([s for _, s in config.boundary])])

    def _from_theta(self, theta, p, q, loops):
        interior = theta[:2 * p].reshape(p, 2)
        boundary = [(loops[k], theta[2 * p + k]) for k in range(q)]
        return Configuration(interior=interior, boundary=boundary)

    def gradient(self, config: Configuration, step: float | None = None) -> np.ndarray:
        """Central finite differences: two components per interior point
        (chart coords), one per boundary point (arclength)."""
        step = step if step is not None else self.fd_step_grad
        theta = self._to_theta(config)
        loops = [l for l, _ in config.boundary]
        p, q = config.p, config.q
        last = None
        for _ in range(4):
            try:
                g = np.zeros_like(theta)
                for k in range(len(theta)):
                    tp, tm = theta.copy(), theta.copy()
                    tp[k] += step
                    tm[k] -= step
                    fp = self.value(self._from_theta(tp, p, q, loops))
                    fm = self.value(self._from_theta(tm, p, q, loops))
                    g[k] = (fp - fm) / (2 * step)
                return g
            except ConfigurationError as exc:
                last = exc
                step /= 2
        raise last

    def hessian(self, config: Configuration, step: float | None = None) -> np.ndarray:
        step = step if step is not None else self.fd_step_hess
        theta = self._to_theta(config)
        loops = [l for l, _ in config.boundary]
        p, q = config.p, config.q
        n = len(theta)

        def f(t):
            return self.value(self._from_theta(t, p, q, loops))

        last = None
        for _ in range(4):  # shrink when a stencil point leaves the valid set
            try:
                f0 = f(theta)
                H = np.zeros((n, n))
                for a in range(n):
                    ta_p, ta_m = theta.copy(), theta.copy()
                    ta_p[a] += step
                    ta_m[a] -= step
                    H[a, a] = (f(ta_p) - 2 * f0 + f(ta_m)) / step**2
                    for b in range(a + 1, n):
                        tpp, tpm, tmp, tmm = (theta.copy() for _ in range(4))
                        tpp[[a, b]] += step
                        tmm[[a, b]] -= step
                        tpm[a] += step
                        tpm[b] -= step
                        tmp[a] -= step
                        tmp[b] += step
                        H[a, b] = H[b, a] = (f(tpp) - f(tpm) - f(tmp) + f(tmm)) / (4 * step**2)
                return H
            except ConfigurationError as exc:
                last = exc
                step /= 2
        raise last

    # -- sign functionals --------------------------------------------------------

    def L1(self, config: Configuration, step: float | None = None) -> float:
        """Boundary sign functional -Σ (∂_ν ln V + 2 k_g) sqrt(F^i) over the
        boundary points; requires q >= 1."""
        if config.q < 1:
            raise ConfigurationError("L1 requires at least one boundary point")
        total = 0.0
        slots = self._slots(config)
        t_ln = step if step is not None else 1e-4 * self.diam
        for k, (loop_id, s) in enumerate(config.boundary):
            i = config.p + k
            x = self.cache.curve_point(loop_id, s)
            tang = self.cache.curve_tangent(loop_id, s)
            inward = np.array([-tang[1], tang[0]])
            dnu_lnV = (np.log(self.V(x - t_ln * inward)) - np.log(self.V(x + t_ln * inward))) / (2 * t_ln)
            kg = self.cache.curve_curvature(loop_id, s)
            Fi = self.f_interaction(slots[i], config, i)
            total -= (dnu_lnV + 2.0 * kg) * np.sqrt(max(Fi, 0.0))
        return float(total)

    def L2(self, config: Configuration, step: float | None = None) -> float:
        """Interior sign functional Σ κ_i (Δ F^i − 2 K_gauss F^i) at the
        points; requires q = 0."""
        if config.q != 0:
            raise ConfigurationError("L2 requires a purely interior configuration")
        step = step if step is not None else self.fd_step_hess
        total = 0.0
        for i in range(config.p):
            xi = config.interior[i]
            lap = self._fd_laplacian(lambda x: self.f_interaction(x, config, i), xi, step)
            Kg = self._gauss_at(xi)
            Fi = self.f_interaction(xi, config, i)
            total += KAPPA_INTERIOR * (lap - 2.0 * Kg * Fi)
        return float(total)

    def L(self, config: Configuration) -> float:
        """Dispatch: L1 when q != 0, L2 when q = 0."""
        return self.L1(config) if config.q else self.L2(config)

    def _fd_laplacian(self, f, x, step):
        x = np.asarray(x, dtype=float)
        vals = [f(x + step * np.array(d)) for d in ((1, 0), (-1, 0), (0, 1), (0, -1))]
        return (sum(vals) - 4.0 * f(x)) / step**2

    def _gauss_at(self, x):
        ids = self.cache._interior_neighbors(x, k=6)
        return float(np.mean(self.mesh.gauss_curvature[ids]))

    # -- census -------------------------------------------------------------------

    def find_critical_points(self, p: int, q: int, starts: int = 100,
                             tol: float = 0.5, seed: int = 0,
                             threads: int = 1) -> list[CriticalPoint]:
        """Multi-start root search on the FD gradient, deduplicated up to
        permutation, with Morse data and the V± classification attached.

        `tol` is an absolute bound on the gradient norm (the landscape has an
        arbitrary additive constant, so relative scaling is meaningless);
        converged roots land orders of magnitude below it.
        """
        if p < 0 or q < 0 or 2 * p + q < 1:
            raise ConfigurationError("need p, q >= 0 with 2p+q >= 1")
        rng = np.random.default_rng(seed)
        thetas = [self._random_start(p, q, rng) for _ in range(starts)]

        results = []
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=threads) as ex:
                for res in ex.map(lambda t: self._search_one(t, p, q, tol), thetas):
                    if res is not None:
                        results.append(res)
        else:
            for t in thetas:
                res = self._search_one(t, p, q, tol)
                if res is not None:
                    results.append(res)

        merged = self._dedup(results, p, q)
        out = [self._characterize(cfg, p, q) for cfg in merged]
        out.sort(key=lambda c: (round(c.value, 6), tuple(np.round(c.config.positions(self.mesh).ravel(), 6))))
        return out

    def census_sum(self, cps: list[CriticalPoint]) -> int:
        """Σ multiplicity·(−1)^morse over the (deduplicated) critical points:
        the ordered Poincare-Hopf count."""
        return int(sum(cp.multiplicity * (-1) ** cp.morse_index for cp in cps))

    def _random_start(self, p, q, rng):
        pts = []
        areas = self.mesh.triangle_area / self.mesh.triangle_area.sum()
        guard = 0
        while len(pts) < p:
            guard += 1
            if guard > 4000:
                raise ConfigurationError("cannot sample interior starts (domain too tight)")
            t = rng.choice(len(areas), p=areas)
            b = rng.dirichlet(np.ones(3))
            x = b @ self.mesh.vertices[self.mesh.triangles[t]]
            if self.mesh.distance_to_boundary(x) <= 1.5 * self.clearance:
                continue
            if any(np.linalg.norm(x - y) <= 1.5 * self.min_separation for y in pts):
                continue
            pts.append(x)
        lengths = np.array(self.cache._loop_lengths)
        bnd = []
        guard = 0
        while len(bnd) < q:
            guard += 1
            if guard > 4000:
                raise ConfigurationError("cannot sample boundary starts")
            loop = int(rng.choice(len(lengths), p=lengths / lengths.sum()))
            s = float(rng.uniform(0, lengths[loop]))
            x = self.cache.curve_point(loop, s)
            others = pts + [self.cache.curve_point(l, ss) for l, ss in bnd]
            if any(np.linalg.norm(x - y) <= 1.5 * self.min_separation for y in others):
                continue
            bnd.append((loop, s))
        theta = np.concatenate([np.ravel(pts)[:2 * p] if p else np.zeros(0),
                                np.array([s for _, s in bnd])])
        loops = [l for l, _ in bnd]
        return theta, loops

    def _search_one(self, start, p, q, tol):
        theta0, loops = start

        def fd_grad(theta):
            try:
                return self.gradient(self._from_theta(theta, p, q, loops))
            except ConfigurationError:
                return np.full_like(theta, 1e8)

        try:
            sol = optimize.root(fd_grad, theta0, method="hybr",
                                options={"xtol": 1e-12, "maxfev": 200 * (len(theta0) + 1)})
        except Exception:
            return None
        theta = self._newton_polish(sol.x, p, q, loops, tol)
        if theta is None:
            return None
        try:
            cfg = self._from_theta(theta, p, q, loops)
            g = self.gradient(cfg)
        except ConfigurationError:
            return None
        if np.linalg.norm(g) > tol:
            return None
        return cfg

    def _newton_polish(self, theta, p, q, loops, tol, iters=10):
        """Damped Newton on the FD gradient; rescues roots the hybrid method
        stalls on when the Hessian is strongly anisotropic."""
        try:
            g = self.gradient(self._from_theta(theta, p, q, loops))
        except ConfigurationError:
            return None
        gn = np.linalg.norm(g)
        lam = 0.0
        for _ in range(iters):
            if gn <= 1e-6 * max(tol, 1.0):
                break
            try:
                H = self.hessian(self._from_theta(theta, p, q, loops))
            except ConfigurationError:
                return None
            for _ in range(6):
                try:
                    step = np.linalg.solve(H + lam * np.eye(len(g)), -g)
                except np.linalg.LinAlgError:
                    lam = max(2 * lam, 1e-6 * np.abs(H).max())
                    continue
                try:
                    g_new = self.gradient(self._from_theta(theta + step, p, q, loops))
                except ConfigurationError:
                    lam = max(4 * lam, 1e-4 * np.abs(H).max())
                    continue
                if np.linalg.norm(g_new) < gn:
                    theta = theta + step
                    g, gn = g_new, np.linalg.norm(g_new)
                    lam /= 4
                    break
                lam = max(4 * lam, 1e-4 * np.abs(H).max())
            else:
                break
        return theta

    def _config_distance(self, a: Configuration, b: Configuration):
        pa, pb = self.positions(a), self.positions(b)
        p, q = a.p, a.q
        best = np.inf
        for perm_i in itertools.permutations(range(p)):
            for perm_b in itertools.permutations(range(p, p + q)):
                perm = list(perm_i) + list(perm_b)
                d = np.max(np.linalg.norm(pa - pb[perm], axis=1)) if len(perm) else 0.0
                best = min(best, d)
        return best

    def _dedup(self, configs, p, q):
        radius = 1e-2 * self.diam
        out = []
        for cfg in configs:
            if all(self._config_distance(cfg, other) > radius for other in out):
                out.append(cfg)
        return out

    def _orderings(self, cfg: Configuration):
        """Number of distinct ordered tuples representing this configuration."""
        radius = 1e-2 * self.diam
        pos = self.positions(cfg)
        p, q = cfg.p, cfg.q
        stab = 0
        for perm_i in itertools.permutations(range(p)):
            for perm_b in itertools.permutations(range(p, p + q)):
                perm = list(perm_i) + list(perm_b)
                d = np.max(np.linalg.norm(pos - pos[perm], axis=1)) if len(perm) else 0.0
                if d <= radius:
                    stab += 1
        return (math.factorial(p) * math.factorial(q)) // max(stab, 1)

    def _characterize(self, cfg: Configuration, p, q) -> CriticalPoint:
        g = self.gradient(cfg)
        H1 = self.hessian(cfg, self.fd_step_hess)
        H2 = self.hessian(cfg, self.fd_step_hess / 2)
        # per-eigenvalue significance: a stiff direction must not mask
        # degeneracy thresholds for the soft ones
        e1 = np.sort(np.linalg.eigvalsh(H1))
        eigs = np.sort(np.linalg.eigvalsh(H2))
        sigma_eig = 10.0 * np.abs(e1 - eigs) / 3.0 + 1e-12
        degenerate_hess = bool(np.any(np.abs(eigs) < sigma_eig))
        morse = int(np.sum(eigs < 0))

        if q:
            L_a = self.L1(cfg, 1e-4 * self.diam)
            L_b = self.L1(cfg, 0.5e-4 * self.diam)
            sigma_L = 10.0 * abs(L_a - L_b) / 3.0 + 1e-12
            Lv = L_b
        else:
            L_a = self.L2(cfg, self.fd_step_hess)
            L_b = self.L2(cfg, self.fd_step_hess / 2)
            sigma_L = 10.0 * abs(L_a - L_b) / 3.0 + 1e-12
            Lv = L_b
        if degenerate_hess or abs(Lv) <= sigma_L:
            cls = "degenerate"
        else:
            cls = "V_minus" if Lv < 0 else "V_plus"
        return CriticalPoint(config=cfg, value=self.value(cfg),
                             grad_norm=float(np.linalg.norm(g)),
                             morse_index=morse, hessian_eigs=eigs,
                             L_value=float(Lv), L_sigma=float(sigma_L),
                             classification=cls,
                             multiplicity=self._orderings(cfg),
                             degenerate_hessian=degenerate_hess)
