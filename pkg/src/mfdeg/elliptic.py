"""Cotangent Laplace-Beltrami operator with natural (Neumann) boundary data.

Fields are plain per-vertex numpy arrays.  Loads passed to the zero-mean
solver are vertex functionals (already mass-weighted when they represent
measures): the entries of the P1 load vector, whose plain sum is the integral
of the represented density.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .mesh import MeshError, SurfaceMesh


class SolverError(Exception):
    """Linear solve failed or the load violates Neumann compatibility."""


class NeumannLaplacian:
    """Assembled stiffness/mass pair with a reusable zero-mean factorization.

    Immutable after assembly; the factorization may be shared by concurrent
    readers (solves do not mutate state).
    """

    def __init__(self, mesh: SurfaceMesh):
        self.mesh = mesh
        self.stiffness = _cotan_stiffness(mesh)
        self.mass = mesh.vertex_area.copy()
        self._factor = None

    @property
    def n(self):
        return self.mesh.n_vertices

    def _factorize(self):
        if self._factor is None:
            n = self.n
            m = sp.csc_matrix((self.mass, (np.arange(n), np.full(n, 0))), shape=(n, 1))
            bordered = sp.bmat([[self.stiffness, m], [m.T, None]], format="csc")
            try:
                self._factor = spla.splu(bordered)
            except RuntimeError as exc:  # pragma: no cover - fallback path
                raise SolverError(f"factorization failed: {exc}") from exc
        return self._factor

    def solve_zero_mean(self, load: np.ndarray) -> np.ndarray:
        """Solve -Δu = f for the zero-mean u, f given as a load vector.

        Compatibility (sum of the load = ∫f = 0) is required to 1e-10
        relative; the constant null space is handled by a Lagrange
        multiplier against the mass vector, which preserves symmetry.
        """
        load = np.asarray(load, dtype=float)
        if load.shape != (self.n,):
            raise MeshError("load vector length does not match the mesh")
        total = abs(float(load.sum()))
        if total > 1e-10 * max(1.0, np.abs(load).sum()):
            raise SolverError(f"incompatible load: nonzero mean {load.sum():.3e}")
        rhs = np.concatenate([load, [0.0]])
        sol = self._factorize().solve(rhs)
        u = sol[:-1]
        u -= self.mass @ u / self.mass.sum()
        return u

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Dirichlet inner product ∫⟨∇u, ∇v⟩."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != (self.n,) or v.shape != (self.n,):
            raise MeshError("field length does not match the mesh")
        return float(u @ (self.stiffness @ v))

    def norm(self, u: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(u, u), 0.0)))

    def integrate(self, u: np.ndarray) -> float:
        """Lumped ∫u over the surface."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise MeshError("field length does not match the mesh")
        return float(self.mass @ u)

    def boundary_integrate(self, u: np.ndarray) -> float:
        """Trapezoidal ∫u over all boundary loops."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.n,):
            raise MeshError("field length does not match the mesh")
        total = 0.0
        for lp in self.mesh.boundary_loops:
            vals = u[lp]
            pts = self.mesh.vertices[lp]
            seg = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
            total += float(np.sum(seg * 0.5 * (vals + np.roll(vals, -1))))
        return total

    def point_load(self, vid: int) -> np.ndarray:
        """Unit vertex functional (discrete Dirac mass)."""
        e = np.zeros(self.n)
        e[int(vid)] = 1.0
        return e

    def function_load(self, values: np.ndarray) -> np.ndarray:
        """Load vector of a pointwise density sampled at vertices."""
        return self.mass * np.asarray(values, dtype=float)


def assemble(mesh: SurfaceMesh) -> NeumannLaplacian:
    """Cotangent stiffness + lumped mass; Neumann is the do-nothing condition."""
    return NeumannLaplacian(mesh)


def _cotan_stiffness(mesh: SurfaceMesh) -> sp.csr_matrix:
    tris = mesh.triangles
    p = mesh.vertices[tris]
    if np.any(mesh.triangle_area <= 0):
        raise MeshError("degenerate triangle in stiffness assembly")
    rows, cols, vals = [], [], []
    for k in range(3):
        i = tris[:, (k + 1) % 3]
        j = tris[:, (k + 2) % 3]
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cross = np.cross(u, v)
        if np.any(np.abs(cross) < 1e-300):
            raise MeshError("degenerate triangle in stiffness assembly")
        cot = (u * v).sum(axis=1) / cross
        w = 0.5 * cot
        rows.extend([i, j, i, j])
        cols.extend([j, i, i, j])
        vals.extend([-w, -w, w, w])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    n = mesh.n_vertices
    K = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    K.sum_duplicates()
    return K
