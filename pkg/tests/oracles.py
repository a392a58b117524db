"""Independent closed-form references used by the tests.

Method-of-images Neumann Green function for a disk of radius R with uniform
compensating mass and zero mean:

    G(x, ξ) = -(1/2π)[ ln|x'-ξ'| + ln|x'-ξ*'| ] + |x'|²/(4π) + d(ξ'),

in unit-disk coordinates x' = x/R, with the image ξ*' = ξ'/|ξ'|² (same-sign
image: Neumann reflection).  The constant d enforces zero mean; at interior
poles the near-field is -(1/2π)ln|x-ξ|, at boundary poles the two log terms
merge into -(1/π)ln|x-ξ|.  Everything here is derived independently of the
package (direct verification: Laplacian, boundary flux, mean).
"""

from __future__ import annotations

import numpy as np


def disk_green(x, xi, radius=1.0):
    """Images-oracle Green function on the disk of the given radius."""
    x = np.atleast_2d(np.asarray(x, dtype=float)) / radius
    xi = np.asarray(xi, dtype=float) / radius
    rho = np.linalg.norm(xi)
    if rho < 1e-14:
        val = -np.log(np.linalg.norm(x, axis=1)) / (2 * np.pi) \
            + (x**2).sum(axis=1) / (4 * np.pi) - 3.0 / (8 * np.pi)
        return val if val.shape[0] > 1 else float(val[0])
    if abs(rho - 1.0) < 1e-12:
        d = -1.0 / (8 * np.pi)
        val = -np.log(np.linalg.norm(x - xi, axis=1)) / np.pi \
            + (x**2).sum(axis=1) / (4 * np.pi) + d
        return val if val.shape[0] > 1 else float(val[0])
    image = xi / rho**2
    d = ((rho**2 - 1.0) / 4.0 - 0.5 * np.log(rho) - 1.0 / 8.0) / np.pi
    val = -(np.log(np.linalg.norm(x - xi, axis=1))
            + np.log(np.linalg.norm(x - image, axis=1))) / (2 * np.pi) \
        + (x**2).sum(axis=1) / (4 * np.pi) + d
    return val if val.shape[0] > 1 else float(val[0])


def disk_robin_interior(xi, radius=1.0):
    """Robin function H(ξ,ξ) at an interior pole of the disk (κ = 8π chart)."""
    rho = np.linalg.norm(np.asarray(xi, dtype=float)) / radius
    r_unit = (-0.5 * np.log(1.0 - rho**2) + rho**2 / 2.0 - 3.0 / 8.0) / np.pi
    return r_unit + np.log(radius) / (2 * np.pi)


def disk_robin_boundary(radius=1.0):
    """Robin value at any boundary point of the disk (κ = 4π chart)."""
    return 1.0 / (8 * np.pi) + np.log(radius) / np.pi


def bubble_total_mass(lam, rmax):
    """∫ e^{δ̃} over the disk of radius rmax around the bubble center (exact)."""
    u = lam * rmax
    return 8 * np.pi * u**2 / (1.0 + u**2)
