"""Closed-form Leray-Schauder degree tables, exact in integer arithmetic.

For rho in (4π(m-1), 4πm) the degree depends only on m and the Euler
characteristic chi:

    d(m) = 1                                  for m = 1, 2
    d(m) = (1/l!) * prod_{i=1..l} (i - chi)   for m >= 3,  l = floor((m-1)/2)
         = binom(l - chi, l),

the jump across 4πm vanishes for odd m and equals
(1/p!) * prod_{i=0..p-1} (-chi + i) for m = 2p, and the Poincare-Hopf count
of the point-configuration gradient field is prod_{i=0..p-1} (chi - i) for
q = 0 and 0 otherwise.  All entries are computed as exact rationals; the
factorials must divide out, and any non-integer remainder raises.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class DegreeError(Exception):
    """Formula transcription bug: a degree evaluated to a non-integer."""


M_MAX = 64  # bounds big-integer growth; desk scale


def _as_int(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise DegreeError(f"{what} is not an integer: {x}")
    return int(x)


def _binom_general(n: int, k: int) -> int:
    """binom(n, k) for any integer n (falling factorial over k!), k >= 0."""
    if k < 0:
        raise ValueError("k must be non-negative")
    num = Fraction(1)
    for i in range(k):
        num *= Fraction(n - i)
    for i in range(1, k + 1):
        num /= i
    return _as_int(num, f"binom({n},{k})")


def chi_from(genus: int, boundaries: int) -> int:
    """Euler characteristic 2 - 2g - b."""
    if genus < 0 or boundaries < 1:
        raise ValueError("need genus >= 0 and at least one boundary component")
    return 2 - 2 * genus - boundaries


def degree_nonresonant(m: int, chi: int) -> int:
    """Degree on the interval (4π(m-1), 4πm)."""
    if not 1 <= m <= M_MAX:
        raise ValueError(f"m must be in [1, {M_MAX}]")
    ell = (m - 1) // 2
    if m in (1, 2):
        product = 1
    else:
        prod = Fraction(1)
        for i in range(1, ell + 1):
            prod *= Fraction(i - chi)
        for i in range(1, ell + 1):
            prod /= i
        product = _as_int(prod, f"degree(m={m}, chi={chi})")
    binom = _binom_general(ell - chi, ell)
    if product != binom:
        raise DegreeError(
            f"product form {product} != binomial form {binom} at m={m}, chi={chi}")
    return product


def ph_degree(p: int, q: int, chi: int) -> int:
    """Poincare-Hopf degree of the configuration gradient field on Xi_{p,q}."""
    if p < 0 or q < 0 or 2 * p + q < 1:
        raise ValueError("need p, q >= 0 with 2p+q >= 1")
    if q != 0:
        return 0
    out = 1
    for i in range(p):
        out *= chi - i
    return out


def degree_jump(m: int, chi: int) -> int:
    """Jump d_m^+ - d_m^- across the resonant value 4πm (0 for odd m)."""
    if not 1 <= m <= M_MAX:
        raise ValueError(f"m must be in [1, {M_MAX}]")
    if m % 2 == 1:
        return 0
    p = m // 2
    prod = Fraction(1)
    for i in range(p):
        prod *= Fraction(-chi + i)
    for i in range(1, p + 1):
        prod /= i
    return _as_int(prod, f"jump(m={m}, chi={chi})")


@dataclass(frozen=True)
class DegreeRow:
    m: int
    rho_interval: tuple
    degree: int
    jump: int
    ph_counts: dict  # (p, q) -> Poincare-Hopf count, over 2p+q = m
    exists: bool  # nonzero degree forces a solution on the interval


@dataclass(frozen=True)
class DegreeTable:
    chi: int
    genus: int
    boundaries: int
    rows: list


def degree_table(genus: int, boundaries: int, m_max: int) -> DegreeTable:
    """Full table for m = 1..m_max with the telescoping identity verified."""
    if not 1 <= m_max <= M_MAX:
        raise ValueError(f"m_max must be in [1, {M_MAX}]")
    chi = chi_from(genus, boundaries)
    rows = []
    running = 1  # degree on (0, 4π)
    for m in range(1, m_max + 1):
        d = degree_nonresonant(m, chi)
        if d != running:
            raise DegreeError(
                f"telescoping failed at m={m}, chi={chi}: closed form {d}, running {running}")
        jump = degree_jump(m, chi)
        ph = {(p, m - 2 * p): ph_degree(p, m - 2 * p, chi) for p in range(m // 2 + 1)}
        rows.append(DegreeRow(
            m=m,
            rho_interval=(4 * (m - 1), 4 * m),  # in units of pi
            degree=d,
            jump=jump,
            ph_counts=ph,
            exists=d != 0,
        ))
        running = d + jump
    return DegreeTable(chi=chi, genus=genus, boundaries=boundaries, rows=rows)
