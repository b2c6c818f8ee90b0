"""The two-tori sewing geometry.

A genus-two surface is built from tori of moduli tau_1, tau_2 by excising
disks and identifying annuli via z_1 z_2 = eps, for eps in the domain
|eps| < (1/4) D(q_1) D(q_2).  All genus-two data is carried by the
matrices

    A_a(k,l) = eps^{(k+l)/2} / sqrt(k l) * C(k,l,tau_a),   k,l >= 1,

truncated here at K x K.  This module computes det(I - A1 A2) (by the
trace-log series and by direct factorization, cross-checked), the
resolvent (I - A1 A2)^{-1}, the period matrix, the holomorphic one-forms
nu_i, the bilinear form omega2 and the projective connection, plus the
numeric cycle integrals used to validate them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DomainError, InconsistencyError, IntegrationPathError)
from .series import (DEFAULT_ORDER, TorusModulus, as_modulus, binom_factor,
                     elliptic_P_fourier, lattice_distance,
                     min_lattice_distance)

DEFAULT_K = 16


class SewingPoint:
    """A triple (tau_1, tau_2, eps) inside the sewing domain.

    sqrt_eps is the principal square root, fixed once and reused for all
    half-integer powers; every exported quantity involves it only through
    integer powers of eps.  margin is the fraction |eps| / bound of the
    domain bound actually used.
    """

    __slots__ = ("tau1", "tau2", "eps", "sqrt_eps")

    def __init__(self, tau1, tau2, eps):
        self.tau1 = as_modulus(tau1)
        self.tau2 = as_modulus(tau2)
        self.eps = complex(eps)
        bound = self.domain_bound()
        if not abs(self.eps) < bound:
            raise DomainError(
                f"|eps| = {abs(self.eps):.6g} outside the sewing domain "
                f"bound {bound:.6g}")
        self.sqrt_eps = cmath.sqrt(self.eps)

    @classmethod
    def from_margin(cls, tau1, tau2, margin, phase=0.0):
        """Point with |eps| = margin * bound and the given eps phase."""
        probe = cls(tau1, tau2, 0.0)
        eps = margin * probe.domain_bound() * cmath.exp(1j * phase)
        return cls(probe.tau1, probe.tau2, eps)

    def domain_bound(self) -> float:
        return 0.25 * (min_lattice_distance(self.tau1)
                       * min_lattice_distance(self.tau2))

    @property
    def margin(self) -> float:
        return abs(self.eps) / self.domain_bound()

    def modulus(self, side: int) -> TorusModulus:
        if side not in (1, 2):
            raise ValueError("side must be 1 or 2")
        return self.tau1 if side == 1 else self.tau2

    def excised_radius(self, side: int) -> float:
        """Radius |eps|/r_abar of the disk removed from torus `side`,
        with r_a = D(q_a)/2 (the maximal sewing radii)."""
        other = min_lattice_distance(self.modulus(3 - side))
        return abs(self.eps) / (0.5 * other)

    def swapped(self) -> "SewingPoint":
        return SewingPoint(self.tau2, self.tau1, self.eps)

    def with_eps(self, eps) -> "SewingPoint":
        return SewingPoint(self.tau1, self.tau2, eps)

    def __repr__(self):
        return (f"SewingPoint(tau1={self.tau1.tau}, tau2={self.tau2.tau}, "
                f"eps={self.eps})")


@dataclass(frozen=True)
class SheetPoint:
    """A point z on the punctured torus number `sheet` (1 or 2)."""
    sheet: int
    z: complex

    def __post_init__(self):
        if self.sheet not in (1, 2):
            raise ValueError("sheet must be 1 or 2")


def validate_sheet_point(x: SheetPoint, point: SewingPoint,
                         clearance: float = 1.0) -> None:
    """Check that x stays outside the excised disk of its torus."""
    mod = point.modulus(x.sheet)
    rho = point.excised_radius(x.sheet)
    if lattice_distance(mod, x.z) <= clearance * rho:
        raise DomainError(
            f"point {x.z} lies inside the excised disk (radius {rho:.6g}) "
            f"of torus {x.sheet}")


def a_matrix(side: int, point: SewingPoint, K: int = DEFAULT_K,
             order: int = DEFAULT_ORDER) -> np.ndarray:
    """K x K truncation of A_side(k,l) = eps^{(k+l)/2}/sqrt(kl) C(k,l,tau)."""
    if K < 2:
        raise ValueError("K must be >= 2")
    mod = point.modulus(side)
    se = point.sqrt_eps
    sep = np.array([se ** k for k in range(1, K + 1)])
    out = np.zeros((K, K), dtype=complex)
    for k in range(1, K + 1):
        for l in range(k, K + 1):
            if (k + l) % 2:
                continue
            sign = -1.0 if k % 2 == 0 else 1.0
            c = sign * binom_factor(k, l) * mod.eisenstein(k + l, order)
            v = sep[k - 1] * sep[l - 1] / math.sqrt(k * l) * c
            out[k - 1, l - 1] = v
            out[l - 1, k - 1] = v
    return out


def log_det_trace_series(point: SewingPoint, K: int = DEFAULT_K,
                         n_max: int = 64, tol: float = 1e-16) -> complex:
    """log det(I - A1 A2) = -sum_{n>=1} Tr((A1 A2)^n)/n.

    This is the canonical branch datum: every half-integer power of the
    determinant is defined through it.  Iterates until the term drops
    below tol or n_max is reached.
    """
    prod = a_matrix(1, point, K) @ a_matrix(2, point, K)
    power = np.eye(K, dtype=complex)
    acc = 0j
    for n in range(1, n_max + 1):
        power = power @ prod
        term = np.trace(power) / n
        acc -= term
        if abs(term) < tol:
            break
    return acc


def det_I_minus_A1A2(point: SewingPoint, K: int = DEFAULT_K,
                     tol: float = 1e-10) -> complex:
    """det(I - A1 A2), via the trace-log series, cross-checked against a
    direct factorization of the truncated matrix."""
    val = cmath.exp(log_det_trace_series(point, K))
    prod = a_matrix(1, point, K) @ a_matrix(2, point, K)
    direct = complex(np.linalg.det(np.eye(K) - prod))
    if abs(val - direct) > 100 * tol * max(1.0, abs(val)):
        raise InconsistencyError(
            f"determinant routes disagree: trace-log {val}, direct {direct}")
    return val


def resolvent(point: SewingPoint, K: int = DEFAULT_K) -> np.ndarray:
    """(I - A1 A2)^{-1} by direct solve, checked against the Neumann series
    summed to machine stagnation."""
    prod = a_matrix(1, point, K) @ a_matrix(2, point, K)
    eye = np.eye(K, dtype=complex)
    try:
        out = np.linalg.solve(eye - prod, eye)
    except np.linalg.LinAlgError as exc:
        raise InconsistencyError(
            "I - A1 A2 is singular at the truncation; the point is likely "
            "outside the usable domain") from exc
    series = eye.copy()
    term = eye.copy()
    for _ in range(512):
        term = term @ prod
        series += term
        if np.max(np.abs(term)) < 1e-17 * max(1.0, np.max(np.abs(series))):
            break
    if np.max(np.abs(series - out)) > 1e-8 * max(1.0, np.max(np.abs(out))):
        raise InconsistencyError("resolvent solve disagrees with the "
                                 "Neumann series")
    return out


def _resolvent_pair(point: SewingPoint, K: int):
    """(I - A1 A2)^{-1} and (I - A2 A1)^{-1} plus the A matrices."""
    a1 = a_matrix(1, point, K)
    a2 = a_matrix(2, point, K)
    eye = np.eye(K, dtype=complex)
    r12 = np.linalg.solve(eye - a1 @ a2, eye)
    r21 = np.linalg.solve(eye - a2 @ a1, eye)
    return a1, a2, r12, r21


@dataclass(frozen=True)
class PeriodMatrix:
    """Symmetric 2x2 period matrix with a truncation error estimate."""
    omega11: complex
    omega12: complex
    omega22: complex
    est_error: float = 0.0

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.omega11, self.omega12],
                         [self.omega12, self.omega22]])

    def imag_is_positive_definite(self) -> bool:
        return bool(np.all(np.linalg.eigvalsh(self.as_matrix().imag) > 0))

    def entry(self, i: int, j: int) -> complex:
        return self.as_matrix()[i - 1, j - 1]


def _period_entries(point: SewingPoint, K: int):
    a1, a2, r12, r21 = _resolvent_pair(point, K)
    eps = point.eps
    om11 = point.tau1.tau + eps * (a2 @ r12)[0, 0] / (2j * math.pi)
    om22 = point.tau2.tau + eps * (a1 @ r21)[0, 0] / (2j * math.pi)
    om12 = -eps * r12[0, 0] / (2j * math.pi)
    return om11, om12, om22


def period_matrix(point: SewingPoint, K: int = DEFAULT_K) -> PeriodMatrix:
    """The period matrix of the sewn surface:

        2 pi i Om_11 = 2 pi i tau_1 + eps (A2 (I-A1A2)^{-1})(1,1)
        2 pi i Om_22 = 2 pi i tau_2 + eps (A1 (I-A2A1)^{-1})(1,1)
        2 pi i Om_12 = -eps (I-A1A2)^{-1}(1,1)

    est_error is the max entry change between truncations K and K-4.
    """
    om11, om12, om22 = _period_entries(point, K)
    if K > 5:
        p11, p12, p22 = _period_entries(point, K - 4)
        est = max(abs(om11 - p11), abs(om12 - p12), abs(om22 - p22))
    else:
        est = float("nan")
    return PeriodMatrix(om11, om12, om22, est)


def _a_row(side: int, point: SewingPoint, z, K: int,
           order: int = DEFAULT_ORDER) -> np.ndarray:
    """Row vector a_side(k, z)/dz = sqrt(k) eps^{k/2} P_{k+1}(tau_side, z),
    k = 1..K.  z may be an array; rows are stacked along the first axis."""
    mod = point.modulus(side)
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.zeros((zs.size, K), dtype=complex)
    for k in range(1, K + 1):
        pk = elliptic_P_fourier(k + 1, mod, zs, order)
        out[:, k - 1] = math.sqrt(k) * point.sqrt_eps ** k * pk
    return out


def one_form_nu(i: int, x: SheetPoint, point: SewingPoint,
                K: int = DEFAULT_K) -> complex:
    """Coefficient of dx in the holomorphic one-form nu_i at x.

    nu_i(x) = dx + eps^{1/2} (a_i(x) A_ibar (I - A_i A_ibar)^{-1})(1)
    on the torus i, and
    nu_i(x) = -eps^{1/2} (a_ibar(x) (I - A_i A_ibar)^{-1})(1)
    on the other torus.
    """
    if i not in (1, 2):
        raise ValueError("form index must be 1 or 2")
    validate_sheet_point(x, point)
    a1, a2, r12, r21 = _resolvent_pair(point, K)
    a_i, a_ib = (a1, a2) if i == 1 else (a2, a1)
    r_i = r12 if i == 1 else r21     # (I - A_i A_ibar)^{-1}
    row = _a_row(x.sheet, point, x.z, K)[0]
    if x.sheet == i:
        return 1.0 + point.sqrt_eps * (row @ a_ib @ r_i)[0]
    return -point.sqrt_eps * (row @ r_i)[0]


def omega2(x: SheetPoint, y: SheetPoint, point: SewingPoint,
           K: int = DEFAULT_K) -> complex:
    """Coefficient of dx dy in the normalized bilinear form of the second
    kind:

        same sheet a:   P_2(tau_a, x-y) + a_a(x) A_abar (I-A_a A_abar)^{-1} a_a(y)^T
        cross sheet:    -a_a(x) (I - A_abar A_a)^{-1} a_abar(y)^T
    """
    validate_sheet_point(x, point)
    validate_sheet_point(y, point)
    a1, a2, r12, r21 = _resolvent_pair(point, K)
    row_x = _a_row(x.sheet, point, x.z, K)[0]
    row_y = _a_row(y.sheet, point, y.z, K)[0]
    if x.sheet == y.sheet:
        a = x.sheet
        mod = point.modulus(a)
        if lattice_distance(mod, x.z - y.z) == 0:
            raise DomainError("omega2 requires x != y on a common sheet")
        a_ib = a2 if a == 1 else a1
        r = r12 if a == 1 else r21
        return (elliptic_P_fourier(2, mod, x.z - y.z)
                + row_x @ a_ib @ r @ row_y)
    a = x.sheet
    r = r21 if a == 1 else r12      # (I - A_abar A_a)^{-1}
    return -(row_x @ r @ row_y)


def projective_connection(x: SheetPoint, point: SewingPoint,
                          K: int = DEFAULT_K) -> complex:
    """Coefficient of dx^2 in the projective connection

        s(x) = 6 lim_{y->x} (omega2(x,y) - 1/(x-y)^2),

    evaluated analytically: the subtracted diagonal limit of P_2 is
    E_2(tau_a), the matrix part is continuous.
    """
    validate_sheet_point(x, point)
    a1, a2, r12, r21 = _resolvent_pair(point, K)
    a = x.sheet
    mod = point.modulus(a)
    row = _a_row(a, point, x.z, K)[0]
    a_ib = a2 if a == 1 else a1
    r = r12 if a == 1 else r21
    return 6.0 * (mod.eisenstein(2) + row @ a_ib @ r @ row)


# -- numeric cycle integrals -------------------------------------------------

def _gauss_panels(z0: complex, shift: complex, panels: int, nodes: int = 16):
    """Nodes and weights for composite Gauss-Legendre on [z0, z0+shift]."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    zs = []
    ws = []
    for p in range(panels):
        lo = p / panels
        hi = (p + 1) / panels
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        zs.append(z0 + (mid + half * xg) * shift)
        ws.append(half * wg * shift)
    return np.concatenate(zs), np.concatenate(ws)


def contour_integral(fvec, z0: complex, shift: complex, point: SewingPoint,
                     sheet: int, tol: float = 1e-8,
                     nodes_per_unit: float = 64.0) -> complex:
    """Integrate a holomorphic integrand along the straight segment
    z0 -> z0 + shift on the given torus, doubling the panel count until
    the value is stable.

    `fvec` maps an array of z values to integrand values.  The path is
    rejected (IntegrationPathError) if any node comes within 1.1x of the
    excised-disk radius of a lattice point.
    """
    mod = point.modulus(sheet)
    rho = point.excised_radius(sheet)
    panels = max(2, int(math.ceil(abs(shift) * nodes_per_unit / 16.0)))
    prev = None
    for _ in range(5):
        zs, ws = _gauss_panels(z0, shift, panels)
        clear = min(lattice_distance(mod, z) for z in zs)
        if clear <= 1.1 * rho:
            raise IntegrationPathError(
                f"contour clearance {clear:.4g} inside 1.1 x excised radius "
                f"{rho:.4g}; no safe straight path")
        val = np.sum(fvec(zs) * ws)
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        panels *= 2
    raise IntegrationPathError(
        f"contour quadrature did not stabilise below {tol}")


def _nu_batch(i: int, sheet: int, zs: np.ndarray, point: SewingPoint,
              K: int) -> np.ndarray:
    """Vectorized nu_i(dz-coefficient) at many points on one sheet."""
    a1, a2, r12, r21 = _resolvent_pair(point, K)
    a_ib = a2 if i == 1 else a1
    r_i = r12 if i == 1 else r21
    rows = _a_row(sheet, point, zs, K)
    if sheet == i:
        vec = (a_ib @ r_i)[:, 0]
        return 1.0 + point.sqrt_eps * rows @ vec
    return -point.sqrt_eps * rows @ r_i[:, 0]


def _base_point(point: SewingPoint, sheet: int) -> complex:
    d = min_lattice_distance(point.modulus(sheet))
    return 0.45 * d * cmath.exp(1j * math.pi / 4)


def cycle_period(i: int, j: int, cycle: str, point: SewingPoint,
                 K: int = DEFAULT_K, tol: float = 1e-8) -> complex:
    """Numeric cycle integral of nu_j along the a_i or b_i cycle.

    The a_i cycle is the straight segment z -> z + 2 pi i on torus i, the
    b_i cycle z -> z + 2 pi i tau_i, both based at phase pi/4 relative to
    the excised disk.
    """
    if cycle not in ("a", "b"):
        raise ValueError("cycle must be 'a' or 'b'")
    mod = point.modulus(i)
    shift = 2j * math.pi if cycle == "a" else 2j * math.pi * mod.tau
    z0 = _base_point(point, i)
    return contour_integral(lambda zs: _nu_batch(j, i, zs, point, K),
                            z0, shift, point, i, tol=tol)
