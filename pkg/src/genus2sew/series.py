"""Modular and elliptic building blocks.

Bernoulli numbers, Eisenstein series E_k, the Dedekind eta function, the
elliptic P_k family and the C/D coefficient arrays.  Conventions:

    E_k(q) = -B_k/k! + (2/(k-1)!) sum_{n>=1} sigma_{k-1}(n) q^n   (k even)
    E_k = 0 for k odd,  q = exp(2*pi*i*tau),  B_2 = 1/6,
    P_1(tau,z) = 1/z - sum_{k>=2} E_k(tau) z^{k-1},
    P_k = ((-1)^{k-1}/(k-1)!) d^{k-1}/dz^{k-1} P_1,
    C(k,l,tau) = (-1)^{k+1} (k+l-1)!/((k-1)!(l-1)!) E_{k+l}(tau),
    D(k,l,tau,z) = same prefactor times P_{k+l}(tau,z),
    eta(tau) = q^{1/24} prod_{n>=1} (1 - q^n).

The underlying torus is C / (2*pi*i*(Z*tau + Z)).  Everything runs in
double precision; q-series truncate at order 40 by default, far below
1e-12 tails for Im(tau) >= 0.8.  All functions are pure; TorusModulus
memoises per-modulus values but is semantically immutable.

Two independent evaluators are provided for P_k: the Laurent expansion
around z = 0 (valid on |z| < D(q)) and a Fourier/partial-fraction form
valid on the whole torus away from lattice points.  They are
cross-checked in the test suite and the latter backs contour integrals.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, OutOfDiskError, PoleError

DEFAULT_ORDER = 40

TWO_PI_I = 2j * math.pi


@lru_cache(maxsize=None)
def bernoulli(k: int) -> Fraction:
    """Exact Bernoulli number B_k (convention B_1 = -1/2, B_2 = 1/6)."""
    if k < 0:
        raise ValueError("Bernoulli index must be non-negative")
    if k == 0:
        return Fraction(1)
    # sum_{j=0}^{k} C(k+1, j) B_j = 0 for k >= 1
    acc = Fraction(0)
    for j in range(k):
        acc += math.comb(k + 1, j) * bernoulli(j)
    return -acc / (k + 1)


@lru_cache(maxsize=None)
def _sigma(n: int, p: int) -> int:
    """Divisor power sum sigma_p(n) = sum_{d | n} d^p."""
    return sum(d ** p for d in range(1, n + 1) if n % d == 0)


class QSeries:
    """Truncated power series sum_n c_n q^n, optionally carrying a
    fractional prefactor q^{leading_exponent}.

    Arithmetic closes at the common truncation order.  Addition requires
    matching leading exponents; multiplication adds them.
    """

    __slots__ = ("coeffs", "order", "leading_exponent")

    def __init__(self, coeffs, order=None, leading_exponent=Fraction(0)):
        coeffs = [complex(c) for c in coeffs]
        if order is None:
            order = len(coeffs) - 1
        if len(coeffs) < order + 1:
            coeffs = coeffs + [0j] * (order + 1 - len(coeffs))
        self.coeffs = coeffs[: order + 1]
        self.order = order
        self.leading_exponent = Fraction(leading_exponent)

    def __repr__(self):
        head = ", ".join(f"{c:.6g}" for c in self.coeffs[:4])
        return (f"QSeries(order={self.order}, q^{self.leading_exponent} * "
                f"[{head}, ...])")

    def __neg__(self):
        return QSeries([-c for c in self.coeffs], self.order,
                       self.leading_exponent)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries([other], self.order)
        if self.leading_exponent != other.leading_exponent:
            raise ValueError("cannot add series with different prefactors")
        order = min(self.order, other.order)
        return QSeries([self.coeffs[i] + other.coeffs[i]
                        for i in range(order + 1)], order,
                       self.leading_exponent)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, QSeries)
                       else QSeries([-other], self.order))

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return QSeries([c * other for c in self.coeffs], self.order,
                           self.leading_exponent)
        order = min(self.order, other.order)
        out = [0j] * (order + 1)
        for i, a in enumerate(self.coeffs[: order + 1]):
            if a == 0:
                continue
            for j in range(order + 1 - i):
                out[i + j] += a * other.coeffs[j]
        return QSeries(out, order,
                       self.leading_exponent + other.leading_exponent)

    __rmul__ = __mul__

    def inverse(self):
        """Series inverse; the constant coefficient must be a unit."""
        if self.coeffs[0] == 0:
            raise ValueError("series with zero constant term is not a unit")
        b = [0j] * (self.order + 1)
        b[0] = 1.0 / self.coeffs[0]
        for n in range(1, self.order + 1):
            s = sum(self.coeffs[i] * b[n - i] for i in range(1, n + 1))
            b[n] = -s / self.coeffs[0]
        return QSeries(b, self.order, -self.leading_exponent)

    def eval(self, modulus) -> complex:
        """Evaluate at q = exp(2*pi*i*tau), Horner plus the prefactor."""
        modulus = as_modulus(modulus)
        q = modulus.q
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * q + c
        if self.leading_exponent:
            acc *= q_power(modulus, self.leading_exponent)
        return acc


class TorusModulus:
    """A point tau in the upper half plane with q = exp(2*pi*i*tau) cached."""

    __slots__ = ("tau", "q", "_eis", "_eta")

    def __init__(self, tau):
        tau = complex(tau)
        if not (tau.imag > 0):
            raise DomainError(f"Im(tau) must be positive, got {tau}")
        self.tau = tau
        self.q = cmath.exp(TWO_PI_I * tau)
        self._eis = {}
        self._eta = {}

    def __repr__(self):
        return f"TorusModulus({self.tau})"

    def eisenstein(self, k: int, order: int = DEFAULT_ORDER) -> complex:
        key = (k, order)
        if key not in self._eis:
            self._eis[key] = eisenstein_qseries(k, order).eval(self)
        return self._eis[key]

    def eta(self, order: int = DEFAULT_ORDER) -> complex:
        if order not in self._eta:
            prod = 1.0 + 0j
            qn = 1.0 + 0j
            for _ in range(1, order + 1):
                qn *= self.q
                prod *= 1.0 - qn
            self._eta[order] = q_power(self, Fraction(1, 24)) * prod
        return self._eta[order]


def as_modulus(tau) -> TorusModulus:
    return tau if isinstance(tau, TorusModulus) else TorusModulus(tau)


def q_power(modulus, a) -> complex:
    """q^a defined as exp(2*pi*i*tau*a); unambiguous in tau, not just q."""
    modulus = as_modulus(modulus)
    return cmath.exp(TWO_PI_I * modulus.tau * float(a))


@lru_cache(maxsize=None)
def _eisenstein_coeffs(k: int, order: int):
    """Exact rational q-coefficients of E_k up to q^order."""
    if k < 1:
        raise ValueError("Eisenstein weight must be >= 1")
    if k % 2 == 1:
        return tuple([Fraction(0)] * (order + 1))
    out = [-bernoulli(k) / math.factorial(k)]
    pref = Fraction(2, math.factorial(k - 1))
    out.extend(pref * _sigma(n, k - 1) for n in range(1, order + 1))
    return tuple(out)


def eisenstein_qseries(k: int, order: int = DEFAULT_ORDER) -> QSeries:
    """E_k as a QSeries (zero series for odd k)."""
    return QSeries([complex(c) for c in _eisenstein_coeffs(k, order)], order)


def eval_eisenstein(k: int, modulus, order: int = DEFAULT_ORDER) -> complex:
    """Numeric E_k(tau), truncated at q^order."""
    modulus = as_modulus(modulus)
    if abs(modulus.q) >= 1:
        raise DomainError("q-series requires |q| < 1")
    return modulus.eisenstein(k, order)


def dedekind_eta(modulus, order: int = DEFAULT_ORDER) -> complex:
    """eta(tau) = q^{1/24} prod_{n<=order} (1 - q^n)."""
    return as_modulus(modulus).eta(order)


def min_lattice_distance(modulus) -> float:
    """Minimal distance D(q) = min |2*pi*i*(m*tau + n)| over (m,n) != 0.

    For fixed m the best n is -round(m*Re tau), and |m*tau + n| >= |m| Im(tau),
    so scanning |m| <= D_found/(2*pi*Im tau) provably brackets the minimum.
    """
    tau = as_modulus(modulus).tau
    best = 2 * math.pi  # the (m, n) = (0, 1) generator
    m = 1
    while 2 * math.pi * m * tau.imag <= best:
        base = m * tau
        for n in (-round(base.real) - 1, -round(base.real), -round(base.real) + 1):
            best = min(best, 2 * math.pi * abs(base + n))
        m += 1
    return best


def lattice_generators(modulus):
    """The two lattice generators 2*pi*i*tau and 2*pi*i."""
    tau = as_modulus(modulus).tau
    return TWO_PI_I * tau, TWO_PI_I


def lattice_reduce(modulus, z):
    """Representative of z modulo 2*pi*i*(Z tau + Z) closest to 0.

    Greedy rounding in the (tau, 1) basis followed by a local search over
    neighbouring lattice points; exact enough for clearance checks and
    pole avoidance.
    """
    w1, w2 = lattice_generators(modulus)
    z = complex(z)
    # coordinates of z in the (w1, w2) basis
    det = w1.real * w2.imag - w1.imag * w2.real
    a = (z.real * w2.imag - z.imag * w2.real) / det
    b = (w1.real * z.imag - w1.imag * z.real) / det
    best = None
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            cand = z - (round(a) + dm) * w1 - (round(b) + dn) * w2
            if best is None or abs(cand) < abs(best):
                best = cand
    return best


def lattice_distance(modulus, z) -> float:
    """Distance from z to the lattice 2*pi*i*(Z tau + Z)."""
    return abs(lattice_reduce(modulus, z))


def binom_factor(k: int, l: int) -> float:
    """(k+l-1)! / ((k-1)!(l-1)!) as a float, exact integer underneath."""
    return float(math.comb(k + l - 2, k - 1) * (k + l - 1))


def coeff_C(k: int, l: int, modulus, order: int = DEFAULT_ORDER) -> complex:
    """C(k,l,tau); vanishes whenever k + l is odd."""
    if k < 1 or l < 1:
        raise ValueError("C(k,l) requires k, l >= 1")
    if (k + l) % 2 == 1:
        return 0j
    sign = -1.0 if k % 2 == 0 else 1.0
    return sign * binom_factor(k, l) * eval_eisenstein(k + l, modulus, order)


def coeff_D(k: int, l: int, modulus, z, order: int = DEFAULT_ORDER) -> complex:
    """D(k,l,tau,z) = (-1)^{k+1} (k+l-1)!/((k-1)!(l-1)!) P_{k+l}(tau,z)."""
    if k < 1 or l < 1:
        raise ValueError("D(k,l) requires k, l >= 1")
    sign = -1.0 if k % 2 == 0 else 1.0
    return sign * binom_factor(k, l) * elliptic_P(k + l, modulus, z, order)


def elliptic_P(k: int, modulus, z, order: int = DEFAULT_ORDER) -> complex:
    """P_k(tau,z) by the Laurent expansion around z = 0:

        P_k(z) = 1/z^k + (-1)^k sum_{j>=k} C(j-1, k-1) E_j(tau) z^{j-k}

    valid on 0 < |z| < D(q).
    """
    if k < 1:
        raise ValueError("P_k requires k >= 1")
    modulus = as_modulus(modulus)
    z = complex(z)
    if z == 0:
        raise PoleError("P_k has a pole at z = 0")
    if abs(z) >= min_lattice_distance(modulus):
        raise OutOfDiskError(
            f"|z| = {abs(z):.6g} is outside the Laurent disk "
            f"|z| < {min_lattice_distance(modulus):.6g}")
    sign = 1.0 if k % 2 == 0 else -1.0
    acc = 0j
    zp = 1.0 + 0j
    for j in range(k, order + k + 1):
        ej = modulus.eisenstein(j, order) if j % 2 == 0 else 0j
        if ej != 0:
            acc += math.comb(j - 1, k - 1) * ej * zp
        zp *= z
    return z ** (-k) + sign * acc


# -- Fourier / partial-fraction evaluator -----------------------------------
#
# P_2(tau,z) = F(q_z) + sum_{m>=1} [F(q^m q_z) + F(q^m / q_z)],
# with q_z = e^z and F(x) = x/(1-x)^2, and
# P_k = ((-1)^k/(k-1)!) d^{k-2}/dz^{k-2} P_2 for k >= 2.
# Term-wise, d/dz acts as the Euler operator x d/dx (with a sign on the
# 1/q_z terms), and (x d/dx)^j F(x) = sum_{n>=1} n^{j+1} x^n
#                                   = A_{j+1}(x) / (1-x)^{j+2}
# for the Eulerian polynomial A_p(x) = sum_m A(p,m) x^{m+1}.

@lru_cache(maxsize=None)
def _eulerian_poly(p: int):
    """Coefficients [A(p,0), A(p,1), ...] of the Eulerian polynomial."""
    if p == 1:
        return (1,)
    prev = _eulerian_poly(p - 1)
    row = []
    for m in range(p):
        left = (m + 1) * prev[m] if m < len(prev) else 0
        right = (p - m) * prev[m - 1] if 1 <= m <= len(prev) else 0
        row.append(left + right)
    return tuple(row)


def _euler_sum(j: int, x):
    """(x d/dx)^j applied to x/(1-x)^2, i.e. sum_{n>=1} n^{j+1} x^n,
    evaluated as a rational function (valid for all x != 1).

    Uses the palindromic reflection S_j(x) = (-1)^j S_j(1/x) when |x| > 1
    to keep the evaluation well conditioned.
    """
    x = np.asarray(x, dtype=complex)
    big = np.abs(x) > 1.0
    xs = np.where(big, 1.0 / np.where(x == 0, 1.0, x), x)
    coeffs = _eulerian_poly(j + 1)
    num = np.zeros_like(xs)
    for c in reversed(coeffs):
        num = num * xs + float(c)
    num *= xs
    val = num / (1.0 - xs) ** (j + 2)
    if j % 2 == 1:
        val = np.where(big, -val, val)
    return val


def elliptic_P_fourier(k: int, modulus, z, order: int = DEFAULT_ORDER):
    """P_k(tau,z) for k >= 2, valid anywhere off the lattice.

    Accepts scalars or arrays; z is first reduced modulo 2*pi*i*tau so
    that |Re z| <= pi*Im(tau), which keeps every summand inside the unit
    disk except possibly the m = 0 term (handled by reflection).
    """
    if k < 2:
        raise ValueError("the Fourier form is implemented for k >= 2")
    modulus = as_modulus(modulus)
    scalar = np.isscalar(z) or getattr(z, "shape", None) == ()
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    shift = TWO_PI_I * modulus.tau
    m = np.round(z.real / shift.real)
    zr = z - m * shift
    qz = np.exp(zr)
    j = k - 2
    total = _euler_sum(j, qz)
    q = modulus.q
    qm = 1.0 + 0j
    sgn = -1.0 if j % 2 == 1 else 1.0
    for _ in range(1, order + 1):
        qm *= q
        total = total + _euler_sum(j, qm * qz) + sgn * _euler_sum(j, qm / qz)
    pref = ((-1.0) ** k) / math.factorial(k - 1)
    out = pref * total
    return complex(out[0]) if scalar else out
