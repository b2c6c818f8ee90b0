"""Sewing-geometry oracles: A matrices, determinant, resolvent, period
matrix, one-forms, bilinear form, projective connection, cycle integrals."""

import cmath
import math

import numpy as np
import pytest

from genus2sew.errors import DomainError
from genus2sew.series import eval_eisenstein, elliptic_P_fourier, min_lattice_distance
from genus2sew.sewing import (
    SewingPoint,
    SheetPoint,
    a_matrix,
    cycle_period,
    det_I_minus_A1A2,
    one_form_nu,
    omega2,
    period_matrix,
    projective_connection,
    resolvent,
)

TAU_A = (2j, 2j)
TAU_B = (0.3 + 1.5j, -0.2 + 1.8j)


def pt(taus=TAU_A, margin=0.25, phase=0.4):
    return SewingPoint.from_margin(taus[0], taus[1], margin, phase)


def test_domain_gate():
    bound = 0.25 * min_lattice_distance(2j) ** 2
    with pytest.raises(DomainError):
        SewingPoint(2j, 2j, bound * 1.0001)
    SewingPoint(2j, 2j, bound * 0.9999)  # boundary interior is fine


def test_a_matrix_basic_entries():
    p = SewingPoint(*TAU_B, 0.0)
    assert np.allclose(a_matrix(1, p, 8), 0)
    p = pt(TAU_B, 0.3)
    m = a_matrix(1, p, 8)
    assert abs(m[0, 0] - p.eps * eval_eisenstein(2, p.tau1)) < 1e-12
    assert m[0, 1] == 0  # k + l odd
    k, l = np.indices(m.shape)
    assert np.all(m[(k + l) % 2 == 1] == 0)
    assert np.allclose(m, m.T)


def test_det_trivial_and_small_eps():
    p0 = SewingPoint(*TAU_A, 0.0)
    assert abs(det_I_minus_A1A2(p0, 10) - 1) < 1e-14
    e2a = eval_eisenstein(2, 2j)
    for eps in (0.05, 0.025):
        p = SewingPoint(*TAU_A, eps)
        lead = 1 - eps ** 2 * e2a * e2a
        assert abs(det_I_minus_A1A2(p, 12) - lead) < 5 * eps ** 4


def test_det_truncation_stability():
    p = SewingPoint(1j, 1j, 0.2)
    assert abs(det_I_minus_A1A2(p, 12) - det_I_minus_A1A2(p, 16)) < 1e-10


def test_resolvent_contracts():
    p0 = SewingPoint(*TAU_A, 0.0)
    assert np.allclose(resolvent(p0, 8), np.eye(8))
    p = pt(TAU_A, 0.25)
    K = 12
    r = resolvent(p, K)
    prod = a_matrix(1, p, K) @ a_matrix(2, p, K)
    assert np.max(np.abs((np.eye(K) - prod) @ r - np.eye(K))) < 1e-12
    e2a = eval_eisenstein(2, 2j)
    small = SewingPoint(*TAU_A, 0.04)
    r = resolvent(small, K)
    assert abs(r[0, 0] - (1 + small.eps ** 2 * e2a * e2a)) < 5 * 0.04 ** 4


def test_period_matrix_eps_zero_is_diagonal():
    p0 = SewingPoint(*TAU_B, 0.0)
    om = period_matrix(p0, 10)
    assert abs(om.omega11 - p0.tau1.tau) < 1e-14
    assert abs(om.omega22 - p0.tau2.tau) < 1e-14
    assert abs(om.omega12) < 1e-14


def test_period_matrix_leading_omega12():
    for eps in (0.05, 0.025):
        p = SewingPoint(*TAU_A, eps)
        om = period_matrix(p, 12)
        assert abs(om.omega12 + eps / (2j * math.pi)) < eps ** 3


def test_period_matrix_imag_positive_definite():
    p = SewingPoint(2j, 2j, 0.3)
    assert period_matrix(p, 16).imag_is_positive_definite()
    p = pt(TAU_B, 0.5, phase=1.1)
    assert period_matrix(p, 16).imag_is_positive_definite()


def test_period_truncation_convergence():
    for taus in (TAU_A, TAU_B):
        p = pt(taus, 0.5, phase=0.9)
        a = period_matrix(p, 12).as_matrix()
        b = period_matrix(p, 20).as_matrix()
        assert np.max(np.abs(a - b)) < 1e-9


def test_nu_eps_zero():
    p0 = SewingPoint(*TAU_B, 0.0)
    x1 = SheetPoint(1, 1.1 + 0.9j)
    x2 = SheetPoint(2, -0.8 + 1.2j)
    assert abs(one_form_nu(1, x1, p0) - 1) < 1e-14
    assert abs(one_form_nu(2, x2, p0) - 1) < 1e-14
    assert abs(one_form_nu(1, x2, p0)) < 1e-14
    assert abs(one_form_nu(2, x1, p0)) < 1e-14


def test_a_cycle_normalization():
    p = pt(TAU_B, 0.25, phase=0.7)
    for i in (1, 2):
        for j in (1, 2):
            val = cycle_period(i, j, "a", p, K=12)
            expect = 2j * math.pi if i == j else 0.0
            assert abs(val - expect) < 1e-6


def test_b_cycle_gives_period_matrix():
    for taus, margin in ((TAU_A, 0.25), (TAU_B, 0.4)):
        p = pt(taus, margin, phase=0.3)
        om = period_matrix(p, 12)
        for i in (1, 2):
            for j in (1, 2):
                val = cycle_period(i, j, "b", p, K=12) / (2j * math.pi)
                assert abs(val - om.entry(i, j)) < 1e-6


def test_omega2_eps_zero_branches():
    p0 = SewingPoint(*TAU_B, 0.0)
    x = SheetPoint(1, 1.1 + 0.4j)
    y = SheetPoint(1, -0.6 + 1.1j)
    expect = elliptic_P_fourier(2, p0.tau1, x.z - y.z)
    assert abs(omega2(x, y, p0) - expect) < 1e-12
    z = SheetPoint(2, 0.9 - 0.5j)
    assert abs(omega2(x, z, p0)) < 1e-14


def test_omega2_symmetry():
    rng = np.random.default_rng(42)
    p = pt(TAU_B, 0.4, phase=1.3)
    for _ in range(8):
        sheets = rng.integers(1, 3, size=2)
        x = SheetPoint(int(sheets[0]),
                       complex(rng.uniform(1.0, 2.0), rng.uniform(1.0, 2.0)))
        y = SheetPoint(int(sheets[1]),
                       complex(rng.uniform(-2.0, -1.0), rng.uniform(1.0, 2.0)))
        a = omega2(x, y, p)
        b = omega2(y, x, p)
        assert abs(a - b) < 1e-9 * max(1.0, abs(a))


def test_sewing_overlap_jacobian_consistency():
    # the same form written in the z1 chart and the z2 = eps/z1 chart;
    # the chart point sits near the inner annulus edge, the spectator
    # insertion deep in the cell (the truncated sums converge like
    # (|z| / lattice-distance(x))^K)
    for margin in (0.25, 0.4):
        p = pt(TAU_A, margin, phase=0.5)
        x = SheetPoint(1, (math.pi + 2.9j))
        z = 1.25 * p.excised_radius(1) * cmath.exp(0.3j * math.pi)
        w = p.eps / z
        same = omega2(x, SheetPoint(1, z), p, K=24)
        cross = omega2(x, SheetPoint(2, w), p, K=24)
        moved = cross * (-p.eps / z ** 2)
        assert abs(moved - same) < 1e-6 * max(1.0, abs(same))


def test_projective_connection_eps_zero():
    p0 = SewingPoint(*TAU_B, 0.0)
    x = SheetPoint(2, 0.8 + 0.9j)
    assert abs(projective_connection(x, p0) -
               6 * eval_eisenstein(2, p0.tau2)) < 1e-12


def test_projective_connection_limit_oracle():
    p = pt(TAU_B, 0.3, phase=0.2)
    x = SheetPoint(1, 1.4 + 1.1j)
    s = projective_connection(x, p)
    h = 1e-3
    approx = 0.0
    for off in (h, -h):  # symmetric offsets cancel the O(h) gradient term
        y = SheetPoint(1, x.z + off)
        approx += 3 * (omega2(x, y, p) - 1 / (x.z - y.z) ** 2)
    assert abs(s - approx) < 1e-5 * max(1.0, abs(s))


def test_projective_connection_continuity():
    p = pt(TAU_A, 0.3)
    center = 2.3 + 2.1j
    vals = [projective_connection(SheetPoint(1, center + 0.05 *
                                             cmath.exp(2j * math.pi * t / 40)), p)
            for t in range(41)]
    jumps = [abs(vals[k + 1] - vals[k]) for k in range(40)]
    assert max(jumps) < 1e-3 * max(1.0, abs(vals[0]))
    # closes up smoothly
    assert abs(vals[40] - vals[0]) < 1e-10


def test_operations_reject_excised_points():
    p = pt(TAU_A, 0.5)
    rho = p.excised_radius(1)
    bad = SheetPoint(1, 0.5 * rho)
    with pytest.raises(DomainError):
        one_form_nu(1, bad, p)
    with pytest.raises(DomainError):
        omega2(bad, SheetPoint(1, 2.0 + 2.0j), p)
