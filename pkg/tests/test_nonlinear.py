"""Nonlinear functional, symmetry structure, axis velocity, branch solver."""

import numpy as np
import pytest

import qg3d as q
from qg3d.errors import DomainError, GeometryError
from qg3d.nonlinear import (
    Perturbation,
    _axis_velocity_grid,
    f_tilde_circle,
    newton_correct,
)
from qg3d.quadrature import periodic_trapezoid


def small_perturbation(col, eps=0.02, mode=0):
    coeffs = np.zeros((col.n_modes, col.kctx.n_nodes))
    coeffs[mode] = eps * np.sin(col.kctx.nodes) ** (mode + 1)
    return Perturbation(col.m, coeffs, col.kctx)


def random_perturbation(col, seed, eps=0.01):
    """Admissible random perturbation: symmetric, Dirichlet, small."""
    rng = np.random.default_rng(seed)
    x = col.kctx.nodes
    coeffs = np.zeros((col.n_modes, col.kctx.n_nodes))
    for k in range(col.n_modes):
        c = rng.standard_normal(3)
        base = c[0] * np.sin(x) + c[1] * np.sin(x) ** 2 + c[2] * np.sin(x) ** 3
        coeffs[k] = eps * base / max(1.0, np.max(np.abs(base)))
    return Perturbation(col.m, coeffs, col.kctx)


class TestStreamPotential:
    def test_sphere_interior_potential(self, col_sphere_m2):
        for phi in (0.4, 1.0, np.pi / 2):
            val = q.stream_I(col_sphere_m2, None, phi, 0.7)
            exact = (np.sin(phi) ** 2 + np.cos(phi) ** 2) / 6.0 - 0.5
            assert val == pytest.approx(exact, abs=1e-6)

    def test_axisymmetric_theta_independence(self, col_sphere_m2):
        vals = [q.stream_I(col_sphere_m2, None, 0.9, th) for th in (0.0, 0.4, 2.2)]
        assert np.max(vals) - np.min(vals) <= 1e-10

    def test_linearization_consistency(self, col_sphere_m2):
        # I(eps h) - I(0) - eps dI[h] = O(eps^2)
        phi_t, th = 1.1, 0.2
        base = q.stream_I(col_sphere_m2, None, phi_t, th)
        defects = []
        for eps in (2e-2, 1e-2):
            f = small_perturbation(col_sphere_m2, eps)
            val = q.stream_I(col_sphere_m2, f, phi_t, th)
            defects.append(val - base)
        # first-order part halves, so the Richardson combination is O(eps^2)
        second = defects[0] - 2 * defects[1]
        assert abs(second) < 0.5 * abs(defects[0])

    def test_geometry_guard(self, col_sphere_m2):
        coeffs = np.zeros((4, 24))
        coeffs[0] = -2.0 * np.sin(col_sphere_m2.kctx.nodes)
        bad = Perturbation(2, coeffs, col_sphere_m2.kctx)
        with pytest.raises(GeometryError):
            q.stream_I(col_sphere_m2, bad, 1.0, 0.0)


class TestMean:
    def test_trivial_profile_value(self, col_sphere_m2):
        phi = 1.0
        omega = 0.2
        val = q.mean_m(col_sphere_m2, omega, None, phi)
        r0 = np.sin(phi)
        exact = (r0 ** 2 + np.cos(phi) ** 2) / 6.0 - 0.5 - 0.5 * omega * r0 ** 2
        assert val == pytest.approx(exact, abs=1e-6)

    def test_full_vs_reduced_period(self, col_sphere_m2):
        f = small_perturbation(col_sphere_m2, 0.03)
        phi = float(col_sphere_m2.kctx.nodes[7])
        a = q.mean_m(col_sphere_m2, 0.1, f, phi)
        b = q.mean_m(col_sphere_m2, 0.1, f, phi, full_period=True)
        assert a == pytest.approx(b, abs=1e-12)

    def test_omega_linearity(self, col_sphere_m2):
        f = small_perturbation(col_sphere_m2, 0.03)
        phi = float(col_sphere_m2.kctx.nodes[9])
        m1 = q.mean_m(col_sphere_m2, 0.3, f, phi)
        m0 = q.mean_m(col_sphere_m2, 0.0, f, phi)
        thetas = periodic_trapezoid(64).nodes
        idx = 9
        k = np.arange(1, 5)
        r = np.sin(phi) + np.sum(f.coeffs[:, idx, None] * np.cos(k[:, None] * 2 * thetas[None, :]), axis=0)
        assert m1 - m0 == pytest.approx(-0.15 * np.mean(r ** 2), abs=1e-12)


class TestFtilde:
    def test_trivial_shape_stationary(self, col_sphere_m2):
        for omega in (-1.0, 0.0, 0.2):
            assert np.max(np.abs(q.f_tilde(col_sphere_m2, omega, None))) <= 5e-6

    def test_zero_theta_mean(self, col_sphere_m2):
        f = small_perturbation(col_sphere_m2, 0.05)
        samples = q.f_tilde(col_sphere_m2, 0.1, f)
        assert np.max(np.abs(samples.mean(axis=1))) <= 1e-14

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_symmetries_random_perturbations(self, col_sphere_m2, seed):
        f = random_perturbation(col_sphere_m2, seed)
        phi_t = float(col_sphere_m2.kctx.nodes[6])
        phi_m = float(col_sphere_m2.kctx.nodes[-7])  # mirror node
        a = f_tilde_circle(col_sphere_m2, 0.1, f, phi_t, 64)
        b = f_tilde_circle(col_sphere_m2, 0.1, f, phi_m, 64)
        # equatorial symmetry
        assert np.max(np.abs(a - b)) <= 1e-10
        # m-fold symmetry: theta -> theta + 2 pi / m is a shift by half
        assert np.max(np.abs(a - np.roll(a, 64 // 2))) <= 1e-12
        # cosine structure: no sine leakage
        spec = np.fft.rfft(a) / len(a)
        assert np.max(np.abs(spec.imag)) <= 1e-10 * (np.max(np.abs(spec)) + 1e-30)

    def test_linearization_residual_at_bifurcation(self, col_sphere_m2):
        # || Ftilde(Omega_m, eps h* cos m theta) || = O(eps^2) at Omega_m
        bp = q.find_bifurcation_point(col_sphere_m2.kctx, 2)
        resids = []
        for eps in (2e-2, 1e-2):
            coeffs = np.zeros((4, 24))
            coeffs[0] = eps * bp.eigfun
            f = Perturbation(2, coeffs, col_sphere_m2.kctx)
            resids.append(np.max(np.abs(q.f_tilde(col_sphere_m2, bp.omega_m, f))))
        assert resids[0] / resids[1] == pytest.approx(4.0, rel=0.35)


class TestVelocityForm:
    def test_trivial_shape(self, col_sphere_m2):
        assert q.velocity_residual(col_sphere_m2, 0.1, None) <= 1e-6

    def test_perturbed_equivalence(self, col_sphere_m2):
        f = small_perturbation(col_sphere_m2, 0.05)
        assert q.velocity_residual(col_sphere_m2, 0.13, f) <= 1e-5

    def test_omega_term_cancels_exactly(self, col_sphere_m2):
        # the Omega contribution is identical in both forms, so the
        # equivalence defect cannot depend on Omega
        f = small_perturbation(col_sphere_m2, 0.04)
        r0 = q.velocity_residual(col_sphere_m2, 0.0, f)
        r1 = q.velocity_residual(col_sphere_m2, 0.25, f)
        assert abs(r0 - r1) <= 1e-12


class TestAxisVelocity:
    def test_trivial_shape(self, col_sphere_m2):
        assert q.velocity_on_axis(col_sphere_m2, None, [0.0, 0.4]) <= 1e-12

    def test_mfold_vanishing(self, col_sphere_m2):
        f = small_perturbation(col_sphere_m2, 0.05)
        assert q.velocity_on_axis(col_sphere_m2, f, [0.3]) <= 1e-8

    def test_m1_rejected(self, col_sphere_m2):
        f = Perturbation(1, np.zeros((4, 24)), col_sphere_m2.kctx)
        with pytest.raises(DomainError):
            q.velocity_on_axis(col_sphere_m2, f, [0.0])

    def test_m1_contamination_detected(self, col_sphere_m2):
        # a cos(theta) contamination produces a nonzero axis velocity
        ctx = col_sphere_m2.kctx
        rule = periodic_trapezoid(256)
        eta, weta = rule.nodes, rule.weights
        r = ctx.r0v[:, None] + 0.05 * np.sin(ctx.nodes)[:, None] * np.cos(eta)[None, :]
        dr = -0.05 * np.sin(ctx.nodes)[:, None] * np.sin(eta)[None, :]
        U = _axis_velocity_grid(ctx.sinv, np.cos(ctx.nodes), ctx.weights, eta, weta, r, dr, 0.3)
        assert abs(U) > 1e-4


class TestNewtonAndBranch:
    def test_zero_amplitude_echo(self, col_sphere_m2):
        bp = q.find_bifurcation_point(col_sphere_m2.kctx, 2)
        f0 = Perturbation.zero(col_sphere_m2)
        point, _ = newton_correct(col_sphere_m2, 0.0, bp.omega_m, f0, bp.eigfun)
        assert point.iterations == 0
        assert point.omega == bp.omega_m
        assert np.all(point.f.coeffs == 0.0)

    def test_branch_small(self, col_sphere_m2):
        bp = q.find_bifurcation_point(col_sphere_m2.kctx, 2)
        branch = q.continue_branch(col_sphere_m2, 0.012, 4, bp=bp)
        assert branch.failed_at is None
        assert len(branch.points) == 4
        for pt in branch.points:
            assert pt.residual <= 1e-8
            assert pt.iterations <= 12
            rep = pt.f.validate()
            assert rep["equatorial_defect"] <= 1e-10
            assert rep["endpoint_defect"] <= 1e-5
            assert rep["r_min"] > 0
            assert np.max(np.abs(pt.f.coeffs)) > 0
        omegas = np.array([pt.omega for pt in branch.points])
        assert np.all(np.abs(np.diff(np.abs(omegas - bp.omega_m))) >= 0)

    def test_first_point_linear_prediction(self, col_sphere_m2):
        # || f(s) - s h* cos(m theta) || = O(s^2): the defect drops ~4x
        # when the first step is halved
        bp = q.find_bifurcation_point(col_sphere_m2.kctx, 2)
        defects = []
        for s in (0.008, 0.004):
            branch = q.continue_branch(col_sphere_m2, s, 1, bp=bp)
            pt = branch.points[0]
            lin = np.zeros_like(pt.f.coeffs)
            lin[0] = s * bp.eigfun
            defects.append(np.max(np.abs(pt.f.coeffs - lin)))
        assert defects[0] / defects[1] == pytest.approx(4.0, rel=0.5)

    def test_corrector_failure_truncates(self, col_sphere_m2):
        # an absurd amplitude breaks the geometry at the first predictor
        bp = q.find_bifurcation_point(col_sphere_m2.kctx, 2)
        branch = q.continue_branch(col_sphere_m2, 5.0, 1, bp=bp)
        assert branch.failed_at == 0
        assert branch.points == []
        assert branch.message

    def test_amplitude_pairing_exact(self, col_sphere_m2):
        bp = q.find_bifurcation_point(col_sphere_m2.kctx, 2)
        branch = q.continue_branch(col_sphere_m2, 0.01, 2, bp=bp)
        w = col_sphere_m2.kctx.weights
        for pt in branch.points:
            pair = np.sum(pt.f.coeffs[0] * bp.eigfun * w) / np.sum(bp.eigfun ** 2 * w)
            assert pair == pytest.approx(pt.s, abs=2e-8)
