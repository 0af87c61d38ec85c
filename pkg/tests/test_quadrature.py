"""Quadrature rules: exactness, singular integrands, refinement behavior."""

import numpy as np
import pytest

from qg3d.errors import DomainError
from qg3d.quadrature import (
    barycentric_weights,
    double_exponential,
    gauss_panel,
    integrate,
    interp_matrix,
    periodic_trapezoid,
    split_de,
)


class TestGaussPanel:
    def test_polynomial_exactness(self):
        rule = gauss_panel(4, 0.0, 1.0, 1)
        assert integrate(rule, lambda x: x ** 3) == pytest.approx(0.25, abs=1e-15)

    def test_sine(self):
        rule = gauss_panel(8, 0.0, np.pi, 4)
        assert integrate(rule, np.sin) == pytest.approx(2.0, abs=1e-12)

    def test_endpoint_log_slow_convergence(self):
        # int_0^1 ln(1/x) = 1; the Gauss error decays only algebraically,
        # which is what motivates the tanh-sinh rule
        errs = [abs(integrate(gauss_panel(8, 0.0, 1.0, 2 ** k), lambda x: np.log(1.0 / x)) - 1.0) for k in range(4)]
        assert all(e2 < e1 for e1, e2 in zip(errs[:-1], errs[1:]))
        assert errs[-1] > 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            gauss_panel(4, 1.0, 0.0)
        with pytest.raises(DomainError):
            gauss_panel(1, 0.0, 1.0)


class TestDoubleExponential:
    def test_log_singularity(self):
        rule = double_exponential(0.0, 1.0, 8)
        assert integrate(rule, lambda x: np.log(1.0 / x)) == pytest.approx(1.0, abs=1e-12)

    def test_inverse_sqrt(self):
        rule = double_exponential(0.0, 1.0, 8)
        assert integrate(rule, lambda x: 1.0 / np.sqrt(x)) == pytest.approx(2.0, abs=1e-12)

    def test_interior_log_split(self):
        # int_0^pi ln|x - pi/2| dx = pi ln(pi/2) - pi
        rule = split_de(0.0, np.pi, np.pi / 2, 9)
        val = integrate(rule, lambda x: np.log(np.abs(x - np.pi / 2)))
        assert val == pytest.approx(np.pi * np.log(np.pi / 2) - np.pi, abs=1e-10)

    def test_nodes_interior_increasing(self):
        rule = double_exponential(0.0, 1.0, 5)
        assert rule.nodes[0] > 0.0 and rule.nodes[-1] < 1.0
        assert np.all(np.diff(rule.nodes) > 0)

    def test_weight_sum(self):
        for lvl in (4, 8):
            rule = double_exponential(0.0, 2.5, lvl)
            assert np.sum(rule.weights) == pytest.approx(2.5, abs=1e-12)


class TestPeriodicTrapezoid:
    def test_pure_mode(self):
        rule = periodic_trapezoid(16)
        assert integrate(rule, lambda t: np.cos(3 * t)) == pytest.approx(0.0, abs=1e-14)

    def test_constant(self):
        rule = periodic_trapezoid(10)
        assert integrate(rule, lambda t: np.ones_like(t)) == pytest.approx(2 * np.pi, abs=1e-14)

    def test_poisson_kernel(self):
        # int_0^{2pi} dt/(2 - cos t) = 2 pi / sqrt(3)
        rule = periodic_trapezoid(64)
        val = integrate(rule, lambda t: 1.0 / (2.0 - np.cos(t)))
        assert val == pytest.approx(2 * np.pi / np.sqrt(3.0), abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            periodic_trapezoid(1)


class TestRefinementAndPositivity:
    CASES = [
        (lambda x: np.log(1.0 / x), 1.0, "de"),
        (lambda x: 1.0 / np.sqrt(x), 2.0, "de"),
        (np.sin, 2.0, "gauss"),
    ]

    def test_doubling_never_degrades(self):
        for f, exact, kind in self.CASES:
            errs = []
            for lvl in (4, 5, 6, 7):
                if kind == "de":
                    rule = double_exponential(0.0, 1.0, lvl)
                else:
                    rule = gauss_panel(6, 0.0, np.pi, 2 ** (lvl - 3))
                errs.append(abs(integrate(rule, f) - exact) + 1e-11)  # clamp at the float floor
            assert all(e2 <= 1.01 * e1 for e1, e2 in zip(errs[:-1], errs[1:]))

    def test_all_weights_positive(self):
        for rule in (
            gauss_panel(10, 0.0, 1.0, 8),
            double_exponential(0.0, 1.0, 9),
            periodic_trapezoid(128),
        ):
            assert np.all(rule.weights > 0)


class TestBarycentric:
    def test_reproduces_nodes(self):
        nodes = 0.5 * np.pi * (1 + np.polynomial.legendre.leggauss(12)[0])
        bw = barycentric_weights(nodes)
        L = interp_matrix(nodes, bw, nodes)
        assert np.max(np.abs(L - np.eye(12))) < 1e-12

    def test_polynomial_exact(self):
        nodes = 0.5 * np.pi * (1 + np.polynomial.legendre.leggauss(12)[0])
        bw = barycentric_weights(nodes)
        x = np.linspace(0.05, np.pi - 0.05, 40)
        L = interp_matrix(nodes, bw, x)
        p = lambda t: 2.0 + t - 0.3 * t ** 5
        assert np.max(np.abs(L @ p(nodes) - p(x))) < 1e-11

    def test_smooth_function_spectral(self):
        nodes = 0.5 * np.pi * (1 + np.polynomial.legendre.leggauss(24)[0])
        bw = barycentric_weights(nodes)
        x = np.linspace(0.01, np.pi - 0.01, 101)
        L = interp_matrix(nodes, bw, x)
        assert np.max(np.abs(L @ np.sin(nodes) ** 2 - np.sin(x) ** 2)) < 1e-13
