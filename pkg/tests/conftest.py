"""Shared fixtures: contexts are expensive to warm (kernel tables are
cached inside), so they are session-scoped and shared across modules."""

import numpy as np
import pytest

import qg3d as q


@pytest.fixture(scope="session")
def sphere():
    return q.make_profile("sphere")


@pytest.fixture(scope="session")
def spheroid2():
    return q.make_profile("spheroid", a=2.0)


@pytest.fixture(scope="session")
def ctx_sphere(sphere):
    """Default production grid: N=96, tanh-sinh level 9."""
    return q.KernelContext(sphere, 96, 9, 3)


@pytest.fixture(scope="session")
def ctx_sphere_small(sphere):
    """Cheap grid for unit-level checks."""
    return q.KernelContext(sphere, 48, 8, 3)


@pytest.fixture(scope="session")
def ctx_spheroid2(spheroid2):
    return q.KernelContext(spheroid2, 96, 9, 3)


@pytest.fixture(scope="session")
def col_sphere_m2(sphere):
    """Coarse nonlinear collocation for the sphere, m = 2."""
    kctx = q.KernelContext(sphere, 24, 7, 3)
    return q.Collocation(kctx, m=2, n_modes=4, n_theta=8, phi_level=4, eta_level=4)


@pytest.fixture(scope="session")
def bp2_sphere(ctx_sphere):
    return q.find_bifurcation_point(ctx_sphere, 2)
