"""Independent numerical oracles used by the test suite only.

These deliberately avoid the code paths they check: adaptive quadrature
comes from scipy, the hypergeometric reference from scipy.special, and
the full symmetric eigensolver is a plain cyclic Jacobi iteration.
"""

import warnings

import numpy as np
from scipy import integrate


def euler_integral_2f1(a: float, b: float, c: float, x: float) -> float:
    """2F1 via the Euler integral (requires c > b > 0), adaptively."""
    from qg3d.specfun import gamma_fn

    pref = gamma_fn(c) / (gamma_fn(b) * gamma_fn(c - b))
    with warnings.catch_warnings():
        # the endpoint-singular integrand saturates quad's extrapolation
        # table at tolerances tighter than it can certify; the value is
        # still good to ~1e-12
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, _ = integrate.quad(
            lambda t: t ** (b - 1.0) * (1.0 - t) ** (c - b - 1.0) * (1.0 - x * t) ** (-a),
            0.0,
            1.0,
            epsabs=1e-13,
            epsrel=1e-12,
            limit=200,
        )
    return pref * val


def ring_integral_quadrature(n: int, beta: float, A: float) -> float:
    """Direct adaptive quadrature of int_0^{2pi} cos(n t)/(A - cos t)^{beta/2}."""
    val, _ = integrate.quad(
        lambda t: np.cos(n * t) / (A - np.cos(t)) ** (beta / 2.0),
        0.0,
        2.0 * np.pi,
        epsabs=1e-13,
        epsrel=1e-12,
        limit=200,
    )
    return val


def jacobi_eigensolve(S: np.ndarray, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi rotations for a dense symmetric matrix.

    Returns (eigenvalues, eigenvectors) with columns as eigenvectors,
    sorted descending by eigenvalue.
    """
    A = np.array(S, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.max(np.abs(A))
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q_ in range(p + 1, n):
                apq = A[p, q_]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (A[q_, q_] - A[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = A[:, p].copy()
                rot_q = A[:, q_].copy()
                A[:, p] = c * rot_p - s * rot_q
                A[:, q_] = s * rot_p + c * rot_q
                rot_p = A[p, :].copy()
                rot_q = A[q_, :].copy()
                A[p, :] = c * rot_p - s * rot_q
                A[q_, :] = s * rot_p + c * rot_q
                rot_p = V[:, p].copy()
                rot_q = V[:, q_].copy()
                V[:, p] = c * rot_p - s * rot_q
                V[:, q_] = s * rot_p + c * rot_q
    vals = np.diag(A).copy()
    order = np.argsort(vals)[::-1]
    return vals[order], V[:, order]
