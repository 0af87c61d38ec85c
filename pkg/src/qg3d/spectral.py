"""Dispersion relation, bifurcation points and spectral verifications.

The dispersion relation is the map Omega -> lambda_n(Omega), the largest
eigenvalue of the symmetrized Nystrom matrix of K_n^Omega.  It is
strictly positive, simple (positive kernel), strictly decreasing in n
and strictly increasing in Omega; the mode-m bifurcation point Omega_m
is the unique root of lambda_m(Omega) = 1, found by bisection on a
bracket grown geometrically to the left (lambda -> 0 as Omega -> -inf)
and capped at kappa - guard on the right (lambda -> inf at kappa).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError, SolverError
from .kernel import KernelContext, KernelMatrix, _wsym_values, assemble_kernel_matrix, row_apply
from .quadrature import interp_matrix

__all__ = [
    "SpectralResult",
    "BifurcationPoint",
    "DispersionCurve",
    "BoundaryReport",
    "largest_eigenvalue",
    "eigen_bounds",
    "dispersion_scan",
    "find_bifurcation_point",
    "eigenfunction_boundary_report",
    "kernel_dimension_check",
    "transversality_check",
    "refine_eigenvalue",
]

POWER_TOL = 1e-10
POWER_MAXIT = 10_000
BISECT_TOL = 1e-10
BISECT_MAXIT = 80
OMEGA_FLOOR = -1e4
KERNEL_DIM_MARGIN = 1e-4


@dataclass(frozen=True)
class SpectralResult:
    """Dominant eigenpair of one K_n^Omega matrix.  ``eigvec`` holds the
    eigenfunction samples h(phi_i), sign-fixed positive and unit-normed
    in the discrete mu_Omega inner product."""

    n: int
    omega: float
    lam: float
    eigvec: np.ndarray
    iterations: int
    residual: float


@dataclass(frozen=True)
class BifurcationPoint:
    """Root of lambda_m(Omega) = 1 with its kernel eigenfunction."""

    m: int
    omega_m: float
    eigfun: np.ndarray
    bracket: float
    lam: float


@dataclass(frozen=True)
class DispersionCurve:
    """Tabulated lambda_n(Omega_k) with monotonicity-anomaly flags."""

    rows: list  # (n, omega, lam, iterations, residual)
    anomalies: list = field(default_factory=list)


@dataclass(frozen=True)
class BoundaryReport:
    """Extrapolated |h| at the poles versus the interior maximum."""

    value_0: float
    value_pi: float
    interior_max: float


def largest_eigenvalue(K: KernelMatrix) -> SpectralResult:
    """Power iteration on the symmetrized matrix from the all-ones start.

    The dominant eigenvalue is the spectral radius of a matrix with
    positive off-diagonal entries and is simple, so the iteration
    converges; the eigenvector is mapped back through D^{-1/2} and
    normalized positive.
    """
    S = K.sym_entries
    size = S.shape[0]
    v = np.full(size, 1.0 / np.sqrt(size))
    lam = 0.0
    for it in range(1, POWER_MAXIT + 1):
        w = S @ v
        lam = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            raise SolverError("largest_eigenvalue: iterate collapsed to zero")
        v = w / norm
        resid = float(np.linalg.norm(S @ v - lam * v))
        if resid <= POWER_TOL * max(1.0, abs(lam)):
            break
    else:
        raise AccuracyError(
            f"largest_eigenvalue: power iteration did not converge in {POWER_MAXIT} steps"
        )
    h = v / np.sqrt(K.mu_w)
    if float(np.sum(h * K.mu_w)) < 0.0:
        h = -h
        v = -v
    return SpectralResult(K.n, K.omega, lam, h, it, resid)


def eigen_bounds(ctx: KernelContext, K: KernelMatrix, rho: np.ndarray) -> tuple[float, float]:
    """Two-sided bracket for lambda_n(Omega) from a unit test density.

    lower: the double integral of H_n weighted by
    rho(phi) rho(vphi) sqrt(sin phi) r0(phi) /
    (sqrt(nu nu') sqrt(sin vphi) r0(vphi)), for any rho with
    int rho^2 = 1; upper: the Hilbert-Schmidt norm
    (iint K_n^2 dmu dmu)^{1/2}.
    """
    rho = np.asarray(rho, dtype=float)
    nrm = float(np.sum(rho ** 2 * ctx.weights))
    if abs(nrm - 1.0) > 1e-8:
        rho = rho / np.sqrt(nrm)
    nu = K.nu
    g = rho / (np.sqrt(nu) * np.sqrt(ctx.sinv) * ctx.r0v)
    inner = row_apply(ctx, K.n, g)
    x = np.sqrt(ctx.sinv) * ctx.r0v * rho / np.sqrt(nu)
    lower = float(np.sum(ctx.weights * x * inner))
    # rows of int K_n(phi_i, .)^2 dmu = int W^2 m(t) / (nu_i^2 nu(t)) dt
    total = 0.0
    for i, pt in enumerate(ctx.nodes):
        t, w = ctx.row_rule(pt)
        W = _wsym_values(ctx.profile, K.n, pt, t)
        L = interp_matrix(ctx.nodes, ctx.bary, t)
        m_t = np.sin(t) * ctx.profile.r0(t) ** 2
        nu_t = L @ nu
        row = np.sum(w * W ** 2 * m_t / nu_t) / nu[i] ** 2
        total += ctx.weights[i] * ctx.mv[i] * nu[i] * row
    upper = float(np.sqrt(total))
    return lower, upper


def dispersion_scan(ctx: KernelContext, n_list, omega_grid, threads: int | None = None) -> DispersionCurve:
    """lambda_n(Omega) over a mode list and an Omega grid, with
    monotonicity anomalies (decreasing in n, increasing in Omega) flagged."""
    n_list = list(n_list)
    omega_grid = list(omega_grid)
    guard_hi = ctx.kappa * (1.0 - ctx.guard_frac)
    for om in omega_grid:
        if not om < guard_hi:
            raise DomainError(f"dispersion_scan: omega={om} not below kappa - guard={guard_hi}")

    def solve(pair):
        n, om = pair
        return largest_eigenvalue(assemble_kernel_matrix(ctx, n, om))

    pairs = [(n, om) for n in n_list for om in omega_grid]
    if threads and threads > 1:
        # warm the per-mode kernel tables serially (shared cache), then fan out
        for n in n_list:
            ctx.mode_tables(n)
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(solve, pairs))
    else:
        results = [solve(p) for p in pairs]
    rows = [(r.n, r.omega, r.lam, r.iterations, r.residual) for r in results]
    lam = {(r.n, r.omega): r.lam for r in results}
    anomalies = []
    for om in omega_grid:
        for a, b in zip(n_list[:-1], n_list[1:]):
            if not lam[(b, om)] < lam[(a, om)]:
                anomalies.append(("n", a, b, om))
    for n in n_list:
        for oa, ob in zip(omega_grid[:-1], omega_grid[1:]):
            if ob > oa and not lam[(n, ob)] > lam[(n, oa)]:
                anomalies.append(("omega", n, oa, ob))
    return DispersionCurve(rows, anomalies)


def _lambda_at(ctx: KernelContext, n: int, omega: float) -> tuple[float, SpectralResult]:
    res = largest_eigenvalue(assemble_kernel_matrix(ctx, n, omega))
    return res.lam, res


def refine_eigenvalue(
    ctx: KernelContext, K: KernelMatrix, res: SpectralResult, steps: int = 10
) -> tuple[float, np.ndarray]:
    """Polish a dominant eigenpair on the product-integration operator.

    The symmetrized Nystrom matrix carries an O(N^-3) eigenvalue bias
    from the plain off-diagonal weights; a few power steps of
    diag(1/nu) B (B the tanh-sinh row-integral matrix) followed by a
    Rayleigh quotient in the mu inner product remove it to quadrature
    accuracy.  Returns (eigenvalue, mu-normalized positive eigenvector).
    """
    B = ctx.mode_b_matrix(K.n)
    nu = K.nu
    mu_w = K.mu_w
    v = res.eigvec.copy()
    lam = res.lam
    for _ in range(steps):
        w = (B @ v) / nu
        lam = float(np.sum(v * mu_w * w) / np.sum(v * mu_w * v))
        v = w / np.sqrt(np.sum(w * w * mu_w))
    if float(np.sum(v * mu_w)) < 0.0:
        v = -v
    return lam, v


def find_bifurcation_point(ctx: KernelContext, m: int) -> BifurcationPoint:
    """Bisection for the unique Omega_m with lambda_m(Omega_m) = 1.

    The right end sits at kappa - guard (lambda there must exceed 1,
    otherwise the guard hides the root); the left end is pushed out
    geometrically until lambda < 1, with a hard floor.
    """
    if m < 2:
        raise DomainError(f"find_bifurcation_point: m must be >= 2, got {m}")
    k = ctx.kappa
    hi = k * (1.0 - ctx.guard_frac) if k > 0 else k - abs(k) * ctx.guard_frac

    def lam_at(omega: float):
        K = assemble_kernel_matrix(ctx, m, omega)
        res = largest_eigenvalue(K)
        return refine_eigenvalue(ctx, K, res)

    lam_hi, _ = lam_at(hi)
    if lam_hi < 1.0:
        raise SolverError(
            f"find_bifurcation_point: lambda_{m}(kappa - guard) = {lam_hi} < 1; "
            "refine the guard to bracket the root"
        )
    lo = hi - max(k, 1.0)
    lam_lo, _ = lam_at(lo)
    while lam_lo >= 1.0:
        lo = hi - 2.0 * (hi - lo)
        if lo < OMEGA_FLOOR:
            raise DomainError(
                f"find_bifurcation_point: no bracket above the Omega floor {OMEGA_FLOOR}"
            )
        lam_lo, _ = lam_at(lo)
    best = None
    for _ in range(BISECT_MAXIT):
        mid = 0.5 * (lo + hi)
        lam_mid, vec_mid = lam_at(mid)
        best = (mid, lam_mid, vec_mid)
        if abs(lam_mid - 1.0) <= BISECT_TOL:
            break
        if lam_mid < 1.0:
            lo = mid
        else:
            hi = mid
    omega_m, lam_m, eigfun = best
    return BifurcationPoint(m, omega_m, eigfun, hi - lo, lam_m)


def eigenfunction_boundary_report(ctx: KernelContext, result: SpectralResult) -> BoundaryReport:
    """Quadratic extrapolation of |h| to the poles from the three nearest
    nodes on each side (boundary behavior diagnostic)."""
    h = np.abs(result.eigvec)
    x = ctx.nodes

    def extrap(idx, target):
        c = np.polyfit(x[idx], h[idx], 2)
        return abs(float(np.polyval(c, target)))

    v0 = extrap([0, 1, 2], 0.0)
    vpi = extrap([-3, -2, -1], np.pi)
    return BoundaryReport(v0, vpi, float(np.max(h)))


def kernel_dimension_check(ctx: KernelContext, m: int, n_max: int, margin: float = KERNEL_DIM_MARGIN):
    """At Omega = Omega_m, verify lambda_n < 1 - margin for n > m and
    lambda_n away from 1 for n < m.  Returns (per-n booleans, per-n
    lambda values, Omega_m)."""
    if m < 2:
        raise DomainError(f"kernel_dimension_check: m must be >= 2, got {m}")
    if n_max < m:
        raise DomainError(f"kernel_dimension_check: n_max must be >= m, got {n_max}")
    bp = find_bifurcation_point(ctx, m)
    ok: dict[int, bool] = {}
    lam: dict[int, float] = {}
    for n in range(1, n_max + 1):
        K = assemble_kernel_matrix(ctx, n, bp.omega_m)
        val, _ = refine_eigenvalue(ctx, K, largest_eigenvalue(K))
        lam[n] = val
        if n == m:
            ok[n] = abs(val - 1.0) <= margin
        elif n > m:
            ok[n] = val < 1.0 - margin
        else:
            ok[n] = abs(val - 1.0) > margin
    return ok, lam, bp.omega_m


def transversality_check(ctx: KernelContext, bp: BifurcationPoint) -> float:
    """Discretized int_0^pi (h*_m)^2 sin(phi) r0^2(phi) dphi; the
    non-degeneracy quantity must be strictly positive."""
    h = np.asarray(bp.eigfun, dtype=float)
    if not np.any(h):
        raise DomainError("transversality_check: zero eigenfunction")
    val = float(np.sum(h ** 2 * ctx.mv * ctx.weights))
    if val <= 0.0:
        raise SolverError(f"transversality_check: non-positive value {val}")
    return val
