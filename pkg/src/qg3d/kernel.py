"""Geometric kernels, the coefficient function nu, and Nystrom assembly.

For a profile r0 the mode-n kernel is

    H_n(phi, vphi) = c_n sin(vphi) r0^{n-1}(phi) r0^{n+1}(vphi)
                     / R^{n+1/2}(phi, vphi) * F_n(x),
    R(phi, vphi)   = (r0(phi) + r0(vphi))^2 + (cos phi - cos vphi)^2,
    x              = 4 r0(phi) r0(vphi) / R(phi, vphi),
    c_n            = 2^{2n-1} ((1/2)_n)^2 / (2n)!,

with F_n the logarithmic-class hypergeometric family from
:mod:`qg3d.specfun`.  The coefficient function and its infimum are

    nu_Omega(phi) = int_0^pi H_1(phi, .) dvphi - Omega,
    kappa         = inf_phi int_0^pi H_1(phi, .) dvphi,

and for Omega < kappa the weighted measure
d mu(vphi) = sin(vphi) r0^2(vphi) nu_Omega(vphi) dvphi is positive, making

    (K_n h)(phi) = (1 / nu_Omega(phi)) int_0^pi H_n(phi, vphi) h(vphi) dvphi

a self-adjoint compact operator on L^2(d mu).  Numerical notes:

* 1 - x is always computed from the chordal-distance identity
  1 - x = ((r0(phi)-r0(vphi))^2 + (cos phi - cos vphi)^2) / R, which is
  what the endpoint expansion of F_n consumes; the subtraction 1 - x
  itself would lose all digits near the diagonal.
* Row integrals split the vphi range at the target node and use
  tanh-sinh rules on each side (the diagonal is a log singularity that
  plain Gauss weights cannot see).
* The Nystrom matrix keeps plain kernel products off the diagonal --
  so its similarity-symmetrized form is symmetric to machine
  precision -- and lumps the remaining singular mass of the accurate
  row integral into the diagonal entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AccuracyError, DomainError
from .profiles import Profile
from .quadrature import barycentric_weights, interp_matrix, split_de
from .specfun import f_n_many, gamma_fn

__all__ = [
    "KernelContext",
    "NuTable",
    "KernelMatrix",
    "big_r",
    "h_n",
    "nu_omega",
    "kappa",
    "assemble_kernel_matrix",
    "hn_decay_scan",
    "row_apply",
]


def _cn(n: int) -> float:
    # 2^{2n-1} ((1/2)_n)^2 / (2n)!
    poch_half = gamma_fn(n + 0.5) / gamma_fn(0.5)
    return 2.0 ** (2 * n - 1) * poch_half ** 2 / gamma_fn(2 * n + 1.0)


def big_r(p: Profile, phi, vphi):
    """R(phi, vphi) = (r0(phi) + r0(vphi))^2 + (cos phi - cos vphi)^2."""
    rp = p.r0(phi)
    rq = p.r0(vphi)
    return (rp + rq) ** 2 + (np.cos(phi) - np.cos(vphi)) ** 2


def _hn_values(p: Profile, n: int, phi, vphi, clamp: bool = True):
    """H_n on broadcastable argument arrays.

    ``clamp`` floors the near-diagonal 1-x at a tiny positive value so
    that quadrature nodes hugging the target stay finite; the public
    :func:`h_n` disables it and raises instead.
    """
    phi = np.asarray(phi, dtype=float)
    vphi = np.asarray(vphi, dtype=float)
    rp = p.r0(phi)
    rq = p.r0(vphi)
    dc = np.cos(phi) - np.cos(vphi)
    R = (rp + rq) ** 2 + dc ** 2
    if not clamp and np.any(R == 0.0):
        raise DomainError("h_n: coincident pole arguments degenerate (R = 0)")
    one_minus = ((rp - rq) ** 2 + dc ** 2) / np.maximum(R, 1e-300)
    if not clamp and np.any(one_minus <= 0.0):
        raise DomainError("h_n: coincident interior arguments (x = 1) are singular")
    x = 1.0 - one_minus
    F = f_n_many(n, x, one_minus)
    return _cn(n) * np.sin(vphi) * rp ** (n - 1) * rq ** (n + 1) * R ** (-(n + 0.5)) * F


def h_n(p: Profile, n: int, phi, vphi):
    """Mode-n kernel H_n(phi, vphi); raises on coincident interior points."""
    if n < 1:
        raise DomainError(f"h_n: n must be >= 1, got {n}")
    return _hn_values(p, n, phi, vphi, clamp=False)


def _wsym_values(p: Profile, n: int, phi, vphi):
    """Symmetric core W(phi, vphi) = H_n(phi, vphi) / (sin(vphi) r0^2(vphi)),
    evaluated in a manifestly symmetric way (bitwise W_ij = W_ji)."""
    rp = p.r0(phi)
    rq = p.r0(vphi)
    dc = np.cos(phi) - np.cos(vphi)
    R = (rp + rq) ** 2 + dc ** 2
    one_minus = ((rp - rq) ** 2 + dc ** 2) / R
    x = 1.0 - one_minus
    F = f_n_many(n, x, one_minus)
    return _cn(n) * (rp * rq) ** (n - 1) * R ** (-(n + 0.5)) * F


@dataclass(eq=False)
class KernelContext:
    """Grid and quadrature configuration shared by the spectral pipeline.

    ``n_nodes`` Gauss-Legendre nodes on (0, pi) (strictly interior, so the
    poles where r0 vanishes are never touched), a tanh-sinh level for the
    singular row integrals, and a level for the 2-d quadratures of the
    double-integral operator representation.  ``refined()`` doubles the
    grid and bumps both levels by one.
    """

    profile: Profile
    n_nodes: int = 96
    de_level: int = 9
    direct_level: int = 3
    guard_frac: float = 1e-3

    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_nodes < 8 or self.n_nodes % 2:
            raise DomainError("KernelContext: n_nodes must be even and >= 8")
        x, w = np.polynomial.legendre.leggauss(self.n_nodes)
        nodes = 0.5 * np.pi * (1.0 + x)
        weights = 0.5 * np.pi * w
        # enforce exact equatorial mirror symmetry of the grid
        self.nodes = 0.5 * (nodes + (np.pi - nodes[::-1]))
        self.weights = 0.5 * (weights + weights[::-1])
        self.r0v = self.profile.r0(self.nodes)
        self.sinv = np.sin(self.nodes)
        self.mv = self.sinv * self.r0v ** 2
        self.bary = barycentric_weights(self.nodes)
        self._cache: dict = {}

    def refined(self) -> "KernelContext":
        return KernelContext(
            self.profile, 2 * self.n_nodes, self.de_level + 1, self.direct_level + 1, self.guard_frac
        )

    def row_rule(self, phi_t: float):
        """Split tanh-sinh rule on (0, pi) with the singular point at phi_t."""
        rule = split_de(0.0, np.pi, phi_t, self.de_level)
        return rule.nodes, rule.weights

    def mode_tables(self, n: int):
        """Cached (W_sym node matrix, accurate row integrals) for mode n."""
        key = ("mode", n)
        tab = self._cache.get(key)
        if tab is not None:
            return tab
        W = _wsym_values(self.profile, n, self.nodes[:, None], self.nodes[None, :])
        rowint = np.empty(self.n_nodes)
        for i, pt in enumerate(self.nodes):
            t, w = self.row_rule(pt)
            rowint[i] = np.sum(w * _hn_values(self.profile, n, pt, t))
        tab = (W, rowint)
        self._cache[key] = tab
        return tab

    def mode_b_matrix(self, n: int) -> np.ndarray:
        """Cached product-integration matrix B with
        (B h)_i ~= int H_n(phi_i, vphi) h(vphi) dvphi for node samples h
        (split tanh-sinh rows against the barycentric Lagrange basis)."""
        key = ("B", n)
        B = self._cache.get(key)
        if B is None:
            B = np.empty((self.n_nodes, self.n_nodes))
            for i, pt in enumerate(self.nodes):
                t, w = self.row_rule(pt)
                L = interp_matrix(self.nodes, self.bary, t)
                B[i, :] = (w * _hn_values(self.profile, n, pt, t)) @ L
            self._cache[key] = B
        return B

    @property
    def nu0(self) -> np.ndarray:
        """Row integrals int_0^pi H_1(phi_i, .) at the grid nodes."""
        if "nu0" not in self._cache:
            self._cache["nu0"] = self.mode_tables(1)[1].copy()
        return self._cache["nu0"]

    @property
    def kappa(self) -> float:
        """Infimum of int H_1(phi, .) over a refined phi sample."""
        if "kappa" not in self._cache:
            fine = 0.5 * np.pi * (1.0 + np.polynomial.legendre.leggauss(2 * self.n_nodes)[0])
            vals = [np.min(self.nu0)]
            for pt in fine:
                t, w = self.row_rule(pt)
                vals.append(np.sum(w * _hn_values(self.profile, 1, pt, t)))
            k = float(np.min(vals))
            if k <= 0.0:
                raise AccuracyError(f"kappa: computed non-positive infimum {k}")
            self._cache["kappa"] = k
        return self._cache["kappa"]


@dataclass(frozen=True)
class NuTable:
    """nu_Omega at the grid nodes, with the threshold kappa."""

    omega: float
    values: np.ndarray
    kappa: float
    positive: bool


def nu_omega(ctx: KernelContext, omega: float) -> NuTable:
    """Tabulate nu_Omega(phi_i) = int H_1(phi_i, .) - Omega on the grid."""
    vals = ctx.nu0 - omega
    return NuTable(float(omega), vals, ctx.kappa, bool(omega < ctx.kappa))


def kappa(ctx: KernelContext) -> float:
    """Threshold kappa = inf_phi int_0^pi H_1(phi, .) dvphi."""
    return ctx.kappa


@dataclass(eq=False)
class KernelMatrix:
    """Nystrom discretization of K_n^Omega on the context grid.

    ``entries`` maps node samples of h to node samples of K_n h; its
    off-diagonal entries are the plain products K_n(phi_i, phi_j) mu_j w_j
    and each diagonal entry carries the singular remainder of the
    tanh-sinh row integral.  ``sym_entries`` is the similarity transform
    D^{1/2} M D^{-1/2} with D = diag(mu_j w_j), symmetric because the
    plain products inherit the exact symmetry of the kernel.
    """

    n: int
    omega: float
    entries: np.ndarray
    sym_entries: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    nu: np.ndarray
    mu_w: np.ndarray
    kappa: float
    row_integrals: np.ndarray
    raw_offdiag: np.ndarray


def assemble_kernel_matrix(
    ctx: KernelContext, n: int, omega: float, strip_nu: bool = False
) -> KernelMatrix:
    """Assemble the mode-n Nystrom matrix at angular velocity omega.

    ``strip_nu`` assembles the Omega-independent variant with nu replaced
    by 1 in both the kernel and the measure (its dominant eigenvalue is
    the quantity the constant-nu families shift by kappa).
    """
    if n < 1:
        raise DomainError(f"assemble_kernel_matrix: n must be >= 1, got {n}")
    W, rowint = ctx.mode_tables(n)
    if strip_nu:
        nu_vals = np.ones(ctx.n_nodes)
    else:
        k = ctx.kappa
        if omega > k - ctx.guard_frac * k:
            raise DomainError(
                f"assemble_kernel_matrix: omega={omega} not below kappa - guard "
                f"= {k - ctx.guard_frac * k} (measure would lose positivity)"
            )
        nu_vals = ctx.nu0 - omega
    mw = ctx.mv * ctx.weights
    off = W * mw[None, :]                      # H_n(phi_i, phi_j) w_j
    np.fill_diagonal(off, 0.0)                 # clamped coincident value is meaningless
    M = off / nu_vals[:, None]
    raw_offdiag = M.copy()
    diag = (rowint - off.sum(axis=1)) / nu_vals
    M[np.arange(ctx.n_nodes), np.arange(ctx.n_nodes)] = diag
    d = np.sqrt(mw * nu_vals)
    S = d[:, None] * M / d[None, :]
    return KernelMatrix(
        n=n,
        omega=float(omega),
        entries=M,
        sym_entries=S,
        nodes=ctx.nodes,
        weights=ctx.weights,
        nu=nu_vals,
        mu_w=mw * nu_vals,
        kappa=ctx.kappa if not strip_nu else float("nan"),
        row_integrals=rowint,
        raw_offdiag=raw_offdiag,
    )


def row_apply(ctx: KernelContext, n: int, h: np.ndarray) -> np.ndarray:
    """Accurate row integrals int H_n(phi_i, vphi) h(vphi) dvphi with h
    interpolated barycentrically between the grid nodes (product
    integration; used by the operator applies and the bound estimates)."""
    return ctx.mode_b_matrix(n) @ np.asarray(h, dtype=float)


def hn_decay_scan(p: Profile, phi: float, vphi: float, n_max: int) -> np.ndarray:
    """H_n(phi, vphi) for n = 1..n_max at fixed off-diagonal arguments."""
    if n_max < 1:
        raise DomainError(f"hn_decay_scan: n_max must be >= 1, got {n_max}")
    if abs(phi - vphi) < 1e-14:
        raise DomainError("hn_decay_scan: arguments must be distinct")
    return np.array([float(h_n(p, n, phi, vphi)) for n in range(1, n_max + 1)])
