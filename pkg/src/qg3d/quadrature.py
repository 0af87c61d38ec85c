"""Quadrature rules and barycentric interpolation support.

Three rule families cover everything the kernel and the nonlinear
functional integrate:

* composite Gauss-Legendre panels for smooth finite-interval integrands,
* tanh-sinh (double-exponential) rules for integrands with endpoint
  algebraic/logarithmic singularities -- interior singularities are
  handled by splitting the interval at the singular abscissa,
* the periodic trapezoid rule for smooth 2 pi-periodic integrands.

Rules are immutable value objects; applying one to an integrand is a
plain weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "QuadratureRule",
    "gauss_panel",
    "double_exponential",
    "periodic_trapezoid",
    "split_de",
    "integrate",
    "barycentric_weights",
    "interp_matrix",
]

GAUSS_PANEL = "gauss_panel"
DOUBLE_EXPONENTIAL = "double_exponential"
PERIODIC_TRAPEZOID = "periodic_trapezoid"

# tanh-sinh truncation: keep nodes while exp(-2u) >= ~1e-26 so that even
# an x^(-1/2) endpoint singularity loses less than ~1e-12 to the cut tail.
_DE_UMAX = 30.0


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights of a one-dimensional rule on [a, b]."""

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    a: float
    b: float

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise DomainError("QuadratureRule: nodes and weights must have equal length")

    def __len__(self) -> int:
        return len(self.nodes)


def gauss_panel(order: int, a: float, b: float, panels: int = 1) -> QuadratureRule:
    """Composite Gauss-Legendre rule, ``order`` points per panel."""
    if order < 2:
        raise DomainError(f"gauss_panel: order must be >= 2, got {order}")
    if panels < 1:
        raise DomainError(f"gauss_panel: panels must be >= 1, got {panels}")
    if not a < b:
        raise DomainError(f"gauss_panel: requires a < b, got a={a}, b={b}")
    x0, w0 = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes.append(mid + half * x0)
        weights.append(half * w0)
    return QuadratureRule(np.concatenate(nodes), np.concatenate(weights), GAUSS_PANEL, a, b)


def double_exponential(a: float, b: float, level: int) -> QuadratureRule:
    """tanh-sinh rule on (a, b) with step h = 2^-level.

    Nodes are strictly interior; trailing nodes that would round onto an
    endpoint in floating point are dropped (their weights are below the
    truncation threshold anyway).
    """
    if not a < b:
        raise DomainError(f"double_exponential: requires a < b, got a={a}, b={b}")
    if level < 1:
        raise DomainError(f"double_exponential: level must be >= 1, got {level}")
    h = 0.5 ** level
    kmax = int(np.floor(np.arcsinh(2.0 * _DE_UMAX / np.pi) / h))
    t = h * np.arange(0, kmax + 1)
    u = 0.5 * np.pi * np.sinh(t)
    # distance of tanh(u) to 1 without cancellation: 1 - tanh(u) = 2/(e^{2u}+1)
    dist = 2.0 / (np.exp(2.0 * u) + 1.0)
    w = h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    half = 0.5 * (b - a)
    # nodes anchored at their nearest endpoint so that clustering scales
    # survive floating point whenever that endpoint is exactly representable
    left = a + half * dist[:0:-1]
    right = b - half * dist[1:]
    nodes = np.concatenate([left, [0.5 * (a + b)], right])
    weights = half * np.concatenate([w[:0:-1], w[:1], w[1:]])
    keep = (nodes > a) & (nodes < b)
    return QuadratureRule(nodes[keep], weights[keep], DOUBLE_EXPONENTIAL, a, b)


def periodic_trapezoid(n_nodes: int) -> QuadratureRule:
    """Equispaced rule on [0, 2 pi): nodes 2 pi j / n, weights 2 pi / n."""
    if n_nodes < 2:
        raise DomainError(f"periodic_trapezoid: n_nodes must be >= 2, got {n_nodes}")
    nodes = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    weights = np.full(n_nodes, 2.0 * np.pi / n_nodes)
    return QuadratureRule(nodes, weights, PERIODIC_TRAPEZOID, 0.0, 2.0 * np.pi)


def split_de(a: float, b: float, singular_at: float, level: int) -> QuadratureRule:
    """Concatenated tanh-sinh rules on (a, s) and (s, b) for an integrand
    with a singularity at the interior point s."""
    if not a < singular_at < b:
        raise DomainError(
            f"split_de: singular point {singular_at} must lie strictly inside ({a}, {b})"
        )
    left = double_exponential(a, singular_at, level)
    right = double_exponential(singular_at, b, level)
    return QuadratureRule(
        np.concatenate([left.nodes, right.nodes]),
        np.concatenate([left.weights, right.weights]),
        DOUBLE_EXPONENTIAL,
        a,
        b,
    )


def integrate(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Apply a rule to a vectorized integrand."""
    return float(np.sum(rule.weights * f(rule.nodes)))


def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    """Barycentric interpolation weights for arbitrary distinct nodes,
    rescaled by the interval capacity to avoid overflow."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    cap = (nodes[-1] - nodes[0]) / 4.0
    w = np.empty(n)
    for j in range(n):
        d = (nodes[j] - nodes) / cap
        d[j] = 1.0
        w[j] = 1.0 / np.prod(d)
    return w


def interp_matrix(nodes: np.ndarray, bary_w: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Matrix L with L[p, j] = l_j(x_p), the Lagrange basis on ``nodes``
    evaluated at the points ``x`` (second-form barycentric formula)."""
    x = np.asarray(x, dtype=float)
    diff = x[:, None] - nodes[None, :]
    hit = np.abs(diff) < 1e-14
    diff[hit] = 1.0
    L = bary_w[None, :] / diff
    L /= L.sum(axis=1)[:, None]
    rows_hit = hit.any(axis=1)
    if rows_hit.any():
        L[rows_hit] = 0.0
        L[hit] = 1.0
    return L
