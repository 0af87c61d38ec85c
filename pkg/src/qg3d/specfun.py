"""Gauss hypergeometric machinery and the closed-form ring integral.

Everything downstream of the kernel formulas rests on the family

    F_n(x) = 2F1(n + 1/2, n + 1/2; 2n + 1; x),   x in [0, 1),

which belongs to the logarithmic class c = a + b: it diverges like
-ln(1 - x) at the right endpoint.  Evaluation strategy:

* power series in x away from the endpoint (all terms positive, no
  cancellation);
* near x = 1, the standard connection expansion in u = 1 - x whose
  coefficients carry digamma factors.  The two fixed-sign partial sums
  of that expansion are accumulated separately in extended precision,
  because their final combination cancels by several orders for larger
  parameters.

The switch point between the branches moves toward x = 1 as a*b grows
(u_switch = min(0.25, 14/(a*b))); at the default 0.75 the connection
series is badly conditioned once a = b >~ 8.

The gamma and digamma cores are implemented here (Lanczos approximation
and asymptotic series plus recurrence) so the package has no runtime
dependency beyond numpy.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import AccuracyError, DomainError

__all__ = [
    "gamma_fn",
    "digamma",
    "pochhammer",
    "gauss_2f1",
    "f_n",
    "f_n_many",
    "f_n_prime",
    "ring_integral",
]

_LD = np.longdouble
_EULER = _LD("0.5772156649015328606065120900824024310422")
_PI_LD = _LD("3.1415926535897932384626433832795028842")

# Lanczos g = 7, 9-term coefficient set.
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

MAX_SERIES_TERMS = 500
_SERIES_EXIT = 1e-16


def _is_nonpositive_integer(x: float, tol: float = 1e-12) -> bool:
    return x <= tol and abs(x - round(x)) <= tol


def gamma_fn(x: float) -> float:
    """Gamma function for real x, x not a non-positive integer.

    Lanczos approximation on x >= 0.5, reflection formula below.
    """
    x = float(x)
    if _is_nonpositive_integer(x):
        raise DomainError(f"gamma_fn: pole at non-positive integer x={x}")
    if x < 0.5:
        # Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def _rgamma(x: float) -> float:
    """1/Gamma(x), zero at the non-positive-integer poles."""
    if _is_nonpositive_integer(x):
        return 0.0
    return 1.0 / gamma_fn(x)


def _digamma_core(x: float, shift_to: float) -> float:
    """digamma via upward recurrence to x >= shift_to, then the
    asymptotic expansion in 1/x^2 (Bernoulli terms through x^-14)."""
    acc = 0.0
    while x < shift_to:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = inv2 * (
        1.0 / 12
        - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * 691.0 / 32760))))
    )
    return acc + math.log(x) - 0.5 / x - tail


def digamma(x: float) -> float:
    """Digamma function for real x, x not a non-positive integer."""
    x = float(x)
    if _is_nonpositive_integer(x):
        raise DomainError(f"digamma: pole at non-positive integer x={x}")
    if x < 0.0:
        # psi(x) = psi(1 - x) - pi cot(pi x)
        return digamma(1.0 - x) - math.pi / math.tan(math.pi * x)
    return _digamma_core(x, 16.0)


def _digamma_ld(x) -> np.longdouble:
    """Extended-precision digamma for positive x (connection coefficients)."""
    x = _LD(x)
    acc = _LD(0.0)
    while x < 32:
        acc -= 1 / x
        x += 1
    inv2 = 1 / (x * x)
    tail = inv2 * (
        _LD(1) / 12
        - inv2
        * (_LD(1) / 120 - inv2 * (_LD(1) / 252 - inv2 * (_LD(1) / 240 - inv2 * (_LD(1) / 132 - inv2 * _LD(691) / 32760))))
    )
    return acc + np.log(x) - 1 / (2 * x) - tail


def pochhammer(x: float, n: int) -> float:
    """Rising factorial (x)_n = x (x+1) ... (x+n-1), with (x)_0 = 1."""
    if n < 0 or n != int(n):
        raise DomainError(f"pochhammer: n must be a non-negative integer, got {n}")
    out = 1.0
    x = float(x)
    for k in range(int(n)):
        out *= x + k
    return out


def _series_2f1(a: float, b: float, c: float, x: float, max_terms: int):
    """Plain power series; returns (value, converged)."""
    term = 1.0
    total = 1.0
    for k in range(max_terms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x
        total += term
        if abs(term) <= _SERIES_EXIT * abs(total) and k > 2:
            return total, True
    return total, False


def _log_connection(a: float, b: float, u, max_terms: int):
    """2F1(a, b; a+b; 1-u) for 0 < u < 1 via the endpoint expansion

        pref * sum_k e_k u^k (d_k - ln u),
        e_k = (a)_k (b)_k / (k!)^2,
        d_k = 2 psi(k+1) - psi(a+k) - psi(b+k),
        pref = Gamma(a+b) / (Gamma(a) Gamma(b)).

    The d-weighted and plain sums are accumulated separately in extended
    precision; each has fixed-sign terms, so the only cancellation left
    is the single final combination.  Vectorized over u.
    """
    u = np.atleast_1d(np.asarray(u, dtype=_LD))
    u = np.maximum(u, _LD(1e-300))
    lu = np.log(u)
    e = _LD(1.0)
    d = -2 * _EULER - _digamma_ld(a) - _digamma_ld(b)
    p = np.ones_like(u)
    sum_d = np.zeros_like(u)
    sum_p = np.zeros_like(u)
    converged = False
    for k in range(max_terms):
        sum_d += e * d * p
        sum_p += e * p
        e *= (a + k) * (b + k) / _LD((k + 1.0) ** 2)
        d += 2 / _LD(k + 1.0) - 1 / (_LD(a) + k) - 1 / (_LD(b) + k)
        p *= u
        if k > 4 and np.all(e * p * (np.abs(d) + np.abs(lu)) <= _LD(1e-24) * np.abs(sum_d - lu * sum_p)):
            converged = True
            break
    pref = _LD(gamma_fn(a + b)) / (_LD(gamma_fn(a)) * _LD(gamma_fn(b)))
    return (pref * (sum_d - lu * sum_p)).astype(float), converged


def _log_case_switch(a: float, b: float) -> float:
    """u below which the logarithmic connection expansion is used."""
    return min(0.25, 14.0 / max(a * b, 1.0))


def gauss_2f1(a: float, b: float, c: float, x: float, max_terms: int = MAX_SERIES_TERMS) -> float:
    """Gauss hypergeometric 2F1(a, b; c; x) for real parameters.

    Supported arguments: -1 < x < 1, plus x = 1 when c - a - b > 0
    (closed form Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))).
    Near x = 1 the logarithmic connection expansion is used when
    c = a + b, and the two-term connection formula when c - a - b is
    not an integer.
    """
    a, b, c, x = float(a), float(b), float(c), float(x)
    if _is_nonpositive_integer(c):
        raise DomainError(f"gauss_2f1: c={c} is a non-positive integer")
    if x > 1.0 or x <= -1.0:
        raise DomainError(f"gauss_2f1: argument x={x} outside (-1, 1]")
    s = c - a - b
    if x == 1.0:
        if s <= 0.0:
            raise DomainError("gauss_2f1: x=1 requires c - a - b > 0")
        return gamma_fn(c) * gamma_fn(s) / (gamma_fn(c - a) * gamma_fn(c - b))
    if a == 0.0 or b == 0.0:
        return 1.0
    log_case = abs(s) <= 1e-12
    if log_case:
        x_switch = 1.0 - _log_case_switch(a, b)
    else:
        x_switch = 0.75
    if x <= x_switch:
        val, ok = _series_2f1(a, b, c, x, max_terms)
        if not ok:
            raise AccuracyError(f"gauss_2f1: series not converged in {max_terms} terms at x={x}")
        return val
    u = 1.0 - x
    if log_case:
        val, ok = _log_connection(a, b, u, max_terms)
        if not ok:
            raise AccuracyError(f"gauss_2f1: connection series not converged at x={x}")
        return float(val[0])
    if abs(s - round(s)) > 1e-8:
        g1 = gamma_fn(c) * gamma_fn(s) * _rgamma(c - a) * _rgamma(c - b)
        g2 = gamma_fn(c) * gamma_fn(-s) * _rgamma(a) * _rgamma(b)
        f1 = f2 = 0.0
        if g1 != 0.0:
            f1, ok = _series_2f1(a, b, 1.0 - s, u, max_terms)
            if not ok:
                raise AccuracyError(f"gauss_2f1: connection series not converged at x={x}")
        if g2 != 0.0:
            f2, ok = _series_2f1(c - a, c - b, 1.0 + s, u, max_terms)
            if not ok:
                raise AccuracyError(f"gauss_2f1: connection series not converged at x={x}")
        return g1 * f1 + g2 * u ** s * f2
    # integer nonzero c-a-b: fall back to the series (slow convergence)
    val, ok = _series_2f1(a, b, c, x, max_terms)
    if not ok:
        raise AccuracyError(
            f"gauss_2f1: series not converged at x={x} (integer c-a-b={s}, no connection branch)"
        )
    return val


# --------------------------------------------------------------------------
# fast path for the kernel family F_n
# --------------------------------------------------------------------------

_FN_CACHE: dict[int, tuple] = {}


def _fn_tables(n: int):
    """Cached per-n coefficient tables (series in double, connection in
    extended precision, prefactor, switch point)."""
    tab = _FN_CACHE.get(n)
    if tab is not None:
        return tab
    a = _LD(n) + _LD(0.5)
    c = _LD(2 * n + 1)
    kmax = MAX_SERIES_TERMS
    ser = np.empty(kmax)
    t = _LD(1.0)
    for k in range(kmax):
        ser[k] = float(t)
        t *= (a + k) ** 2 / ((c + k) * (k + 1))
    cc = np.empty(kmax, dtype=_LD)
    dk = np.empty(kmax, dtype=_LD)
    cc[0] = 1.0
    dk[0] = -2 * _EULER - 2 * _digamma_ld(a)
    for k in range(kmax - 1):
        cc[k + 1] = cc[k] * ((a + k) / (k + 1)) ** 2
        dk[k + 1] = dk[k] + 2 / _LD(k + 1) - 2 / (a + k)
    # pref = Gamma(2n+1)/Gamma(n+1/2)^2 = 16^n (n!)^2 / (pi (2n)!)
    pref = 1 / _PI_LD
    for j in range(1, n + 1):
        pref *= _LD(8 * j) / _LD(2 * j - 1)
    u_switch = _log_case_switch(float(a), float(a))
    tab = (ser, cc, dk, pref, u_switch)
    _FN_CACHE[n] = tab
    return tab


def f_n_many(n: int, x: np.ndarray, one_minus: np.ndarray | None = None) -> np.ndarray:
    """Vectorized F_n(x) = 2F1(n+1/2, n+1/2; 2n+1; x) on 0 <= x < 1.

    ``one_minus`` optionally supplies 1 - x computed without cancellation
    (the kernel assembles it from the chordal distance directly); it is
    what the endpoint expansion actually consumes.
    """
    if n < 1:
        raise DomainError(f"f_n_many: n must be >= 1, got {n}")
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = np.ravel(x)
    if one_minus is None:
        u_all = 1.0 - x
    else:
        u_all = np.ravel(np.asarray(one_minus, dtype=float))
    ser, cc, dk, pref, u_switch = _fn_tables(n)
    out = np.empty_like(x)
    lo = u_all >= u_switch
    if lo.any():
        xs = x[lo]
        p = np.ones_like(xs)
        s = np.zeros_like(xs)
        for k in range(len(ser)):
            t = ser[k] * p
            s += t
            if k > 2 and np.all(t <= _SERIES_EXIT * s):
                break
            p *= xs
        out[lo] = s
    hi = ~lo
    if hi.any():
        u = np.maximum(u_all[hi].astype(_LD), _LD(1e-300))
        lu = np.log(u)
        p = np.ones_like(u)
        sum_d = np.zeros_like(u)
        sum_p = np.zeros_like(u)
        for k in range(len(cc)):
            sum_d += cc[k] * dk[k] * p
            sum_p += cc[k] * p
            p *= u
            if k > 4 and np.all(cc[k] * p * (np.abs(dk[k]) + np.abs(lu)) <= _LD(1e-24) * np.abs(sum_d - lu * sum_p)):
                break
        out[hi] = (pref * (sum_d - lu * sum_p)).astype(float)
    return out.reshape(shape)


def f_n(n: int, x: float) -> float:
    """F_n(x) = 2F1(n+1/2, n+1/2; 2n+1; x) for scalar x in [0, 1)."""
    if n < 1:
        raise DomainError(f"f_n: n must be >= 1, got {n}")
    x = float(x)
    if x < 0.0 or x >= 1.0:
        raise DomainError(f"f_n: argument x={x} outside [0, 1)")
    return float(f_n_many(n, np.array([x]))[0])


def f_n_prime(n: int, x: float) -> float:
    """Derivative F_n'(x) = ((n+1/2)^2/(2n+1)) 2F1(n+3/2, n+3/2; 2n+2; x).

    Above the switch point the connection expansion of F_n is
    differentiated termwise instead (the shifted parameter set has
    c - a - b = -1, for which no clean connection formula is coded).
    """
    if n < 1:
        raise DomainError(f"f_n_prime: n must be >= 1, got {n}")
    x = float(x)
    if x < 0.0 or x >= 1.0:
        raise DomainError(f"f_n_prime: argument x={x} outside [0, 1)")
    ser, cc, dk, pref, u_switch = _fn_tables(n)
    a = n + 0.5
    if 1.0 - x >= u_switch:
        return a * a / (2 * n + 1.0) * _series_2f1(n + 1.5, n + 1.5, 2 * n + 2.0, x, MAX_SERIES_TERMS)[0]
    # d/dx F_n(1-u) = pref * [B/u + ln(u) B' - A'],  A = sum e_k d_k u^k, B = sum e_k u^k
    u = max(_LD(1.0) - _LD(x), _LD(1e-300))
    lu = np.log(u)
    p = _LD(1.0)
    B = _LD(0.0)
    Ap = _LD(0.0)
    Bp = _LD(0.0)
    for k in range(len(cc)):
        B += cc[k] * p
        if k >= 1:
            q = cc[k] * k * p / u
            Ap += q * dk[k]
            Bp += q
        p *= u
        if k > 4 and cc[k] * p * (abs(dk[k]) + abs(lu)) * (k + 1) <= _LD(1e-24) * abs(B) * u:
            break
    return float(pref * (B / u + lu * Bp - Ap))


def ring_integral(n: int, beta: float, A: float) -> float:
    """Closed form of the ring integral

        int_0^{2pi} cos(n t) / (A - cos t)^{beta/2} dt
      = 2 pi / (1+A)^{beta/2+n} * (beta/2)_n 2^n (1/2)_n / (2n)!
        * 2F1(n + beta/2, n + 1/2; 2n + 1; 2/(1+A)),

    valid for integer n >= 0, beta >= 0 and A > 1.
    """
    if n < 0 or n != int(n):
        raise DomainError(f"ring_integral: n must be a non-negative integer, got {n}")
    if beta < 0:
        raise DomainError(f"ring_integral: beta must be >= 0, got {beta}")
    if A <= 1.0:
        raise DomainError(f"ring_integral: A must be > 1, got {A}")
    n = int(n)
    coef = pochhammer(beta / 2.0, n) * 2.0 ** n * pochhammer(0.5, n) / gamma_fn(2 * n + 1.0)
    if coef == 0.0:
        return 0.0
    z = 2.0 / (1.0 + A)
    hyp = gauss_2f1(n + beta / 2.0, n + 0.5, 2.0 * n + 1.0, z)
    return 2.0 * math.pi / (1.0 + A) ** (beta / 2.0 + n) * coef * hyp
