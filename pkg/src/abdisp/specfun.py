"""Fractional-order special functions used by every kernel in the package.

Provides Gamma for positive real argument, the cylinder pair (J_nu, Y_nu)
at real positive argument, and the modified Bessel I_nu at complex
argument on and near the imaginary axis.

Evaluation strategy for (J_nu, Y_nu), nu >= 0:

* ascending power series wherever the alternating-sum cancellation is
  controlled; a compensated double-double accumulation extends the safe
  region to roughly nu * eta(x/nu) <= 42, eta being the exponential
  growth rate of sum_k |term_k| = I_nu(x) relative to |J_nu(x)|;
* Hankel large-argument asymptotics for x >= _asym_edge(nu), where the
  smallest term of the divergent expansion certifies ~1e-11;
* in the wedge between the two (x and nu large and comparable) a Lentz
  continued fraction for J_{nu+1}/J_nu combined with the cross-product
  identity  J_nu Y_{nu+1} - J_{nu+1} Y_nu = -2/(pi x)  recovers J, while
  Y always climbs the stable upward three-term recurrence from seeds of
  order nu - floor(nu).

Y at low order comes from the reflection formula (x <= 14, series) or
directly from the asymptotics (x > 14).  Orders within 1e-8 of an
integer are rejected on the reflection path; gauge reduction keeps every
in-scope order |m + alpha| safely non-integer.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _ddouble as dd
from .errors import AccuracyError, DomainError

_SERIES_X_MAX = 14.0        # plain x-cutoff below which the series is always used
_SERIES_ETA_CAP = 42.0      # nu * eta_i(x/nu) budget for the dd series
_DD_CANCEL_CAP = 9.0        # nu * g(x/nu) above which plain summation is refused
_PLAIN_X_MAX = 6.0          # below this the plain series is always accurate
_SERIES_KMAX = 520
_ASYM_KMAX = 75
_Y_OVERFLOW = 1e290


@dataclass(frozen=True)
class BesselPair:
    """Values of the cylinder functions J_nu(x) and Y_nu(x)."""

    j: float
    y: float


def gamma(x: float) -> float:
    """Gamma function for real x > 0."""
    if x <= 0.0:
        raise DomainError(f"gamma requires x > 0, got {x}")
    return math.gamma(x)


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not nu >= 0.0:
        raise DomainError(f"Bessel order must be >= 0, got {nu}")
    return nu


def _eta_i(z):
    """Exponent rate of I_nu(nu z): I ~ exp(nu * eta_i(z)) for large nu."""
    z = np.asarray(z, dtype=float)
    s = np.sqrt(1.0 + z * z)
    return s + np.log(z / (1.0 + s))


def _cancel_rate(z):
    """Exponent rate of the series cancellation ratio I_nu/|J_nu| at z = x/nu."""
    z = np.asarray(z, dtype=float)
    zc = np.minimum(z, 1.0)
    c = np.sqrt(1.0 - zc * zc)
    si = np.sqrt(1.0 + z * z)
    return si - c + np.log((1.0 + c) / (1.0 + si)) + np.log(np.maximum(z, zc))


def _asym_edge(nu: float) -> float:
    """Smallest x at which the Hankel expansion at order nu certifies ~1e-11."""
    return max(_SERIES_X_MAX, 1.03 * nu + 2.0, nu * nu / 23.0)


def _series_safe(nu: float, x):
    x = np.asarray(x, dtype=float)
    if nu == 0.0:
        return x <= _SERIES_X_MAX
    return (x <= _SERIES_X_MAX) | (nu * _eta_i(x / nu) <= _SERIES_ETA_CAP)


def _series_j_plain(nu: float, x: np.ndarray) -> np.ndarray:
    """Ascending series for J_nu, plain float64 accumulation."""
    q = 0.25 * x * x
    tau = np.ones_like(x)
    s = np.ones_like(x)
    for k in range(_SERIES_KMAX):
        tau = -tau * q / ((k + 1.0) * (nu + k + 1.0))
        s += tau
        if np.all(np.abs(tau) <= 1e-17 * np.abs(s) + 1e-300):
            break
    return _series_prefactor(nu, x) * s


def _series_j_dd(nu: float, x: np.ndarray) -> np.ndarray:
    """Ascending series for J_nu with double-double term recurrence."""
    qh, ql = dd.two_prod(0.5 * x, 0.5 * x)
    tau = dd.dd(np.ones_like(x))
    s = dd.dd(np.ones_like(x))
    for k in range(_SERIES_KMAX):
        # divisor (k+1)(nu+k+1) carried to dd accuracy
        ah, al = dd.two_sum(np.float64(nu), np.float64(k + 1.0))
        denh, denl = dd.two_prod(ah, np.float64(k + 1.0))
        denl = denl + al * (k + 1.0)
        tau = dd.dd_mul(tau, (qh, ql))
        tau = dd.dd_div(tau, (denh, denl))
        tau = dd.dd_neg(tau)
        s = dd.dd_add(s, tau)
        if k % 3 == 2 and np.all(dd.dd_abs_hi(tau) <= 1e-20 * np.abs(s[0]) + 1e-300):
            break
    return _series_prefactor(nu, x) * dd.dd_to_float(s)


def _series_prefactor(nu: float, x: np.ndarray) -> np.ndarray:
    # (x/2)^nu / Gamma(nu+1); nu > -1 keeps Gamma positive
    return np.exp(nu * np.log(0.5 * x) - math.lgamma(nu + 1.0))


def _series_j(nu: float, x: np.ndarray) -> np.ndarray:
    """Series J_nu on an array, choosing plain or compensated summation."""
    out = np.empty_like(x)
    anu = abs(nu)
    if anu > 0.0:
        rate = anu * _cancel_rate(x / anu)
    else:
        rate = np.full_like(x, np.inf)
    plain = (x <= _PLAIN_X_MAX) | (rate <= _DD_CANCEL_CAP)
    if np.any(plain):
        out[plain] = _series_j_plain(nu, x[plain])
    if np.any(~plain):
        out[~plain] = _series_j_dd(nu, x[~plain])
    return out


def _hankel_jy(nu: float, x: np.ndarray):
    """Hankel asymptotic expansion; valid for x >= _asym_edge(nu).

    The |c_k| sequence may grow before shrinking toward the optimal
    truncation point, so summation stops per element only once the terms
    have passed through their minimum (or dropped below roundoff).
    """
    mu = 4.0 * nu * nu
    inv8x = 1.0 / (8.0 * x)
    term = np.ones_like(x)
    p = np.ones_like(x)
    q = np.zeros_like(x)
    frozen = np.zeros(x.shape, dtype=bool)
    shrinking = np.zeros(x.shape, dtype=bool)
    for k in range(1, _ASYM_KMAX):
        fac = (mu - (2.0 * k - 1.0) ** 2) * inv8x / k
        cand = term * fac
        frozen |= shrinking & (np.abs(cand) >= np.abs(term))
        live = ~frozen
        shrinking = np.where(live, np.abs(cand) < np.abs(term), shrinking)
        cand = np.where(live, cand, 0.0)
        half = k // 2
        sign = -1.0 if half % 2 else 1.0
        if k % 2:
            q += sign * cand
        else:
            p += sign * cand
        term = np.where(live, cand, term)
        frozen |= np.abs(term) < 1e-18
        if np.all(frozen):
            break
    omega = x - (0.5 * nu + 0.25) * np.pi
    amp = np.sqrt(2.0 / (np.pi * x))
    cw = np.cos(omega)
    sw = np.sin(omega)
    return amp * (p * cw - q * sw), amp * (p * sw + q * cw)


def _y_seeds(nu0: float, x: np.ndarray):
    """(Y_{nu0}, Y_{nu0+1}) for nu0 in [0, 1)."""
    y0 = np.empty_like(x)
    y1 = np.empty_like(x)
    lo = x <= _SERIES_X_MAX
    if np.any(lo):
        if min(nu0, 1.0 - nu0) < 1e-8:
            raise DomainError(
                "Y reflection formula breaks down within 1e-8 of integer order"
            )
        xs = x[lo]
        s = math.sin(math.pi * nu0)
        c = math.cos(math.pi * nu0)
        j_p = _series_j(nu0, xs)          # J_{nu0}
        j_m = _series_j(-nu0, xs)         # J_{-nu0}
        j_pm1 = _series_j(nu0 - 1.0, xs)  # J_{nu0-1}
        j_mp1 = _series_j(1.0 - nu0, xs)  # J_{1-nu0}
        ya = (j_p * c - j_m) / s          # Y_{nu0}
        yb = (j_pm1 * c + j_mp1) / s      # Y_{nu0-1}
        y0[lo] = ya
        y1[lo] = (2.0 * nu0 / xs) * ya - yb
    hi = ~lo
    if np.any(hi):
        xs = x[hi]
        _, ya = _hankel_jy(nu0, xs)
        _, yb = _hankel_jy(nu0 + 1.0, xs)
        y0[hi] = ya
        y1[hi] = yb
    return y0, y1


def _y_climb(nu: float, x: np.ndarray, seed_cache: dict | None = None):
    """(Y_nu, Y_{nu+1}) via upward recurrence from fractional-order seeds.

    Kernel builders evaluating many orders at one argument array can pass a
    per-array dict so seeds of a shared fractional order are reused.
    """
    n = int(math.floor(nu))
    nu0 = nu - n
    if seed_cache is None:
        y0, y1 = _y_seeds(nu0, x)
    else:
        key = round(nu0, 12)
        if key not in seed_cache:
            seed_cache[key] = _y_seeds(nu0, x)
        y0, y1 = seed_cache[key]
    for i in range(n):
        mu = nu0 + i + 1.0
        y0, y1 = y1, (2.0 * mu / x) * y1 - y0
        if np.any(np.abs(y1) > _Y_OVERFLOW):
            raise OverflowError(
                f"Y_nu overflows during upward recurrence (nu={nu}, min x={x.min()})"
            )
    return y0, y1


def _cf1_ratio(nu: float, x: float) -> float:
    """J_{nu+1}(x)/J_nu(x) by the modified Lentz continued fraction.

    Evaluates h = J_nu/J_{nu+1} = b_1 - 1/(b_2 - 1/(b_3 - ...)) with
    b_k = 2(nu+k)/x and returns 1/h.
    """
    tiny = 1e-290
    f = 2.0 * (nu + 1.0) / x
    if f == 0.0:
        f = tiny
    c = f
    d = 0.0
    for k in range(2, 40000):
        b = 2.0 * (nu + k) / x
        d = b - d
        if d == 0.0:
            d = tiny
        c = b - 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return 1.0 / f
    raise AccuracyError(f"CF1 failed to converge for nu={nu}, x={x}")


def bessel_jy_grid(nu: float, x, seed_cache: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
    """J_nu and Y_nu on an array of positive arguments.

    `seed_cache` (optional, keyed by fractional order) lets kernel builders
    that sweep many orders over one argument array share the Y seeds.
    """
    nu = _check_order(nu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0.0):
        raise DomainError("bessel_jy requires x > 0")
    j = np.empty_like(x)
    y = np.empty_like(x)

    ser = _series_safe(nu, x)
    asy = (~ser) & (x >= _asym_edge(nu))
    wedge = ~(ser | asy)

    if np.any(ser):
        j[ser] = _series_j(nu, x[ser])
    if np.any(asy):
        ja, ya = _hankel_jy(nu, x[asy])
        j[asy] = ja
        y[asy] = ya
    need_chain = ser | wedge
    if np.any(need_chain):
        xs = x[need_chain]
        cache = seed_cache if np.all(need_chain) else None
        y0, y1 = _y_climb(nu, xs, cache)
        y[need_chain] = y0
        if np.any(wedge):
            xw = x[wedge]
            yw0, yw1 = y0[wedge[need_chain]], y1[wedge[need_chain]]
            jw = np.empty_like(xw)
            for i, xi in enumerate(xw):
                rho = _cf1_ratio(nu, float(xi))
                jw[i] = 2.0 / (math.pi * xi * (rho * yw0[i] - yw1[i]))
            j[wedge] = jw
    return j, y


def bessel_j_grid(nu: float, x) -> np.ndarray:
    """J_nu alone on an array of positive arguments (skips the Y machinery)."""
    nu = _check_order(nu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0.0):
        raise DomainError("bessel_j requires x > 0")
    j = np.empty_like(x)
    ser = _series_safe(nu, x)
    asy = (~ser) & (x >= _asym_edge(nu))
    wedge = ~(ser | asy)
    if np.any(ser):
        j[ser] = _series_j(nu, x[ser])
    if np.any(asy):
        j[asy], _ = _hankel_jy(nu, x[asy])
    if np.any(wedge):
        xw = x[wedge]
        y0, y1 = _y_climb(nu, xw)
        jw = np.empty_like(xw)
        for i, xi in enumerate(xw):
            rho = _cf1_ratio(nu, float(xi))
            jw[i] = 2.0 / (math.pi * xi * (rho * y0[i] - y1[i]))
        j[wedge] = jw
    return j


def bessel_jy(order: float, x: float) -> BesselPair:
    """Cylinder pair (J_nu(x), Y_nu(x)) for nu >= 0, x > 0."""
    jj, yy = bessel_jy_grid(order, np.array([float(x)]))
    return BesselPair(j=float(jj[0]), y=float(yy[0]))


def mod_bessel_i(order: float, z: complex) -> complex:
    """Modified Bessel I_nu at complex argument.

    Purely imaginary z (the propagator ray z = r r'/(2it)) is routed through
    the rotation identity I_nu(z) = exp(-i pi nu / 2) J_nu(iz), which reduces
    to real-argument J; real positive z uses the ascending I series; anything
    else falls back to Gauss-Jacobi quadrature of the Poisson-type integral
    representation.
    """
    nu = _check_order(order)
    z = complex(z)
    az = abs(z)
    if az == 0.0:
        return complex(1.0) if nu == 0.0 else complex(0.0)
    if abs(z.real) <= 1e-13 * az:
        w = abs(z.imag)
        jw = float(bessel_j_grid(nu, np.array([w]))[0])
        phase = cmath.exp(0.5j * math.pi * nu)
        if z.imag < 0.0:
            phase = phase.conjugate()
        return phase * jw
    if abs(z.imag) <= 1e-13 * az and z.real > 0.0:
        return complex(_series_i_real(nu, z.real))
    return _quadrature_i(nu, z)


def _series_i_real(nu: float, x: float) -> float:
    q = 0.25 * x * x
    tau = 1.0
    s = 1.0
    for k in range(2000):
        tau *= q / ((k + 1.0) * (nu + k + 1.0))
        s += tau
        if tau <= 1e-17 * s:
            break
    return math.exp(nu * math.log(0.5 * x) - math.lgamma(nu + 1.0)) * s


def _quadrature_i(nu: float, z: complex) -> complex:
    from scipy.special import roots_jacobi

    pref = (0.5 * z) ** nu / (math.gamma(nu + 0.5) * math.sqrt(math.pi))
    prev = None
    n = 48
    while n <= 12288:
        s_nodes, w = roots_jacobi(n, nu - 0.5, nu - 0.5)
        val = pref * np.sum(w * np.exp(z * s_nodes))
        if prev is not None and abs(val - prev) <= 1e-11 * max(abs(val), 1e-300):
            return complex(val)
        prev = val
        n *= 2
    raise AccuracyError(f"integral representation of I_nu did not converge, |z|={abs(z)}")
