"""Free resolvent kernel of H_alpha at positive energy (limiting absorption
from the upper half-plane), its per-mode Bessel form, the threshold kernels
G0, G1, G2, and the low-energy expansion remainder.

Mode m of the resolvent acts on L^2(R_+, r dr) with the kernel

    (h_m - lambda)^{-1}(r, r') = (pi i / 2) J_nu(a) (J_nu(b) + i Y_nu(b)),

nu = |m + alpha|, a = min(r, r') sqrt(lambda), b = max(r, r') sqrt(lambda).
The positive square root encodes the upper-half-plane limit.  For orders
far above the arguments the J*Y product is assembled from scaled series to
dodge the Y overflow / J underflow of the separate factors.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError
from .field import Flux, PolarPoint, sigma_alpha
from .specfun import bessel_jy, gamma

_MODE_CAP = 420
_G0_MODE_CAP = 4000
_SCALED_NU_MIN = 32.0


@dataclass(frozen=True)
class ThresholdKernelId:
    """Selector for the threshold kernels G_j, j in {0, 1, 2}."""

    j: int

    def __post_init__(self):
        if self.j not in (0, 1, 2):
            raise DomainError(f"threshold kernel index must be 0, 1 or 2, got {self.j}")


def _scaled_series_j(nu: float, x: float) -> float:
    """S_J = Gamma(nu+1) (2/x)^nu J_nu(x); converges fast for nu >> x^2/4."""
    q = -0.25 * x * x
    term = 1.0
    s = 1.0
    for k in range(1, 200):
        term *= q / (k * (nu + k))
        s += term
        if abs(term) <= 1e-17 * abs(s):
            break
    return s


def _scaled_series_y(nu: float, x: float) -> float:
    """S_Y with Y_nu(x) ~ -(Gamma(nu)/pi) (2/x)^nu S_Y for nu >> x^2/4."""
    q = 0.25 * x * x
    term = 1.0
    s = 1.0
    for k in range(1, 200):
        term *= q / (k * (nu - k))
        s += term
        if abs(term) <= 1e-17 * abs(s):
            break
    return s


def _mode_cross_product(nu: float, a: float, b: float) -> complex:
    """J_nu(a) (J_nu(b) + i Y_nu(b)) without forming the separate factors.

    Valid for nu >= max(_SCALED_NU_MIN, b^2/2 + 20); both pieces are carried
    through logs of the Gamma prefactors.
    """
    sj_a = _scaled_series_j(nu, a)
    sj_b = _scaled_series_j(nu, b)
    sy_b = _scaled_series_y(nu, b)
    jj = math.exp(nu * (math.log(0.5 * a) + math.log(0.5 * b)) - 2.0 * math.lgamma(nu + 1.0))
    jy = -math.exp(nu * math.log(a / b)) / (math.pi * nu)
    return jj * sj_a * sj_b + 1j * jy * sj_a * sy_b


def _use_scaled(nu: float, b: float) -> bool:
    return nu >= max(_SCALED_NU_MIN, 0.5 * b * b + 20.0)


def mode_resolvent_kernel(m: int, flux: Flux, lam: float, r: float, rp: float) -> complex:
    """(h_m - lambda)^{-1}(r, r') for lambda > 0 on the upper-edge branch."""
    if lam <= 0.0:
        raise DomainError("mode resolvent needs lambda > 0; lambda = 0 is threshold_kernel")
    if r <= 0.0 or rp <= 0.0:
        raise DomainError("mode resolvent kernel needs r, r' > 0")
    nu = flux.mode_order(m)
    rt = math.sqrt(lam)
    a = min(r, rp) * rt
    b = max(r, rp) * rt
    if _use_scaled(nu, b):
        cross = _mode_cross_product(nu, a, b)
    else:
        pa = bessel_jy(nu, a)
        pb = bessel_jy(nu, b)
        cross = pa.j * complex(pb.j, pb.y)
    return 0.5j * math.pi * cross


def _diagonal_guard(x: PolarPoint, y: PolarPoint) -> None:
    x1, x2 = x.to_cartesian()
    y1, y2 = y.to_cartesian()
    if math.hypot(x1 - y1, x2 - y2) < 1e-8 * (1.0 + x.r):
        raise ConvergenceError(
            "kernel has a logarithmic singularity on the diagonal; x and y coincide"
        )


def free_resolvent_kernel(
    flux: Flux, lam: float, x: PolarPoint, y: PolarPoint, tol: float = 1e-12
) -> complex:
    """R_0(alpha, lambda, x, y), summed over modes with geometric certification."""
    if lam <= 0.0:
        raise DomainError("free resolvent needs lambda > 0")
    _diagonal_guard(x, y)
    if x.r <= 0.0 or y.r <= 0.0:
        raise DomainError("resolvent kernel needs r, r' > 0 (modes vanish at the origin)")
    dtheta = x.theta - y.theta
    ratio = min(x.r / y.r, y.r / x.r)
    total = 0.0j
    m_pos, m_neg = 0, -1
    count = 0
    while True:
        if flux.mode_order(m_pos) <= flux.mode_order(m_neg):
            m = m_pos
            m_pos += 1
        else:
            m = m_neg
            m_neg -= 1
        term = mode_resolvent_kernel(m, flux, lam, x.r, y.r) * cmath.exp(
            1j * m * dtheta
        ) / (2.0 * math.pi)
        total += term
        count += 1
        nu_next = min(flux.mode_order(m_pos), flux.mode_order(m_neg))
        tail = _resolvent_tail_bound(nu_next, ratio)
        if tail <= tol * abs(total):
            return total
        if count > 2 * _MODE_CAP:
            raise ConvergenceError(
                f"mode sum cannot certify tol={tol} within |m| <= {_MODE_CAP}; "
                f"radial ratio {ratio:.4f} is too close to the diagonal"
            )


def _resolvent_tail_bound(nu0: float, ratio: float) -> float:
    """Geometric bound on both discarded tails of the resolvent mode sum.

    For nu well above both scaled arguments the mode term approaches the
    threshold form ratio^nu/(2 pi nu); the scaled-series correction factors
    stay below e^{1/2} * 2 once the scaled regime is reached, absorbed in
    the safety constant.
    """
    if ratio >= 1.0:
        return math.inf
    c_safety = 7.0
    return c_safety * ratio ** nu0 / (2.0 * math.pi * nu0 * (1.0 - ratio))


def threshold_kernel(
    kid: ThresholdKernelId | int, flux: Flux, x: PolarPoint, y: PolarPoint
) -> complex:
    """Threshold kernels: G0 (mode series), G1 and G2 (closed forms)."""
    j = kid.j if isinstance(kid, ThresholdKernelId) else ThresholdKernelId(int(kid)).j
    a = flux.abs_alpha
    if j == 0:
        _diagonal_guard(x, y)
        if x.r <= 0.0 or y.r <= 0.0:
            return 0.0j
        ratio = min(x.r / y.r, y.r / x.r)
        dtheta = x.theta - y.theta
        total = 0.0j
        m_pos, m_neg = 0, -1
        count = 0
        while True:
            if flux.mode_order(m_pos) <= flux.mode_order(m_neg):
                m = m_pos
                m_pos += 1
            else:
                m = m_neg
                m_neg -= 1
            nu = flux.mode_order(m)
            total += ratio ** nu / nu * cmath.exp(1j * m * dtheta) / (4.0 * math.pi)
            count += 1
            nu_next = min(flux.mode_order(m_pos), flux.mode_order(m_neg))
            tail = ratio ** nu_next / (nu_next * (1.0 - ratio)) / (2.0 * math.pi)
            if tail <= 1e-13 * abs(total) or tail < 1e-300:
                return total
            if count > 2 * _G0_MODE_CAP:
                raise ConvergenceError(
                    f"G0 series cannot certify within |m| <= {_G0_MODE_CAP} at ratio {ratio}"
                )
    rr4 = x.r * y.r / 4.0
    if j == 1:
        c = complex(-_cot(math.pi * a), 1.0)
        return c / (4.0 * gamma(1.0 + a) ** 2) * rr4 ** a
    nu2 = abs(a - 1.0)  # |alpha - sign(alpha)| = 1 - |alpha|
    c = complex(-_cot(math.pi * nu2), 1.0)
    phase = cmath.exp(1j * (y.theta - x.theta) * flux.sign)
    return phase * c / (4.0 * gamma(1.0 + nu2) ** 2) * rr4 ** nu2


def _cot(z: float) -> float:
    s = math.sin(z)
    if s == 0.0:
        raise DomainError("cot evaluated at a multiple of pi")
    return math.cos(z) / s


def gcal_kernel(j: int, flux: Flux, x: PolarPoint, y: PolarPoint) -> complex:
    """Limit kernels of the long-time theorems: (1/pi) Im G_j = gcal_j / Gamma(1+|alpha|)."""
    a = flux.abs_alpha
    rr4 = x.r * y.r / 4.0
    if j == 1:
        return rr4 ** a / (4.0 * math.pi * gamma(1.0 + a))
    if j == 2:
        nu2 = 1.0 - a
        phase = cmath.exp(1j * (y.theta - x.theta) * flux.sign)
        return phase * gamma(1.0 + a) / (4.0 * math.pi * gamma(1.0 + nu2) ** 2) * rr4 ** nu2
    raise DomainError("gcal_kernel index must be 1 or 2")


def low_energy_remainder(flux: Flux, lam: float, x: PolarPoint, y: PolarPoint) -> complex:
    """R_0(alpha, lambda) - G0 - G1 lambda^{|alpha|} - G2 lambda^{|alpha-sign alpha|}."""
    if not 0.0 < lam < 1.0:
        raise DomainError("low-energy remainder is defined for lambda in (0, 1)")
    a = flux.abs_alpha
    r0 = free_resolvent_kernel(flux, lam, x, y, tol=1e-13)
    g0 = threshold_kernel(0, flux, x, y)
    g1 = threshold_kernel(1, flux, x, y)
    g2 = threshold_kernel(2, flux, x, y)
    return r0 - g0 - g1 * lam ** a - g2 * lam ** (1.0 - a)


def sigma_for(flux: Flux) -> int:
    """sigma_alpha of the expansion: 1 only at the half-flux boundary."""
    return sigma_alpha(flux)
