"""Special-function layer: Gamma, cylinder pair, modified Bessel I."""

import cmath
import math

import numpy as np
import pytest

from abdisp.errors import DomainError
from abdisp.specfun import (
    BesselPair,
    _asym_edge,
    _hankel_jy,
    _series_j,
    _y_climb,
    bessel_jy,
    bessel_jy_grid,
    gamma,
    mod_bessel_i,
)


class TestGamma:
    def test_classical_values(self):
        assert math.isclose(gamma(0.5), math.sqrt(math.pi), rel_tol=1e-13)
        assert math.isclose(gamma(1.5), 0.5 * math.sqrt(math.pi), rel_tol=1e-13)

    def test_recurrence_ratio(self):
        assert math.isclose(gamma(2.25) / gamma(1.25), 1.25, rel_tol=1e-13)

    def test_recurrence_log_grid(self):
        for x in np.geomspace(0.1, 20.0, 40):
            assert abs(gamma(x + 1.0) - x * gamma(x)) <= 1e-12 * gamma(x + 1.0)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma(0.0)
        with pytest.raises(DomainError):
            gamma(-2.5)


def _pair_with_derivatives(nu, x):
    """(J, Y, J', Y') using the analytic recurrence C' = (nu/x) C - C_{nu+1}."""
    p0 = bessel_jy(nu, x)
    p1 = bessel_jy(nu + 1.0, x)
    jp = nu / x * p0.j - p1.j
    yp = nu / x * p0.y - p1.y
    return p0.j, p0.y, jp, yp


class TestBesselJY:
    def test_half_integer_closed_form(self):
        for x in [0.3, 2.0, 9.0, 27.0, 120.0]:
            amp = math.sqrt(2.0 / (math.pi * x))
            pair = bessel_jy(0.5, x)
            assert abs(pair.j - amp * math.sin(x)) <= 1e-12 * amp
            assert abs(pair.y + amp * math.cos(x)) <= 1e-12 * amp

    def test_small_x_series_oracle(self):
        # direct summation of the ascending series, independent arithmetic
        nu, x = 0.25, 1e-3
        total = 0.0
        for k in range(8):
            total += (-1) ** k * x ** (2 * k) / (4.0 ** k * math.factorial(k) * gamma(nu + k + 1.0))
        ref = (0.5 * x) ** nu * total
        assert abs(bessel_jy(nu, x).j - ref) <= 1e-12 * abs(ref)

    @pytest.mark.parametrize("nu", [0.05, 0.25, 0.5, 0.9, 1.75, 3.3, 7.5, 12.25, 19.95])
    def test_wronskian_grid(self, nu):
        for x in [1e-4, 0.03, 0.7, 3.0, 8.0, 13.0, 15.0, 21.0, 44.0, 160.0, 2.1e3]:
            j, y, jp, yp = _pair_with_derivatives(nu, x)
            w = j * yp - jp * y
            assert abs(w - 2.0 / (math.pi * x)) <= 1e-9 * (2.0 / (math.pi * x))

    def test_contract_accuracy_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        rng = np.random.default_rng(11)
        for _ in range(60):
            nu = float(rng.uniform(0.02, 20.0))
            x = float(np.exp(rng.uniform(np.log(1e-6), np.log(1e4))))
            pair = bessel_jy(nu, x)
            jr, yr = float(mp.besselj(nu, x)), float(mp.bessely(nu, x))
            mod = max(abs(jr), abs(yr))
            assert abs(pair.j - jr) <= 1e-10 * mod
            assert abs(pair.y - yr) <= 1e-10 * mod

    def test_series_asymptotic_crossover(self):
        # both branches valid at the switch radius; they must agree
        for nu in [0.1, 0.25, 0.5, 1.5, 5.3, 12.25, 19.8]:
            x = np.array([_asym_edge(nu)])
            j_ser = _series_j(nu, x)
            j_asy, _ = _hankel_jy(nu, x)
            assert abs(j_ser[0] - j_asy[0]) <= 1e-9 * max(abs(j_asy[0]), 1e-3)
        for nu in [0.25, 0.6, 1.4]:
            x = np.array([14.0])
            y_ser = _y_climb(nu, x)[0]          # reflection-series seeds at x <= 14
            _, y_asy = _hankel_jy(nu, x)
            assert abs(y_ser[0] - y_asy[0]) <= 1e-9 * max(abs(y_asy[0]), 1e-3)

    def test_grid_matches_scalar(self):
        xs = np.array([0.5, 3.0, 17.0, 90.0])
        jg, yg = bessel_jy_grid(1.25, xs)
        for i, x in enumerate(xs):
            pair = bessel_jy(1.25, float(x))
            assert pair.j == jg[i] and pair.y == yg[i]

    def test_returns_pair(self):
        assert isinstance(bessel_jy(0.3, 1.0), BesselPair)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            bessel_jy(-0.5, 1.0)
        with pytest.raises(DomainError):
            bessel_jy(0.5, 0.0)
        with pytest.raises(DomainError):
            bessel_jy(3.0, 1.0)  # integer order hits the reflection guard


class TestModBesselI:
    def test_half_integer_sinh(self):
        for z in [-0.7j, -12.0j, 1.3, 0.2 + 0.1j]:
            ref = cmath.sqrt(2.0 / (cmath.pi * z)) * cmath.sinh(z)
            val = mod_bessel_i(0.5, z)
            assert abs(val - ref) <= 1e-12 * abs(ref)

    def test_zero_argument(self):
        assert mod_bessel_i(0.75, 0.0) == 0.0
        assert mod_bessel_i(0.0, 0.0) == 1.0

    def test_imaginary_axis_vs_integral_representation(self):
        # oracle: adaptive quadrature of the Poisson-type representation,
        # done with scipy.integrate.quad (independent of the rotation path)
        from scipy.integrate import quad

        nu, z = 0.25, 0.3j
        pref = (0.5 * z) ** nu / (gamma(nu + 0.5) * math.sqrt(math.pi))

        def integrand_re(s):
            return ((1.0 - s * s) ** (nu - 0.5) * cmath.exp(z * s)).real

        def integrand_im(s):
            return ((1.0 - s * s) ** (nu - 0.5) * cmath.exp(z * s)).imag

        re, _ = quad(integrand_re, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        im, _ = quad(integrand_im, -1.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        oracle = pref * complex(re, im)
        val = mod_bessel_i(nu, z)
        assert abs(val - oracle) <= 1e-9 * abs(oracle)

    def test_rotation_identity_against_j(self):
        # I_nu(-iw) = e^{-i pi nu/2} J_nu(w) on the propagator ray
        for nu, w in [(0.25, 0.8), (1.75, 7.0), (10.5, 3.0)]:
            val = mod_bessel_i(nu, -1j * w)
            ref = cmath.exp(-0.5j * math.pi * nu) * bessel_jy(nu, w).j
            assert abs(val - ref) <= 1e-12 * max(abs(ref), 1e-300)

    def test_propagator_envelope_bound(self):
        # |I_nu(z) e^{-(r^2+r'^2)/(4it)}| <= |z/2|^nu e^{|z|}/Gamma(nu+1)
        t, r, rp = 2.0, 1.3, 0.7
        z = r * rp / (2j * t)
        for nu in [0.25, 0.75, 2.25]:
            lhs = abs(mod_bessel_i(nu, z) * cmath.exp(-(r * r + rp * rp) / (4j * t)))
            rhs = abs(z / 2.0) ** nu * math.exp(abs(z)) / gamma(nu + 1.0)
            assert lhs <= rhs * (1.0 + 1e-12)

    def test_generic_complex_against_mpmath(self):
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 30
        for nu, z in [(0.3, 1.0 + 2.0j), (1.6, -0.7 + 0.4j), (4.25, 3.0 - 3.0j)]:
            val = mod_bessel_i(nu, z)
            ref = complex(mp.besseli(nu, mp.mpc(z)))
            assert abs(val - ref) <= 1e-9 * abs(ref)

    def test_domain(self):
        with pytest.raises(DomainError):
            mod_bessel_i(-0.25, 1.0)
