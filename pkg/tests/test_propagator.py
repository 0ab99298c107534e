"""Exact propagator kernel, its limits, and the pointwise bound envelope."""

import cmath
import math

import numpy as np
import pytest

from abdisp.errors import ConvergenceError, DomainError
from abdisp.field import PolarPoint, reduce_flux
from abdisp.propagator import (
    complex_it_power,
    mode_propagator_kernel,
    pointwise_bound_envelope,
    propagator_kernel,
    propagator_leading_term,
)
from abdisp.specfun import gamma


class TestModeKernel:
    def test_vanishes_at_origin(self):
        fl = reduce_flux(0.25)
        for m in (-2, 0, 3):
            assert mode_propagator_kernel(m, fl, 1.5, 0.0, 1.0) == 0.0
            assert mode_propagator_kernel(m, fl, 1.5, 1.0, 0.0) == 0.0

    def test_half_integer_closed_form(self):
        # alpha = 1/2, m = 0: I_{1/2}(z) = sqrt(2/(pi z)) sinh z
        fl = reduce_flux(0.5)
        t, r, rp = 2.0, 1.0, 1.0
        z = r * rp / (2j * t)
        ref = cmath.sqrt(2.0 / (cmath.pi * z)) * cmath.sinh(z)
        ref *= cmath.exp(-(r * r + rp * rp) / (4j * t)) / (2j * t)
        got = mode_propagator_kernel(0, fl, t, r, rp)
        assert abs(got - ref) <= 1e-13 * abs(ref)

    def test_time_domain(self):
        with pytest.raises(DomainError):
            mode_propagator_kernel(0, reduce_flux(0.25), 0.0, 1.0, 1.0)

    def test_small_hankel_oracle(self):
        # spot version of the acceptance criterion: evolve a narrow radial
        # bump through the spectral transform W_m^{-1} e^{-itp} W_m and
        # compare with the closed-form kernel
        from abdisp.specfun import bessel_j_grid

        fl = reduce_flux(0.3)
        m, t = 1, 1.5
        nu = fl.mode_order(m)
        r0, half = 1.2, 0.4

        def bump(r):
            u = (r - r0) / half
            return np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 8, 0.0)

        # quadrature nodes for the bump support
        from scipy.special import roots_legendre

        xg, wg = roots_legendre(60)
        rs = r0 + half * xg
        ws = half * wg
        f = bump(rs)

        # oracle: o(r) = 1/2 int_0^inf e^{-itp} sqrt(r) J(r sqrt p) Phi(p) dp,
        # p = k^2, with Phi(p) = int f(r') sqrt(r') J(r' sqrt p) dr'
        kmax = 24.0
        edges = [0.0]
        while edges[-1] < kmax:
            k = edges[-1]
            edges.append(min(k + max(math.pi / (2.0 * t * max(k, 1.0)), 1e-3), kmax))
        xq, wq = roots_legendre(10)
        edges = np.asarray(edges)
        c = 0.5 * (edges[:-1] + edges[1:])
        h = 0.5 * np.diff(edges)
        kn = (c[:, None] + h[:, None] * xq[None, :]).ravel()
        kw = (h[:, None] * wq[None, :]).ravel()
        # W_m acts on the halfline representative g = sqrt(r) f, so the
        # forward kernel carries a full factor r' against f
        big = bessel_j_grid(nu, (rs[:, None] * kn[None, :]).ravel()).reshape(rs.size, kn.size)
        phi = (ws * rs * f) @ big
        for r_out in (0.6, 1.1, 1.9):
            jr = bessel_j_grid(nu, r_out * kn)
            oracle = 0.5 * np.sum(
                kw * 2.0 * kn * np.exp(-1j * t * kn ** 2) * math.sqrt(r_out) * jr * phi
            )
            # radial measure form: (e^{-it h_m} f)(r) = int K(r, r') f(r') r' dr'
            direct = sum(
                w * mode_propagator_kernel(m, fl, t, r_out, float(rp)) * fv * rp
                for w, rp, fv in zip(ws, rs, f)
            )
            # oracle carries the sqrt(r) halfline convention; undo it
            oracle = oracle / math.sqrt(r_out)
            assert abs(oracle - direct) <= 2e-6 * max(abs(direct), 1e-6)


class TestFullKernel:
    def test_origin(self):
        fl = reduce_flux(0.25)
        kv = propagator_kernel(fl, 2.0, PolarPoint(0.0, 0.0), PolarPoint(1.0, 0.5))
        assert kv.value == 0.0

    def test_diamagnetic_sup_bound(self):
        # |K| <= C0 / t across a sample grid with a single constant
        fl = reduce_flux(0.25)
        worst = 0.0
        for t in np.geomspace(0.5, 1e3, 8):
            for r in (0.3, 1.0, 2.5):
                kv = propagator_kernel(fl, float(t), PolarPoint(r, 0.7), PolarPoint(1.1, 0.0), 1e-9)
                worst = max(worst, abs(kv.value) * t)
        assert worst < 0.1  # 1/(4 pi) = 0.0796 is the natural scale

    def test_tail_certificate(self):
        fl = reduce_flux(0.25)
        kv = propagator_kernel(fl, 3.0, PolarPoint(1.0, 0.2), PolarPoint(0.8, 1.1), 1e-10)
        assert kv.tail_bound <= 1e-10 * abs(kv.value) + 1e-250
        assert kv.truncation_m >= 1

    def test_leading_ratio_converges(self):
        fl = reduce_flux(0.25)
        x, y = PolarPoint(1.0, 0.0), PolarPoint(1.0, 0.0)
        prev = None
        for t in (1e2, 1e3, 1e4):
            kv = propagator_kernel(fl, t, x, y, 1e-12)
            ratio = kv.value / propagator_leading_term(fl, t, x, y)
            err = abs(ratio - 1.0)
            assert err <= 3.0 * t ** (-0.5)
            if prev is not None:
                assert err < prev
            prev = err

    def test_conjugation_symmetries(self):
        fl_pos = reduce_flux(0.25)
        fl_neg = reduce_flux(-0.25)
        t = 4.0
        x, y = PolarPoint(1.2, 0.9), PolarPoint(0.7, 2.2)
        k_xy = propagator_kernel(fl_pos, t, x, y, 1e-12).value
        k_yx = propagator_kernel(fl_pos, t, y, x, 1e-12).value
        k_neg = propagator_kernel(fl_neg, t, x, y, 1e-12).value
        # swapping the points relabels m -> -m, which is the flux sign flip
        assert abs(k_yx - k_neg) <= 1e-12 * abs(k_xy)
        # combined with conjugation the roles of the angles invert
        k_conj = propagator_kernel(fl_pos, t, PolarPoint(x.r, y.theta), PolarPoint(y.r, x.theta), 1e-12).value
        assert abs(k_conj - k_neg) <= 1e-12 * abs(k_xy)

    def test_convergence_error_outside_dispersive_window(self):
        fl = reduce_flux(0.25)
        with pytest.raises(ConvergenceError):
            propagator_kernel(fl, 0.5, PolarPoint(30.0, 0.0), PolarPoint(30.0, 0.0), 1e-10)


class TestLeadingTerm:
    def test_half_flux_phase_null(self):
        fl = reduce_flux(0.5)
        val = propagator_leading_term(fl, 7.0, PolarPoint(1.0, math.pi), PolarPoint(1.0, 0.0))
        assert abs(val) <= 1e-16

    def test_magnitude_arithmetic(self):
        # alpha=0.25, r=r'=2, t=1: |(i)^{-1.25}| / (4 pi Gamma(1.25)) with
        # (rr'/4)^0.25 = 1; the high-precision value is 0.0877946...
        fl = reduce_flux(0.25)
        val = propagator_leading_term(fl, 1.0, PolarPoint(2.0, 0.3), PolarPoint(2.0, 0.9))
        ref = 1.0 / (4.0 * math.pi * gamma(1.25))
        assert math.isclose(abs(val), ref, rel_tol=1e-12)
        assert math.isclose(abs(val), 0.0877946, rel_tol=1e-6)

    def test_principal_branch(self):
        assert cmath.isclose(
            complex_it_power(2.0, 1.5),
            cmath.exp(-1.5 * (math.log(2.0) + 0.5j * math.pi)),
            rel_tol=1e-15,
        )


class TestEnvelope:
    def test_branch_continuity(self):
        # rr' = t makes both branches equal
        fl = reduce_flux(0.3)
        t = 2.0
        x, y = PolarPoint(2.0, 0.0), PolarPoint(1.0, 0.0)
        env = pointwise_bound_envelope(fl, t, x, y)
        assert math.isclose(env, 1.0 / t, rel_tol=1e-14)

    def test_zero_radius(self):
        fl = reduce_flux(0.3)
        assert pointwise_bound_envelope(fl, 2.0, PolarPoint(0.0, 0.0), PolarPoint(1.0, 0.0)) == 0.0

    def test_sup_constant_recorded(self):
        # sup |K| / envelope stays a small finite constant on a sample grid
        fl = reduce_flux(0.25)
        sup = 0.0
        for t in np.geomspace(1.0, 1e3, 6):
            for rr in np.geomspace(0.1, 10.0, 6):
                r = math.sqrt(rr)
                kv = propagator_kernel(fl, float(t), PolarPoint(r, 0.0), PolarPoint(r, 1.0), 1e-8)
                env = pointwise_bound_envelope(fl, float(t), PolarPoint(r, 0.0), PolarPoint(r, 1.0))
                sup = max(sup, abs(kv.value) / env)
        assert sup <= 10.0
