"""Flux reduction, geometry, weights, mode projection, potentials."""

import math

import numpy as np
import pytest

from abdisp.errors import DomainError, ResolutionError
from abdisp.field import (
    PolarPoint,
    PotentialSpec,
    project_mode,
    reduce_flux,
    sigma_alpha,
    theta_grid,
    vector_potential,
    weight,
)


class TestFlux:
    @pytest.mark.parametrize(
        "raw,alpha", [(1.25, 0.25), (0.7, -0.3), (-0.5, 0.5), (0.5, 0.5), (-3.9, 0.1)]
    )
    def test_reduction(self, raw, alpha):
        fl = reduce_flux(raw)
        assert math.isclose(fl.alpha, alpha, abs_tol=1e-14)
        assert fl.sign == (1 if alpha > 0 else -1)
        assert fl.raw == raw

    def test_idempotent(self):
        for raw in [0.7, -2.3, 5.5, 0.01]:
            fl = reduce_flux(raw)
            assert reduce_flux(fl.alpha).alpha == fl.alpha

    def test_minimal_distance_to_integers(self):
        rng = np.random.default_rng(5)
        for raw in rng.uniform(-6, 6, 50):
            if abs(raw - round(raw)) < 1e-6:
                continue
            fl = reduce_flux(float(raw))
            dist = min(abs(k - fl.alpha) for k in range(-8, 9))
            assert math.isclose(dist, abs(fl.alpha), abs_tol=1e-14)

    def test_integer_rejected(self):
        for raw in [0.0, 1.0, -4.0, 2.0 + 1e-13]:
            with pytest.raises(DomainError):
                reduce_flux(raw)

    def test_mode_orders(self):
        fl = reduce_flux(0.25)
        assert fl.mode_order(0) == 0.25
        assert fl.mode_order(-1) == 0.75
        assert fl.mode_order(2) == 2.25

    def test_sigma_alpha(self):
        assert sigma_alpha(reduce_flux(0.5)) == 1
        assert sigma_alpha(reduce_flux(-0.5)) == 1
        assert sigma_alpha(reduce_flux(0.25)) == 0


class TestVectorPotential:
    def test_direct_substitution(self):
        fl = reduce_flux(0.5)
        assert vector_potential((1.0, 0.0), fl) == (0.0, 0.5)
        ax, ay = vector_potential((0.0, 2.0), fl)
        assert math.isclose(ax, -0.25, abs_tol=1e-15) and ay == 0.0

    def test_loop_circulation(self):
        # oracle: trapezoid quadrature of A . dl on circles of several radii
        fl = reduce_flux(0.3)
        n = 4096
        th = theta_grid(n)
        for radius in [0.1, 1.0, 7.5]:
            xs = radius * np.cos(th)
            ys = radius * np.sin(th)
            circ = 0.0
            for x, y, t in zip(xs, ys, th):
                ax, ay = vector_potential((x, y), fl)
                # dl = R(-sin, cos) dtheta
                circ += (-ax * math.sin(t) + ay * math.cos(t)) * radius
            circ *= 2.0 * math.pi / n
            assert abs(circ - 2.0 * math.pi * fl.alpha) <= 1e-10

    def test_origin_rejected(self):
        with pytest.raises(DomainError):
            vector_potential((0.0, 0.0), reduce_flux(0.25))


class TestWeights:
    def test_poly(self):
        assert math.isclose(weight("poly", math.sqrt(3.0), s=2.0), 4.0, rel_tol=1e-15)

    def test_rho_half(self):
        assert math.isclose(weight("rho_half", 1.0), math.exp(0.5), rel_tol=1e-15)

    def test_reciprocal_pair(self):
        for r in [0.0, 0.7, 2.4, 4.0]:
            assert math.isclose(weight("rho_half", r) * weight("rho_inv_half", r), 1.0, rel_tol=1e-14)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            weight("rho_half", 7.0)

    def test_accepts_polar_point(self):
        assert weight("poly", PolarPoint(2.0, 0.3), s=-1.0) == (1.0 + 4.0) ** -0.5


class TestPolarPoint:
    def test_wraps_theta(self):
        p = PolarPoint(1.0, 2.0 * math.pi + 0.3)
        assert math.isclose(p.theta, 0.3, abs_tol=1e-12)

    def test_cartesian_roundtrip(self):
        p = PolarPoint.from_cartesian(-1.0, 1.0)
        x, y = p.to_cartesian()
        assert math.isclose(x, -1.0, abs_tol=1e-14) and math.isclose(y, 1.0, abs_tol=1e-14)

    def test_negative_radius(self):
        with pytest.raises(DomainError):
            PolarPoint(-0.1, 0.0)


class TestProjectMode:
    def test_single_mode_orthogonality(self):
        r = np.linspace(0.1, 2.0, 5)
        th = theta_grid(32)
        g = np.sin(r) + 1.0
        u = g[:, None] * np.exp(2j * th)[None, :]
        f2 = project_mode(u, 2)
        f0 = project_mode(u, 0)
        assert np.allclose(f2, g, atol=1e-13)
        assert np.allclose(f0, 0.0, atol=1e-13)

    def test_constant(self):
        u = np.ones((4, 16))
        assert np.allclose(project_mode(u, 0), 1.0, atol=1e-14)
        assert np.allclose(project_mode(u, 3), 0.0, atol=1e-14)

    def test_reconstruction_of_trig_polynomial(self):
        # oracle: direct resummation sum_m f_m(r) e^{im theta}
        rng = np.random.default_rng(17)
        r = np.linspace(0.2, 1.5, 4)
        th = theta_grid(64)
        coeffs = {m: rng.normal(size=r.size) + 1j * rng.normal(size=r.size) for m in range(-5, 6)}
        u = sum(c[:, None] * np.exp(1j * m * th)[None, :] for m, c in coeffs.items())
        recon = np.zeros_like(u)
        for m in range(-5, 6):
            fm = project_mode(u, m)
            assert np.allclose(fm, coeffs[m], atol=1e-12)
            recon += fm[:, None] * np.exp(1j * m * th)[None, :]
        assert np.max(np.abs(recon - u)) <= 1e-12

    def test_idempotent_on_band_limited(self):
        r = np.linspace(0.1, 1.0, 3)
        th = theta_grid(32)
        u = (r ** 2)[:, None] * np.exp(-3j * th)[None, :]
        fm = project_mode(u, -3)
        again = project_mode(fm[:, None] * np.exp(-3j * th)[None, :], -3)
        assert np.allclose(fm, again, atol=1e-13)

    def test_nyquist_guard(self):
        u = np.ones((3, 8))
        with pytest.raises(ResolutionError):
            project_mode(u, 2)  # needs >= 12 samples


class TestPotentialSpec:
    def test_constant_well_exact(self):
        v = PotentialSpec.constant_well(-1.0, 1.0)
        r = np.array([0.0, 0.31, 0.9999, 1.0, 1.0001, 2.5])
        vals = v(r)
        assert np.all(vals[:4] == -1.0)
        assert np.all(vals[4:] == 0.0)

    def test_zero_beyond_support_and_bound(self):
        v = PotentialSpec(
            support_radius=1.5,
            bound=2.0,
            r_values=np.array([0.0, 0.5, 1.5]),
            v_values=np.array([2.0, -1.0, 0.0]),
        )
        assert v(3.0) == 0.0
        assert np.max(np.abs(v.v_values)) <= v.bound

    def test_bound_violation(self):
        with pytest.raises(DomainError):
            PotentialSpec(
                support_radius=1.0,
                bound=0.5,
                r_values=np.array([0.0, 1.0]),
                v_values=np.array([0.0, -1.0]),
            )

    def test_non_increasing_radii(self):
        with pytest.raises(DomainError):
            PotentialSpec(
                support_radius=1.0,
                bound=1.0,
                r_values=np.array([0.0, 0.5, 0.5]),
                v_values=np.array([1.0, 1.0, 1.0]),
            )

    def test_file_roundtrip(self, tmp_path):
        v = PotentialSpec.constant_well(0.5, 0.8)
        path = tmp_path / "well.tbl"
        v.save(path)
        w = PotentialSpec.from_file(path)
        assert w.support_radius == v.support_radius
        assert w.bound == v.bound
        assert np.array_equal(w.r_values, v.r_values)
        assert np.array_equal(w.v_values, v.v_values)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.tbl"
        path.write_text("0.0 1.0\n1.0 1.0\n")
        with pytest.raises(DomainError):
            PotentialSpec.from_file(path)

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "bad2.tbl"
        path.write_text("# support_radius=1.0 bound=1.0\n0.0\n")
        with pytest.raises(DomainError):
            PotentialSpec.from_file(path)
