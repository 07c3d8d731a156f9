import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from cnls.functionals import (
    DiagnosticsRecord,
    FieldPair,
    PhysParams,
    ScalingError,
    ScalingParams,
    action_I,
    coupling_K,
    diagnostics,
    energy,
    gn_quotient_J,
    mass_pair,
    nehari_residual,
    norms,
    pohozaev_residual,
    scale_pair,
    variance,
    variance_accel,
    variance_rate,
)
from cnls.grid import BoundaryWarning, ConfigurationError, make_grid

SQPI = math.sqrt(math.pi)

grids = st.sampled_from([(1, 128, 16.0), (2, 32, 12.0), (3, 16, 10.0)])
powers = st.sampled_from([0.5, 2.0 / 3.0, 1.0, 2.0])
betas = st.floats(0.0, 5.0)


def bump_pair(grid, seed):
    """Smooth localised random pair: a few Gaussians with random complex weights."""
    r = np.random.default_rng(seed)
    out = []
    for _ in range(2):
        f = np.zeros(grid.shape, complex)
        for _ in range(3):
            c = r.uniform(-1, 1, size=grid.n)
            w = r.uniform(0.7, 1.4)
            d2 = sum((x - x0) ** 2 for x, x0 in zip(grid.coords, c))
            f += (r.normal() + 1j * r.normal()) * np.exp(-d2 / (2 * w * w))
        out.append(f)
    return FieldPair(grid, *out)


class TestPhysParams:
    def test_flags(self):
        assert PhysParams(2, 1.0, 1.0).critical
        assert PhysParams(1, 1.0, 1.0).subcritical
        assert PhysParams(3, 1.0, 1.0).supercritical
        assert not PhysParams(3, 3.0, 1.0).supercritical
        assert PhysParams(2, 5.0, 1.0).supercritical

    def test_critical_tolerance(self):
        assert PhysParams(3, 2.0 / 3.0 + 5e-13, 1.0).critical
        assert not PhysParams(3, 2.0 / 3.0 + 1e-9, 1.0).critical

    @pytest.mark.parametrize(
        "kw", [dict(p=-1.0), dict(beta=-0.1), dict(omega1=0.0), dict(omega2=-1.0), dict(n=4)]
    )
    def test_invalid(self, kw):
        base = dict(n=2, p=1.0, beta=1.0)
        base.update(kw)
        with pytest.raises(ConfigurationError):
            PhysParams(**base)

    def test_with(self):
        P = PhysParams(2, 1.0, 1.0).with_(beta=3.0)
        assert P.beta == 3.0 and P.n == 2


class TestMass:
    def test_zero(self):
        g = make_grid(1, 64, 10.0)
        assert mass_pair(FieldPair.zeros(g)) == (0.0, 0.0)

    def test_gaussian(self):
        g = make_grid(1, 256, 16.0)
        m = mass_pair(FieldPair(g, np.exp(-g.r2 / 2), g.zeros()))
        assert abs(m[0] - SQPI) < 1e-12 and m[1] == 0.0

    @pytest.mark.parametrize("n,N", [(1, 256), (2, 128)])
    @pytest.mark.parametrize("mu,lam", [(2.0, 1.3), (0.5, 0.8)])
    def test_scaling(self, n, N, mu, lam):
        g = make_grid(n, N, 24.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), 0.5 * np.exp(-g.r2))
        t = scale_pair(s, ScalingParams(mu, lam))
        for a, b in zip(mass_pair(s), mass_pair(t)):
            assert math.isclose(b, mu**2 * lam ** (-n) * a, rel_tol=1e-8)


class TestCouplingK:
    def test_single_component(self):
        g = make_grid(1, 128, 16.0)
        P = PhysParams(1, 1.0, 2.0)
        u = np.exp(-g.r2 / 2)
        assert math.isclose(coupling_K(FieldPair(g, u, g.zeros()), P), g.lp_power(u, 4))

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_equal_components(self, p):
        g = make_grid(1, 128, 16.0)
        P = PhysParams(1, p, 0.7)
        u = np.exp(-g.r2 / 2)
        expect = 2 * (1 + 0.7) * g.lp_power(u, 2 * p + 2)
        assert math.isclose(coupling_K(FieldPair(g, u, u), P), expect, rel_tol=1e-13)

    @given(grids, powers, betas, st.integers(0, 10**6))
    def test_swap_symmetry(self, gspec, p, beta, seed):
        g = make_grid(*gspec)
        P = PhysParams(g.n, p, beta)
        s = bump_pair(g, seed)
        assert math.isclose(coupling_K(s, P), coupling_K(s.swapped(), P), rel_tol=1e-12)
        assert coupling_K(s, P) >= 0


class TestEnergy:
    def test_zero(self):
        g = make_grid(2, 16, 8.0)
        assert energy(FieldPair.zeros(g), PhysParams(2, 1.0, 1.0)) == 0.0

    def test_decoupled_single_equation_energy(self):
        g = make_grid(1, 256, 20.0)
        u = 1.3 * np.exp(-g.r2 / 2) * np.exp(0.2j * g.x1d)
        s = FieldPair(g, u, g.zeros())
        single = 0.5 * g.gradient_norm_sq(u) - g.lp_power(u, 4) / 4
        for beta in (0.1, 5.0):
            assert math.isclose(energy(s, PhysParams(1, 1.0, beta)), single, rel_tol=1e-13)

    @given(grids, powers, betas, st.integers(0, 10**6))
    def test_swap_and_primitives(self, gspec, p, beta, seed):
        g = make_grid(*gspec)
        P = PhysParams(g.n, p, beta)
        s = bump_pair(g, seed)
        E = energy(s, P)
        assert math.isclose(E, energy(s.swapped(), P), rel_tol=1e-12, abs_tol=1e-12)
        direct = 0.5 * (g.gradient_norm_sq(s.phi) + g.gradient_norm_sq(s.psi)) - coupling_K(s, P) / (2 * p + 2)
        assert math.isclose(E, direct, rel_tol=1e-12, abs_tol=1e-12)

    @given(grids, powers, st.integers(0, 10**6))
    def test_zero_coupling_is_additive(self, gspec, p, seed):
        g = make_grid(*gspec)
        P = PhysParams(g.n, p, 0.0)
        s = bump_pair(g, seed)
        a = FieldPair(g, s.phi, g.zeros())
        b = FieldPair(g, g.zeros(), s.psi)
        for fn in (energy, coupling_K, action_I):
            assert math.isclose(fn(s, P), fn(a, P) + fn(b, P), rel_tol=1e-12, abs_tol=1e-12)


class TestQuotientJ:
    def test_trivial_pair(self):
        g = make_grid(1, 32, 8.0)
        with pytest.raises(ValueError, match="J undefined on trivial pair"):
            gn_quotient_J(FieldPair.zeros(g), PhysParams(1, 1.0, 1.0))

    def test_beta_drops_out_for_scalar(self):
        g = make_grid(1, 256, 20.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), g.zeros())
        assert math.isclose(gn_quotient_J(s, PhysParams(1, 2.0, 0.1)), gn_quotient_J(s, PhysParams(1, 2.0, 9.0)))

    @pytest.mark.parametrize("n,N,p", [(1, 512, 2.0), (2, 128, 1.0), (1, 512, 1.0)])
    @pytest.mark.parametrize("mu,lam", [(3.0, 1.4), (0.4, 0.7)])
    def test_scaling_invariance(self, n, N, p, mu, lam):
        g = make_grid(n, N, 32.0)
        P = PhysParams(n, p, 0.8)
        s = FieldPair(g, np.exp(-g.r2 / 2), 0.6 * np.exp(-g.r2 / 3) * np.exp(0.5j * g.coords[0]))
        J0 = gn_quotient_J(s, P)
        J1 = gn_quotient_J(scale_pair(s, ScalingParams(mu, lam)), P)
        assert math.isclose(J0, J1, rel_tol=1e-6)


class TestAction:
    def test_zero(self):
        g = make_grid(1, 32, 8.0)
        assert action_I(FieldPair.zeros(g), PhysParams(1, 1.0, 1.0)) == 0.0

    def test_on_nehari_manifold(self):
        from cnls.groundstate import nehari_project

        g = make_grid(2, 64, 16.0)
        P = PhysParams(2, 1.0, 0.6, 1.5, 0.7)
        s = nehari_project(FieldPair(g, np.exp(-g.r2 / 2), 0.5 * np.exp(-g.r2)), P)
        nm = norms(s, P)
        assert math.isclose(action_I(s, P), P.p / (2 * P.p + 2) * nm.A, rel_tol=1e-12)

    @given(powers, betas, st.integers(0, 10**6))
    def test_swap_symmetry_equal_frequencies(self, p, beta, seed):
        g = make_grid(2, 32, 12.0)
        P = PhysParams(2, p, beta)
        s = bump_pair(g, seed)
        assert math.isclose(action_I(s, P), action_I(s.swapped(), P), rel_tol=1e-12, abs_tol=1e-12)
        assert math.isclose(gn_quotient_J(s, P), gn_quotient_J(s.swapped(), P), rel_tol=1e-12)


class TestNehari:
    def test_trivial_pair(self):
        g = make_grid(1, 32, 8.0)
        with pytest.raises(ValueError, match=r"Nehari excludes \(0,0\)"):
            nehari_residual(FieldPair.zeros(g), PhysParams(1, 1.0, 1.0))

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
    def test_small_pairs_are_inside(self, p):
        g = make_grid(1, 128, 16.0)
        P = PhysParams(1, p, 1.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), np.exp(-g.r2 / 2))
        assert nehari_residual(s.scaled(1e-3), P) > 0


class TestPohozaev:
    def test_zero(self):
        g = make_grid(2, 16, 8.0)
        assert pohozaev_residual(FieldPair.zeros(g), PhysParams(2, 1.0, 1.0)) == 0.0

    def test_gaussian_closed_form(self):
        # u = exp(-x^2/2): |u'|^2 -> sqrt(pi)/2, |u|^2 -> sqrt(pi), |u|^4 -> sqrt(pi/2)
        g = make_grid(1, 256, 20.0)
        P = PhysParams(1, 1.0, 1.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), g.zeros())
        expect = -0.5 * (SQPI / 2) + 0.5 * SQPI - 0.25 * math.sqrt(math.pi / 2)
        assert math.isclose(pohozaev_residual(s, P), expect, rel_tol=1e-12)
        assert abs(expect) > 0.1


class TestVariance:
    def test_zero(self):
        g = make_grid(1, 32, 8.0)
        assert variance(FieldPair.zeros(g)) == 0.0

    def test_gaussian_second_moment(self):
        g = make_grid(1, 256, 20.0)
        assert abs(variance(FieldPair(g, np.exp(-g.r2 / 2), g.zeros())) - SQPI / 2) < 1e-10

    @given(grids, st.integers(0, 10**6))
    def test_swap_symmetry(self, gspec, seed):
        g = make_grid(*gspec)
        s = bump_pair(g, seed)
        assert math.isclose(variance(s), variance(s.swapped()), rel_tol=1e-12)

    def test_boundary_warning(self):
        g = make_grid(1, 64, 6.0)
        s = FieldPair(g, np.exp(-g.r2 / 8), g.zeros())
        with pytest.warns(BoundaryWarning, match="variance untrusted near boundary"):
            variance(s)


class TestVarianceRate:
    @given(grids, st.integers(0, 10**6))
    def test_real_pairs_have_no_current(self, gspec, seed):
        g = make_grid(*gspec)
        s = bump_pair(g, seed)
        real = FieldPair(g, s.phi.real, s.psi.real)
        assert abs(variance_rate(real)) < 1e-11 * max(1.0, variance(real))

    @pytest.mark.parametrize("c", [0.3, -0.7, 1.5])
    def test_chirped_gaussian(self, c):
        # Im (x phi') conj(phi) = -c x^2 exp(-x^2), so V' = -4c sqrt(pi)/2.
        g = make_grid(1, 512, 24.0)
        s = FieldPair(g, np.exp(-(1 + 1j * c) * g.r2 / 2), g.zeros())
        assert math.isclose(variance_rate(s), -2 * c * SQPI, rel_tol=1e-10)


class TestVarianceAccel:
    def test_zero(self):
        g = make_grid(1, 32, 8.0)
        assert variance_accel(FieldPair.zeros(g), PhysParams(1, 1.0, 1.0)) == 0.0

    @given(grids, powers, betas, st.integers(0, 10**6))
    def test_two_forms_agree(self, gspec, p, beta, seed):
        # variance_accel raises if its two internal forms disagree
        g = make_grid(*gspec)
        P = PhysParams(g.n, p, beta)
        s = bump_pair(g, seed)
        nm = norms(s, P)
        direct = 8 * nm.grad - 4 * g.n * p / (p + 1) * nm.K
        assert math.isclose(variance_accel(s, P), direct, rel_tol=1e-12, abs_tol=1e-12)

    @given(st.sampled_from([(1, 128, 16.0), (2, 32, 12.0), (3, 16, 10.0)]), betas, st.integers(0, 10**6))
    def test_critical_power_is_sixteen_energy(self, gspec, beta, seed):
        g = make_grid(*gspec)
        P = PhysParams(g.n, 2.0 / g.n, beta)
        s = bump_pair(g, seed)
        assert math.isclose(variance_accel(s, P), 16 * energy(s, P), rel_tol=1e-10, abs_tol=1e-10)


class TestScalePair:
    def test_identity(self):
        g = make_grid(1, 64, 16.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), g.zeros())
        t = scale_pair(s, ScalingParams(1.0, 1.0))
        assert_allclose(t.phi, s.phi)

    def test_norm_scalings(self):
        g = make_grid(2, 128, 24.0)
        P = PhysParams(2, 1.0, 1.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), 0.3 * np.exp(-g.r2 / 4))
        mu, lam = 1.7, 1.25
        a, b = norms(s, P), norms(scale_pair(s, ScalingParams(mu, lam)), P)
        assert math.isclose(b.grad, mu**2 * lam ** (2 - 2) * a.grad, rel_tol=1e-8)
        assert math.isclose(b.nl_u, mu**4 * lam ** (-2) * a.nl_u, rel_tol=1e-8)

    def test_under_resolved(self):
        g = make_grid(1, 64, 16.0)
        s = FieldPair(g, np.exp(-g.r2 / 2), g.zeros())
        with pytest.raises(ScalingError, match="scaling under-resolved"):
            scale_pair(s, ScalingParams(1.0, 5.0))

    def test_invalid_factors(self):
        with pytest.raises(ConfigurationError):
            ScalingParams(0.0, 1.0)
        with pytest.raises(ConfigurationError):
            ScalingParams(1.0, -2.0)


class TestDiagnostics:
    def test_column_order(self):
        assert DiagnosticsRecord.columns() == [
            "t",
            "mass_phi",
            "mass_psi",
            "grad_phi_sq",
            "grad_psi_sq",
            "energy",
            "coupling_K",
            "variance",
            "variance_rate",
            "variance_accel",
            "tail_fraction",
        ]

    def test_record_matches_functionals(self):
        g = make_grid(2, 64, 16.0)
        P = PhysParams(2, 1.0, 0.5)
        s = FieldPair(g, np.exp(-g.r2 / 2), 0.5 * np.exp(-g.r2 / 2) * np.exp(0.4j * g.r2))
        rec = diagnostics(s, P, 0.25)
        assert rec.t == 0.25
        assert math.isclose(rec.energy, energy(s, P))
        assert math.isclose(rec.variance_rate, variance_rate(s))
        assert rec.mass == pytest.approx(sum(mass_pair(s)))
        assert len(rec.as_row()) == 11
        assert all(np.isfinite(rec.as_row()))
