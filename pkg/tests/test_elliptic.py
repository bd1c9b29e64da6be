import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invmeasure.elliptic import (
    EllipticContext,
    carlson_rf,
    complete_k,
    cubic_roots,
    discriminant,
    jacobi_sn,
    jacobi_sn_inv,
    jacobi_sncndn,
    weierstrass_p,
    weierstrass_p_inv,
    weierstrass_p_prime,
)
from invmeasure.errors import DomainError, PoleError

# 30-digit quadrature of the defining integrals (mpmath), frozen
RF_011 = 1.5707963267948966
RF_012 = 1.3110287771460599
RF_123 = 0.72694593546890819
K_05 = 1.8540746773013719
K_025 = 1.6857503548125960
OMEGA1 = {(4, 0): 1.3110287771460599, (5, 1): 1.1781283165684028, (8, 2): 1.0480538751075850}
P_HALF_40 = 4.0502087347120609  # root of P^-1(u) = 0.5, P^-1 by quadrature
SN_03_05 = 0.29341273316845538
SNCNDN_25_09 = (0.99969453845058613, 0.024714971010898663, 0.31709580068626356)

CONTEXTS = [(4, 0), (5, 1), (8, 2)]


class TestCarlson:
    def test_equal_arguments(self):
        assert carlson_rf(1, 1, 1) == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize(
        "args, expected", [((0, 1, 1), RF_011), ((0, 1, 2), RF_012), ((1, 2, 3), RF_123)]
    )
    def test_against_quadrature(self, args, expected):
        assert carlson_rf(*args) == pytest.approx(expected, rel=1e-12)

    def test_permutation_symmetry(self):
        args = (0.3, 2.5, 7.0)
        vals = [carlson_rf(*p) for p in itertools.permutations(args)]
        assert max(vals) - min(vals) < 1e-13

    @given(
        st.floats(0.0, 50.0),
        st.floats(1e-3, 50.0),
        st.floats(1e-3, 50.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_mpmath(self, x, y, z):
        ref = float(mpmath.elliprf(x, y, z))
        assert carlson_rf(x, y, z) == pytest.approx(ref, rel=1e-12)

    def test_homogeneity(self):
        # R_F(s x, s y, s z) = R_F(x, y, z) / sqrt(s)
        assert carlson_rf(4, 8, 12) == pytest.approx(carlson_rf(1, 2, 3) / 2.0, rel=1e-14)

    @pytest.mark.parametrize("args", [(0, 0, 1), (-1, 1, 1), (0, 0, 0)])
    def test_domain_errors(self, args):
        with pytest.raises(DomainError):
            carlson_rf(*args)

    def test_vectorized(self):
        out = carlson_rf(np.array([0.0, 1.0]), 1.0, np.array([1.0, 1.0]))
        assert out == pytest.approx([RF_011, 1.0], rel=1e-13)


class TestCompleteK:
    def test_zero(self):
        assert complete_k(0.0) == pytest.approx(math.pi / 2, rel=1e-15)

    @pytest.mark.parametrize("m, expected", [(0.5, K_05), (0.25, K_025)])
    def test_against_quadrature(self, m, expected):
        assert complete_k(m) == pytest.approx(expected, rel=1e-14)

    def test_monotone(self):
        assert complete_k(0.9) > complete_k(0.5) > complete_k(0.0)

    def test_rf_route(self):
        assert complete_k(0.7) == pytest.approx(carlson_rf(0.0, 0.3, 1.0), rel=1e-13)

    @pytest.mark.parametrize("m", [1.0, 1.5, -0.1])
    def test_domain(self, m):
        with pytest.raises(DomainError):
            complete_k(m)


class TestJacobi:
    def test_zero(self):
        assert jacobi_sn(0.0, 0.5) == 0.0

    def test_circular_limit(self):
        assert jacobi_sn(0.7, 0.0) == pytest.approx(0.644217687237691, abs=1e-12)

    def test_quarter_period(self):
        assert jacobi_sn(complete_k(0.5), 0.5) == pytest.approx(1.0, abs=1e-12)

    def test_mpmath_values(self):
        assert jacobi_sn(0.3, 0.5) == pytest.approx(SN_03_05, abs=1e-12)
        sn, cn, dn = jacobi_sncndn(2.5, 0.9)
        assert (sn, cn, dn) == pytest.approx(SNCNDN_25_09, abs=1e-12)

    def test_odd_and_periodic(self):
        m = 0.6
        u = np.linspace(-3, 3, 41)
        assert np.allclose(jacobi_sn(-u, m), -jacobi_sn(u, m), atol=1e-15)
        assert np.allclose(jacobi_sn(u + 4 * complete_k(m), m), jacobi_sn(u, m), atol=1e-12)

    def test_pythagorean_identities(self):
        rng = np.random.default_rng(7)
        u = rng.uniform(-20, 20, 1000)
        m = rng.uniform(0, 0.99, 1000)
        for ui, mi in zip(u, m):
            sn, cn, dn = jacobi_sncndn(ui, mi)
            assert abs(sn * sn + cn * cn - 1) < 1e-12
            assert abs(dn * dn + mi * sn * sn - 1) < 1e-12

    def test_inverse(self):
        m = 0.5
        u = np.linspace(0.01, complete_k(m) - 0.01, 50)
        assert np.allclose(jacobi_sn_inv(jacobi_sn(u, m), m), u, atol=1e-12)

    def test_bad_parameter(self):
        with pytest.raises(DomainError):
            jacobi_sn(0.2, 1.0)


class TestCubic:
    def test_discriminant(self):
        assert discriminant(4, 0) == 64
        assert discriminant(0, 1) == -27
        assert discriminant(3, 1) == 0

    def test_lemniscatic_roots(self):
        assert cubic_roots(4, 0) == pytest.approx((1.0, 0.0, -1.0), abs=1e-15)

    def test_factorable_roots(self):
        s = math.sqrt(3) / 2
        assert cubic_roots(3, 0) == pytest.approx((s, 0.0, -s), abs=1e-15)

    @pytest.mark.parametrize("g2, g3", CONTEXTS)
    def test_residuals(self, g2, g3):
        roots = cubic_roots(g2, g3)
        assert list(roots) == sorted(roots, reverse=True)
        assert abs(sum(roots)) < 1e-12
        for e in roots:
            assert abs(4 * e**3 - g2 * e - g3) < 1e-12
        ref = sorted(float(mpmath.re(z)) for z in mpmath.polyroots([4, 0, -g2, -g3]))[::-1]
        assert roots == pytest.approx(ref, abs=1e-13)

    @pytest.mark.parametrize("g2, g3", [(0, 1), (3, 1), (-1, 0)])
    def test_nonpositive_discriminant(self, g2, g3):
        with pytest.raises(DomainError):
            cubic_roots(g2, g3)


class TestContext:
    @pytest.mark.parametrize("g2, g3", CONTEXTS)
    def test_half_period(self, g2, g3):
        ctx = EllipticContext(g2, g3)
        assert ctx.disc > 0
        assert 0 <= ctx.m < 1
        assert ctx.omega1 == pytest.approx(OMEGA1[(g2, g3)], rel=1e-13)
        # AGM route against the R_F route
        assert abs(ctx.omega1 - weierstrass_p_inv(ctx.e1, ctx)) < 1e-10

    def test_rejects_bad_lattice(self):
        with pytest.raises(DomainError):
            EllipticContext(0, 1)

    def test_immutable(self):
        ctx = EllipticContext(4, 0)
        with pytest.raises(AttributeError):
            ctx.g2 = 5


class TestWeierstrass:
    ctx = EllipticContext(4, 0)

    def test_half_period_value(self):
        assert weierstrass_p(self.ctx.omega1, self.ctx) == pytest.approx(1.0, abs=1e-12)

    def test_value_at_half(self):
        assert weierstrass_p(0.5, self.ctx) == pytest.approx(P_HALF_40, abs=1e-10)

    def test_laurent_series(self):
        # P(z) = 1/z^2 + g2 z^2/20 + g2^2 z^6/1200 + ... for g3 = 0
        z = 0.05
        series = 1 / z**2 + 4 * z**2 / 20 + 16 * z**6 / 1200
        assert weierstrass_p(z, self.ctx) == pytest.approx(series, rel=1e-13)

    def test_even_about_half_period(self):
        w = self.ctx.omega1
        assert weierstrass_p(2 * w - 0.5, self.ctx) == pytest.approx(weierstrass_p(0.5, self.ctx), rel=1e-12)

    def test_periodic_and_even(self):
        w = self.ctx.omega1
        x = np.linspace(0.1, 1.9 * w, 17)
        assert np.allclose(weierstrass_p(x + 2 * w, self.ctx), weierstrass_p(x, self.ctx), rtol=1e-11)
        assert np.allclose(weierstrass_p(-x, self.ctx), weierstrass_p(x, self.ctx), rtol=1e-12)

    def test_derivative_sign_and_identity(self):
        ctx = self.ctx
        assert weierstrass_p_prime(ctx.omega1, ctx) == pytest.approx(0.0, abs=1e-12)
        p = weierstrass_p(0.5, ctx)
        dp = weierstrass_p_prime(0.5, ctx)
        assert dp < 0
        assert abs(dp * dp - (4 * p**3 - 4 * p)) < 1e-8
        assert weierstrass_p_prime(1.5 * ctx.omega1, ctx) > 0

    def test_derivative_finite_difference(self):
        d = 1e-5
        fd = (weierstrass_p(0.6 + d, self.ctx) - weierstrass_p(0.6 - d, self.ctx)) / (2 * d)
        assert weierstrass_p_prime(0.6, self.ctx) == pytest.approx(fd, rel=1e-5)

    def test_pole_guard(self):
        with pytest.raises(PoleError):
            weierstrass_p(0.0, self.ctx)
        with pytest.raises(PoleError):
            weierstrass_p(2 * self.ctx.omega1 + 1e-12, self.ctx)

    def test_inverse_examples(self):
        ctx = self.ctx
        assert weierstrass_p_inv(1.0, ctx) == pytest.approx(OMEGA1[(4, 0)], abs=1e-12)
        assert weierstrass_p_inv(P_HALF_40, ctx) == pytest.approx(0.5, abs=1e-10)
        assert weierstrass_p_inv(1e6, ctx) < 2e-3
        u = np.array([1e3, 1e4, 1e5, 1e6])
        assert np.all(np.diff(weierstrass_p_inv(u, ctx)) < 0)
        with pytest.raises(DomainError):
            weierstrass_p_inv(0.5, ctx)

    @pytest.mark.parametrize("g2, g3", CONTEXTS)
    def test_round_trips(self, g2, g3):
        ctx = EllipticContext(g2, g3)
        x = np.linspace(0.2, 0.8, 61) * ctx.omega1
        assert np.max(np.abs(weierstrass_p_inv(weierstrass_p(x, ctx), ctx) - x)) < 1e-10
        u = ctx.e1 + np.geomspace(1e-6, 1e3, 61)
        assert np.max(np.abs(weierstrass_p(weierstrass_p_inv(u, ctx), ctx) - u) / np.maximum(1, u)) < 1e-10

    @pytest.mark.parametrize("g2, g3", CONTEXTS)
    def test_duplication_formula(self, g2, g3):
        ctx = EllipticContext(g2, g3)
        rng = np.random.default_rng(g2 * 10 + g3)
        x = rng.uniform(0.05, 0.45, 100) * ctx.omega1
        p = weierstrass_p(x, ctx)
        dp = weierstrass_p_prime(x, ctx)
        ddp = 6 * p**2 - g2 / 2
        rhs = -2 * p + (ddp / (2 * dp)) ** 2
        lhs = weierstrass_p(2 * x, ctx)
        assert np.max(np.abs(lhs - rhs) / np.maximum(1, np.abs(lhs))) < 1e-8

    def test_inverse_against_mpmath_quadrature(self):
        # P^-1 at an interior point, straight from the defining integral
        ctx = EllipticContext(5, 1)
        with mpmath.workdps(30):
            ref = mpmath.quad(lambda s: 1 / mpmath.sqrt(4 * s**3 - 5 * s - 1), [3, 10, mpmath.inf])
        assert weierstrass_p_inv(3.0, ctx) == pytest.approx(float(ref), rel=1e-12)
