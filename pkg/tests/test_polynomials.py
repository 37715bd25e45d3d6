"""Unit tests for the polynomial layer: exact moments, generalized families,
quadrature, and root finding."""
import math

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg
from scipy.integrate import quad

from ifvm1d.polynomials import (
    Poly,
    PiecewisePoly,
    RefInterface,
    gauss_rule,
    gen_legendre,
    gen_lobatto,
    integrate_split,
    legendre,
    lobatto_std,
    roots_in,
    weighted_inner,
)

IFACE = RefInterface(1.0, 5.0, 0.15)


def closed_form_moment(iface, k):
    """Independent closed form of the k-th weight moment on [-1, 1]."""
    a = iface.alpha_hat
    left = (a ** (k + 1) - (-1.0) ** (k + 1)) / ((k + 1) * iface.beta_minus)
    right = (1.0 - a ** (k + 1)) / ((k + 1) * iface.beta_plus)
    return left + right


class TestPoly:
    def test_eval_and_arithmetic(self):
        p = Poly((1.0, 2.0, 3.0))        # 1 + 2x + 3x^2
        assert p(2.0) == pytest.approx(17.0)
        q = p + Poly((0.0, 1.0))
        assert q(1.0) == pytest.approx(7.0)
        assert (p * Poly((0.0, 1.0))).degree == 3
        assert (-p)(0.5) == pytest.approx(-p(0.5))

    def test_deriv_and_integral(self):
        p = Poly((0.0, 0.0, 1.0))        # x^2
        assert p.deriv()(3.0) == pytest.approx(6.0)
        assert p.integral(-1.0, 1.0) == pytest.approx(2.0 / 3.0)
        assert p.antideriv(0.0)(2.0) == pytest.approx(8.0 / 3.0)

    def test_monomial(self):
        assert Poly.monomial(3)(2.0) == pytest.approx(8.0)


class TestPiecewisePoly:
    def test_side_required_at_breakpoint(self):
        f = PiecewisePoly(0.0, Poly((0.0,)), Poly((1.0,)))
        with pytest.raises(ValueError):
            f(0.0)
        assert f(0.0, side="left") == 0.0
        assert f(0.0, side="right") == 1.0

    def test_smooth_needs_no_side(self):
        f = PiecewisePoly.from_poly(Poly((1.0, 2.0)), breakpoint=0.3)
        assert f.is_smooth
        assert f(0.3) == pytest.approx(1.6)


class TestMoments:
    @pytest.mark.parametrize("k", range(8))
    def test_weight_moment_closed_form(self, k):
        assert IFACE.weight_moment(k) == pytest.approx(
            closed_form_moment(IFACE, k), rel=1e-14)

    @pytest.mark.parametrize("k", range(6))
    def test_weight_moment_vs_quadrature(self, k):
        a = IFACE.alpha_hat
        val, _ = quad(lambda x: x ** k / IFACE.beta_minus, -1.0, a)
        v2, _ = quad(lambda x: x ** k / IFACE.beta_plus, a, 1.0)
        assert IFACE.weight_moment(k) == pytest.approx(val + v2, rel=1e-12)


class TestClassicalFamilies:
    @pytest.mark.parametrize("n", range(7))
    def test_legendre_matches_numpy(self, n):
        ref = npleg.leg2poly([0.0] * n + [1.0])
        got = np.zeros(n + 1)
        got[: len(legendre(n).coeffs)] = legendre(n).coeffs
        assert np.allclose(got, ref, atol=1e-13)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_lobatto_std_derivative_is_legendre(self, n):
        # the standard interior mode integrates the Legendre polynomial below it
        xi = np.linspace(-1.0, 1.0, 23)
        assert np.allclose(lobatto_std(n).deriv()(xi), legendre(n - 1)(xi),
                           atol=1e-12)

    @pytest.mark.parametrize("n", range(2, 7))
    def test_lobatto_std_vanishes_at_endpoints(self, n):
        assert abs(lobatto_std(n)(-1.0)) < 1e-14
        assert abs(lobatto_std(n)(1.0)) < 1e-14


class TestGenLegendre:
    def test_first_mode_root_from_moments(self):
        # the degree-1 member is (x - mu)/(1 - mu) with mu the weighted mean,
        # derivable by hand from the first two moments
        mu = closed_form_moment(IFACE, 1) / closed_form_moment(IFACE, 0)
        l1 = gen_legendre(1, IFACE)
        assert l1(mu) == pytest.approx(0.0, abs=1e-14)
        assert l1(1.0) == pytest.approx(1.0)

    def test_second_mode_from_moment_matrix(self):
        # independent construction: solve the 3x3 moment system for the
        # monic degree-2 orthogonal polynomial, then normalize at 1
        mom = [closed_form_moment(IFACE, k) for k in range(5)]
        G = np.array([[mom[0], mom[1]], [mom[1], mom[2]]])
        rhs = -np.array([mom[2], mom[3]])
        c0, c1 = np.linalg.solve(G, rhs)
        monic = Poly((c0, c1, 1.0))
        expected = np.asarray(monic.coeffs) / monic(1.0)
        got = np.asarray(gen_legendre(2, IFACE).coeffs)
        assert np.allclose(got, expected, rtol=1e-12, atol=1e-13)

    @pytest.mark.parametrize("n", range(7))
    def test_normalized_at_one(self, n):
        assert gen_legendre(n, IFACE)(1.0) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("m,n", [(m, n) for n in range(1, 7)
                                     for m in range(n)])
    def test_orthogonality(self, m, n):
        lm = gen_legendre(m, IFACE)
        ln = gen_legendre(n, IFACE)
        cm = weighted_inner(lm, lm, IFACE)
        cn = weighted_inner(ln, ln, IFACE)
        assert abs(weighted_inner(lm, ln, IFACE)) < 1e-11 * math.sqrt(cm * cn)

    @pytest.mark.parametrize("n", range(6))
    def test_equal_beta_reduces_to_legendre(self, n):
        iface = RefInterface(3.0, 3.0, 0.2)
        got = np.asarray(gen_legendre(n, iface).coeffs)
        ref = np.asarray(legendre(n).coeffs)
        assert np.allclose(got, ref, atol=1e-12)


class TestGenLobatto:
    @pytest.mark.parametrize("n", range(2, 6))
    def test_vanishes_at_endpoints(self, n):
        phi = gen_lobatto(n, IFACE)
        assert abs(phi(-1.0)) < 1e-13
        assert abs(phi(1.0)) < 1e-13

    @pytest.mark.parametrize("n", range(6))
    def test_jump_conditions(self, n):
        phi = gen_lobatto(n, IFACE)
        a = IFACE.alpha_hat
        assert phi(a, side="left") == pytest.approx(phi(a, side="right"),
                                                    abs=1e-12)
        dphi = phi.deriv()
        flux_l = IFACE.beta_minus * dphi(a, side="left")
        flux_r = IFACE.beta_plus * dphi(a, side="right")
        assert flux_l == pytest.approx(flux_r, abs=1e-12)

    def test_partition_of_unity(self):
        xi = np.linspace(-1.0, 1.0, 41)
        phi0 = gen_lobatto(0, IFACE)
        phi1 = gen_lobatto(1, IFACE)
        side = np.where(xi <= IFACE.alpha_hat, "left", "right")
        total = np.array([phi0(x, side=s) + phi1(x, side=s)
                          for x, s in zip(xi, side)])
        assert np.allclose(total, 1.0, atol=1e-13)

    @pytest.mark.parametrize("n", range(6))
    def test_equal_beta_reduces_to_standard(self, n):
        iface = RefInterface(2.5, 2.5, -0.4)
        phi = gen_lobatto(n, iface)
        ref = lobatto_std(n)
        xi = np.linspace(-1.0, 1.0, 33)
        got = np.array([phi(x, side="left" if x <= -0.4 else "right")
                        for x in xi])
        assert np.allclose(got, ref(xi), atol=1e-12)

    @pytest.mark.parametrize("n", range(2, 6))
    def test_interior_root_count(self, n):
        # n - 2 interior roots plus the two endpoint roots
        rts = roots_in(gen_lobatto(n, IFACE), -1.0, 1.0)
        assert len(rts) == n
        assert rts[0] == pytest.approx(-1.0, abs=1e-12)
        assert rts[-1] == pytest.approx(1.0, abs=1e-12)


class TestGaussRule:
    @pytest.mark.parametrize("p", (1, 2, 3, 4))
    def test_points_are_generalized_legendre_roots(self, p):
        rule = gauss_rule(p, IFACE)
        lp = gen_legendre(p, IFACE)
        assert len(rule.points) == p
        for g in rule.points:
            assert abs(lp(g)) < 1e-12

    @pytest.mark.parametrize("p", (1, 2, 3, 4))
    def test_exact_up_to_degree_2p_minus_1(self, p):
        rule = gauss_rule(p, IFACE)
        pts = np.asarray(rule.points)
        wts = np.asarray(rule.weights)
        for m in range(2 * p):
            exact = closed_form_moment(IFACE, m)
            got = float(np.sum(wts * pts ** m))
            assert got == pytest.approx(exact, rel=1e-12, abs=1e-13)

    @pytest.mark.parametrize("p", (1, 2, 3))
    def test_not_exact_at_degree_2p(self, p):
        rule = gauss_rule(p, IFACE)
        pts = np.asarray(rule.points)
        wts = np.asarray(rule.weights)
        m = 2 * p
        exact = closed_form_moment(IFACE, m)
        got = float(np.sum(wts * pts ** m))
        assert abs(got - exact) > 1e-6 * abs(exact)

    def test_weights_positive(self):
        for p in (1, 2, 3, 4):
            assert min(gauss_rule(p, IFACE).weights) > 0.0


class TestRoots:
    def test_prescribed_roots(self):
        p = Poly((0.0, 1.0)) * Poly((-0.5, 1.0)) * Poly((0.7, 1.0))
        rts = roots_in(p, -1.0, 1.0)
        assert np.allclose(rts, [-0.7, 0.0, 0.5], atol=1e-12)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_gen_legendre_root_count(self, n):
        rts = roots_in(gen_legendre(n, IFACE), -1.0, 1.0)
        assert len(rts) == n
        assert all(-1.0 < r < 1.0 for r in rts)


class TestIntegrateSplit:
    def test_kinked_integrand(self):
        f = lambda x: np.abs(x - 0.3) * np.cos(x)
        ref, _ = quad(f, -1.0, 1.0, points=[0.3])
        got = integrate_split(f, -1.0, 1.0, [0.3], order=10)
        assert got == pytest.approx(ref, rel=1e-12)

    def test_smooth_matches_quad(self):
        f = lambda x: np.exp(np.cos(3.0 * x))
        ref, _ = quad(f, 0.0, 1.0)
        got = integrate_split(f, 0.0, 1.0, (), order=20)
        assert got == pytest.approx(ref, rel=1e-10)
