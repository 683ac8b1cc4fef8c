import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from darbouxlab import darboux as dx
from darbouxlab import recurrence as rr
from darbouxlab.darboux import (
    DarbouxParams,
    SeriesKind,
    TerminationCase,
    accessory_spectrum,
    case_spectra,
    convergence_domain,
    darboux_function,
    darboux_polynomial,
    eval_local_solution,
    gauge_reduce_solution,
    h_jacobi_to_weierstrass,
    hypergeom_K,
    hypergeom_L,
    hypergeom_M,
    hypergeom_series_recurrence,
    hypergeom_terminating_series,
    log_G,
    potential_jacobi,
    potential_weierstrass,
    power_series_coefficients,
    power_series_h_offset,
    power_series_recurrence,
    ratio_coordinate,
    ratio_diagnostics,
    sign_flip_variants,
    spectrum_residual,
    symmetry_conditions,
    termination_check,
    terminate1_scan,
    truncated_seeds,
)
from darbouxlab.elliptic import Modulus, jacobi_sn_cn_dn, jacobi_to_weierstrass
from darbouxlab.errors import DegenerateError, DomainError, ParameterError
from darbouxlab.odeverify import residual_scalar

K_COMPLEX = 0.6 + 0.3j
LAME = {
    "sn": ((0, -1, -1, 1), lambda k: 1 + k * k),
    "cn": ((-1, 0, -1, 1), lambda k: 1.0),
    "dn": ((-1, -1, 0, 1), lambda k: k * k),
}
finite = st.floats(-3, 3, allow_nan=False)


def ode_q(p, h):
    return lambda u: h - complex(potential_jacobi(p, u))


def u_with_ratio(k, rho):
    """A point on the real-sn branch with ``ratio_coordinate(u) = rho`` (0 < rho < 1)."""
    s = (1 - rho) / (1 + rho)
    sn = cmath.sqrt(1 - s * s)
    return complex(mp.ellipf(mp.asin(sn), k * k))


class TestParams:
    @pytest.mark.parametrize("xi", [-1.5, -2.5, -7.5])
    def test_excluded_xi(self, xi):
        with pytest.raises(ParameterError):
            DarbouxParams(xi, 0, 0, 0, 0.5)

    def test_minus_half_allowed(self):
        DarbouxParams(-0.5, 0, 0, 0, 0.5)

    def test_degenerate_modulus(self):
        with pytest.raises(ParameterError):
            DarbouxParams(0, 0, 0, 0, 1.0)

    def test_sums_and_local_exponents(self):
        p = DarbouxParams(0.2, 0.3, 0.1, 1.4, 0.5)
        assert p.sums.pppp == pytest.approx(2.0)
        assert p.sums.pppm == pytest.approx(-0.8)
        assert p.sums.p0p0 == pytest.approx(0.3)
        assert p.varpi("+-+-") == pytest.approx(0.2 - 0.3 + 0.1 - 1.4)
        assert p.local_exponents["K+iK'"] == (1.1, -0.1)

    def test_bad_sign_pattern(self):
        with pytest.raises(ParameterError):
            DarbouxParams(0, 0, 0, 0, 0.5).varpi("+*+-")

    @settings(max_examples=50, deadline=None)
    @given(finite, finite, finite, finite, st.sampled_from(["++++", "+++-", "+-+-", "+0+0", "-0+-"]))
    def test_sign_reversal_negates(self, a, b, c, d, pat):
        flipped = pat.translate(str.maketrans("+-", "-+"))
        assert dx.signed_sum((a, b, c, d), flipped) == pytest.approx(-dx.signed_sum((a, b, c, d), pat), abs=1e-12)


class TestPotentials:
    @pytest.mark.parametrize("k", [0.5, K_COMPLEX])
    def test_jacobi_and_weierstrass_agree(self, k):
        p = DarbouxParams(0.2, 0.3, -0.4, 1.4, k)
        cm = jacobi_to_weierstrass(k)
        total = sum(p.potential_coefficients)
        for z in (0.13 + 0.07j, 0.31 - 0.2j, -0.2 + 0.15j):
            vj = potential_jacobi(p, cm.to_u(z))
            vw = potential_weierstrass(p, z, cm.lattice)
            assert abs(vj - (vw - cm.e_nu * total) / cm.scale**2) < 1e-10 * abs(vj)

    def test_h_conversion_moves_a_solution(self):
        """``sn(2K z)`` solves the Weierstrass form with the converted accessory parameter."""
        k = K_COMPLEX
        p = DarbouxParams(0, -1, -1, 1, k)
        cm = jacobi_to_weierstrass(k)
        hW = h_jacobi_to_weierstrass(p, 1 + k * k, cm)

        def Y(z):
            return jacobi_sn_cn_dn(cm.to_u(z), k)[0]

        def q(z):
            return hW - complex(potential_weierstrass(p, z, cm.lattice))

        res = residual_scalar(Y, q, [0.11 + 0.05j, 0.2 - 0.1j, 0.3 + 0.12j], step=1e-3)
        assert np.max(res) < 1e-6


class TestPowerSeriesRecurrence:
    def test_first_coefficient_formula(self):
        p = DarbouxParams(0.2, 0.3, 0.1, 1.4, K_COMPLEX)
        h_rec = 1.7 - 0.2j
        k2 = p.k**2
        expected = -(h_rec - (p.eta + p.xi + 2) ** 2 - k2 * (p.mu + p.xi + 2) ** 2 + (k2 + 1) * (p.xi + 1) ** 2) / (
            2 * (2 * p.xi + 3)
        )
        R, S, P = power_series_coefficients(p, h_rec, 0)
        assert P == 0
        assert abs(-S / R - expected) < 1e-15

    def test_offset_is_applied(self):
        p = DarbouxParams(0.2, 0.3, 0.1, 1.4, K_COMPLEX)
        h = 2.0
        rec = power_series_recurrence(p, h)
        assert rec(3) == power_series_coefficients(p, h - power_series_h_offset(p), 3)

    @pytest.mark.parametrize("k", [0.5, K_COMPLEX])
    def test_lame_sn_truncates(self, k):
        p = DarbouxParams(0, -1, -1, 1, k)
        C = rr.forward_run(power_series_recurrence(p, 1 + k * k), 10)
        assert C[0] == 1 and np.max(np.abs(C[1:])) < 1e-14

    @pytest.mark.parametrize("k", [0.5, K_COMPLEX])
    def test_characteristic_roots(self, k):
        r = rr.characteristic_roots(power_series_recurrence(DarbouxParams(0.2, 0.3, 0.1, 1.4, k), 0))
        assert {complex(round(r.t1.real, 12), round(r.t1.imag, 12)), complex(round(r.t2.real, 12), round(r.t2.imag, 12))} == {
            1 + 0j,
            complex(round((k * k).real, 12), round((k * k).imag, 12)),
        }

    def test_declared_limits_match_coefficients(self):
        p = DarbouxParams(0.2, 0.3, 0.1, 1.4, K_COMPLEX)
        rec = power_series_recurrence(p, 1.0)
        R, S, P = rec(10_000)
        lim = rec.limits
        assert abs(S / R - lim[1] / lim[0]) < 1e-3 and abs(P / R - lim[2] / lim[0]) < 1e-3


class TestHypergeomRecurrence:
    p = DarbouxParams(0.2, 0.3, 0.1, 1.4, K_COMPLEX)

    def test_h_enters_L_with_unit_slope(self):
        for m in (0, 1, 7, 40):
            assert abs(hypergeom_L(self.p, 1.5, m) - hypergeom_L(self.p, 0.5, m) - 1) < 1e-12

    def test_limits(self):
        m = 10_000
        M, L, K = hypergeom_M(self.p, m), hypergeom_L(self.p, 0.3, m), hypergeom_K(self.p, m)
        k2 = self.p.k ** 2
        assert abs(K / M - 1) < 1e-3
        assert abs(L / M - 2 * (1 - 2 * k2)) < 1e-3 * abs(2 * (1 - 2 * k2))

    @pytest.mark.parametrize("k", [0.8, K_COMPLEX, 0.3 - 0.4j])
    def test_characteristic_roots_are_squares(self, k):
        r = rr.characteristic_roots(hypergeom_series_recurrence(self.p.replace(k=k), 0))
        kp = cmath.sqrt(1 - k * k)
        expected = {(k + 1j * kp) ** 2, (k - 1j * kp) ** 2}
        for t in (r.t1, r.t2):
            assert min(abs(t - e) for e in expected) < 1e-12

    @pytest.mark.parametrize(
        "thetas,q",
        [((0.3, -0.8, -0.5, -3.0), 0), ((0.2, -1.3, -1.9, 2.0), 1), ((0.0, -1.0, -1.0, 3.0), 1), ((0.2, 0.3, -2.5, 0.7), 1)],
    )
    def test_K_vanishes_at_termination(self, thetas, q):
        p = DarbouxParams(*thetas, K_COMPLEX)
        assert termination_check(p).terminates
        assert abs(hypergeom_K(p, q + 1)) < 1e-12
        assert abs(hypergeom_K(p, q + 2)) > 1e-3

    def test_vanishing_denominator_is_named(self):
        p = DarbouxParams(0.5, 0.3, -2.5, 0.7, K_COMPLEX)  # xi + mu = -2
        with pytest.raises(DegenerateError) as exc:
            hypergeom_K(p, 1)
        assert exc.value.factor == "xi+mu+2m"

    def test_reexpansion_reproduces_power_series(self):
        """Expanding each basis term in ``x`` and collecting gives ``G_0 C_n`` (first 6 orders)."""
        p, h, N = self.p, 1.3 + 0.4j, 6
        X = rr.forward_run(hypergeom_series_recurrence(p, h), N)
        C = rr.forward_run(power_series_recurrence(p, h), N)
        base = dx.hypergeom_basis(p)
        a, b, c = (complex(v) for v in (base.a, base.b, base.c))
        G = [complex(mp.gamma(c - b + m) * mp.gamma(c - a + m) / mp.gamma(c + 2 * m)) for m in range(N + 1)]
        for n in range(N + 1):
            coef = sum(
                X[m] * G[m] * complex(mp.rf(a + m, n - m) * mp.rf(b + m, n - m) / (mp.rf(c + 2 * m, n - m) * mp.factorial(n - m)))
                for m in range(n + 1)
            )
            assert abs(coef - G[0] * C[n]) < 1e-9 * max(1, abs(G[0] * C[n]))

    def test_log_G_matches_gamma(self):
        G = np.exp(log_G(self.p, 5))
        base = dx.hypergeom_basis(self.p)
        a, b, c = (complex(v) for v in (base.a, base.b, base.c))
        for m in range(6):
            ref = complex(mp.gamma(c - b + m) * mp.gamma(c - a + m) / mp.gamma(c + 2 * m))
            assert abs(G[m] / ref - 1) < 1e-12


class TestEvaluation:
    @pytest.mark.parametrize("name,kind", [("sn", "power"), ("sn", "hypergeom"), ("cn", "power"), ("dn", "power"), ("dn", "hypergeom")])
    def test_lame_oracles(self, name, kind):
        k = 0.5
        thetas, hfun = LAME[name]
        p = DarbouxParams(*thetas, k)
        h = hfun(k)
        idx = {"sn": 0, "cn": 1, "dn": 2}[name]
        norm = 1.0 if kind == "power" else complex(np.exp(log_G(p, 0)[0]))
        for u in (0.7, 0.3 + 0.2j, -0.5 + 0.1j):
            v = eval_local_solution(p, h, kind, u).value / norm
            assert abs(v - jacobi_sn_cn_dn(u, k)[idx]) < 1e-10

    def test_cn_has_no_hypergeom_basis(self):
        # xi + mu = -2 makes a basis normalisation vanish at m = 1
        with pytest.raises(DegenerateError):
            eval_local_solution(DarbouxParams(-1, 0, -1, 1, 0.5), 1.0, "hypergeom", 0.3)

    def test_kinds_agree_on_generic_parameters(self, generic_params, rng):
        p, h = generic_params, 1.1 - 0.3j
        g0 = complex(np.exp(log_G(p, 0)[0]))
        n = 0
        while n < 10:
            u = complex(rng.uniform(-0.8, 0.8), rng.uniform(-0.4, 0.4))
            s = jacobi_sn_cn_dn(u, p.k)[0]
            if abs(s * s) >= 0.5 or abs(s) < 1e-3:
                continue
            try:
                hv = eval_local_solution(p, h, "hypergeom", u).value / g0
            except DomainError:
                continue
            pv = eval_local_solution(p, h, "power", u).value
            assert abs(pv - hv) < 1e-8 * abs(pv)
            n += 1

    @pytest.mark.parametrize("kind,limit", [("power", None), ("hypergeom", "G0")])
    def test_leading_behaviour(self, generic_params, kind, limit):
        p = generic_params
        expected = 1.0 if limit is None else complex(np.exp(log_G(p, 0)[0]))
        vals = []
        for u in (1e-2, 1e-3, 1e-4):
            s = jacobi_sn_cn_dn(u, p.k)[0]
            vals.append(eval_local_solution(p, 0.7, kind, u).value / s ** (p.xi + 1))
        errs = [abs(v - expected) for v in vals]
        assert errs[-1] < 1e-7 and errs[0] > errs[1] > errs[2]

    def test_domain_refusal(self, generic_params):
        u = u_with_ratio(generic_params.k, 0.8)
        with pytest.raises(DomainError, match="bound_dominant"):
            eval_local_solution(generic_params, 1.0, "hypergeom", u)

    def test_power_series_radius_refusal(self, generic_params):
        mod = Modulus.from_k(generic_params.k)
        u = mod.K + 0.5j * mod.K_prime  # |sn^2| = 1/|k| > 1
        assert abs(jacobi_sn_cn_dn(u, generic_params.k)[0]) > 1
        with pytest.raises(DomainError, match="power-series radius"):
            eval_local_solution(generic_params, 1.0, "power", u)

    def test_tail_estimate_and_fixed_truncation(self, generic_params):
        v = eval_local_solution(generic_params, 1.0, "hypergeom", 0.4)
        assert v.tail_estimate < 1e-13 * abs(v.value)
        v10 = eval_local_solution(generic_params, 1.0, "hypergeom", 0.4, N=10)
        assert v10.terms_used == 10
        assert abs(v10.value - v.value) < 1e-3 * abs(v.value)

    def test_residual_of_series_solution(self, generic_params):
        p, h = generic_params, 1.1 - 0.3j

        def y(u):
            return eval_local_solution(p, h, "hypergeom", u).value

        res = residual_scalar(y, ode_q(p, h), [0.3, 0.45 + 0.1j, 0.6 - 0.05j], relative=True)
        assert np.max(res) < 1e-8

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            SeriesKind.parse("laurent")


class TestConvergenceDomain:
    def test_real_modulus(self):
        d = convergence_domain(DarbouxParams(0.2, 0.3, 0.1, 1.4, 0.5), 1.0)
        assert d.bound_minimal == pytest.approx(1.0) and d.bound_dominant == pytest.approx(1.0)
        assert not d.minimal_selected

    def test_complex_modulus(self, generic_params):
        k = generic_params.k
        kp = cmath.sqrt(1 - k * k)
        b = sorted([abs(k + 1j * kp) ** -2, abs(k - 1j * kp) ** -2])
        d = convergence_domain(generic_params, 1.0)
        assert d.bound_dominant == pytest.approx(b[0], rel=1e-14)
        assert d.bound_minimal == pytest.approx(b[1], rel=1e-14)
        assert d.bound_dominant < d.bound_minimal
        assert d.applicable == d.bound_dominant

    def test_terminating_bypass(self):
        d = convergence_domain(DarbouxParams(0, -1, -1, 1, K_COMPLEX), 0, terminated=True)
        assert math.isinf(d.applicable)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.05, 0.95), st.floats(-0.5, 0.5))
    def test_bound_ordering(self, kr, ki):
        k = complex(kr, ki)
        d = convergence_domain(DarbouxParams(0.2, 0.3, 0.1, 1.4, k), 1.0)
        assert d.bound_dominant <= d.bound_minimal * (1 + 1e-12)


class TestTermination:
    @pytest.mark.parametrize(
        "thetas,case,q",
        [
            ((0, -1, -1, 1), TerminationCase.SUM_ODD, 0),
            ((0.3, 0.2, -1.5, 0.7), TerminationCase.HALF_INTEGER, 0),
            ((0, -1, -1, 3), TerminationCase.SUM_ODD, 1),
            ((-1, -1, -1, -1), TerminationCase.SUM_EVEN, 0),
        ],
    )
    def test_cases(self, thetas, case, q):
        rep = termination_check(DarbouxParams(*thetas, 0.5))
        assert (rep.case, rep.q) == (case, q)

    def test_none(self):
        rep = termination_check(DarbouxParams(0.3, 0.1, 0.2, 0.7, 0.5))
        assert not rep.terminates and rep.case is TerminationCase.NONE and rep.q is None

    def test_reports_all_cases(self):
        # w_{+++-} = -3 and mu = -3/2 at once
        rep = termination_check(DarbouxParams(0.5, -1.0, -1.5, 1.0, 0.5))
        assert set(rep.cases()) == {"SumOdd", "HalfInteger"}

    @pytest.mark.parametrize("name,expected", [("sn", 1.25), ("cn", 1.0), ("dn", 0.25)])
    def test_lame_spectra(self, name, expected):
        thetas, _ = LAME[name]
        hs = accessory_spectrum(DarbouxParams(*thetas, 0.5))
        assert len(hs) == 1 and abs(hs[0] - expected) < 1e-9

    def test_spectrum_needs_termination(self, generic_params):
        with pytest.raises(ParameterError):
            accessory_spectrum(generic_params)

    def test_q1_two_values_degree_one(self):
        p = DarbouxParams(0, -1, -1, 3, K_COMPLEX)
        cs = case_spectra(p)
        assert [c.source for c in cs] == ["hypergeom+power"]
        hs = accessory_spectrum(p)
        assert len(hs) == 2
        for h in hs:
            poly = darboux_polynomial(p, h)
            assert poly.terminated == 1
            C = poly.coeffs
            assert abs(C[1]) > 1e-6 and np.all(C[2:] == 0)

    @pytest.mark.parametrize("thetas", [(0, -1, -1, 3), (0.3, 0.2, -2.5, 0.7), (-1.2, -0.3, -0.5, 1.0)])
    def test_fraction_vanishes_on_spectrum(self, thetas):
        p = DarbouxParams(*thetas, K_COMPLEX)
        for h in accessory_spectrum(p):
            assert spectrum_residual(p, h) < 1e-12

    def test_spectrum_residual_off_spectrum(self):
        p = DarbouxParams(0, -1, -1, 3, K_COMPLEX)
        assert spectrum_residual(p, accessory_spectrum(p)[0] + 0.1) > 1e-4


class TestDarbouxPolynomial:
    def test_lame_sn_coefficients(self):
        poly = darboux_polynomial(DarbouxParams(0, -1, -1, 1, 0.5), 1.25)
        assert poly.terminated == 0 and poly.coeffs[0] == 1

    @pytest.mark.parametrize("thetas", [(0, -1, -1, 3), (-1.2, -0.3, -0.5, 1.0), (-0.5, 0.5, -1.0, 2.0)])
    def test_operator_residual(self, thetas, rng):
        p = DarbouxParams(*thetas, K_COMPLEX)
        for h in accessory_spectrum(p):
            poly = darboux_polynomial(p, h)
            pts = rng.uniform(0.2, 1.2, 10) + 1j * rng.uniform(-0.3, 0.3, 10)
            res = residual_scalar(poly, ode_q(p, h), pts, relative=True)
            assert np.max(res) < 1e-8

    def test_rejects_non_spectrum_h(self):
        with pytest.raises(ParameterError):
            darboux_polynomial(DarbouxParams(0, -1, -1, 1, 0.5), 1.3)

    def test_rejects_half_integer_case(self):
        with pytest.raises(ParameterError):
            darboux_polynomial(DarbouxParams(0.3, 0.2, -1.5, 0.7, 0.5), 0.0)

    def test_hypergeom_terminating_matches(self):
        p = DarbouxParams(0, -1, -1, 3, K_COMPLEX)
        g0 = complex(np.exp(log_G(p, 0)[0]))
        for h in accessory_spectrum(p):
            poly = darboux_polynomial(p, h)
            hs = hypergeom_terminating_series(p, h)
            for u in (0.4, 1.1 + 0.3j, 2.0 - 0.5j):
                assert abs(hs(u) / g0 - poly(u)) < 1e-10 * max(1, abs(poly(u)))

    @pytest.mark.parametrize("name", sorted(LAME))
    def test_lame_polynomials_reproduce_jacobi(self, name):
        k = 0.5
        thetas, hfun = LAME[name]
        p = DarbouxParams(*thetas, k)
        poly = darboux_polynomial(p, accessory_spectrum(p)[0])
        K = Modulus.from_k(k).K.real
        idx = {"sn": 0, "cn": 1, "dn": 2}[name]
        for r in np.linspace(0.05, 0.9, 6) * K:
            for phase in (0, 0.7, 2.0, -2.6):
                u = r * cmath.exp(1j * phase)
                assert abs(poly(u) - jacobi_sn_cn_dn(u, k)[idx]) < 1e-9


class TestGaugeReduction:
    @pytest.fixture(params=[(0.3, 0.2, -1.5, 0.7), (0.1 + 0.1j, 0.4, -1.5, 1.2)])
    def q0(self, request):
        return DarbouxParams(*request.param, K_COMPLEX)

    def test_q0_is_multiplication(self, q0):
        h = accessory_spectrum(q0)[0]
        g = gauge_reduce_solution(q0, h)
        assert g.operator.q.is_zero()
        assert abs(g.operator.p(0.3) - np.exp(log_G(q0, 0)[0])) < 1e-12

    @pytest.mark.parametrize("mu", [-1.5, -2.5])
    def test_matches_series_at_eight_points(self, mu):
        p = DarbouxParams(0.3, 0.2, mu, 0.7, K_COMPLEX)
        g0 = complex(np.exp(log_G(p, 0)[0]))
        for h in accessory_spectrum(p):
            g = gauge_reduce_solution(p, h)
            direct = hypergeom_terminating_series(p, h)
            for u in np.linspace(0.15, 0.9, 8) * cmath.exp(0.2j):
                ref_power = eval_local_solution(p, h, "power", u).value
                assert abs(g(u) - direct(u)) < 1e-8 * abs(direct(u))
                assert abs(g(u) / g0 - ref_power) < 1e-8 * abs(ref_power)

    def test_requires_half_integer(self):
        with pytest.raises(ParameterError):
            gauge_reduce_solution(DarbouxParams(0, -1, -1, 1, 0.5), 1.25)

    def test_requires_spectrum_member(self, q0):
        with pytest.raises(ParameterError):
            gauge_reduce_solution(q0, accessory_spectrum(q0)[0] + 0.5)


class TestDarbouxFunction:
    @pytest.fixture(scope="class")
    @staticmethod
    def fn():
        p = DarbouxParams(0.2, 0.3, 0.1, 1.4, K_COMPLEX)
        seed = min(truncated_seeds(p), key=lambda h: abs(h - (1 + 2j)))
        return p, darboux_function(p, seed)

    def test_fraction_vanishes(self, fn):
        p, f = fn
        assert f.residual < 1e-10
        assert abs(rr.continued_fraction_infinite(hypergeom_series_recurrence(p, f.h))) < 1e-10

    def test_coefficients_are_minimal(self, fn):
        p, f = fn
        roots = rr.characteristic_roots(hypergeom_series_recurrence(p, f.h))
        assert f.perron.label is rr.PerronClass.MINIMAL
        assert abs(f.perron.limit - abs(roots.t1)) < 0.01 * abs(roots.t1)

    def test_domain_selects_minimal_bound(self, fn):
        p, f = fn
        d = convergence_domain(p, f.h)
        assert d.minimal_selected and d.applicable == d.bound_minimal

    def test_residual_beyond_dominant_bound(self, fn):
        """The minimal solution converges where a generic one cannot."""
        p, f = fn
        dom = convergence_domain(p, f.h)
        u = u_with_ratio(p.k, 1.3 * dom.bound_dominant)
        assert abs(abs(ratio_coordinate(u, p.k)) - 1.3 * dom.bound_dominant) < 1e-8
        with pytest.raises(DomainError):
            eval_local_solution(p, f.h + 0.3, "hypergeom", u)

        def y(v):
            return eval_local_solution(p, f.h, "hypergeom", v, series=f.series).value

        res = residual_scalar(y, ode_q(p, f.h), [u, u + 0.05j, u - 0.05], relative=True)
        assert np.max(res) < 1e-8

    def test_real_modulus_refused(self):
        with pytest.raises(ParameterError, match="equal modulus"):
            darboux_function(DarbouxParams(0.2, 0.3, 0.1, 1.4, 0.5), 1.0)

    def test_terminating_parameters_hit_spectrum(self):
        p = DarbouxParams(0, -1, -1, 3, K_COMPLEX)
        for h in accessory_spectrum(p):
            f = darboux_function(p, h + 0.01)
            assert abs(f.h - h) < 1e-8 * max(1, abs(h))


class TestRatioDiagnostics:
    @pytest.mark.parametrize("u", [0.3, 0.4, 0.5, 0.4 + 0.2j])
    def test_watson_ratio(self, u):
        rows = ratio_diagnostics(DarbouxParams(0.2, 0.3, 0.1, 1.4, 0.5), 1.0, u, m_max=200)
        s, c, _ = jacobi_sn_cn_dn(u, 0.5)
        assert abs(rows[200].term_ratio - (1 - c) / (1 + c)) < 1e-3
        assert rows[200].watson_prediction == pytest.approx((1 - c) / (1 + c))

    def test_half_angle_identity(self, rng):
        """``cosh(log ratio) = 2/sn^2 - 1``: the ratio is ``e^{-zeta}`` for that ``zeta``."""
        for _ in range(10):
            u = complex(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5))
            rho = ratio_coordinate(u, K_COMPLEX)
            s = jacobi_sn_cn_dn(u, K_COMPLEX)[0]
            assert abs((rho + 1 / rho) / 2 - (2 / (s * s) - 1)) < 1e-9 * abs(2 / (s * s))

    def test_forward_run_tracks_dominant_root(self, generic_params):
        rows = ratio_diagnostics(generic_params, 1.0, 0.3, m_max=500)
        assert abs(rows[-1].coeff_ratio - rows[-1].perron_prediction) < 0.01 * rows[-1].perron_prediction


class TestSymmetries:
    def test_eight_variants_preserve_equation(self):
        p = DarbouxParams(0.2, 0.3, 0.1, 1.4, 0.5)
        vs = sign_flip_variants(p)
        assert len(vs) == 8 and all(v.usable for v in vs)
        for v in vs:
            assert np.allclose(v.params.potential_coefficients, p.potential_coefficients, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(finite, finite, finite, finite)
    def test_flip_is_involution(self, a, b, c, d):
        try:
            p = DarbouxParams(a, b, c, d, 0.5)
        except ParameterError:
            return
        for v in sign_flip_variants(p):
            if not v.usable:
                continue
            back = {tuple(w.params.thetas) for w in sign_flip_variants(v.params) if w.usable and w.signs == v.signs}
            assert any(np.allclose(t, p.thetas, atol=1e-12) for t in back)

    def test_excluded_flip_flagged(self):
        vs = sign_flip_variants(DarbouxParams(0.5, 0.3, 0.1, 1.4, 0.5))
        bad = [v for v in vs if not v.usable]
        assert len(bad) == 4 and all(v.signs[0] == "-" for v in bad)

    def test_lame_family_by_flips(self):
        """Flipping the sn solution's exponents reaches the cn and dn parameter sets."""
        p = DarbouxParams(0, -1, -1, 1, 0.5)
        reached = {tuple(v.params.thetas) for v in sign_flip_variants(p)}
        assert (-1, 0, -1, 1) in reached and (-1, -1, 0, 1) in reached

    def test_condition_ii_realised_directly(self):
        rep = terminate1_scan(DarbouxParams(0, -1, -1, 1, 0.5))
        ii = next(c for c in rep.conditions if c.label == "ii")
        assert ii.holds and "+++-" in ii.witnesses
        assert (("+", "+", "+"), rep.realized[0][1]) == rep.realized[0]
        assert rep.realized[0][1].q == 0 and not rep.needs_external_symmetry

    def test_nu_half_integer_needs_external_symmetry(self):
        rep = terminate1_scan(DarbouxParams(0.31, 0.17, 0.23, 1.5, 0.5))
        iv = next(c for c in rep.conditions if c.label == "iv")
        assert iv.holds and iv.witnesses == ("nu",)
        assert rep.needs_external_symmetry and "out-of-scope" in rep.note

    def test_generic_no_condition(self):
        rep = terminate1_scan(DarbouxParams(math.sqrt(2) / 10, math.sqrt(3) / 10, math.pi / 10, math.e / 10, 0.5))
        assert not rep.any_condition and not rep.realized

    def test_conditions_on_bare_tuple(self):
        conds = symmetry_conditions((-1.5, 0.2, 0.3, 0.4))
        assert conds[3].holds and conds[3].witnesses == ("xi",)
