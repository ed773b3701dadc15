import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lrkqfi.asymptotics import (
    EmConfig,
    PerturbedFamily,
    attenuation,
    attenuation_series,
    euler_maclaurin_sum,
    finite_size_window,
    kernel_log_integral,
    main_integral,
    predict_delta_scaling,
    remainder_scaling_probe,
    sine_power_integral,
    sine_power_quadrature,
)
from lrkqfi.chain import DecayKernel
from lrkqfi.errors import DomainError


def poly_derivs(coeffs, order):
    """Callables for the first ``order`` derivatives of a numpy polynomial."""
    p = np.polynomial.Polynomial(coeffs)
    return p, [p.deriv(q) for q in range(1, order + 1)]


class TestEmConfig:
    def test_bernoulli_numbers(self):
        cfg = EmConfig(2)
        assert cfg.bernoulli(2) == pytest.approx(1 / 6, abs=1e-16)
        assert cfg.bernoulli(4) == pytest.approx(-1 / 30, abs=1e-16)

    @given(st.floats(-50, 50), st.integers(1, 3))
    def test_periodic(self, x, M):
        cfg = EmConfig(M)
        assert cfg.periodic_bernoulli(x + 1) == pytest.approx(float(cfg.periodic_bernoulli(x)), abs=1e-9)

    def test_rejects_negative_order(self):
        with pytest.raises(DomainError):
            EmConfig(-1)


class TestEulerMaclaurin:
    def test_arithmetic_series(self):
        approx, rem = euler_maclaurin_sum(lambda x: x, 1, 10, EmConfig(0), [lambda x: np.ones_like(x)])
        assert approx == pytest.approx(55.0, abs=1e-12)
        assert rem == pytest.approx(0.0, abs=1e-12)

    def test_squares(self):
        g, d = poly_derivs([0, 0, 1], 3)
        approx, _ = euler_maclaurin_sum(g, 0, 10, EmConfig(1), d)
        assert approx == pytest.approx(385.0, abs=1e-10)

    @given(st.integers(0, 50))
    def test_constant(self, n):
        approx, _ = euler_maclaurin_sum(lambda x: np.ones_like(x), 0, n, EmConfig(1), [lambda x: 0 * x] * 3)
        assert approx == pytest.approx(n + 1, abs=1e-10)

    @pytest.mark.parametrize("degree", [0, 1, 2, 3])
    def test_exact_on_polynomials(self, degree):
        rng = np.random.default_rng(degree)
        coeffs = rng.uniform(-3, 3, degree + 1)
        g, d = poly_derivs(coeffs, 3)
        a, b = -4, 17
        approx, rem = euler_maclaurin_sum(g, a, b, EmConfig(1), d)
        assert abs(approx - sum(g(n) for n in range(a, b + 1))) < 1e-10
        assert rem < 1e-10

    def test_remainder_is_exact_error_and_bounded(self):
        res = euler_maclaurin_sum(np.exp, 0, 6, EmConfig(1), [np.exp] * 3)
        true = sum(math.exp(n) for n in range(7))
        assert abs(true - res.approximation) == pytest.approx(res.remainder_estimate, rel=1e-9)
        assert res.remainder_estimate <= res.remainder_bound

    def test_errors(self):
        with pytest.raises(DomainError):
            euler_maclaurin_sum(lambda x: x, 5, 1, EmConfig(0), [lambda x: 1 + 0 * x])
        with pytest.raises(DomainError):
            euler_maclaurin_sum(lambda x: x, 0, 3, EmConfig(1), [lambda x: 1 + 0 * x])
        with np.errstate(divide="ignore"), pytest.raises(DomainError):
            euler_maclaurin_sum(lambda x: 1 / (x - 2), 0, 5, EmConfig(0), [lambda x: -1 / (x - 2) ** 2])


class TestSineIntegral:
    def test_alpha_one(self):
        assert sine_power_integral(1.0) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_alpha_half(self):
        assert sine_power_integral(0.5) == pytest.approx(math.sqrt(math.pi / 2), abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
    def test_quadrature_agrees_with_gamma_form(self, alpha):
        ref = math.pi / 2 if alpha == 1 else math.gamma(1 - alpha) * math.cos(math.pi * alpha / 2)
        assert abs(sine_power_quadrature(alpha) - ref) < 1e-6

    @pytest.mark.parametrize("alpha", [0.0, 1e-3, -0.5, 1.5])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            sine_power_integral(alpha)


class TestPredictor:
    def test_power_zero(self):
        N = math.exp(10)
        assert predict_delta_scaling(DecayKernel.power(0), N) == pytest.approx(N**2 * 100, rel=1e-12)

    def test_log_alpha_one_leading_behaviour(self):
        N = 1e12
        ratio = predict_delta_scaling(DecayKernel.log_law(1), N) / (N**2 * math.log(math.log(N)) ** 2)
        assert ratio == pytest.approx(1.0, abs=0.05)

    def test_power_two_is_heisenberg(self):
        r = predict_delta_scaling(DecayKernel.power(2), 2e8) / predict_delta_scaling(DecayKernel.power(2), 1e8)
        assert r == pytest.approx(4.0, rel=1e-7)

    @pytest.mark.parametrize("kern", [DecayKernel.power(0.7), DecayKernel.log_law(0.4), DecayKernel.log_law(1.0)])
    def test_closed_forms_match_quadrature(self, kern):
        from scipy import integrate

        N = 5000.0
        if kern.kind.value == "power":
            fn = lambda x: x ** (-kern.alpha) / x
        else:
            fn = lambda x: (1 + math.log(x)) ** (-kern.alpha) / x
        ref, _ = integrate.quad(fn, 1, N, limit=200)
        assert kernel_log_integral(kern, N) == pytest.approx(ref, rel=1e-10)

    def test_table_kernel_piecewise_linear(self):
        table = [1.0, 0.5, 0.5, 0.25]
        kern = DecayKernel.custom(table, 1)
        # exact: int (a + b x)/x over each unit segment
        ref = (1.0 + 0.5 * math.log(2)) * 0 + sum(
            (y0 - (y1 - y0) * x0) * math.log((x0 + 1) / x0) + (y1 - y0)
            for x0, y0, y1 in zip([1, 2, 3], table[:-1], table[1:])
        )
        assert kernel_log_integral(kern, 4) == pytest.approx(ref, rel=1e-14)

    @given(st.floats(0, 3), st.floats(0, 3), st.integers(2, 10**7))
    def test_non_increasing_in_alpha(self, a, b, N):
        lo, hi = sorted((a, b))
        for make in (DecayKernel.power, DecayKernel.log_law):
            assert predict_delta_scaling(make(hi), N) <= predict_delta_scaling(make(lo), N) * (1 + 1e-12)


class TestWindow:
    def test_zero_argument(self):
        assert attenuation(0.0) == 1.0
        assert finite_size_window(1e-300, 2).s_factor == pytest.approx(1.0, abs=1e-15)

    def test_unit_argument(self):
        assert attenuation(1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)

    def test_small_epsilon_example(self):
        w = finite_size_window(0.01, 100)
        assert w.s_factor == pytest.approx(0.977, abs=5e-4)
        assert w.super_hs_effective

    def test_log_family_uses_double_log(self):
        w = finite_size_window(0.1, 10**6, PerturbedFamily.LOG)
        assert w.argument == pytest.approx(0.1 * math.log(1 + math.log(1e6)), rel=1e-15)

    def test_series_20_terms_matches_closed_form(self):
        grid = np.linspace(0, 5, 501)
        err = np.array([abs(attenuation_series(a, terms=20) - attenuation(a)) for a in grid])
        bad = grid[err > 1e-12]
        assert bad.size == 0, f"20-term series off by {err.max():.2e} (first failure at a={bad.min():.2f})"

    @given(st.floats(0, 5))
    def test_series_converges_to_closed_form(self, a):
        # first omitted term is a^n / (n+1)!, below 1e-13 on [0, 5] for n = 30
        assert attenuation_series(a, terms=30) == pytest.approx(attenuation(a), abs=1e-12)

    @given(st.floats(1e-6, 10), st.integers(2, 10**9), st.sampled_from(list(PerturbedFamily)))
    def test_range(self, eps, N, fam):
        w = finite_size_window(eps, N, fam)
        assert 0 < w.s_factor <= 1
        assert w.super_hs_effective == (w.s_factor >= 0.95)

    def test_domain(self):
        with pytest.raises(DomainError):
            finite_size_window(0.0, 10)
        with pytest.raises(DomainError):
            finite_size_window(0.1, 1)


class TestRemainderProbe:
    def test_main_integral_matches_closed_form_at_alpha_zero(self):
        # continuum f at alpha = 0: (cos(k/2) - cos((N-1)k/2)) / sin(k/2)
        from scipy import integrate

        N = 64
        fn = lambda k: abs((math.cos(k / 2) - math.cos((N - 1) * k / 2)) / math.sin(k / 2))
        edges = np.linspace(math.pi / N, math.pi, 4 * N + 1)
        ref = sum(integrate.quad(fn, a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
        assert main_integral(N, DecayKernel.power(0)) == pytest.approx(N / math.pi * ref, rel=1e-8)

    def test_regular_kernel(self):
        rep = remainder_scaling_probe(DecayKernel.power(2), [128, 256, 512, 1024])
        assert rep.main_exponent == pytest.approx(1.0, abs=0.05)
        assert max(abs(r.remainder) for r in rep.rows) < 1.0
        assert rep.passed

    def test_half_power_main_term(self):
        rep = remainder_scaling_probe(DecayKernel.power(0.5), [128, 256, 512, 1024])
        assert rep.main_exponent == pytest.approx(1.0, abs=0.05)

    def test_validation(self):
        with pytest.raises(DomainError):
            remainder_scaling_probe(DecayKernel.power(0), [64, 128])
        with pytest.raises(DomainError):
            remainder_scaling_probe(DecayKernel.power(0), [64, 256, 128])
