import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sci_integrate
from scipy.special import eval_jacobi, eval_legendre

from smoothlab.errors import AliasingRiskError, DomainError, InvalidArgument
from smoothlab.polybasis import (JacobiParams, SpectralFn, analyze, basis_function, eigenvalue_R, eigenvalue_table,
                                 jacobi_eval, legendre_eval, squared_norms, synthesize)
from smoothlab.quadrature import gauss_jacobi

P22 = JacobiParams(2, 2)
XS = np.linspace(-1, 1, 41)


def scipy_normalized(n, a, b, x):
    return eval_jacobi(n, a, b, x) / eval_jacobi(n, a, b, 1.0)


class TestJacobiEval:
    @pytest.mark.parametrize("a, b", [(2, 2), (0, 0), (1, 0.5), (-0.5, 1.5)])
    def test_degree_zero_and_endpoint(self, a, b):
        pr = JacobiParams(a, b)
        assert np.allclose(jacobi_eval(pr, 0, XS), 1.0)
        for n in range(0, 30):
            assert jacobi_eval(pr, n, 1.0) == pytest.approx(1.0, abs=1e-12)

    def test_p1_is_identity(self):
        # Gram-Schmidt of x against 1 under (1-x^2)^2, normalized at 1
        rule = gauss_jacobi(8, 2, 2)
        proj = np.dot(rule.weights, rule.nodes) / np.sum(rule.weights)
        gs = XS - proj
        assert np.allclose(jacobi_eval(P22, 1, XS), gs / (1 - proj), atol=1e-14)

    @pytest.mark.parametrize("n", [2, 5, 11, 40])
    @pytest.mark.parametrize("a, b", [(2, 2), (0.5, 1.5)])
    def test_matches_scipy(self, n, a, b):
        assert np.allclose(jacobi_eval(JacobiParams(a, b), n, XS), scipy_normalized(n, a, b, XS), atol=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            jacobi_eval(P22, 3, 1.5)

    def test_negative_degree(self):
        with pytest.raises(InvalidArgument):
            jacobi_eval(P22, -1, 0.0)

    def test_high_degree_stable(self):
        v = jacobi_eval(P22, 256, np.array([-1.0, -0.3, 0.0, 0.7, 1.0]))
        assert np.all(np.isfinite(v))
        assert v[-1] == pytest.approx(1.0)


class TestLegendre:
    def test_degree_two(self):
        assert np.allclose(legendre_eval(2, XS), (3 * XS ** 2 - 1) / 2, atol=1e-15)

    def test_degree_three(self):
        assert legendre_eval(3, 1.0) == pytest.approx(1.0)
        # Rodrigues: (1/48) d^3/dx^3 (x^2-1)^3
        rod = np.polynomial.Polynomial([-1, 0, 1]) ** 3
        assert np.allclose(legendre_eval(3, XS), rod.deriv(3)(XS) / 48, atol=1e-14)
        assert np.allclose(legendre_eval(3, XS), (5 * XS ** 3 - 3 * XS) / 2, atol=1e-14)

    @pytest.mark.parametrize("n", range(0, 20, 3))
    def test_matches_scipy(self, n):
        assert np.allclose(legendre_eval(n, XS), eval_legendre(n, XS), atol=1e-13)


class TestOrthogonality:
    def test_gram_matrix(self):
        rule = gauss_jacobi(40, 2, 2)
        table = np.array([jacobi_eval(P22, n, rule.nodes) for n in range(33)])
        gram = (table * rule.weights) @ table.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) <= 1e-10

    def test_squared_norms_closed_form(self):
        # h_0 = 16/15, h_1 = 16/105, h_2 and h_3 by direct integration of the normalized polynomials
        h = squared_norms(3)
        assert h[0] == pytest.approx(16 / 15, rel=1e-13)
        assert h[1] == pytest.approx(16 / 105, rel=1e-13)
        for n in (2, 3):
            want = sci_integrate.quad(lambda x: scipy_normalized(n, 2, 2, x) ** 2 * (1 - x * x) ** 2, -1, 1)[0]
            assert h[n] == pytest.approx(want, rel=1e-12)


class TestAnalyze:
    def test_constant(self):
        s = analyze(lambda x: np.ones_like(x), 10)
        assert s.coeffs[0] == pytest.approx(16 / 15, abs=1e-12)
        assert np.max(np.abs(s.coeffs[1:])) <= 1e-12

    def test_identity(self):
        s = analyze(lambda x: x, 6)
        oracle = sci_integrate.quad(lambda x: x * x * (1 - x * x) ** 2, -1, 1)[0]
        assert s.coeffs[1] == pytest.approx(16 / 105, abs=1e-12)
        assert s.coeffs[1] == pytest.approx(oracle, abs=1e-12)
        assert abs(s.coeffs[0]) <= 1e-12

    def test_basis_function(self):
        s = analyze(basis_function(5), 12)
        mask = np.arange(13) != 5
        assert np.max(np.abs(s.coeffs[mask])) <= 1e-12

    def test_aliasing_guard(self):
        with pytest.raises(AliasingRiskError):
            analyze(lambda x: x, 10, rule_order=11)


class TestSynthesize:
    def test_round_trips(self):
        assert np.allclose(synthesize(analyze(lambda x: np.ones_like(x), 8), XS), 1.0, atol=1e-10)
        assert np.allclose(synthesize(analyze(lambda x: x, 8), XS), XS, atol=1e-10)

    def test_basis_reproduction(self):
        c = np.zeros(8)
        c[5] = squared_norms(5)[5]
        assert np.allclose(synthesize(SpectralFn(c), XS), jacobi_eval(P22, 5, XS), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=65))
    def test_analyze_synthesize_identity(self, coeffs):
        s = SpectralFn(np.asarray(coeffs))
        back = analyze(s, s.K)
        assert np.max(np.abs(back.coeffs - s.coeffs)) <= 1e-9 * max(1.0, np.max(np.abs(coeffs)))

    def test_json_roundtrip(self):
        s = SpectralFn([1.0, -0.5, 0.25])
        data = json.loads(s.to_json())
        assert data == {"K": 2, "coeffs": [1.0, -0.5, 0.25]}
        assert np.array_equal(SpectralFn.from_json(s.to_json()).coeffs, s.coeffs)

    def test_json_length_mismatch(self):
        with pytest.raises(InvalidArgument):
            SpectralFn.from_json('{"K": 3, "coeffs": [1.0]}')


class TestEigenvalue:
    def test_R0_is_one(self):
        assert np.allclose(eigenvalue_R(0, XS), 1.0, atol=1e-14)

    def test_R1_is_cube(self):
        assert np.allclose(eigenvalue_R(1, XS), XS ** 3, atol=1e-14)

    def test_value_at_one(self):
        assert np.allclose(eigenvalue_table(64, 1.0), 1.0, atol=1e-13)

    @pytest.mark.parametrize("n", [2, 5, 9])
    def test_definition(self, n):
        want = eval_legendre(n + 2, XS) + 1.5 * (1 - XS ** 2) * scipy_normalized(n, 2, 2, XS)
        assert np.allclose(eigenvalue_R(n, XS), want, atol=1e-12)

    def test_bounded_by_one(self):
        y = np.linspace(-1, 1, 201)
        assert np.max(np.abs(eigenvalue_table(40, y))) <= 1 + 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            eigenvalue_R(2, -1.01)
