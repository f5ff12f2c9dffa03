import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import chebyshev as C
from scipy import integrate as sci_integrate

from smoothlab import translate
from smoothlab.errors import DomainError, InvalidArgument
from smoothlab.polybasis import JacobiParams, analyze, basis_function, eigenvalue_R, jacobi_eval, legendre_eval
from smoothlab.translate import (TranslationKernelPoint, adjoint_pair, apply_hatT, apply_T, apply_T1, apply_T2,
                                 apply_T_spectral, hatT_values, T1_values, T2_values, T_values,
                                 translated_breakpoints)
from smoothlab.wspace import Lazy, catalog

X = np.linspace(-0.98, 0.98, 25)
ONE = lambda u: np.ones_like(u)  # noqa: E731
IDENT = lambda u: u  # noqa: E731
P22 = JacobiParams(2, 2)


def hatT_quad(f, t, x):
    """Independent scalar oracle: adaptive quad of the phi-integral."""
    s = math.sqrt(1 - x * x)

    def g(phi):
        R = x * math.cos(t) - s * math.sin(t) * math.cos(phi)
        st2, sp2 = math.sin(t) ** 2, math.sin(phi) ** 2
        ker = 1 - R * R - 2 * st2 * sp2 + 4 * s * s * st2 * sp2 * sp2
        return ker * float(f(np.array([R]))[0])

    return sci_integrate.quad(g, 0, math.pi, epsabs=1e-13, limit=200)[0] / (math.pi * s * s)


class TestKernelPoint:
    def test_R_formula(self):
        pt = TranslationKernelPoint(0.3, -0.4, 0.5)
        assert pt.R == pytest.approx(0.3 * -0.4 - 0.5 * math.sqrt(1 - 0.09) * math.sqrt(1 - 0.16))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1))
    def test_invariants(self, x, y, z):
        R = TranslationKernelPoint(x, y, z).R
        assert -1 - 1e-12 <= R <= 1 + 1e-12
        assert (1 - x * x) * (1 - z * z) <= 1 - R * R + 1e-12
        assert (1 - y * y) * (1 - z * z) <= 1 - R * R + 1e-12


class TestT1:
    @pytest.mark.parametrize("y", [-0.7, 0.0, 0.45, 1.0])
    def test_constant(self, y):
        assert np.allclose(T1_values(ONE, y, X), (3 * y * y - 1) / 2, atol=1e-12)

    @pytest.mark.parametrize("y", [-0.7, 0.2, 0.9])
    def test_identity(self, y):
        assert np.allclose(T1_values(IDENT, y, X), X * (5 * y ** 3 - 3 * y) / 2, atol=1e-12)
        assert np.allclose(T1_values(IDENT, y, X, zrule_order=64), T1_values(IDENT, y, X), atol=1e-13)

    @pytest.mark.parametrize("nu", range(11))
    def test_eigenfunction(self, nu):
        f = basis_function(nu)
        for y in (-0.6, 0.35, 0.8):
            want = f(X) * legendre_eval(nu + 2, y)
            assert np.max(np.abs(T1_values(f, y, X) - want)) <= 1e-8

    def test_grid_output(self):
        g = apply_T1(ONE, 0.5)
        assert np.allclose(g.values, (3 * 0.25 - 1) / 2)

    def test_domain(self):
        with pytest.raises(DomainError):
            apply_T1(ONE, 1.2)


class TestT2:
    @pytest.mark.parametrize("y", [-0.7, 0.0, 0.45])
    def test_constant_and_identity(self, y):
        assert np.allclose(T2_values(ONE, y, X), 1.0, atol=1e-12)
        assert np.allclose(T2_values(IDENT, y, X), X * y, atol=1e-12)

    @pytest.mark.parametrize("nu", range(11))
    def test_eigenfunction(self, nu):
        f = basis_function(nu)
        for y in (-0.6, 0.35, 0.8):
            want = f(X) * jacobi_eval(P22, nu, y)
            assert np.max(np.abs(T2_values(f, y, X) - want)) <= 1e-8

    def test_domain(self):
        with pytest.raises(DomainError):
            apply_T2(ONE, -1.01)


class TestT:
    @pytest.mark.parametrize("y", [-0.9, -0.2, 0.5])
    def test_closed_forms(self, y):
        assert np.allclose(T_values(ONE, y, X), 1.0, atol=1e-12)
        assert np.allclose(T_values(IDENT, y, X), X * y ** 3, atol=1e-12)

    def test_identity_cube_matches_hatT(self):
        t = 0.9
        oracle = np.array([hatT_quad(IDENT, t, x) for x in X[::4]])
        assert np.allclose(oracle, X[::4] * math.cos(t) ** 3, atol=1e-10)

    @pytest.mark.parametrize("deg", [0, 3, 8, 16])
    def test_y_one_is_identity(self, deg):
        c = np.random.default_rng(deg).standard_normal(deg + 1)
        f = lambda u: C.chebval(u, c)  # noqa: E731
        assert np.allclose(T_values(f, 1.0, X), f(X), atol=1e-8)

    def test_decomposition(self):
        f = catalog("smoothstep:a=0,w=0.2")
        y = 0.3
        g = apply_T(f, y, size=65)
        want = apply_T1(f, y, size=65).values + 1.5 * (1 - y * y) * apply_T2(f, y, size=65).values
        assert np.allclose(g.values, want, atol=1e-14)

    def test_linearity(self):
        f, g = catalog("abspow:a=0.3,s=1.5"), catalog("smoothstep:a=0.4,w=0.1")
        y = -0.35
        lhs = T_values(2 * f - 3 * g, y, X)
        rhs = 2 * T_values(f, y, X) - 3 * T_values(g, y, X)
        assert np.allclose(lhs, rhs, atol=1e-10)

    @pytest.mark.parametrize("n", [0, 2, 5, 9])
    def test_eigen_factorization(self, n):
        f = basis_function(n)
        y = 0.4
        x = np.linspace(-0.95, 0.95, 61)
        px = f(x)
        keep = np.abs(px) > 0.1
        ratio = T_values(f, y, x)[keep] / px[keep]
        assert np.var(ratio) <= 1e-8
        assert np.mean(ratio) == pytest.approx(eigenvalue_R(n, y), abs=1e-8)

    def test_preserves_degree(self):
        c = np.random.default_rng(3).standard_normal(8)
        f = lambda u: C.chebval(u, c)  # noqa: E731
        s = analyze(Lazy(lambda u: T_values(f, 0.3, u)), 20)
        assert np.max(np.abs(s.coeffs[8:])) <= 1e-8


class TestHatT:
    def test_t_zero(self):
        f = catalog("abspow:a=0.3,s=1.5")
        assert np.array_equal(hatT_values(f, 0.0, X), f(X))

    @pytest.mark.parametrize("t", [0.1, 0.7, 2.0, math.pi])
    def test_constant(self, t):
        assert np.allclose(hatT_values(ONE, t, X), 1.0, atol=1e-12)

    def test_even_in_t(self):
        f = catalog("abspow:a=0.3,s=1.5")
        assert np.allclose(hatT_values(f, -0.7, X), hatT_values(f, 0.7, X), atol=1e-14)

    @pytest.mark.parametrize("fid", ["abspow:a=0,s=1", "abspow:a=-0.5,s=0.5", "smoothstep:a=0.4,w=0.1"])
    def test_against_scalar_quad(self, fid):
        f = catalog(fid)
        t = 0.45
        xs = X[::3]
        want = np.array([hatT_quad(f, t, x) for x in xs])
        assert np.allclose(hatT_values(f, t, xs, graded=True), want, atol=1e-9)

    def test_backend_agreement(self):
        rng = np.random.default_rng(0)
        c = rng.standard_normal(17)
        f = lambda u: C.chebval(u, c)  # noqa: E731
        for x, t in zip(rng.uniform(-0.99, 0.99, 50), rng.uniform(0, math.pi, 50)):
            a = T_values(f, math.cos(t), np.array([x]))[0]
            b = hatT_values(f, t, np.array([x]))[0]
            assert abs(a - b) <= 1e-8

    def test_edge_extrapolation(self):
        # x within 1e-6 of the endpoint uses the limit along the grid
        x = np.array([1 - 1e-7, -1 + 1e-8])
        assert np.allclose(hatT_values(IDENT, 0.5, x), x * math.cos(0.5) ** 3, atol=1e-8)

    def test_grid(self):
        g = apply_hatT(ONE, 0.3, size=33)
        assert np.allclose(g.values, 1.0)

    def test_translated_breakpoints(self):
        bps = translated_breakpoints((0.0,), 0.3)
        assert bps == pytest.approx(sorted([math.cos(math.pi / 2 + 0.3), math.cos(math.pi / 2 - 0.3)]))


class TestSpectral:
    def test_constant_unchanged(self):
        s = analyze(ONE, 6)
        assert np.allclose(apply_T_spectral(s, 0.3).coeffs, s.coeffs, atol=1e-15)

    def test_identity_scaled(self):
        s = analyze(IDENT, 6)
        out = apply_T_spectral(s, 0.6)
        assert out.coeffs[1] == pytest.approx(s.coeffs[1] * 0.6 ** 3)

    def test_y_one(self):
        s = analyze(catalog("abspow"), 12)
        assert np.allclose(apply_T_spectral(s, 1.0).coeffs, s.coeffs, atol=1e-15)

    def test_matches_quadrature(self):
        f = catalog("smoothstep:a=0,w=0.2")
        y = -0.3
        direct = analyze(Lazy(lambda u: T_values(f, y, u)), 12, 96)
        spec = apply_T_spectral(analyze(f, 12, 96), y)
        assert np.allclose(direct.coeffs, spec.coeffs, atol=1e-9)


class TestAdjoint:
    def test_same_function(self):
        f = catalog("abspow:a=0.3,s=1.5")
        lhs, rhs = adjoint_pair(f, f, 0.3, 1)
        assert lhs == rhs

    def test_one_and_x(self):
        lhs, rhs = adjoint_pair(catalog("const"), catalog("identity"), 0.3, 2)
        assert abs(lhs - rhs) <= 1e-9
        assert abs(lhs) <= 1e-12  # odd integrand

    def test_basis_pair(self):
        lhs, rhs = adjoint_pair(catalog("jacobi:n=2"), catalog("jacobi:n=3"), 0.55, 1)
        assert abs(lhs - rhs) <= 1e-9

    @pytest.mark.parametrize("k", [1, 2])
    @pytest.mark.parametrize("y", [-0.9, 0.8])
    def test_kinked_pair(self, k, y):
        lhs, rhs = adjoint_pair(catalog("abspow:a=-0.5,s=0.5"), catalog("smoothstep:a=0.4,w=0.1"), y, k)
        assert abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs))

    def test_bad_k(self):
        with pytest.raises(InvalidArgument):
            adjoint_pair(ONE, IDENT, 0.3, 3)
