"""Jacobi polynomials normalized by P(1) = 1 and Fourier-Jacobi analysis in the P^(2,2) basis."""
from __future__ import annotations

import functools
import json
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import binom

from .errors import AliasingRiskError, DomainError, InvalidArgument, NonIntegrableWeight
from .quadrature import composite_rule, gauss_jacobi

# Fourier-Jacobi analysis always uses weight (1 - x^2)^2.
BASIS_A = 2.0
BASIS_B = 2.0


@dataclass(frozen=True)
class JacobiParams:
    a: float
    b: float

    def __post_init__(self):
        if self.a <= -1 or self.b <= -1:
            raise NonIntegrableWeight(f"Jacobi parameters must exceed -1, got ({self.a}, {self.b})")


def _as_x(x, strict=True):
    x = np.asarray(x, dtype=float)
    if strict and np.any(np.abs(x) > 1.0):
        raise DomainError("Jacobi polynomials are evaluated on [-1, 1] only")
    return x


def jacobi_table(a, b, nmax, x, check=True):
    """Rows 0..nmax of the normalized Jacobi polynomials at ``x``.

    Standard three-term recurrence, then each row divided by its value at 1,
    binom(n + a, n).
    """
    if nmax < 0:
        raise InvalidArgument("degree must be non-negative")
    if a <= -1 or b <= -1:
        raise NonIntegrableWeight(f"Jacobi parameters must exceed -1, got ({a}, {b})")
    x = _as_x(x, strict=check)
    out = np.empty((nmax + 1,) + x.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x
    ab = a + b
    for n in range(2, nmax + 1):
        c = 2 * n + ab
        a1 = 2 * n * (n + ab) * (c - 2)
        a2 = (c - 1) * (a * a - b * b)
        a3 = (c - 1) * c * (c - 2)
        a4 = 2 * (n + a - 1) * (n + b - 1) * c
        out[n] = ((a2 + a3 * x) * out[n - 1] - a4 * out[n - 2]) / a1
    scale = binom(np.arange(nmax + 1) + a, np.arange(nmax + 1))
    out /= scale.reshape((-1,) + (1,) * x.ndim)
    return out


def jacobi_eval(params, n, x):
    """Degree-``n`` Jacobi polynomial for ``params`` scaled so that P(1) = 1."""
    if n < 0:
        raise InvalidArgument("degree must be non-negative")
    return jacobi_table(params.a, params.b, n, x)[n]


def legendre_eval(n, x):
    return jacobi_table(0.0, 0.0, n, x)[n]


def eigenvalue_R(n, y):
    """Multiplier of the n-th Fourier-Jacobi coefficient under T_y.

    R_n(y) = P_{n+2}^(0,0)(y) + 3/2 (1 - y^2) P_n^(2,2)(y); works for scalar
    ``n`` or for all degrees 0..n at once via :func:`eigenvalue_table`.
    """
    if n < 0:
        raise InvalidArgument("degree must be non-negative")
    return eigenvalue_table(n, y)[n]


def eigenvalue_table(nmax, y):
    y = _as_x(y)
    leg = jacobi_table(0.0, 0.0, nmax + 2, y)[2:]
    jac = jacobi_table(BASIS_A, BASIS_B, nmax, y)
    return leg + 1.5 * (1.0 - y * y) * jac


_H_LOCK = threading.Lock()
_H_CACHE = {"n": -1, "h": np.empty(0)}


def squared_norms(nmax):
    """h_n = int (P_n^(2,2))^2 (1-x^2)^2 dx, by quadrature, cached."""
    if _H_CACHE["n"] < nmax:
        with _H_LOCK:
            if _H_CACHE["n"] < nmax:
                size = max(64, 1 << int(np.ceil(np.log2(nmax + 1))))
                rule = gauss_jacobi(size + 1, BASIS_A, BASIS_B)
                table = jacobi_table(BASIS_A, BASIS_B, size, rule.nodes)
                h = (table ** 2) @ rule.weights
                h.setflags(write=False)
                _H_CACHE["h"] = h
                _H_CACHE["n"] = size
    return _H_CACHE["h"][: nmax + 1]


@dataclass(frozen=True)
class SpectralFn:
    """Fourier-Jacobi coefficients a_0..a_K against P^(2,2) with weight (1-x^2)^2.

    Coefficients are stored unnormalized, a_n = int f P_n (1-x^2)^2 dx; the
    squared norms are applied only at synthesis.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self):
        return len(self.coeffs) - 1

    breakpoints = ()

    def __call__(self, x):
        return synthesize(self, x)

    def to_json(self):
        return json.dumps({"K": self.K, "coeffs": [float(c) for c in self.coeffs]})

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        coeffs = data["coeffs"]
        if len(coeffs) != data["K"] + 1:
            raise InvalidArgument("SpectralFn JSON: len(coeffs) must equal K + 1")
        return cls(np.asarray(coeffs, dtype=float))


def analyze(f, K, rule_order=None):
    """Fourier-Jacobi coefficients a_0..a_K of ``f`` in the P^(2,2) basis.

    The rule is gauss_jacobi(2, 2) of ``rule_order`` nodes, split into
    composite panels at ``f.breakpoints`` when the function declares any.
    """
    if K < 0:
        raise InvalidArgument("K must be non-negative")
    if rule_order is None:
        rule_order = K + 2 if not getattr(f, "breakpoints", ()) else max(K + 2, 64)
    if rule_order < K + 2:
        raise AliasingRiskError(f"rule_order={rule_order} < K + 2 = {K + 2}")
    nodes, weights = composite_rule(rule_order, BASIS_A, BASIS_B, getattr(f, "breakpoints", ()))
    values = np.asarray(f(nodes), dtype=float)
    table = jacobi_table(BASIS_A, BASIS_B, K, nodes)
    return SpectralFn(table @ (weights * values))


def synthesize(s, x):
    """Evaluate sum_n a_n / h_n P_n^(2,2)(x)."""
    x = np.asarray(x, dtype=float)
    h = squared_norms(s.K)
    table = jacobi_table(BASIS_A, BASIS_B, s.K, x, check=False)
    return np.tensordot(s.coeffs / h, table, axes=1)


@functools.lru_cache(maxsize=32)
def basis_function(n):
    """P_n^(2,2) as a vectorized callable."""
    def f(x):
        return jacobi_table(BASIS_A, BASIS_B, n, x, check=False)[n]
    return f
