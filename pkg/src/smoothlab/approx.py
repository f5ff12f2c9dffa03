"""Best approximation, the Jackson kernel, Jackson-type approximants and decay fits."""
from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import linprog

from . import polybasis
from .errors import (DegreeTruncationError, InsufficientData, InvalidArgument, SolverStall,
                     UnsupportedOracle)
from .polybasis import SpectralFn
from .quadrature import composite_rule, gauss_jacobi, gauss_legendre
from .translate import DEFAULT_ZORDER, hatT_pairs
from .wspace import Grid, NormParams, chebyshev_grid

# ---------------------------------------------------------------- Jackson kernel


@dataclass(frozen=True)
class JacksonKernel:
    """A(t) = (sin(mt/2) / sin(t/2))^(2(q+2)), a cosine polynomial of degree (q+2)(m-1)."""

    q: int
    m: int

    def __post_init__(self):
        if int(self.q) != self.q or self.q < 1 or int(self.m) != self.m or self.m < 1:
            raise InvalidArgument(f"q and m must be positive integers, got q={self.q}, m={self.m}")

    @property
    def degree(self):
        return (self.q + 2) * (self.m - 1)

    @property
    def gamma_m(self):
        return kernel_gamma(self)


@functools.lru_cache(maxsize=128)
def _cosine_coeffs(q, m):
    # Fejer form: sin^2(mt/2)/sin^2(t/2) = m + 2 sum_k (m-k) cos kt
    base = np.concatenate([[m], 2.0 * (m - np.arange(1, m))]).astype(float)
    out = C.chebpow(base, q + 2)
    out.setflags(write=False)
    return out


def kernel_cosine_coeffs(k):
    """Coefficients c_j with A(t) = sum_j c_j cos(jt)."""
    return _cosine_coeffs(k.q, k.m)


def kernel_eval(k, t):
    """A(t); the removable singularity at t = 0 takes the value m^(2(q+2))."""
    t = np.asarray(t, dtype=float)
    e = 2 * (k.q + 2)
    s = np.sin(0.5 * t)
    safe = np.abs(s) > 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(safe, np.sin(0.5 * k.m * t) / np.where(safe, s, 1.0), 0.0)
    # near t = 0 use the cosine-polynomial form, which has no cancellation
    near = C.chebval(np.cos(t), kernel_cosine_coeffs(k))
    out = np.where(safe, ratio ** e, near)
    return float(out) if out.ndim == 0 else out


def _kernel_y_rule(k, extra_degree=0):
    """Gauss-Jacobi(1, 1) rule exact for A(arccos y) times a polynomial of ``extra_degree``.

    sin^3 t dt = (1 - y^2) dy, and A is a polynomial in y = cos t.
    """
    n = (k.degree + extra_degree) // 2 + 2
    rule = gauss_jacobi(n, 1.0, 1.0)
    a = C.chebval(rule.nodes, kernel_cosine_coeffs(k))
    return rule.nodes, rule.weights * a


def _t_edges(m):
    """Panel edges on [0, pi]: width pi / (2m), first panel graded geometrically toward 0."""
    edges = np.linspace(0.0, math.pi, 2 * m + 1)
    head = edges[1] * 0.5 ** np.arange(8, 0, -1)
    return np.concatenate([[0.0], head, edges[1:]])


def _panels(edges, order):
    """Gauss-Legendre nodes and weights on consecutive ``edges`` (last axis)."""
    gl = gauss_legendre(order)
    lo, hi = edges[..., :-1], edges[..., 1:]
    half = 0.5 * (hi - lo)
    t = lo[..., None] + half[..., None] * (gl.nodes + 1.0)
    w = half[..., None] * gl.weights
    return t.reshape(*edges.shape[:-1], -1), w.reshape(*edges.shape[:-1], -1)


@functools.lru_cache(maxsize=256)
def _t_rule(m, order=24):
    return _panels(_t_edges(m), order)


def _t_rule_split(m, x, bps, order=24):
    """Per-x t-rules with extra edges where hat T_t f(x) has a kink in t.

    The averaging window around arccos(x) has half-width t; it passes a kink
    arccos(b) of f at |theta_x - theta_b|, theta_x + theta_b and
    2 pi - theta_x - theta_b.
    """
    base = _t_edges(m)
    if not bps:
        t, w = _panels(base, order)
        return np.broadcast_to(t, (len(x), len(t))), np.broadcast_to(w, (len(x), len(w)))
    th = np.arccos(np.clip(x, -1.0, 1.0))[:, None]
    tb = np.arccos(np.asarray(bps, dtype=float))[None, :]
    cuts = np.concatenate([np.abs(th - tb), th + tb, 2 * np.pi - th - tb], axis=1)
    cuts = np.clip(cuts, 0.0, np.pi)
    edges = np.sort(np.concatenate([np.broadcast_to(base, (len(x), len(base))), cuts], axis=1), axis=1)
    return _panels(edges, order)


def kernel_moment(k, lam, order=24):
    """int_0^pi t^lam A(t) sin^3 t dt by graded composite quadrature."""
    t, w = _t_rule(k.m, order)
    return float(np.sum(w * t ** lam * kernel_eval(k, t) * np.sin(t) ** 3))


@functools.lru_cache(maxsize=256)
def _gamma(q, m, order):
    return kernel_moment(JacksonKernel(q, m), 0.0, order)


def kernel_gamma(k, order=24):
    """gamma_m = int_0^pi A(t) sin^3 t dt."""
    return _gamma(k.q, k.m, order)


def kernel_gamma_exact(k):
    """gamma_m from the exact y-rule; an independent check on :func:`kernel_gamma`."""
    _, w = _kernel_y_rule(k)
    return float(np.sum(w))


def jackson_moment_ratio(k, lam):
    """(m^lam / gamma_m) int t^lam A(t) sin^3 t dt."""
    return k.m ** lam * kernel_moment(k, lam) / kernel_gamma(k)


def jackson_sigma(k, Kmax):
    """sigma_j = (1/gamma_m) int (R_j(cos t) - 1) A(t) sin^3 t dt for j = 0..Kmax."""
    if Kmax < 0:
        raise InvalidArgument("Kmax must be non-negative")
    y, w = _kernel_y_rule(k, Kmax + 2)
    R = polybasis.eigenvalue_table(Kmax, y)
    return ((R - 1.0) @ w) / np.sum(w)


def jackson_approximant(f, r, k, Kmax, rule_order=None):
    """Spectral coefficients of P = (-1)^(r+1) Q.

    a_j(P) = a_j(f) (1 + (-1)^(r+1) sigma_j^r). For j above the kernel degree
    sigma_j = -1 and the multiplier vanishes.
    """
    if r < 1 or int(r) != r:
        raise InvalidArgument("r must be a positive integer")
    if Kmax < k.degree:
        raise DegreeTruncationError(f"Kmax={Kmax} < (q+2)(m-1) = {k.degree}")
    if rule_order is None:
        rule_order = max(Kmax + 2, 64) if getattr(f, "breakpoints", ()) else Kmax + 2
    a = polybasis.analyze(f, Kmax, rule_order)
    sigma = jackson_sigma(k, Kmax)
    sign = -1.0 if r % 2 == 0 else 1.0
    return SpectralFn(a.coeffs * (1.0 + sign * sigma ** r))


def _jackson_average(f, k, x, order):
    """J f(x) = (1/gamma_m) int hat T_t f(x) A(t) sin^3 t dt."""
    x = np.asarray(x, dtype=float)
    t, w = _t_rule_split(k.m, x, tuple(getattr(f, "breakpoints", ())))
    w = w * kernel_eval(k, t) * np.sin(t) ** 3
    vals = hatT_pairs(f, t, np.broadcast_to(x[:, None], t.shape), order)
    return np.sum(w * vals, axis=1) / kernel_gamma(k)


def jackson_direct(f, r, k, x=None, size=257, order=DEFAULT_ZORDER):
    """(-1)^(r+1) Q by direct quadrature over t; an oracle for r <= 2.

    r = 1 gives P = J f. For r = 2 the double integral factorizes,
    P = 2 J f - J(J f), and J f is a polynomial of degree (q+2)(m-1), so it is
    carried exactly on a Chebyshev grid between the two passes.
    """
    if r not in (1, 2):
        raise UnsupportedOracle("jackson_direct supports r = 1 and r = 2 only")
    xs = chebyshev_grid(size) if x is None else np.asarray(x, dtype=float)
    if r == 1:
        vals = _jackson_average(f, k, xs, order)
    else:
        inner = Grid(_jackson_average(f, k, chebyshev_grid(size), order), fid="Jf")
        spec = polybasis.analyze(inner, k.degree)
        vals = 2.0 * inner(xs) - _jackson_average(spec, k, xs, order)
    return Grid(vals, fid=f"jackson_direct({getattr(f, 'fid', '?')})") if x is None else vals


def m_for_n(n, q):
    """The m with (n-1)/(q+2) < m <= (n-1)/(q+2) + 1."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    return (n - 1) // (q + 2) + 1


# ---------------------------------------------------------------- best approximation

@dataclass(frozen=True)
class Poly:
    """sum_j c_j P_j^(a,b)(x), Jacobi polynomials with P(1) = 1."""

    a: float
    b: float
    coeffs: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        n = len(self.coeffs) - 1
        return np.tensordot(self.coeffs, polybasis.jacobi_table(self.a, self.b, n, x, check=False), axes=1)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    breakpoints = ()

    def spectral(self):
        return polybasis.analyze(self, self.degree)

    def to_json(self):
        return self.spectral().to_json()


@dataclass(frozen=True)
class BestApprox:
    value: float
    poly: Poly
    iterations: int = 0


def _design(n, a, b, x):
    V = polybasis.jacobi_table(a, b, n - 1, x, check=False).T
    scale = np.linalg.norm(V, axis=0)
    scale[scale == 0] = 1.0
    return V / scale, scale


def _lp_value(e, w, p):
    return float(np.sum(w * np.abs(e) ** p) ** (1.0 / p))


def _irls(fx, V, w, p, maxiter, tol, floor=1e-12):
    sw = np.sqrt(w)
    c = np.linalg.lstsq(V * sw[:, None], fx * sw, rcond=None)[0]
    e = fx - V @ c
    best_val, best_c = _lp_value(e, w, p), c
    # exact fits (f a polynomial) leave only rounding noise to iterate on
    if best_val <= 1e-14 * max(_lp_value(fx, w, p), 1e-300):
        return best_val, best_c, 0
    prev = best_val
    theta = 1.0 / (p - 1.0) if p > 2 else 1.0
    stall = 0
    for it in range(1, maxiter + 1):
        u = w * np.maximum(np.abs(e), floor) ** (p - 2.0)
        su = np.sqrt(u)
        c_new = np.linalg.lstsq(V * su[:, None], fx * su, rcond=None)[0]
        c = c + theta * (c_new - c)
        e = fx - V @ c
        val = _lp_value(e, w, p)
        if val < best_val:
            best_val, best_c = val, c
            stall = 0
        else:
            stall += 1
        if abs(val - prev) <= tol * max(val, 1e-300):
            return best_val, best_c, it
        if stall >= 5:
            raise SolverStall(f"IRLS stalled after {it} iterations (best {best_val:.6g})",
                              best=(best_val, best_c))
        prev = val
    return best_val, best_c, maxiter


def _minimax(fx, V, w, tol, maxiter=200):
    """Discrete weighted minimax by multiple exchange.

    Each round solves the minimax problem on a reference set (a small LP) and
    then adds the local maxima of the weighted error on the full grid. The
    reference level increases monotonically; stop once the grid maximum is
    within ``tol`` of it.
    """
    N, n = V.shape
    ref = np.unique(np.linspace(0, N - 1, min(N, 2 * n + 2)).round().astype(int))
    A = w[:, None] * V
    bvec = w * fx
    for it in range(1, maxiter + 1):
        Ar, br = A[ref], bvec[ref]
        # variables (c, h): minimize h s.t. |br - Ar c| <= h
        ones = np.ones((len(ref), 1))
        A_ub = np.block([[-Ar, -ones], [Ar, -ones]])
        b_ub = np.concatenate([-br, br])
        cost = np.zeros(n + 1)
        cost[-1] = 1.0
        res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(0, None)],
                      method="highs")
        if not res.success:
            raise SolverStall(f"reference LP failed: {res.message}", best=None)
        c, level = res.x[:n], res.x[-1]
        err = bvec - A @ c
        ae = np.abs(err)
        top = float(ae.max())
        if top <= level * (1.0 + tol) + 1e-15:
            return top, c, it
        # local maxima of |err| above the current level
        peaks = np.flatnonzero((ae >= np.roll(ae, 1)) & (ae >= np.roll(ae, -1)) & (ae > level))
        new = np.union1d(ref, np.append(peaks, int(np.argmax(ae))))
        if len(new) == len(ref):
            return top, c, it
        ref = new
    raise SolverStall("multiple exchange did not converge", best=(top, c))


def _sup_grid(bps, size):
    theta = (np.arange(size) + 0.5) * np.pi / size
    x = -np.cos(theta)
    extra = []
    for b in bps:
        extra.extend(b + s * 0.5 ** np.arange(2, 40) for s in (-1.0, 1.0))
        extra.append([b])
    if extra:
        x = np.concatenate([x] + [np.asarray(e) for e in extra])
    x = x[(x > -1.0) & (x < 1.0)]
    return np.unique(x)


def best_approx(f, n, params, rule_order=320, graded_levels=8, sup_grid=8000,
                tol=1e-9, maxiter=5000):
    """E_n(f): weighted distance from f to polynomials of degree <= n - 1.

    The norm is discretized once per (f, params) by a composite Gauss-Jacobi
    rule split at the kinks of f, so values for different n share a grid.
    p = 2 is a weighted least-squares solve, 1 <= p < inf uses IRLS started
    at the p = 2 solution, p = inf uses multiple exchange on a dense grid.
    """
    if n < 1 or int(n) != n:
        raise InvalidArgument("n must be a positive integer")
    if not isinstance(params, NormParams):
        raise InvalidArgument("params must be NormParams")
    if n + 2 > rule_order:
        raise InvalidArgument(f"rule_order={rule_order} too small for n={n}")
    p, al, be = params.p, params.alpha, params.beta
    bps = tuple(getattr(f, "breakpoints", ()))
    if math.isinf(p):
        x = _sup_grid(bps, sup_grid)
        w = (1.0 - x) ** al * (1.0 + x) ** be
        a = b = -0.5
    else:
        x, w = composite_rule(rule_order, p * al, p * be, bps, graded_levels=graded_levels)
        a, b = p * al, p * be
    fx = np.asarray(f(x), dtype=float)
    V, scale = _design(n, a, b, x)
    if math.isinf(p):
        val, c, it = _minimax(fx, V, w, tol)
    elif p == 2:
        sw = np.sqrt(w)
        c = np.linalg.lstsq(V * sw[:, None], fx * sw, rcond=None)[0]
        val, it = _lp_value(fx - V @ c, w, 2.0), 1
    else:
        val, c, it = _irls(fx, V, w, p, maxiter, tol)
    return BestApprox(float(val), Poly(a, b, c / scale), it)


def best_approx_sweep(f, n_list, params, **kw):
    return [best_approx(f, n, params, **kw).value for n in n_list]


def best_approx_lp(f, n, params, rule_order=320, graded_levels=8):
    """p = 1 best approximation as an exact linear program on the same discretization."""
    if params.p != 1:
        raise InvalidArgument("best_approx_lp is for p = 1")
    bps = tuple(getattr(f, "breakpoints", ()))
    x, w = composite_rule(rule_order, params.alpha, params.beta, bps, graded_levels=graded_levels)
    fx = np.asarray(f(x), dtype=float)
    V, _ = _design(n, params.alpha, params.beta, x)
    N = len(x)
    # minimize sum w s  s.t.  -s <= f - V c <= s
    cost = np.concatenate([np.zeros(n), w])
    eye = np.eye(N)
    A_ub = np.block([[-V, -eye], [V, -eye]])
    b_ub = np.concatenate([-fx, fx])
    res = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(0, None)] * N,
                  method="highs")
    if not res.success:
        raise SolverStall(f"LP failed: {res.message}", best=None)
    return float(res.fun)


# ---------------------------------------------------------------- decay fits

@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_constant: float
    residual: float
    points_used: int
    dropped: int = 0

    def to_json(self):
        return json.dumps(self.__dict__)


def decay_fit(points, orientation="n"):
    """Least-squares line through (log scale, log value).

    ``orientation="n"`` reports -slope (value ~ C n^-lambda); ``"delta"``
    reports +slope (value ~ C delta^lambda). Non-positive values are dropped.
    """
    if orientation not in ("n", "delta"):
        raise InvalidArgument("orientation must be 'n' or 'delta'")
    pts = [(float(s), float(v)) for s, v in points]
    good = [(s, v) for s, v in pts if v > 0 and s > 0 and math.isfinite(v)]
    if len(good) < 3:
        raise InsufficientData(f"need >= 3 positive points, got {len(good)}")
    ls = np.log([s for s, _ in good])
    lv = np.log([v for _, v in good])
    slope, intercept = np.polyfit(ls, lv, 1)
    resid = lv - (slope * ls + intercept)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    exponent = -slope if orientation == "n" else slope
    return DecayFit(float(exponent), float(intercept), rms, len(good), len(pts) - len(good))
