"""Asymmetric generalized translation operators.

Two independent evaluation paths are provided:

* the y-form operators ``T_{1;y}``, ``T_{2;y}`` and ``T_y = T_1 + 3/2 (1-y^2) T_2``,
  integrating over z in [-1, 1] against dz / sqrt(1 - z^2);
* the t-form ``hat T_t`` integrating its own kernel over phi in [0, pi].

Both are diagonal in the P^(2,2) basis, which gives the spectral backend
:func:`apply_T_spectral`.

Functions with kinks (``breakpoints``) are handled by splitting the angular
integral where the argument R crosses a kink; smooth inputs use the
Gauss-Chebyshev rule directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import polybasis
from .errors import DomainError, InvalidArgument
from .polybasis import SpectralFn
from .quadrature import composite_rule, gauss_chebyshev1, gauss_legendre
from .wspace import Grid, Lazy, chebyshev_grid

DEFAULT_ZORDER = 48
PANEL_ORDER = 20
GRADED_ORDER = 10
GRADED_LEVELS = 8
EDGE = 1e-6
_CHUNK = 400_000


@dataclass(frozen=True)
class TranslationKernelPoint:
    x: float
    y: float
    z: float

    @property
    def R(self):
        return self.x * self.y - self.z * math.sqrt(1 - self.x ** 2) * math.sqrt(1 - self.y ** 2)


def _check_y(y):
    if abs(y) > 1:
        raise DomainError(f"|y| must be <= 1, got {y}")


def _graded_fractions(levels, ratio=0.25):
    left = np.concatenate([[0.0], ratio ** np.arange(levels, 0, -1), [0.5]])
    return np.concatenate([left, 1.0 - left[-2::-1]])


def _angular_nodes(center, halfwidth, breakpoints, order, graded=False, panel_order=None):
    """phi nodes/weights for int_0^pi g(center - halfwidth cos phi) dphi, per x.

    ``center`` and ``halfwidth`` have shape (nx,). Returns arrays (nx, M).
    Without breakpoints this is the midpoint rule in phi, i.e. Gauss-Chebyshev
    in z = cos phi. With breakpoints each panel between cuts gets a Gauss-
    Legendre rule; ``graded`` additionally subdivides every panel
    geometrically toward both ends, which restores fast convergence for
    |R - b|^s kinks with fractional s.
    """
    nx = center.shape[0]
    if not breakpoints:
        phi = np.arccos(gauss_chebyshev1(order).nodes)[::-1]
        phi = np.broadcast_to(phi, (nx, order))
        w = np.full((nx, order), np.pi / order)
        return phi, w
    bps = np.asarray(breakpoints, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = (center[:, None] - bps[None, :]) / halfwidth[:, None]
        cut = np.where(np.abs(c) < 1.0, np.arccos(np.clip(c, -1.0, 1.0)), np.pi)
    edges = np.sort(np.concatenate([np.zeros((nx, 1)), cut, np.full((nx, 1), np.pi)], axis=1), axis=1)
    if graded:
        frac = _graded_fractions(GRADED_LEVELS)
        span = edges[:, 1:] - edges[:, :-1]
        edges = (edges[:, :-1, None] + span[..., None] * frac[:-1]).reshape(nx, -1)
        edges = np.concatenate([edges, np.full((nx, 1), np.pi)], axis=1)
        gl = gauss_legendre(GRADED_ORDER)
    else:
        gl = gauss_legendre(panel_order or PANEL_ORDER)
    lo, hi = edges[:, :-1], edges[:, 1:]
    half = 0.5 * (hi - lo)
    phi = lo[..., None] + half[..., None] * (gl.nodes + 1.0)
    w = half[..., None] * gl.weights
    return phi.reshape(nx, -1), w.reshape(nx, -1)


def _with_edge_limit(values_at, x):
    """Evaluate ``values_at`` with linear extrapolation for |x| > 1 - EDGE."""
    x = np.asarray(x, dtype=float)
    near = np.abs(x) > 1.0 - EDGE
    if not near.any():
        return values_at(x)
    out = np.empty(x.shape)
    if (~near).any():
        out[~near] = values_at(x[~near])
    sgn = np.sign(x[near])
    x1, x2 = sgn * (1.0 - EDGE), sgn * (1.0 - 2 * EDGE)
    v = values_at(np.concatenate([x1, x2]))
    v1, v2 = v[: len(x1)], v[len(x1):]
    out[near] = v1 + (v1 - v2) * (np.abs(x[near]) - (1.0 - EDGE)) / EDGE
    return out


def _chunked(fn, x, per_point):
    x = np.asarray(x, dtype=float).ravel()
    step = max(1, _CHUNK // max(per_point, 1))
    if len(x) <= step:
        return fn(x)
    return np.concatenate([fn(x[s:s + step]) for s in range(0, len(x), step)])


# ---------------------------------------------------------------- y-form

def _y_form(f, y, x, order, which, graded=False):
    _check_y(y)
    c = math.sqrt(max(0.0, 1.0 - y * y))
    bps = tuple(getattr(f, "breakpoints", ()))

    def values(xs):
        s = np.sqrt(1.0 - xs * xs)
        phi, w = _angular_nodes(xs * y, s * c, bps if c > 0 else (), order, graded)
        z = np.cos(phi)
        sz2 = np.sin(phi) ** 2
        R = xs[:, None] * y - z * (s * c)[:, None]
        fR = np.asarray(f(R.ravel()), dtype=float).reshape(R.shape)
        if which == 1:
            ker = 1.0 - R * R - 2.0 * (c * c) * sz2
            return np.sum(w * ker * fR, axis=1) / (np.pi * s * s)
        return 8.0 / (3.0 * np.pi) * np.sum(w * sz2 * sz2 * fR, axis=1)

    return _with_edge_limit(lambda xs: _chunked(values, xs, _nodes_per_point(bps, order, graded)), x)


def _nodes_per_point(bps, order, graded, panel_order=None):
    if not bps:
        return order
    per_panel = GRADED_ORDER * 2 * (GRADED_LEVELS + 1) if graded else (panel_order or PANEL_ORDER)
    return (len(bps) + 1) * per_panel


def T1_values(f, y, x, zrule_order=DEFAULT_ZORDER, graded=False):
    return _y_form(f, y, x, zrule_order, 1, graded)


def T2_values(f, y, x, zrule_order=DEFAULT_ZORDER, graded=False):
    return _y_form(f, y, x, zrule_order, 2, graded)


def T_values(f, y, x, zrule_order=DEFAULT_ZORDER, graded=False):
    return (T1_values(f, y, x, zrule_order, graded)
            + 1.5 * (1.0 - y * y) * T2_values(f, y, x, zrule_order, graded))


def apply_T1(f, y, zrule_order=DEFAULT_ZORDER, size=257):
    _check_y(y)
    return Grid(T1_values(f, y, chebyshev_grid(size), zrule_order), fid=f"T1[{y:g}]")


def apply_T2(f, y, zrule_order=DEFAULT_ZORDER, size=257):
    _check_y(y)
    return Grid(T2_values(f, y, chebyshev_grid(size), zrule_order), fid=f"T2[{y:g}]")


def apply_T(f, y, zrule_order=DEFAULT_ZORDER, size=257):
    _check_y(y)
    return Grid(T_values(f, y, chebyshev_grid(size), zrule_order), fid=f"T[{y:g}]")


# ---------------------------------------------------------------- t-form

def hatT_pairs(f, t, x, order=DEFAULT_ZORDER, graded=False, panel_order=None):
    """hat T_{t_i} f evaluated at x_i for aligned arrays ``t`` and ``x``."""
    t, x = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(x, dtype=float))
    shape = x.shape
    t, x = t.ravel(), x.ravel()
    bps = tuple(getattr(f, "breakpoints", ()))
    ct, st = np.cos(t), np.sin(t)
    out = np.empty(x.shape)
    ident = st == 0.0
    ident &= ct == 1.0
    if ident.any():
        out[ident] = np.asarray(f(x[ident]), dtype=float)
    idx = np.flatnonzero(~ident)
    if len(idx) == 0:
        return out.reshape(shape)

    def values(xs, cts, sts):
        s = np.sqrt(1.0 - xs * xs)
        phi, w = _angular_nodes(xs * cts, s * sts, bps, order, graded, panel_order)
        sp2 = np.sin(phi) ** 2
        R = (xs * cts)[:, None] - (s * sts)[:, None] * np.cos(phi)
        fR = np.asarray(f(R.ravel()), dtype=float).reshape(R.shape)
        st2 = (sts * sts)[:, None]
        ker = 1.0 - R * R - 2.0 * st2 * sp2 + 4.0 * (s * s)[:, None] * st2 * sp2 * sp2
        return np.sum(w * ker * fR, axis=1) / (np.pi * s * s)

    per = _nodes_per_point(bps, order, graded, panel_order)
    step = max(1, _CHUNK // per)
    xs, cts, sts = x[idx], ct[idx], st[idx]
    res = np.empty(len(idx))
    near = np.abs(xs) > 1.0 - EDGE
    for lo in range(0, len(idx), step):
        sl = slice(lo, lo + step)
        xx = np.where(near[sl], np.sign(xs[sl]) * (1.0 - EDGE), xs[sl])
        v1 = values(xx, cts[sl], sts[sl])
        if near[sl].any():
            k = np.flatnonzero(near[sl])
            x2 = np.sign(xx[k]) * (1.0 - 2 * EDGE)
            v2 = values(x2, cts[sl][k], sts[sl][k])
            v1[k] = v1[k] + (v1[k] - v2) * (np.abs(xs[sl][k]) - (1.0 - EDGE)) / EDGE
        res[sl] = v1
    out[idx] = res
    return out.reshape(shape)


def hatT_values(f, t, x, order=DEFAULT_ZORDER, graded=False, panel_order=None):
    """Direct evaluation of hat T_t f at points ``x``.

    ``panel_order`` overrides the Gauss-Legendre order used between kinks.
    """
    x = np.asarray(x, dtype=float)
    if math.sin(t) == 0.0 and math.cos(t) == 1.0:
        return np.asarray(f(x), dtype=float)
    return hatT_pairs(f, np.full(x.shape, float(t)), x, order, graded, panel_order)


def translated_breakpoints(bps, t):
    """Kinks of hat T_t f given kinks ``bps`` of f: where a window edge meets a kink."""
    if t == 0:
        return tuple(bps)
    out = set()
    for b in bps:
        th = math.acos(max(-1.0, min(1.0, b)))
        for u in (th + t, th - t):
            v = math.cos(u)
            if -1.0 < v < 1.0:
                out.add(round(v, 15))
    return tuple(sorted(out))


def translated(f, t, order=DEFAULT_ZORDER, graded=False):
    """hat T_t f as a lazily evaluated function."""
    bps = translated_breakpoints(getattr(f, "breakpoints", ()), t)
    return Lazy(lambda x: hatT_values(f, t, x, order, graded), bps, f"hatT[{t:g}]({getattr(f, 'fid', '?')})")


def apply_hatT(f, t, order=DEFAULT_ZORDER, size=257):
    return Grid(hatT_values(f, t, chebyshev_grid(size), order), fid=f"hatT[{t:g}]")


# ---------------------------------------------------------------- spectral

def apply_T_spectral(s, y):
    _check_y(y)
    return SpectralFn(s.coeffs * polybasis.eigenvalue_table(s.K, y))


# ---------------------------------------------------------------- adjointness

def adjoint_pair(f, g, y, k, zrule_order=96, rule_order=128, graded=True):
    """Both sides of  int f T_{k;y} g (1-x^2)^2 dx = int g T_{k;y} f (1-x^2)^2 dx."""
    if k not in (1, 2):
        raise InvalidArgument("k must be 1 or 2")
    op = T1_values if k == 1 else T2_values
    t = math.acos(max(-1.0, min(1.0, y)))
    fb = tuple(getattr(f, "breakpoints", ()))
    gb = tuple(getattr(g, "breakpoints", ()))
    bps = set(fb) | set(gb) | set(translated_breakpoints(fb, t)) | set(translated_breakpoints(gb, t))
    if bps and graded:
        # many short panels; per-panel order can be modest
        x, w = composite_rule(max(rule_order // 4, 16), 2.0, 2.0, tuple(sorted(bps)), graded_levels=16)
    else:
        x, w = composite_rule(rule_order, 2.0, 2.0, tuple(sorted(bps)))
    lhs = float(np.dot(w, f(x) * op(g, y, x, zrule_order, graded)))
    rhs = float(np.dot(w, g(x) * op(f, y, x, zrule_order, graded)))
    return lhs, rhs
