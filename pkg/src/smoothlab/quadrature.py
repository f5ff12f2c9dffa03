"""Gauss rules on [-1, 1] and weighted adaptive integration.

Every rule here is strictly interior: integrands are never evaluated at
x = +-1, which matters because the translation kernels carry a 1/(1 - x^2)
prefactor.
"""
from __future__ import annotations

import csv
import functools
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betaln

from .errors import AccuracyNotReached, EvaluationError, InvalidArgument, NonIntegrableWeight


@dataclass(frozen=True)
class QuadRule:
    """Nodes and weights of a Gauss rule for ``(1 - x)^a (1 + x)^b`` on [-1, 1]."""

    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    a: float = 0.0
    b: float = 0.0
    key: tuple = field(default=(), compare=False, repr=False)

    def __len__(self):
        return self.order


def _readonly(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_order(order):
    if int(order) != order or order < 1:
        raise InvalidArgument(f"quadrature order must be a positive integer, got {order!r}")
    return int(order)


def _jacobi_recurrence(n, a, b):
    """Monic Jacobi recurrence: diagonal alpha_k and off-diagonal sqrt(beta_k)."""
    k = np.arange(n, dtype=float)
    ab = a + b
    diag = np.empty(n)
    with np.errstate(invalid="ignore", divide="ignore"):
        diag[:] = (b * b - a * a) / ((2 * k + ab) * (2 * k + ab + 2))
    diag[0] = (b - a) / (ab + 2)
    if n == 1:
        return diag, np.empty(0)
    k = np.arange(1, n, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        beta = (4 * k * (k + a) * (k + b) * (k + ab)
                / ((2 * k + ab) ** 2 * (2 * k + ab + 1) * (2 * k + ab - 1)))
    # k = 1 has a removable 0/0 when a + b = -1 (Chebyshev)
    beta[0] = 4 * (1 + a) * (1 + b) / ((2 + ab) ** 2 * (3 + ab))
    return diag, np.sqrt(beta)


@functools.lru_cache(maxsize=256)
def _golub_welsch(order, a, b):
    diag, off = _jacobi_recurrence(order, a, b)
    if order == 1:
        nodes = diag.copy()
        vec0 = np.ones(1)
    else:
        nodes, vecs = eigh_tridiagonal(diag, off)
        vec0 = vecs[0, :]
    mu0 = math.exp((a + b + 1) * math.log(2.0) + betaln(a + 1, b + 1))
    weights = mu0 * vec0 ** 2
    # symmetric weights give symmetric rules; enforce it exactly
    if a == b:
        nodes = 0.5 * (nodes - nodes[::-1])
        weights = 0.5 * (weights + weights[::-1])
    return _readonly(nodes), _readonly(weights)


def gauss_jacobi(order, a, b):
    """Gauss-Jacobi rule for the weight ``(1 - x)^a (1 + x)^b``.

    Nodes come from the symmetric tridiagonal Jacobi matrix (Golub-Welsch).
    """
    order = _check_order(order)
    if a <= -1 or b <= -1:
        raise NonIntegrableWeight(f"Jacobi weight exponents must exceed -1, got a={a}, b={b}")
    nodes, weights = _golub_welsch(order, float(a), float(b))
    kind = "legendre" if a == 0 and b == 0 else "jacobi"
    return QuadRule(kind, nodes, weights, order, float(a), float(b), (kind, order, float(a), float(b)))


def gauss_legendre(order):
    return gauss_jacobi(order, 0.0, 0.0)


@functools.lru_cache(maxsize=64)
def _chebyshev_nodes(order):
    i = np.arange(order, 0, -1)
    nodes = np.cos((2 * i - 1) * np.pi / (2 * order))
    nodes = 0.5 * (nodes - nodes[::-1])
    return _readonly(nodes), _readonly(np.full(order, np.pi / order))


def gauss_chebyshev1(order):
    """Gauss rule for ``1/sqrt(1 - z^2)``: nodes cos((2i-1)pi/2n), weights pi/n."""
    order = _check_order(order)
    nodes, weights = _chebyshev_nodes(order)
    return QuadRule("chebyshev1", nodes, weights, order, -0.5, -0.5, ("chebyshev1", order, -0.5, -0.5))


def integrate(rule, integrand):
    """Apply ``rule`` to a vectorized integrand."""
    values = np.asarray(integrand(rule.nodes), dtype=float)
    values = np.broadcast_to(values, rule.nodes.shape)
    bad = ~np.isfinite(values)
    if bad.any():
        node = float(rule.nodes[np.argmax(bad)])
        raise EvaluationError(f"integrand is not finite at node {node!r}", node=node)
    return float(np.dot(rule.weights, values))


def _panel_rule(lo, hi, order, e_minus1, e_plus1):
    """Nodes and weights for the unweighted integral over [lo, hi].

    Panels touching an endpoint with a nonzero exponent use a Gauss-Jacobi
    rule for the endpoint factor; the integrand is divided by that factor
    at the (interior) nodes, which is what the returned ``divisor`` is for.
    """
    at_left = lo == -1.0 and e_minus1 != 0.0
    at_right = hi == 1.0 and e_plus1 != 0.0
    a = e_plus1 if at_right else 0.0
    b = e_minus1 if at_left else 0.0
    rule = gauss_jacobi(order, a, b)
    half = 0.5 * (hi - lo)
    x = lo + half * (rule.nodes + 1.0)
    w = rule.weights * half
    divisor = np.ones_like(x)
    if at_left:
        w = w * half ** b
        divisor = divisor * (1.0 + x) ** b
    if at_right:
        w = w * half ** a
        divisor = divisor * (1.0 - x) ** a
    return x, w, divisor


def _segments(breakpoints):
    pts = sorted({float(p) for p in breakpoints if -1.0 < p < 1.0})
    edges = [-1.0] + pts + [1.0]
    return list(zip(edges[:-1], edges[1:]))


def integrate_adaptive(integrand, endpoint_exponents=(0.0, 0.0), tol=1e-10, breakpoints=(),
                       order=16, max_panels=4000, initial_panels=4, abs_tol=0.0):
    """Adaptive composite Gauss integral of ``integrand`` over [-1, 1].

    ``endpoint_exponents = (e_minus1, e_plus1)`` describe the integrand's
    behaviour ``(1 + x)^e_minus1`` at -1 and ``(1 - x)^e_plus1`` at +1; the end
    panels factor those out and use a Gauss-Jacobi rule, so bisection toward
    an endpoint yields geometric grading. ``breakpoints`` are interior points
    where the integrand is not smooth. ``abs_tol`` is an absolute error floor,
    either a number or a function of the current estimate, for integrands
    whose size is at the level of their own rounding noise.
    """
    e_minus1, e_plus1 = (float(e) for e in endpoint_exponents)
    if e_minus1 <= -1 or e_plus1 <= -1:
        raise NonIntegrableWeight(f"endpoint exponents must exceed -1, got {endpoint_exponents}")
    if tol <= 0:
        raise InvalidArgument("tol must be positive")

    pending = []
    for lo, hi in _segments(breakpoints):
        edges = np.linspace(lo, hi, initial_panels + 1)
        edges[0], edges[-1] = lo, hi
        pending.extend(zip(edges[:-1], edges[1:]))

    def evaluate(panels):
        # one vectorized integrand call for all panels and their halves
        xs, ws, ds = [], [], []
        for lo, hi in panels:
            mid = 0.5 * (lo + hi)
            for a, b in ((lo, hi), (lo, mid), (mid, hi)):
                x, w, d = _panel_rule(a, b, order, e_minus1, e_plus1)
                xs.append(x)
                ws.append(w)
                ds.append(d)
        x = np.concatenate(xs)
        vals = np.asarray(integrand(x), dtype=float) / np.concatenate(ds)
        if not np.all(np.isfinite(vals)):
            node = float(x[np.argmax(~np.isfinite(vals))])
            raise EvaluationError(f"integrand is not finite at node {node!r}", node=node)
        w = np.concatenate(ws)
        contrib = (w * vals).reshape(len(panels), 3, order).sum(axis=2)
        absc = (w * np.abs(vals)).reshape(len(panels), 3, order).sum(axis=2)
        return contrib, absc

    done_value = done_error = done_abs = 0.0
    active = []  # (lo, hi, value, error, abs_value)
    while True:
        if pending:
            contrib, absc = evaluate(pending)
            fine = contrib[:, 1] + contrib[:, 2]
            err = np.abs(contrib[:, 0] - fine)
            for k, (lo, hi) in enumerate(pending):
                item = (lo, hi, fine[k], err[k], absc[k, 1] + absc[k, 2])
                if hi - lo < 1e-14:
                    done_value += item[2]
                    done_error += item[3]
                    done_abs += item[4]
                else:
                    active.append(item)
        value = done_value + sum(a[2] for a in active)
        error = done_error + sum(a[3] for a in active)
        scale = max(done_abs + sum(a[4] for a in active), 1e-300)
        target = max(tol * scale, abs_tol(value) if callable(abs_tol) else abs_tol)
        if error <= target or not active:
            return float(value)
        if len(active) > max_panels:
            raise AccuracyNotReached(
                f"adaptive quadrature exceeded {max_panels} panels (error estimate {error:.3g})",
                estimate=float(value), error=float(error))
        # global budget: split every panel above its share of the tolerance
        share = target / len(active)
        worst = max(a[3] for a in active)
        keep, pending = [], []
        for item in active:
            if item[3] > share or item[3] == worst:
                lo, hi = item[0], item[1]
                mid = 0.5 * (lo + hi)
                pending.extend([(lo, mid), (mid, hi)])
            else:
                keep.append(item)
        active = keep


def graded_points(breakpoints, levels, ratio=0.5):
    """Extra cut points grading geometrically toward each interior breakpoint."""
    pts = set()
    for lo, hi in _segments(breakpoints):
        width = hi - lo
        for k in range(1, levels + 1):
            if lo > -1.0:
                pts.add(lo + width * 0.5 * ratio ** (k - 1))
            if hi < 1.0:
                pts.add(hi - width * 0.5 * ratio ** (k - 1))
    return tuple(sorted(pts | {float(p) for p in breakpoints}))


def composite_rule(order, a=0.0, b=0.0, breakpoints=(), graded_levels=0):
    """Fixed composite rule for ``int g(x) (1-x)^a (1+x)^b dx`` split at ``breakpoints``.

    Without breakpoints this is exactly ``gauss_jacobi(order, a, b)``. With
    ``graded_levels > 0`` panels next to each breakpoint shrink geometrically,
    for integrands like |x - c|^s with fractional s. Returns ``(nodes, weights)``.
    """
    if graded_levels and breakpoints:
        breakpoints = graded_points(breakpoints, graded_levels)
    segs = _segments(breakpoints)
    if len(segs) == 1:
        rule = gauss_jacobi(order, a, b)
        return rule.nodes, rule.weights
    xs, ws = [], []
    for lo, hi in segs:
        x, w, d = _panel_rule(lo, hi, order, b, a)
        # d holds the endpoint factor already absorbed by the rule
        full = (1.0 - x) ** a * (1.0 + x) ** b
        xs.append(x)
        ws.append(w * full / d)
    return np.concatenate(xs), np.concatenate(ws)


def save_rule_table(rule, directory):
    """Write a rule to ``directory`` as CSV with 17 significant digits."""
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, _table_name(rule.kind, rule.order, rule.a, rule.b))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "weight"])
        for x, w in zip(rule.nodes, rule.weights):
            writer.writerow([f"{x:.17g}", f"{w:.17g}"])
    return path


def load_rule_table(kind, order, a, b, directory):
    path = os.path.join(directory, _table_name(kind, order, a, b))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return QuadRule(kind, _readonly(data[:, 0]), _readonly(data[:, 1]), int(order), float(a), float(b),
                    (kind, order, float(a), float(b)))


def cached_rule(kind, order, a=0.0, b=0.0, directory=None):
    """Build a rule, reading from / writing to an on-disk CSV cache if given."""
    if directory is not None:
        try:
            return load_rule_table(kind, order, a, b, directory)
        except OSError:
            pass
    if kind == "chebyshev1":
        rule = gauss_chebyshev1(order)
    elif kind == "legendre":
        rule = gauss_legendre(order)
    elif kind == "jacobi":
        rule = gauss_jacobi(order, a, b)
    else:
        raise InvalidArgument(f"unknown rule kind {kind!r}")
    if directory is not None:
        save_rule_table(rule, directory)
    return rule


def _table_name(kind, order, a, b):
    return f"{kind}_n{order}_a{a!r}_b{b!r}.csv"
