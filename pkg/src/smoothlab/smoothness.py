"""Generalized differences and the generalized modulus of smoothness.

``difference`` is lazy by default: each level evaluates the translation of
the previous level by nested angular quadrature at whatever points the caller
asks for. That keeps kinks sharp at every scale, which a fixed grid cannot do
once t is much smaller than the grid spacing. Passing ``size`` materializes
every level on the interior Chebyshev grid instead.
"""
from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import polybasis
from .errors import InvalidArgument
from .polybasis import SpectralFn
from .translate import DEFAULT_ZORDER, hatT_values, translated_breakpoints
from .wspace import Grid, Lazy, Named, chebyshev_grid, weighted_norm

# angular panel order used by the modulus; ~1e-4 relative on |x - a|^s kinks
MODULUS_PANEL_ORDER = 12


@dataclass(frozen=True)
class ModulusResult:
    delta: float
    value: float
    argmax_t: tuple
    samples_used: int

    def to_json(self):
        data = asdict(self)
        data["argmax_t"] = list(self.argmax_t)
        return json.dumps(data)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        data["argmax_t"] = tuple(data["argmax_t"])
        return cls(**data)


def _steps(t):
    t = tuple(float(v) for v in np.atleast_1d(np.asarray(t, dtype=float)))
    if not t:
        raise InvalidArgument("difference needs at least one step t")
    return t


def _one_step(g, t, order, panel_order):
    bps = tuple(sorted(set(g.breakpoints) | set(translated_breakpoints(g.breakpoints, t))))
    return Lazy(lambda x: hatT_values(g, t, x, order, panel_order=panel_order) - g(x),
                bps, f"D[{t:g}]({g.fid})")


def difference(f, t, size=None, order=DEFAULT_ZORDER, panel_order=None):
    """r-th generalized difference with steps ``t = (t_1, ..., t_r)``."""
    steps = _steps(t)
    g = f
    for ti in steps:
        if size is None:
            g = _one_step(g, ti, order, panel_order)
        else:
            x = chebyshev_grid(size)
            g = Grid(hatT_values(g, ti, x, order, panel_order=panel_order) - g(x),
                     fid=f"D[{ti:g}]({g.fid})")
    return g


def difference_spectral(s, t):
    """Multiply coefficient k by prod_i (R_k(cos t_i) - 1)."""
    steps = _steps(t)
    factor = np.ones(s.K + 1)
    for ti in steps:
        factor *= polybasis.eigenvalue_table(s.K, math.cos(ti)) - 1.0
    return SpectralFn(s.coeffs * factor)


def _is_constant(f):
    return isinstance(f, Named) and f.fid.startswith("const")


def t_axis(delta, samples_per_axis):
    """0 followed by the geometric points delta * 2^-k, ending at delta."""
    k = np.arange(samples_per_axis - 2, -1, -1)
    return (0.0,) + tuple(float(delta * 0.5 ** j) for j in k)


def _check_modulus_args(r, samples_per_axis):
    if r < 1 or int(r) != r:
        raise InvalidArgument("r must be a positive integer")
    if samples_per_axis < 2:
        raise InvalidArgument("samples_per_axis must be >= 2")


def _modulus(f, r, delta, params, samples_per_axis, tol, order, workers, cache):
    if delta < 0:
        raise InvalidArgument("delta must be >= 0")
    if delta == 0 or _is_constant(f):
        return ModulusResult(float(delta), 0.0, (0.0,) * r, 0)
    axis = t_axis(delta, samples_per_axis)[1:]
    tuples = list(itertools.combinations_with_replacement(axis, r))
    todo = [t for t in tuples if t not in cache]
    if todo and "floor" not in cache:
        # differences are computed to roughly 1e-12 of ||f||; nothing below that is signal
        cache["floor"] = 1e-12 * weighted_norm(f, params)

    def norm_at(t):
        g = difference(f, t, order=order, panel_order=MODULUS_PANEL_ORDER)
        return weighted_norm(g, params, tol=tol, floor=cache["floor"])

    if workers and workers > 1 and len(todo) > 1:
        with ThreadPoolExecutor(workers) as pool:
            cache.update(zip(todo, pool.map(norm_at, todo)))
    else:
        cache.update((t, norm_at(t)) for t in todo)
    best, arg = 0.0, (0.0,) * r
    # lexicographic order, strict improvement: ties keep the smallest t
    for t in sorted(tuples):
        if cache[t] > best:
            best, arg = float(cache[t]), t
    return ModulusResult(float(delta), best, arg, len(tuples))


def modulus(f, r, delta, params, samples_per_axis=8, tol=1e-8, order=DEFAULT_ZORDER, workers=1):
    """Sampled sup of ``||Delta^r_t f||`` over t in [0, delta]^r.

    The operator is even in each t_i, so negative steps are not sampled, and
    differences commute, so only sorted tuples are evaluated. Any tuple with
    a zero component gives the zero function and is skipped.
    """
    _check_modulus_args(r, samples_per_axis)
    return _modulus(f, r, delta, params, samples_per_axis, tol, order, workers, {})


def modulus_decay(f, r, params, deltas, samples_per_axis=8, tol=1e-8, order=DEFAULT_ZORDER, workers=1):
    """Moduli for a decreasing sequence of deltas.

    Dyadic deltas share most of their sample points, so norms are cached by
    t-tuple across the sweep. Each result is the running maximum over all
    smaller deltas, which is still a lower bound for the true sup and makes
    the sequence monotone.
    """
    _check_modulus_args(r, samples_per_axis)
    deltas = [float(d) for d in deltas]
    if any(d <= 0 for d in deltas) or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise InvalidArgument("deltas must be positive and strictly decreasing")
    cache = {}
    raw = [_modulus(f, r, d, params, samples_per_axis, tol, order, workers, cache) for d in deltas]
    out = list(raw)
    for i in range(len(raw) - 2, -1, -1):
        if out[i + 1].value > raw[i].value:
            out[i] = ModulusResult(raw[i].delta, out[i + 1].value, out[i + 1].argmax_t, raw[i].samples_used)
    return out
