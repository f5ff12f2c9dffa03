"""Weighted L_p spaces on [-1, 1]: parameters, function representations, norms.

The norm is ``|| f(x) (1-x)^alpha (1+x)^beta ||_p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import polybasis
from .errors import ClassParameterError, InvalidArgument, ParameterError, UnknownFunction
from .quadrature import integrate_adaptive


@dataclass(frozen=True)
class NormParams:
    p: float
    alpha: float
    beta: float

    def __post_init__(self):
        p = float(self.p)
        object.__setattr__(self, "p", p)
        if not p >= 1:
            raise ParameterError(f"p must be >= 1, got {p}")
        if math.isinf(p):
            if self.alpha < 0 or self.beta < 0:
                raise ParameterError("for p = inf the weight exponents must be >= 0")
        elif p * self.alpha <= -1 or p * self.beta <= -1:
            raise ParameterError(
                f"weight not integrable: p*alpha={p * self.alpha}, p*beta={p * self.beta} must exceed -1")

    @property
    def inv_p(self):
        return 0.0 if math.isinf(self.p) else 1.0 / self.p

    def shifted(self, d_alpha, d_beta):
        return NormParams(self.p, self.alpha + d_alpha, self.beta + d_beta)

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        return (1.0 - x) ** self.alpha * (1.0 + x) ** self.beta

    def label(self):
        return f"p={format_p(self.p)},alpha={self.alpha:g},beta={self.beta:g}"


def parse_p(value):
    if isinstance(value, str) and value.strip().lower() in {"inf", "infinity", "oo"}:
        return math.inf
    return float(value)


def format_p(p):
    return "inf" if math.isinf(p) else f"{p:g}"


# ---------------------------------------------------------------- function reps

class FunctionRep:
    """A real function on (-1, 1): vectorized ``__call__`` plus known kink locations."""

    def __call__(self, x):
        raise NotImplementedError

    def __add__(self, other):
        return Combination(((1.0, self), (1.0, _as_rep(other))))

    __radd__ = __add__

    def __sub__(self, other):
        return Combination(((1.0, self), (-1.0, _as_rep(other))))

    def __rsub__(self, other):
        return Combination(((1.0, _as_rep(other)), (-1.0, self)))

    def __mul__(self, c):
        if not np.isscalar(c):
            return NotImplemented
        return Combination(((float(c), self),))

    __rmul__ = __mul__

    def __neg__(self):
        return Combination(((-1.0, self),))


def _as_rep(obj):
    if isinstance(obj, FunctionRep):
        return obj
    if np.isscalar(obj):
        return constant(float(obj))
    if callable(obj):
        return Named("callable", obj)
    raise TypeError(f"cannot interpret {obj!r} as a function")


@dataclass(frozen=True, eq=False)
class Named(FunctionRep):
    """Closed-form function, usually built from a catalog id."""

    fid: str
    func: Callable
    breakpoints: tuple = ()
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape).copy()


@dataclass(frozen=True, eq=False)
class Combination(FunctionRep):
    terms: tuple

    @property
    def breakpoints(self):
        return tuple(sorted({b for _, f in self.terms for b in f.breakpoints}))

    @property
    def fid(self):
        return " + ".join(f"{c:g}*{f.fid}" for c, f in self.terms)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for c, f in self.terms:
            out += c * f(x)
        return out


@dataclass(frozen=True, eq=False)
class Lazy(FunctionRep):
    """Function defined by an evaluation routine (operator outputs)."""

    evaluate: Callable
    breakpoints: tuple = ()
    fid: str = "lazy"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        return np.asarray(self.evaluate(flat), dtype=float).reshape(x.shape)


def chebyshev_grid(size):
    """Interior Chebyshev points of the first kind, increasing."""
    j = np.arange(size)
    return -np.cos((2 * j + 1) * np.pi / (2 * size))


class Grid(FunctionRep):
    """Samples on the interior Chebyshev grid with barycentric interpolation."""

    breakpoints = ()

    def __init__(self, values, fid="grid"):
        values = np.array(values, dtype=float)
        values.setflags(write=False)
        self.values = values
        self.size = len(values)
        self.nodes = chebyshev_grid(self.size)
        j = np.arange(self.size)
        # barycentric weights for first-kind points (sign pattern follows increasing order)
        self._bw = (-1.0) ** j * np.sin((2 * j + 1) * np.pi / (2 * self.size))
        self.fid = fid

    @classmethod
    def sample(cls, f, size=257):
        if size < 8:
            raise InvalidArgument("grid size must be >= 8")
        return cls(f(chebyshev_grid(size)), fid=getattr(f, "fid", "grid"))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.shape)
        chunk = max(1, 2_000_000 // self.size)
        for s in range(0, len(flat), chunk):
            xs = flat[s:s + chunk]
            diff = xs[:, None] - self.nodes[None, :]
            exact = diff == 0.0
            diff[exact] = 1.0
            tmp = self._bw / diff
            vals = (tmp @ self.values) / tmp.sum(axis=1)
            hit = exact.any(axis=1)
            if hit.any():
                vals[hit] = self.values[np.argmax(exact[hit], axis=1)]
            out[s:s + chunk] = vals
        return out.reshape(x.shape)


class Spectral(FunctionRep):
    breakpoints = ()

    def __init__(self, spectral, fid="spectral"):
        self.spectral = spectral
        self.fid = fid

    def __call__(self, x):
        return polybasis.synthesize(self.spectral, x)


# ---------------------------------------------------------------- catalog

def constant(c=1.0):
    return Named(f"const:c={c:g}", lambda x: np.full(np.shape(x), c), params={"c": c})


def identity():
    return Named("identity", lambda x: x)


def jacobi_basis(n):
    return Named(f"jacobi:n={n}", polybasis.basis_function(n), params={"n": n})


def abspow(a=0.0, s=1.0):
    if not -1 < a < 1 or s <= 0:
        raise InvalidArgument("abspow needs a in (-1, 1) and s > 0")
    return Named(f"abspow:a={a:g},s={s:g}", lambda x: np.abs(x - a) ** s, (float(a),),
                 {"a": a, "s": s})


def smoothstep(a=0.0, w=0.2):
    if w <= 0:
        raise InvalidArgument("smoothstep width must be positive")
    return Named(f"smoothstep:a={a:g},w={w:g}", lambda x: np.tanh((x - a) / w), params={"a": a, "w": w})


_CATALOG = {
    "const": (constant, {"c": 1.0}),
    "identity": (identity, {}),
    "jacobi": (jacobi_basis, {"n": 0}),
    "abspow": (abspow, {"a": 0.0, "s": 1.0}),
    "smoothstep": (smoothstep, {"a": 0.0, "w": 0.2}),
}


def catalog(fid):
    """Build a catalog function from an id such as ``"abspow:a=0,s=1"``."""
    name, _, argtext = fid.partition(":")
    name = name.strip()
    if name in {"x", "id"}:
        name = "identity"
    if name not in _CATALOG:
        raise UnknownFunction(f"unknown function id {fid!r}; known: {sorted(_CATALOG)}")
    factory, defaults = _CATALOG[name]
    kwargs = dict(defaults)
    for item in filter(None, (s.strip() for s in argtext.split(","))):
        key, eq, val = item.partition("=")
        if not eq or key not in defaults:
            raise UnknownFunction(f"bad argument {item!r} in function id {fid!r}")
        kwargs[key] = int(val) if key == "n" else float(val)
    return factory(**kwargs)


def catalog_ids():
    """The shipped probe set used by sweeps and random-pair checks."""
    return [
        "const:c=1", "identity", "jacobi:n=2", "jacobi:n=3", "jacobi:n=5",
        "abspow:a=0,s=1", "abspow:a=0.3,s=1.5", "abspow:a=-0.5,s=0.5",
        "smoothstep:a=0,w=0.2", "smoothstep:a=0.4,w=0.1",
    ]


def nominal_order(f, params):
    """Expected decay exponent of E_n / modulus for a catalog probe, if known."""
    if isinstance(f, Named) and f.fid.startswith("abspow"):
        return f.params["s"] + params.inv_p
    return None


def is_polynomial(f):
    return isinstance(f, Named) and (f.fid.startswith(("const", "identity", "jacobi")))


# ---------------------------------------------------------------- norms

def weighted_norm(f, params, resolution=2049, tol=1e-10, floor=0.0):
    """``|| f (1-x)^alpha (1+x)^beta ||_p``.

    Finite p uses adaptive quadrature with the weight's endpoint exponents
    as hints; p = inf takes the maximum over an interior grid and refines it
    once by golden-section search around the best cell. Norms below ``floor``
    need not be resolved to relative accuracy ``tol``.
    """
    if not isinstance(params, NormParams):
        raise ParameterError("params must be NormParams")
    if resolution < 32:
        raise InvalidArgument("resolution must be >= 32")
    p, a, b = params.p, params.alpha, params.beta
    bps = getattr(f, "breakpoints", ())
    if math.isinf(p):
        return _sup_norm(f, a, b, resolution, bps)

    def integrand(x):
        return np.abs(f(x)) ** p * (1.0 - x) ** (p * a) * (1.0 + x) ** (p * b)

    def abs_tol(v):
        # an error of `floor` in f moves the integral by about p ||f||^(p-1) floor
        return p * abs(v) ** (1.0 - 1.0 / p) * floor + floor ** p

    val = integrate_adaptive(integrand, (p * b, p * a), tol=tol, breakpoints=bps,
                             abs_tol=abs_tol if floor > 0 else 0.0)
    return max(val, 0.0) ** (1.0 / p)


def _sup_norm(f, a, b, resolution, bps):
    theta = (np.arange(resolution) + 0.5) * np.pi / resolution
    x = np.sort(np.concatenate([-np.cos(theta), np.asarray(bps, dtype=float)]))
    g = np.abs(f(x)) * (1.0 - x) ** a * (1.0 + x) ** b
    i = int(np.argmax(g))
    best = float(g[i])
    lo = x[i - 1] if i > 0 else -1.0
    hi = x[i + 1] if i + 1 < len(x) else 1.0

    def neg(u):
        u = np.array([u])
        return -float(np.abs(f(u))[0] * (1.0 - u[0]) ** a * (1.0 + u[0]) ** b)

    if hi > lo:
        res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, hi - lo)})
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------- class params

@dataclass(frozen=True)
class ClassParams:
    norm: NormParams
    r: int
    lam: float | None = None

    @property
    def lambda0(self):
        n = self.norm
        half = 0.5 * n.inv_p
        return 2.0 * max(abs(n.alpha - n.beta), n.alpha - 1.5 + half, n.beta - 1.5 + half)


def validate_class(params):
    """Check the (alpha, beta) ranges for p and the lambda window; return ``(lambda0, (lambda0, 2r))``."""
    n = params.norm
    p = n.p
    if params.r < 1 or int(params.r) != params.r:
        raise ClassParameterError("r must be a positive integer", bound="r >= 1")
    for name, v in (("alpha", n.alpha), ("beta", n.beta)):
        if p == 1:
            if not 0.5 < v <= 2:
                raise ClassParameterError(f"{name}={v} violates 1/2 < {name} <= 2 for p=1",
                                          bound=f"1/2 < {name} <= 2")
        elif math.isinf(p):
            if not 1 <= v < 3:
                raise ClassParameterError(f"{name}={v} violates 1 <= {name} < 3 for p=inf",
                                          bound=f"1 <= {name} < 3")
        else:
            lo, hi = 1 - 1 / (2 * p), 3 - 1 / p
            if not lo < v < hi:
                raise ClassParameterError(
                    f"{name}={v} violates {lo:g} < {name} < {hi:g} for p={p:g}",
                    bound=f"1-1/(2p) < {name} < 3-1/p")
    lam0 = params.lambda0
    window = (lam0, 2.0 * params.r)
    if not window[0] < window[1]:
        raise ClassParameterError(f"empty lambda window ({lam0:g}, {2 * params.r})",
                                  bound="lambda0 < 2r")
    if params.lam is not None and not window[0] < params.lam < window[1]:
        raise ClassParameterError(f"lambda={params.lam:g} outside ({lam0:g}, {2 * params.r})",
                                  bound="lambda0 < lambda < 2r")
    return lam0, window


# ---------------------------------------------------------------- conversions

def to_grid(f, size=257):
    return Grid.sample(f, size)


def to_spectral(f, K, rule_order=None):
    if K < 0:
        raise InvalidArgument("K must be non-negative")
    return Spectral(polybasis.analyze(f, K, rule_order), fid=getattr(f, "fid", "spectral"))
