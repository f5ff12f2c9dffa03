"""Executable checks for the operator identities and the approximation inequalities.

Exact identities are asserted against hard tolerances. Inequalities that hold
up to an unspecified constant are asserted as bounded ratio sequences: the
running maximum of the ratio, ordered along the asymptotic direction, must
have log-log slope <= 0.1 and no ratio may exceed 10x the median.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from . import approx, polybasis, smoothness, translate
from .errors import InvalidArgument, ParameterError
from .quadrature import composite_rule, gauss_jacobi
from .wspace import ClassParams, Lazy, NormParams, catalog, catalog_ids, nominal_order, weighted_norm

SLOPE_TOL = 0.1
SPREAD_TOL = 10.0


@dataclass(frozen=True)
class BoundExponents:
    """Exponents of the four-term bound on ||hat T_t f||."""

    gamma: float
    gamma1: float
    gamma2: float
    gamma3: float
    epsilon: float

    @classmethod
    def from_params(cls, params, epsilon=0.25):
        if not 0 < epsilon < 0.5:
            raise InvalidArgument("epsilon must lie in (0, 1/2)")
        a, b, p = params.alpha, params.beta, params.p
        g = min(a, b)
        if math.isinf(p):
            if g < 1:
                raise ParameterError("min(alpha, beta) >= 1 required for p = inf")
        elif g <= 1 - 1 / (2 * p):
            raise ParameterError(f"min(alpha, beta) > {1 - 1 / (2 * p):g} required for p = {p:g}")
        g1, g2 = max(a - b, 0.0), max(b - a, 0.0)
        if p == 1:
            g3 = g - 1 if g >= 1 else 0.0
        else:
            edge = 1.5 - 0.5 * params.inv_p
            g3 = g - edge + epsilon if g >= edge else 0.0
        return cls(g, g1, g2, g3, epsilon)


@dataclass(frozen=True)
class TransferParams:
    rho: float
    sigma: float
    lam: float

    @property
    def lambda0(self):
        return 2.0 * max(self.rho, self.sigma)


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst: float
    witness: object = None
    samples: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable(asdict(self))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def non_trending(scales, ratios, slope_tol=SLOPE_TOL, spread_tol=SPREAD_TOL):
    """Bounded-sequence test along increasing ``scales``.

    Returns ``(ok, slope, max, median)``. Zero or non-finite ratios fail.
    """
    s = np.asarray(scales, dtype=float)
    r = np.asarray(ratios, dtype=float)
    order = np.argsort(s)
    s, r = s[order], r[order]
    if len(r) < 2 or not np.all(np.isfinite(r)):
        return False, math.inf, float(np.max(r)) if len(r) else math.nan, math.nan
    run = np.maximum.accumulate(r)
    pos = run > 0
    slope = float(np.polyfit(np.log(s[pos]), np.log(run[pos]), 1)[0]) if pos.sum() >= 2 else 0.0
    med = float(np.median(r))
    top = float(np.max(r))
    ok = slope <= slope_tol and (top <= spread_tol * med if med > 0 else top == 0)
    return bool(ok), slope, top, med


# ---------------------------------------------------------------- exact checks

def check_elementary(n_samples=1_000_000, seed=0, tol=1e-12):
    """Pointwise inequalities between x, z, t and R = x cos t - z sqrt(1-x^2) sin t."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, n_samples)
    z = rng.uniform(-1, 1, n_samples)
    t = rng.uniform(0, math.pi, n_samples)
    # include the boundary case x=0, z=1, t=pi/2
    x[0], z[0], t[0] = 0.0, 1.0, math.pi / 2
    y = np.cos(t)
    sx, sy = np.sqrt(1 - x * x), np.sqrt(1 - y * y)
    R = x * y - z * sx * np.sin(t)
    oneR = 1 - R * R
    gaps = {
        "R_in_range": np.maximum(np.abs(R) - 1.0, 0.0),
        "x_z": (1 - x * x) * (1 - z * z) - oneR,
        "y_z": (1 - y * y) * (1 - z * z) - oneR,
        "square": (x * sy + y * z * sx) ** 2 - oneR,
    }
    viol = {k: float(v.max()) for k, v in gaps.items()}
    worst_key = max(viol, key=viol.get)
    i = int(np.argmax(gaps[worst_key]))
    t2 = t * t
    with np.errstate(divide="ignore", invalid="ignore"):
        consts = {
            "C_1-x^2": float(np.nanmax((1 - x * x) / (oneR + t2))),
            "C_1-x": float(np.nanmax((1 - x) / (1 - R + t2))),
            "C_1+x": float(np.nanmax((1 + x) / (1 + R + t2))),
        }
    worst = max(viol.values())
    return CheckReport("elementary", worst <= tol, worst,
                       {"x": x[i], "z": z[i], "t": t[i], "inequality": worst_key},
                       n_samples, {"violations": viol, "empirical_constants": consts})


def check_eigen(nu_max=12, tol=1e-8, n_points=25, seed=0, anchor_tol=1e-10):
    """T_1 P_nu = P_nu(x) Legendre_{nu+2}(y) and T_2 P_nu = P_nu(x) P_nu(y)."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.999, 0.999, n_points)
    ys = rng.uniform(-1, 1, n_points)
    worst, witness = 0.0, None
    for nu in range(nu_max + 1):
        f = polybasis.basis_function(nu)
        px = f(x)
        for y in ys:
            t1 = translate.T1_values(f, y, x)
            t2 = translate.T2_values(f, y, x)
            e1 = np.max(np.abs(t1 - px * polybasis.legendre_eval(nu + 2, y)))
            e2 = np.max(np.abs(t2 - px * polybasis.jacobi_eval(polybasis.JacobiParams(2, 2), nu, y)))
            for k, e in ((1, e1), (2, e2)):
                if e > worst:
                    worst, witness = float(e), {"nu": nu, "y": float(y), "k": k}
    one = lambda u: np.ones_like(u)  # noqa: E731
    anchor = 0.0
    for y in ys:
        anchor = max(anchor,
                     float(np.max(np.abs(translate.T1_values(one, y, x) - (3 * y * y - 1) / 2))),
                     float(np.max(np.abs(translate.T2_values(one, y, x) - 1.0))))
    passed = worst <= tol and anchor <= anchor_tol
    return CheckReport("eigen", passed, worst, witness, (nu_max + 1) * n_points * n_points,
                       {"anchor_error": anchor})


def _random_poly(rng, degree):
    c = rng.standard_normal(degree + 1)
    return lambda u: C.chebval(np.asarray(u, dtype=float), c)


def check_properties(kmax=12, deg_max=16, tol=1e-8, closed_tol=1e-10, seed=0, n_y=5):
    """T_y 1 = 1, T_1 = identity, a_k(T_y f) = R_k(y) a_k(f), R_0 = 1 and R_1 = y^3."""
    rng = np.random.default_rng(seed)
    x = np.linspace(-0.99, 0.99, 41)
    ys = rng.uniform(-1, 1, n_y)
    errs = {}
    errs["T_y(1)"] = max(float(np.max(np.abs(translate.T_values(lambda u: np.ones_like(u), y, x) - 1)))
                         for y in ys)
    ident = 0.0
    for d in range(deg_max + 1):
        P = _random_poly(rng, d)
        ident = max(ident, float(np.max(np.abs(translate.T_values(P, 1.0, x) - P(x)))))
    errs["T_1=identity"] = ident
    spec = 0.0
    f_abs = catalog("abspow:a=0,s=1")
    funcs = [_random_poly(rng, deg_max), f_abs]
    for f in funcs:
        a = polybasis.analyze(f, kmax, 96)
        for y in ys:
            t = math.acos(y)
            bps = translate.translated_breakpoints(getattr(f, "breakpoints", ()), t)
            g = Lazy(lambda u, y=y, f=f: translate.T_values(f, y, u, graded=True), bps)
            b = polybasis.analyze(g, kmax, 96)
            R = polybasis.eigenvalue_table(kmax, y)
            spec = max(spec, float(np.max(np.abs(b.coeffs - R * a.coeffs))))
    errs["a_k(T_y f)"] = spec
    yy = np.linspace(-1, 1, 101)
    closed = max(float(np.max(np.abs(polybasis.eigenvalue_R(0, yy) - 1))),
                 float(np.max(np.abs(polybasis.eigenvalue_R(1, yy) - yy ** 3))))
    errs["R_0,R_1 closed form"] = closed
    worst = max(errs["T_y(1)"], errs["T_1=identity"], errs["a_k(T_y f)"])
    passed = worst <= tol and closed <= closed_tol
    return CheckReport("properties", passed, max(worst, closed), max(errs, key=errs.get),
                       len(ys) * (deg_max + 1 + len(funcs)), {"errors": errs})


def default_pairs(count=20, seed=0):
    ids = catalog_ids()
    combos = list(itertools.combinations(ids, 2))
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(combos), size=min(count, len(combos)), replace=False)
    return [combos[i] for i in sorted(pick)]


def check_adjoint(pairs=None, tol=1e-8, ys=(-0.9, 0.3, 0.8), ks=(1, 2), seed=0):
    """int f T_{k;y} g (1-x^2)^2 = int g T_{k;y} f (1-x^2)^2 on catalog pairs."""
    pairs = default_pairs(seed=seed) if pairs is None else pairs
    worst, witness, n = 0.0, None, 0
    for fa, fb in pairs:
        f, g = catalog(fa), catalog(fb)
        for y in ys:
            for k in ks:
                lhs, rhs = translate.adjoint_pair(f, g, y, k)
                e = abs(lhs - rhs) / (1 + abs(lhs))
                n += 1
                if e >= worst:
                    worst, witness = e, {"f": fa, "g": fb, "y": y, "k": k, "lhs": lhs, "rhs": rhs}
    return CheckReport("adjoint", worst <= tol, worst, witness, n)


def check_evenness(fid="abspow:a=0.3,s=1.5", ts=(0.1, 0.4, 1.0), tol=1e-10, params=None, seed=0):
    """hat T_{-t} = hat T_t, and a mixed-sign difference has the same norm as its |t| version."""
    f = catalog(fid)
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.99, 0.99, 50)
    worst = 0.0
    for t in ts:
        worst = max(worst, float(np.max(np.abs(translate.hatT_values(f, -t, x) - translate.hatT_values(f, t, x)))))
    params = params or NormParams(2, 1.25, 1.25)
    a = weighted_norm(smoothness.difference(f, (ts[0], -ts[1])), params)
    b = weighted_norm(smoothness.difference(f, (ts[0], ts[1])), params)
    mixed = abs(a - b) / max(b, 1e-300)
    return CheckReport("evenness", max(worst, mixed) <= tol, max(worst, mixed), {"f": fid}, len(ts) * len(x) + 1,
                       {"pointwise": worst, "mixed_sign_norm": mixed})


def check_degree_Q(f="abspow:a=0,s=1", r=2, q=2, m=4, tol=1e-8, pad=40):
    """Spectral mass of the Jackson approximant above (q+2)(m-1), relative to the total."""
    fn = catalog(f) if isinstance(f, str) else f
    k = approx.JacksonKernel(q, m)
    P = approx.jackson_approximant(fn, r, k, k.degree + pad)
    total = float(np.linalg.norm(P.coeffs))
    tail = float(np.linalg.norm(P.coeffs[k.degree + 1:])) / total if total else 0.0
    at_bound = float(abs(P.coeffs[k.degree])) / total if total else 0.0
    return CheckReport("degree_Q", tail <= tol, tail, {"f": getattr(fn, "fid", str(f)), "r": r, "q": q, "m": m},
                       k.degree + pad + 1, {"degree": k.degree, "mass_at_degree": at_bound})


def check_jackson_direct(f="abspow:a=0,s=1", r=1, q=2, m=4, tol=1e-5, n_points=20):
    """Spectral approximant against direct quadrature over t at sample points."""
    fn = catalog(f) if isinstance(f, str) else f
    k = approx.JacksonKernel(q, m)
    x = np.linspace(-0.95, 0.95, n_points)
    P = approx.jackson_approximant(fn, r, k, k.degree + 40)
    d = approx.jackson_direct(fn, r, k, x=x)
    err = float(np.max(np.abs(polybasis.synthesize(P, x) - d)))
    return CheckReport("jackson_direct", err <= tol, err, {"r": r, "q": q, "m": m}, n_points)


# ---------------------------------------------------------------- bounded-ratio checks

def _report_bounded(name, scales, ratios, witness_labels, samples, extra=None):
    ok, slope, top, med = non_trending(scales, ratios)
    i = int(np.argmax(ratios))
    details = {"slope": slope, "median": med, "scales": list(scales), "ratios": list(ratios)}
    details.update(extra or {})
    return CheckReport(name, ok, top, witness_labels[i], samples, details)


def check_jackson_moments(q=3, lams=None, ms=(4, 8, 16, 32, 64)):
    """(m^lam / gamma_m) int t^lam A sin^3 t dt bounded in m, for lam < 2q."""
    lams = (1.0, 2 * q - 0.5) if lams is None else lams
    reports = []
    for lam in lams:
        ratios = [approx.jackson_moment_ratio(approx.JacksonKernel(q, m), lam) for m in ms]
        reports.append(_report_bounded(f"jackson_moments[lam={lam:g}]", ms, ratios,
                                       [{"m": m, "lam": lam} for m in ms], len(ms)))
    ok = all(r.passed for r in reports)
    worst = max(r.details["slope"] for r in reports)
    return CheckReport("jackson_moments", ok, worst, {"q": q}, sum(r.samples for r in reports),
                       {"per_lambda": [r.to_dict() for r in reports]})


def _poly_norms(values, params, w_rule, nodes):
    """Weighted norms of many polynomials sampled at ``nodes`` (rows of ``values``)."""
    p = params.p
    if math.isinf(p):
        wt = (1 - nodes) ** params.alpha * (1 + nodes) ** params.beta
        return np.max(np.abs(values) * wt, axis=1)
    return (np.abs(values) ** p @ w_rule) ** (1.0 / p)


def _norm_rule(params, size):
    if math.isinf(params.p):
        theta = (np.arange(size) + 0.5) * np.pi / size
        return -np.cos(theta), None
    rule = gauss_jacobi(size, params.p * params.alpha, params.p * params.beta)
    return rule.nodes, rule.weights


def check_bernstein_markov(params, rho=0.5, sigma=0.5, n_list=(2, 4, 8, 16, 32, 64), trials=200, seed=0,
                           size=512):
    """Markov-Bernstein and weight-shift inequalities on random Chebyshev-coefficient polynomials."""
    if not isinstance(params, NormParams):
        raise ParameterError("params must be NormParams")
    if rho < 0 or sigma < 0:
        raise ParameterError("rho and sigma must be >= 0")
    rng = np.random.default_rng(seed)
    shifted_d = params.shifted(0.5, 0.5)
    shifted_rs = params.shifted(rho, sigma)
    rules = {id(pr): _norm_rule(pr, size) for pr in (params, shifted_d, shifted_rs)}
    r1, r2 = [], []
    for n in n_list:
        coef = rng.standard_normal((trials, n))
        dcoef = C.chebder(coef, axis=1) if n > 1 else np.zeros((trials, 1))

        def norms(c, pr):
            x, w = rules[id(pr)]
            return _poly_norms(C.chebval(x, c.T), pr, w, x)

        base = norms(coef, params)
        r1.append(float(np.max(norms(dcoef, shifted_d) / (n * base))))
        r2.append(float(np.max(base / (n ** (2 * max(rho, sigma)) * norms(coef, shifted_rs)))))
    rep1 = _report_bounded("markov", n_list, r1, [{"n": n} for n in n_list], trials * len(n_list))
    rep2 = _report_bounded("weight_shift", n_list, r2, [{"n": n} for n in n_list], trials * len(n_list))
    ok = rep1.passed and rep2.passed
    return CheckReport("bernstein_markov", ok, max(rep1.details["slope"], rep2.details["slope"]),
                       {"params": params.label(), "rho": rho, "sigma": sigma}, 2 * trials * len(n_list),
                       {"ratio1": rep1.to_dict(), "ratio2": rep2.to_dict()})


def default_t_grid():
    return tuple(float(v) for v in np.geomspace(0.01, 1.0, 7))


def check_bound_T(params, exponents=None, t_grid=None, catalog_subset=None, tol=1e-8):
    """||hat T_t f|| against the four-term bound; the ratio must stay bounded as t -> 0."""
    exponents = exponents or BoundExponents.from_params(params)
    t_grid = default_t_grid() if t_grid is None else tuple(t_grid)
    ids = catalog_ids() if catalog_subset is None else list(catalog_subset)
    g1, g2, g3 = exponents.gamma1, exponents.gamma2, exponents.gamma3
    shifts = [(0.0, 0.0, 0.0), (g1, g2, 2 * (g1 + g2)), (g3, g3, 2 * g3),
              (g1 + g3, g2 + g3, 2 * (g1 + g2 + g3))]
    worst_per_t, witnesses = [], []
    for t in t_grid:
        best, arg = 0.0, None
        for fid in ids:
            f = catalog(fid)
            lhs = weighted_norm(translate.translated(f, t), params, tol=1e-8)
            rhs = sum(t ** e * weighted_norm(f, params.shifted(-da, -db), tol=1e-8) for da, db, e in shifts)
            ratio = lhs / rhs if rhs > 0 else (0.0 if lhs <= tol else math.inf)
            if ratio >= best:
                best, arg = ratio, {"f": fid, "t": t}
        worst_per_t.append(best)
        witnesses.append(arg)
    # sweep runs in increasing t: the extra terms of the bound exist to control
    # growth as t grows, while t -> 0 tends to the trivial limit ||f|| / RHS(0)
    rep = _report_bounded("bound_T", list(t_grid), worst_per_t, witnesses,
                          len(t_grid) * len(ids), {"exponents": asdict(exponents), "params": params.label()})
    return rep


def _lambda_for(f, params, lam):
    if lam is not None:
        return float(lam)
    nominal = nominal_order(f, params)
    if nominal is None:
        raise InvalidArgument(f"no nominal smoothness for {getattr(f, 'fid', f)}; pass lambda explicitly")
    return nominal


def check_rho_sigma(f="abspow:a=0,s=1", transfer=None, params=None, N_max=6):
    """Polynomials good in the heavier weight stay good in the lighter one, at rate lam - lam0."""
    fn = catalog(f) if isinstance(f, str) else f
    params = params or NormParams(2, 1.25, 1.25)
    heavy_params = None
    if transfer is None:
        transfer = TransferParams(0.5, 0.5, nominal_order(fn, params))
    if transfer.lam <= transfer.lambda0:
        raise InvalidArgument(f"lambda={transfer.lam:g} must exceed lambda0={transfer.lambda0:g}")
    heavy_params = params.shifted(transfer.rho, transfer.sigma)
    ns = list(range(1, N_max + 1))
    vals = []
    for n in ns:
        P = approx.best_approx(fn, 2 ** n, heavy_params).poly
        err = weighted_norm(Lazy(lambda x, P=P: fn(x) - P(x), getattr(fn, "breakpoints", ())), params, tol=1e-9)
        vals.append(err * 2 ** (n * (transfer.lam - transfer.lambda0)))
    return _report_bounded("rho_sigma", [2.0 ** n for n in ns], vals, [{"n": n} for n in ns], len(ns),
                           {"transfer": asdict(transfer), "params": params.label()})


def estimate_M_modulus(f, cls, lam, deltas, samples_per_axis=8):
    res = smoothness.modulus_decay(f, cls.r, cls.norm, deltas, samples_per_axis, tol=1e-6)
    return max(r.value / r.delta ** lam for r in res), res


def check_direct(f="abspow:a=0,s=1", cls=None, n_list=(4, 8, 16, 32, 64, 128), deltas=None):
    """E_n n^lam / M bounded, with M = sup_delta omega_r(f, delta) / delta^lam."""
    fn = catalog(f) if isinstance(f, str) else f
    cls = cls or ClassParams(NormParams(2, 1.25, 1.25), 2)
    lam = _lambda_for(fn, cls.norm, cls.lam)
    deltas = tuple(2.0 ** -k for k in range(1, 8)) if deltas is None else tuple(deltas)
    M, mods = estimate_M_modulus(fn, cls, lam, deltas)
    E = [approx.best_approx(fn, n, cls.norm).value for n in n_list]
    ratios = [e * n ** lam / M for e, n in zip(E, n_list)]
    return _report_bounded("direct", n_list, ratios, [{"n": n} for n in n_list], len(n_list) + len(deltas),
                           {"lambda": lam, "M": M, "E": E, "f": getattr(fn, "fid", str(f))})


def dyadic_N(delta):
    """N with pi / 2^N < delta <= pi / 2^(N-1)."""
    if delta <= 0:
        raise InvalidArgument("delta must be positive")
    return int(math.floor(math.log2(math.pi / delta))) + 1


def check_inverse(f="abspow:a=0,s=1", cls=None, delta_list=None):
    """omega_r(f, delta) / (M delta^lam) bounded, with M = sup_n E_n n^lam from a dyadic sweep."""
    fn = catalog(f) if isinstance(f, str) else f
    cls = cls or ClassParams(NormParams(2, 1.25, 1.25), 2)
    lam = _lambda_for(fn, cls.norm, cls.lam)
    delta_list = tuple(2.0 ** -k for k in range(1, 7)) if delta_list is None else tuple(delta_list)
    N_max = max(dyadic_N(d) for d in delta_list)
    ns = [2 ** k for k in range(0, min(N_max, 7) + 1)]
    M = max(approx.best_approx(fn, n, cls.norm).value * n ** lam for n in ns)
    mods = smoothness.modulus_decay(fn, cls.r, cls.norm, delta_list, tol=1e-6)
    ratios = [r.value / (M * r.delta ** lam) for r in mods]
    return _report_bounded("inverse", [1.0 / d for d in delta_list], ratios,
                           [{"delta": d} for d in delta_list], len(ns) + len(delta_list),
                           {"lambda": lam, "M": M, "N_max": N_max, "f": getattr(fn, "fid", str(f))})


# ---------------------------------------------------------------- registry

TRIPLES = (NormParams(2, 1.25, 1.25), NormParams(math.inf, 1, 1), NormParams(1, 1, 1))


def _all_triples(check):
    def run(**kw):
        reps = [check(pr, **kw) for pr in TRIPLES]
        worst = max(r.worst for r in reps)
        return CheckReport(reps[0].name, all(r.passed for r in reps), worst, None,
                           sum(r.samples for r in reps), {"per_params": [r.to_dict() for r in reps]})
    return run


CHECKS = {
    "elementary": check_elementary,
    "eigen": check_eigen,
    "properties": check_properties,
    "adjoint": check_adjoint,
    "evenness": check_evenness,
    "degree_Q": check_degree_Q,
    "jackson_direct": check_jackson_direct,
    "jackson_moments": check_jackson_moments,
    "bernstein_markov": _all_triples(check_bernstein_markov),
    "bound_T": _all_triples(check_bound_T),
    "rho_sigma": check_rho_sigma,
    "direct": check_direct,
    "inverse": check_inverse,
}


def run_checks(names=None, seed=0):
    """Run checks by name (all when ``names`` is None); reports in the order requested."""
    names = list(CHECKS) if not names or names == ["all"] else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise InvalidArgument(f"unknown checks {unknown}; known: {sorted(CHECKS)}")
    out = []
    for name in names:
        fn = CHECKS[name]
        kwargs = {"seed": seed} if "seed" in fn.__code__.co_varnames else {}
        out.append(fn(**kwargs))
    return out


def reports_json(reports):
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)
