"""Command-line entry point.

    smoothlab <equivalence|translate|modulus|bestapprox|jackson|verify> [--config FILE] [flags]

Settings come from an optional JSON config file; command-line flags override
it. CSV output always starts with the columns
function_id,p,alpha,beta,r,scale,value; some commands append a column.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import approx, smoothness, translate, verify
from .errors import ClassParameterError, SmoothlabError
from .polybasis import synthesize
from .wspace import (ClassParams, Lazy, NormParams, catalog, chebyshev_grid, format_p, is_polynomial,
                     parse_p, validate_class, weighted_norm)

HEADER = ["function_id", "p", "alpha", "beta", "r", "scale", "value"]
COMMANDS = ("equivalence", "translate", "modulus", "bestapprox", "jackson", "verify")
LAMBDA_AGREEMENT = 0.15


@dataclass
class ExperimentConfig:
    function_id: str = "abspow:a=0,s=1"
    p: float = 2.0
    alpha: float = 1.25
    beta: float = 1.25
    r: int = 2
    q: int = 3
    n_list: list = field(default_factory=lambda: [2 ** k for k in range(2, 8)])
    delta_list: list = field(default_factory=lambda: [math.pi * 2.0 ** -N for N in range(3, 9)])
    zrule_order: int = translate.DEFAULT_ZORDER
    grid_size: int = 257
    samples_per_axis: int = 8
    tol: float = 1e-8
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    checks: list = field(default_factory=lambda: ["all"])

    @property
    def norm(self):
        return NormParams(self.p, self.alpha, self.beta)

    def row_prefix(self):
        return [self.function_id, format_p(self.p), _num(self.alpha), _num(self.beta), str(self.r)]


def _num(v):
    return repr(float(v))


def _float_list(text):
    out = []
    for item in str(text).split(","):
        item = item.strip().lower()
        if not item:
            continue
        if "pi" in item:
            # accepts "pi", "pi/8", "2*pi/3"
            out.append(float(eval(item, {"__builtins__": {}}, {"pi": math.pi})))
        else:
            out.append(float(item))
    return out


def _int_list(text):
    return [int(v) for v in _float_list(text)]


def build_parser():
    parser = argparse.ArgumentParser(prog="smoothlab", description="Weighted polynomial approximation lab.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", type=Path, help="JSON file with experiment settings")
    parser.add_argument("--function", dest="function_id", help="catalog id, e.g. abspow:a=0,s=1")
    parser.add_argument("--p", type=parse_p)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float)
    parser.add_argument("--r", type=int)
    parser.add_argument("--q", type=int)
    parser.add_argument("--n", dest="n_list", type=_int_list, help="comma-separated n values")
    parser.add_argument("--delta", dest="delta_list", type=_float_list,
                        help="comma-separated deltas (t values for translate); 'pi/8' style allowed")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--checks", type=lambda s: [c.strip() for c in s.split(",") if c.strip()],
                        help="verify: comma-separated check names or 'all'")
    return parser


def load_config(args):
    cfg = {}
    if args.config is not None:
        cfg = json.loads(Path(args.config).read_text())
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(cfg) - known
        if unknown:
            raise SmoothlabError(f"unknown config keys: {sorted(unknown)}")
        if "p" in cfg:
            cfg["p"] = parse_p(cfg["p"])
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            cfg[f.name] = v
    return ExperimentConfig(**cfg)


# ---------------------------------------------------------------- output

def _csv_text(rows, extra=()):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER + list(extra))
    writer.writerows(rows)
    return buf.getvalue()


def _emit(cfg, csv_rows, summary, extra_cols=()):
    if cfg.format == "json":
        text = json.dumps(verify._jsonable(summary), indent=2, sort_keys=True) + "\n"
        _write(cfg.out, text)
        return
    _write(cfg.out, _csv_text(csv_rows, extra_cols))
    if summary is not None and cfg.out:
        Path(cfg.out).with_suffix(".summary.json").write_text(
            json.dumps(verify._jsonable(summary), indent=2, sort_keys=True) + "\n")


def _write(path, text):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- sweeps

def _best_job(job):
    fid, n, p, a, b = job
    return approx.best_approx(catalog(fid), n, NormParams(p, a, b)).value


def e_sweep(cfg):
    jobs = [(cfg.function_id, n, cfg.p, cfg.alpha, cfg.beta) for n in cfg.n_list]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            return list(pool.map(_best_job, jobs))
    return [_best_job(j) for j in jobs]


def omega_sweep(cfg, f):
    deltas = sorted(cfg.delta_list, reverse=True)
    res = smoothness.modulus_decay(f, cfg.r, cfg.norm, deltas, cfg.samples_per_axis,
                                   tol=min(cfg.tol, 1e-6), order=cfg.zrule_order, workers=cfg.workers)
    return res


# ---------------------------------------------------------------- commands

def cmd_translate(cfg):
    f = catalog(cfg.function_id)
    x = chebyshev_grid(cfg.grid_size)
    rows, series = [], []
    for t in cfg.delta_list:
        vals = translate.hatT_values(f, t, x, cfg.zrule_order)
        rows.extend(cfg.row_prefix() + [_num(xi), _num(v), _num(t)] for xi, v in zip(x, vals))
        series.append({"t": t, "x": x.tolist(), "value": vals.tolist()})
    _emit(cfg, rows, {"command": "translate", "config": asdict(cfg), "series": series}, ["t"])
    return 0


def cmd_modulus(cfg):
    f = catalog(cfg.function_id)
    res = omega_sweep(cfg, f)
    rows = [cfg.row_prefix() + [_num(m.delta), _num(m.value)] for m in res]
    summary = {"command": "modulus", "config": asdict(cfg), "results": [json.loads(m.to_json()) for m in res]}
    try:
        summary["fit"] = asdict(approx.decay_fit([(m.delta, m.value) for m in res], "delta"))
    except SmoothlabError as exc:
        summary["fit"] = str(exc)
    _emit(cfg, rows, summary)
    return 0


def cmd_bestapprox(cfg):
    values = e_sweep(cfg)
    rows = [cfg.row_prefix() + [str(n), _num(v)] for n, v in zip(cfg.n_list, values)]
    summary = {"command": "bestapprox", "config": asdict(cfg),
               "E": [{"n": n, "value": v} for n, v in zip(cfg.n_list, values)]}
    try:
        summary["fit"] = asdict(approx.decay_fit(list(zip(cfg.n_list, values)), "n"))
    except SmoothlabError as exc:
        summary["fit"] = str(exc)
    _emit(cfg, rows, summary)
    return 0


def cmd_jackson(cfg):
    f = catalog(cfg.function_id)
    rows, reports = [], []
    for n in cfg.n_list:
        m = approx.m_for_n(n, cfg.q)
        k = approx.JacksonKernel(cfg.q, m)
        P = approx.jackson_approximant(f, cfg.r, k, k.degree + 40)
        resid = Lazy(lambda x, P=P: f(x) - synthesize(P, x), getattr(f, "breakpoints", ()))
        e = weighted_norm(resid, cfg.norm, tol=cfg.tol)
        rep = verify.check_degree_Q(f, cfg.r, cfg.q, m)
        rows.append(cfg.row_prefix() + [str(n), _num(e)])
        reports.append({"n": n, "m": m, "degree": k.degree, "error": e, "degree_check": rep.to_dict()})
    _emit(cfg, rows, {"command": "jackson", "config": asdict(cfg), "approximants": reports})
    return 0


def cmd_verify(cfg):
    reports = verify.run_checks(cfg.checks, seed=cfg.seed)
    failed = [r.name for r in reports if not r.passed]
    summary = {"command": "verify", "passed": not failed, "failed": failed,
               "reports": [r.to_dict() for r in reports]}
    if cfg.format == "json":
        _emit(cfg, None, summary)
    else:
        rows = [[r.name, format_p(cfg.p), _num(cfg.alpha), _num(cfg.beta), str(cfg.r), str(r.samples),
                 _num(r.worst), str(r.passed).lower()] for r in reports]
        _emit(cfg, rows, summary, ["passed"])
    return 1 if failed else 0


def _clean(v, scale):
    return 0.0 if abs(v) <= 1e-12 * max(scale, 1e-300) else v


def cmd_equivalence(cfg):
    cls = ClassParams(cfg.norm, cfg.r)
    try:
        lam0, window = validate_class(cls)
    except ClassParameterError as exc:
        sys.stderr.write(f"smoothlab: inadmissible class parameters: {exc} (violated: {exc.bound})\n")
        return 2
    f = catalog(cfg.function_id)
    fnorm = weighted_norm(f, cfg.norm)
    E = [_clean(v, fnorm) for v in e_sweep(cfg)]
    res = omega_sweep(cfg, f)
    W = [_clean(m.value, fnorm) for m in res]
    rows = [cfg.row_prefix() + [str(n), _num(v), "E"] for n, v in zip(cfg.n_list, E)]
    rows += [cfg.row_prefix() + [_num(m.delta), _num(v), "omega"] for m, v in zip(res, W)]
    summary = {"command": "equivalence", "config": asdict(cfg), "lambda0": lam0, "window": list(window),
               "E": [{"n": n, "value": v} for n, v in zip(cfg.n_list, E)],
               "omega": [{"delta": m.delta, "value": v, "argmax_t": list(m.argmax_t)} for m, v in zip(res, W)]}
    degenerate = None
    if all(v == 0 for v in E) and all(v == 0 for v in W):
        degenerate = "constant function"
    elif is_polynomial(f):
        degenerate = "polynomial input"
    if degenerate:
        summary.update(status=f"degenerate: {degenerate}", passed=True)
        code = 0
    else:
        fit_e = approx.decay_fit(list(zip(cfg.n_list, E)), "n")
        fit_w = approx.decay_fit([(m.delta, v) for m, v in zip(res, W)], "delta")
        agree = abs(fit_e.exponent - fit_w.exponent) <= LAMBDA_AGREEMENT
        inside = all(window[0] < x.exponent < window[1] for x in (fit_e, fit_w))
        passed = bool(agree and inside)
        summary.update(status="ok" if passed else "mismatch", passed=passed,
                       lambda_E=fit_e.exponent, lambda_omega=fit_w.exponent,
                       fit_E=asdict(fit_e), fit_omega=asdict(fit_w))
        code = 0 if passed else 1
    if cfg.format == "csv" and not cfg.out:
        sys.stderr.write(json.dumps(verify._jsonable(summary), sort_keys=True) + "\n")
    _emit(cfg, rows, summary, ["series"])
    return code


HANDLERS = {
    "equivalence": cmd_equivalence,
    "translate": cmd_translate,
    "modulus": cmd_modulus,
    "bestapprox": cmd_bestapprox,
    "jackson": cmd_jackson,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        cfg.norm  # validates (p, alpha, beta)
        return HANDLERS[args.command](cfg)
    except SmoothlabError as exc:
        sys.stderr.write(f"smoothlab: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
