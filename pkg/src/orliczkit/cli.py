"""Command-line front end.

    orliczkit young show --phi SPEC
    orliczkit gauge --phi SPEC --gamma G --fn FILE [--eps E]
    orliczkit apply --op TAG --fn FILE [--at X,X,...]
    orliczkit check {bk-p,bk-q,bk-p-remark,maximal,hilbert,aphi,aphi-general,bk-general,fourweight} ...
    orliczkit verify {theorem1,weakstrong,predicts,counterexample} ...

Every command prints one report (JSON by default).  Exit status is 0 when the
report says holds/passes/ok, 2 when it says fails/divergent/unbounded, and 1
on usage or input errors.  A point list that starts with a negative number
must be attached with '=', e.g. --at=-2,0.5.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from . import conditions as cond
from . import verify as ver
from .errors import ConfigError, NoFiniteGauge, OrliczError
from .funcspace import PowerWeight, StepFunction, gauge
from .grids import LogGrid
from .operators import apply_operator, parse_operator
from .youngfn import check_delta2, parse_young_spec

SCHEMA = 1
OK_STATUSES = {"holds", "passes", "ok"}
BAD_STATUSES = {"fails", "divergent", "unbounded"}


@dataclass
class RunConfig:
    grid_points: int = 241
    grid_lo: float = 1e-6
    grid_hi: float = 1e6
    tolerances: dict = field(default_factory=dict)
    threads: int = 1
    output: str | None = None
    format: str = "json"

    def validate(self):
        if int(self.grid_points) != self.grid_points or self.grid_points < 3:
            raise ConfigError("grid_points must be an integer >= 3")
        if not 0 < self.grid_lo < self.grid_hi or not math.isfinite(self.grid_hi):
            raise ConfigError("grid range must be positive, finite and ordered")
        if int(self.threads) != self.threads or self.threads < 1:
            raise ConfigError("threads must be a positive integer")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        unknown = set(self.tolerances) - set(cond.DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerances {sorted(unknown)}")
        return self

    def grid(self) -> LogGrid:
        return LogGrid(int(self.grid_points), float(self.grid_lo), float(self.grid_hi))

    def describe(self):
        # threads and output path never change results, so they stay out of
        # the echo and serial and parallel runs emit identical bytes
        out = asdict(self)
        out.pop("output")
        out.pop("threads")
        return out


_CONFIG_KEYS = {f for f in RunConfig.__dataclass_fields__}


def load_config(path=None, env=None, overrides=None) -> RunConfig:
    """Defaults, then the JSON file at ``path``, then ORLICZKIT_THREADS, then flags."""
    env = os.environ if env is None else env
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict) or set(data) - _CONFIG_KEYS:
            raise ConfigError(f"config keys must be among {sorted(_CONFIG_KEYS)}")
        try:
            cfg = replace(cfg, **data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
    if env.get("ORLICZKIT_THREADS"):
        try:
            cfg = replace(cfg, threads=int(env["ORLICZKIT_THREADS"]))
        except ValueError as exc:
            raise ConfigError("ORLICZKIT_THREADS must be an integer") from exc
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key == "tolerances":
            cfg = replace(cfg, tolerances={**cfg.tolerances, **val})
        else:
            cfg = replace(cfg, **{key: val})
    try:
        return cfg.validate()
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------- argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(__doc__)
        sys.stderr.write(f"\nerror: {message}\n")
        raise SystemExit(1)


def _real(text):
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return float(num) / float(den)
    return float(text)


def _reals(text):
    return [_real(x) for x in text.split(",") if x.strip()]


def _weight(text):
    """'g' or 'c:g' for c * |x|^g."""
    if ":" in text:
        c, g = text.split(":")
        return PowerWeight(_real(g), _real(c))
    return PowerWeight(_real(text))


def _common(p, seeded=False):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--json", dest="output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--threads", type=int)
    p.add_argument("--grid-points", type=int)
    p.add_argument("--grid-lo", type=float)
    p.add_argument("--grid-hi", type=float)
    p.add_argument("--c-cap", type=float)
    p.add_argument("--c-floor", type=float)
    p.add_argument("--c-rtol", type=float)
    if seeded:
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--count", type=int, default=100)


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="orliczkit", description="Power-weighted Orlicz class toolkit.")
    root.add_argument("--version", action="version", version=__version__)
    sub = root.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    young = sub.add_parser("young", help="inspect a Young function")
    ysub = young.add_subparsers(dest="action", parser_class=_Parser)
    ysub.required = True
    show = ysub.add_parser("show")
    show.add_argument("--phi", required=True)
    show.add_argument("--t", type=_reals, help="comma-separated evaluation points")
    _common(show)

    g = sub.add_parser("gauge", help="weighted gauge of a step function")
    g.add_argument("--phi", required=True)
    g.add_argument("--gamma", type=_real, default=0.0)
    g.add_argument("--eps", type=_real, default=1.0)
    g.add_argument("--fn", required=True, help="step-function JSON file")
    g.add_argument("--domain", choices=["r+", "r"], default="r+")
    _common(g)

    a = sub.add_parser("apply", help="apply an operator to a step function")
    a.add_argument("--op", required=True, help="P:p=1, Q:q=2, I, M or H")
    a.add_argument("--fn", required=True)
    a.add_argument("--at", type=_reals, help="comma-separated probe points")
    _common(a)

    check = sub.add_parser("check", help="grid check of an integral condition")
    csub = check.add_subparsers(dest="condition", parser_class=_Parser)
    csub.required = True
    for name in ("bk-p", "bk-p-remark", "bk-q"):
        c = csub.add_parser(name)
        c.add_argument("--phi1", required=True)
        c.add_argument("--phi2", required=True)
        c.add_argument("--p" if name != "bk-q" else "--q", dest="exponent", type=_real, required=True)
        c.add_argument("--gamma", type=_real, required=True)
        _common(c)
    for name in ("maximal", "hilbert", "aphi", "aphi-general", "bk-general"):
        c = csub.add_parser(name)
        c.add_argument("--phi", required=True)
        c.add_argument("--gamma", type=_real, required=True)
        _common(c)
    fw = csub.add_parser("fourweight")
    fw.add_argument("--phi1", required=True)
    fw.add_argument("--phi2", required=True)
    for k in "tuvw":
        fw.add_argument(f"--{k}", type=_weight, default=PowerWeight(0.0), help="'g' or 'c:g' for c*y^g")
    _common(fw)

    v = sub.add_parser("verify", help="empirical verification suites")
    vsub = v.add_subparsers(dest="suite", parser_class=_Parser)
    vsub.required = True
    t1 = vsub.add_parser("theorem1")
    t1.add_argument("--phi1", required=True)
    t1.add_argument("--phi2", required=True)
    t1.add_argument("--op", required=True)
    t1.add_argument("--gamma", type=_real, required=True)
    _common(t1, seeded=True)
    ws = vsub.add_parser("weakstrong")
    ws.add_argument("--phi1", required=True)
    ws.add_argument("--phi2", required=True)
    for k, default in zip("tuvw", ("0", "0", "0", "-1")):
        ws.add_argument(f"--{k}", type=_weight, default=_weight(default))
    _common(ws, seeded=True)
    pr = vsub.add_parser("predicts")
    pr.add_argument("--op", required=True)
    pr.add_argument("--phi1", required=True)
    pr.add_argument("--phi2", required=True)
    pr.add_argument("--exponent", type=_real, help="p or q for P/Q")
    pr.add_argument("--gamma", type=_real, required=True)
    _common(pr, seeded=True)
    ce = vsub.add_parser("counterexample")
    ce.add_argument("--gamma", type=_real, default=1.0)
    ce.add_argument("--kmax", type=int, default=8)
    _common(ce)
    return root


# ---------------------------------------------------------------- commands


def _read_fn(path, domain="r+"):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return StepFunction.from_json(text, domain)


def _from_condition(rep: cond.ConditionReport) -> dict:
    d = rep.to_dict()
    return {
        "status": d["status"],
        "c_min": d["c_min"],
        "witness": d["witness"],
        "values": {k: d[k] for k in ("values", "subreports", "notes") if k in d},
        "grid": d["grid"],
        "condition": d["condition"],
        "params": d["params"],
    }


def _from_equivalence(rep: ver.EquivalenceReport) -> dict:
    d = rep.to_dict()
    return {"status": d["status"], "c_min": d["constant"], "witness": d["failing_member"], "values": d}


def cmd_young(args, cfg):
    Y = parse_young_spec(args.phi)
    t = np.asarray(args.t if args.t else np.logspace(-3, 3, 13), dtype=float)
    values = {"t": t, "Phi": Y.Phi(t), "phi": Y.phi(t), "phi_inv": Y.phi_inv(t)}
    subs = {"delta2_phi": check_delta2(Y, cfg.grid()).to_dict()}
    if Y.kind == "young":
        Psi = Y.complementary()
        values["Psi"] = Psi.Phi(t)
        subs["delta2_psi"] = check_delta2(Psi, cfg.grid()).to_dict()
    values.update(subs)
    return {"status": "ok", "params": {"phi": args.phi, "kind": Y.kind}, "values": values}


def cmd_gauge(args, cfg):
    Y = parse_young_spec(args.phi)
    f = _read_fn(args.fn, args.domain)
    w = PowerWeight(args.gamma, domain=args.domain)
    params = {"phi": args.phi, "gamma": args.gamma, "eps": args.eps, "fn": f.to_json()}
    try:
        res = gauge(Y, f, w, args.eps)
    except NoFiniteGauge as exc:
        return {"status": "divergent", "params": params, "witness": {"reason": str(exc)}}
    return {"status": "ok", "params": params, "value": res.value, "values": res.to_dict()}


def cmd_apply(args, cfg):
    name, _ = parse_operator(args.op)
    domain = "r" if name in ("M", "H") else "r+"
    f = _read_fn(args.fn, domain)
    g = apply_operator(args.op, f)
    x = np.asarray(args.at if args.at else cfg.grid().values(), dtype=float)
    return {
        "status": "ok",
        "params": {"op": args.op, "fn": f.to_json()},
        "values": {"x": x, "value": g(x), "closed_form": g.describe()},
    }


def cmd_check(args, cfg):
    grid = cfg.grid()
    c = args.condition
    if c in ("bk-p", "bk-p-remark", "bk-q"):
        Phi1, Phi2 = parse_young_spec(args.phi1), parse_young_spec(args.phi2)
        fn = {"bk-p": cond.check_bk_Pp, "bk-p-remark": cond.check_bk_Pp_remark, "bk-q": cond.check_bk_Qq}[c]
        return _from_condition(fn(Phi1, Phi2, args.exponent, args.gamma, grid))
    if c == "fourweight":
        W = cond.FourWeights(args.t, args.u, args.v, args.w)
        rep = cond.check_fourweight_condition(parse_young_spec(args.phi1), parse_young_spec(args.phi2), W)
        return _from_condition(rep)
    Y = parse_young_spec(args.phi)
    if c == "maximal":
        return _from_condition(cond.check_maximal_condition(Y, args.gamma, grid))
    if c == "hilbert":
        return _from_condition(cond.check_hilbert_condition(Y, args.gamma, grid))
    if c == "aphi":
        return _from_condition(cond.check_aphi_power(Y, args.gamma))
    w = PowerWeight(args.gamma, domain="r")
    if c == "aphi-general":
        return _from_condition(cond.check_aphi_general(Y, w))
    return _from_condition(cond.check_bk_general(Y, w))


def cmd_verify(args, cfg):
    s = args.suite
    if s == "counterexample":
        rep = ver.counterexample_report(args.gamma, args.kmax, cfg.grid())
        return {"status": "passes" if rep["passes"] else "fails", "params": {"gamma": args.gamma, "kmax": args.kmax}, "values": rep}
    Phi1, Phi2 = parse_young_spec(args.phi1), parse_young_spec(args.phi2)
    if s == "weakstrong":
        W = cond.FourWeights(args.t, args.u, args.v, args.w)
        corpus = ver.Corpus(seed=args.seed, count=args.count)
        return _from_equivalence(ver.verify_weak_strong(Phi1, Phi2, W, corpus))
    name = args.op.split(":")[0].strip()
    corpus = ver.Corpus(seed=args.seed, count=args.count, domain="r" if name in ("M", "H") else "r+")
    if s == "theorem1":
        return _from_equivalence(ver.verify_gauge_modular_equiv(Phi1, Phi2, args.op, args.gamma, corpus))
    return _from_equivalence(
        ver.verify_condition_predicts(args.op, Phi1, Phi2, args.exponent, args.gamma, corpus, cfg.grid())
    )


_COMMANDS = {"young": cmd_young, "gauge": cmd_gauge, "apply": cmd_apply, "check": cmd_check, "verify": cmd_verify}


def _command_name(args):
    sub = getattr(args, "action", None) or getattr(args, "condition", None) or getattr(args, "suite", None)
    return f"{args.command} {sub}" if sub else args.command


def _argv_params(args):
    skip = {"config", "output", "format", "threads", "grid_points", "grid_lo", "grid_hi", "c_cap", "c_floor", "c_rtol"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or k in ("command", "action", "condition", "suite"):
            continue
        out[k] = v.describe() if isinstance(v, PowerWeight) else v
    return out


def build_report(args, cfg) -> dict:
    body = _COMMANDS[args.command](args, cfg)
    report = {
        "schema": SCHEMA,
        "tool_version": __version__,
        "command": _command_name(args),
        "params": {**_argv_params(args), **body.pop("params", {})},
        "status": body.pop("status"),
    }
    for key in ("c_min", "witness", "values"):
        if body.get(key) is not None:
            report[key] = body.pop(key)
        else:
            body.pop(key, None)
    report.update(body)
    report.setdefault("grid", cfg.grid().describe())
    report["tolerances"] = dict(cond.TOLERANCES)
    report["config"] = cfg.describe()
    return cond.jsonable(report)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for k, v in _flatten(report):
        writer.writerow([k, "" if v is None else v])
    return buf.getvalue()


def exit_code(status: str) -> int:
    if status in OK_STATUSES:
        return 0
    if status in BAD_STATUSES:
        return 2
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    tol = {k: getattr(args, k) for k in ("c_cap", "c_floor", "c_rtol") if getattr(args, k, None) is not None}
    try:
        cfg = load_config(
            args.config,
            overrides={
                "grid_points": args.grid_points,
                "grid_lo": args.grid_lo,
                "grid_hi": args.grid_hi,
                "threads": args.threads,
                "output": args.output,
                "format": args.format,
                "tolerances": tol or None,
            },
        )
    except ConfigError as exc:
        sys.stderr.write(f"orliczkit: {exc}\n")
        return 1
    cond.set_threads(cfg.threads)
    try:
        cond.set_tolerances(**cfg.tolerances)
        report = build_report(args, cfg)
    except (OrliczError, ValueError, KeyError) as exc:
        sys.stderr.write(f"orliczkit: {type(exc).__name__}: {exc}\n")
        return 1
    finally:
        cond.set_threads(None)
        cond.set_tolerances()
    text = render(report, cfg.format)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return exit_code(report["status"])


if __name__ == "__main__":
    raise SystemExit(main())
