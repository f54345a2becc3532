"""Command-line interface: plan, bounds, integrate, adversary, verify.

Exit codes: 0 success, 1 a check failed, 2 invalid usage or input,
3 the node cap was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields

import numpy as np

from . import harness
from .adversary import FoolingFn, PointsFormatError, choose_rho, fooling_eval_mc, read_points_csv
from .bounds import plan
from .quad1d import RuleKind, make_rule, rule_error_bound_1d
from .tensor import DEFAULT_CAP, TooManyNodesError, evaluate, product_error_bound, product_rule

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_CAP = 3


class UsageError(Exception):
    """Invalid flag value; the message names the flag."""


@dataclass
class CliConfig:
    subcommand: str
    epsilon: float | list[float] | None = None
    d: int | list[int] | None = None
    r: int | list[int] = 1
    periodic: bool = False
    geometry: str = "nonperiodic"
    rule: str | None = None
    m: int | None = None
    witness: str = "bump"
    frequency: int | None = None
    points: str | None = None
    rho: float | None = None
    delta: float | None = None
    samples: int = 20000
    seed: int = 0
    suite: str | None = None
    cap: int = DEFAULT_CAP
    threads: int = 1
    output: str | None = None
    format: str | None = None

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "CliConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(ns).items() if k in names and v is not None or k == "subcommand"})

    def validate(self) -> "CliConfig":
        for eps in _as_list(self.epsilon):
            if not 0 < eps < 1:
                raise UsageError("--eps: epsilon must lie in (0,1)")
        for d in _as_list(self.d):
            if d < 1:
                raise UsageError("--d: d must be >= 1")
        for r in _as_list(self.r):
            if r < 1:
                raise UsageError("--r: r must be >= 1")
        if self.m is not None and self.m < 1:
            raise UsageError("--m: m must be >= 1")
        if self.frequency is not None and self.frequency < 0:
            raise UsageError("--frequency: frequency must be >= 0")
        if self.rho is not None and not self.rho > 0:
            raise UsageError("--rho: rho must be > 0")
        if self.delta is not None and not 0 < self.delta <= 1:
            raise UsageError("--delta: delta must lie in (0,1]")
        if self.samples < 2:
            raise UsageError("--samples: samples must be >= 2")
        if self.threads < 1:
            raise UsageError("--threads: threads must be >= 1")
        if self.cap < 1:
            raise UsageError("--cap: cap must be >= 1")
        if self.seed < 0:
            raise UsageError("--seed: seed must be >= 0")
        return self


def _as_list(v):
    if v is None:
        return []
    return v if isinstance(v, list) else [v]


# ---------------------------------------------------------------------------
# Flag parsing


def _int_grid(text: str) -> list[int]:
    """'1..20', '1,2,5' or a mix such as '1..3,10'."""
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                lo, hi = int(lo), int(hi)
                if hi < lo:
                    raise ValueError
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers or ranges like 1..20, got {text!r}") from None
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--output", "-o", help="write the report to this path instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), help="machine-readable report format")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="cubecert", description="Tensor-product cubature with certified worst-case bounds.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    sp = sub.add_parser("plan", parents=[common], help="rule size and lower bound for one (eps, d, r)")
    sp.add_argument("--eps", dest="epsilon", type=float, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--periodic", action="store_true")
    sp.add_argument("--delta", type=float)

    sp = sub.add_parser("bounds", parents=[common], help="table of bounds over a parameter grid")
    sp.add_argument("--eps", dest="epsilon", type=_float_list, required=True)
    sp.add_argument("--d", type=_int_grid, required=True)
    sp.add_argument("--r", type=_int_grid, required=True)
    sp.add_argument("--geometry", choices=("nonperiodic", "periodic", "both"), default="nonperiodic")

    sp = sub.add_parser("integrate", parents=[common], help="apply a product rule to a registered witness")
    sp.add_argument("--rule", choices=[k.value for k in RuleKind], required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--d", type=int, default=1)
    sp.add_argument("--r", type=int, default=1, help="smoothness used for the error bound")
    sp.add_argument("--witness", choices=harness.WITNESSES, default="bump")
    sp.add_argument("--frequency", type=int)
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)

    sp = sub.add_parser("adversary", parents=[common], help="fooling-function certificate for a point set")
    sp.add_argument("--points", required=True, help="CSV file, one point per line")
    sp.add_argument("--d", type=int, help="dimension (required for an empty file)")
    sp.add_argument("--r", type=int, default=1)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--eps", dest="epsilon", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--periodic", action="store_true")
    sp.add_argument("--samples", type=int, default=20000)

    sp = sub.add_parser("verify", parents=[common], help="run a verification suite")
    sp.add_argument("--suite", choices=(*harness.SUITES, "all"), required=True)
    return p


# ---------------------------------------------------------------------------
# Output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)  # 'inf', 'nan'
    if hasattr(obj, "value") and isinstance(obj.value, str):  # enums
        return obj.value
    return obj


def to_json(payload: dict) -> str:
    return json.dumps(_jsonable({"schema_version": SCHEMA_VERSION, **payload}), sort_keys=True, indent=2) + "\n"


def to_csv(rows: list[dict], header=None) -> str:
    header = header or list(rows[0]) if rows else header or []
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: _csv_cell(row.get(k, "")) for k in header})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(_jsonable(v), sort_keys=True)
    return v


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the same directory and rename over ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".cubecert-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg: CliConfig, text: str) -> None:
    if cfg.output:
        write_atomic(cfg.output, text)
    else:
        sys.stdout.write(text)


def _kv_text(pairs) -> str:
    return "".join(f"{k}: {v}\n" for k, v in pairs)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_plan(cfg: CliConfig) -> int:
    rep = plan(cfg.epsilon, cfg.d, cfg.r, cfg.periodic, cfg.delta)
    data = rep.to_dict()
    if cfg.format == "json":
        _emit(cfg, to_json({"command": "plan", "report": data}))
    elif cfg.format == "csv":
        row = {k: data[k] for k in ("epsilon", "n_upper", "s_star", "m", "n_lower", "delta", "consistent", "rule")}
        row.update(d=cfg.d, r=cfg.r, periodic=cfg.periodic, formula=";".join(rep.formula_ids))
        _emit(cfg, to_csv([row]))
    else:
        _emit(cfg, _kv_text([
            ("n_upper", rep.n_upper), ("s_star", "-" if rep.s_star is None else rep.s_star), ("m", rep.m),
            ("n_lower", f"{rep.n_lower:.6g}"), ("delta", f"{rep.delta:.6g}"), ("rule", rep.rule),
            ("consistent", rep.consistent), ("formulas", ", ".join(rep.formula_ids)),
        ]))
    return EXIT_OK


def cmd_bounds(cfg: CliConfig) -> int:
    rows = harness.bound_table(cfg.epsilon, cfg.d, cfg.r, cfg.geometry)
    if cfg.format == "json":
        _emit(cfg, to_json({"command": "bounds", "rows": rows}))
    else:
        _emit(cfg, harness.bound_table_csv(rows))
    return EXIT_OK


def cmd_integrate(cfg: CliConfig) -> int:
    rule = make_rule(cfg.rule, cfg.m)
    w = harness.make_witness(cfg.witness, rule, cfg.d, cfg.r, cfg.frequency)
    value = evaluate(product_rule(rule, cfg.d), w.fn, vectorized=True, cap=cfg.cap, workers=cfg.threads)
    out = {"rule": rule.kind.value, "m": cfg.m, "d": cfg.d, "r": cfg.r, "witness": w.name, "value": value}
    if w.integral is not None:
        err = abs(value - w.integral)
        out.update(integral=w.integral, error=err, norm=w.norm)
        applicable = (w.max_r is None or cfg.r <= w.max_r) and (rule.kind is not RuleKind.RECTANGLE_PERIODIC
                                                              or w.periodic)
        try:
            e1 = rule_error_bound_1d(rule.kind, cfg.m, cfg.r)
        except ValueError:
            e1 = None
        if applicable and e1 is not None:
            bound = w.norm * product_error_bound(e1, rule.abs_weight_sum, cfg.d)
            out["bound"] = bound
            if rule.kind is RuleKind.RECTANGLE_PERIODIC:
                out["ratio_to_bound"] = err / bound if bound else None
    if cfg.format == "json":
        _emit(cfg, to_json({"command": "integrate", "result": out}))
    elif cfg.format == "csv":
        _emit(cfg, to_csv([out]))
    else:
        _emit(cfg, _kv_text((k, f"{v:.17g}" if isinstance(v, float) else v) for k, v in out.items()))
    return EXIT_OK


def cmd_adversary(cfg: CliConfig) -> int:
    pts = read_points_csv(cfg.points, cfg.d)
    d = pts.d
    if cfg.rho is not None:
        rho = cfg.rho
    elif cfg.epsilon is not None:
        if cfg.delta is None:
            raise UsageError("--delta: required together with --eps")
        rho = choose_rho(cfg.epsilon, cfg.delta, d, cfg.r)
    else:
        raise UsageError("--rho: give --rho or both --eps and --delta")
    if rho > d * cfg.r:
        raise UsageError(f"--rho: rho must be <= d*r = {d * cfg.r}")
    F = FoolingFn(pts, rho, cfg.r, cfg.periodic)

    node_values = [fooling_eval_mc(F, x, 256, cfg.seed, cfg.threads)[0] for x in pts.points]
    bad_nodes = [i for i, v in enumerate(node_values) if v != 0.0]
    est = harness.nested_fooling_integral(F, cfg.samples, cfg.seed, workers=cfg.threads)
    ci = harness.SIGMAS * est.stderr
    lower = F.integral_lower_bound()
    norm = F.normalizer
    integral_ok = est.mean >= lower - ci
    report = {
        "n": F.n, "d": d, "r": cfg.r, "rho": rho, "periodic": cfg.periodic,
        "samples": cfg.samples, "seed": cfg.seed,
        "node_values_max": max(node_values, default=0.0), "nonzero_nodes": bad_nodes,
        "integral_estimate": est.mean, "integral_stderr": est.stderr, "integral_ci": ci,
        "integral_lower_bound": lower, "integral_check": integral_ok,
        "normalizer": norm,
        # the confidence margin applies to the integral, so it is removed before scaling
        "implied_error_lower_bound": max(0.0, (est.mean - ci) / norm),
    }
    if cfg.format == "json":
        _emit(cfg, to_json({"command": "adversary", "report": report}))
    elif cfg.format == "csv":
        _emit(cfg, to_csv([report]))
    else:
        lines = [(k, f"{v:.10g}" if isinstance(v, float) else v) for k, v in report.items()]
        lines.append(("statement", f"every cubature rule using these {F.n} points has worst-case error >= "
                                   f"{report['implied_error_lower_bound']:.6g} on the unit ball of C^{cfg.r}"))
        _emit(cfg, _kv_text(lines))
    for i in bad_nodes:
        print(f"node {i} {pts.points[i].tolist()}: fooling value {node_values[i]!r} != 0", file=sys.stderr)
    if not integral_ok:
        print(f"integral estimate {est.mean:.6g} below lower bound {lower:.6g} - {ci:.3g}", file=sys.stderr)
    return EXIT_CHECK if bad_nodes or not integral_ok else EXIT_OK


def cmd_verify(cfg: CliConfig) -> int:
    reports = harness.run_suite(cfg.suite, cfg.seed, cfg.threads)
    passed = all(rep.passed for rep in reports)
    if cfg.format == "json":
        text = to_json({"command": "verify", "suite": cfg.suite, "seed": cfg.seed, "passed": passed,
                        "reports": [rep.to_dict() for rep in reports]})
    elif cfg.format == "csv":
        text = to_csv([rep.to_dict() for rep in reports], ["name", "passed", "measured", "bound", "slack", "details"])
    else:
        text = "".join(rep.line() + "\n" for rep in reports)
    _emit(cfg, text)
    if cfg.output:
        for rep in reports:
            if not rep.passed:
                print(rep.line(), file=sys.stderr)
    return EXIT_OK if passed else EXIT_CHECK


COMMANDS = {
    "plan": cmd_plan,
    "bounds": cmd_bounds,
    "integrate": cmd_integrate,
    "adversary": cmd_adversary,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = CliConfig.from_namespace(ns).validate()
        return COMMANDS[cfg.subcommand](cfg)
    except UsageError as exc:
        print(f"cubecert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PointsFormatError as exc:
        print(f"cubecert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TooManyNodesError as exc:
        print(f"cubecert: error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ValueError, OSError) as exc:
        print(f"cubecert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
