"""Command-line front end.

Subcommands::

    clt-run        univariate experiment from a JSON config
    clt-multi      multivariate experiment (projection directions)
    sigma2         asymptotic variance of a model by quadrature
    cov-sum-check  block covariance sum vs sigma^2
    theta          tabulate a dependence sequence as CSV
    decompose-bv   sample a Jordan decomposition as CSV
    vh-check       window-sequence diagnostics as CSV

Exit codes: 0 on pass, 1 on a statistical fail verdict, 2 on configuration
or I/O errors.  Reports are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import __version__
from .bvdecomp import DecompositionError, jordan_decompose, piecewise_from_json
from .dependence import ThetaSequence, lip_transform_theta, qa_to_bl_theta, shift_theta
from .estimation import EstimationError, covariance_sum_check, sigma_squared
from .fields import model_from_json
from .harness import (
    BranchConditionError,
    ConfigurationError,
    config_from_json,
    qq_csv,
    report_to_json,
    run_multivariate_clt,
    run_transformed_clt,
    run_univariate_clt,
    samples_csv,
)
from .transforms import PiecewiseTransform
from .windows import Window, WindowError, diagnostics_csv, vh_diagnostics

EXIT_PASS = 0
EXIT_STAT_FAIL = 1
EXIT_CONFIG = 2


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path: str) -> dict:
    with open(path, "r") as fh:
        return json.load(fh)


def _theta_from_json(obj: dict) -> ThetaSequence:
    kind = obj.get("kind")
    if kind == "qa":
        return qa_to_bl_theta(
            obj.get("c", 1.0), obj["eps"], obj["d"], obj.get("s", 1), obj.get("varmax", 0.0)
        )
    if kind == "tabulated":
        return ThetaSequence.tabulated(obj["values"])
    if kind == "scaled":
        return lip_transform_theta(_theta_from_json(obj["base"]), obj["lip"])
    if kind == "shifted":
        return shift_theta(_theta_from_json(obj["base"]), obj["d"])
    raise ValueError(f"unknown theta kind {kind!r}")


def _cmd_clt(args, multivariate: bool) -> int:
    cfg = config_from_json(_load_json(args.config))
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        cfg = replace(cfg, **overrides)
    has_bv = any(isinstance(t, PiecewiseTransform) for t in cfg.transforms)
    if multivariate:
        runner = run_transformed_clt if has_bv else run_multivariate_clt
    else:
        runner = run_transformed_clt if has_bv else run_univariate_clt
    report = runner(cfg)
    if args.verbose:
        for r in report.directions:
            status = "skip" if r.skipped else ("pass" if r.passed else "FAIL")
            print(
                f"direction {r.direction}: D={r.ks_distance:.5f} p={r.p_value:.4f} "
                f"var={r.sample_variance:.4f}/{r.null_variance:.4f} [{status}]",
                file=sys.stderr,
            )
    if args.out:
        _atomic_write(args.out, json.dumps(report_to_json(report), indent=2) + "\n")
    if args.csv:
        _atomic_write(args.csv, samples_csv(report))
    if args.qq:
        root, ext = os.path.splitext(args.qq)
        for i in range(len(report.directions)):
            _atomic_write(f"{root}_dir{i}{ext or '.csv'}", qq_csv(report, i))
    return EXIT_PASS if report.passed else EXIT_STAT_FAIL


def _cmd_sigma2(args) -> int:
    model = model_from_json(_load_json(args.model))
    value = sigma_squared(model, args.radius, args.tol)
    print(repr(value))
    return EXIT_PASS


def _cmd_cov_sum_check(args) -> int:
    model = model_from_json(_load_json(args.model))
    result = covariance_sum_check(model, args.max_lag, args.tol)
    payload = {"block_sum": result.block_sum, "sigma2": result.sigma2, "gap": result.gap}
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, text)
    print(text, end="")
    return EXIT_PASS


def _cmd_theta(args) -> int:
    obj = _load_json(args.config)
    seq = _theta_from_json(obj)
    r_max = args.rmax if args.rmax is not None else obj.get("r_max", 20)
    lines = ["r,theta_r"]
    for r in range(1, r_max + 1):
        lines.append(f"{r},{seq(r)!r}")
    text = "\n".join(lines) + "\n"
    if args.csv:
        _atomic_write(args.csv, text)
    else:
        print(text, end="")
    return EXIT_PASS


def _cmd_decompose_bv(args) -> int:
    obj = _load_json(args.config)
    fn = piecewise_from_json(obj["function"])
    dec = jordan_decompose(fn)
    n = int(obj.get("samples", 201))
    lo, hi = fn.domain
    grid = np.linspace(lo, hi, n)
    lines = ["t,f,f_plus,f_minus,h,g_h"]
    for t in grid:
        t = float(t)
        h = dec.h(t)
        lines.append(
            f"{t!r},{fn(t)!r},{dec.f_plus(t)!r},{dec.f_minus(t)!r},{h!r},{float(dec.g(h))!r}"
        )
    text = "\n".join(lines) + "\n"
    if args.csv:
        _atomic_write(args.csv, text)
    else:
        print(text, end="")
    return EXIT_PASS


def _cmd_vh_check(args) -> int:
    obj = _load_json(args.config)
    windows = [Window.from_json(w) for w in obj["windows"]]
    text = diagnostics_csv(vh_diagnostics(windows))
    if args.csv:
        _atomic_write(args.csv, text)
    else:
        print(text, end="")
    return EXIT_PASS


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fieldclt",
        description="Monte Carlo verification of Gaussian limits for window integrals "
        "of stationary random fields.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, multi in (("clt-run", False), ("clt-multi", True)):
        p = sub.add_parser(name, help=f"run a {'multivariate' if multi else 'univariate'} experiment")
        p.add_argument("--config", required=True, help="experiment config JSON")
        p.add_argument("--out", help="write the report JSON here")
        p.add_argument("--csv", help="write projected statistic samples (rep,direction,value)")
        p.add_argument("--qq", help="write per-direction QQ CSVs with this path stem")
        p.add_argument("--seed", type=int, help="override the config master seed")
        p.add_argument("--threads", type=int, help="worker threads for replications")
        p.add_argument("--verbose", action="store_true")
        p.set_defaults(func=lambda a, m=multi: _cmd_clt(a, m))

    p = sub.add_parser("sigma2", help="asymptotic variance by quadrature")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--radius", type=float, required=True, help="truncation radius")
    p.add_argument("--tol", type=float, default=1e-8, help="absolute quadrature tolerance")
    p.set_defaults(func=_cmd_sigma2)

    p = sub.add_parser("cov-sum-check", help="block covariance sum vs sigma^2")
    p.add_argument("--model", required=True, help="model JSON")
    p.add_argument("--max-lag", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", help="write the JSON triple here")
    p.set_defaults(func=_cmd_cov_sum_check)

    p = sub.add_parser("theta", help="tabulate a dependence sequence")
    p.add_argument("--config", required=True, help="theta spec JSON")
    p.add_argument("--rmax", type=int, help="last index to tabulate")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_theta)

    p = sub.add_parser("decompose-bv", help="sample a Jordan decomposition")
    p.add_argument("--config", required=True, help="piecewise function JSON")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_decompose_bv)

    p = sub.add_parser("vh-check", help="window-sequence diagnostics")
    p.add_argument("--config", required=True, help="JSON with a windows list")
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_vh_check)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        ConfigurationError,
        BranchConditionError,
        DecompositionError,
        EstimationError,
        WindowError,
        KeyError,
        TypeError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
