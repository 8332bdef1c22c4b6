"""Command-line entry point: ``wavepeel <subcommand>``.

Primary outputs (CSV/JSON) are pure functions of flags, config and seeds.
Timestamps and progress go to ``<out-dir>/<command>.log`` or stderr only.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import benchlab, ggd
from .detmap import critical_constant, fm_bound
from .errors import ConfigError, ConvergenceError, DomainError, EstimationError, RegimeError
from .peeling import (
    ExactFixedPoint,
    FixedIterations,
    PeelingConfig,
    THRESHOLD_NAMES,
    apply_threshold,
    catalog_factors,
    log_iterations,
    run_peeling,
    threshold_catalog,
)
from .signalio import format_signal, read_signal, write_signal
from .wavelet import default_levels, dwt, flatten, idwt, is_power_of_two, unflatten

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4
DEFAULT_SHAPES = (0.1, 0.5, 1.0, 2.0, 3.0, 4.0)

log = logging.getLogger("wavepeel")

DENOISE_METHODS = (
    "hard",
    "soft",
    "universal",
    "sure",
    "peel-c05",
    "peel-c15",
    "peel-cm",
    "peel-hat-c05",
    "peel-hat-c15",
    "peel-hat-cm",
    "peel-m",
)


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _header(resolved):
    return "".join(f"# {k} = {v}\n" for k, v in resolved.items())


def _emit(args, name, resolved, csv_text=None, json_obj=None):
    """Write primary outputs to ``--out-dir`` (both formats) or stdout (``--format``)."""
    csv_body = None if csv_text is None else _header(resolved) + csv_text
    json_body = None
    if json_obj is not None:
        json_body = json.dumps({"config": resolved, "data": json_obj}, indent=1, sort_keys=True) + "\n"
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if csv_body is not None:
            (out / f"{name}.csv").write_text(csv_body)
        if json_body is not None:
            (out / f"{name}.json").write_text(json_body)
        return
    body = json_body if args.format == "json" and json_body is not None else csv_body
    sys.stdout.write(body if body is not None else json_body)


def _setup_logging(args, name):
    log.handlers.clear()
    log.setLevel(logging.INFO)
    if args.out_dir:
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(Path(args.out_dir) / f"{name}.log", mode="w")
    else:
        handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s"))
    log.addHandler(handler)
    log.info("started %s at %s", name, time.strftime("%Y-%m-%dT%H:%M:%S"))


# --------------------------------------------------------------------------
# subcommands


def fc_table_rows(shapes):
    rows = []
    for u in shapes:
        row = {"u": u, "F_c": "", "x_star_c": "", "F_m": "", "error": ""}
        try:
            sol = critical_constant(u)
            row.update(F_c=sol.F_c, x_star_c=sol.x_star_c, F_m=fm_bound(u))
        except (ConvergenceError, DomainError) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def cmd_fc_table(args):
    shapes = _float_list(args.u)
    rows = fc_table_rows(shapes)
    fields = ["u", "F_c", "x_star_c", "F_m", "error"]
    _emit(args, "fc_table", {"command": "fc-table", "u": args.u},
          benchlab.rows_to_csv(rows, fields), rows)
    return EXIT_SOLVER if any(r["error"] for r in rows) else EXIT_OK


def threshold_rows(sigma, u, N, seeds, base_seed):
    p = ggd.make_params(sigma, u)
    rows = []
    for i in range(seeds):
        seed = base_seed + i
        cat = threshold_catalog(sigma, u, ggd.sample(p, seed, N), N)
        rows.append({"seed": seed, "sigma": sigma, "u": u, "N": N, **cat})
    return rows


def cmd_thresholds(args):
    rows = threshold_rows(args.sigma, args.u, args.N, args.seeds, args.seed)
    fields = ["seed", "sigma", "u", "N", *THRESHOLD_NAMES]
    resolved = {"command": "thresholds", "sigma": args.sigma, "u": args.u, "N": args.N,
                "seeds": args.seeds, "seed": args.seed}
    _emit(args, "thresholds", resolved, benchlab.rows_to_csv(rows, fields), rows)
    return EXIT_OK


def denoise_signal(x, method, threshold=None, mode="hard", sigma=None, u=None,
                   wavelet="sym8", levels=None, include_approx=True):
    """Threshold the DWT of ``x`` and reconstruct. Returns (xhat, metadata)."""
    x = np.asarray(x, dtype=float)
    if not is_power_of_two(x.size) or x.size < 2:
        raise DomainError(f"signal length must be a power of two, got {x.size}")
    if method not in DENOISE_METHODS:
        raise DomainError(f"unknown method {method!r}; have {DENOISE_METHODS}")
    if levels is None:
        levels = default_levels(x.size)
    coeffs = dwt(x, wavelet, levels)
    flat, layout = flatten(coeffs, include_approx=True)
    start = 0 if include_approx else layout.approx_length
    z = flat[start:]
    meta = {"method": method, "mode": mode, "wavelet": wavelet, "levels": levels,
            "include_approx": include_approx, "N": int(z.size), "iterations": 0}

    if method in ("hard", "soft"):
        if threshold is None:
            raise DomainError(f"method {method} needs --threshold")
        T, mode = float(threshold), method
    else:
        if sigma is None or u is None:
            est = ggd.estimate_params(z)
            sigma = est.sigma if sigma is None else sigma
            u = est.u if u is None else u
            meta["estimated"] = True
        else:
            meta["estimated"] = False
        meta.update(sigma=float(sigma), u=float(u))
        if method == "universal":
            T = benchlab.universal_threshold(z.size, sigma)
        elif method == "sure":
            T = benchlab.sure_threshold(z, sigma)
        else:
            key = method.split("-")[-1]
            if method.startswith("peel-hat") or method == "peel-m":
                factors, _ = catalog_factors(u)
                # peeling is scale-equivariant, so sigma is not needed here
                if method == "peel-m":
                    rule = ExactFixedPoint()
                    F = factors["cm"]
                else:
                    rule = FixedIterations(log_iterations(z.size))
                    F = factors[key]
                tr = run_peeling(z, PeelingConfig(F, rule))
                T = tr.t_final
                meta["iterations"] = tr.iterations_run
                meta["stop_reason"] = tr.stop_reason
            else:
                T = threshold_catalog(sigma, u)[f"T_{key}"]
    meta["threshold"] = float(T)
    meta["mode"] = mode
    shrunk = apply_threshold(z, T, mode)
    xhat = idwt(unflatten(np.concatenate([flat[:start], shrunk]), layout))
    return xhat, meta


def cmd_denoise(args):
    x = read_signal(args.input)
    xhat, meta = denoise_signal(
        x, args.method, threshold=args.threshold, mode=args.mode, sigma=args.sigma, u=args.u,
        wavelet=args.wavelet, levels=args.levels, include_approx=not args.exclude_approx,
    )
    meta["input"] = str(args.input)
    src = Path(args.input)
    out_dir = Path(args.out_dir) if args.out_dir else src.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    out = Path(args.output) if args.output else out_dir / f"{src.stem}.denoised{src.suffix or '.csv'}"
    write_signal(out, xhat)
    Path(str(out) + ".json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    log.info("wrote %s (threshold %.6g)", out, meta["threshold"])
    return EXIT_OK


def cmd_sample(args):
    values = ggd.sample(ggd.make_params(args.sigma, args.u), args.seed, args.n)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_signal(out / f"sample.{args.format}", values)
    else:
        sys.stdout.write(format_signal(values, args.format))
    return EXIT_OK


def _load_config(path, cls, seed):
    text = Path(path).read_text()
    cfg = benchlab.parse_config(text, cls)
    if seed is not None:
        cfg = dataclasses.replace(cfg, base_seed=seed)
    return cfg


def cmd_bench(args):
    cfg = _load_config(args.config, benchlab.ExperimentConfig, args.seed)
    log.info("resolved config:\n%s", benchlab.format_config(cfg))
    report = benchlab.run_denoise_experiment(cfg, workers=args.workers)
    resolved = {"command": "bench", **cfg.to_dict()}
    _emit(args, "bench", resolved, report.to_csv(),
          {k: v for k, v in report.to_dict().items() if k != "config"})
    return EXIT_OK


def cmd_converge(args):
    cfg = _load_config(args.config, benchlab.ConvergenceConfig, args.seed)
    log.info("resolved config:\n%s", benchlab.format_config(cfg))
    rows = benchlab.run_convergence_experiment(cfg, workers=args.workers)
    fields = sorted({k for r in rows for k in r})
    resolved = {"command": "converge", **cfg.to_dict()}
    _emit(args, "converge", resolved, benchlab.rows_to_csv(rows, fields), rows)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base seed")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out-dir", default=None)
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="wavepeel", description="Wavelet peeling denoising toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fc-table", parents=[common], help="critical constants per shape")
    s.add_argument("--u", default=",".join(str(v) for v in DEFAULT_SHAPES),
                   help="comma-separated shapes")
    s.set_defaults(func=cmd_fc_table)

    s = sub.add_parser("thresholds", parents=[common], help="seven-threshold catalog per seed")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--u", type=float, required=True)
    s.add_argument("--N", type=int, default=10000)
    s.add_argument("--seeds", type=int, default=100)
    s.set_defaults(func=cmd_thresholds)

    s = sub.add_parser("denoise", parents=[common], help="denoise a signal file")
    s.add_argument("--input", required=True)
    s.add_argument("--output", default=None)
    s.add_argument("--method", choices=DENOISE_METHODS, required=True)
    s.add_argument("--threshold", type=float, default=None)
    s.add_argument("--mode", choices=("hard", "soft"), default="hard")
    s.add_argument("--sigma", type=float, default=None, help="known coefficient std")
    s.add_argument("--u", type=float, default=None, help="known coefficient shape")
    s.add_argument("--wavelet", choices=("sym8", "haar"), default="sym8")
    s.add_argument("--levels", type=int, default=None)
    s.add_argument("--exclude-approx", action="store_true")
    s.set_defaults(func=cmd_denoise)

    s = sub.add_parser("bench", parents=[common], help="denoising benchmark from a config file")
    s.add_argument("config")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("converge", parents=[common], help="convergence experiment from a config file")
    s.add_argument("config")
    s.set_defaults(func=cmd_converge)

    s = sub.add_parser("sample", parents=[common], help="draw generalized Gaussian samples")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--u", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s.set_defaults(func=cmd_sample)
    return p


def _classify(exc):
    """Exit code for an exception, looking through wrapped causes."""
    while exc is not None:
        if isinstance(exc, ConvergenceError):
            return EXIT_SOLVER, "solver failure"
        if isinstance(exc, (ConfigError, DomainError, EstimationError, RegimeError, ValueError)):
            return EXIT_VALIDATION, "validation error"
        if isinstance(exc, OSError):
            return EXIT_IO, "I/O error"
        exc = exc.__cause__
    return None, None


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.seed is None and args.command in ("thresholds", "sample"):
        args.seed = 0
    _setup_logging(args, args.command)
    try:
        return args.func(args)
    except (RuntimeError, ValueError, OSError) as exc:
        code, kind = _classify(exc)
        if code is None:
            raise
        log.error("%s: %s", kind, exc)
        print(f"error: {exc}", file=sys.stderr)
        return code
    finally:
        for h in log.handlers:
            h.close()
        log.handlers.clear()


if __name__ == "__main__":
    sys.exit(main())
