"""Command-line interface: quantize, moments, fit, sketch, likelihood, sim."""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from bitreg import likelihood, qbr, simlab
from bitreg.moments import estimate_moments
from bitreg.quantize import Fixed, SubGaussianLogN, quantize_dataset, resolve_ranges
from bitreg.regress import fit_quantized
from bitreg.sketch import KINDS, SketchConfig, sketch_then_quantize
from bitreg.sparse import LassoConfig, debias, debias_matrix_auto, fit_lasso

log = logging.getLogger("bitreg")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class NumericalFailure(ArithmeticError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read_text(path):
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def read_csv(path, header=False, y_col=-1):
    text = _read_text(path)
    try:
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except ValueError as e:
        raise ValueError(f"could not parse CSV (missing or non-numeric values?): {e}") from None
    if data.shape[1] < 2:
        raise ValueError("CSV needs at least one predictor column and a response column")
    col = y_col % data.shape[1]
    y = data[:, col]
    X = np.delete(data, col, axis=1)
    return X, y


def _policy(args):
    if args.policy == "fixed":
        if args.R is None or args.L is None:
            raise UsageError("--R and --L are required with --policy fixed")
        return Fixed(args.R, args.L)
    return SubGaussianLogN(q=args.q, cK=args.cK, cKbar=args.cKbar, cKeps=args.cKeps, signal_norm=args.signal_norm)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=1, sort_keys=True)
    if out and out != "-":
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def cmd_quantize(args):
    X, y = read_csv(args.input, args.header, args.y_col)
    ranges = resolve_ranges(_policy(args), *X.shape)
    ds = quantize_dataset(X, y, ranges, args.seed, clamp=not args.strict)
    qbr.write(args.out, ds)
    log.info("wrote %d samples (d=%d) to %s; clamp events %s", ds.n, ds.d, args.out, ds.clamp_events)


def cmd_sketch(args):
    X, y = read_csv(args.input, args.header, args.y_col)
    cfg = SketchConfig(args.m, kind=args.kind, seed=args.seed, method=args.method)
    ds = sketch_then_quantize(X, y, cfg, _policy(args), clamp=not args.strict)
    qbr.write(args.out, ds)


def cmd_moments(args):
    _emit(estimate_moments(qbr.read(args.path)).to_dict(), args.out)


def cmd_fit(args):
    ds = qbr.read(args.path)
    if not args.lasso:
        if args.debias:
            raise UsageError("--debias requires --lasso")
        _emit(fit_quantized(ds, level=args.level).to_dict(), args.out)
        return
    if args.lam is None:
        raise UsageError("--lasso requires --lambda")
    mom = estimate_moments(ds)
    res = fit_lasso(mom, LassoConfig(lam=args.lam, radius=args.radius or math.inf))
    if not res.converged:
        raise NumericalFailure(f"lasso did not converge in {res.n_iter} iterations (residual {res.residual:.3g})")
    out = {"beta": res.beta.tolist(), "support": res.support.tolist(), "n": ds.n, "d": ds.d,
           "lambda": args.lam, "iterations": res.n_iter}
    if args.debias:
        M, mu = debias_matrix_auto(mom, args.mu)
        db = debias(mom, res.beta, ds, M, level=args.level)
        out.update({"beta_db": db.beta_db.tolist(), "se": db.std_errors.tolist(), "ci": db.ci.tolist(),
                    "level": args.level, "mu": mu, "infNormResidual": db.inf_norm_residual})
    _emit(out, args.out)


def cmd_likelihood(args):
    model = likelihood.ScalarModel(args.beta, args.sigma, args.R, args.L)
    _emit({"pi": likelihood.collision_probability(model),
           "piDot": likelihood.collision_derivative(model),
           "fisherInfo": likelihood.fisher_information(model)})


def cmd_sim(args):
    try:
        config = json.loads(_read_text(args.config)) if args.config else {}
    except json.JSONDecodeError as e:
        raise ValueError(f"bad JSON config: {e}") from None
    workers = args.threads or os.cpu_count() or 1
    report = simlab.run_from_config(args.study, config, args.seed, workers)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.study}.json").write_text(report.to_json() + "\n")
        (out / f"{args.study}.csv").write_text(report.to_csv())
    else:
        sys.stdout.write(report.to_json() + "\n")


def _range_flags(p):
    p.add_argument("--policy", choices=("fixed", "subgaussian"), default="fixed")
    p.add_argument("--R", type=float, help="predictor range [-R, R]")
    p.add_argument("--L", type=float, help="response range [-L, L]")
    p.add_argument("--q", type=float, default=3.0)
    p.add_argument("--signal-norm", type=float, default=1.0)
    p.add_argument("--cK", type=float, default=1.0)
    p.add_argument("--cKbar", type=float, default=1.0)
    p.add_argument("--cKeps", type=float, default=1.0)
    p.add_argument("--strict", action="store_true", help="error on out-of-range values instead of clamping")


def _csv_flags(p):
    p.add_argument("--input", required=True, help="CSV file of predictors and response ('-' for stdin)")
    p.add_argument("--header", action="store_true", help="first CSV row is a header")
    p.add_argument("--y-col", type=int, default=-1, help="response column index (default: last)")


def build_parser():
    parser = _Parser(prog="bitreg", description=__doc__)
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("quantize", help="quantize a CSV of (X, y) into a .qbr file")
    _csv_flags(p)
    _range_flags(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("sketch", help="sketch then quantize a CSV into a .qbr file")
    _csv_flags(p)
    _range_flags(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--kind", choices=KINDS, default="gaussian")
    p.add_argument("--method", choices=("materialize", "gram"), default="materialize")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sketch)

    p = sub.add_parser("moments", help="moment estimates of a .qbr file as JSON")
    p.add_argument("path")
    p.add_argument("--out")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("fit", help="fit a .qbr file, JSON to stdout")
    p.add_argument("path")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--lasso", action="store_true")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--debias", action="store_true")
    p.add_argument("--mu", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("likelihood", help="collision probability and Fisher information (d = 1)")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.set_defaults(func=cmd_likelihood)

    p = sub.add_parser("sim", help="run a simulation study")
    p.add_argument("study", choices=simlab.STUDIES)
    p.add_argument("--config", help="JSON config file ('-' for stdin)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_sim)
    return parser


def _fail(code, exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        return _fail(EXIT_USAGE, e)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as e:
        return _fail(EXIT_USAGE, e)
    except ArithmeticError as e:
        return _fail(EXIT_NUMERIC, e)
    except (ValueError, OSError) as e:
        return _fail(EXIT_DATA, e)
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
