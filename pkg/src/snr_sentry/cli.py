"""Command-line interface.

Four subcommands: ``qualify`` prints design-matrix diagnostics, ``solve``
runs one solver on one instance, ``sweep`` runs a Monte Carlo error-curve
experiment, and ``bounds`` evaluates the analytic bounds. Single-shot
results are JSON; sweeps are CSV. Output files are written atomically
(temp file plus rename). Exit codes: 0 success, 1 usage error, 2 runtime
error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import tempfile

from . import bounds as bounds_mod
from . import experiment, qualifiers
from .experiment import (
    ALGORITHM_TAGS,
    ERCHadamard,
    MatrixFile,
    RandomGaussian,
    RULE_FREE_TAGS,
    fixed_matrix_rng,
    dispatch_solver,
    gen_erc_matrix,
    gen_random_matrix,
    load_config,
    parse_matrix_spec,
)
from .linalg import SupportSet, read_matrix_file, read_vector_file
from .tuning import parse_rule

SEED_ENV_VAR = "SNR_SENTRY_SEED"


class UsageError(Exception):
    """Bad flags, malformed values, or missing input files."""


class _Parser(argparse.ArgumentParser):
    """argparse variant that raises instead of exiting the process."""

    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


def _build_parser():
    parser = _Parser(prog="snr-sentry", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    q = sub.add_parser("qualify", help="design-matrix diagnostics")
    q.add_argument("--matrix", required=True, help="erc:<n> | rand:<n>x<p> | file:<path>")
    q.add_argument("--support", help="comma-separated support indices for the ERC check")
    q.add_argument("--max-card", type=int, help="cap for the dependent-subset search")
    q.add_argument("--seed", type=int, help="stream seed for rand: matrices")
    q.add_argument("--out", help="output path (default stdout)")

    s = sub.add_parser("solve", help="run one solver on one instance")
    s.add_argument("--matrix", required=True, help="erc:<n> | rand:<n>x<p> | file:<path>")
    s.add_argument("--y", required=True, help="observation vector file, one value per line")
    s.add_argument("--algo", required=True, help="|".join(ALGORITHM_TAGS))
    s.add_argument("--rule", help="tuning rule, e.g. ebic:1.0*pow:0.5")
    s.add_argument("--sigma-sq", type=float, help="noise variance")
    s.add_argument("--k", type=int, help="cardinality for oracle/omp_known_k and k-dependent rules")
    s.add_argument("--max-card", type=int, help="subset-search cap (required for --algo l0)")
    s.add_argument("--seed", type=int, help="stream seed for rand: matrices")
    s.add_argument("--out", help="output path (default stdout)")

    w = sub.add_parser("sweep", help="Monte Carlo error-probability sweep")
    w.add_argument("--config", help="experiment config file (key-value or JSON)")
    w.add_argument("--matrix", help="override: matrix spec")
    w.add_argument("--k", type=int, help="override: true support size")
    w.add_argument("--beta-mag", type=float, help="override: coefficient magnitude")
    w.add_argument("--sigma-grid", help="override: comma-separated decreasing variances")
    w.add_argument("--algo", help="override: single algorithm tag")
    w.add_argument("--rule", help="override: tuning rule for --algo")
    w.add_argument("--trials", type=int, help="override: trials per grid point")
    w.add_argument("--seed", type=int, help="override: master seed")
    w.add_argument("--l0-max-card", type=int, help="override: subset-search cap")
    w.add_argument("--threads", type=int, default=1, help="worker count, 0 = auto")
    w.add_argument("--diagnostics", action="store_true", help="append precision/recall columns")
    w.add_argument("--out", help="output CSV path (default stdout)")

    b = sub.add_parser("bounds", help="evaluate analytic bounds")
    mode = b.add_mutually_exclusive_group(required=True)
    mode.add_argument("--l0-floor", action="store_true", help="error floor 2Q(sqrt(gamma0))")
    mode.add_argument("--q", action="store_true", help="Gaussian tail Q(x)")
    mode.add_argument("--chi2-tail", action="store_true", help="chi-square tail bound")
    mode.add_argument("--e1", action="store_true", help="no-false-alarm rate bound")
    mode.add_argument("--e2", action="store_true", help="no-missed-detection rate bounds")
    mode.add_argument("--omp-margin", action="store_true", help="greedy selection margin")
    b.add_argument("--gamma0", type=float)
    b.add_argument("--x", type=float)
    b.add_argument("--chi2-k", type=int)
    b.add_argument("--a-sq", type=float)
    b.add_argument("--n", type=int)
    b.add_argument("--k-star", type=int)
    b.add_argument("--erc", type=float)
    b.add_argument("--gamma1", type=float)
    b.add_argument("--sigma", type=float)
    b.add_argument("--beta", help="comma-separated support coefficients")
    b.add_argument("--c-seq", help="comma-separated c_j values")
    b.add_argument("--d-seq", help="comma-separated d_j values")
    b.add_argument("--d-norm", choices=("inf", "spectral"), default="inf")
    b.add_argument("--matrix", help="matrix spec for instance-based bounds")
    b.add_argument("--support", help="comma-separated true support indices")
    b.add_argument("--beta-min", type=float)
    b.add_argument("--seed", type=int, help="stream seed for rand: matrices")
    b.add_argument("--out", help="output path (default stdout)")

    return parser


# ---------------------------------------------------------------------------
# Shared helpers.
# ---------------------------------------------------------------------------


def _env_seed():
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _resolve_seed(flag_value):
    if flag_value is not None:
        return flag_value
    env = _env_seed()
    return 0 if env is None else env


def _load_cli_matrix(spec_text, seed):
    try:
        spec = parse_matrix_spec(spec_text)
        if isinstance(spec, ERCHadamard):
            return gen_erc_matrix(spec.n)
        if isinstance(spec, RandomGaussian):
            return gen_random_matrix(spec.n, spec.p, fixed_matrix_rng(seed))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not os.path.exists(spec.path):
        raise UsageError(f"matrix file not found: {spec.path}")
    return read_matrix_file(spec.path)


def _parse_index_list(text, label):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"{label} must be a comma-separated list of integers") from None


def _parse_float_list(text, label):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"{label} must be a comma-separated list of numbers") from None
    if not values:
        raise UsageError(f"{label} must be nonempty")
    return values


def _emit(text, out_path):
    if out_path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out_path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".snr-sentry-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_json(payload, out_path):
    _emit(json.dumps(payload, indent=2) + "\n", out_path)


def _require(args, names):
    missing = [flag for flag, value in names if value is None]
    if missing:
        raise UsageError(f"missing required flag(s): {', '.join(missing)}")


# ---------------------------------------------------------------------------
# Subcommand handlers.
# ---------------------------------------------------------------------------


def _cmd_qualify(args):
    seed = _resolve_seed(args.seed)
    X = _load_cli_matrix(args.matrix, seed)
    support = None
    if args.support is not None:
        support = SupportSet(_parse_index_list(args.support, "--support"))
    report = qualifiers.qualify(X, support=support, spark_max_cardinality=args.max_card)
    mic = report.mic_max_sparsity
    payload = {
        "n": report.n,
        "p": report.p,
        "mutual_coherence": report.mutual_coherence,
        "mic_max_sparsity": "unbounded" if math.isinf(mic) else int(mic),
        "spark": {
            "exact": report.spark.exact,
            "certified_above": report.spark.certified_above,
            "by_convention": report.spark.by_convention,
            "description": report.spark.describe(),
        },
        "erc_coefficient": report.erc_coefficient,
        "erc_holds": report.erc_holds,
    }
    _emit_json(payload, args.out)
    return 0


def _cmd_solve(args):
    if args.algo not in ALGORITHM_TAGS:
        raise UsageError(
            f"unknown algorithm {args.algo!r}; expected one of {', '.join(ALGORITHM_TAGS)}"
        )
    tag = args.algo
    rule = None
    if tag in RULE_FREE_TAGS:
        if args.rule is not None:
            raise UsageError(f"--algo {tag} takes no --rule")
        _require(args, [("--k", args.k)])
    else:
        _require(args, [("--rule", args.rule), ("--sigma-sq", args.sigma_sq)])
        try:
            rule = parse_rule(args.rule, target=experiment.TAG_TARGETS[tag])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if tag == "l0" and args.max_card is None:
        raise UsageError("--algo l0 requires --max-card")
    if not os.path.exists(args.y):
        raise UsageError(f"observation file not found: {args.y}")
    seed = _resolve_seed(args.seed)
    X = _load_cli_matrix(args.matrix, seed)
    y = read_vector_file(args.y)
    sigma_sq = args.sigma_sq if args.sigma_sq is not None else 1.0
    if not (sigma_sq > 0):
        raise UsageError("--sigma-sq must be positive")
    k_star = args.k if args.k is not None else 0
    result = dispatch_solver(
        tag, rule, X, y, sigma_sq, k_star, l0_cap=args.max_card
    )
    payload = {
        "algorithm": tag,
        "rule": experiment.rule_label(tag, rule),
        "n": X.n,
        "p": X.p,
        "support": list(result.support.indices),
        "estimate": [float(v) for v in result.estimate],
        "objective": result.objective,
        "iterations": result.iterations,
    }
    _emit_json(payload, args.out)
    return 0


def _sweep_config(args):
    if args.config is not None:
        if not os.path.exists(args.config):
            raise UsageError(f"config file not found: {args.config}")
        try:
            config = load_config(args.config)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        required = [
            ("--matrix", args.matrix),
            ("--k", args.k),
            ("--beta-mag", args.beta_mag),
            ("--sigma-grid", args.sigma_grid),
            ("--algo", args.algo),
        ]
        _require(args, required)
        config = None

    overrides = {}
    if args.matrix is not None:
        overrides["matrix_spec"] = parse_matrix_spec(args.matrix)
    if args.k is not None:
        overrides["k_star"] = args.k
    if args.beta_mag is not None:
        overrides["beta_magnitude"] = args.beta_mag
    if args.sigma_grid is not None:
        overrides["sigma_sq_grid"] = _parse_float_list(args.sigma_grid, "--sigma-grid")
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.l0_max_card is not None:
        overrides["l0_max_cardinality"] = args.l0_max_card

    if args.rule is not None and args.algo is None:
        raise UsageError("--rule requires --algo")
    if args.algo is not None:
        if args.algo not in ALGORITHM_TAGS:
            raise UsageError(f"unknown algorithm {args.algo!r}")
        entry = args.algo if args.rule is None else f"{args.algo} {args.rule}"
        overrides["algorithms"] = (experiment.parse_algorithm_entry(entry),)

    if args.seed is not None:
        overrides["master_seed"] = args.seed
    elif config is None:
        env = _env_seed()
        if env is not None:
            overrides["master_seed"] = env

    try:
        if config is None:
            return experiment.ExperimentConfig(**overrides)
        return dataclasses.replace(config, **overrides)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _cmd_sweep(args):
    config = _sweep_config(args)
    if args.threads < 0:
        raise UsageError("--threads must be >= 0")
    curve = experiment.sweep(config, threads=args.threads)
    _emit(curve.to_csv(diagnostics=args.diagnostics), args.out)
    return 0


def _bounds_inputs(args):
    _require(
        args,
        [
            ("--gamma1", args.gamma1),
            ("--sigma", args.sigma),
            ("--beta", args.beta),
        ],
    )
    beta = _parse_float_list(args.beta, "--beta")
    if args.matrix is not None:
        _require(args, [("--support", args.support)])
        seed = _resolve_seed(args.seed)
        X = _load_cli_matrix(args.matrix, seed)
        support = SupportSet(_parse_index_list(args.support, "--support"))
        return bounds_mod.RateBoundInputs.from_instance(
            X, support, args.gamma1, args.sigma, beta, d_norm=args.d_norm
        )
    _require(
        args,
        [
            ("--n", args.n),
            ("--k-star", args.k_star),
            ("--erc", args.erc),
            ("--c-seq", args.c_seq),
            ("--d-seq", args.d_seq),
        ],
    )
    return bounds_mod.RateBoundInputs(
        n=args.n,
        k_star=args.k_star,
        erc=args.erc,
        gamma1=args.gamma1,
        sigma=args.sigma,
        beta_support=beta,
        c_seq=_parse_float_list(args.c_seq, "--c-seq"),
        d_seq=_parse_float_list(args.d_seq, "--d-seq"),
    )


def _cmd_bounds(args):
    if args.l0_floor:
        _require(args, [("--gamma0", args.gamma0)])
        payload = {"l0_pe_lower_bound": bounds_mod.l0_pe_lower_bound(args.gamma0)}
    elif args.q:
        _require(args, [("--x", args.x)])
        payload = {"q": bounds_mod.q_function(args.x)}
    elif args.chi2_tail:
        _require(args, [("--chi2-k", args.chi2_k), ("--a-sq", args.a_sq)])
        payload = {"chi2_tail_bound": bounds_mod.chi2_tail_bound(args.chi2_k, args.a_sq)}
    elif args.e1:
        result = bounds_mod.e1_rate_bound(_bounds_inputs(args))
        payload = {"value": result.value, "raw": result.raw}
    elif args.e2:
        result = bounds_mod.e2_rate_bound(_bounds_inputs(args))
        payload = {
            "exact_q_form": result.exact_q_form,
            "exp_form": result.exp_form,
            "exact_q_raw": result.exact_q_raw,
            "exp_raw": result.exp_raw,
        }
    else:
        _require(
            args,
            [
                ("--matrix", args.matrix),
                ("--support", args.support),
                ("--beta-min", args.beta_min),
            ],
        )
        seed = _resolve_seed(args.seed)
        X = _load_cli_matrix(args.matrix, seed)
        support = SupportSet(_parse_index_list(args.support, "--support"))
        payload = {
            "omp_selection_margin": bounds_mod.omp_selection_margin(
                X, support, args.beta_min
            )
        }
    _emit_json(payload, args.out)
    return 0


_HANDLERS = {
    "qualify": _cmd_qualify,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "bounds": _cmd_bounds,
}


def parse_and_dispatch(argv):
    """Parse argv (without the program name) and run the subcommand.

    Returns the process exit code: 0 success, 1 usage error, 2 runtime
    error. Usage diagnostics go to stderr with the relevant synopsis.
    """
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse exits directly for --help; preserve its code.
        return 0 if exc.code in (0, None) else 1
    try:
        return _HANDLERS[args.subcommand](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
