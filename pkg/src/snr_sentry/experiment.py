"""Deterministic Monte Carlo engine for support-recovery error curves.

Estimates the probability of support-recovery error (exact set mismatch
between the estimated and true supports) on a grid of noise levels, for a
matrix of algorithm/rule combinations. Every trial draws its randomness
from a stream derived deterministically from the master seed and the
trial coordinates, so results are bit-identical regardless of worker
count or execution order.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from . import solvers
from .linalg import DesignMatrix, SupportSet, read_matrix_file
from .solvers import StopRule, SubsetScanPlan
from .tuning import TuningRule, format_rule, gamma_value, parse_rule

ALGORITHM_TAGS = (
    "l0",
    "oracle",
    "l1_penalty",
    "l1_error",
    "dantzig",
    "omp_known_k",
    "omp_rpsc",
    "omp_rcsc",
)
RULE_FREE_TAGS = ("oracle", "omp_known_k")
TAG_TARGETS = {
    "l0": "l0",
    "l1_penalty": "l1_penalty",
    "l1_error": "l1_error",
    "dantzig": "dantzig",
    "omp_rpsc": "omp_rpsc",
    "omp_rcsc": "omp_rcsc",
}
TRIAL_BLOCK = 256
DEFAULT_TRIALS = 10_000
CSV_HEADER = "sigma_sq,snr_db,algorithm,rule,pe_hat,trials,failures,stderr"
CSV_DIAG_HEADER = CSV_HEADER + ",mean_precision,mean_recall"


class TrialExecutionError(RuntimeError):
    """One or more Monte Carlo trials raised; carries their coordinates."""

    def __init__(self, errors):
        self.errors = tuple(errors)
        shown = "; ".join(
            f"(grid={g}, algo={a}, trial={t}): {msg}"
            for g, a, t, msg in self.errors[:5]
        )
        more = "" if len(self.errors) <= 5 else f" (+{len(self.errors) - 5} more)"
        super().__init__(f"{len(self.errors)} trial(s) failed: {shown}{more}")


# ---------------------------------------------------------------------------
# Matrix specifications.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ERCHadamard:
    """Identity-plus-Hadamard design [I_n | H_n/sqrt(n)], fixed across trials."""

    n: int


@dataclass(frozen=True)
class RandomGaussian:
    """Column-normalized Gaussian design, redrawn each trial by default."""

    n: int
    p: int
    fresh_per_trial: bool = True


@dataclass(frozen=True)
class MatrixFile:
    """Design loaded from a whitespace-separated text file, fixed across trials."""

    path: str


def parse_matrix_spec(text):
    """Parse "erc:<n>", "rand:<n>x<p>[:fixed]", or "file:<path>"."""
    kind, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"malformed matrix spec {text!r}: expected kind:detail")
    if kind == "erc":
        try:
            n = int(rest)
        except ValueError:
            raise ValueError(f"malformed matrix spec {text!r}: bad dimension") from None
        return ERCHadamard(n)
    if kind == "rand":
        dims, sep2, tail = rest.partition(":")
        fresh = True
        if sep2:
            if tail != "fixed":
                raise ValueError(
                    f"malformed matrix spec {text!r}: trailing {tail!r} "
                    "(only ':fixed' is recognized)"
                )
            fresh = False
        try:
            n_txt, p_txt = dims.split("x")
            n, p = int(n_txt), int(p_txt)
        except ValueError:
            raise ValueError(
                f"malformed matrix spec {text!r}: dimensions must look like 75x100"
            ) from None
        return RandomGaussian(n, p, fresh_per_trial=fresh)
    if kind == "file":
        if not rest:
            raise ValueError(f"malformed matrix spec {text!r}: empty path")
        return MatrixFile(rest)
    raise ValueError(f"unknown matrix kind {kind!r} (expected erc, rand, or file)")


def format_matrix_spec(spec):
    if isinstance(spec, ERCHadamard):
        return f"erc:{spec.n}"
    if isinstance(spec, RandomGaussian):
        tail = "" if spec.fresh_per_trial else ":fixed"
        return f"rand:{spec.n}x{spec.p}{tail}"
    if isinstance(spec, MatrixFile):
        return f"file:{spec.path}"
    raise TypeError(f"not a matrix spec: {spec!r}")


# ---------------------------------------------------------------------------
# Generators.
# ---------------------------------------------------------------------------


def gen_erc_matrix(n):
    """Design [I_n | H_n/sqrt(n)]: 2n unit-norm columns, coherence 1/sqrt(n).

    n must be a power of two so the Sylvester Hadamard matrix exists.
    """
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"n must be a power of two >= 2, got {n}")
    h = hadamard(n).astype(float) / math.sqrt(n)
    return DesignMatrix(np.hstack([np.eye(n), h]))


def gen_random_matrix(n, p, stream):
    """Standard normal entries, each column rescaled to unit l2 norm."""
    if n < 1 or p < 1:
        raise ValueError("n and p must be positive")
    entries = stream.standard_normal((n, p))
    norms = np.linalg.norm(entries, axis=0)
    while np.any(norms == 0.0):
        # Essentially impossible, but a zero column would break the
        # normalization; redraw such columns deterministically.
        dead = norms == 0.0
        entries[:, dead] = stream.standard_normal((n, int(dead.sum())))
        norms = np.linalg.norm(entries, axis=0)
    return DesignMatrix(entries / norms)


def gen_signal(p, k_star, magnitude, stream):
    """Random k_star-sparse signal with +/-magnitude entries.

    The support is uniform over k_star-subsets of [p]; each nonzero gets
    an independent fair-coin sign. Returns (beta, support).
    """
    if not (0 <= k_star <= p):
        raise ValueError("need 0 <= k_star <= p")
    if not (magnitude > 0 and math.isfinite(magnitude)):
        raise ValueError("magnitude must be positive and finite")
    beta = np.zeros(p)
    if k_star == 0:
        return beta, SupportSet.empty()
    idx = stream.choice(p, size=k_star, replace=False)
    signs = stream.integers(0, 2, size=k_star) * 2 - 1
    beta[idx] = magnitude * signs
    support = SupportSet(tuple(sorted(int(i) for i in idx)))
    return beta, support


# ---------------------------------------------------------------------------
# Configuration.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo sweep.

    Attributes
    ----------
    matrix_spec : ERCHadamard | RandomGaussian | MatrixFile
    k_star : int
        True support size; zero is allowed (pure-noise experiments) but
        rules out the known-cardinality algorithms.
    beta_magnitude : float
        Common magnitude of the nonzero coefficients.
    sigma_sq_grid : tuple of float
        Strictly decreasing positive noise variances.
    algorithms : tuple of (tag, TuningRule or None)
        Tags from ALGORITHM_TAGS; "oracle" and "omp_known_k" take no
        rule, every other tag requires one. Rules are retargeted to the
        tag automatically.
    trials : int
    master_seed : int
        64-bit nonnegative integer.
    l0_max_cardinality : int or None
        Search cap for the subset-scan algorithms; None means
        min(n, p, k_star + 1).
    """

    matrix_spec: object
    k_star: int
    beta_magnitude: float
    sigma_sq_grid: tuple
    algorithms: tuple
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    l0_max_cardinality: int | None = None

    def __post_init__(self):
        spec = self.matrix_spec
        if not isinstance(spec, (ERCHadamard, RandomGaussian, MatrixFile)):
            raise TypeError(f"not a matrix spec: {spec!r}")
        if isinstance(spec, ERCHadamard) and (spec.n < 2 or (spec.n & (spec.n - 1))):
            raise ValueError("ERCHadamard n must be a power of two >= 2")
        if isinstance(spec, RandomGaussian) and (spec.n < 1 or spec.p < 1):
            raise ValueError("RandomGaussian dimensions must be positive")
        if self.k_star < 0:
            raise ValueError("k_star must be nonnegative")
        dims = _spec_dims(spec)
        if dims is not None:
            n, p = dims
            if self.k_star > min(n, p):
                raise ValueError(f"k_star={self.k_star} exceeds min(n, p)={min(n, p)}")
        if not (self.beta_magnitude > 0 and math.isfinite(self.beta_magnitude)):
            raise ValueError("beta_magnitude must be positive and finite")
        grid = tuple(float(s) for s in self.sigma_sq_grid)
        if not grid:
            raise ValueError("sigma_sq_grid must be nonempty")
        if any(not (s > 0 and math.isfinite(s)) for s in grid):
            raise ValueError("sigma_sq_grid entries must be positive and finite")
        if any(a <= b for a, b in zip(grid, grid[1:])):
            raise ValueError("sigma_sq_grid must be strictly decreasing")
        object.__setattr__(self, "sigma_sq_grid", grid)
        if not self.algorithms:
            raise ValueError("algorithms must be nonempty")
        normalized = []
        for entry in self.algorithms:
            tag, rule = entry
            if tag not in ALGORITHM_TAGS:
                raise ValueError(f"unknown algorithm tag {tag!r}")
            if tag in RULE_FREE_TAGS:
                if rule is not None:
                    raise ValueError(f"algorithm {tag!r} takes no tuning rule")
                if self.k_star < 1:
                    raise ValueError(f"algorithm {tag!r} requires k_star >= 1")
            else:
                if not isinstance(rule, TuningRule):
                    raise ValueError(f"algorithm {tag!r} requires a TuningRule")
                rule = rule.with_target(TAG_TARGETS[tag])
            normalized.append((tag, rule))
        object.__setattr__(self, "algorithms", tuple(normalized))
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if not (0 <= self.master_seed < 2**64):
            raise ValueError("master_seed must fit in 64 bits")
        if self.l0_max_cardinality is not None and self.l0_max_cardinality < 1:
            raise ValueError("l0_max_cardinality must be positive")


def _spec_dims(spec):
    """(n, p) when derivable without touching the filesystem, else None."""
    if isinstance(spec, ERCHadamard):
        return spec.n, 2 * spec.n
    if isinstance(spec, RandomGaussian):
        return spec.n, spec.p
    return None


def _l0_search_cap(config, n, p):
    if config.l0_max_cardinality is not None:
        return min(config.l0_max_cardinality, n, p)
    return min(n, p, config.k_star + 1)


def snr_db(config, sigma_sq, n):
    """SNR in decibels: expected signal energy over expected noise energy.

    With unit-norm columns the signal energy is k_star * beta^2 while the
    noise contributes n * sigma_sq; k_star = 0 gives -inf.
    """
    if config.k_star == 0:
        return float("-inf")
    ratio = config.k_star * config.beta_magnitude**2 / (n * sigma_sq)
    return 10.0 * math.log10(ratio)


# ---------------------------------------------------------------------------
# Per-trial execution.
# ---------------------------------------------------------------------------


def _trial_rng(master_seed, grid_index, algo_index, trial_index):
    ss = np.random.SeedSequence(
        entropy=master_seed, spawn_key=(1, grid_index, algo_index, trial_index)
    )
    return np.random.default_rng(ss)


def fixed_matrix_rng(master_seed):
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(0,))
    )


def _resolve_fixed_matrix(spec, master_seed):
    """The design shared by all trials, or None when redrawn per trial."""
    if isinstance(spec, ERCHadamard):
        return gen_erc_matrix(spec.n)
    if isinstance(spec, RandomGaussian):
        if spec.fresh_per_trial:
            return None
        return gen_random_matrix(spec.n, spec.p, fixed_matrix_rng(master_seed))
    X = read_matrix_file(spec.path)
    X.require_unit_norm_columns()
    return X


_CTX_CACHE = {}


def _fixed_context(config):
    """Per-process cache of (fixed matrix, subset-scan plan) for a config."""
    key = (config.matrix_spec, config.master_seed, config.l0_max_cardinality, config.k_star)
    ctx = _CTX_CACHE.get(key)
    if ctx is not None:
        return ctx
    X = _resolve_fixed_matrix(config.matrix_spec, config.master_seed)
    plan = None
    if X is not None:
        need = 0
        for tag, _ in config.algorithms:
            if tag == "l0":
                need = max(need, _l0_search_cap(config, X.n, X.p))
            elif tag == "oracle":
                need = max(need, config.k_star)
        if need >= 1:
            plan = SubsetScanPlan(X, need)
    if len(_CTX_CACHE) > 4:
        _CTX_CACHE.clear()
    _CTX_CACHE[key] = (X, plan)
    return X, plan


def dispatch_solver(tag, rule, X, y, sigma_sq, k_star, l0_cap=None, plan=None):
    """Run one algorithm tag on one instance and return its RecoveryResult.

    k_star feeds the known-cardinality algorithms and the per-cardinality
    penalty rules; l0_cap bounds the subset search (None means
    min(n, p, k_star + 1)).
    """
    sigma = math.sqrt(sigma_sq)
    n, p = X.n, X.p
    if tag == "l0":
        cap = min(n, p, k_star + 1) if l0_cap is None else l0_cap
        if plan is not None and plan.max_cardinality < cap:
            plan = None
        return solvers.solve_l0(X, y, sigma_sq, rule, cap, plan=plan)
    if tag == "oracle":
        return solvers.oracle_known_k(X, y, k_star, plan=plan)
    if tag == "omp_known_k":
        return solvers.omp(X, y, sigma, StopRule.known_k(k_star))
    gamma = gamma_value(rule, n, p, k_star, sigma_sq)
    if tag == "l1_penalty":
        return solvers.solve_l1_penalty(X, y, sigma, gamma)
    if tag == "l1_error":
        return solvers.solve_l1_error(X, y, sigma, gamma)
    if tag == "dantzig":
        return solvers.solve_dantzig_orthonormal(X, y, sigma, gamma)
    if tag == "omp_rpsc":
        return solvers.omp(X, y, sigma, StopRule.rpsc(gamma))
    if tag == "omp_rcsc":
        return solvers.omp(X, y, sigma, StopRule.rcsc(gamma))
    raise ValueError(f"unknown algorithm tag {tag!r}")


def _trial_outcome(config, X_fixed, plan, grid_index, algo_index, trial_index):
    """(success, precision, recall) for one trial."""
    rng = _trial_rng(config.master_seed, grid_index, algo_index, trial_index)
    spec = config.matrix_spec
    if X_fixed is None:
        X = gen_random_matrix(spec.n, spec.p, rng)
        trial_plan = None
    else:
        X = X_fixed
        trial_plan = plan
    beta, support = gen_signal(X.p, config.k_star, config.beta_magnitude, rng)
    sigma_sq = config.sigma_sq_grid[grid_index]
    noise = rng.standard_normal(X.n) * math.sqrt(sigma_sq)
    y = X.entries @ beta + noise
    tag, rule = config.algorithms[algo_index]
    result = dispatch_solver(
        tag,
        rule,
        X,
        y,
        sigma_sq,
        config.k_star,
        l0_cap=_l0_search_cap(config, X.n, X.p),
        plan=trial_plan,
    )
    est = result.support
    hits = len(est.as_set() & support.as_set())
    precision = hits / len(est) if len(est) else (1.0 if len(support) == 0 else 0.0)
    recall = hits / len(support) if len(support) else 1.0
    return est.set_equal(support), precision, recall


def run_trial(config, sigma_sq, algorithm, trial_index):
    """Run one trial and report success (exact support recovery).

    sigma_sq must be a grid member and algorithm a (tag, rule) pair from
    config.algorithms; the trial's random stream is fully determined by
    (master_seed, grid index, algorithm index, trial_index), so replays
    are bit-identical.
    """
    grid_index = _find_grid_index(config, sigma_sq)
    algo_index = _find_algo_index(config, algorithm)
    if not (0 <= trial_index < config.trials):
        raise ValueError("trial_index out of range")
    X, plan = _fixed_context(config)
    success, _, _ = _trial_outcome(config, X, plan, grid_index, algo_index, trial_index)
    return success


def _find_grid_index(config, sigma_sq):
    for i, s in enumerate(config.sigma_sq_grid):
        if s == sigma_sq:
            return i
    raise ValueError(f"sigma_sq {sigma_sq!r} is not on the grid")


def _find_algo_index(config, algorithm):
    tag, rule = algorithm
    if rule is not None and isinstance(rule, TuningRule) and tag in TAG_TARGETS:
        rule = rule.with_target(TAG_TARGETS[tag])
    for i, (t, r) in enumerate(config.algorithms):
        if t == tag and r == rule:
            return i
    raise ValueError(f"algorithm ({tag!r}, {rule!r}) is not in the config")


# ---------------------------------------------------------------------------
# Block execution and reduction.
# ---------------------------------------------------------------------------


def _run_block(config, grid_index, algo_index, start, stop):
    """Failures and diagnostic sums over trials [start, stop)."""
    X, plan = _fixed_context(config)
    failures = 0
    sum_prec = 0.0
    sum_rec = 0.0
    errors = []
    for ti in range(start, stop):
        try:
            ok, prec, rec = _trial_outcome(config, X, plan, grid_index, algo_index, ti)
        except Exception as exc:  # noqa: BLE001 - aggregated with coordinates
            errors.append((grid_index, algo_index, ti, f"{type(exc).__name__}: {exc}"))
            continue
        if not ok:
            failures += 1
        sum_prec += prec
        sum_rec += rec
    return start, failures, sum_prec, sum_rec, errors


def _blocks(trials):
    return [(s, min(s + TRIAL_BLOCK, trials)) for s in range(0, trials, TRIAL_BLOCK)]


@dataclass(frozen=True)
class PEPoint:
    """One grid-point estimate for one algorithm."""

    sigma_sq: float
    snr_db: float
    algorithm: str
    rule: str
    pe_hat: float
    trials: int
    failures: int
    stderr: float
    mean_precision: float | None = None
    mean_recall: float | None = None

    def csv_row(self, diagnostics=False):
        cells = [
            repr(float(self.sigma_sq)),
            repr(float(self.snr_db)),
            self.algorithm,
            self.rule,
            repr(float(self.pe_hat)),
            str(self.trials),
            str(self.failures),
            repr(float(self.stderr)),
        ]
        if diagnostics:
            cells.append(repr(float(self.mean_precision)))
            cells.append(repr(float(self.mean_recall)))
        return ",".join(cells)


@dataclass(frozen=True)
class PECurve:
    """Deterministically ordered sweep results (grid-major, then algorithm)."""

    points: tuple

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def to_csv(self, diagnostics=False):
        header = CSV_DIAG_HEADER if diagnostics else CSV_HEADER
        lines = [header]
        lines.extend(pt.csv_row(diagnostics) for pt in self.points)
        return "\n".join(lines) + "\n"


def rule_label(tag, rule):
    return "none" if rule is None else format_rule(rule)


def _estimate_point(config, grid_index, algo_index, n_dim, executor):
    blocks = _blocks(config.trials)
    if executor is None:
        results = [
            _run_block(config, grid_index, algo_index, s, e) for s, e in blocks
        ]
    else:
        futures = [
            executor.submit(_run_block, config, grid_index, algo_index, s, e)
            for s, e in blocks
        ]
        results = [f.result() for f in futures]
    results.sort(key=lambda r: r[0])
    errors = [err for r in results for err in r[4]]
    if errors:
        raise TrialExecutionError(errors)
    failures = sum(r[1] for r in results)
    sum_prec = 0.0
    sum_rec = 0.0
    for r in results:
        sum_prec += r[2]
        sum_rec += r[3]
    pe_hat = failures / config.trials
    stderr = math.sqrt(pe_hat * (1.0 - pe_hat) / config.trials)
    tag, rule = config.algorithms[algo_index]
    sigma_sq = config.sigma_sq_grid[grid_index]
    return PEPoint(
        sigma_sq=sigma_sq,
        snr_db=snr_db(config, sigma_sq, n_dim),
        algorithm=tag,
        rule=rule_label(tag, rule),
        pe_hat=pe_hat,
        trials=config.trials,
        failures=failures,
        stderr=stderr,
        mean_precision=sum_prec / config.trials,
        mean_recall=sum_rec / config.trials,
    )


def _matrix_n(config):
    dims = _spec_dims(config.matrix_spec)
    if dims is not None:
        n, p = dims
    else:
        X, _ = _fixed_context(config)
        n, p = X.n, X.p
        if config.k_star > min(n, p):
            raise ValueError(
                f"k_star={config.k_star} exceeds min(n, p)={min(n, p)} "
                "for the matrix loaded from file"
            )
    return n


def estimate_pe(config, sigma_sq, algorithm, threads=1):
    """Estimate the error probability at one grid point for one algorithm.

    Returns a PEPoint; pe_hat is failures/trials with the exact binomial
    standard error. The estimate is bit-identical for every threads value.
    """
    grid_index = _find_grid_index(config, sigma_sq)
    algo_index = _find_algo_index(config, algorithm)
    n_dim = _matrix_n(config)
    with _executor(threads) as executor:
        return _estimate_point(config, grid_index, algo_index, n_dim, executor)


class _InlineExecutor:
    """Stand-in used for threads=1 so call sites need no branching."""

    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def _executor(threads):
    if threads == 1:
        return _InlineExecutor()
    if threads == 0:
        workers = os.cpu_count() or 1
    else:
        workers = threads
    if workers < 1:
        raise ValueError("threads must be >= 0")
    if workers == 1:
        return _InlineExecutor()
    return ProcessPoolExecutor(max_workers=workers)


def sweep(config, threads=1):
    """Full grid-by-algorithm sweep, rows grid-major then algorithm order.

    Trial errors are aggregated into a TrialExecutionError; partial
    results are discarded rather than silently truncated.
    """
    n_dim = _matrix_n(config)
    points = []
    with _executor(threads) as executor:
        for grid_index in range(len(config.sigma_sq_grid)):
            for algo_index in range(len(config.algorithms)):
                points.append(
                    _estimate_point(config, grid_index, algo_index, n_dim, executor)
                )
    return PECurve(points=tuple(points))


# ---------------------------------------------------------------------------
# Config files.
# ---------------------------------------------------------------------------

_CONFIG_KEYS = (
    "matrix",
    "k_star",
    "beta_magnitude",
    "sigma_sq_grid",
    "trials",
    "master_seed",
    "l0_max_cardinality",
)


def parse_algorithm_entry(text):
    parts = text.split(None, 1)
    if not parts:
        raise ValueError("empty algorithm entry")
    tag = parts[0]
    if tag not in ALGORITHM_TAGS:
        raise ValueError(f"unknown algorithm tag {tag!r}")
    if tag in RULE_FREE_TAGS:
        if len(parts) > 1:
            raise ValueError(f"algorithm {tag!r} takes no tuning rule")
        return tag, None
    if len(parts) < 2:
        raise ValueError(f"algorithm {tag!r} requires a tuning rule")
    return tag, parse_rule(parts[1].strip(), target=TAG_TARGETS[tag])


def _config_from_fields(fields, algos, source):
    missing = [k for k in ("matrix", "k_star", "beta_magnitude", "sigma_sq_grid") if k not in fields]
    if missing:
        raise ValueError(f"{source}: missing required key(s): {', '.join(missing)}")
    if not algos:
        raise ValueError(f"{source}: at least one algo entry is required")
    try:
        kwargs = {
            "matrix_spec": parse_matrix_spec(fields["matrix"]),
            "k_star": int(fields["k_star"]),
            "beta_magnitude": float(fields["beta_magnitude"]),
            "sigma_sq_grid": tuple(
                float(v) for v in str(fields["sigma_sq_grid"]).split(",") if v.strip()
            ),
            "algorithms": tuple(algos),
        }
        if "trials" in fields:
            kwargs["trials"] = int(fields["trials"])
        if "master_seed" in fields:
            kwargs["master_seed"] = int(fields["master_seed"])
        if "l0_max_cardinality" in fields:
            kwargs["l0_max_cardinality"] = int(fields["l0_max_cardinality"])
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{source}: {exc}") from exc


def _load_config_json(text, source):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{source}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError(f"{source}: top-level JSON value must be an object")
    unknown = set(data) - set(_CONFIG_KEYS) - {"algorithms"}
    if unknown:
        raise ValueError(f"{source}: unknown key(s): {', '.join(sorted(unknown))}")
    raw_algos = data.get("algorithms", [])
    if not isinstance(raw_algos, list):
        raise ValueError(f"{source}: algorithms must be a list")
    algos = []
    for entry in raw_algos:
        if isinstance(entry, str):
            algos.append(parse_algorithm_entry(entry))
        elif isinstance(entry, list) and len(entry) == 2:
            tag, rule_text = entry
            joined = tag if rule_text in (None, "") else f"{tag} {rule_text}"
            algos.append(parse_algorithm_entry(joined))
        else:
            raise ValueError(
                f"{source}: algorithm entries must be 'tag rule' strings or "
                "[tag, rule] pairs"
            )
    fields = {k: data[k] for k in _CONFIG_KEYS if k in data}
    if "sigma_sq_grid" in fields and isinstance(fields["sigma_sq_grid"], list):
        fields["sigma_sq_grid"] = ",".join(repr(float(v)) for v in fields["sigma_sq_grid"])
    return _config_from_fields(fields, algos, source)


def _load_config_keyvalue(text, source):
    fields = {}
    algos = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(
                f"{source}:{lineno}: expected 'key = value', got {line!r}"
            )
        key = key.strip()
        value = value.strip()
        if key == "algo":
            try:
                algos.append(parse_algorithm_entry(value))
            except ValueError as exc:
                raise ValueError(f"{source}:{lineno}: {exc}") from exc
        elif key in _CONFIG_KEYS:
            if key in fields:
                raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
            fields[key] = value
        else:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
    return _config_from_fields(fields, algos, source)


def load_config(path):
    """Load an ExperimentConfig from a key-value or JSON file.

    The key-value grammar is one `key = value` pair per line with '#'
    comments; `algo = <tag> [<rule>]` lines repeat, one per algorithm.
    Files whose first non-whitespace character is '{' are parsed as JSON
    with the same keys and an "algorithms" list.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    source = str(path)
    if text.lstrip().startswith("{"):
        return _load_config_json(text, source)
    return _load_config_keyvalue(text, source)
