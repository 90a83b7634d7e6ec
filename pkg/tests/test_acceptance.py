"""End-to-end acceptance checks for the support-recovery toolkit.

Each criterion lives in its own test function, so ``pytest -v`` prints
one pass or fail line per criterion. Every test also prints an explicit
``CRITERION nn PASS``/``FAIL`` summary with the measured numbers, which
shows up under ``pytest -s`` and in captured output on failure.

The statistical criteria use pinned master seeds, so every run draws
the same Monte Carlo data and the suite is fully deterministic. The
slowest test is the consistency sweep (criterion 8), which runs five
algorithms at ten thousand trials per grid point; expect several
minutes for the whole module on one core.
"""

import itertools
import math

import numpy as np
import pytest

from snr_sentry import bounds
from snr_sentry.cli import parse_and_dispatch
from snr_sentry.experiment import (
    ERCHadamard,
    ExperimentConfig,
    RandomGaussian,
    estimate_pe,
    gen_erc_matrix,
    gen_random_matrix,
    gen_signal,
    sweep,
)
from snr_sentry.linalg import DesignMatrix, SupportSet
from snr_sentry.qualifiers import mic_max_sparsity, mutual_coherence
from snr_sentry.solvers import (
    StopRule,
    SubsetScanPlan,
    omp,
    solve_dantzig_orthonormal,
    solve_l0,
    solve_l1_penalty,
)
from snr_sentry.tuning import gamma_value, parse_rule


def _announce(num, label, problems):
    ok = not problems
    detail = "" if ok else " [" + "; ".join(problems) + "]"
    print(f"CRITERION {num:02d} {'PASS' if ok else 'FAIL'}: {label}{detail}")
    assert ok, f"criterion {num}: " + "; ".join(problems)


def _reference_l0(X, y, sigma_sq, rule, max_cardinality):
    """Independent subset enumerator: plain lstsq, strict improvement."""
    entries = X.entries
    best_obj = float(y @ y)
    best_support = ()
    for k in range(1, max_cardinality + 1):
        gamma = gamma_value(rule, X.n, X.p, k, sigma_sq)
        for combo in itertools.combinations(range(X.p), k):
            cols = entries[:, list(combo)]
            coef, _, _, _ = np.linalg.lstsq(cols, y, rcond=None)
            r = y - cols @ coef
            obj = float(r @ r) + sigma_sq * gamma * k
            if obj < best_obj:
                best_obj, best_support = obj, combo
    return best_support


def _soft(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def test_criterion_01_error_floor_integer_crossovers():
    problems = []
    values = {p: bounds.l0_pe_lower_bound(2.0 * math.log(p)) for p in range(2, 400)}
    first_below_001 = min(p for p, v in values.items() if v < 0.01)
    first_below_0001 = min(p for p, v in values.items() if v <= 0.001)
    if first_below_001 != 28:
        problems.append(f"floor crosses 0.01 at p={first_below_001}, expected 28")
    if not values[27] >= 0.01:
        problems.append(f"p=27 floor {values[27]} is already below 0.01")
    if first_below_0001 != 225:
        problems.append(f"floor crosses 0.001 at p={first_below_0001}, expected 225")
    if not values[224] > 0.001:
        problems.append(f"p=224 floor {values[224]} is already at or below 0.001")
    seq = [values[p] for p in range(2, 400)]
    if not all(a >= b for a, b in zip(seq, seq[1:])):
        problems.append("floor is not nonincreasing in p")
    _announce(1, "error floor crosses 0.01 at p=28 and 0.001 at p=225", problems)


def test_criterion_02_erc_matrix_geometry():
    problems = []
    X = gen_erc_matrix(32)
    mu = mutual_coherence(X)
    target = 1.0 / math.sqrt(32)
    if abs(mu - target) > 1e-12:
        problems.append(f"coherence {mu!r} differs from 1/sqrt(32) by {abs(mu - target):.2e}")
    mic = mic_max_sparsity(mu)
    if mic != 3:
        problems.append(f"mic_max_sparsity = {mic}, expected 3")
    _announce(2, "32x64 construction has coherence 1/sqrt(32) and MIC sparsity 3", problems)


def test_criterion_03_l0_matches_independent_enumerator():
    problems = []
    rng = np.random.default_rng(303)
    rules = [parse_rule("aic", "l0"), parse_rule("aic*pow:0.5", "l0")]
    checked = 0
    for _ in range(200):
        X = gen_random_matrix(4, 8, rng)
        beta, support = gen_signal(8, 2, 1.0, rng)
        for sigma_sq in (1e-2, 1e-4):
            y = X.entries @ beta + math.sqrt(sigma_sq) * rng.standard_normal(4)
            for rule in rules:
                got = tuple(solve_l0(X, y, sigma_sq, rule, 3).support)
                want = _reference_l0(X, y, sigma_sq, rule, 3)
                checked += 1
                if got != want:
                    problems.append(
                        f"rule {rule.describe()} sigma_sq={sigma_sq}: {got} != {want}"
                    )
                    if len(problems) >= 5:
                        _announce(3, "subset scan equals enumerator", problems)
    _announce(
        3,
        f"subset scan equals the lstsq enumerator on {checked} solves "
        "(200 instances, two variances, fixed and adapted rules)",
        problems,
    )


def test_criterion_04_soft_threshold_triple_agreement():
    problems = []
    rng = np.random.default_rng(404)
    sigma = 0.25
    gammas = (1.0, 2.0, 3.5)
    for i in range(100):
        M = rng.standard_normal((8, 8))
        Q, R = np.linalg.qr(M)
        Q = Q * np.sign(np.diag(R))
        X = DesignMatrix(Q)
        beta, _ = gen_signal(8, 2, 1.0, rng)
        y = Q @ beta + sigma * rng.standard_normal(8)
        gamma = gammas[i % len(gammas)]
        lasso = solve_l1_penalty(X, y, sigma, gamma).estimate
        dantzig = solve_dantzig_orthonormal(X, y, sigma, gamma).estimate
        oracle = _soft(Q.T @ y, sigma * gamma)
        if np.max(np.abs(lasso - oracle)) > 1e-8:
            problems.append(f"instance {i}: lasso off oracle by "
                            f"{np.max(np.abs(lasso - oracle)):.2e}")
        if np.max(np.abs(dantzig - oracle)) > 1e-8:
            problems.append(f"instance {i}: dantzig off oracle by "
                            f"{np.max(np.abs(dantzig - oracle)):.2e}")
        if np.max(np.abs(lasso - dantzig)) > 1e-8:
            problems.append(f"instance {i}: lasso and dantzig disagree")
        if problems and len(problems) >= 5:
            break
    _announce(
        4,
        "lasso, correlation-constrained selection, and the per-coordinate "
        "soft-threshold oracle agree to 1e-8 on 100 orthonormal instances",
        problems,
    )


def test_criterion_05_lasso_stationarity_certification():
    problems = []
    rng = np.random.default_rng(505)
    X = gen_erc_matrix(32)
    gamma1 = 2.0 * math.sqrt(2.0 * math.log(X.p))
    variances = (1e-1, 1e-2, 1e-3, 1e-4)
    for i in range(500):
        beta, _ = gen_signal(X.p, 3, 1.0, rng)
        sigma = math.sqrt(variances[i % len(variances)])
        y = X.entries @ beta + sigma * rng.standard_normal(X.n)
        b = solve_l1_penalty(X, y, sigma, gamma1).estimate
        g = X.entries.T @ (y - X.entries @ b)
        t = sigma * gamma1
        nz = b != 0.0
        worst = 0.0
        if np.any(nz):
            worst = float(np.max(np.abs(g[nz] - t * np.sign(b[nz]))))
        if np.any(~nz):
            worst = max(worst, float(np.max(np.abs(g[~nz])) - t))
        if worst > 1e-8:
            problems.append(f"instance {i}: stationarity violation {worst:.2e}")
            if len(problems) >= 5:
                break
    _announce(
        5,
        "all 500 lasso returns on the 32x64 design pass the stationarity "
        "check at 1e-8",
        problems,
    )


def test_criterion_06_noiseless_exact_recovery():
    problems = []
    rng = np.random.default_rng(606)
    X = gen_erc_matrix(32)
    rule = parse_rule("ebic:1.0*pow:0.5", "l0")
    plan = SubsetScanPlan(X, 3)
    stop = StopRule.known_k(3)
    omp_hits = scan_hits = 0
    trials = 1000
    for _ in range(trials):
        beta, support = gen_signal(X.p, 3, 1.0, rng)
        y = X.entries @ beta
        truth = tuple(support)
        if tuple(sorted(omp(X, y, 1e-6, stop).support)) == truth:
            omp_hits += 1
        if tuple(solve_l0(X, y, 1e-12, rule, 3, plan=plan).support) == truth:
            scan_hits += 1
    if omp_hits != trials:
        problems.append(f"greedy recovery {omp_hits}/{trials}")
    if scan_hits != trials:
        problems.append(f"subset-scan recovery {scan_hits}/{trials}")
    _announce(
        6,
        f"noiseless exact recovery {omp_hits}/{trials} greedy and "
        f"{scan_hits}/{trials} subset scan at k=3 on the 32x64 design",
        problems,
    )


def test_criterion_07_fixed_rules_floor_at_high_snr():
    problems = []
    aic_cfg = ExperimentConfig(
        matrix_spec=RandomGaussian(5, 10),
        k_star=2,
        beta_magnitude=1.0,
        sigma_sq_grid=(1e-6,),
        algorithms=(("l0", parse_rule("aic", "l0")),),
        trials=10_000,
        master_seed=707,
    )
    point = estimate_pe(aic_cfg, 1e-6, aic_cfg.algorithms[0])
    if not point.pe_hat >= 0.10:
        problems.append(f"AIC floor {point.pe_hat:.4f} below 0.10")

    lasso_cfg = ExperimentConfig(
        matrix_spec=ERCHadamard(32),
        k_star=3,
        beta_magnitude=1.0,
        sigma_sq_grid=(1e-6, 1e-8),
        algorithms=(("l1_penalty", parse_rule("l1_candes", "l1_penalty")),),
        trials=10_000,
        master_seed=717,
    )
    hi = estimate_pe(lasso_cfg, 1e-6, lasso_cfg.algorithms[0])
    lo = estimate_pe(lasso_cfg, 1e-8, lasso_cfg.algorithms[0])
    gap = abs(lo.pe_hat - hi.pe_hat)
    slack = 3.0 * math.hypot(hi.stderr, lo.stderr)
    if gap > slack:
        problems.append(
            f"fixed-threshold lasso moved {gap:.4f} between variances, "
            f"above the 3-sigma slack {slack:.4f}"
        )
    _announce(
        7,
        f"fixed rules floor: AIC pe={point.pe_hat:.3f} at variance 1e-6; "
        f"fixed lasso pe {hi.pe_hat:.4f} vs {lo.pe_hat:.4f} across two "
        "decades (within Monte Carlo slack)",
        problems,
    )


def test_criterion_08_adapted_rules_are_consistent():
    problems = []
    grid = (1e-2, 1e-4, 1e-6, 1e-8)
    algorithms = (
        ("l0", parse_rule("ebic:1.0*pow:0.5", "l0")),
        ("l1_penalty", parse_rule("l1_candes*pow:0.3", "l1_penalty")),
        ("l1_error", parse_rule("l1err_candes*pow:0.3", "l1_error")),
        ("omp_rpsc", parse_rule("rpsc_default*pow:0.3", "omp_rpsc")),
        ("omp_rcsc", parse_rule("rcsc_default:4.0*pow:0.3", "omp_rcsc")),
    )
    cfg = ExperimentConfig(
        matrix_spec=ERCHadamard(32),
        k_star=3,
        beta_magnitude=1.0,
        sigma_sq_grid=grid,
        algorithms=algorithms,
        trials=10_000,
        master_seed=808,
    )
    curve = sweep(cfg)
    by_tag = {}
    for pt in curve:
        by_tag.setdefault(pt.algorithm, []).append(pt)
    finals = {}
    for tag, _ in algorithms:
        pts = by_tag[tag]
        for a, b in zip(pts, pts[1:]):
            slack = 2.0 * math.hypot(a.stderr, b.stderr)
            if b.pe_hat > a.pe_hat + slack:
                problems.append(
                    f"{tag}: pe rose {a.pe_hat:.4f} -> {b.pe_hat:.4f} from "
                    f"variance {a.sigma_sq:g} to {b.sigma_sq:g}"
                )
        finals[tag] = pts[-1].pe_hat
        if not pts[-1].pe_hat < 1e-2:
            problems.append(f"{tag}: pe at 1e-8 is {pts[-1].pe_hat:.4f}, not below 1e-2")
    summary = ", ".join(f"{tag}={pe:.4f}" for tag, pe in finals.items())
    _announce(
        8,
        "adapted rules decay across four decades and end below 1e-2 at "
        f"variance 1e-8 ({summary})",
        problems,
    )


def test_criterion_09_bounds_dominate_monte_carlo():
    problems = []
    rng = np.random.default_rng(909)

    for k, a_sq in ((1, 4.0), (5, 30.0), (29, 60.0)):
        draws = rng.chisquare(k, 100_000)
        freq = float(np.mean(draws >= a_sq))
        se = math.sqrt(max(freq * (1.0 - freq), 1e-12) / draws.size)
        bound = bounds.chi2_tail_bound(k, a_sq)
        if bound < freq - 3.0 * se:
            problems.append(
                f"chi2 bound {bound:.3e} below empirical tail {freq:.3e} "
                f"at (k={k}, a_sq={a_sq})"
            )

    X = gen_erc_matrix(32)
    support = SupportSet((0, 3, 40))
    beta = (1.0, 1.0, -1.0)
    gamma1, sigma = 12.0, 0.05
    inputs = bounds.RateBoundInputs.from_instance(X, support, gamma1, sigma, beta)
    e1 = bounds.e1_rate_bound(inputs)
    e2 = bounds.e2_rate_bound(inputs)

    cols = X.entries[:, list(support)]
    pinv = np.linalg.pinv(cols)
    proj = cols @ pinv
    draws = 10_000
    W = sigma * rng.standard_normal((draws, X.n))
    resid = W - W @ proj.T
    radius = sigma * gamma1 * (1.0 - inputs.erc)
    freq1 = float(np.mean(np.linalg.norm(resid, axis=1) <= radius))
    se1 = math.sqrt(max(freq1 * (1.0 - freq1), 1e-12) / draws)
    if e1.value > freq1 + 3.0 * se1:
        problems.append(
            f"no-false-alarm bound {e1.value:.4f} exceeds event frequency "
            f"{freq1:.4f} + 3se"
        )

    V = W @ pinv.T
    signs = np.sign(beta)
    margins = np.array(
        [abs(b) - sigma * gamma1 * d * c
         for b, c, d in zip(beta, inputs.c_seq, inputs.d_seq)]
    )
    ok = np.all((-signs) * V < margins, axis=1)
    freq2 = float(np.mean(ok))
    se2 = math.sqrt(max(freq2 * (1.0 - freq2), 1e-12) / draws)
    if e2.exact_q_form > freq2 + 3.0 * se2:
        problems.append(
            f"exact no-miss bound {e2.exact_q_form:.4f} exceeds event "
            f"frequency {freq2:.4f} + 3se"
        )
    if e2.exp_form is None:
        problems.append("exponential no-miss form was gated off at these inputs")
    elif e2.exp_form > freq2 + 3.0 * se2:
        problems.append(
            f"exponential no-miss bound {e2.exp_form:.4f} exceeds event "
            f"frequency {freq2:.4f} + 3se"
        )

    _announce(
        9,
        "tail bound dominates chi-square Monte Carlo at three points; "
        f"rate bounds e1={e1.value:.3f} <= {freq1:.3f} and "
        f"e2={e2.exact_q_form:.3f} <= {freq2:.3f} respect event frequencies",
        problems,
    )


def test_criterion_10_sweep_is_thread_deterministic(tmp_path, capsys):
    problems = []
    out1 = tmp_path / "threads1.csv"
    out8 = tmp_path / "threads8.csv"
    base = ("sweep", "--config", "configs/smoke.cfg")
    code1 = parse_and_dispatch([*base, "--threads", "1", "--out", str(out1)])
    code8 = parse_and_dispatch([*base, "--threads", "8", "--out", str(out8)])
    capsys.readouterr()
    if code1 != 0 or code8 != 0:
        problems.append(f"sweep exit codes {code1} and {code8}")
    elif out1.read_bytes() != out8.read_bytes():
        problems.append("CSV output differs between 1 and 8 worker threads")
    _announce(
        10,
        "full config sweep produces byte-identical CSV with 1 and 8 threads",
        problems,
    )
