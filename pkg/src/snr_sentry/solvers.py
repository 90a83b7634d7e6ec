"""Support recovery solvers.

Five procedures share a common result type:

* :func:`solve_l0` -- exhaustive best-subset search with a cardinality
  penalty ``sigma_sq * gamma(k) * k``.
* :func:`oracle_known_k` -- best subset at a known cardinality, no penalty.
* :func:`solve_l1_penalty` -- lasso via cyclic coordinate descent.
* :func:`solve_l1_error` -- minimum l1 norm subject to a residual budget,
  solved by bisection along the lasso path.
* :func:`solve_dantzig_orthonormal` -- closed-form correlation-constrained
  estimate for orthonormal designs.
* :func:`omp` -- orthogonal matching pursuit with pluggable stop rules.

Estimated supports are always read off the estimate with
:func:`support_from_estimate` so every solver reports supports under the
same thresholding convention.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .linalg import (
    DesignMatrix,
    RankDeficiencyError,
    SupportSet,
    least_squares_min_norm,
    rank_from_singular_values,
)
from .tuning import TuningRule, gamma_value

SUPPORT_TOL = 1e-8
SUBSET_GUARD = 10_000_000
_PLAN_CACHE_BYTES = 600_000_000
_CHUNK_ROWS = 200_000
_EIG_SUSPECT_RATIO = 1e-12


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of iterations.

    Carries the best iterate seen so far in ``best_estimate`` so callers
    can inspect or salvage it.
    """

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


def support_from_estimate(estimate, tol=SUPPORT_TOL):
    """Indices whose magnitude exceeds ``tol * max(1, ||estimate||_inf)``."""
    est = np.asarray(estimate, dtype=float)
    cut = tol * max(1.0, float(np.max(np.abs(est))) if est.size else 0.0)
    idx = np.nonzero(np.abs(est) > cut)[0]
    return SupportSet(tuple(int(j) for j in idx))


@dataclass(frozen=True)
class RecoveryResult:
    """Outcome of one solver run.

    Attributes
    ----------
    estimate : numpy.ndarray
        Coefficient vector of length p.
    support : SupportSet
        Indices surviving the magnitude threshold, ascending.
    objective : float
        Solver-specific final objective or constraint slack.
    iterations : int
        Work counter (subsets scanned, sweeps, bisection steps, or
        selection steps depending on the solver).
    trace : tuple or None
        Optional per-iteration diagnostics (used by OMP).
    """

    estimate: np.ndarray
    support: SupportSet
    objective: float
    iterations: int
    trace: tuple | None = None

    def __post_init__(self):
        est = np.array(self.estimate, dtype=float)
        est.flags.writeable = False
        object.__setattr__(self, "estimate", est)


def _finite_vector(y, n, name="y"):
    vec = np.asarray(y, dtype=float).reshape(-1)
    if vec.shape[0] != n:
        raise ValueError(f"{name} has length {vec.shape[0]}, expected {n}")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"{name} must be finite")
    return vec


# ---------------------------------------------------------------------------
# Subset scan machinery shared by solve_l0 and oracle_known_k.
# ---------------------------------------------------------------------------


@dataclass
class _ScanChunk:
    """Precomputed data for one contiguous block of size-k subsets."""

    combos: np.ndarray  # (m, k) int64, full-rank subsets only
    positions: np.ndarray  # (m,) int64, position in lexicographic order
    ginv: np.ndarray  # (m, k, k) stacked Gram inverses
    lam_min: np.ndarray  # (m,) smallest Gram eigenvalues
    deficient: list  # [(position, cols tuple)] rank-deficient subsets

    def nbytes(self):
        return self.combos.nbytes + self.positions.nbytes + self.ginv.nbytes + self.lam_min.nbytes


def _build_chunks(X, gram, k, chunk_rows=_CHUNK_ROWS):
    """Yield :class:`_ScanChunk` blocks covering all size-k subsets.

    Subsets are enumerated in lexicographic order. Each block is screened
    with a batched eigendecomposition; any subset whose smallest eigenvalue
    falls below ``1e-12`` of its largest is re-examined with an exact SVD
    rank test, and genuinely dependent subsets are routed to the slow
    (least squares) path instead of the inverse-based kernel.
    """
    n = X.n
    entries = X.entries
    it = itertools.combinations(range(X.p), k)
    pos0 = 0
    while True:
        block = list(itertools.islice(it, chunk_rows))
        if not block:
            return
        combos = np.asarray(block, dtype=np.int64)
        m = combos.shape[0]
        gsub = gram[combos[:, :, None], combos[:, None, :]]
        lam = np.linalg.eigvalsh(gsub)
        lam_min = lam[:, 0]
        lam_max = lam[:, -1]
        suspect = lam_min <= _EIG_SUSPECT_RATIO * np.maximum(lam_max, np.finfo(float).tiny)
        deficient = []
        good = np.ones(m, dtype=bool)
        fixup = []
        for i in np.nonzero(suspect)[0]:
            cols = tuple(int(c) for c in combos[i])
            sv = np.linalg.svd(entries[:, list(cols)], compute_uv=False)
            if rank_from_singular_values(sv, (n, k)) < k:
                deficient.append((pos0 + int(i), cols))
                good[i] = False
            else:
                fixup.append(int(i))
        combos_g = combos[good]
        gsub_g = gsub[good]
        try:
            ginv = np.linalg.inv(gsub_g)
        except np.linalg.LinAlgError:
            ginv = np.empty_like(gsub_g)
            for i in range(gsub_g.shape[0]):
                try:
                    ginv[i] = np.linalg.inv(gsub_g[i])
                except np.linalg.LinAlgError:
                    ginv[i] = np.linalg.pinv(gsub_g[i])
        if fixup:
            # Full rank by the SVD test but ill conditioned: replace the LU
            # inverse with a pseudo-inverse for stability. Their lam_min is
            # tiny, so the pruning bound can never skip them.
            keep = np.cumsum(good) - 1
            for i in fixup:
                ginv[keep[i]] = np.linalg.pinv(gsub[i])
        lam_g = np.maximum(lam_min[good], np.finfo(float).tiny)
        positions = (pos0 + np.nonzero(good)[0]).astype(np.int64)
        yield _ScanChunk(
            combos=np.ascontiguousarray(combos_g),
            positions=positions,
            ginv=np.ascontiguousarray(ginv),
            lam_min=np.ascontiguousarray(lam_g),
            deficient=deficient,
        )
        pos0 += m


class SubsetScanPlan:
    """Reusable precomputation for exhaustive subset scans over one matrix.

    Building the stacked Gram inverses once and reusing them across many
    right-hand sides is what makes Monte Carlo sweeps affordable. Chunks
    are cached while the total stays under a memory budget; beyond that
    they are regenerated on every scan.
    """

    def __init__(self, X, max_cardinality, cache_bytes=_PLAN_CACHE_BYTES):
        if not isinstance(X, DesignMatrix):
            X = DesignMatrix(np.asarray(X, dtype=float))
        if max_cardinality < 1 or max_cardinality > min(X.n, X.p):
            raise ValueError("max_cardinality must be in [1, min(n, p)]")
        self.X = X
        self.max_cardinality = int(max_cardinality)
        self.gram = X.entries.T @ X.entries
        self._cache_bytes = cache_bytes
        self._used_bytes = 0
        self._cache = {}

    def subset_count(self, k):
        return math.comb(self.X.p, k)

    def total_subsets(self):
        return sum(self.subset_count(k) for k in range(1, self.max_cardinality + 1))

    def chunks(self, k):
        if k in self._cache:
            return iter(self._cache[k])
        return self._materialize(k)

    def _materialize(self, k):
        collected = []
        collecting = True
        for chunk in _build_chunks(self.X, self.gram, k):
            if collecting:
                collected.append(chunk)
                self._used_bytes += chunk.nbytes()
                if self._used_bytes > self._cache_bytes:
                    # Over budget: stop accumulating, stream the rest, and
                    # do not keep this cardinality for reuse.
                    for c in collected:
                        self._used_bytes -= c.nbytes()
                    collecting = False
            yield chunk
        if collecting:
            self._cache[k] = collected


def _scan_cardinality(plan, z, y, y_sq, k, guard):
    """Best size-k subset by the quadratic form, ties to the earliest.

    Returns ``(cols, quad, count)`` where quad is ``z_J^T G_J^{-1} z_J``
    (equal to ``||y||^2 - ||residual||^2``) and count the number of
    subsets examined.
    """
    best_quad = -math.inf
    best_pos = -1
    best_cols = None
    count = 0
    for chunk in plan.chunks(k):
        count += chunk.positions.shape[0] + len(chunk.deficient)
        if chunk.combos.shape[0]:
            i, q = _kernels.scan_best_quad(
                z, chunk.combos, chunk.ginv, chunk.lam_min, guard, best_quad
            )
            if i >= 0:
                best_quad = q
                best_pos = int(chunk.positions[i])
                best_cols = tuple(int(c) for c in chunk.combos[i])
        for pos, cols in chunk.deficient:
            _, resid_sq = least_squares_min_norm(plan.X, SupportSet(cols), y)
            quad = y_sq - resid_sq
            if quad > best_quad:
                best_quad = quad
                best_pos = pos
                best_cols = cols
    return best_cols, best_quad, count, best_pos


def _embedded_solution(X, cols, y):
    support = SupportSet(cols)
    coef, resid_sq = least_squares_min_norm(X, support, y)
    estimate = np.zeros(X.p)
    estimate[list(cols)] = coef
    return estimate, resid_sq


def solve_l0(X, y, sigma_sq, rule, max_cardinality, plan=None):
    """Exhaustive cardinality-penalized subset selection.

    Minimizes ``||y - P_J y||^2 + sigma_sq * gamma(|J|) * |J|`` over all
    subsets J with ``|J| <= max_cardinality``, including the empty set.
    The penalty weight gamma may depend on the cardinality (per-model
    criteria) and on sigma_sq (adaptive rules). Ties are broken toward
    smaller cardinality, then lexicographically earliest subset.

    Parameters
    ----------
    X : DesignMatrix
    y : array_like, shape (n,)
    sigma_sq : float
        Noise variance, must be positive.
    rule : TuningRule
        Penalty family; must target the l0 objective.
    max_cardinality : int
        Largest subset size to scan, in ``[1, min(n, p)]``.
    plan : SubsetScanPlan, optional
        Reusable precomputation for X. Built on the fly when omitted.

    Returns
    -------
    RecoveryResult
        ``objective`` is the winning penalized value; ``iterations`` the
        number of subsets examined (the empty set included).
    """
    if not isinstance(rule, TuningRule):
        raise TypeError("rule must be a TuningRule")
    if rule.target != "l0":
        raise ValueError(f"rule targets {rule.target!r}, expected 'l0'")
    if not (sigma_sq > 0 and math.isfinite(sigma_sq)):
        raise ValueError("sigma_sq must be positive and finite")
    if plan is None:
        plan = SubsetScanPlan(X, max_cardinality)
    else:
        entries = X.entries if isinstance(X, DesignMatrix) else np.asarray(X, dtype=float)
        if plan.X.entries is not entries and not np.array_equal(plan.X.entries, entries):
            raise ValueError("plan was built for a different matrix")
        if plan.max_cardinality < max_cardinality:
            raise ValueError("plan covers a smaller max_cardinality")
    X = plan.X
    if plan.total_subsets() > SUBSET_GUARD:
        raise ValueError(
            f"subset search would visit {plan.total_subsets()} subsets, "
            f"above the guard of {SUBSET_GUARD}; lower max_cardinality"
        )
    y = _finite_vector(y, X.n)
    y_sq = float(y @ y)
    z = X.entries.T @ y
    guard = 1e-10 * max(1.0, y_sq)

    best_cols = ()
    best_obj = y_sq
    count = 1
    for k in range(1, max_cardinality + 1):
        gamma_k = gamma_value(rule, X.n, X.p, k, sigma_sq)
        cols, quad, seen, _ = _scan_cardinality(plan, z, y, y_sq, k, guard)
        count += seen
        if cols is None:
            continue
        obj = (y_sq - quad) + sigma_sq * gamma_k * k
        if obj < best_obj:
            best_obj = obj
            best_cols = cols

    if best_cols:
        estimate, resid_sq = _embedded_solution(X, best_cols, y)
        gamma_k = gamma_value(rule, X.n, X.p, len(best_cols), sigma_sq)
        objective = resid_sq + sigma_sq * gamma_k * len(best_cols)
    else:
        estimate = np.zeros(X.p)
        objective = y_sq
    return RecoveryResult(
        estimate=estimate,
        support=support_from_estimate(estimate),
        objective=float(objective),
        iterations=count,
    )


def oracle_known_k(X, y, k_star, plan=None):
    """Best subset of exactly k_star columns by residual norm.

    The cardinality is taken as known, so no penalty is applied; the
    minimizer of ``||y - P_J y||^2`` over ``|J| = k_star`` wins, with ties
    broken lexicographically.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(np.asarray(X, dtype=float))
    if not (1 <= k_star <= min(X.n, X.p)):
        raise ValueError("k_star must be in [1, min(n, p)]")
    if plan is None:
        plan = SubsetScanPlan(X, k_star)
    elif plan.max_cardinality < k_star:
        raise ValueError("plan covers a smaller max_cardinality")
    X = plan.X
    if plan.subset_count(k_star) > SUBSET_GUARD:
        raise ValueError("subset count exceeds the search guard")
    y = _finite_vector(y, X.n)
    y_sq = float(y @ y)
    z = X.entries.T @ y
    guard = 1e-10 * max(1.0, y_sq)
    cols, _, count, _ = _scan_cardinality(plan, z, y, y_sq, k_star, guard)
    estimate, resid_sq = _embedded_solution(X, cols, y)
    return RecoveryResult(
        estimate=estimate,
        support=support_from_estimate(estimate),
        objective=float(resid_sq),
        iterations=count,
    )


# ---------------------------------------------------------------------------
# Convex solvers.
# ---------------------------------------------------------------------------


def _cd_solve(G, c, thresh, init, tol_kkt, max_sweeps):
    b = np.zeros(G.shape[0]) if init is None else np.array(init, dtype=float)
    sweeps = _kernels.cd_lasso(G, c, thresh, b, tol_kkt, max_sweeps)
    return b, int(sweeps)


def solve_l1_penalty(
    X, y, sigma, gamma1, tol_kkt=1e-10, max_sweeps=100_000, init=None
):
    """Lasso estimate: minimize ``0.5||y - Xb||^2 + sigma*gamma1*||b||_1``.

    Cyclic coordinate descent with exact coordinate updates; convergence
    is declared when the stationarity residual drops to ``tol_kkt``.
    Cold starts are warmed through a geometric continuation from the
    all-zero threshold down to the requested one, which keeps the active
    set small throughout; without it, very small thresholds on wide
    designs let flat-direction coefficients build up and then decay by
    only O(threshold) per sweep. Coordinates driven to zero are exact
    zeros, so the reported support needs no extra cleanup.

    Raises
    ------
    ConvergenceError
        If any stage exhausts max_sweeps; the best iterate rides along.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(np.asarray(X, dtype=float))
    X.require_unit_norm_columns()
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError("sigma must be positive and finite")
    if not (gamma1 > 0 and math.isfinite(gamma1)):
        raise ValueError("gamma1 must be positive and finite")
    y = _finite_vector(y, X.n)
    if init is not None:
        init = _finite_vector(init, X.p, "init")
    G = X.entries.T @ X.entries
    c = X.entries.T @ y
    thresh = sigma * gamma1
    total_sweeps = 0
    b = init
    if init is None:
        lam = 0.5 * float(np.max(np.abs(c)))
        while lam > 2.0 * thresh:
            b, sweeps = _cd_solve(G, c, lam, b, max(tol_kkt, 1e-4 * lam), max_sweeps)
            if sweeps < 0:
                raise ConvergenceError(
                    f"continuation stage at threshold {lam} did not "
                    f"converge within {max_sweeps} sweeps",
                    best_estimate=b,
                )
            total_sweeps += sweeps
            lam *= 0.5
    b, sweeps = _cd_solve(G, c, thresh, b, tol_kkt, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(
            f"coordinate descent did not reach tol_kkt={tol_kkt} "
            f"within {max_sweeps} sweeps",
            best_estimate=b,
        )
    total_sweeps += sweeps
    resid = y - X.entries @ b
    objective = 0.5 * float(resid @ resid) + thresh * float(np.sum(np.abs(b)))
    return RecoveryResult(
        estimate=b,
        support=support_from_estimate(b),
        objective=objective,
        iterations=total_sweeps,
    )


def solve_l1_error(X, y, sigma, gamma2, tol_res=1e-6, max_steps=200):
    """Minimum l1 norm subject to ``||y - Xb||_2 <= sigma*gamma2``.

    Solved through the penalized formulation: the residual norm of the
    lasso solution is nondecreasing in the penalty, so a bisection on the
    log of the penalty brings the residual into
    ``[eps*(1 - tol_res), eps]``, which keeps the constraint feasible
    while matching it to relative accuracy tol_res. If ``||y||_2`` is
    already within budget the zero vector is returned outright.

    Returns
    -------
    RecoveryResult
        ``objective`` is ``||estimate||_1``; ``iterations`` counts inner
        lasso solves.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(np.asarray(X, dtype=float))
    X.require_unit_norm_columns()
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError("sigma must be positive and finite")
    if not (gamma2 > 0 and math.isfinite(gamma2)):
        raise ValueError("gamma2 must be positive and finite")
    y = _finite_vector(y, X.n)
    eps = sigma * gamma2
    y_norm = float(np.linalg.norm(y))
    if y_norm <= eps:
        estimate = np.zeros(X.p)
        return RecoveryResult(
            estimate=estimate,
            support=SupportSet.empty(),
            objective=0.0,
            iterations=0,
        )

    all_cols = SupportSet(tuple(range(X.p)))
    _, rmin_sq = least_squares_min_norm(X, all_cols, y)
    rmin = math.sqrt(max(rmin_sq, 0.0))
    if eps <= rmin * (1.0 + 1e-9):
        raise ValueError(
            f"residual budget {eps} is unreachable: the minimum attainable "
            f"residual norm is {rmin}"
        )

    G = X.entries.T @ X.entries
    c = X.entries.T @ y
    # The bisection targets a residual window of width tol_res * eps, so
    # the inner solves must resolve coefficients well below that scale or
    # the window becomes invisible behind optimization noise.
    tol_kkt = max(min(1e-10, 1e-2 * tol_res * eps), 1e-15)
    max_sweeps = 100_000

    def resid_norm(b):
        r = y - X.entries @ b
        return float(np.linalg.norm(r))

    hi = float(np.max(np.abs(c)))
    lo = hi
    b_lo = None
    r_lo = y_norm
    solves = 0
    target_lo = eps * (1.0 - tol_res)
    # Walk the penalty down until the residual enters the budget.
    for _ in range(100):
        lo *= 0.25
        b_lo, sweeps = _cd_solve(G, c, lo, b_lo, tol_kkt, max_sweeps)
        solves += 1
        if sweeps < 0:
            raise ConvergenceError(
                "inner lasso solve stalled while bracketing the penalty",
                best_estimate=b_lo,
            )
        r_lo = resid_norm(b_lo)
        if r_lo <= eps:
            break
    else:
        raise ConvergenceError(
            "failed to bracket the residual budget", best_estimate=b_lo
        )

    while solves < max_steps:
        if r_lo >= target_lo:
            objective = float(np.sum(np.abs(b_lo)))
            return RecoveryResult(
                estimate=b_lo,
                support=support_from_estimate(b_lo),
                objective=objective,
                iterations=solves,
            )
        mid = math.exp(0.5 * (math.log(lo) + math.log(hi)))
        b_mid, sweeps = _cd_solve(G, c, mid, b_lo, tol_kkt, max_sweeps)
        solves += 1
        if sweeps < 0:
            raise ConvergenceError(
                "inner lasso solve stalled during bisection",
                best_estimate=b_mid,
            )
        r_mid = resid_norm(b_mid)
        if r_mid <= eps:
            lo, b_lo, r_lo = mid, b_mid, r_mid
        else:
            hi = mid
    raise ConvergenceError(
        f"bisection did not localize the residual budget within "
        f"{max_steps} lasso solves",
        best_estimate=b_lo,
    )


def solve_dantzig_orthonormal(X, y, sigma, gamma3):
    """Correlation-constrained selection for orthonormal designs.

    Requires ``X^T X = I`` to within 1e-8 elementwise; in that geometry the
    minimizer of ``||b||_1`` subject to ``||X^T (y - Xb)||_inf <=
    sigma*gamma3`` is soft thresholding of the correlations ``X^T y`` at
    level ``sigma*gamma3``.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(np.asarray(X, dtype=float))
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError("sigma must be positive and finite")
    if not (gamma3 > 0 and math.isfinite(gamma3)):
        raise ValueError("gamma3 must be positive and finite")
    gram = X.entries.T @ X.entries
    dev = float(np.max(np.abs(gram - np.eye(X.p))))
    if dev > 1e-8:
        raise ValueError(
            f"columns are not orthonormal: max |X^T X - I| = {dev:.3e} "
            "exceeds 1e-8; this closed form only applies to orthonormal "
            "designs"
        )
    y = _finite_vector(y, X.n)
    z = X.entries.T @ y
    t = sigma * gamma3
    estimate = np.sign(z) * np.maximum(np.abs(z) - t, 0.0)
    return RecoveryResult(
        estimate=estimate,
        support=support_from_estimate(estimate),
        objective=float(np.sum(np.abs(estimate))),
        iterations=0,
    )


# ---------------------------------------------------------------------------
# Orthogonal matching pursuit.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StopRule:
    """Stopping policy for orthogonal matching pursuit.

    kind is one of ``"known_k"`` (stop after k selections), ``"rpsc"``
    (stop when the residual l2 norm drops below ``sigma*gamma``), or
    ``"rcsc"`` (stop when the max absolute correlation drops below
    ``sigma*gamma``). max_iterations caps the number of selections and
    defaults to n.
    """

    kind: str
    k: int | None = None
    gamma: float | None = None
    max_iterations: int | None = None

    def __post_init__(self):
        if self.kind not in ("known_k", "rpsc", "rcsc"):
            raise ValueError(f"unknown stop rule kind {self.kind!r}")
        if self.kind == "known_k":
            if self.k is None or self.k < 1:
                raise ValueError("known_k requires a positive k")
            if self.gamma is not None:
                raise ValueError("known_k takes no gamma")
        else:
            if self.gamma is None or not (self.gamma > 0):
                raise ValueError(f"{self.kind} requires a positive gamma")
            if self.k is not None:
                raise ValueError(f"{self.kind} takes no k")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    @classmethod
    def known_k(cls, k, max_iterations=None):
        return cls(kind="known_k", k=k, max_iterations=max_iterations)

    @classmethod
    def rpsc(cls, gamma, max_iterations=None):
        return cls(kind="rpsc", gamma=gamma, max_iterations=max_iterations)

    @classmethod
    def rcsc(cls, gamma, max_iterations=None):
        return cls(kind="rcsc", gamma=gamma, max_iterations=max_iterations)


def omp(X, y, sigma, stop):
    """Orthogonal matching pursuit.

    Repeatedly selects the column most correlated with the current
    residual (ties to the smallest index), refits by least squares on the
    selected set, and recomputes the residual. The stop rule is checked
    before every selection, including the first, so a small enough signal
    yields the empty support.

    Parameters
    ----------
    X : DesignMatrix
    y : array_like, shape (n,)
    sigma : float
        Noise scale used by the residual and correlation stop rules. Must
        be positive even for known_k (it is simply unused there).
    stop : StopRule

    Returns
    -------
    RecoveryResult
        ``trace`` holds ``(selected_index, residual_norm)`` per iteration;
        ``objective`` is the final squared residual norm.

    Raises
    ------
    RankDeficiencyError
        If a selection makes the selected columns rank deficient.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(np.asarray(X, dtype=float))
    X.require_unit_norm_columns()
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError("sigma must be positive and finite")
    if not isinstance(stop, StopRule):
        raise TypeError("stop must be a StopRule")
    y = _finite_vector(y, X.n)

    cap = X.n if stop.max_iterations is None else min(stop.max_iterations, X.n)
    if stop.kind == "known_k":
        if stop.k > min(X.n, X.p):
            raise ValueError("known_k exceeds min(n, p)")
        cap = min(cap, stop.k)

    selected = []
    residual = y.copy()
    coef = np.zeros(0)
    trace = []
    for _ in range(cap):
        if stop.kind == "known_k":
            if len(selected) >= stop.k:
                break
        elif stop.kind == "rpsc":
            if float(np.linalg.norm(residual)) < sigma * stop.gamma:
                break
        else:
            corr_now = X.entries.T @ residual
            if float(np.max(np.abs(corr_now))) < sigma * stop.gamma:
                break
        corr = X.entries.T @ residual
        t = int(np.argmax(np.abs(corr)))
        if t in selected:
            # The residual is orthogonal to selected columns, so this only
            # happens when every correlation is exactly zero; selecting
            # again would loop forever.
            break
        selected.append(t)
        support = SupportSet(tuple(sorted(selected)))
        cols = X.columns(support)
        sv = np.linalg.svd(cols, compute_uv=False)
        if rank_from_singular_values(sv, cols.shape) < len(selected):
            raise RankDeficiencyError(
                f"selected columns {sorted(selected)} are rank deficient"
            )
        coef_s = np.linalg.lstsq(cols, y, rcond=None)[0]
        residual = y - cols @ coef_s
        coef = coef_s
        trace.append((t, float(np.linalg.norm(residual))))

    estimate = np.zeros(X.p)
    if selected:
        order = sorted(selected)
        estimate[order] = coef
    resid_sq = float(residual @ residual)
    return RecoveryResult(
        estimate=estimate,
        support=support_from_estimate(estimate),
        objective=resid_sq,
        iterations=len(selected),
        trace=tuple(trace),
    )
