"""Matrix regularity qualifiers for sparse support recovery.

Mutual coherence, the coherence-based sparsity ceiling, the exact
recovery coefficient of a support, and exhaustive spark certification.
These decide which recovery guarantees apply to a given design matrix.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .linalg import DesignMatrix, RankDeficiencyError, SupportSet, rank_from_singular_values

__all__ = [
    "UNBOUNDED_SPARSITY",
    "SparkResult",
    "QualifierReport",
    "mutual_coherence",
    "mic_max_sparsity",
    "erc_coefficient",
    "spark_exhaustive",
    "spark_condition_holds",
    "default_spark_cardinality",
    "qualify",
]

# Sentinel for the orthogonal case: coherence 0 imposes no sparsity ceiling.
UNBOUNDED_SPARSITY = math.inf

# Exhaustive spark search refuses to touch more subsets than this.
SPARK_SUBSET_GUARD = 10_000_000


def mutual_coherence(X: DesignMatrix) -> float:
    """Largest absolute inner product between two distinct columns.

    Requires at least two columns, each with unit Euclidean norm.
    """
    if X.p < 2:
        raise ValueError(f"mutual coherence needs p >= 2 columns, got p={X.p}")
    X.require_unit_norm_columns()
    gram = X.entries.T @ X.entries
    np.fill_diagonal(gram, 0.0)
    return float(np.max(np.abs(gram)))


def mic_max_sparsity(mu: float) -> float:
    """Largest sparsity k with mu < 1/(2k - 1); the coherence recovery ceiling.

    Returns 0 when no k >= 1 qualifies (mu >= 1) and the
    :data:`UNBOUNDED_SPARSITY` sentinel when mu == 0.
    """
    if mu < 0:
        raise ValueError(f"coherence must be nonnegative, got {mu}")
    if mu == 0.0:
        return UNBOUNDED_SPARSITY
    if mu >= 1.0:
        return 0
    k = max(1, int((1.0 / mu + 1.0) / 2.0))
    while mu * (2 * k - 1) >= 1.0:
        k -= 1
    while mu * (2 * (k + 1) - 1) < 1.0:
        k += 1
    return k


def erc_coefficient(X: DesignMatrix, J: SupportSet) -> float:
    """Exact recovery coefficient of support ``J``.

    Maximum over off-support columns of the l1 norm of their least-squares
    representation through the support columns. Values below 1 certify that
    convex and greedy recovery of ``J`` succeeds in the noise-free limit.
    """
    if len(J) == 0:
        raise ValueError("erc_coefficient requires a nonempty support")
    if len(J) >= X.p:
        raise ValueError("erc_coefficient requires at least one off-support column")
    XJ = X.columns(J)
    s = np.linalg.svd(XJ, compute_uv=False)
    if rank_from_singular_values(s, XJ.shape) < len(J):
        raise RankDeficiencyError(f"support columns {J.indices} are rank deficient")
    off = np.setdiff1d(np.arange(X.p), J.as_array())
    coeffs, _, _, _ = np.linalg.lstsq(XJ, X.entries[:, off], rcond=None)
    return float(np.max(np.sum(np.abs(coeffs), axis=0)))


@dataclass(frozen=True)
class SparkResult:
    """Outcome of an exhaustive spark search.

    ``exact`` is the spark when the search determined it, else ``None``;
    ``certified_above`` is always valid: spark > certified_above.
    ``by_convention`` marks the fully-independent case p <= n where no
    dependent subset exists at all and the value p + 1 is reported.
    """

    exact: int | None
    certified_above: int
    by_convention: bool = False

    def describe(self) -> str:
        if self.exact is None:
            return f"spark > {self.certified_above}"
        if self.by_convention:
            return f"{self.exact} (no dependent subset; p + 1 by convention)"
        return str(self.exact)


def default_spark_cardinality(n: int, p: int, subset_guard: int = SPARK_SUBSET_GUARD) -> int:
    """Largest search cardinality within both the size cap and the subset guard."""
    cap = min(n + 1, p, 12)
    total = 0
    k = 0
    while k < cap:
        total += math.comb(p, k + 1)
        if total > subset_guard:
            break
        k += 1
    return max(k, 1)


def _dependent_subset_exists(X: DesignMatrix, k: int) -> tuple[int, ...] | None:
    """First (lexicographic) size-k subset judged dependent by the rank rule."""
    entries = X.entries
    n, p = entries.shape
    combos_iter = itertools.combinations(range(p), k)
    if k == 1:
        norms = np.linalg.norm(entries, axis=0)
        zero = np.nonzero(norms == 0.0)[0]
        return (int(zero[0]),) if zero.size else None
    gram = entries.T @ entries
    chunk = 200_000
    while True:
        block = list(itertools.islice(combos_iter, chunk))
        if not block:
            return None
        combos = np.asarray(block, dtype=np.int64)
        sub = gram[combos[:, :, None], combos[:, None, :]]
        eigvals = np.linalg.eigvalsh(sub)
        lam_min = np.maximum(eigvals[:, 0], 0.0)
        lam_max = np.maximum(eigvals[:, -1], 0.0)
        # Conservative screen; candidates are confirmed with the exact rule.
        suspect = np.nonzero(lam_min <= 1e-12 * np.maximum(lam_max, 1e-300))[0]
        for i in suspect:
            cols = tuple(int(c) for c in combos[i])
            s = np.linalg.svd(entries[:, cols], compute_uv=False)
            if rank_from_singular_values(s, (n, k)) < k:
                return cols
    return None


def spark_exhaustive(
    X: DesignMatrix,
    max_cardinality: int | None = None,
    subset_guard: int = SPARK_SUBSET_GUARD,
) -> SparkResult:
    """Exhaustively search for the smallest linearly dependent column subset.

    Subsets are enumerated by increasing cardinality with early exit, so a
    hit is the exact spark. If no subset up to ``max_cardinality`` is
    dependent the result is the lower-bound marker, upgraded to the exact
    value p + 1 when the search provably covered every relevant size
    (possible only for p <= n).
    """
    n, p = X.n, X.p
    if max_cardinality is None:
        max_cardinality = default_spark_cardinality(n, p, subset_guard)
    if max_cardinality < 1:
        raise ValueError(f"max_cardinality must be >= 1, got {max_cardinality}")
    if max_cardinality > min(n + 1, p):
        raise ValueError(
            f"max_cardinality {max_cardinality} exceeds min(n + 1, p) = {min(n + 1, p)}"
        )
    total = sum(math.comb(p, k) for k in range(1, max_cardinality + 1))
    if total > subset_guard:
        raise ValueError(
            f"spark search over {total} subsets exceeds the guard ({subset_guard}); "
            "lower max_cardinality"
        )
    for k in range(1, max_cardinality + 1):
        if _dependent_subset_exists(X, k) is not None:
            return SparkResult(exact=k, certified_above=k - 1)
    if p <= n and max_cardinality >= min(n + 1, p):
        return SparkResult(exact=p + 1, certified_above=max_cardinality, by_convention=True)
    return SparkResult(exact=None, certified_above=max_cardinality)


def spark_condition_holds(spark_result: SparkResult, k_star: int) -> bool:
    """Whether the spark evidence implies spark(X) > 2 k_star."""
    if k_star < 0:
        raise ValueError(f"k_star must be nonnegative, got {k_star}")
    if spark_result.exact is not None:
        return spark_result.exact > 2 * k_star
    return spark_result.certified_above >= 2 * k_star


@dataclass(frozen=True)
class QualifierReport:
    """Bundle of the qualifier values for one matrix (and optional support)."""

    n: int
    p: int
    mutual_coherence: float
    mic_max_sparsity: float
    spark: SparkResult
    erc_coefficient: float | None = None
    erc_holds: bool | None = None


def qualify(
    X: DesignMatrix,
    support: SupportSet | None = None,
    spark_max_cardinality: int | None = None,
) -> QualifierReport:
    """Compute every qualifier for ``X``; ERC fields only when a support is given."""
    mu = mutual_coherence(X)
    spark = spark_exhaustive(X, spark_max_cardinality)
    erc = erc_holds = None
    if support is not None and len(support) > 0:
        erc = erc_coefficient(X, support)
        erc_holds = erc < 1.0
    return QualifierReport(
        n=X.n,
        p=X.p,
        mutual_coherence=mu,
        mic_max_sparsity=mic_max_sparsity(mu),
        spark=spark,
        erc_coefficient=erc,
        erc_holds=erc_holds,
    )
