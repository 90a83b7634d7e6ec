"""Analytic probability bounds for support recovery.

Closed-form expressions that bracket the probability of support-recovery
error: a floor on the error probability of penalized subset selection
with a noise-independent penalty, a chi-square tail bound, lower bounds
on the two events that drive lasso support consistency, and the
correlation margin that guarantees correct greedy selections.

Bounds can leave [0, 1] far outside their informative regimes, so the
result types carry both the clamped value and the raw expression value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import DesignMatrix, SupportSet, gram_diagnostics
from .qualifiers import erc_coefficient


def q_function(x):
    """Standard normal upper-tail probability Q(x) = P(Z > x).

    Evaluated through the complementary error function, which keeps
    absolute accuracy around 1e-14 even deep into the tail.
    """
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def l0_pe_lower_bound(gamma0):
    """Error-probability floor 2*Q(sqrt(gamma0)) for fixed penalties.

    When the penalty weight gamma0 does not grow as the noise vanishes,
    the error probability of cardinality-penalized subset selection stays
    above this value at every noise level (provided some full-rank
    superset of the true support exists), so such rules cannot be
    high-SNR consistent.
    """
    if not (gamma0 > 0 and math.isfinite(gamma0)):
        raise ValueError("gamma0 must be positive and finite")
    return 2.0 * q_function(math.sqrt(gamma0))


def chi2_tail_bound(k, a_sq):
    """Upper bound on P(chi2_k > a_sq), valid for a_sq > k.

    Evaluates exp(k/2) / k^{k/2} * exp(-(a_sq - k*ln(a_sq))/2) in the log
    domain to avoid overflow at large arguments.
    """
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError("k must be a positive integer")
    if not (a_sq > k):
        raise ValueError(f"a_sq must exceed k (got a_sq={a_sq}, k={k})")
    log_bound = 0.5 * k * (1.0 + math.log(a_sq) - math.log(k)) - 0.5 * a_sq
    return math.exp(log_bound)


@dataclass(frozen=True)
class BoundValue:
    """A bound with its raw expression value alongside the clamped one."""

    value: float
    raw: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class E2Bound:
    """Lower bounds on the missed-detection-free event.

    exact_q_form uses exact Gaussian tails and is always defined;
    exp_form uses the tail bound Q(x) <= exp(-x^2/2)/2, which only holds
    for x > 2, so it is None whenever any argument falls at or below 2.
    Raw (unclamped) expression values ride along.
    """

    exact_q_form: float
    exp_form: float | None
    exact_q_raw: float
    exp_raw: float | None


@dataclass(frozen=True)
class RateBoundInputs:
    """Ingredients of the lasso rate bounds for one design and support.

    Attributes
    ----------
    n, k_star : int
        Observation count and true support size.
    erc : float
        Exact-recovery coefficient of the design at the true support,
        in [0, 1).
    gamma1 : float
        Lasso threshold multiplier (the penalty is sigma*gamma1).
    sigma : float
        Noise standard deviation.
    beta_support : tuple of float
        The k_star nonzero coefficients, in ascending index order.
    c_seq : tuple of float
        Per-coefficient noise scales sqrt([G^{-1}]_jj) of the support Gram.
    d_seq : tuple of float
        Per-coefficient bias scales; either ||G^{-1}||_inf / c_j or
        ||pinv(X_I)||_2 / c_j depending on the target algorithm.
    """

    n: int
    k_star: int
    erc: float
    gamma1: float
    sigma: float
    beta_support: tuple
    c_seq: tuple
    d_seq: tuple

    def __post_init__(self):
        if self.k_star < 1 or self.n < self.k_star:
            raise ValueError("need 1 <= k_star <= n")
        if not (0.0 <= self.erc < 1.0):
            raise ValueError("erc must lie in [0, 1)")
        if not (self.gamma1 > 0 and math.isfinite(self.gamma1)):
            raise ValueError("gamma1 must be positive and finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")
        for name in ("beta_support", "c_seq", "d_seq"):
            seq = tuple(float(v) for v in getattr(self, name))
            if len(seq) != self.k_star:
                raise ValueError(f"{name} must have length k_star={self.k_star}")
            if not all(math.isfinite(v) for v in seq):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, seq)
        if any(v == 0 for v in self.beta_support):
            raise ValueError("beta_support entries must be nonzero")
        if any(v <= 0 for v in self.c_seq) or any(v <= 0 for v in self.d_seq):
            raise ValueError("c_seq and d_seq must be positive")

    @classmethod
    def from_instance(cls, X, support, gamma1, sigma, beta_support, d_norm="inf"):
        """Assemble inputs from a design matrix and true support.

        d_norm selects the bias scale: "inf" uses the infinity-norm of the
        support Gram inverse (the lasso analysis), "spectral" the spectral
        norm of the support pseudo-inverse (the residual-constrained
        analysis).
        """
        if not isinstance(X, DesignMatrix):
            X = DesignMatrix(np.asarray(X, dtype=float))
        if not isinstance(support, SupportSet):
            support = SupportSet(tuple(support))
        if d_norm not in ("inf", "spectral"):
            raise ValueError("d_norm must be 'inf' or 'spectral'")
        erc = erc_coefficient(X, support)
        diag = gram_diagnostics(X, support)
        c_seq = tuple(float(c) for c in diag.diag_sqrt)
        if d_norm == "inf":
            scale = diag.gram_inverse_inf_norm
        else:
            scale = diag.pseudo_inverse_22_norm
        d_seq = tuple(scale / c for c in c_seq)
        return cls(
            n=X.n,
            k_star=len(support),
            erc=erc,
            gamma1=gamma1,
            sigma=sigma,
            beta_support=tuple(float(b) for b in beta_support),
            c_seq=c_seq,
            d_seq=d_seq,
        )


def e1_rate_bound(inputs):
    """Lower bound on the no-false-alarm event driving lasso recovery.

    With b1 = 1 - erc and df = n - k_star, the complement event has
    probability at most the chi-square tail bound at (df, (gamma1*b1)^2),
    giving 1 minus that as the lower bound. Requires
    (gamma1*b1)^2 > df.

    Returns
    -------
    BoundValue
        value clamped to [0, 1]; raw carries the unclamped expression.
    """
    if not isinstance(inputs, RateBoundInputs):
        raise TypeError("inputs must be RateBoundInputs")
    b1 = 1.0 - inputs.erc
    df = inputs.n - inputs.k_star
    g2 = (inputs.gamma1 * b1) ** 2
    if not (g2 > df):
        raise ValueError(
            f"(gamma1*b1)^2 = {g2} must exceed n - k_star = {df} for the "
            "tail bound to apply"
        )
    if df == 0:
        tail = math.exp(-0.5 * g2)
    else:
        tail = chi2_tail_bound(df, g2)
    raw = 1.0 - tail
    return BoundValue(value=min(max(raw, 0.0), 1.0), raw=raw)


def e2_rate_bound(inputs):
    """Lower bounds on the no-missed-detection event.

    Each argument is |beta_j| / (sigma * c_j) - gamma1 * d_j; the exact
    form subtracts Gaussian tails Q(arg_j) from 1, and the exponential
    form replaces Q by its sub-Gaussian bound, valid only when every
    argument exceeds 2. The expression is written for negative
    coefficients in the source analysis; absolute values are substituted
    here since the underlying Gaussian probability depends only on
    magnitudes, which makes the bound sign-agnostic.
    """
    if not isinstance(inputs, RateBoundInputs):
        raise TypeError("inputs must be RateBoundInputs")
    args = [
        abs(b) / (inputs.sigma * c) - inputs.gamma1 * d
        for b, c, d in zip(inputs.beta_support, inputs.c_seq, inputs.d_seq)
    ]
    exact_raw = 1.0 - sum(q_function(a) for a in args)
    exact = min(max(exact_raw, 0.0), 1.0)
    if all(a > 2.0 for a in args):
        exp_raw = 1.0 - 0.5 * sum(math.exp(-0.5 * a * a) for a in args)
        exp_val = min(max(exp_raw, 0.0), 1.0)
    else:
        exp_raw = None
        exp_val = None
    return E2Bound(
        exact_q_form=exact,
        exp_form=exp_val,
        exact_q_raw=exact_raw,
        exp_raw=exp_raw,
    )


def omp_selection_margin(X, support, beta_min):
    """Noise-correlation threshold for correct greedy selections.

    Whenever the maximum absolute correlation between the columns and the
    noise stays below the returned margin, orthogonal matching pursuit is
    guaranteed to pick only true-support indices during its first k_star
    iterations. The constant is
    (1 - erc) * lam_min(X_I^T X_I) / (2*sqrt(k_star)) times beta_min.
    """
    if not isinstance(X, DesignMatrix):
        X = DesignMatrix(np.asarray(X, dtype=float))
    if not isinstance(support, SupportSet):
        support = SupportSet(tuple(support))
    if len(support) < 1:
        raise ValueError("support must be nonempty")
    if not (beta_min > 0 and math.isfinite(beta_min)):
        raise ValueError("beta_min must be positive and finite")
    erc = erc_coefficient(X, support)
    if erc >= 1.0:
        raise ValueError(f"exact-recovery coefficient {erc} is not below 1")
    diag = gram_diagnostics(X, support)
    k = len(support)
    c_const = (1.0 - erc) * diag.min_eigenvalue / (2.0 * math.sqrt(k))
    return c_const * beta_min
