"""Tuning-parameter families and their high-SNR consistency classification.

Each recovery procedure takes a scalar tuning parameter Gamma that scales
its penalty or constraint level. This module evaluates the named fixed
criteria (information criteria, residual and correlation thresholds), the
noise-adaptive scalings layered on top of them, and a symbolic check of
whether a rule satisfies the sufficient conditions for the recovery error
to vanish as the noise variance goes to zero.

All logarithms are natural.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

__all__ = [
    "TuningRule",
    "ConsistencyVerdict",
    "CONSISTENT_SUFFICIENT",
    "VIOLATES_GROWTH",
    "VIOLATES_DECAY",
    "VIOLATES_BOTH",
    "TARGETS",
    "gamma_value",
    "classify_consistency",
    "parse_rule",
    "format_rule",
]

# Algorithm families a rule can target; the target decides the decay
# exponent in the consistency analysis (sigma^2 for l0, sigma otherwise).
TARGETS = ("l0", "l1_penalty", "l1_error", "dantzig", "omp_rpsc", "omp_rcsc")

# base name -> (takes a parameter, default parameter)
_BASES: dict[str, tuple[bool, float | None]] = {
    "fixed": (True, None),
    "aic": (False, None),
    "bic": (False, None),
    "ric_fg": (False, None),
    "ric_zs": (False, None),
    "ebic": (True, 1.0),
    "l1_candes": (False, None),
    "l1err_candes": (False, None),
    "rpsc_default": (False, None),
    "rcsc_default": (True, 4.0),
    "rcsc_eta": (True, 1.0),
}

_ADAPTATIONS = ("none", "loginv", "pow")

# Floor for the log(1/sigma^2) factor, which would be nonpositive at
# sigma^2 >= 1; configurable per call.
LOGINV_FLOOR = 1e-6


@dataclass(frozen=True)
class TuningRule:
    """A tuning rule: base formula, optional noise adaptation, target family.

    ``base`` is one of the names in the module table (``fixed``, ``aic``,
    ``bic``, ``ric_fg``, ``ric_zs``, ``ebic``, ``l1_candes``,
    ``l1err_candes``, ``rpsc_default``, ``rcsc_default``, ``rcsc_eta``);
    ``base_param`` carries the fixed value, the EBIC gamma, the correlation
    threshold constant c, or the eta parameter, depending on the base.
    ``adaptation`` is ``none``, ``loginv`` (factor log(1/sigma^2)) or
    ``pow`` (factor sigma^(-alpha)); ``alpha`` may be negative or above 1
    on purpose, to express rules that fail the consistency conditions.
    """

    base: str
    base_param: float | None = None
    adaptation: str = "none"
    alpha: float | None = None
    target: str = "l0"

    def __post_init__(self) -> None:
        if self.base not in _BASES:
            raise ValueError(f"unknown rule base {self.base!r}")
        takes_param, default = _BASES[self.base]
        if takes_param:
            param = default if self.base_param is None else float(self.base_param)
            if param is None:
                raise ValueError(f"base {self.base!r} requires a parameter")
            if self.base == "fixed" and param <= 0:
                raise ValueError(f"fixed rule value must be positive, got {param}")
            if self.base == "ebic" and param < 0:
                raise ValueError(f"ebic gamma must be nonnegative, got {param}")
            if self.base in ("rcsc_default",) and param <= 0:
                raise ValueError(f"rcsc constant must be positive, got {param}")
            object.__setattr__(self, "base_param", param)
        elif self.base_param is not None:
            raise ValueError(f"base {self.base!r} takes no parameter")
        if self.adaptation not in _ADAPTATIONS:
            raise ValueError(f"unknown adaptation {self.adaptation!r}")
        if self.adaptation == "pow":
            if self.alpha is None:
                raise ValueError("pow adaptation requires an alpha exponent")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise ValueError(f"adaptation {self.adaptation!r} takes no alpha")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")

    def with_target(self, target: str) -> "TuningRule":
        return replace(self, target=target)


def _log_binomial(p: int, k: int) -> float:
    return math.lgamma(p + 1) - math.lgamma(k + 1) - math.lgamma(p - k + 1)


def _base_value(rule: TuningRule, n: int, p: int, k: int) -> float:
    base = rule.base
    if base == "fixed":
        return rule.base_param
    if base == "aic":
        return 2.0
    if base == "bic":
        return math.log(n)
    if base == "ric_fg":
        return 2.0 * math.log(p)
    if base == "ric_zs":
        if p < 2:
            raise ValueError("ric_zs needs p >= 2")
        return 2.0 * math.log(p) + 2.0 * math.log(math.log(p))
    if base == "ebic":
        if k < 1:
            raise ValueError("ebic is undefined at cardinality 0")
        return math.log(n) + (2.0 * rule.base_param / k) * _log_binomial(p, k)
    if base == "l1_candes":
        return 2.0 * math.sqrt(2.0 * math.log(p))
    if base == "l1err_candes":
        return math.sqrt(n + 2.0 * math.sqrt(2.0 * n))
    if base == "rpsc_default":
        return math.sqrt(n + 2.0 * math.sqrt(n * math.log(n)))
    if base == "rcsc_default":
        return math.sqrt(rule.base_param * math.log(p))
    if base == "rcsc_eta":
        return math.sqrt(2.0 * (1.0 + rule.base_param) * math.log(p))
    raise AssertionError(base)


def adaptation_factor(rule: TuningRule, sigma_sq: float, loginv_floor: float = LOGINV_FLOOR) -> float:
    """The noise-dependent multiplier f(sigma^2) of a rule."""
    if sigma_sq <= 0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    if rule.adaptation == "none":
        return 1.0
    if rule.adaptation == "loginv":
        f = math.log(1.0 / sigma_sq)
        if f < loginv_floor:
            warnings.warn(
                f"log(1/sigma^2) factor {f:.3g} clamped to {loginv_floor:g} "
                f"(sigma_sq = {sigma_sq:g} is not below 1)",
                stacklevel=2,
            )
            f = loginv_floor
        return f
    return sigma_sq ** (-rule.alpha / 2.0)


def gamma_value(
    rule: TuningRule,
    n: int,
    p: int,
    k: int,
    sigma_sq: float,
    loginv_floor: float = LOGINV_FLOOR,
) -> float:
    """Evaluate a rule's tuning parameter at one noise level.

    ``k`` is the candidate cardinality; only EBIC depends on it (the
    penalty there is per selected column, so the subset-search solver
    queries this once per candidate cardinality).
    """
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be >= 1, got n={n}, p={p}")
    if not 0 <= k <= p:
        raise ValueError(f"k must lie in [0, p], got k={k}")
    return _base_value(rule, n, p, k) * adaptation_factor(rule, sigma_sq, loginv_floor)


CONSISTENT_SUFFICIENT = "CONSISTENT_SUFFICIENT"
VIOLATES_GROWTH = "VIOLATES_GROWTH"
VIOLATES_DECAY = "VIOLATES_DECAY"
VIOLATES_BOTH = "VIOLATES_BOTH"


@dataclass(frozen=True)
class ConsistencyVerdict:
    """Outcome of the symbolic limit analysis of a rule as sigma^2 -> 0.

    ``growth_ok``: the tuning parameter grows without bound, which kills
    false discoveries at vanishing noise. ``decay_ok``: the effective
    threshold still shrinks (sigma^2 Gamma -> 0 for the l0 target, sigma
    Gamma -> 0 otherwise), so true coefficients survive. Both together
    are the sufficient condition for the recovery error to vanish.
    """

    growth_ok: bool
    decay_ok: bool
    verdict: str

    def __post_init__(self) -> None:
        expected = {
            (True, True): CONSISTENT_SUFFICIENT,
            (False, True): VIOLATES_GROWTH,
            (True, False): VIOLATES_DECAY,
            (False, False): VIOLATES_BOTH,
        }[(self.growth_ok, self.decay_ok)]
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict!r} inconsistent with flags")


def classify_consistency(rule: TuningRule) -> ConsistencyVerdict:
    """Classify a rule against the sufficient high-SNR consistency conditions."""
    if rule.adaptation == "loginv":
        growth_ok = True
        decay_ok = True
    elif rule.adaptation == "pow":
        decay_exponent = 2.0 if rule.target == "l0" else 1.0
        growth_ok = rule.alpha > 0
        decay_ok = rule.alpha < decay_exponent
    else:
        growth_ok = False
        decay_ok = True
    verdict = {
        (True, True): CONSISTENT_SUFFICIENT,
        (False, True): VIOLATES_GROWTH,
        (True, False): VIOLATES_DECAY,
        (False, False): VIOLATES_BOTH,
    }[(growth_ok, decay_ok)]
    return ConsistencyVerdict(growth_ok=growth_ok, decay_ok=decay_ok, verdict=verdict)


def _format_number(x: float) -> str:
    return repr(float(x))


def parse_rule(text: str, target: str = "l0") -> TuningRule:
    """Parse the rule syntax ``base[:param][*adapt]``.

    ``adapt`` is ``loginv`` or ``pow:<alpha>``. Examples: ``ric_fg``,
    ``ebic:1.0*pow:0.5``, ``fixed:3*loginv``.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty rule string")
    base_part, star, adapt_part = text.partition("*")
    base_name, colon, param_part = base_part.partition(":")
    base_name = base_name.strip()
    if base_name not in _BASES:
        raise ValueError(f"unknown rule base {base_name!r}")
    base_param = None
    if colon:
        try:
            base_param = float(param_part)
        except ValueError:
            raise ValueError(f"malformed base parameter {param_part!r}") from None
    adaptation = "none"
    alpha = None
    if star:
        adapt_name, acolon, alpha_part = adapt_part.partition(":")
        adapt_name = adapt_name.strip()
        if adapt_name == "loginv":
            if acolon:
                raise ValueError("loginv takes no parameter")
            adaptation = "loginv"
        elif adapt_name == "pow":
            if not acolon:
                raise ValueError("pow adaptation needs an alpha, e.g. pow:0.5")
            try:
                alpha = float(alpha_part)
            except ValueError:
                raise ValueError(f"malformed alpha {alpha_part!r}") from None
            adaptation = "pow"
        else:
            raise ValueError(f"unknown adaptation {adapt_name!r}")
    return TuningRule(
        base=base_name, base_param=base_param, adaptation=adaptation, alpha=alpha, target=target
    )


def format_rule(rule: TuningRule) -> str:
    """Canonical string for a rule; round-trips through :func:`parse_rule`."""
    takes_param, _ = _BASES[rule.base]
    text = rule.base
    if takes_param:
        text += f":{_format_number(rule.base_param)}"
    if rule.adaptation == "loginv":
        text += "*loginv"
    elif rule.adaptation == "pow":
        text += f"*pow:{_format_number(rule.alpha)}"
    return text
