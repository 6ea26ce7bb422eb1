"""Exact binomial tail arithmetic and certification planning.

Every certification inequality here is decided in exact rational
arithmetic (fractions.Fraction); floats never enter the decision path.
Decimal rendering truncates rather than rounds, so every printed digit
agrees with the exact value.

The two certification constants are injected through a small registry
rather than hard-wired: the block threshold 3/100 comes from this
package's transfer-matrix certificate (verify_threshold), and the
rectangle-event threshold 0.8639 is the established rigorous bound for
1-independent bond percolation on the square lattice, taken as an input
constant.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from .errors import ContractError, DomainError, InfeasiblePlanError

RationalLike = Union[Fraction, int, float, str]


def as_rational(x: RationalLike) -> Fraction:
    """Coerce to an exact rational.

    Floats are read through their shortest decimal representation, so
    as_rational(0.8639) == Fraction(8639, 10000) rather than the binary
    expansion of the double.  Strings accept anything Fraction does
    ("3/100", "0.8639").
    """
    if isinstance(x, bool):
        raise ContractError("booleans are not probabilities")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise DomainError(f"{x!r} is not a finite number")
        return Fraction(str(x))
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse {x!r} as a rational") from exc
    raise ContractError(f"cannot interpret {type(x).__name__} as a rational")


def _checked_probability(p: RationalLike) -> Fraction:
    p = as_rational(p)
    if not (0 <= p <= 1):
        raise DomainError(f"probability {p} outside [0, 1]")
    return p


def _checked_counts(N, m) -> Tuple[int, int]:
    if not isinstance(N, int) or isinstance(N, bool) or N < 1:
        raise DomainError(f"trial count must be a positive integer, got {N!r}")
    if not isinstance(m, int) or isinstance(m, bool):
        raise DomainError(f"success count must be an integer, got {m!r}")
    if m < 0 or m > N:
        raise DomainError(f"success count {m} outside [0, {N}]")
    return N, m


def _binom_sum(N: int, lo: int, hi: int, p: Fraction) -> Fraction:
    # One shared denominator b^N keeps the whole sum in integer arithmetic.
    a, b = p.numerator, p.denominator
    c = b - a
    total = 0
    for i in range(lo, hi + 1):
        total += math.comb(N, i) * a ** i * c ** (N - i)
    return Fraction(total, b ** N)


def binom_tail_leq(N: int, m: int, p: RationalLike) -> Fraction:
    """Exact P(X <= m) for X ~ Bin(N, p)."""
    N, m = _checked_counts(N, m)
    return _binom_sum(N, 0, m, _checked_probability(p))


def binom_tail_geq(N: int, m: int, p: RationalLike) -> Fraction:
    """Exact P(X >= m) for X ~ Bin(N, p)."""
    N, m = _checked_counts(N, m)
    return _binom_sum(N, m, N, _checked_probability(p))


def decimal_str(x: RationalLike, sig: int = 6) -> str:
    """Scientific-notation rendering with exactly sig leading digits.

    Truncates instead of rounding: every printed digit is a digit of the
    exact decimal expansion, matching how interval endpoints and tail
    bounds should be quoted (never optimistically rounded).
    """
    if not isinstance(sig, int) or sig < 1:
        raise DomainError(f"need a positive digit count, got {sig!r}")
    x = as_rational(x)
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    e = 0
    while x >= 10:
        x /= 10
        e += 1
    while x < 1:
        x *= 10
        e -= 1
    digits = str(int(x * 10 ** (sig - 1)))
    mantissa = digits[0] if sig == 1 else digits[0] + "." + digits[1:]
    return f"{sign}{mantissa}e{e:+03d}"


def format_probability(x: RationalLike) -> str:
    """Positional decimal when it terminates, scientific otherwise."""
    x = as_rational(x)
    den = x.denominator
    while den % 2 == 0:
        den //= 2
    while den % 5 == 0:
        den //= 5
    if den == 1:
        from decimal import Decimal
        return str(Decimal(x.numerator) / Decimal(x.denominator))
    return decimal_str(x)


@dataclass(frozen=True)
class Constant:
    name: str
    value: Fraction
    source: str


CONSTANTS = {
    "p0_lower": Constant(
        name="p0_lower",
        value=Fraction(3, 100),
        source=(
            "exact transfer-matrix certificate: minimal-path growth on the "
            "block independence lattice is strictly below (100/3)^6 per six "
            "steps (verify_threshold)"
        ),
    ),
    "p0_upper": Constant(
        name="p0_upper",
        value=Fraction(8639, 10000),
        source=(
            "established rigorous threshold for 1-independent bond "
            "percolation on the square lattice; external input constant"
        ),
    ),
}

P0_LOWER = CONSTANTS["p0_lower"].value
P0_UPPER = CONSTANTS["p0_upper"].value


@dataclass(frozen=True)
class ConfidencePlan:
    """Success-count threshold certifying one side at the given confidence.

    The confidence budget 1 - alpha is split evenly between the two
    sides.  The lower direction uses its full per-side budget and takes
    the largest admissible m.  The upper direction plans to half its
    per-side budget (a deliberate two-fold safety margin) and takes the
    smallest admissible m; every plan therefore satisfies
    tail < (1 - alpha) / 2 with room to spare on the upper side.
    """

    direction: str
    trials: int
    alpha: Fraction
    p0: Fraction
    m: int
    tail: Fraction
    budget: Fraction

    def render(self) -> str:
        cmp_word = "at most" if self.direction == "lower" else "at least"
        return "\n".join([
            f"plan: {self.direction} direction, {self.trials} trials, "
            f"confidence {format_probability(self.alpha)}",
            f"certification probability p0 = {format_probability(self.p0)}",
            f"success threshold: {cmp_word} {self.m} trials meeting the event",
            f"exact tail bound: {self.tail.numerator}/{self.tail.denominator}"
            f" = {decimal_str(self.tail)}",
            f"per-side budget: {decimal_str(self.budget)}"
            f" (overall budget {decimal_str(1 - self.alpha)})",
        ])


def plan(direction: str, trials: int, alpha: RationalLike,
         p0: Optional[RationalLike] = None) -> ConfidencePlan:
    """Largest (lower) or smallest (upper) certifiable success threshold."""
    if direction not in ("lower", "upper"):
        raise DomainError(f"direction must be 'lower' or 'upper', got {direction!r}")
    if not isinstance(trials, int) or isinstance(trials, bool) or trials < 1:
        raise DomainError(f"trial count must be a positive integer, got {trials!r}")
    alpha = as_rational(alpha)
    if not (0 < alpha < 1):
        raise DomainError(f"confidence level {alpha} outside (0, 1)")
    if p0 is None:
        p0 = P0_LOWER if direction == "lower" else P0_UPPER
    p0 = _checked_probability(p0)
    if not (0 < p0 < 1):
        raise DomainError("certification probability must be strictly inside (0, 1)")
    per_side = (1 - alpha) / 2
    if direction == "lower":
        budget = per_side
        if binom_tail_leq(trials, 0, p0) >= budget:
            raise InfeasiblePlanError(
                f"{trials} trials cannot certify the lower side: even zero "
                f"successes leaves tail {decimal_str(binom_tail_leq(trials, 0, p0))}"
                f" >= budget {decimal_str(budget)}"
            )
        m = 0
        while m + 1 <= trials and binom_tail_leq(trials, m + 1, p0) < budget:
            m += 1
        tail = binom_tail_leq(trials, m, p0)
    else:
        budget = per_side / 2
        if binom_tail_geq(trials, trials, p0) >= budget:
            raise InfeasiblePlanError(
                f"{trials} trials cannot certify the upper side: even full "
                f"success leaves tail "
                f"{decimal_str(binom_tail_geq(trials, trials, p0))}"
                f" >= budget {decimal_str(budget)}"
            )
        m = trials
        while m - 1 >= 0 and binom_tail_geq(trials, m - 1, p0) < budget:
            m -= 1
        tail = binom_tail_geq(trials, m, p0)
    assert tail < per_side
    return ConfidencePlan(direction=direction, trials=trials, alpha=alpha,
                          p0=p0, m=m, tail=tail, budget=budget)


@dataclass(frozen=True)
class Verdict:
    """Two-sided confidence interval assembled from one run per side."""

    p_lo: Fraction
    p_hi: Fraction
    confidence: Fraction
    lower_passed: bool
    upper_passed: bool
    lower_plan: ConfidencePlan
    upper_plan: ConfidencePlan
    lower_run: tuple
    upper_run: tuple
    lower_tail: Fraction
    upper_tail: Fraction
    warnings: tuple

    def render(self) -> str:
        lines = [
            f"confidence interval: [{format_probability(self.p_lo)}, "
            f"{format_probability(self.p_hi)}] at confidence "
            f"{format_probability(self.confidence)}",
            f"lower side: p = {format_probability(self.lower_run[0])}, "
            f"{self.lower_run[2]}/{self.lower_run[1]} successes, threshold "
            f"{self.lower_plan.m} -> {'PASS' if self.lower_passed else 'FAIL'}",
            f"  exact tail at observed count: {decimal_str(self.lower_tail)}",
            f"upper side: p = {format_probability(self.upper_run[0])}, "
            f"{self.upper_run[2]}/{self.upper_run[1]} successes, threshold "
            f"{self.upper_plan.m} -> {'PASS' if self.upper_passed else 'FAIL'}",
            f"  exact tail at observed count: {decimal_str(self.upper_tail)}",
        ]
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines)


def _checked_run(run, side: str):
    try:
        p, N, successes = run
    except (TypeError, ValueError) as exc:
        raise ContractError(f"{side} run must be (p, trials, successes)") from exc
    p = _checked_probability(p)
    if not (0 < p < 1):
        raise ContractError(f"{side} run probability {p} not strictly inside (0, 1)")
    N, successes = _checked_counts(N, successes)
    return p, N, successes


def verdict(lower_run, upper_run, alpha: RationalLike,
            p0_lower: Optional[RationalLike] = None,
            p0_upper: Optional[RationalLike] = None) -> Verdict:
    """Combine a lower-side and an upper-side run into an interval.

    A failed side degrades to its trivial bound (0 below, 1 above)
    with a warning instead of invalidating the whole verdict.
    """
    lo_p, lo_N, lo_s = _checked_run(lower_run, "lower")
    hi_p, hi_N, hi_s = _checked_run(upper_run, "upper")
    if lo_p >= hi_p:
        raise ContractError(
            f"lower probability {lo_p} must be below upper probability {hi_p}"
        )
    lower_plan = plan("lower", lo_N, alpha, p0_lower)
    upper_plan = plan("upper", hi_N, alpha, p0_upper)
    lower_passed = lo_s <= lower_plan.m
    upper_passed = hi_s >= upper_plan.m
    warnings = []
    if not lower_passed:
        warnings.append(
            f"lower side failed ({lo_s} successes > threshold {lower_plan.m}); "
            "reporting the trivial lower bound 0"
        )
    if not upper_passed:
        warnings.append(
            f"upper side failed ({hi_s} successes < threshold {upper_plan.m}); "
            "reporting the trivial upper bound 1"
        )
    return Verdict(
        p_lo=lo_p if lower_passed else Fraction(0),
        p_hi=hi_p if upper_passed else Fraction(1),
        confidence=as_rational(alpha),
        lower_passed=lower_passed,
        upper_passed=upper_passed,
        lower_plan=lower_plan,
        upper_plan=upper_plan,
        lower_run=(lo_p, lo_N, lo_s),
        upper_run=(hi_p, hi_N, hi_s),
        lower_tail=binom_tail_leq(lo_N, lo_s, lower_plan.p0),
        upper_tail=binom_tail_geq(hi_N, hi_s, upper_plan.p0),
        warnings=tuple(warnings),
    )
