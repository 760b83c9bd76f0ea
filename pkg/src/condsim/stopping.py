"""Dirichlet posterior bookkeeping and the certified stopping rule.

Multinomial counts with a Dirichlet prior give a Dirichlet posterior
whose single-category marginals are Beta distributions. The stopping rule
bounds the posterior probability that any category's true value escapes
its relative-error interval by a sum of Beta tail masses, and certifies
an estimate once that bound drops to the requested failure probability.
"""

import math
from dataclasses import dataclass
from enum import Enum
from collections.abc import Sequence

from .errors import (
    CategoryOutOfRangeError,
    CondsimError,
    EmptyPosteriorError,
    InvalidSimplexPointError,
    NonPositivePhiMinError,
    NonPositiveShapeError,
    UndefinedDensityError,
)

_SIMPLEX_TOL = 1e-9


class PriorChoice(Enum):
    """Dirichlet prior: zero pseudocounts, or one per category."""

    UNBIASED = "unbiased"
    UNIFORM = "uniform"

    @property
    def pseudocount(self) -> int:
        return 0 if self is PriorChoice.UNBIASED else 1


@dataclass(frozen=True)
class DirichletPosterior:
    """Immutable category counts under a fixed prior choice.

    The effective sample size n includes pseudocounts; the posterior mean
    of category i is (counts[i] + pseudocount) / n, or all zeros when the
    posterior is empty.
    """

    counts: tuple[int, ...]
    prior: PriorChoice = PriorChoice.UNBIASED

    def __post_init__(self) -> None:
        if len(self.counts) < 2:
            raise ValueError("a posterior needs at least two categories")
        if any(c < 0 or c != int(c) for c in self.counts):
            raise ValueError(f"counts must be nonnegative integers: "
                             f"{self.counts!r}")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def k(self) -> int:
        return len(self.counts)

    @property
    def n(self) -> int:
        """Effective sample size, observations plus pseudocounts."""
        return sum(self.counts) + self.k * self.prior.pseudocount

    def alpha(self, category: int) -> int:
        return self.counts[category] + self.prior.pseudocount

    @property
    def mu(self) -> tuple[float, ...]:
        n = self.n
        if n < 1:
            return (0.0,) * self.k
        return tuple((c + self.prior.pseudocount) / n for c in self.counts)


def posterior_update(posterior: DirichletPosterior,
                     category: int) -> DirichletPosterior:
    """New posterior with one more observation of ``category``."""
    if not 0 <= category < posterior.k:
        raise CategoryOutOfRangeError(
            f"category {category} outside 0..{posterior.k - 1}")
    counts = list(posterior.counts)
    counts[category] += 1
    return DirichletPosterior(tuple(counts), posterior.prior)


def mean_and_variance(posterior: DirichletPosterior,
                      category: int) -> tuple[float, float]:
    """Posterior mean and variance of one category's probability.

    Variance is mu * (1 - mu) / (n + 1) for effective sample size n.
    """
    if not 0 <= category < posterior.k:
        raise CategoryOutOfRangeError(
            f"category {category} outside 0..{posterior.k - 1}")
    n = posterior.n
    if n < 1:
        raise EmptyPosteriorError("posterior holds no observations")
    mu = posterior.alpha(category) / n
    return mu, mu * (1.0 - mu) / (n + 1.0)


def log_density(posterior: DirichletPosterior,
                phi: Sequence[float]) -> float:
    """Log of the Dirichlet posterior density at a simplex point.

    Defined only when every category parameter (count plus pseudocount)
    is at least 1.
    """
    if len(phi) != posterior.k:
        raise InvalidSimplexPointError(
            f"point has {len(phi)} entries, posterior has {posterior.k}")
    if any(p <= 0.0 for p in phi):
        raise InvalidSimplexPointError("simplex entries must be positive")
    if abs(math.fsum(phi) - 1.0) > _SIMPLEX_TOL:
        raise InvalidSimplexPointError(
            f"entries sum to {math.fsum(phi)!r}, not 1")
    alphas = [posterior.alpha(i) for i in range(posterior.k)]
    if any(a < 1 for a in alphas):
        raise UndefinedDensityError(
            "density undefined while a category parameter is below 1")
    n = posterior.n
    value = math.lgamma(n)
    for a, p in zip(alphas, phi):
        value -= math.lgamma(a)
        value += (a - 1.0) * math.log(p)
    return value


def _beta_cont_frac(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < eps:
            return h
    raise CondsimError(
        f"incomplete beta failed to converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), the Beta(a, b) cumulative distribution at x.

    Continued-fraction evaluation, accurate to well under 1e-10 absolute
    for moderate shapes.
    """
    if a <= 0.0 or b <= 0.0:
        raise NonPositiveShapeError(f"shapes must be positive: a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    # The continued fraction converges fastest on the left of the mean.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_frac(a, b, x) / a
    return 1.0 - front * _beta_cont_frac(b, a, 1.0 - x) / b


def failure_probability_bound(posterior: DirichletPosterior, epsilon: float,
                              stop_when_above: float | None = None) -> float:
    """Upper bound on the posterior mass outside the certified intervals.

    Sums, over categories, the Beta marginal mass below mu/(1 + epsilon)
    and above mu*(1 + epsilon), clamped to [0, 1]. Returns 1 when any
    category still has a zero parameter (nothing can be certified).

    When ``stop_when_above`` is given the sum may return early once it
    provably exceeds that threshold; the returned partial sum is then only
    guaranteed to be on the correct side of the threshold.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    n = posterior.n
    if n < 1:
        raise EmptyPosteriorError("posterior holds no observations")
    alphas = [posterior.alpha(i) for i in range(posterior.k)]
    if min(alphas) <= 0:
        return 1.0
    order = range(posterior.k)
    if stop_when_above is not None:
        # Small categories carry the widest tails; visiting them first
        # makes the early exit trigger sooner.
        order = sorted(order, key=lambda i: alphas[i])
    total = 0.0
    for i in order:
        a = float(alphas[i])
        b = float(n) - a
        mu = a / n
        total += regularized_incomplete_beta(a, b, mu / (1.0 + epsilon))
        upper = mu * (1.0 + epsilon)
        if upper < 1.0:
            total += 1.0 - regularized_incomplete_beta(a, b, upper)
        if stop_when_above is not None and total > stop_when_above:
            return min(1.0, total)
    return min(1.0, total)


def should_stop(posterior: DirichletPosterior, epsilon: float,
                delta: float) -> bool:
    """Certify the posterior mean to relative error epsilon, risk delta.

    Requires every category observed at least once (raw counts, not
    pseudocounts) and the failure bound to be at most delta.
    """
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    if min(posterior.counts) < 1:
        return False
    bound = failure_probability_bound(posterior, epsilon,
                                      stop_when_above=delta)
    return bound <= delta


def worst_case_sample_bound(s_size: int, epsilon: float, delta: float,
                            phi_min: float) -> int:
    """Trial count that always suffices for the stopping rule.

    ceil((2^s_size / (epsilon^2 * phi_min)) * ln(2 / delta)), where
    phi_min lower-bounds the smallest category probability.
    """
    if s_size < 0:
        raise ValueError(f"s_size must be nonnegative, got {s_size!r}")
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    if phi_min <= 0.0:
        raise NonPositivePhiMinError(
            f"phi_min must be positive, got {phi_min!r}")
    if phi_min > 1.0:
        raise ValueError(f"phi_min must not exceed 1, got {phi_min!r}")
    scale = (1 << s_size) / (epsilon * epsilon * phi_min)
    return max(0, math.ceil(scale * math.log(2.0 / delta)))
