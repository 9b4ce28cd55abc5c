"""Core domain types and score statistics for the two-paper review model.

Two reviewers score two papers. Each reviewer reports a monotone
transformation of the paper's latent quality, optionally plus Gaussian
noise, and the secret is which reviewer saw which paper. Everything
downstream (frontiers, policies, adversaries) is built from the
quantities defined here: marginal score densities, the assignment
likelihood pair (u, v), the posterior over assignments, the pair of
conditional probabilities (Phi1, Phi2) that paper 1 is the worse one,
and the Gaussian quality posteriors.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

_SQRT2 = math.sqrt(2.0)
_LOG_INV_SQRT_2PI = -0.5 * math.log(2.0 * math.pi)


class ConfigurationError(ValueError):
    """An input object violates its construction contract."""


class ModeError(ConfigurationError):
    """Operation called in the wrong noise mode (noiseless vs noisy)."""


class DegenerateInstanceError(ArithmeticError):
    """Both assignment likelihoods underflowed to zero; scores are too extreme."""


def std_normal_pdf(x: float) -> float:
    """Standard normal density."""
    return math.exp(_LOG_INV_SQRT_2PI - 0.5 * x * x)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc.

    The complementary error function from libm is used directly, which
    keeps the relative error at or below about 1e-15 over the whole real
    line, comfortably inside the 1e-12 budget the closed forms need.
    """
    return 0.5 * math.erfc(-x / _SQRT2)


def _norm_logpdf(x: float, mean: float, var: float) -> float:
    d = x - mean
    return _LOG_INV_SQRT_2PI - 0.5 * math.log(var) - 0.5 * d * d / var


class ProfileKind(Enum):
    AFFINE = "affine"
    GENERAL_MONOTONE = "general_monotone"


class Assignment(Enum):
    """Which reviewer reviews which paper. A1 routes reviewer 1 to paper 1."""

    A1 = 1
    A2 = 2

    def other(self) -> "Assignment":
        return Assignment.A2 if self is Assignment.A1 else Assignment.A1


class Decision(Enum):
    """The accepted paper."""

    PAPER1 = 1
    PAPER2 = 2

    def other(self) -> "Decision":
        return Decision.PAPER2 if self is Decision.PAPER1 else Decision.PAPER1


@dataclass(frozen=True)
class ReviewerProfile:
    """A reviewer's monotone score transformation.

    Affine profiles report a * quality + b with a > 0. General monotone
    profiles carry caller-supplied forward and inverse maps plus the
    derivative of the inverse; numerical inversion is deliberately not
    attempted, so densities stay exact.
    """

    kind: ProfileKind
    a: float = 1.0
    b: float = 0.0
    forward_fn: Optional[Callable[[float], float]] = None
    inverse_fn: Optional[Callable[[float], float]] = None
    inverse_derivative_fn: Optional[Callable[[float], float]] = None

    @staticmethod
    def affine(a: float, b: float) -> "ReviewerProfile":
        if not (math.isfinite(a) and math.isfinite(b)):
            raise ConfigurationError("affine parameters must be finite")
        if a <= 0.0:
            raise ConfigurationError("affine slope must be strictly positive")
        return ReviewerProfile(ProfileKind.AFFINE, a=a, b=b)

    @staticmethod
    def monotone(
        forward: Callable[[float], float],
        inverse: Callable[[float], float],
        inverse_derivative: Callable[[float], float],
        probe_span: float = 6.0,
        probe_points: int = 25,
    ) -> "ReviewerProfile":
        """Build a general monotone profile, validating the supplied maps.

        The probe checks forward(inverse(s)) = s within 1e-9 and strict
        monotonicity of the inverse on a grid of scores spanned by
        forward([-probe_span, probe_span]).
        """
        thetas = [
            -probe_span + 2.0 * probe_span * i / (probe_points - 1)
            for i in range(probe_points)
        ]
        # Mismatched maps can overflow inside user-supplied callables; the
        # probe converts any such failure into a ConfigurationError, so the
        # intermediate warnings carry no information.
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            scores = [forward(t) for t in thetas]
            probe_pairs = [(inverse(s), s) for s in scores]
            round_trip = [forward(theta) for theta, _ in probe_pairs]
        for lo, hi in zip(scores, scores[1:]):
            if not hi > lo:
                raise ConfigurationError("forward map is not strictly increasing")
        prev = None
        for (theta, s), back in zip(probe_pairs, round_trip):
            if not math.isfinite(s):
                raise ConfigurationError("forward map produced a non-finite score")
            if not abs(back - s) <= 1e-9 * max(1.0, abs(s)):
                raise ConfigurationError(
                    "forward(inverse(s)) deviates from s beyond 1e-9 on the probe grid"
                )
            if prev is not None and theta <= prev:
                raise ConfigurationError("inverse map is not strictly increasing")
            prev = theta
        return ReviewerProfile(
            ProfileKind.GENERAL_MONOTONE,
            forward_fn=forward,
            inverse_fn=inverse,
            inverse_derivative_fn=inverse_derivative,
        )

    def apply(self, theta: float) -> float:
        """Map a latent quality to the reported score (before noise)."""
        if self.kind is ProfileKind.AFFINE:
            return self.a * theta + self.b
        return self.forward_fn(theta)

    def invert(self, s: float) -> float:
        """Recover the latent quality from a noiseless score."""
        if self.kind is ProfileKind.AFFINE:
            return (s - self.b) / self.a
        return self.inverse_fn(s)


@dataclass(frozen=True)
class ScorePair:
    """Observed scores: s1 for paper 1, s2 for paper 2."""

    s1: float
    s2: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.s1) and math.isfinite(self.s2)):
            raise ConfigurationError("scores must be finite")

    def swapped(self) -> "ScorePair":
        return ScorePair(self.s2, self.s1)


@dataclass(frozen=True)
class Instance:
    """A fully specified problem: two profiles, shared noise variance, scores.

    sigma2 = 0 selects noiseless mode. Positive sigma2 requires both
    profiles to be affine, since the noisy closed forms assume affine
    miscalibration.
    """

    reviewer1: ReviewerProfile
    reviewer2: ReviewerProfile
    sigma2: float
    scores: ScorePair

    def __post_init__(self) -> None:
        if not math.isfinite(self.sigma2) or self.sigma2 < 0.0:
            raise ConfigurationError("sigma2 must be finite and nonnegative")
        if self.sigma2 > 0.0 and not (
            self.reviewer1.kind is ProfileKind.AFFINE
            and self.reviewer2.kind is ProfileKind.AFFINE
        ):
            raise ConfigurationError(
                "positive noise variance requires affine reviewer profiles"
            )

    @property
    def noiseless(self) -> bool:
        return self.sigma2 == 0.0

    def swap_papers(self) -> "Instance":
        """Relabel the papers: s1 and s2 trade places."""
        return replace(self, scores=self.scores.swapped())

    def swap_reviewers(self) -> "Instance":
        """Relabel the reviewers: profiles trade places."""
        return replace(self, reviewer1=self.reviewer2, reviewer2=self.reviewer1)


@dataclass(frozen=True)
class Population:
    """The generative model behind average-case quantities.

    Qualities are i.i.d. standard normal, the assignment is uniform,
    and scores are the profiles' outputs plus N(0, sigma2) noise.
    """

    reviewer1: ReviewerProfile
    reviewer2: ReviewerProfile
    sigma2: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.sigma2) or self.sigma2 < 0.0:
            raise ConfigurationError("sigma2 must be finite and nonnegative")
        if self.sigma2 > 0.0 and not (
            self.reviewer1.kind is ProfileKind.AFFINE
            and self.reviewer2.kind is ProfileKind.AFFINE
        ):
            raise ConfigurationError(
                "positive noise variance requires affine reviewer profiles"
            )

    @property
    def noiseless(self) -> bool:
        return self.sigma2 == 0.0

    def instance(self, s1: float, s2: float) -> Instance:
        return Instance(self.reviewer1, self.reviewer2, self.sigma2, ScorePair(s1, s2))


@dataclass(frozen=True)
class LikelihoodPair:
    """u = f1(s1) f2(s2), v = f2(s1) f1(s2): score likelihoods of the two assignments."""

    u: float
    v: float


@dataclass(frozen=True)
class PhiPair:
    """Phi1 = Pr(paper 1 worse | A1, scores), Phi2 = same under A2. Noisy mode only."""

    phi1: float
    phi2: float


@dataclass(frozen=True)
class QualityPosterior:
    """Gaussian posterior over one paper's latent quality given its score."""

    mean: float
    variance: float


def log_marginal_score_density(
    profile: ReviewerProfile, sigma2: float, s: float
) -> float:
    """Log of the marginal density of a reported score under a standard-normal quality.

    Affine profiles give a normal with mean b and variance a^2 + sigma2.
    General monotone profiles (noiseless only) use the change of
    variables through the inverse map.
    """
    if profile.kind is ProfileKind.GENERAL_MONOTONE:
        if sigma2 != 0.0:
            raise ModeError("general monotone profiles are noiseless only")
        theta = profile.inverse_fn(s)
        jac = abs(profile.inverse_derivative_fn(s))
        if jac == 0.0:
            return -math.inf
        return _LOG_INV_SQRT_2PI - 0.5 * theta * theta + math.log(jac)
    return _norm_logpdf(s, profile.b, profile.a * profile.a + sigma2)


def marginal_score_density(profile: ReviewerProfile, sigma2: float, s: float) -> float:
    """Marginal density of a reported score. See log_marginal_score_density."""
    return math.exp(log_marginal_score_density(profile, sigma2, s))


def log_likelihoods(inst: Instance) -> tuple[float, float]:
    """(log u, log v), computed in log space so extreme scores stay usable."""
    s1, s2 = inst.scores.s1, inst.scores.s2
    lf1_s1 = log_marginal_score_density(inst.reviewer1, inst.sigma2, s1)
    lf2_s2 = log_marginal_score_density(inst.reviewer2, inst.sigma2, s2)
    lf2_s1 = log_marginal_score_density(inst.reviewer2, inst.sigma2, s1)
    lf1_s2 = log_marginal_score_density(inst.reviewer1, inst.sigma2, s2)
    return lf1_s1 + lf2_s2, lf2_s1 + lf1_s2


def likelihoods(inst: Instance) -> LikelihoodPair:
    """The assignment likelihood pair (u, v)."""
    logu, logv = log_likelihoods(inst)
    return LikelihoodPair(math.exp(logu), math.exp(logv))


def posterior_weights(inst: Instance) -> tuple[float, float]:
    """(pu, pv) = (u, v) / (u + v), evaluated stably from log likelihoods."""
    logu, logv = log_likelihoods(inst)
    if logu == -math.inf and logv == -math.inf:
        raise DegenerateInstanceError("both assignment likelihoods underflowed")
    if logu >= logv:
        r = math.exp(logv - logu)
        pu = 1.0 / (1.0 + r)
        return pu, 1.0 - pu
    r = math.exp(logu - logv)
    pv = 1.0 / (1.0 + r)
    return 1.0 - pv, pv


def assignment_posterior(inst: Instance) -> float:
    """Posterior probability of assignment A1 given the scores (uniform prior)."""
    return posterior_weights(inst)[0]


def phi_pair(inst: Instance) -> PhiPair:
    """The (Phi1, Phi2) statistics of the noisy model.

    Phi1 is the posterior probability that paper 1 has lower quality than
    paper 2 given the scores and assignment A1; Phi2 is the same under A2.
    Requires positive noise variance and affine profiles.
    """
    if inst.sigma2 <= 0.0:
        raise ModeError("phi_pair is defined only for positive noise variance")
    a1, b1 = inst.reviewer1.a, inst.reviewer1.b
    a2, b2 = inst.reviewer2.a, inst.reviewer2.b
    s1, s2 = inst.scores.s1, inst.scores.s2
    g2 = inst.sigma2
    t1 = a1 * a1 + g2
    t2 = a2 * a2 + g2
    denom = math.sqrt(g2 * (a1 * a1 + a2 * a2 + 2.0 * g2) * t1 * t2)
    num1 = a2 * t1 * (s2 - b2) - a1 * t2 * (s1 - b1)
    num2 = a1 * t2 * (s2 - b1) - a2 * t1 * (s1 - b2)
    return PhiPair(std_normal_cdf(num1 / denom), std_normal_cdf(num2 / denom))


def quality_posterior(
    inst: Instance, paper: int, assignment: Assignment
) -> QualityPosterior:
    """Posterior of one paper's quality given its score under an assumed assignment.

    With score s read by an affine reviewer (a, b) through noise sigma2,
    the posterior is normal with mean a (s - b) / (a^2 + sigma2) and
    variance sigma2 / (a^2 + sigma2).
    """
    if inst.sigma2 <= 0.0:
        raise ModeError("quality_posterior is defined only for positive noise variance")
    if paper not in (1, 2):
        raise ConfigurationError("paper must be 1 or 2")
    s = inst.scores.s1 if paper == 1 else inst.scores.s2
    # Under A1 reviewer j reads paper j; under A2 the routing is crossed.
    if (assignment is Assignment.A1) == (paper == 1):
        prof = inst.reviewer1
    else:
        prof = inst.reviewer2
    t = prof.a * prof.a + inst.sigma2
    return QualityPosterior(prof.a * (s - prof.b) / t, inst.sigma2 / t)
