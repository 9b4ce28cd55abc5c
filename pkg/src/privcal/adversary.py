"""The attacker side: MAP assignment guessing and exact error accounting.

The adversary observes the scores, the published policy, and the
accepted paper, and guesses the assignment by maximizing the posterior.
The scenario table enumerating the four (assignment, decision) outcomes
is the single source of truth for error probabilities; the consolidated
piecewise closed form is kept as an independent cross-check. The
randomized-response bookkeeping for the gamma/epsilon correspondence
lives here too.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import Assignment, Decision, Instance
from .frontier import ErrorPair, InstanceGeometry, instance_geometry


class GuessKind(Enum):
    A1 = "A1"
    A2 = "A2"
    UNIFORM_TIE = "uniform_tie"


@dataclass(frozen=True)
class Guess:
    kind: GuessKind

    def wrong_probability(self, truth: Assignment) -> float:
        if self.kind is GuessKind.UNIFORM_TIE:
            return 0.5
        guessed = Assignment.A1 if self.kind is GuessKind.A1 else Assignment.A2
        return 0.0 if guessed is truth else 1.0


@dataclass(frozen=True)
class ScenarioCell:
    assignment: Assignment
    decision: Decision
    probability: float
    adversary_wrong_prob: float


@dataclass(frozen=True)
class ScenarioTable:
    """The four (assignment, decision) scenarios with their probabilities."""

    cells: tuple[ScenarioCell, ScenarioCell, ScenarioCell, ScenarioCell]

    @property
    def adversary_error(self) -> float:
        return sum(c.probability * c.adversary_wrong_prob for c in self.cells)


def _compare(l1: float, l2: float) -> Guess:
    if l1 > l2:
        return Guess(GuessKind.A1)
    if l1 < l2:
        return Guess(GuessKind.A2)
    return Guess(GuessKind.UNIFORM_TIE)


def _decision_probs(geom: InstanceGeometry, q1: float, q2: float, d: Decision):
    """(Pr(D = d | A1), Pr(D = d | A2)) under the policy."""
    if not geom.part2:
        if geom.tie:
            return 0.5, 0.5
        on = 1.0 if d is geom.d1 else 0.0
        return on, on
    p_a1 = q1 if d is geom.d1 else 1.0 - q1
    p_a2 = q2 if d is geom.d2 else 1.0 - q2
    return p_a1, p_a2


def map_guess(inst: Instance, policy, observed: Decision) -> Guess:
    """MAP guess of the assignment given the accepted paper.

    Compares pu * Pr(observed | A1, policy) against pv * Pr(observed |
    A2, policy); exact equality yields a uniform coin flip. For forced
    instances the decision carries no information and the comparison
    reduces to the scores alone.
    """
    geom = instance_geometry(inst)
    q1, q2 = policy.q1, policy.q2
    p_a1, p_a2 = _decision_probs(geom, q1, q2, observed)
    return _compare(geom.pu * p_a1, geom.pv * p_a2)


def scenario_table(inst: Instance, policy) -> ScenarioTable:
    """Enumerate the four scenarios and the adversary's fate in each."""
    geom = instance_geometry(inst)
    q1, q2 = policy.q1, policy.q2
    cells = []
    for truth, weight in ((Assignment.A1, geom.pu), (Assignment.A2, geom.pv)):
        for d in (Decision.PAPER1, Decision.PAPER2):
            p_a1, p_a2 = _decision_probs(geom, q1, q2, d)
            cond = p_a1 if truth is Assignment.A1 else p_a2
            guess = _compare(geom.pu * p_a1, geom.pv * p_a2)
            cells.append(
                ScenarioCell(truth, d, weight * cond, guess.wrong_probability(truth))
            )
    return ScenarioTable(tuple(cells))


def per_instance_errors(inst: Instance, policy) -> ErrorPair:
    """Exact (conference error, adversary error) of a policy on one instance.

    Conference error comes from the oriented linear form; adversary
    error from the scenario table. Forced instances use the
    score-determined decision and the score-only adversary error.
    """
    geom = instance_geometry(inst)
    if not geom.part2:
        return ErrorPair(geom.forced_ec, geom.m)
    ec = geom.conference_error(policy.q1, policy.q2)
    ea = scenario_table(inst, policy).adversary_error
    return ErrorPair(ec, ea)


def piecewise_adversary_error(inst: Instance, q1: float, q2: float) -> float:
    """Closed-form adversary error of a policy, bypassing the scenario table.

    Writing w = pu q1 + pv q2, the error is w below the score-only
    ceiling band, the ceiling min(pu, pv) inside it, and 1 - w above;
    the case boundaries carry the tie-averaged values, which the
    min form reproduces exactly.
    """
    geom = instance_geometry(inst)
    if not geom.part2:
        raise ValueError(
            "forced instance: the adversary error is constant, use per_instance_errors"
        )
    w = geom.pu * q1 + geom.pv * q2
    small = geom.m
    if w < small:
        return w
    if 1.0 - w < small:
        return 1.0 - w
    return small


def rr_epsilon(gamma: float) -> float:
    """Privacy parameter of binary randomized response with odds gamma."""
    if not (gamma > 0.0) or not math.isfinite(gamma):
        raise ValueError("gamma must be a positive finite real")
    return math.log(gamma)

def rr_gamma(epsilon: float) -> float:
    """Odds parameter of binary randomized response at privacy level epsilon."""
    if not math.isfinite(epsilon):
        raise ValueError("epsilon must be finite")
    return math.exp(epsilon)


def _scenario_errors_grid(geom: InstanceGeometry, q1, q2):
    """Vectorized (E_C, E_A) over policy arrays via scenario comparisons.

    Mirrors scenario_table cell by cell using array arithmetic; used by
    oracle tests and brute-force frontier checks where millions of
    policies are evaluated per instance.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    pu, pv = geom.pu, geom.pv
    ec = geom.ec_intercept - geom.alpha1 * q1 - geom.alpha2 * q2
    # Decision d1 observed: likelihoods pu q1 vs pv (1 - q2).
    l1, l2 = pu * q1, pv * (1.0 - q2)
    wrong_d1 = np.where(l1 > l2, l2, np.where(l1 < l2, l1, 0.5 * (l1 + l2)))
    # Decision d2 observed: likelihoods pu (1 - q1) vs pv q2.
    l1, l2 = pu * (1.0 - q1), pv * q2
    wrong_d2 = np.where(l1 > l2, l2, np.where(l1 < l2, l1, 0.5 * (l1 + l2)))
    return ec, wrong_d1 + wrong_d2
