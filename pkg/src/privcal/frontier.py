"""Pareto frontiers between conference error and adversary error.

For a fixed pair of observed scores the conference chooses a randomized
policy (q1, q2) and incurs a conference error E_C, while a MAP adversary
who knows the policy incurs a deanonymization error E_A. This module
computes, per instance, the geometry shared by both error functionals,
the Pareto frontier (a point when the decision is forced by the scores,
a rising segment otherwise), and the full curve of maximum E_A over
policies with E_C pinned to a target value.

The algebra is organized around two scalars of a policy:

    t = alpha1 * q1 + alpha2 * q2   (conference error is c0 - t)
    w = pu * q1 + pv * q2           (adversary error is min(w, m, 1 - w))

with alpha1 = pu (1 - 2 phi1), alpha2 = pv (2 phi2 - 1), both positive
once (phi1, phi2) are oriented so phi1 < 1/2 < phi2, and m = min(pu, pv).
The noiseless setting is the special case phi1 = 0, phi2 = 1, where t
and w coincide. All eight sign arrangements of the noisy case reduce to
this one parameterization, so no case split is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .model import (
    Assignment,
    Decision,
    Instance,
    ModeError,
    phi_pair,
    posterior_weights,
)


@dataclass(frozen=True)
class ErrorPair:
    """A (conference error, adversary error) point."""

    ec: float
    ea: float


class SegmentKind(Enum):
    POINT = "point"
    SEGMENT = "segment"


@dataclass(frozen=True)
class FrontierSegment:
    """The Pareto set of one instance: a point, or a rising segment.

    min_feasible_ec is the smallest conference error any policy can
    achieve for these scores (0 in the noiseless segment case).
    """

    kind: SegmentKind
    start: ErrorPair
    end: ErrorPair
    min_feasible_ec: float


@dataclass(frozen=True)
class Infeasible:
    """Requested conference error cannot be realized by any policy."""

    min_feasible_ec: float
    max_feasible_ec: float


@dataclass(frozen=True)
class InstanceGeometry:
    """Shared per-instance statistics in the oriented parameterization.

    pu, pv are the posterior assignment weights. phi1 and phi2 are
    oriented so phi1 <= 1/2 <= phi2: phi1 is the probability the
    truthful decision under A1 is wrong, 1 - phi2 the same under A2
    (0 and 1 exactly in noiseless mode). d1 and d2 are the MAP
    decisions under an assumed A1 and A2; they differ exactly when the
    instance is in the randomizing regime (part2). For forced
    instances d1 == d2 is the score-determined decision; tie marks the
    doubly degenerate boundary where MAP is indifferent under both
    assignments.
    """

    part2: bool
    pu: float
    pv: float
    phi1: float
    phi2: float
    d1: Decision
    d2: Decision
    tie: bool = False

    @property
    def m(self) -> float:
        """Score-only adversary error, the ceiling min(pu, pv)."""
        return min(self.pu, self.pv)

    @property
    def alpha1(self) -> float:
        return self.pu * (1.0 - 2.0 * self.phi1)

    @property
    def alpha2(self) -> float:
        return self.pv * (2.0 * self.phi2 - 1.0)

    @property
    def ec_intercept(self) -> float:
        """Conference error of the never-truthful policy q1 = q2 = 0."""
        return self.pu * (1.0 - self.phi1) + self.pv * self.phi2

    @property
    def forced_ec(self) -> float:
        """Conference error of the forced decision (part-1 instances)."""
        return self.pu * self.phi1 + self.pv * (1.0 - self.phi2)

    def conference_error(self, q1: float, q2: float) -> float:
        if not self.part2:
            return self.forced_ec
        return self.ec_intercept - self.alpha1 * q1 - self.alpha2 * q2


def instance_geometry(inst: Instance) -> InstanceGeometry:
    """Classify an instance and compute its oriented statistics."""
    pu, pv = posterior_weights(inst)
    if inst.noiseless:
        s1, s2 = inst.scores.s1, inst.scores.s2
        thr_a = inst.reviewer2.apply(inst.reviewer1.invert(s2))
        thr_b = inst.reviewer1.apply(inst.reviewer2.invert(s2))
        hi, lo = max(thr_a, thr_b), min(thr_a, thr_b)
        if s1 >= hi:
            d = Decision.PAPER1
            tie = s1 == hi and hi == lo
            return InstanceGeometry(False, pu, pv, 0.0, 1.0, d, d, tie=tie)
        if s1 <= lo:
            d = Decision.PAPER2
            tie = s1 == lo and hi == lo
            return InstanceGeometry(False, pu, pv, 0.0, 1.0, d, d, tie=tie)
        # Strictly between the thresholds: the two assumed assignments
        # disagree about which paper is better.
        d1 = Decision.PAPER1 if s1 > thr_b else Decision.PAPER2
        d2 = Decision.PAPER1 if s1 > thr_a else Decision.PAPER2
        return InstanceGeometry(True, pu, pv, 0.0, 1.0, d1, d2)

    pp = phi_pair(inst)
    m1, m2 = pp.phi1 - 0.5, pp.phi2 - 0.5
    if m1 * m2 >= 0.0:
        # Forced regime: the MAP decision agrees under both assignments
        # (boundaries, where one statistic is exactly 1/2, included).
        if m1 < 0.0 or m2 < 0.0:
            d = Decision.PAPER1
            e1, e2 = pp.phi1, pp.phi2
        elif m1 > 0.0 or m2 > 0.0:
            d = Decision.PAPER2
            e1, e2 = 1.0 - pp.phi1, 1.0 - pp.phi2
        else:
            d = Decision.PAPER1
            e1, e2 = 0.5, 0.5
        return InstanceGeometry(
            False, pu, pv, e1, 1.0 - e2, d, d, tie=(m1 == 0.0 and m2 == 0.0)
        )
    d1 = Decision.PAPER1 if m1 < 0.0 else Decision.PAPER2
    d2 = Decision.PAPER1 if m2 < 0.0 else Decision.PAPER2
    e1 = min(pp.phi1, 1.0 - pp.phi1)
    e2 = min(pp.phi2, 1.0 - pp.phi2)
    return InstanceGeometry(True, pu, pv, e1, 1.0 - e2, d1, d2)


def _endpoint(geom: InstanceGeometry) -> tuple[float, tuple[float, float]]:
    """Pareto endpoint of a part-2 instance.

    Returns (ec, (q1, q2)) for the policy of largest t on the boundary
    w = max(pu, pv), which is where the adversary error first reaches
    its ceiling m = min(pu, pv).
    """
    big = max(geom.pu, geom.pv)
    candidates = []
    # A posterior weight can underflow to exactly 0 at extreme scores;
    # the corresponding vertex is then the other one with q = 1.
    if geom.pv > 0.0:
        q2 = (big - geom.pu) / geom.pv
        if -1e-12 <= q2 <= 1.0 + 1e-12:
            candidates.append((1.0, min(max(q2, 0.0), 1.0)))
    if geom.pu > 0.0:
        q1 = (big - geom.pv) / geom.pu
        if -1e-12 <= q1 <= 1.0 + 1e-12:
            candidates.append((min(max(q1, 0.0), 1.0), 1.0))
    best = max(candidates, key=lambda q: geom.alpha1 * q[0] + geom.alpha2 * q[1])
    return geom.conference_error(*best), best


def _segment(geom: InstanceGeometry) -> FrontierSegment:
    start_ec = geom.ec_intercept - geom.alpha1 - geom.alpha2
    end_ec, _ = _endpoint(geom)
    return FrontierSegment(
        SegmentKind.SEGMENT,
        ErrorPair(start_ec, 0.0),
        ErrorPair(end_ec, geom.m),
        start_ec,
    )


def _point(geom: InstanceGeometry) -> FrontierSegment:
    p = ErrorPair(geom.forced_ec, geom.m)
    return FrontierSegment(SegmentKind.POINT, p, p, p.ec)


def noiseless_frontier(inst: Instance) -> FrontierSegment:
    """Pareto frontier in noiseless mode.

    Forced instances give the point (0, m). Otherwise the frontier is
    the segment from (0, 0) to (m, m): privacy is bought one-for-one
    with conference error up to the score-only ceiling.
    """
    if not inst.noiseless:
        raise ModeError("noiseless_frontier requires sigma2 = 0")
    geom = instance_geometry(inst)
    return _segment(geom) if geom.part2 else _point(geom)


def noisy_frontier(inst: Instance) -> FrontierSegment:
    """Pareto frontier in noisy mode (affine profiles, sigma2 > 0)."""
    if inst.noiseless:
        raise ModeError("noisy_frontier requires sigma2 > 0")
    geom = instance_geometry(inst)
    return _segment(geom) if geom.part2 else _point(geom)


def frontier(inst: Instance) -> FrontierSegment:
    """Mode-dispatching frontier."""
    return noiseless_frontier(inst) if inst.noiseless else noisy_frontier(inst)


def _w_interval(geom: InstanceGeometry, t: float) -> tuple[float, float, float, float]:
    """Range of w over policies with alpha1 q1 + alpha2 q2 = t.

    Returns (wmin, wmax, q1_at_wmin, q1_at_wmax). The constraint set is
    a segment of the unit square, so the extremes sit at its endpoints.
    In noiseless mode t and w are the same linear functional and the
    interval collapses.
    """
    a1, a2 = geom.alpha1, geom.alpha2
    if a1 == 0.0:
        # pu underflowed to 0: w is constant along the constraint line.
        w = geom.pv * (t / a2)
        return w, w, 0.0, 1.0
    if a2 == 0.0:
        w = geom.pu * (t / a1)
        return w, w, t / a1, t / a1
    q1_lo = max(0.0, (t - a2) / a1)
    q1_hi = min(1.0, t / a1)
    ws = []
    for q1 in (q1_lo, q1_hi):
        q2 = (t - a1 * q1) / a2
        ws.append((geom.pu * q1 + geom.pv * q2, q1))
    (w_a, qa), (w_b, qb) = ws
    if w_a <= w_b:
        return w_a, w_b, qa, qb
    return w_b, w_a, qb, qa


def max_adversary_error_curve(
    inst: Instance, ec: float
) -> Union[float, Infeasible]:
    """Maximum adversary error over policies with conference error exactly ec.

    The curve is a trapezoid in ec: a rising edge, a flat top at the
    score-only ceiling m, and a falling edge. Outside the feasible
    conference-error range the result is an Infeasible value rather
    than an exception, since callers routinely probe infeasible
    targets.
    """
    geom = instance_geometry(inst)
    if not geom.part2:
        fec = geom.forced_ec
        if ec == fec:
            return geom.m
        return Infeasible(fec, fec)
    lo_ec = geom.ec_intercept - geom.alpha1 - geom.alpha2
    hi_ec = geom.ec_intercept
    if ec < lo_ec or ec > hi_ec:
        return Infeasible(lo_ec, hi_ec)
    span = geom.alpha1 + geom.alpha2
    t = min(max(geom.ec_intercept - ec, 0.0), span)
    wmin, wmax, _, _ = _w_interval(geom, t)
    small, big = geom.m, max(geom.pu, geom.pv)
    if wmax < small:
        return wmax
    if wmin > big:
        return 1.0 - wmin
    return small


def curve_policy(inst: Instance, ec: float) -> Union[tuple[float, float], Infeasible]:
    """A policy attaining max_adversary_error_curve(inst, ec).

    Exists for part-2 instances at feasible ec; for forced instances
    the only feasible ec is the forced conference error and every
    policy attains the curve there.
    """
    geom = instance_geometry(inst)
    if not geom.part2:
        if ec == geom.forced_ec:
            return (1.0, 1.0)
        return Infeasible(geom.forced_ec, geom.forced_ec)
    lo_ec = geom.ec_intercept - geom.alpha1 - geom.alpha2
    hi_ec = geom.ec_intercept
    if ec < lo_ec or ec > hi_ec:
        return Infeasible(lo_ec, hi_ec)
    span = geom.alpha1 + geom.alpha2
    t = min(max(geom.ec_intercept - ec, 0.0), span)
    if geom.alpha1 == 0.0:
        return (1.0, min(max(t / geom.alpha2, 0.0), 1.0))
    if geom.alpha2 == 0.0:
        return (min(max(t / geom.alpha1, 0.0), 1.0), 1.0)
    wmin, wmax, q1_min, q1_max = _w_interval(geom, t)
    small, big = geom.m, max(geom.pu, geom.pv)
    if wmax < small:
        q1 = q1_max
    elif wmin > big:
        q1 = q1_min
    else:
        # The flat top is reachable; pick the feasible w closest to the
        # low end of [small, big] and solve back for q1.
        target = max(wmin, small)
        slope = geom.pu - geom.pv * geom.alpha1 / geom.alpha2
        if slope == 0.0:
            q1 = q1_max
        else:
            q1 = (target - geom.pv * t / geom.alpha2) / slope
            q1 = min(max(q1, min(q1_min, q1_max)), max(q1_min, q1_max))
    q2 = (t - geom.alpha1 * q1) / geom.alpha2
    return (min(max(q1, 0.0), 1.0), min(max(q2, 0.0), 1.0))
