"""Structure checks driven by word-map probability hypotheses.

The central object is the degree-n residual of a finite group G: the
intersection of the kernels of all homomorphisms from G into the
symmetric group on n points.  It is computed here as the intersection of
all subgroups of index at most n, which is the same subgroup:

* the kernel of any homomorphism into S_n is an intersection of point
  stabilizers, each of index at most n (orbits have at most n points);
* conversely a subgroup H of index m <= n yields the coset action
  homomorphism into S_m <= S_n whose kernel lies inside H.

So each side of the comparison is an intersection of members of the
other family, and the two intersections agree.  The coset-action
construction is kept available separately so tests can cross-check the
equality rather than assume it.

Every verifier returns a TheoremReport that stores both exact sides of
each inequality it checked, so reports re-validate without recomputing
anything.  Hypotheses are never silently waived: a report carries a
hypothesis status of satisfied, violated, or vacuous.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .dist import (
    DEFAULT_BUDGET,
    centralizer_index_tail,
    commuting_probability,
    distribution,
    prob_at,
)
from .groups import FiniteGroup
from .subgroups import (
    LATTICE_ORDER_CAP,
    SubgroupSet,
    _mask_to_elements,
    centralizer_of_set,
    lower_central_series,
    nilpotency_class,
    quotient,
    subgroup_from_elements,
    subgroups_of_index_at_most,
)
from .words import (
    Word,
    commutator,
    lower_central_word,
    square_commutator_word,
    is_identity_of,
    to_text,
    variable,
)


def lcm_up_to(n: int) -> int:
    """lcm(1, 2, ..., n) as an exact integer."""
    if n < 1:
        raise ValueError("n must be positive")
    out = 1
    for i in range(2, n + 1):
        out = math.lcm(out, i)
    return out


@dataclass(frozen=True)
class SnResidual:
    """Intersection of all subgroups of index at most n, with its centralizer."""

    n: int
    residual: SubgroupSet
    residual_centralizer: SubgroupSet
    contributing_subgroups: int


def sn_residual(
    G: FiniteGroup, n: int, *, order_cap: int = LATTICE_ORDER_CAP
) -> SnResidual:
    """The degree-n residual of G (see the module docstring for why this
    equals the intersection of kernels of maps into the degree-n
    symmetric group)."""
    subs = subgroups_of_index_at_most(G, n, order_cap=order_cap)
    mask = reduce(lambda a, b: a & b, (H.mask for H in subs))
    residual = subgroup_from_elements(G, _mask_to_elements(mask))
    return SnResidual(
        n=n,
        residual=residual,
        residual_centralizer=centralizer_of_set(G, residual),
        contributing_subgroups=len(subs),
    )


# -- reports -----------------------------------------------------------------


_RELATIONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "divides": lambda a, b: b % a == 0,
}


@dataclass(frozen=True)
class Inequality:
    """One checked relation with both exact sides kept."""

    label: str
    lhs: Fraction | int | None  # None encodes an infinite/undefined side
    relation: str
    rhs: Fraction | int

    @property
    def holds(self) -> bool:
        if self.lhs is None:
            return False
        return _RELATIONS[self.relation](self.lhs, self.rhs)


def _side_str(x: Fraction | int | None) -> str:
    if x is None:
        return "inf"
    f = Fraction(x)
    return f"{f.numerator}/{f.denominator}"


def _side_parse(s: str) -> Fraction | None:
    if s == "inf":
        return None
    num, den = s.split("/")
    return Fraction(int(num), int(den))


@dataclass(frozen=True)
class TheoremReport:
    """Pass/fail evidence for one verified statement instance."""

    check: str
    group: str
    inputs: dict
    hypothesis_status: str  # satisfied | violated | vacuous
    witnesses: dict
    inequalities: tuple[Inequality, ...]
    failure_detail: str | None = None

    @property
    def verdict(self) -> bool:
        # violated hypotheses never pass; vacuous ones pass by definition
        # (flagged through the status field, never silently)
        if self.hypothesis_status == "violated":
            return False
        if self.hypothesis_status == "vacuous":
            return True
        return all(iq.holds for iq in self.inequalities)

    def to_json_dict(self) -> dict:
        return {
            "check": self.check,
            "group": self.group,
            "inputs": self.inputs,
            "hypothesis_status": self.hypothesis_status,
            "witnesses": self.witnesses,
            "inequalities": [
                {
                    "label": iq.label,
                    "lhs": _side_str(iq.lhs),
                    "relation": iq.relation,
                    "rhs": _side_str(iq.rhs),
                    "holds": iq.holds,
                }
                for iq in self.inequalities
            ],
            "verdict": "pass" if self.verdict else "fail",
            "failure_detail": self.failure_detail,
        }

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    def first_failure(self) -> str | None:
        if self.hypothesis_status == "violated":
            return self.failure_detail or "hypothesis violated"
        for iq in self.inequalities:
            if not iq.holds:
                return (
                    f"{iq.label}: {_side_str(iq.lhs)} {iq.relation} "
                    f"{_side_str(iq.rhs)} fails"
                )
        return None


def recheck_report_line(line: str) -> bool:
    """Re-validate a serialized report from its stored exact sides alone."""
    rec = json.loads(line)
    ok = True
    all_hold = True
    for iq in rec["inequalities"]:
        lhs = _side_parse(iq["lhs"])
        rhs = _side_parse(iq["rhs"])
        holds = lhs is not None and rhs is not None and _RELATIONS[iq["relation"]](lhs, rhs)
        ok = ok and (holds == iq["holds"])
        all_hold = all_hold and holds
    if rec["hypothesis_status"] == "violated":
        expected = False
    elif rec["hypothesis_status"] == "vacuous":
        expected = True
    else:
        expected = all_hold
    return ok and expected == (rec["verdict"] == "pass")


# -- hypothesis plumbing ------------------------------------------------------


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _resolve_eps(
    eps: str | Fraction, observed_max: Fraction
) -> tuple[Fraction, str]:
    """Resolve an epsilon spec against the observed maximum probability.

    "auto" takes the exact maximum itself (the strongest valid choice);
    an explicit value is checked against the maximum and flagged when the
    hypothesis does not actually hold.
    """
    if eps == "auto":
        return observed_max, "satisfied"
    val = Fraction(eps)
    if not 0 < val <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {val}")
    return val, ("satisfied" if observed_max >= val else "violated")


def _fresh_commutator(w: Word) -> Word:
    return commutator(w, variable(w.arity + 1))


# -- verifiers ----------------------------------------------------------------


def verify_finite(
    G: FiniteGroup,
    k: int,
    eps: str | Fraction = "auto",
    *,
    budget: int = DEFAULT_BUDGET,
    order_cap: int = LATTICE_ORDER_CAP,
) -> TheoremReport:
    """Check the nilpotent-residual statement for the length-k commutator.

    With p = max_g P(w_k = g) >= eps and n = floor(k/eps), the degree-n
    residual must be nilpotent of class below k, and the quotient by it
    must have exponent dividing lcm(1..n).
    """
    w = lower_central_word(k)
    g_star, p_max = distribution(G, w, budget=budget).max_point()
    eps_val, status = _resolve_eps(eps, p_max)
    if status == "violated":
        # An over-strong explicit hypothesis makes the claim vacuous here.
        status = "vacuous"
    n = _floor(Fraction(k) / eps_val)
    res = sn_residual(G, n, order_cap=order_cap)
    series = lower_central_series(G, subgroup=res.residual)
    cls = nilpotency_class(series)
    q = quotient(G, res.residual)
    exp_q = q.group.exponent()
    bound = lcm_up_to(n)
    inequalities = (
        Inequality("residual_nilpotency_class", cls, "<", k),
        Inequality("quotient_exponent", exp_q, "divides", bound),
    )
    report = TheoremReport(
        check="finite",
        group=G.name,
        inputs={"k": k, "eps": _side_str(eps_val), "eps_mode": eps if eps == "auto" else "explicit"},
        hypothesis_status=status,
        witnesses={
            "max_point_element": g_star,
            "max_point_probability": _side_str(p_max),
            "n": n,
            "residual_order": res.residual.order,
            "contributing_subgroups": res.contributing_subgroups,
            "series_orders": [t.order for t in series],
            "quotient_exponent": exp_q,
            "lcm_bound": bound,
        },
        inequalities=inequalities,
    )
    return _with_failure_detail(report)


def verify_lemma1(
    G: FiniteGroup,
    w: Word,
    eps: str | Fraction,
    delta: Fraction,
    *,
    budget: int = DEFAULT_BUDGET,
) -> TheoremReport:
    """Check the centralizer-index tail bound.

    If [w, x_fresh] has a point of probability at least eps, then the
    w-mass of classes with centralizer index below 1/delta must strictly
    exceed eps - delta, for any 0 < delta < eps.
    """
    w_ext = _fresh_commutator(w)
    g_star, p_max = distribution(G, w_ext, budget=budget).max_point()
    eps_val, status = _resolve_eps(eps, p_max)
    delta_val = Fraction(delta)
    if not 0 < delta_val < eps_val:
        raise ValueError(f"need 0 < delta < eps, got delta={delta_val}, eps={eps_val}")
    threshold = 1 / delta_val
    tail = centralizer_index_tail(G, w, threshold, budget=budget)
    report = TheoremReport(
        check="lemma1",
        group=G.name,
        inputs={
            "word": to_text(w),
            "eps": _side_str(eps_val),
            "delta": _side_str(delta_val),
        },
        hypothesis_status=status,
        witnesses={
            "extended_word": to_text(w_ext),
            "max_point_element": g_star,
            "max_point_probability": _side_str(p_max),
            "index_threshold": _side_str(threshold),
        },
        inequalities=(Inequality("centralizer_index_tail", tail, ">", eps_val - delta_val),),
    )
    return _with_failure_detail(report)


def verify_prop2(
    G: FiniteGroup,
    w: Word,
    eps: str | Fraction,
    delta: Fraction,
    *,
    budget: int = DEFAULT_BUDGET,
    order_cap: int = LATTICE_ORDER_CAP,
) -> TheoremReport:
    """Check concentration of w at 1 in the quotient by the residual centralizer.

    With n = floor(1/delta), N the degree-n residual and M its
    centralizer, the probability that w evaluates into M (equivalently,
    to 1 in G/M) must strictly exceed eps - delta.  Note M is taken in
    the whole group: when N is trivial, M is all of G and the quotient
    collapses.
    """
    w_ext = _fresh_commutator(w)
    g_star, p_max = distribution(G, w_ext, budget=budget).max_point()
    eps_val, status = _resolve_eps(eps, p_max)
    delta_val = Fraction(delta)
    if not 0 < delta_val < eps_val:
        raise ValueError(f"need 0 < delta < eps, got delta={delta_val}, eps={eps_val}")
    n = _floor(1 / delta_val)
    res = sn_residual(G, n, order_cap=order_cap)
    m = res.residual_centralizer
    q = quotient(G, m)
    p_quot = prob_at(q.group, w, 0, budget=budget)
    report = TheoremReport(
        check="prop2",
        group=G.name,
        inputs={
            "word": to_text(w),
            "eps": _side_str(eps_val),
            "delta": _side_str(delta_val),
        },
        hypothesis_status=status,
        witnesses={
            "extended_word": to_text(w_ext),
            "max_point_element": g_star,
            "max_point_probability": _side_str(p_max),
            "n": n,
            "residual_order": res.residual.order,
            "centralizer_order": m.order,
            "quotient_order": q.group.order,
        },
        inequalities=(
            Inequality("quotient_identity_probability", p_quot, ">", eps_val - delta_val),
        ),
    )
    return _with_failure_detail(report)


def n_schedule(k: int, eps: Fraction) -> int:
    """Degree schedule for the bounded-class check.

    Base: n(1, e) = floor(2/e^2).  Step: n(k+1, e) = max(n(k, e - d),
    floor(1/d)) with the fixed split d = e/2; the split is this
    artifact's deterministic choice and is recorded in the reports.
    """
    eps = Fraction(eps)
    if not 0 < eps <= 1:
        raise ValueError(f"epsilon must be in (0, 1], got {eps}")
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return _floor(2 / (eps * eps))
    return max(n_schedule(k - 1, eps / 2), _floor(2 / eps))


def verify_structure(
    G: FiniteGroup,
    k: int,
    eps: str | Fraction = "auto",
    *,
    budget: int = DEFAULT_BUDGET,
    order_cap: int = LATTICE_ORDER_CAP,
) -> TheoremReport:
    """Check that the scheduled residual has nilpotency class at most k
    under the squared-chain hypothesis."""
    w = square_commutator_word(k)
    g_star, p_max = distribution(G, w, budget=budget).max_point()
    eps_val, status = _resolve_eps(eps, p_max)
    if status == "violated":
        status = "vacuous"
    n = n_schedule(k, eps_val)
    res = sn_residual(G, n, order_cap=order_cap)
    series = lower_central_series(G, subgroup=res.residual)
    cls = nilpotency_class(series)
    report = TheoremReport(
        check="structure",
        group=G.name,
        inputs={"k": k, "eps": _side_str(eps_val), "word": to_text(w)},
        hypothesis_status=status,
        witnesses={
            "max_point_element": g_star,
            "max_point_probability": _side_str(p_max),
            "n": n,
            "delta_schedule": "eps/2",
            "residual_order": res.residual.order,
            "contributing_subgroups": res.contributing_subgroups,
            "series_orders": [t.order for t in series],
        },
        inequalities=(Inequality("residual_nilpotency_class", cls, "<=", k),),
    )
    return _with_failure_detail(report)


def verify_squares(G: FiniteGroup, *, budget: int = DEFAULT_BUDGET) -> TheoremReport:
    """Check that the commuting probability dominates the squared maximal
    square-map fiber: max_g P(x^2 = g) = e implies P([x1,x2] = 1) >= e^2."""
    w_sq = variable(1, 2)
    g_star, eps = distribution(G, w_sq, budget=budget).max_point()
    pr2 = commuting_probability(G, 2, budget=budget)
    report = TheoremReport(
        check="squares",
        group=G.name,
        inputs={"word": to_text(w_sq)},
        hypothesis_status="satisfied",
        witnesses={
            "max_square_fiber_element": g_star,
            "max_square_fiber": _side_str(eps),
            "commuting_probability": _side_str(pr2),
        },
        inequalities=(Inequality("commuting_probability", pr2, ">=", eps * eps),),
    )
    return _with_failure_detail(report)


def certify_identity(
    G: FiniteGroup,
    k: int,
    eps: str | Fraction = "auto",
    *,
    budget: int = DEFAULT_BUDGET,
) -> TheoremReport:
    """Exhaustively certify the power-commutator identity.

    With n = floor(k/eps) and c = lcm(1..n), the left-normed commutator
    of the c-th powers [x1^c, ..., xk^c] must be an identity of G.
    """
    w = lower_central_word(k)
    g_star, p_max = distribution(G, w, budget=budget).max_point()
    eps_val, status = _resolve_eps(eps, p_max)
    if status == "violated":
        status = "vacuous"
    n = _floor(Fraction(k) / eps_val)
    c = lcm_up_to(n)
    v = variable(1, c)
    for i in range(2, k + 1):
        v = commutator(v, variable(i, c))
    holds = is_identity_of(v, G, budget=budget)
    report = TheoremReport(
        check="identity",
        group=G.name,
        inputs={"k": k, "eps": _side_str(eps_val)},
        hypothesis_status=status,
        witnesses={
            "max_point_element": g_star,
            "max_point_probability": _side_str(p_max),
            "n": n,
            "power": c,
            "identity_word_arity": v.arity,
        },
        inequalities=(Inequality("identity_holds", 1 if holds else 0, "==", 1),),
    )
    return _with_failure_detail(report)


def _with_failure_detail(report: TheoremReport) -> TheoremReport:
    detail = report.first_failure()
    if detail == report.failure_detail:
        return report
    return TheoremReport(
        check=report.check,
        group=report.group,
        inputs=report.inputs,
        hypothesis_status=report.hypothesis_status,
        witnesses=report.witnesses,
        inequalities=report.inequalities,
        failure_detail=detail,
    )
