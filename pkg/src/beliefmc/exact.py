"""Exact combination of evidence by the orthogonal-sum rule.

Two routes with very different cost profiles:

* mass-space folding (:func:`combine_all`) multiplies focal-set tables
  pairwise; the table can grow toward ``2**n`` entries, so the fold takes an
  entry cap and an optional wall-clock deadline;
* joint-outcome enumeration (:func:`exact_belief_enumeration`) walks the
  product of the source outcome spaces for a single query, capped by the
  product size.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .errors import (
    FrameMismatchError,
    ResourceLimitError,
    TotalConflictError,
)
from .evidence import (
    EvidenceProblem,
    FocalSet,
    MassFunction,
    mass_from_source,
    require_valid,
)

#: Combination is undefined when the surviving mass drops to this level.
CONFLICT_TOL = 1e-12

#: Default cap on intermediate mass-table size during a fold.
DEFAULT_MAX_ENTRIES = 1 << 20

#: Default cap on the joint outcome count for direct enumeration.
DEFAULT_MAX_OUTCOMES = 10**7

# How many products to run between deadline checks inside a fold step.
_DEADLINE_STRIDE = 1 << 15


@dataclass(frozen=True)
class CombinationResult:
    """A combined mass function plus the conflict mass renormalized away."""

    combined: MassFunction
    conflict: float


def _combine_bits(
    m1: dict[int, float] | MassFunction,
    m2: dict[int, float] | MassFunction,
    *,
    max_entries: int | None = None,
    deadline: float | None = None,
    step: str = "combine",
) -> tuple[dict[int, float], float]:
    """Orthogonal sum on raw ``bits -> mass`` tables.

    Returns the unnormalized intersection table and the conflict mass
    (weight of empty intersections).  Caps raise ``ResourceLimitError``
    naming ``step``.
    """
    d1 = m1.by_bits if isinstance(m1, MassFunction) else m1
    d2 = m2.by_bits if isinstance(m2, MassFunction) else m2
    out: dict[int, float] = {}
    conflict = 0.0
    done = 0
    for b1, v1 in d1.items():
        for b2, v2 in d2.items():
            inter = b1 & b2
            w = v1 * v2
            if inter:
                out[inter] = out.get(inter, 0.0) + w
            else:
                conflict += w
        done += len(d2)
        if max_entries is not None and len(out) > max_entries:
            raise ResourceLimitError(
                f"{step}: intermediate table exceeded {max_entries} entries"
            )
        if deadline is not None and done >= _DEADLINE_STRIDE:
            done = 0
            if time.monotonic() > deadline:
                raise ResourceLimitError(f"{step}: wall-clock cap exceeded")
    return out, conflict


def _normalize(frame, table: dict[int, float], conflict: float, step: str) -> MassFunction:
    survival = 1.0 - conflict
    if survival <= CONFLICT_TOL:
        raise TotalConflictError(f"{step}: total conflict, combination undefined")
    return MassFunction(frame, {b: v / survival for b, v in table.items()})


def combine_pair(m1: MassFunction, m2: MassFunction) -> CombinationResult:
    """Dempster combination of two mass functions over the same frame."""
    if m1.frame != m2.frame:
        raise FrameMismatchError("mass functions over different frames")
    table, conflict = _combine_bits(m1, m2)
    total = math.fsum(table.values()) + conflict
    conflict /= total  # guard against accumulated rounding in big tables
    return CombinationResult(_normalize(m1.frame, table, conflict, "combine_pair"), conflict)


def combine_all(
    problem: EvidenceProblem,
    *,
    max_entries: int = DEFAULT_MAX_ENTRIES,
    deadline_s: float | None = None,
) -> CombinationResult:
    """Fold all source mass functions into one combined mass function.

    ``conflict`` in the result is the overall conflict of the joint problem:
    one minus the product of per-step survival weights.  ``deadline_s``
    bounds the whole fold in wall-clock seconds.
    """
    require_valid(problem)
    deadline = None if deadline_s is None else time.monotonic() + deadline_s
    masses = [mass_from_source(s) for s in problem.sources]
    acc: dict[int, float] = dict(masses[0].by_bits)
    survival = 1.0
    for i, nxt in enumerate(masses[1:], start=1):
        step = f"combine step {i}"
        table, conflict = _combine_bits(
            acc, nxt, max_entries=max_entries, deadline=deadline, step=step
        )
        remaining = math.fsum(table.values())
        total = remaining + conflict
        if remaining / total <= CONFLICT_TOL:
            raise TotalConflictError(f"{step}: total conflict, combination undefined")
        acc = {b: v / remaining for b, v in table.items()}
        survival *= remaining / total
    conflict = 1.0 - survival
    return CombinationResult(_normalize(problem.frame, acc, 0.0, "combine_all"), conflict)


def _enumerate(
    problem: EvidenceProblem, b: FocalSet, max_outcomes: int
) -> tuple[float, float]:
    """Walk the joint outcome space once; return (P[non-empty and inside b],
    P[empty]) with per-source probabilities renormalized exactly."""
    require_valid(problem)
    if b.frame != problem.frame:
        raise FrameMismatchError("query set from a different frame")
    joint = 1
    for s in problem.sources:
        joint *= len(s.outcomes)
        if joint > max_outcomes:
            raise ResourceLimitError(
                f"exact enumeration: joint outcome space exceeds {max_outcomes}"
            )
    tables = []
    for s in problem.sources:
        total = math.fsum(p for p, _ in s.outcomes)
        tables.append([(p / total, t.bits) for p, t in s.outcomes])
    outside = ~b.bits
    m = len(tables)
    inside_p = 0.0
    empty_p = 0.0

    def walk(i: int, prob: float, g: int) -> None:
        nonlocal inside_p, empty_p
        if g == 0:
            # Remaining sources cannot revive an empty intersection, and
            # their probabilities sum to 1, so the whole subtree collapses.
            empty_p += prob
            return
        if i == m:
            if not g & outside:
                inside_p += prob
            return
        for p, bits in tables[i]:
            walk(i + 1, prob * p, g & bits)

    walk(0, 1.0, problem.frame.full_bits)
    return inside_p, empty_p


def exact_belief_enumeration(
    problem: EvidenceProblem,
    b: FocalSet,
    *,
    max_outcomes: int = DEFAULT_MAX_OUTCOMES,
) -> tuple[float, float]:
    """Exact combined belief in ``b`` plus the conflict mass, by direct
    enumeration of joint source outcomes (no intermediate mass tables)."""
    inside_p, empty_p = _enumerate(problem, b, max_outcomes)
    survival = 1.0 - empty_p
    if survival <= CONFLICT_TOL:
        raise TotalConflictError("exact enumeration: total conflict, combination undefined")
    return inside_p / survival, empty_p


def conflict_exact(
    problem: EvidenceProblem, *, max_outcomes: int = DEFAULT_MAX_OUTCOMES
) -> float:
    """Exact conflict mass: probability that a joint draw is contradictory."""
    _, empty_p = _enumerate(problem, problem.frame.universe(), max_outcomes)
    return empty_p
