"""Trial-sampled belief over a literal-conjunction evidence language.

Sources certify conjunctions of literals (term sets); queries are clauses
(disjunctions of literals).  A trial draws one term per source and merges
them into a partial assignment, restarting on a contradiction; the clause is
entailed when the merged term contains one of its literals.  For this
fragment that syntactic check coincides with semantic entailment.

Merging and entailment cost is metered in literal operations.  An optional
per-trial step budget marks trials that exceed it as timeouts, which score 0
toward the lower bound and 1 toward the upper bound.  The metering never
changes what is sampled, so tightening the budget only moves scores between
the bounds.

Problems over few atoms translate exactly to set problems over the frame of
truth assignments, which connects this estimator to the exact combiners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

from .errors import FrameTooLargeError, InvalidProblemError
from .evidence import (
    EvidenceProblem,
    FocalSet,
    Frame,
    MASS_TOL,
    SourceModel,
)
from .mc import (
    TrialEngineConfig,
    _cap_error,
    _split_trials,
    sd_bound,
    worker_rng,
)

#: Widest assignment frame the exact translation will build (2**16 elements).
MAX_TRANSLATE_ATOMS = 16


@dataclass(frozen=True, order=True)
class Literal:
    """An atom or its negation."""

    atom: str
    positive: bool = True

    def __invert__(self) -> Literal:
        return Literal(self.atom, not self.positive)

    def __str__(self) -> str:
        return self.atom if self.positive else "!" + self.atom

    @classmethod
    def parse(cls, text: str) -> Literal:
        """Parse ``"p"`` or ``"!p"``."""
        body = text[1:] if text.startswith("!") else text
        if not body or body.startswith("!") or any(c in body for c in "{}[]#* \t"):
            raise ValueError(f"bad literal: {text!r}")
        return cls(body, not text.startswith("!"))


def lits(*texts: str) -> tuple[Literal, ...]:
    """Shorthand: ``lits("p", "!q")``."""
    return tuple(Literal.parse(t) for t in texts)


@dataclass(frozen=True)
class TermSet:
    """A conjunction of literals, canonicalized to a sorted, deduplicated
    tuple so equal terms compare and render identically."""

    literals: tuple[Literal, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "literals", tuple(sorted(set(self.literals))))

    @classmethod
    def of(cls, *texts: str) -> TermSet:
        return cls(lits(*texts))

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def atoms(self) -> set[str]:
        return {l.atom for l in self.literals}

    def __contains__(self, lit: object) -> bool:
        return lit in self.literals

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __str__(self) -> str:
        return "[" + " ".join(str(l) for l in self.literals) + "]"


@dataclass(frozen=True)
class ClauseQuery:
    """A disjunction of literals; must be non-empty."""

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "literals", tuple(sorted(set(self.literals))))
        if not self.literals:
            raise ValueError("clause query needs at least one literal")

    @classmethod
    def of(cls, *texts: str) -> ClauseQuery:
        return cls(lits(*texts))

    @cached_property
    def is_tautology(self) -> bool:
        signs: dict[str, bool] = {}
        for l in self.literals:
            if signs.get(l.atom, l.positive) != l.positive:
                return True
            signs[l.atom] = l.positive
        return False

    def __str__(self) -> str:
        return "[" + " ".join(str(l) for l in self.literals) + "]"


@dataclass(frozen=True)
class LogicSource:
    """One evidence source whose outcomes certify term sets."""

    outcomes: tuple[tuple[float, TermSet], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "outcomes", tuple((float(p), t) for p, t in self.outcomes)
        )


@dataclass(frozen=True)
class LogicProblem:
    """Declared atom universe plus the sources over it."""

    atoms: tuple[str, ...]
    sources: tuple[LogicSource, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "sources", tuple(self.sources))


@dataclass(frozen=True)
class BoundedEstimate:
    """Lower/upper belief bounds from a budgeted run.

    Without a budget (or when nothing times out) the two bounds coincide at
    the plain estimate.
    """

    lower: float
    upper: float
    trials: int
    successes: int
    timeouts: int
    restarts: int
    sd_bound: float


def is_contradictory(term: TermSet) -> bool:
    """True when the term contains an atom with both signs."""
    signs: dict[str, bool] = {}
    for l in term.literals:
        if signs.get(l.atom, l.positive) != l.positive:
            return True
        signs[l.atom] = l.positive
    return False


def entails(term: TermSet, clause: ClauseQuery) -> bool:
    """Does the term force the clause?

    For a consistent conjunction of literals this reduces to a syntactic
    check: the clause is a tautology, or the term contains one of its
    literals.  Raises ``ValueError`` on a contradictory term, whose
    entailments are not meaningful.
    """
    if is_contradictory(term):
        raise ValueError(f"term {term} is contradictory")
    if clause.is_tautology:
        return True
    have = set(term.literals)
    return any(l in have for l in clause.literals)


def validate_logic_sources(sources: Sequence[LogicSource]) -> list[str]:
    """Structural checks shared by every logic entry point."""
    report: list[str] = []
    if not sources:
        report.append("problem has no sources")
    for i, source in enumerate(sources):
        if not source.outcomes:
            report.append(f"source {i}: no outcomes")
            continue
        for k, (p, t) in enumerate(source.outcomes):
            if not p > 0.0:
                report.append(f"source {i} outcome {k}: probability {p:g} not positive")
            if is_contradictory(t):
                report.append(f"source {i} outcome {k}: contradictory term")
        total = math.fsum(p for p, _ in source.outcomes)
        if abs(total - 1.0) > MASS_TOL:
            report.append(f"source {i}: probabilities sum to {total:g}")
    return report


def validate_logic_problem(problem: LogicProblem) -> list[str]:
    """Source checks plus the declared-atom discipline."""
    report: list[str] = []
    seen: set[str] = set()
    for atom in problem.atoms:
        if not atom:
            report.append("empty atom name")
        elif atom in seen:
            report.append(f"duplicate atom {atom!r}")
        seen.add(atom)
    report.extend(validate_logic_sources(problem.sources))
    for i, source in enumerate(problem.sources):
        for k, (_, t) in enumerate(source.outcomes):
            for atom in sorted(t.atoms() - seen):
                report.append(f"source {i} outcome {k}: unknown atom {atom!r}")
    return report


def _logic_tables(
    sources: Sequence[LogicSource],
) -> tuple[list[tuple[float, ...]], list[tuple[tuple[tuple[str, bool], ...], ...]]]:
    cums = []
    terms = []
    for source in sources:
        total = math.fsum(p for p, _ in source.outcomes)
        acc = 0.0
        cl = []
        for p, _ in source.outcomes:
            acc += p / total
            cl.append(acc)
        cl[-1] = 1.0
        cums.append(tuple(cl))
        terms.append(
            tuple(
                tuple((l.atom, l.positive) for l in t.literals)
                for _, t in source.outcomes
            )
        )
    return cums, terms


def _kernel_logic(
    cums,
    terms,
    clause_pairs: tuple[tuple[str, bool], ...],
    tautology: bool,
    trials: int,
    rng,
    cap: int,
    budget: int | None,
) -> tuple[int, int, int]:
    """Returns (successes, timeouts, restarts).

    Step accounting: one operation per literal merged into the partial
    assignment (the merge stops at the first contradiction) and one per
    clause literal tested (the test stops at the first hit).  The count is a
    pure function of the draws, so the budget never perturbs the stream.
    """
    m = len(cums)
    rand = rng.random
    successes = 0
    timeouts = 0
    restarts = 0
    for t in range(trials):
        trial_restarts = 0
        ops = 0
        while True:
            assign: dict[str, bool] = {}
            contradictory = False
            for si in range(m):
                u = rand()
                cl = cums[si]
                if len(cl) == 2:
                    k = 0 if u < cl[0] else 1
                else:
                    k = 0
                    while u >= cl[k]:
                        k += 1
                if contradictory:
                    continue  # keep drawing: one uniform per source per attempt
                for atom, pol in terms[si][k]:
                    ops += 1
                    prev = assign.get(atom)
                    if prev is None:
                        assign[atom] = pol
                    elif prev != pol:
                        contradictory = True
                        break
            if not contradictory:
                break
            restarts += 1
            trial_restarts += 1
            if trial_restarts > cap:
                raise _cap_error(restarts, t, cap)
        if tautology:
            hit = True
        else:
            hit = False
            for atom, pol in clause_pairs:
                ops += 1
                if assign.get(atom) == pol:
                    hit = True
                    break
        if budget is not None and ops > budget:
            timeouts += 1
        elif hit:
            successes += 1
    return successes, timeouts, restarts


def logic_estimate(
    sources: Sequence[LogicSource],
    query: ClauseQuery,
    cfg: TrialEngineConfig,
    step_budget: int | None = None,
) -> BoundedEstimate:
    """Estimate the combined belief that the sources force ``query``.

    ``step_budget`` caps the literal operations any one trial may spend;
    over-budget trials count toward ``timeouts`` and widen the bounds.
    Worker splitting and seeding follow the same substream contract as the
    set-problem estimator.
    """
    report = validate_logic_sources(sources)
    if report:
        raise InvalidProblemError(report)
    if step_budget is not None and step_budget < 0:
        raise ValueError(f"step budget must be >= 0, got {step_budget}")
    cums, terms = _logic_tables(sources)
    clause_pairs = tuple((l.atom, l.positive) for l in query.literals)
    tautology = query.is_tautology

    shares = _split_trials(cfg.trials, cfg.worker_count)
    parts = []
    if len(shares) == 1:
        parts.append(
            _kernel_logic(
                cums, terms, clause_pairs, tautology, shares[0],
                worker_rng(cfg.seed, 0), cfg.restart_cap, step_budget,
            )
        )
    else:
        from concurrent.futures import ThreadPoolExecutor

        def job(arg):
            w, share = arg
            return _kernel_logic(
                cums, terms, clause_pairs, tautology, share,
                worker_rng(cfg.seed, w), cfg.restart_cap, step_budget,
            )

        with ThreadPoolExecutor(max_workers=len(shares)) as pool:
            parts = list(pool.map(job, enumerate(shares)))

    successes = sum(p[0] for p in parts)
    timeouts = sum(p[1] for p in parts)
    restarts = sum(p[2] for p in parts)
    return BoundedEstimate(
        lower=successes / cfg.trials,
        upper=(successes + timeouts) / cfg.trials,
        trials=cfg.trials,
        successes=successes,
        timeouts=timeouts,
        restarts=restarts,
        sd_bound=sd_bound(cfg.trials),
    )


@dataclass(frozen=True)
class AssignmentSpace:
    """The frame of truth assignments over an atom tuple.

    Element ``a`` is the assignment whose bit ``i`` (and character ``i`` of
    its label) gives the truth value of atom ``i``.
    """

    atoms: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if len(self.atoms) > MAX_TRANSLATE_ATOMS:
            raise FrameTooLargeError(
                f"assignment frame over {len(self.atoms)} atoms exceeds the "
                f"{MAX_TRANSLATE_ATOMS}-atom limit"
            )
        if len(set(self.atoms)) != len(self.atoms) or not self.atoms:
            raise ValueError("atoms must be non-empty and unique")

    @cached_property
    def frame(self) -> Frame:
        k = len(self.atoms)
        return Frame(
            tuple(
                "".join("1" if a >> i & 1 else "0" for i in range(k))
                for a in range(1 << k)
            )
        )

    @cached_property
    def _true_bits(self) -> dict[str, int]:
        k = len(self.atoms)
        out = {}
        for i, atom in enumerate(self.atoms):
            bits = 0
            for a in range(1 << k):
                if a >> i & 1:
                    bits |= 1 << a
            out[atom] = bits
        return out

    def literal_bits(self, lit: Literal) -> int:
        bits = self._true_bits[lit.atom]
        return bits if lit.positive else self.frame.full_bits ^ bits

    def term_focal(self, term: TermSet) -> FocalSet:
        """Assignments satisfying a conjunction (the frame for an empty term)."""
        bits = self.frame.full_bits
        for l in term.literals:
            bits &= self.literal_bits(l)
        return FocalSet(self.frame, bits)

    def clause_focal(self, clause: ClauseQuery) -> FocalSet:
        """Assignments satisfying a disjunction."""
        bits = 0
        for l in clause.literals:
            bits |= self.literal_bits(l)
        return FocalSet(self.frame, bits)


def translate_to_set_problem(problem: LogicProblem) -> EvidenceProblem:
    """Recast a logic problem over the assignment frame.

    Each term maps to the set of assignments satisfying it, so combined
    belief in any clause's satisfying set equals the logic-side belief.
    Guarded by :data:`MAX_TRANSLATE_ATOMS` since the frame doubles per atom.
    """
    report = validate_logic_problem(problem)
    if report:
        raise InvalidProblemError(report)
    space = AssignmentSpace(problem.atoms)
    sources = tuple(
        SourceModel(
            space.frame,
            tuple((p, space.term_focal(t)) for p, t in source.outcomes),
        )
        for source in problem.sources
    )
    return EvidenceProblem(space.frame, sources)
