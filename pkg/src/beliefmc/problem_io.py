"""Problem-file parsing, rendering and random problem generation.

The text format, one directive per line, ``#`` starting a comment::

    # set problem: a frame and two-outcome sources
    frame: x1 x2 x3
    source:
      0.6 {x1 x2}
      0.4 *

    # logic problem: an atom universe and term-set sources
    atoms: p q
    source:
      0.7 [p !q]
      0.3 []

``*`` is the whole frame, ``{a b}`` a subset by element labels, ``[p !q]``
a conjunction of literals (``!`` negates) and ``[]`` the empty conjunction.
Rendering writes probabilities with ``repr``, so a rendered problem parses
back to an equal value.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import InvalidProblemError, ParseError
from .evidence import (
    EvidenceProblem,
    FocalSet,
    Frame,
    SourceModel,
    simple_support,
    validate_problem,
)
from .logic import (
    ClauseQuery,
    Literal,
    LogicProblem,
    LogicSource,
    TermSet,
    validate_logic_problem,
)
from .mc import TrialEngineConfig, conflict_estimate, derive_stream_seed
from .errors import ExcessiveConflictError

_SPECIALS = set("{}[]#*!")


def _renderable(token: str) -> bool:
    return bool(token) and not any(c.isspace() or c in _SPECIALS for c in token)


def _strip_comment(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


class _Lines:
    def __init__(self, text: str):
        self.rows = text.splitlines()

    def __iter__(self):
        for idx, raw in enumerate(self.rows, start=1):
            body = _strip_comment(raw)
            if body.strip():
                yield idx, raw, body


def _parse_set_expr(frame: Frame, expr: str, line: int, col: int) -> FocalSet:
    expr = expr.strip()
    if expr == "*":
        return frame.universe()
    if not expr.startswith("{"):
        raise ParseError(line, col, f"expected a set like {{x1 x2}} or *, got {expr!r}")
    if not expr.endswith("}"):
        raise ParseError(line, col, "expected '}' closing the set")
    bits = 0
    for label in expr[1:-1].split():
        if label not in frame:
            raise ParseError(line, col, f"unknown element {label!r}")
        bits |= 1 << frame.index(label)
    return FocalSet(frame, bits)


def _parse_term_expr(expr: str, line: int, col: int) -> tuple[Literal, ...]:
    expr = expr.strip()
    if not expr.startswith("["):
        raise ParseError(line, col, f"expected a term like [p !q], got {expr!r}")
    if not expr.endswith("]"):
        raise ParseError(line, col, "expected ']' closing the term")
    out = []
    for tok in expr[1:-1].split():
        try:
            out.append(Literal.parse(tok))
        except ValueError as e:
            raise ParseError(line, col, str(e)) from None
    return tuple(out)


def parse_problem(text: str, *, validate: bool = True) -> EvidenceProblem | LogicProblem:
    """Parse a problem file.

    Syntax trouble raises :class:`ParseError` with a 1-based line and
    column.  With ``validate`` (the default), structural violations raise
    :class:`InvalidProblemError`; pass ``validate=False`` to get the parsed
    problem and run the checks yourself.
    """
    header: tuple[str, list[str], int, int] | None = None
    raw_sources: list[list[tuple[float, str, int, int]]] = []
    last_line = 0
    for lineno, raw, body in _Lines(text):
        last_line = lineno
        tokens = body.split()
        first = tokens[0]
        col = raw.index(first) + 1
        if first in ("frame:", "atoms:"):
            if header is not None:
                raise ParseError(lineno, col, f"unexpected second {first!r} header")
            if raw_sources:
                raise ParseError(lineno, col, f"{first!r} header after a source block")
            for tok in tokens[1:]:
                if not _renderable(tok):
                    raise ParseError(lineno, col, f"bad name {tok!r} in {first!r} header")
            header = (first, tokens[1:], lineno, col)
        elif first == "source:":
            if header is None:
                raise ParseError(lineno, col, "'source:' before a 'frame:' or 'atoms:' header")
            if len(tokens) > 1:
                raise ParseError(lineno, col, "unexpected text after 'source:'")
            raw_sources.append([])
        else:
            if header is None:
                raise ParseError(lineno, col, "expected a 'frame:' or 'atoms:' header")
            if not raw_sources:
                raise ParseError(lineno, col, "outcome line outside a source block")
            try:
                prob = float(first)
            except ValueError:
                raise ParseError(lineno, col, f"bad probability {first!r}") from None
            expr = body[body.index(first) + len(first):].strip()
            expr_col = raw.index(expr[0], col) + 1 if expr else col
            if not expr:
                raise ParseError(lineno, col, "outcome needs a target after the probability")
            raw_sources[-1].append((prob, expr, lineno, expr_col))

    if header is None:
        raise ParseError(last_line + 1, 1, "expected a 'frame:' or 'atoms:' header")

    kind, head_tokens, head_line, head_col = header
    problem: EvidenceProblem | LogicProblem
    if kind == "frame:":
        try:
            frame = Frame(tuple(head_tokens))
        except ValueError as e:
            raise ParseError(head_line, head_col, str(e)) from None
        sources = tuple(
            SourceModel(
                frame,
                tuple(
                    (p, _parse_set_expr(frame, expr, ln, cl))
                    for p, expr, ln, cl in block
                ),
            )
            for block in raw_sources
        )
        problem = EvidenceProblem(frame, sources)
        report = validate_problem(problem)
    else:
        sources = tuple(
            LogicSource(
                tuple(
                    (p, TermSet(_parse_term_expr(expr, ln, cl)))
                    for p, expr, ln, cl in block
                )
            )
            for block in raw_sources
        )
        problem = LogicProblem(tuple(head_tokens), sources)
        report = validate_logic_problem(problem)
    if validate and report:
        raise InvalidProblemError(report)
    return problem


def parse_query(frame: Frame, text: str) -> FocalSet:
    """Parse a query set expression (``{x1 x2}``, ``{}`` or ``*``)."""
    return _parse_set_expr(frame, text, 1, 1)


def parse_clause(text: str) -> ClauseQuery:
    """Parse a clause query expression (``[p !q]``)."""
    literals = _parse_term_expr(text, 1, 1)
    if not literals:
        raise ParseError(1, 1, "clause query needs at least one literal")
    return ClauseQuery(literals)


def render_problem(problem: EvidenceProblem | LogicProblem) -> str:
    """Render a problem so that parsing the result gives back an equal value.

    Labels and atoms must be plain tokens (no whitespace or punctuation that
    the parser claims); anything else raises ``ValueError``.
    """
    lines: list[str] = []
    if isinstance(problem, EvidenceProblem):
        for label in problem.frame.elements:
            if not _renderable(label):
                raise ValueError(f"element label {label!r} is not renderable")
        lines.append("frame: " + " ".join(problem.frame.elements))
        for source in problem.sources:
            lines.append("source:")
            for p, t in source.outcomes:
                lines.append(f"  {p!r} {t}")
    else:
        for atom in problem.atoms:
            if not _renderable(atom):
                raise ValueError(f"atom {atom!r} is not renderable")
        lines.append("atoms: " + " ".join(problem.atoms))
        for source in problem.sources:
            lines.append("source:")
            for p, t in source.outcomes:
                lines.append(f"  {p!r} {t}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GeneratedProblem:
    """A generated problem plus the measured conflict of its draw."""

    problem: EvidenceProblem
    conflict_estimate: float
    focus_density: float
    weight_range: tuple[float, float]
    seed: int


def generate_problem(
    source_count: int,
    element_count: int,
    *,
    weight_range: tuple[float, float] = (0.4, 0.9),
    focus_density: float = 0.5,
    seed: int = 0,
    probe_trials: int = 2000,
) -> GeneratedProblem:
    """Generate a random simple-support problem and probe its conflict.

    Each source draws its weight uniformly from ``weight_range`` and its
    focus by including each element with probability ``focus_density``
    (an empty draw falls back to one uniformly chosen element, so very
    sparse densities degrade to singleton foci instead of spinning).
    Every source consumes an independent
    substream derived from the seed, so source ``i`` is the same no matter
    how many sources are requested.  The reported conflict estimate comes
    from a short probe run on its own substream.
    """
    if source_count < 1 or element_count < 1:
        raise ValueError("need at least one source and one element")
    lo, hi = weight_range
    if not 0.0 < lo <= hi <= 1.0:
        raise ValueError(f"weight range {weight_range!r} outside (0, 1]")
    if not 0.0 < focus_density <= 1.0:
        raise ValueError(f"focus density {focus_density!r} outside (0, 1]")
    frame = Frame(tuple(f"x{j + 1}" for j in range(element_count)))
    sources = []
    for i in range(source_count):
        rng = random.Random(derive_stream_seed(seed, "gen-source", i))
        weight = lo + (hi - lo) * rng.random()
        bits = 0
        for j in range(element_count):
            if rng.random() < focus_density:
                bits |= 1 << j
        if not bits:
            bits = 1 << rng.randrange(element_count)
        sources.append(simple_support(frame, FocalSet(frame, bits), weight))
    problem = EvidenceProblem(frame, tuple(sources))
    probe_cfg = TrialEngineConfig(
        trials=probe_trials,
        seed=derive_stream_seed(seed, "gen-probe"),
        restart_cap=1000,
    )
    try:
        kappa, _ = conflict_estimate(problem, probe_cfg)
    except ExcessiveConflictError as e:
        kappa = e.conflict_estimate
    return GeneratedProblem(problem, kappa, focus_density, (lo, hi), seed)


def tune_focus_density(
    source_count: int,
    element_count: int,
    *,
    target_conflict: float = 0.5,
    weight_range: tuple[float, float] = (0.4, 0.9),
    seed: int = 0,
    probes: int = 20,
    probe_trials: int = 2000,
) -> GeneratedProblem:
    """Bisect the focus density toward a target conflict level.

    Conflict falls as foci get denser (they overlap more), so plain
    bisection applies.  Runs at most ``probes`` probe generations and
    returns the draw whose measured conflict came closest to the target.
    """
    if not 0.0 <= target_conflict < 1.0:
        raise ValueError(f"target conflict {target_conflict!r} outside [0, 1)")
    lo, hi = 0.005, 0.995
    best: GeneratedProblem | None = None
    for _ in range(probes):
        mid = (lo + hi) / 2.0
        g = generate_problem(
            source_count,
            element_count,
            weight_range=weight_range,
            focus_density=mid,
            seed=seed,
            probe_trials=probe_trials,
        )
        if best is None or abs(g.conflict_estimate - target_conflict) < abs(
            best.conflict_estimate - target_conflict
        ):
            best = g
        if g.conflict_estimate > target_conflict:
            lo = mid
        else:
            hi = mid
    assert best is not None
    return best
