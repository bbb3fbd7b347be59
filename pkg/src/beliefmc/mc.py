"""Trial-sampled estimation of combined belief.

One trial draws an outcome from every source, intersects the certified
subsets, restarts on a contradiction (empty intersection), and scores 1 when
the surviving intersection lies inside the query set.  The success frequency
estimates the combined belief; the rejected-draw frequency estimates the
conflict mass.

Three inner loops, all consuming exactly one uniform per source per attempt,
in source order, so their draw streams are interchangeable:

* the single-query kernel scans frame elements, maintaining non-emptiness
  and the subset check together, and stops scanning the moment a surviving
  element falls outside the query;
* the batch kernel materializes the intersection once and tests every query
  against it;
* the simple-support kernel treats each two-outcome source as a Bernoulli
  activation and intersects only the activated foci.
"""

from __future__ import annotations

import hashlib
import math
import random
from bisect import bisect_right
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

from .errors import ExcessiveConflictError, FrameMismatchError, InvalidProblemError
from .evidence import (
    EvidenceProblem,
    FocalSet,
    SourceModel,
    as_simple_support,
    require_valid,
)

DEFAULT_RESTART_CAP = 10_000

#: One uniform draw per source per attempt.  A joint sampler returns one
#: outcome index per source.
JointSampler = Callable[[random.Random], Sequence[int]]


@dataclass(frozen=True)
class TrialEngineConfig:
    """Knobs for one estimation run."""

    trials: int
    seed: int = 0
    restart_cap: int = DEFAULT_RESTART_CAP
    worker_count: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.restart_cap < 1:
            raise ValueError(f"restart_cap must be >= 1, got {self.restart_cap}")
        if self.worker_count < 1:
            raise ValueError(f"worker_count must be >= 1, got {self.worker_count}")


@dataclass(frozen=True)
class Estimate:
    """Result of one estimated query."""

    value: float
    trials: int
    successes: int
    restarts: int
    sd_bound: float
    plugin_sd: float
    conflict_estimate: float
    interval: tuple[float, float]


@dataclass(frozen=True)
class QueryBatch:
    """Query sets to score against the same trial stream."""

    queries: tuple[FocalSet, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "queries", tuple(self.queries))
        if not self.queries:
            raise ValueError("query batch is empty")
        frame = self.queries[0].frame
        for q in self.queries[1:]:
            if q.frame != frame:
                raise FrameMismatchError("queries belong to different frames")


def plan_trials(accuracy: float) -> int:
    """Trials needed so that three standard deviations stay within
    ``accuracy``: at least ``9 / (4 * accuracy**2)``."""
    if not 0.0 < accuracy <= 1.0:
        raise ValueError(f"accuracy must be in (0, 1], got {accuracy!r}")
    return max(1, math.ceil(9.0 / (4.0 * accuracy * accuracy) - 1e-9))


def sd_bound(trials: int) -> float:
    """Worst-case standard deviation of a success frequency over ``trials``
    trials: the variance of a single trial is at most 1/4."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return 0.5 / math.sqrt(trials)


def derive_stream_seed(seed: int, label: str, index: int = 0) -> int:
    """Derive an independent substream seed from ``(seed, label, index)``.

    SHA-256 over the packed triple, truncated to 64 bits.  Purpose labels
    keep unrelated substreams (workers, problem generation, probes) from
    colliding when they share a base seed.
    """
    payload = f"{label}:{seed}:{index}".encode()
    digest = hashlib.sha256(payload).digest()
    return int.from_bytes(digest[:8], "big")


def worker_rng(seed: int, worker: int) -> random.Random:
    return random.Random(derive_stream_seed(seed, "worker", worker))


def _split_trials(trials: int, workers: int) -> list[int]:
    base, extra = divmod(trials, workers)
    shares = [base + (1 if w < extra else 0) for w in range(workers)]
    return [s for s in shares if s > 0]


def _source_tables(
    problem: EvidenceProblem,
) -> tuple[list[tuple[float, ...]], list[tuple[int, ...]]]:
    cums = [s.cumulative for s in problem.sources]
    masks = [s.target_bits for s in problem.sources]
    return cums, masks


def _cap_error(rejected: int, completed: int, cap: int) -> ExcessiveConflictError:
    kappa = rejected / (rejected + completed) if rejected + completed else 1.0
    return ExcessiveConflictError(
        f"restart cap {cap} exhausted within one trial; "
        f"conflict estimate so far {kappa:.4f}",
        kappa,
    )


def _draw_plan(cums, masks):
    """Per-source draw lookups, split so the common two-outcome case pays
    no ``len`` check inside the hot loop.  The draw discipline is the same
    for every kernel: one uniform per source per attempt, in source order."""
    two = [len(cl) == 2 for cl in cums]
    heads = [cl[0] for cl in cums]
    lo = [mk[0] for mk in masks]
    hi = [mk[1] if len(mk) > 1 else mk[0] for mk in masks]
    return two, heads, lo, hi


def _kernel_single(
    cums, masks, n: int, b_bits: int, trials: int, rng: random.Random, cap: int
) -> tuple[int, int]:
    """Merged element scan for a single query; returns (successes, restarts)."""
    m = len(cums)
    rand = rng.random
    chosen = [0] * m
    two, heads, lo, hi = _draw_plan(cums, masks)
    source_ix = range(m)
    bits = [1 << j for j in range(n)]
    successes = 0
    restarts = 0
    for t in range(trials):
        trial_restarts = 0
        while True:
            for si in source_ix:
                u = rand()
                if two[si]:
                    chosen[si] = lo[si] if u < heads[si] else hi[si]
                else:
                    chosen[si] = masks[si][bisect_right(cums[si], u)]
            empty = True
            score = 1
            for bit in bits:
                acc = bit
                for gm in chosen:
                    acc &= gm
                if acc:
                    empty = False
                    if not b_bits & bit:
                        score = 0
                        break
            if not empty:
                successes += score
                break
            restarts += 1
            trial_restarts += 1
            if trial_restarts > cap:
                raise _cap_error(restarts, t, cap)
    return successes, restarts


def _kernel_batch(
    cums,
    masks,
    full: int,
    not_queries: Sequence[int],
    trials: int,
    rng: random.Random,
    cap: int,
    collect: Counter | None = None,
) -> tuple[list[int], int]:
    """Materialized intersection scored against many queries."""
    m = len(cums)
    rand = rng.random
    chosen = [0] * m
    two, heads, lo, hi = _draw_plan(cums, masks)
    source_ix = range(m)
    successes = [0] * len(not_queries)
    restarts = 0
    for t in range(trials):
        trial_restarts = 0
        while True:
            for si in source_ix:
                u = rand()
                if two[si]:
                    chosen[si] = lo[si] if u < heads[si] else hi[si]
                else:
                    chosen[si] = masks[si][bisect_right(cums[si], u)]
            g = full
            for gm in chosen:
                g &= gm
            if g:
                break
            restarts += 1
            trial_restarts += 1
            if trial_restarts > cap:
                raise _cap_error(restarts, t, cap)
        for qi, nq in enumerate(not_queries):
            if not g & nq:
                successes[qi] += 1
        if collect is not None:
            collect[g] += 1
    return successes, restarts


def _kernel_ssf(
    plans,
    full: int,
    b_bits: int,
    trials: int,
    rng: random.Random,
    cap: int,
) -> tuple[int, int]:
    """Bernoulli-activation kernel for simple-support sources.

    ``plans`` holds one ``(threshold, low_mask, high_mask)`` per source; the
    draw picks ``low_mask`` when the uniform falls below the threshold.
    Vacuous masks are skipped, so only activated foci are intersected.
    """
    rand = rng.random
    not_b = ~b_bits
    successes = 0
    restarts = 0
    for t in range(trials):
        trial_restarts = 0
        while True:
            g = full
            for thr, lo, hi in plans:
                mask = lo if rand() < thr else hi
                if mask != full:
                    g &= mask
            if g:
                break
            restarts += 1
            trial_restarts += 1
            if trial_restarts > cap:
                raise _cap_error(restarts, t, cap)
        if not g & not_b:
            successes += 1
    return successes, restarts


def _kernel_hook(
    masks,
    full: int,
    not_queries: Sequence[int],
    trials: int,
    rng: random.Random,
    cap: int,
    sampler: JointSampler,
) -> tuple[list[int], int]:
    """Batch kernel with sampling delegated to a joint sampler."""
    m = len(masks)
    successes = [0] * len(not_queries)
    restarts = 0
    for t in range(trials):
        trial_restarts = 0
        while True:
            idxs = sampler(rng)
            if len(idxs) != m:
                raise ValueError(
                    f"joint sampler returned {len(idxs)} indices for {m} sources"
                )
            g = full
            for si in range(m):
                g &= masks[si][idxs[si]]
            if g:
                break
            restarts += 1
            trial_restarts += 1
            if trial_restarts > cap:
                raise _cap_error(restarts, t, cap)
        for qi, nq in enumerate(not_queries):
            if not g & nq:
                successes[qi] += 1
    return successes, restarts


def sample_source(source: SourceModel, rng: random.Random) -> int:
    """Draw one outcome index from a source's distribution."""
    u = rng.random()
    cl = source.cumulative
    if len(cl) == 2:
        return 0 if u < cl[0] else 1
    return bisect_right(cl, u)


def run_trial(
    problem: EvidenceProblem,
    b: FocalSet,
    rng: random.Random,
    restart_cap: int = DEFAULT_RESTART_CAP,
) -> tuple[int, int]:
    """One trial of the merged scan; returns ``(success, restarts)``.

    The caller is expected to pass a structurally valid problem; run a batch
    through :func:`estimate` for validated entry points.
    """
    if b.frame != problem.frame:
        raise FrameMismatchError("query set from a different frame")
    cums, masks = _source_tables(problem)
    return _kernel_single(
        cums, masks, problem.frame.size, b.bits, 1, rng, restart_cap
    )


def ssf_fast_trial(
    problem: EvidenceProblem,
    b: FocalSet,
    rng: random.Random,
    restart_cap: int = DEFAULT_RESTART_CAP,
) -> tuple[int, int]:
    """One trial through the simple-support fast path; returns
    ``(success, restarts)``.

    Consumes the uniform stream exactly as :func:`run_trial` does, so for a
    shared seed the two produce identical results.  Raises ``ValueError``
    when any source is not of simple-support shape.
    """
    if b.frame != problem.frame:
        raise FrameMismatchError("query set from a different frame")
    plans = _ssf_plans(problem)
    return _kernel_ssf(
        plans, problem.frame.full_bits, b.bits, 1, rng, restart_cap
    )


def _ssf_plans(problem: EvidenceProblem) -> list[tuple[float, int, int]]:
    plans = []
    for i, source in enumerate(problem.sources):
        if as_simple_support(source) is None:
            raise ValueError(f"source {i} is not a simple support source")
        cl = source.cumulative
        tb = source.target_bits
        if len(cl) == 1:
            plans.append((1.0, tb[0], tb[0]))
        else:
            plans.append((cl[0], tb[0], tb[1]))
    return plans


def _run_workers(cfg: TrialEngineConfig, job) -> list:
    """Split trials across derived substreams and merge the raw results."""
    shares = _split_trials(cfg.trials, cfg.worker_count)
    args = [(share, worker_rng(cfg.seed, w)) for w, share in enumerate(shares)]
    if len(args) == 1:
        return [job(*args[0])]
    with ThreadPoolExecutor(max_workers=len(args)) as pool:
        return list(pool.map(lambda a: job(*a), args))


def _build_estimate(
    successes: int, trials: int, restarts: int
) -> Estimate:
    value = successes / trials
    bound = sd_bound(trials)
    plugin = math.sqrt(value * (1.0 - value) / trials)
    kappa = restarts / (restarts + trials)
    return Estimate(
        value=value,
        trials=trials,
        successes=successes,
        restarts=restarts,
        sd_bound=bound,
        plugin_sd=plugin,
        conflict_estimate=kappa,
        interval=(max(0.0, value - 3.0 * bound), min(1.0, value + 3.0 * bound)),
    )


def estimate(
    problem: EvidenceProblem,
    batch: QueryBatch | Sequence[FocalSet],
    cfg: TrialEngineConfig,
    *,
    joint_sampler: JointSampler | None = None,
) -> list[Estimate]:
    """Estimate the combined belief of every query in ``batch``.

    All queries share one trial stream: the intersection from each accepted
    trial is scored against every query, so a batch costs barely more than a
    single query.  With ``worker_count > 1`` the trials are split across
    per-worker substreams derived from the seed and merged additively, which
    makes results a pure function of ``(seed, worker_count)``.

    ``joint_sampler`` replaces independent per-source sampling (for
    correlated sources); it must return one outcome index per source per
    attempt.
    """
    require_valid(problem)
    if not isinstance(batch, QueryBatch):
        batch = QueryBatch(tuple(batch))
    for q in batch.queries:
        if q.frame != problem.frame:
            raise FrameMismatchError("query set from a different frame")
    cums, masks = _source_tables(problem)
    full = problem.frame.full_bits
    n = problem.frame.size
    queries = batch.queries

    if joint_sampler is not None:
        not_qs = [~q.bits for q in queries]

        def job(share, rng):
            return _kernel_hook(
                masks, full, not_qs, share, rng, cfg.restart_cap, joint_sampler
            )

        parts = _run_workers(cfg, job)
        restarts = sum(r for _, r in parts)
        totals = [sum(p[0][qi] for p in parts) for qi in range(len(queries))]
        return [_build_estimate(s, cfg.trials, restarts) for s in totals]

    if len(queries) == 1:
        b_bits = queries[0].bits

        def job(share, rng):
            return _kernel_single(cums, masks, n, b_bits, share, rng, cfg.restart_cap)

        parts = _run_workers(cfg, job)
        successes = sum(s for s, _ in parts)
        restarts = sum(r for _, r in parts)
        return [_build_estimate(successes, cfg.trials, restarts)]

    not_qs = [~q.bits for q in queries]

    def job(share, rng):
        return _kernel_batch(cums, masks, full, not_qs, share, rng, cfg.restart_cap)

    parts = _run_workers(cfg, job)
    restarts = sum(r for _, r in parts)
    totals = [sum(p[0][qi] for p in parts) for qi in range(len(queries))]
    return [_build_estimate(s, cfg.trials, restarts) for s in totals]


def conflict_estimate(
    problem: EvidenceProblem, cfg: TrialEngineConfig
) -> tuple[float, float]:
    """Estimate the conflict mass and the expected draws per accepted trial.

    Returns ``(kappa_hat, draws_per_trial)`` where ``kappa_hat`` is the
    rejected-draw frequency and ``draws_per_trial = 1 / (1 - kappa_hat)``
    is what each trial cost on average, restarts included.
    """
    require_valid(problem)
    cums, masks = _source_tables(problem)
    full = problem.frame.full_bits

    def job(share, rng):
        return _kernel_batch(cums, masks, full, (), share, rng, cfg.restart_cap)

    parts = _run_workers(cfg, job)
    restarts = sum(r for _, r in parts)
    kappa = restarts / (restarts + cfg.trials)
    return kappa, (restarts + cfg.trials) / cfg.trials


def subset_frequency_scan(
    problem: EvidenceProblem, cfg: TrialEngineConfig, max_report: int = 10
) -> list[tuple[FocalSet, float]]:
    """Most frequent surviving intersections and their trial frequencies.

    The frequencies estimate the combined mass function entry by entry;
    ties break toward the smaller bitmask for a stable report.
    """
    require_valid(problem)
    cums, masks = _source_tables(problem)
    full = problem.frame.full_bits

    def job(share, rng):
        counts: Counter = Counter()
        _kernel_batch(cums, masks, full, (), share, rng, cfg.restart_cap, counts)
        return counts

    parts = _run_workers(cfg, job)
    merged: Counter = Counter()
    for c in parts:
        merged += c
    ranked = sorted(merged.items(), key=lambda kv: (-kv[1], kv[0]))[:max_report]
    return [
        (FocalSet(problem.frame, bits), count / cfg.trials) for bits, count in ranked
    ]
