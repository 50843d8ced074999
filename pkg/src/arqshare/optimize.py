"""Search for the ARQ split minimizing the drop probability of a chain
under a fixed total budget.

Feasible splits satisfy q_1 >= 1, q_i >= 0, sum q_i = q_sum, and
q_{i+1} != 0 whenever q_i is 0 or 1 (a node with at most one own attempt
leaves no residual, so its successor would be starved).

Methods, from exact to cheapest:

exhaustive  - walk the full feasible space.
onefold     - brute-force the first N-2 allowances; the closed-form fold
              rule pins the last two from a pair of tail-independent
              ratios.
multifold   - apply the fold rule repeatedly: seed one (odd N) or two
              (even N) leading allowances, then extend two hops per
              stage, sweeping the running partial budget.
greedy      - multifold, but keep per partial budget only the best
              extension and its rounded-up variant.

All argmin steps treat drop probabilities within a relative 1e-12 band
as ties and keep the lexicographically smallest split; mathematically
tied splits (for example trailing (a, 1) versus (a+1, 0) behind a
residual-free node) differ only by rounding noise, and the band makes
tie resolution independent of that noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channel import OutageVector
from .pdp import ArqAllocation, hop_factor, pdp_semi_cumulative

# Relative width of the PDP band treated as a tie by every argmin here.
RELATIVE_TIE = 1e-12

# Placeholder (q_{N-1}, q_N) pairs used to certify that the second fold
# ratio does not depend on the tail, and the allowed relative spread.
_PLACEHOLDER_TAILS = ((2, 2), (5, 3))
_SPREAD_LIMIT = 1e-6


def _sc_total(p, q) -> float:
    return pdp_semi_cumulative(p, q).total


def _improves(value: float, best: float) -> bool:
    return value < best * (1.0 - RELATIVE_TIE)


@dataclass(frozen=True)
class FoldContext:
    """Inputs shared by every search method."""

    p: OutageVector
    q_sum: int
    evaluator: object = None  # callable(p, q) -> float; default semi-cumulative

    def __post_init__(self):
        if self.q_sum < 1:
            raise ValueError(f"q_sum must be >= 1, got {self.q_sum}")
        if self.evaluator is None:
            object.__setattr__(self, "evaluator", _sc_total)

    @property
    def hops(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class SearchResult:
    allocation: ArqAllocation
    pdp: float
    candidates: int  # size of the candidate set the argmin ran over


@dataclass
class CandidateList:
    """Partial or full allocations produced by the folding stages."""

    stage: int                       # number of leading hops each entry covers
    entries: tuple = ()
    pdp_cache: dict = field(default_factory=dict)

    def partial_sums(self):
        return tuple(sum(e) for e in self.entries)

    def __len__(self):
        return len(self.entries)


# ---------------------------------------------------------------------------
# feasibility and enumeration
# ---------------------------------------------------------------------------

def is_feasible(q, q_sum: int = None) -> bool:
    """Whether an ARQ vector is a legal split (of q_sum, when given)."""
    q = tuple(q)
    if len(q) < 1 or q[0] < 1 or any(v < 0 for v in q):
        return False
    if any(q[i] <= 1 and q[i + 1] == 0 for i in range(len(q) - 1)):
        return False
    return q_sum is None or sum(q) == q_sum


def _prefix_feasible(q) -> bool:
    """Feasibility restricted to the known leading positions."""
    return is_feasible(q, q_sum=None)


def _min_completion(slots: int, prev: int) -> int:
    """Least budget a feasible continuation of `slots` hops can consume."""
    if slots <= 0:
        return 0
    # After a 0 or 1 every later hop needs at least one attempt; after a
    # larger allowance exactly one zero is free.
    return slots if prev <= 1 else slots - 1


def _iter_alloc_tuples(n: int, q_sum: int):
    """Feasible splits of q_sum over n hops, lexicographically ascending."""
    def rec(prefix, remaining):
        pos = len(prefix)
        if pos == n:
            if remaining == 0:
                yield tuple(prefix)
            return
        prev = prefix[-1] if prefix else None
        lo = 1 if pos == 0 else 0
        for v in range(lo, remaining + 1):
            if prev is not None and prev <= 1 and v == 0:
                continue
            if remaining - v >= _min_completion(n - pos - 1, v):
                prefix.append(v)
                yield from rec(prefix, remaining - v)
                prefix.pop()
    yield from rec([], q_sum)


def enumerate_allocations(n: int, q_sum: int):
    """Stream every feasible split in lexicographic order."""
    if n < 1:
        raise ValueError(f"need at least one hop, got n={n}")
    if q_sum < 1:
        raise ValueError(f"q_sum must be >= 1, got {q_sum}")
    for q in _iter_alloc_tuples(n, q_sum):
        yield ArqAllocation(q=q, q_sum=q_sum)


def _argmin(ctx, candidates):
    """Lexicographic-tie argmin over candidate tuples (must be presorted)."""
    best_q, best_v, count = None, math.inf, 0
    for q in candidates:
        count += 1
        v = ctx.evaluator(ctx.p, q)
        if best_q is None or _improves(v, best_v):
            best_q, best_v = q, v
    if best_q is None:
        raise ValueError(f"no feasible split of {ctx.q_sum} over {ctx.hops} hops")
    return SearchResult(allocation=ArqAllocation(q=best_q), pdp=best_v, candidates=count)


def exhaustive_search(ctx: FoldContext) -> SearchResult:
    """Exact argmin over the full feasible space."""
    return _argmin(ctx, _iter_alloc_tuples(ctx.hops, ctx.q_sum))


# ---------------------------------------------------------------------------
# the two-hop fold
# ---------------------------------------------------------------------------

def _leading_product(p, q_prefix) -> float:
    prod = 1.0
    for pi, qi in zip(p, q_prefix):
        prod *= pi ** qi
    return prod


def _tail_ratio(p, q_prefix, a: int, b: int) -> float:
    """Second fold ratio evaluated at one placeholder tail (a, b)."""
    n = len(p)
    q_full = tuple(q_prefix) + (a, b)
    q_up = tuple(q_prefix) + (a + 1, b - 1)
    f = hop_factor(p, q_full, n)
    f_up = hop_factor(p, q_up, n)
    denom = _leading_product(p, q_prefix) * p[n - 2] ** a
    return (f_up / p[n - 1] - f) / denom


def fold_ratios(p, q_prefix) -> tuple:
    """The two scalars (r1, r2) that locate the optimal two-hop tail.

    r1 is the hop factor of the length-(N-1) chain divided by the leading
    outage powers; r2 is the normalized increment of the length-N factor
    under shifting one attempt from the last hop to the one before.  r2
    is a function of the prefix only: it is evaluated at two placeholder
    tails and the two values must agree to within a relative 1e-6, else
    the instance is numerically degenerate and a ValueError is raised.
    """
    n = len(p)
    if n < 2:
        raise ValueError(f"folding needs at least 2 hops, got {n}")
    if len(q_prefix) != n - 2:
        raise ValueError(f"expected a prefix of {n - 2} allowances, got {len(q_prefix)}")
    (a0, b0), (a1, b1) = _PLACEHOLDER_TAILS
    r2 = _tail_ratio(p, q_prefix, a0, b0)
    r2_alt = _tail_ratio(p, q_prefix, a1, b1)
    spread = abs(r2 - r2_alt) / max(abs(r2), 1e-300)
    if not (spread <= _SPREAD_LIMIT):
        raise ValueError(
            f"tail ratio is not tail-independent (spread {spread:.3e}); "
            "the fold is numerically degenerate here")
    if n == 2:
        r1 = 1.0
    else:
        r1 = hop_factor(p, tuple(q_prefix) + (0, 0), n - 1) / _leading_product(p, q_prefix)
    if not (math.isfinite(r1) and math.isfinite(r2) and r1 > 0.0 and r2 > 0.0):
        raise ValueError(f"degenerate fold ratios r1={r1}, r2={r2}")
    return r1, r2


def fold_ratio_spread(p, q_prefix) -> float:
    """Relative disagreement of r2 across the two placeholder tails."""
    (a0, b0), (a1, b1) = _PLACEHOLDER_TAILS
    r2 = _tail_ratio(p, q_prefix, a0, b0)
    r2_alt = _tail_ratio(p, q_prefix, a1, b1)
    return abs(r2 - r2_alt) / max(abs(r2), 1e-300)


@dataclass(frozen=True)
class TailSplit:
    q_penultimate: int
    q_last: int
    clamped: bool  # True when the closed-form value had to be projected


def _fold_last(r1: float, r2: float, p_last: float) -> int:
    return math.floor(math.log(r1 / r2) / math.log(p_last))


def tail_split(p, q_prefix, tail_sum: int) -> TailSplit:
    """Optimal split of tail_sum over the last two hops, given the prefix.

    The closed-form rule is floor(log(r1/r2) / log p_N); the result is
    projected onto the feasible interval (q_last >= 1; the penultimate
    hop needs at least one attempt when the preceding allowance is 0, 1
    or absent) and flagged clamped when projection moved it.
    """
    n = len(p)
    r1, r2 = fold_ratios(p, q_prefix)
    lo_pen = 1 if (len(q_prefix) == 0 or q_prefix[-1] <= 1) else 0
    hi_last = tail_sum - lo_pen
    if hi_last < 1:
        raise ValueError(
            f"tail budget {tail_sum} cannot cover the last two hops behind "
            f"prefix {tuple(q_prefix)}")
    raw = _fold_last(r1, r2, p[n - 1])
    q_last = min(max(raw, 1), hi_last)
    return TailSplit(q_penultimate=tail_sum - q_last, q_last=q_last,
                     clamped=q_last != raw)


# ---------------------------------------------------------------------------
# one-fold search
# ---------------------------------------------------------------------------

def _iter_prefixes(length: int, budget: int):
    """Feasible leading segments (q_1 .. q_length) with sum <= budget."""
    def rec(prefix, used):
        pos = len(prefix)
        if pos == length:
            yield tuple(prefix)
            return
        prev = prefix[-1] if prefix else None
        lo = 1 if pos == 0 else 0
        for v in range(lo, budget - used + 1):
            if prev is not None and prev <= 1 and v == 0:
                continue
            prefix.append(v)
            yield from rec(prefix, used + v)
            prefix.pop()
    yield from rec([], 0)


def onefold_search(ctx: FoldContext) -> SearchResult:
    """Brute-force the first N-2 allowances, fold rule for the last two.

    Exact on instances where the tail objective is unimodal, which holds
    throughout the low-outage regime.  Falls back to exhaustive_search
    for chains of one or two hops, where there is nothing to fold over.
    """
    if ctx.evaluator is not _sc_total:
        raise ValueError("folding applies to the semi-cumulative objective only")
    n = ctx.hops
    if n <= 2:
        return exhaustive_search(ctx)

    def candidates():
        for prefix in _iter_prefixes(n - 2, ctx.q_sum - 1):
            tail = ctx.q_sum - sum(prefix)
            try:
                split = tail_split(ctx.p, prefix, tail)
            except ValueError:
                continue
            q = prefix + (split.q_penultimate, split.q_last)
            if is_feasible(q, ctx.q_sum):
                yield q

    return _argmin(ctx, candidates())


# ---------------------------------------------------------------------------
# multi-fold candidate lists
# ---------------------------------------------------------------------------

def _max_folds(n: int) -> int:
    return max((n - (1 if n % 2 else 2)) // 2, 0)


def _seed_entries(n: int, q_sum: int, stage: int):
    if stage == 1:
        return [(v,) for v in range(1, q_sum - n + 3)]
    hi = q_sum - (n - stage) + 1
    return [pre for pre in _iter_prefixes(stage, hi) if sum(pre) >= stage]


def _sweep_range(n: int, q_sum: int, j: int):
    return range(j, q_sum - (n - j) + 2)


def _stage_children(ctx, j: int, parents):
    """Extend each parent by two hops: the fold rule pins hop j, the
    partial-budget sweep pins hop j-1."""
    p_sub = tuple(ctx.p)[:j]
    out = []
    for parent in parents:
        r1, r2 = fold_ratios(p_sub, parent)
        q_j = max(1, _fold_last(r1, r2, p_sub[j - 1]))
        have = sum(parent)
        for q_tilde in _sweep_range(ctx.hops, ctx.q_sum, j):
            q_jm1 = q_tilde - have - q_j
            if q_jm1 < 0:
                continue
            child = parent + (q_jm1, q_j)
            if _prefix_feasible(child):
                out.append(child)
    return out


def _final_filter(ctx, entries):
    return tuple(sorted(
        e for e in entries if is_feasible(e) and sum(e) <= ctx.q_sum))


def _resolve_folds(n: int, folds) -> int:
    limit = _max_folds(n)
    if folds is None:
        return limit
    if not (1 <= folds <= limit):
        raise ValueError(f"folds must lie in [1, {limit}] for {n} hops, got {folds}")
    return folds


def multifold_list(ctx: FoldContext, folds: int = None) -> CandidateList:
    """Candidate splits from repeated folding.

    Seeds the first n - 2*folds allowances exhaustively, then runs one
    fold stage per remaining hop pair, sweeping the partial budget from
    j up to q_sum - (N - j) + 1 at stage j.  The final list keeps the
    feasible entries with total at most q_sum; entries may undershoot
    the budget.  For chains of one or two hops the full feasible space
    is returned.
    """
    if ctx.evaluator is not _sc_total:
        raise ValueError("folding applies to the semi-cumulative objective only")
    n = ctx.hops
    if n <= 2:
        return CandidateList(stage=n, entries=tuple(_iter_alloc_tuples(n, ctx.q_sum)))
    folds = _resolve_folds(n, folds)
    stage = n - 2 * folds
    entries = _seed_entries(n, ctx.q_sum, stage)
    for j in range(stage + 2, n + 1, 2):
        entries = _stage_children(ctx, j, entries)
    return CandidateList(stage=n, entries=_final_filter(ctx, entries))


def greedy_multifold(ctx: FoldContext, folds: int = None) -> CandidateList:
    """Multifold pruned to two survivors per partial budget and stage.

    At each stage the candidates sharing a partial budget are reduced to
    the one with the lowest drop probability over the leading j hops,
    plus the variant that rounds the fold rule up instead of down (one
    more attempt at hop j, one fewer at hop j-1), when that variant is
    legal.  The final list keeps at most two entries per total.
    """
    if ctx.evaluator is not _sc_total:
        raise ValueError("folding applies to the semi-cumulative objective only")
    n = ctx.hops
    if n <= 2:
        return CandidateList(stage=n, entries=tuple(_iter_alloc_tuples(n, ctx.q_sum)))
    folds = _resolve_folds(n, folds)
    stage = n - 2 * folds
    entries = _seed_entries(n, ctx.q_sum, stage)
    cache = {}
    for j in range(stage + 2, n + 1, 2):
        p_sub = tuple(ctx.p)[:j]
        buckets = {}
        for child in _stage_children(ctx, j, entries):
            buckets.setdefault(sum(child), []).append(child)
        survivors = []
        for q_tilde in sorted(buckets):
            best_q, best_v = None, math.inf
            for cand in sorted(buckets[q_tilde]):
                v = _sc_total(p_sub, cand)
                cache[cand] = v
                if best_q is None or _improves(v, best_v):
                    best_q, best_v = cand, v
            survivors.append(best_q)
            ceil_variant = best_q[:-2] + (best_q[-2] - 1, best_q[-1] + 1)
            if ceil_variant[-2] >= 0 and _prefix_feasible(ceil_variant) \
                    and ceil_variant != best_q:
                survivors.append(ceil_variant)
        entries = sorted(set(survivors))
    final = _final_filter(ctx, entries)
    return CandidateList(stage=n, entries=final,
                         pdp_cache={q: cache[q] for q in final if q in cache})


def best_of_list(ctx: FoldContext, candidates: CandidateList) -> SearchResult:
    """Argmin over a candidate list (lexicographic on ties)."""
    return _argmin(ctx, candidates.entries)


def search(ctx: FoldContext, method: str, folds: int = None) -> SearchResult:
    """Dispatch by method name; list methods report the list size."""
    if method == "exhaustive":
        return exhaustive_search(ctx)
    if method == "onefold":
        return onefold_search(ctx)
    if method in ("multifold", "greedy"):
        build = multifold_list if method == "multifold" else greedy_multifold
        candidates = build(ctx, folds=folds)
        if not candidates.entries:
            raise ValueError(
                f"{method} produced no feasible candidates for q_sum={ctx.q_sum}")
        return best_of_list(ctx, candidates)
    raise ValueError(f"unknown method {method!r}")
