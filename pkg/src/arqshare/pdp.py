"""Exact packet-drop probability of an N-hop decode-and-forward chain
under a total per-packet ARQ budget.

Two retransmission disciplines are covered.

Non-cooperative: node i may transmit at most q_i times; the packet is
dropped at the first node that exhausts its own allowance.

Semi-cumulative borrowing: node i may additionally spend whatever its
predecessor left unused, so its attempt budget is q_i + r_{i-1} with
r_0 = 0 and r_i = max(0, q_i - used_i).  A node that dips into borrowed
attempts leaves nothing behind, so leftover attempts never travel more
than one hop and two consecutive nodes never both borrow.

The closed form for the borrowing scheme decomposes the drop event at
hop j over binary borrow patterns (node m borrowed iff bit m is 1) of
the first j nodes.  Legal patterns start with 0 and contain no two
adjacent 1s, so there are fb_count(j - 2) of them, a Fibonacci count.
Each pattern translates into a product of per-node attempt-timing
weights, the beta terms below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

# Per-hop drop terms below this are treated as numerically underflowed:
# reported as 0.0 and flagged on the breakdown.
UNDERFLOW_FLOOR = 1e-280


# ---------------------------------------------------------------------------
# allocations
# ---------------------------------------------------------------------------

def _allocation_problems(q, q_sum=None):
    """Return a list of constraint violations for an ARQ vector."""
    problems = []
    if len(q) < 1:
        problems.append("allocation must cover at least one hop")
        return problems
    if q[0] < 1:
        problems.append(f"first node needs at least one attempt, got q_1={q[0]}")
    for i, v in enumerate(q):
        if v < 0 or v != int(v):
            problems.append(f"q_{i + 1} must be a nonnegative integer, got {v}")
    for i in range(len(q) - 1):
        # A node with 0 or 1 own attempts never leaves a residual, so a
        # successor with q = 0 would have an empty budget and drop surely.
        if q[i] <= 1 and q[i + 1] == 0:
            problems.append(
                f"q_{i + 2}=0 is unreachable: q_{i + 1}={q[i]} leaves no residual")
    if q_sum is not None and sum(q) != q_sum:
        problems.append(f"allocation sums to {sum(q)}, expected {q_sum}")
    return problems


@dataclass(frozen=True)
class ArqAllocation:
    """A feasible per-node ARQ split q_1..q_N of a total budget."""

    q: tuple[int, ...]
    q_sum: int = None  # defaults to sum(q)

    def __post_init__(self):
        problems = _allocation_problems(self.q, self.q_sum)
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "q", tuple(int(v) for v in self.q))
        if self.q_sum is None:
            object.__setattr__(self, "q_sum", sum(self.q))

    def __len__(self) -> int:
        return len(self.q)

    def __getitem__(self, i):
        return self.q[i]

    def __iter__(self):
        return iter(self.q)


@dataclass(frozen=True)
class PdpBreakdown:
    """Drop probability split by the hop at which the packet dies."""

    per_hop: tuple[float, ...]
    total: float
    underflow_flag: bool  # True when some per-hop term fell below UNDERFLOW_FLOOR


# ---------------------------------------------------------------------------
# borrow-pattern enumeration
# ---------------------------------------------------------------------------

def fb_count(n: int) -> int:
    """Number of binary strings of length n with no two adjacent 1s.

    fb_count(0) = 1, fb_count(1) = 2, and the Fibonacci recurrence
    fb_count(n) = fb_count(n-1) + fb_count(n-2) afterwards.
    """
    if n < 0:
        raise ValueError(f"fb_count needs n >= 0, got {n}")
    a, b = 1, 2
    if n == 0:
        return a
    for _ in range(n - 1):
        a, b = b, a + b
    return b


def _no_adjacent_ones(n):
    """All length-n binary tuples without adjacent 1s, lexicographic."""
    if n == 0:
        return [()]
    seqs = [(0,), (1,)]
    for _ in range(n - 1):
        seqs = [s + (v,) for s in seqs for v in (0, 1) if not (s[-1] and v)]
    return sorted(seqs)


@lru_cache(maxsize=None)
def enumerate_state_sequences(n: int) -> tuple:
    """Legal borrow patterns for an n-hop chain, lexicographically sorted.

    Each pattern b_1..b_n marks which nodes spent borrowed attempts.
    The first node has nobody to borrow from (b_1 = 0), consecutive
    borrows are impossible, and the terminal bit is pinned by the core:
    a core ending in 1 forces a trailing 0 and vice versa.  There are
    exactly fb_count(n - 2) patterns.
    """
    if n < 2:
        raise ValueError(f"borrow patterns need at least 2 hops, got n={n}")
    out = []
    for core in _no_adjacent_ones(n - 2):
        tail = (0,) if (core and core[-1] == 1) else (1,)
        out.append((0,) + core + tail)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# beta terms: per-node attempt-timing weights
# ---------------------------------------------------------------------------

def beta_no_borrow(p: float, q: int) -> float:
    """Weight of a node that succeeds within its own q attempts and whose
    leftover is never used: sum_{i=1..q} p^(q-i).  Empty sum = 0."""
    return math.fsum(p ** (q - i) for i in range(1, q + 1))


def beta_external(p_a: float, p_b: float, q_a: int) -> float:
    """Weight of the terminal borrow pair: node a succeeds at attempt i of
    its q_a, node b then burns the leftover plus its own allowance and
    still fails everywhere it matters: sum_{i=1..q_a} p_a^(q_a-i) p_b^(i-1)."""
    return math.fsum(p_a ** (q_a - i) * p_b ** (i - 1) for i in range(1, q_a + 1))


def beta_internal(p_a: float, p_b: float, q_a: int, q_b: int) -> float:
    """Weight of an interior borrow pair: node a succeeds at attempt i,
    node b fails its own q_b plus the i-1 inherited attempts before
    succeeding later: sum_{i=1..q_a} p_a^(q_a-i) sum_{k=0..i-2} p_b^(q_b+k).

    Both sums are empty-sum-zero; in particular i = 1 contributes nothing
    (an immediately successful predecessor leaves the full residual, and
    the inner sum starts only once something was actually inherited).
    """
    total = 0.0
    inner = 0.0
    for i in range(1, q_a + 1):
        if i >= 2:
            inner += p_b ** (q_b + i - 2)
        total += p_a ** (q_a - i) * inner
    return total


# ---------------------------------------------------------------------------
# hop factors and the full drop probability
# ---------------------------------------------------------------------------

# Factor kinds in a compiled pattern recipe.
_NO_BORROW, _INTERNAL, _EXTERNAL = 0, 1, 2


@lru_cache(maxsize=None)
def _pattern_recipes(j: int) -> tuple:
    """Compile the borrow patterns of length j into factor recipes.

    Every 1 at position k+1 pairs with the 0 at position k (patterns are
    adjacent-one free and start with 0, so the pairing is unique).  A pair
    ending at the last position is the terminal borrow (external beta),
    any other pair is an interior borrow (internal beta), a leftover 0
    before the last position contributes a no-borrow beta, and a leftover
    0 at the last position contributes a factor of one.
    """
    recipes = []
    for pattern in enumerate_state_sequences(j):
        factors = []
        consumed = set()
        for k in range(j - 1):
            if pattern[k + 1] == 1:
                consumed.update((k, k + 1))
                if k + 1 == j - 1:
                    factors.append((_EXTERNAL, k))
                else:
                    factors.append((_INTERNAL, k))
        for m in range(j - 1):
            if m not in consumed and pattern[m] == 0:
                factors.append((_NO_BORROW, m))
        counts = [0, 0, 0]
        for kind, _ in factors:
            counts[kind] += 1
        # Structural bounds on how often each weight may appear per term.
        assert counts[_EXTERNAL] <= 1
        assert counts[_NO_BORROW] <= j - 2
        assert counts[_INTERNAL] <= (j + 1) // 2
        recipes.append(tuple(sorted(factors)))
    assert len(recipes) == fb_count(j - 2)
    return tuple(recipes)


def _factor_tables(p, q, n):
    """Beta values shared by all hop factors of a chain of length n."""
    bn = [beta_no_borrow(p[m], q[m]) for m in range(n - 1)]
    bi = [beta_internal(p[m], p[m + 1], q[m], q[m + 1]) for m in range(n - 2)]
    be = [beta_external(p[j - 2], p[j - 1], q[j - 2]) for j in range(2, n + 1)]
    return bn, bi, be


def _hop_factor(bn, bi, be_j, j):
    total = 0.0
    for recipe in _pattern_recipes(j):
        term = 1.0
        for kind, m in recipe:
            if kind == _NO_BORROW:
                term *= bn[m]
            elif kind == _INTERNAL:
                term *= bi[m]
            else:
                term *= be_j
        total += term
    return total


def hop_factor(p, q, j: int) -> float:
    """Multiplicative correction F_j for the drop term at hop j >= 2.

    Sums, over every legal borrow pattern of the first j nodes, the
    product of beta weights given by the pattern.  Consumes outage
    probabilities p_1..p_j and allowances q_1..q_{j-1}; the drop term at
    hop j is then prod_{i<j}(1 - p_i) * p_j^{q_j} * F_j.
    """
    if j < 2:
        raise ValueError(f"hop_factor is defined for j >= 2, got j={j}")
    if len(p) < j or len(q) < j - 1:
        raise ValueError(f"hop_factor needs {j} outage entries and {j - 1} allowances")
    bn = [beta_no_borrow(p[m], q[m]) for m in range(j - 1)]
    bi = [beta_internal(p[m], p[m + 1], q[m], q[m + 1]) for m in range(j - 2)]
    be_j = beta_external(p[j - 2], p[j - 1], q[j - 2])
    return _hop_factor(bn, bi, be_j, j)


def pdp_semi_cumulative(p, q) -> PdpBreakdown:
    """Exact drop probability under the borrowing discipline.

    The packet dies at hop 1 iff node 1 fails all q_1 attempts.  For
    j >= 2 the drop term is prod_{i<j}(1 - p_i) * p_j^{q_j} * F_j, and
    the total is the sum over hops.  Per-hop terms below UNDERFLOW_FLOOR
    are reported as 0.0 with the breakdown's underflow_flag set.
    """
    q = _as_allocation(q)
    n = len(q)
    if len(p) != n:
        raise ValueError(f"{len(p)} outage entries for {n} allowances")
    per_hop = [float(p[0]) ** q[0]]
    if n >= 2:
        bn, bi, be = _factor_tables(p, q, n)
        survive = 1.0
        for j in range(2, n + 1):
            survive *= 1.0 - p[j - 2]
            per_hop.append(survive * p[j - 1] ** q[j - 1] * _hop_factor(bn, bi, be[j - 2], j))
    underflow = False
    for i, v in enumerate(per_hop):
        if 0.0 < v < UNDERFLOW_FLOOR:
            per_hop[i] = 0.0
            underflow = True
        elif v == 0.0:
            underflow = True
    return PdpBreakdown(per_hop=tuple(per_hop), total=math.fsum(per_hop),
                        underflow_flag=underflow)


def pdp_non_cooperative(p, q) -> float:
    """Drop probability without borrowing: 1 - prod_i (1 - p_i^{q_i})."""
    q = _as_allocation(q)
    if len(p) != len(q):
        raise ValueError(f"{len(p)} outage entries for {len(q)} allowances")
    deliver = 1.0
    for pi, qi in zip(p, q):
        deliver *= 1.0 - pi ** qi
    return 1.0 - deliver


def _as_allocation(q):
    if isinstance(q, ArqAllocation):
        return q
    return ArqAllocation(q=tuple(q))
