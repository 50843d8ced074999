"""Independent reference implementations used to cross-check the package.

Everything here deliberately takes a different route than the library:
quadrature and noncentral-chi-square CDFs instead of the Poisson mixture,
a direct protocol recursion instead of the borrow-pattern closed form,
brute-force enumeration instead of pruned search, and geometric closed
forms instead of explicit sums.  Tests compare the two routes; neither
side is allowed to call the other.
"""

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import i0e
from scipy.stats import ncx2

RELATIVE_TIE = 1e-12  # must mirror the library's tie band


# ---------------------------------------------------------------------------
# channel references
# ---------------------------------------------------------------------------

def marcum_q1_quadrature(a: float, b: float) -> float:
    """Q_1(a, b) by direct integration of x * exp(-(x-a)^2/2) * i0e(a x)."""
    if b == 0.0:
        return 1.0

    def integrand(x):
        return x * i0e(a * x) * math.exp(-0.5 * (x - a) ** 2)

    val, _ = integrate.quad(integrand, b, np.inf, limit=400)
    return val


def marcum_q1_ncx2(a: float, b: float) -> float:
    """Q_1(a, b) as the survival function of a noncentral chi-square."""
    return float(ncx2.sf(b * b, df=2, nc=a * a))


def outage_ncx2(los: float, snr_db: float, rate: float) -> float:
    """Outage probability via the noncentral-chi-square gain CDF.

    The gain is the squared norm of a 2-vector with per-component mean
    sqrt(c/2) and variance (1-c)/2, so gain / ((1-c)/2) is noncentral
    chi-square with 2 degrees of freedom and noncentrality 2c/(1-c).
    """
    x = (2.0 ** rate - 1.0) / 10.0 ** (snr_db / 10.0)
    if los == 0.0:
        return 1.0 - math.exp(-x)
    scale = (1.0 - los) / 2.0
    return float(ncx2.cdf(x / scale, df=2, nc=2.0 * los / (1.0 - los)))


# ---------------------------------------------------------------------------
# exact protocol recursion
# ---------------------------------------------------------------------------

def pdp_exact_protocol(p, q, scheme: str = "semi_cumulative"):
    """Per-hop drop probabilities by walking the protocol state space.

    State is (hop index, incoming residual).  At each hop the first
    success lands on attempt a with probability p^(a-1) (1-p); spending
    beyond the node's own allowance zeroes the residual passed on.
    Returns a tuple of length len(p); its sum is the drop probability.
    """
    p = tuple(float(v) for v in p)
    q = tuple(int(v) for v in q)
    n = len(p)
    borrowing = scheme == "semi_cumulative"

    @lru_cache(maxsize=None)
    def rec(i, residual):
        if i == n:
            return ()
        budget = q[i] + (residual if borrowing else 0)
        if budget <= 0:
            return (1.0,) + (0.0,) * (n - i - 1)
        pi = p[i]
        per = [pi ** budget] + [0.0] * (n - i - 1)
        for a in range(1, budget + 1):
            reach = pi ** (a - 1) * (1.0 - pi)
            nxt = q[i] - a if a <= q[i] else 0
            for k, v in enumerate(rec(i + 1, max(nxt, 0))):
                per[k + 1] += reach * v
        return tuple(per)

    return rec(0, 0)


def pdp_exact_total(p, q, scheme: str = "semi_cumulative") -> float:
    return math.fsum(pdp_exact_protocol(p, q, scheme))


# ---------------------------------------------------------------------------
# combinatorial references
# ---------------------------------------------------------------------------

def patterns_bruteforce(n: int):
    """Borrow patterns by filtering all binary tuples: first bit 0, no two
    adjacent 1s, and the last two bits sum to exactly 1."""
    out = []
    for bits in itertools.product((0, 1), repeat=n):
        if bits[0] != 0:
            continue
        if any(bits[i] and bits[i + 1] for i in range(n - 1)):
            continue
        if bits[-2] + bits[-1] != 1:
            continue
        out.append(bits)
    return sorted(out)


def feasible_oracle(q, q_sum=None) -> bool:
    q = tuple(q)
    if not q or q[0] < 1 or min(q) < 0:
        return False
    if any(x <= 1 and y == 0 for x, y in zip(q, q[1:])):
        return False
    return q_sum is None or sum(q) == q_sum


def allocations_bruteforce(n: int, q_sum: int):
    """Feasible splits by filtering all weak compositions of q_sum."""
    out = []
    for cuts in itertools.combinations(range(q_sum + n - 1), n - 1):
        parts = []
        prev = -1
        for c in cuts:
            parts.append(c - prev - 1)
            prev = c
        parts.append(q_sum + n - 2 - prev)
        if feasible_oracle(parts, q_sum):
            out.append(tuple(parts))
    return sorted(out)


def best_tail_bruteforce(p, prefix, tail_sum):
    """Exact argmin over the last two allowances, protocol recursion as
    the objective, library tie rule (relative band, lexicographic)."""
    best, best_v = None, math.inf
    for a in range(tail_sum + 1):
        q = tuple(prefix) + (a, tail_sum - a)
        if not feasible_oracle(q):
            continue
        v = pdp_exact_total(p, q)
        if best is None or v < best_v * (1.0 - RELATIVE_TIE):
            best, best_v = (a, tail_sum - a), v
    return best, best_v


# ---------------------------------------------------------------------------
# closed-form three-hop drop probability, continuous in the allowances
# ---------------------------------------------------------------------------

def _beta_n_closed(p, q):
    return (1.0 - p ** q) / (1.0 - p)


def _beta_e_closed(pa, pb, qa):
    if abs(pa - pb) < 1e-9 * pa:
        return qa * pa ** (qa - 1.0)
    return (pa ** qa - pb ** qa) / (pa - pb)


def _beta_i_closed(pa, pb, qa, qb):
    return pb ** qb * (_beta_n_closed(pa, qa) - _beta_e_closed(pa, pb, qa)) / (1.0 - pb)


def sc_pdp_3hop_closed(p, q):
    """Three-hop drop probability from geometric closed forms.

    Accepts real-valued allowances, which makes it usable as a continuous
    relaxation: at integer points it must agree with the discrete result,
    and its restriction to a budget line locates the fold transfer point.
    """
    p1, p2, p3 = p
    q1, q2, q3 = (float(v) for v in q)
    h1 = p1 ** q1
    h2 = (1.0 - p1) * p2 ** q2 * _beta_e_closed(p1, p2, q1)
    f3 = (_beta_n_closed(p1, q1) * _beta_e_closed(p2, p3, q2)
          + _beta_i_closed(p1, p2, q1, q2))
    h3 = (1.0 - p1) * (1.0 - p2) * p3 ** q3 * f3
    return h1 + h2 + h3
