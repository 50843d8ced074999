"""Monte Carlo oracle for the multi-hop retransmission disciplines.

Randomness is counter-based: every uniform draw is a pure function of
(seed, absolute draw index), and each trial owns a fixed window of draw
indices.  Trial outcomes therefore depend only on (seed, trial_index),
never on batch size, execution order, or thread count, and a vectorized
batch reproduces single-trial runs bit for bit.

Channel modes:

bernoulli  - each attempt at hop i fails independently with probability
             p_i; the attempt count to first success is drawn directly
             by geometric inversion from one uniform per hop.
fading     - each attempt samples a Rician channel gain and fails when
             the gain is below the hop threshold; needs LinkParams.
             The complex gain has mean sqrt(c/2)*(1+1j) and per-component
             variance (1-c)/2, which keeps unit average power and makes
             the per-attempt failure rate equal outage_probability.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .channel import LinkParams, OutageVector, outage_vector
from .pdp import ArqAllocation

SCHEMES = ("semi_cumulative", "non_cooperative")
CHANNEL_MODES = ("bernoulli", "fading")

_BATCH = 1 << 17  # trials per vectorized batch; any value gives identical results

# ---------------------------------------------------------------------------
# counter-based uniforms (splitmix64-style finalizer over a keyed counter)
# ---------------------------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed: int, indices) -> np.ndarray:
    """Uniforms in the open interval (0, 1), one per absolute draw index.

    Stateless: u[k] depends only on (seed, indices[k]).  All uint64
    arithmetic wraps mod 2^64 by design.
    """
    idx = np.asarray(indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN)
        z = _mix64((idx + np.uint64(1)) * _GOLDEN + key)
    # Top 53 bits, offset by half a lattice step: never exactly 0 or 1.
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


# ---------------------------------------------------------------------------
# configuration and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimConfig:
    q: ArqAllocation
    p: OutageVector = None                 # derived from links when omitted
    links: tuple[LinkParams, ...] = None   # required for the fading mode
    scheme: str = "semi_cumulative"
    trials: int = 100_000
    seed: int = 0
    channel_mode: str = "bernoulli"

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.channel_mode not in CHANNEL_MODES:
            raise ValueError(f"unknown channel_mode {self.channel_mode!r}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not isinstance(self.q, ArqAllocation):
            object.__setattr__(self, "q", ArqAllocation(q=tuple(self.q)))
        if self.links is not None:
            object.__setattr__(self, "links", tuple(self.links))
            if self.p is None:
                object.__setattr__(self, "p", outage_vector(self.links))
        if self.p is None:
            raise ValueError("need an OutageVector or LinkParams per hop")
        if not isinstance(self.p, OutageVector):
            object.__setattr__(self, "p", OutageVector(p=tuple(self.p)))
        if self.channel_mode == "fading" and self.links is None:
            raise ValueError("fading mode needs LinkParams, not bare outage probabilities")
        if len(self.p) != len(self.q):
            raise ValueError(f"{len(self.p)} hops vs {len(self.q)} allowances")
        if self.links is not None and len(self.links) != len(self.q):
            raise ValueError(f"{len(self.links)} links vs {len(self.q)} allowances")


@dataclass(frozen=True)
class SimResult:
    drops: int
    trials: int
    pdp_hat: float
    std_err: float                       # binomial sqrt(p(1-p)/trials)
    attempts_histogram: dict             # total attempts per trial -> frequency
    max_attempts_observed: int
    attempts_per_hop: tuple[int, ...]    # attempts actually transmitted at each hop
    failures_per_hop: tuple[int, ...]    # failed attempts at each hop


# ---------------------------------------------------------------------------
# draw layout
# ---------------------------------------------------------------------------

def _attempt_caps(q, scheme):
    """Upper bound on the attempts node i can make in any trial.

    Borrowing adds at most the predecessor's allowance minus the one
    attempt the predecessor must itself have spent.
    """
    caps = []
    for i, qi in enumerate(q):
        cap = qi
        if scheme == "semi_cumulative" and i > 0:
            cap += max(0, q[i - 1] - 1)
        caps.append(cap)
    return caps


def _layout(cfg):
    """(slots per trial, per-hop slot offsets) for one configuration."""
    n = len(cfg.q)
    if cfg.channel_mode == "bernoulli":
        return n, list(range(n))
    caps = _attempt_caps(cfg.q, cfg.scheme)
    offsets = []
    acc = 0
    for c in caps:
        offsets.append(acc)
        acc += 2 * c  # two uniforms per attempt: real and imaginary parts
    return acc, offsets


def _gain_params(link):
    mu = math.sqrt(link.los / 2.0)
    sigma = math.sqrt((1.0 - link.los) / 2.0)
    return mu, sigma, link.gain_threshold


# ---------------------------------------------------------------------------
# vectorized batch kernel
# ---------------------------------------------------------------------------

def _attempts_to_success(cfg, t_lo, t_hi, slots, offsets):
    """Attempt index of the first success per (trial, hop); budget+1 caps
    are encoded by values exceeding every possible budget."""
    n = len(cfg.q)
    count = t_hi - t_lo
    base = np.arange(t_lo, t_hi, dtype=np.uint64) * np.uint64(slots)
    g = np.empty((count, n), dtype=np.int64)
    if cfg.channel_mode == "bernoulli":
        u = counter_uniforms(cfg.seed, base[:, None] + np.arange(n, dtype=np.uint64))
        logp = np.log(np.asarray(cfg.p.p))
        g[:] = np.floor(np.log(u) / logp).astype(np.int64) + 1
        return g
    caps = _attempt_caps(cfg.q, cfg.scheme)
    for i in range(n):
        cap = caps[i]
        if cap == 0:
            g[:, i] = 1  # no draws; any positive value exceeds a zero budget
            continue
        mu, sigma, thr = _gain_params(cfg.links[i])
        idx = base[:, None] + np.uint64(offsets[i]) + np.arange(2 * cap, dtype=np.uint64)
        z = ndtri(counter_uniforms(cfg.seed, idx)).reshape(count, cap, 2)
        gain = np.square(mu + sigma * z).sum(axis=2)
        success = gain >= thr
        any_s = success.any(axis=1)
        first = success.argmax(axis=1)
        g[:, i] = np.where(any_s, first + 1, cap + 1)
    return g


def _run_batch(cfg, t_lo, t_hi, slots, offsets):
    n = len(cfg.q)
    q = np.asarray(cfg.q.q, dtype=np.int64)
    g = _attempts_to_success(cfg, t_lo, t_hi, slots, offsets)
    count = t_hi - t_lo
    alive = np.ones(count, dtype=bool)
    residual = np.zeros(count, dtype=np.int64)
    total_used = np.zeros(count, dtype=np.int64)
    attempts_hop = np.zeros(n, dtype=np.int64)
    failures_hop = np.zeros(n, dtype=np.int64)
    borrowing = cfg.scheme == "semi_cumulative"
    for i in range(n):
        budget = q[i] + residual if borrowing else np.full(count, q[i])
        gi = g[:, i]
        ok = alive & (gi <= budget)
        used = np.where(ok, gi, budget)
        total_used += np.where(alive, used, 0)
        attempts_hop[i] = int(used[alive].sum())
        failures_hop[i] = attempts_hop[i] - int(ok.sum())
        residual = np.where(ok, np.maximum(q[i] - used, 0), 0) if borrowing else residual
        alive = ok
    drops = int(count - alive.sum())
    hist = np.bincount(total_used)
    return drops, hist, int(total_used.max()), attempts_hop, failures_hop


def estimate_pdp(cfg: SimConfig, threads: int = 1) -> SimResult:
    """Run cfg.trials independent trials and estimate the drop probability.

    Deterministic for a fixed seed whatever the thread count: batches are
    pure functions of (seed, trial range) and the reduction is a plain sum.
    """
    slots, offsets = _layout(cfg)
    starts = list(range(0, cfg.trials, _BATCH))
    ranges = [(lo, min(lo + _BATCH, cfg.trials)) for lo in starts]
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda r: _run_batch(cfg, r[0], r[1], slots, offsets), ranges))
    else:
        parts = [_run_batch(cfg, lo, hi, slots, offsets) for lo, hi in ranges]
    n = len(cfg.q)
    drops = 0
    max_att = 0
    attempts_hop = np.zeros(n, dtype=np.int64)
    failures_hop = np.zeros(n, dtype=np.int64)
    hist_len = max(len(part[1]) for part in parts)
    hist = np.zeros(hist_len, dtype=np.int64)
    for d, h, m, ah, fh in parts:
        drops += d
        hist[: len(h)] += h
        max_att = max(max_att, m)
        attempts_hop += ah
        failures_hop += fh
    pdp_hat = drops / cfg.trials
    std_err = math.sqrt(pdp_hat * (1.0 - pdp_hat) / cfg.trials)
    histogram = {int(k): int(v) for k, v in enumerate(hist) if v > 0}
    return SimResult(drops=drops, trials=cfg.trials, pdp_hat=pdp_hat, std_err=std_err,
                     attempts_histogram=histogram, max_attempts_observed=max_att,
                     attempts_per_hop=tuple(int(v) for v in attempts_hop),
                     failures_per_hop=tuple(int(v) for v in failures_hop))


# ---------------------------------------------------------------------------
# single-trial reference path
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialDetail:
    dropped: bool
    total_attempts: int
    used: tuple[int, ...]      # attempts spent per hop (0 after the drop hop)
    borrowed: tuple[bool, ...]  # True where a node spent inherited attempts


def simulate_trial(p, q, scheme: str = "semi_cumulative", seed: int = 0,
                   trial_index: int = 0, channel_mode: str = "bernoulli",
                   links=None, detail: bool = False):
    """Outcome of a single trial keyed by (seed, trial_index).

    Returns (dropped, total_attempts), or a TrialDetail when detail=True.
    Bit-identical to the corresponding row of an estimate_pdp batch.
    """
    q = q if isinstance(q, ArqAllocation) else ArqAllocation(q=tuple(q))
    cfg = SimConfig(q=q, p=p, links=links, scheme=scheme, trials=trial_index + 1,
                    seed=seed, channel_mode=channel_mode)
    slots, offsets = _layout(cfg)
    n = len(q)
    g = _attempts_to_success(cfg, trial_index, trial_index + 1, slots, offsets)[0]
    residual = 0
    total = 0
    used_per_hop = [0] * n
    borrowed = [False] * n
    dropped = False
    for i in range(n):
        budget = q[i] + residual if scheme == "semi_cumulative" else q[i]
        if g[i] <= budget:
            used = int(g[i])
        else:
            used = budget
            dropped = True
        used_per_hop[i] = used
        borrowed[i] = used > q[i]
        total += used
        residual = max(0, q[i] - used) if scheme == "semi_cumulative" else 0
        if dropped:
            break
    if detail:
        return TrialDetail(dropped=dropped, total_attempts=total,
                           used=tuple(used_per_hop), borrowed=tuple(borrowed))
    return dropped, total
