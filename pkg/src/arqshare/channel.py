"""Per-hop outage probabilities for Rician/Rayleigh fading links.

A link is outage-limited: an attempt at rate R over a unit-power fading
channel with mean SNR alpha fails whenever R > log2(1 + |h|^2 * alpha),
i.e. whenever the channel gain |h|^2 falls below the threshold
x = (2^R - 1) / alpha.  With a line-of-sight power fraction c in [0, 1)
the gain is noncentral-chi-square distributed and the outage probability
has a closed form in the first-order Marcum Q function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln

# Outage probabilities are clamped into this open interval so that every
# downstream formula may take logs and divide without special cases.
P_FLOOR = 1e-300
P_CEIL = 1.0 - 1e-15

# Truncation threshold for the Poisson mixture series of marcum_q1: terms
# are added until the unaccounted Poisson tail mass drops below this.
_POISSON_TAIL = 1e-14


@dataclass(frozen=True)
class LinkParams:
    """Physical parameters of one decode-and-forward hop."""

    los: float      # line-of-sight power fraction c, in [0, 1); 0 = Rayleigh
    snr_db: float   # mean SNR of the hop in dB
    rate: float     # attempted spectral efficiency R in bits/s/Hz, > 0

    def __post_init__(self):
        if not (0.0 <= self.los < 1.0):
            raise ValueError(f"los must lie in [0, 1), got {self.los}")
        if not (self.rate > 0.0) or not math.isfinite(self.rate):
            raise ValueError(f"rate must be positive and finite, got {self.rate}")
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")

    @property
    def snr_linear(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def gain_threshold(self) -> float:
        """Channel gain below which an attempt fails: (2^R - 1) / alpha."""
        return (2.0 ** self.rate - 1.0) / self.snr_linear


@dataclass(frozen=True)
class OutageVector:
    """Per-hop attempt failure probabilities, each clamped into (0, 1)."""

    p: tuple[float, ...]

    def __post_init__(self):
        if len(self.p) < 1:
            raise ValueError("OutageVector needs at least one hop")
        for i, v in enumerate(self.p):
            if not (0.0 < v < 1.0) or not math.isfinite(v):
                raise ValueError(f"outage probability at hop {i + 1} out of (0, 1): {v}")

    def __len__(self) -> int:
        return len(self.p)

    def __getitem__(self, i):
        return self.p[i]

    def __iter__(self):
        return iter(self.p)


def marcum_q1(a: float, b: float) -> float:
    """First-order Marcum Q function Q_1(a, b).

    Evaluated as a Poisson mixture of regularized upper incomplete gamma
    terms: Q_1(a, b) = sum_k Pois(k; a^2/2) * Q(k + 1, b^2/2).  The series
    is truncated once the remaining Poisson tail mass is below 1e-14,
    which keeps the absolute error under 1e-12.  Exact endpoints:
    Q_1(a, 0) = 1 and Q_1(0, b) = exp(-b^2/2).
    """
    if not (a >= 0.0 and b >= 0.0) or not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError(f"marcum_q1 needs finite a, b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 1.0
    lam = 0.5 * a * a
    y = 0.5 * b * b
    if lam < 1e-300:
        return math.exp(-y)
    # Window the Poisson mass around its mean, then widen until the
    # missed tail is negligible.  Terms are bounded by the pmf, so the
    # truncation error is bounded by the missed mass.  The mass outside
    # the window is measured through the gamma identity P(K <= m) =
    # Q(m + 1, lam), not by summing the pmf: the summed pmf carries the
    # rounding noise of its exp arguments, which for large lam exceeds
    # the tail threshold and can never be widened away.
    half = 10.0 * math.sqrt(lam) + 30.0
    k_lo = max(0, int(lam - half))
    k_hi = int(lam + half)
    while True:
        missed = gammainc(float(k_hi + 1), lam)
        if k_lo >= 1:
            missed += gammaincc(float(k_lo), lam)
        if missed < _POISSON_TAIL:
            break
        k_lo = max(0, k_lo - 64)
        k_hi += 64
    ks = np.arange(k_lo, k_hi + 1, dtype=np.float64)
    pmf = np.exp(ks * math.log(lam) - lam - gammaln(ks + 1.0))
    # Renormalize to the exact window mass: the exp rounding error is
    # common-mode across terms and cancels in the ratio.
    val = float(np.sum(pmf * gammaincc(ks + 1.0, y))) * (1.0 - missed) / float(pmf.sum())
    return min(1.0, max(0.0, val))


def outage_probability(link: LinkParams) -> float:
    """Per-attempt failure probability of a single hop.

    P = 1 - Q_1( sqrt(2c / (1-c)), sqrt(2x / (1-c)) ) with threshold
    x = (2^R - 1) / alpha.  For c = 0 this reduces to the Rayleigh form
    1 - exp(-x).  The result is clamped into [P_FLOOR, P_CEIL].
    """
    c = link.los
    x = link.gain_threshold
    a = math.sqrt(2.0 * c / (1.0 - c))
    b = math.sqrt(2.0 * x / (1.0 - c))
    p = 1.0 - marcum_q1(a, b)
    return min(P_CEIL, max(P_FLOOR, p))


def outage_vector(links) -> OutageVector:
    """Evaluate outage_probability per hop, reporting the failing hop index."""
    probs = []
    for i, link in enumerate(links):
        try:
            probs.append(outage_probability(link))
        except ValueError as e:
            raise ValueError(f"hop {i + 1}: {e}") from e
    return OutageVector(p=tuple(probs))
