"""Drop-probability analysis and ARQ budget planning for multi-hop
decode-and-forward chains where a relay may spend its predecessor's
leftover retransmission attempts.
"""

from .channel import (
    LinkParams,
    OutageVector,
    marcum_q1,
    outage_probability,
    outage_vector,
)
from .pdp import (
    ArqAllocation,
    PdpBreakdown,
    beta_external,
    beta_internal,
    beta_no_borrow,
    enumerate_state_sequences,
    fb_count,
    hop_factor,
    pdp_non_cooperative,
    pdp_semi_cumulative,
)
from .simulate import (
    CHANNEL_MODES,
    SCHEMES,
    SimConfig,
    SimResult,
    TrialDetail,
    counter_uniforms,
    estimate_pdp,
    simulate_trial,
)
from .optimize import (
    CandidateList,
    FoldContext,
    SearchResult,
    TailSplit,
    best_of_list,
    enumerate_allocations,
    exhaustive_search,
    fold_ratio_spread,
    fold_ratios,
    greedy_multifold,
    is_feasible,
    multifold_list,
    onefold_search,
    search,
    tail_split,
)
from .cli import ExperimentConfig, LatencyBudget, budget

__all__ = [
    "LinkParams",
    "OutageVector",
    "marcum_q1",
    "outage_probability",
    "outage_vector",
    "ArqAllocation",
    "PdpBreakdown",
    "beta_external",
    "beta_internal",
    "beta_no_borrow",
    "enumerate_state_sequences",
    "fb_count",
    "hop_factor",
    "pdp_non_cooperative",
    "pdp_semi_cumulative",
    "CHANNEL_MODES",
    "SCHEMES",
    "SimConfig",
    "SimResult",
    "TrialDetail",
    "counter_uniforms",
    "estimate_pdp",
    "simulate_trial",
    "CandidateList",
    "FoldContext",
    "SearchResult",
    "TailSplit",
    "best_of_list",
    "enumerate_allocations",
    "exhaustive_search",
    "fold_ratio_spread",
    "fold_ratios",
    "greedy_multifold",
    "is_feasible",
    "multifold_list",
    "onefold_search",
    "search",
    "tail_split",
    "ExperimentConfig",
    "LatencyBudget",
    "budget",
]
