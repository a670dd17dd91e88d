"""Outage, ARQ allocation, and latency tools for decode-and-forward relay chains.

The package models an N-hop relay link over Rician fading with
chase-combining HARQ.  It provides:

- Marcum-Q evaluation by series with controlled truncation error
  (`marcum_q1`, `marcum_qm`) plus high-SNR approximations;
- per-hop outage for slow/fast fading and a no-combining baseline
  (`outage_sf`, `outage_ff`, `outage_type1`);
- end-to-end packet-drop probability for per-hop and shared ARQ budgets
  (`evaluate_pdp`, `pdp_noncumulative`, `pdp_fully_cumulative`, `pdp_type1`);
- budget allocators: exhaustive search, a relaxation-based candidate list
  for slow fading, factorial-tail matching for fast fading, and closed
  forms (`exhaustive_search`, `list_algorithm_sf`, `ftml_ff`,
  `fully_cumulative_optimal`, `uniform_allocation`), with local-minimum
  certification (`local_minima_check`, `local_minima_check_direct`);
- a vectorized packet-level Monte-Carlo simulator with NACK/rekeying
  delay accounting (`run_ensemble`, `delay_profile`);
- a config-driven CLI (`relaylink`, see `relaylink.cli`).
"""

from .errors import (
    ConvergenceError,
    DomainError,
    InfeasibleError,
    RelaylinkError,
    SearchSpaceError,
    ValidationError,
)
from .link import (
    Exactness,
    FadingMode,
    LinkDerived,
    NetworkConfig,
    derive,
    derive_all,
    outage_ff,
    outage_ff_approx_raw,
    outage_sf,
    outage_sf_approx_raw,
    outage_type1,
    sample_channel_gain,
    sample_channel_gains,
)
from .marcum import (
    DEFAULT_CONTROL,
    SeriesControl,
    marcum_q1,
    marcum_q1_approx,
    marcum_qm,
    marcum_qm_approx,
    marcum_qm_approx_log,
)
from .optimize import (
    CandidateList,
    LocalMinimaCertificate,
    Provenance,
    SearchSpace,
    compositions,
    exhaustive_search,
    ftml_ff,
    ftml_matching_value,
    ftml_matching_value_log,
    fully_cumulative_optimal,
    hamming2_neighbors,
    list_algorithm_sf,
    local_minima_check,
    local_minima_check_direct,
    relaxed_solution_sf,
    relaxed_solution_sf_matrix,
    relaxed_split,
    relaxed_split_matrix,
    uniform_allocation,
)
from .pdp import (
    ArqAllocation,
    PdpQuery,
    Strategy,
    evaluate_pdp,
    pdp_fully_cumulative,
    pdp_noncumulative,
    pdp_type1,
)
from .simulate import (
    BLOCK_SIZE,
    DelayParams,
    DelayProfile,
    EnsembleMetrics,
    PacketOutcome,
    PacketStatus,
    delay_profile,
    derive_qsum,
    run_ensemble,
    simulate_packet,
)

__version__ = "0.1.0"

__all__ = [
    "ArqAllocation",
    "BLOCK_SIZE",
    "CandidateList",
    "ConvergenceError",
    "DEFAULT_CONTROL",
    "DelayParams",
    "DelayProfile",
    "DomainError",
    "EnsembleMetrics",
    "Exactness",
    "FadingMode",
    "InfeasibleError",
    "LinkDerived",
    "LocalMinimaCertificate",
    "NetworkConfig",
    "PacketOutcome",
    "PacketStatus",
    "PdpQuery",
    "Provenance",
    "RelaylinkError",
    "SearchSpace",
    "SearchSpaceError",
    "SeriesControl",
    "Strategy",
    "ValidationError",
    "__version__",
    "compositions",
    "delay_profile",
    "derive",
    "derive_all",
    "derive_qsum",
    "evaluate_pdp",
    "exhaustive_search",
    "ftml_ff",
    "ftml_matching_value",
    "ftml_matching_value_log",
    "fully_cumulative_optimal",
    "hamming2_neighbors",
    "list_algorithm_sf",
    "local_minima_check",
    "local_minima_check_direct",
    "marcum_q1",
    "marcum_q1_approx",
    "marcum_qm",
    "marcum_qm_approx",
    "marcum_qm_approx_log",
    "outage_ff",
    "outage_ff_approx_raw",
    "outage_sf",
    "outage_sf_approx_raw",
    "outage_type1",
    "pdp_fully_cumulative",
    "pdp_noncumulative",
    "pdp_type1",
    "relaxed_solution_sf",
    "relaxed_solution_sf_matrix",
    "relaxed_split",
    "relaxed_split_matrix",
    "run_ensemble",
    "sample_channel_gain",
    "sample_channel_gains",
    "simulate_packet",
    "uniform_allocation",
]
