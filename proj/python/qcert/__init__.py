"""Randomness certification for time-bin weak-coherent-state QRNGs."""

from ._qcert import (
    CertificationResult,
    CondProbTable,
    DetectorParams,
    Error,
    __version__,
    certify,
    certify_overlap,
    coincidence,
    cond_prob_table,
    construct_lower_bound_code,
    enumerate_states,
    extract_bits,
    generation_rate,
    grid_lp_oracle,
    ideal_outcome_set,
    lower_bound_code_size,
    max_constant_s_group,
    pattern_distribution,
    pattern_prob_oracle,
    steady_state_click_prob,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
