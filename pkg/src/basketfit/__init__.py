"""Cluster-then-shrink Bayesian analysis of basket-trial response rates."""

from .bhm import BhmDraws, BhmState, CohortEstimate, bhm_log_posterior, run_bhm, summarize
from .consistency import ProbePoint, probe_consistency
from .data import (
    BhmConfig,
    CohortData,
    ExnexConfig,
    MfmConfig,
    TrialDataset,
    validate,
)
from .exnex import ExnexDraws, ExnexState, run_exnex, summarize_exnex
from .mfm import (
    ClusterParams,
    Partition,
    PartitionDraws,
    VTable,
    all_partitions,
    canonical_labels,
    compute_v_table,
    log_marginal,
    run_mfm,
    update_assignments,
    update_cluster_params,
)
from .pipeline import PtPolicy, TwoStepResult, run_two_step
from .reporting import (
    DatasetError,
    RunReport,
    estimates_csv,
    load_vemurafenib,
    parse_dataset,
)
from .rng import RngStream
from .simulate import (
    Scenario,
    StudyConfigs,
    StudySummary,
    aab,
    amse,
    exact_partition_posterior,
    generate_replicate,
    partition_tv_distance,
    run_study,
)
from .summary import dahl_select, k_hat, mean_membership, membership

__version__ = "0.1.0"

__all__ = [
    "BhmConfig", "BhmDraws", "BhmState", "ClusterParams", "CohortData",
    "CohortEstimate", "DatasetError", "ExnexConfig", "ExnexDraws", "ExnexState",
    "MfmConfig", "Partition", "PartitionDraws", "ProbePoint", "PtPolicy",
    "RngStream", "RunReport", "Scenario", "StudyConfigs", "StudySummary",
    "TrialDataset", "TwoStepResult", "VTable", "aab", "all_partitions", "amse",
    "bhm_log_posterior", "canonical_labels", "compute_v_table", "dahl_select",
    "estimates_csv", "exact_partition_posterior", "generate_replicate", "k_hat",
    "load_vemurafenib", "log_marginal", "mean_membership", "membership",
    "parse_dataset", "partition_tv_distance", "probe_consistency", "run_bhm",
    "run_exnex", "run_mfm", "run_study", "run_two_step", "summarize",
    "summarize_exnex", "update_assignments", "update_cluster_params", "validate",
]
