"""K-repetition grant-free access: load estimation, prediction, allocation.

The library is organised in three tiers plus their shared plumbing:

* :mod:`gfra.traffic` and :mod:`gfra.gfsim` model arrivals and the
  slot-level access procedure;
* :mod:`gfra.estimation` learns the active-user count from per-slot RB
  states (tier 1);
* :mod:`gfra.prediction` forecasts the next cycle's load (tier 2);
* :mod:`gfra.allocation` turns predicted loads and QoS targets into RB
  splits (tier 3);
* :mod:`gfra.harness` wires the tiers into reproducible experiments, with
  the ``gfra`` CLI on top.
"""

from .allocation import (
    AllocationDecision,
    AllocationOutage,
    NegotiationResult,
    QosContract,
    allocate,
    fail_prob_adjacent,
    fail_prob_arbitrary,
    negotiate_delta,
    required_rbs,
)
from .estimation import (
    EstimateReport,
    MarkovModel,
    StepProbTable,
    TableBank,
    build_single_slot_model,
    build_whole_cycle_model,
    enumerate_start_vectors,
    estimate,
    isce,
    ml_slot_count,
    ms_mld,
    ms_mli,
    msem,
    ss_ml_ls,
    start_vector_pmf,
)
from .gfsim import (
    CycleObservation,
    CycleResult,
    DelayRecord,
    GfConfig,
    SlotObservation,
    UserOutcome,
    mc_failure_rate,
    simulate_cycle,
    simulate_retry_chain,
)
from .harness import (
    CcdfCurve,
    RunReport,
    ScenarioConfig,
    emit,
    load_scenario,
    run_estimation_bench,
    run_failprob_bench,
    run_prediction_bench,
    run_scenario,
)
from .prediction import (
    ArimaSpec,
    DiagnosticReport,
    Forecast,
    HistoryPool,
    aic,
    difference,
    dw,
    fit_arma,
    fit_ma,
    forecast_one,
    masw,
    select_model,
)
from .traffic import ArrivalTrace, BetaBurstSpec, UniformSpec, beta_arrivals, uniform_arrivals

__version__ = "0.1.0"
