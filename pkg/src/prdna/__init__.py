"""Run-length coded DNA synthesis schedules.

Capacity analysis of synthesis-schedule constraints, run-length quantizer
design with per-index error guarantees, an enumerative schedule codec with
an error-correcting redundancy pipeline, and a multi-copy channel
simulator.
"""

from prdna.codec import (
    BudgetTooSmall,
    InvalidSchedule,
    RedundancyPlan,
    Schedule,
    ZeroDifference,
    append_redundancy,
    attach_redundancy,
    base_to_symbols,
    code_rate,
    decode_payload,
    encode_payload,
    extract_redundancy,
    make_schedule,
    max_payload_bits,
    plan_redundancy,
    rank_schedule,
    schedule_from_json,
    schedule_to_json,
    strip_and_correct,
    symbols_to_base,
    synthesis_time_bound,
    unrank_schedule,
)
from prdna.ecc import (
    EccCode,
    EccError,
    ReedSolomonCode,
    RepetitionCode,
    rs_for_parity_budget,
    rs_for_radius,
)
from prdna.graph import (
    Alphabet,
    CapacityResult,
    MarkovAnalysis,
    OrdinaryGraph,
    SynthesisGraph,
    build_graph,
    capacity,
    count_schedules,
    default_alphabet,
    graph_from_json,
    graph_to_json,
    iter_schedules,
    max_entropic_chain,
    ordinary_expand,
    rescale_to_integer,
    rounds_to_word,
    uniform_graph,
)
from prdna.quantizer import (
    Infeasible,
    QuantizeResult,
    QuantizerDesign,
    RunLengthModel,
    design_binomial,
    design_from_json,
    design_poisson,
    design_table,
    design_to_json,
    exact_error_probabilities,
    quantize,
)
from prdna.simulator import (
    ChannelTrace,
    PipelineSetup,
    RatePoint,
    SimulationReport,
    Unrecoverable,
    quantize_trace,
    random_schedule,
    rate_curve,
    rate_curve_csv,
    read_and_decode,
    simulate_schedules,
    synthesize,
    trace_to_json,
)

__all__ = [
    # graph
    "Alphabet", "CapacityResult", "MarkovAnalysis", "OrdinaryGraph",
    "SynthesisGraph", "build_graph", "capacity", "count_schedules",
    "default_alphabet", "graph_from_json", "graph_to_json", "iter_schedules",
    "max_entropic_chain", "ordinary_expand", "rescale_to_integer",
    "rounds_to_word", "uniform_graph",
    # quantizer
    "Infeasible", "QuantizeResult", "QuantizerDesign", "RunLengthModel",
    "design_binomial", "design_from_json", "design_poisson", "design_table",
    "design_to_json", "exact_error_probabilities", "quantize",
    # codec
    "BudgetTooSmall", "InvalidSchedule", "RedundancyPlan", "Schedule",
    "ZeroDifference", "append_redundancy", "attach_redundancy",
    "base_to_symbols", "code_rate", "decode_payload", "encode_payload",
    "extract_redundancy", "make_schedule", "max_payload_bits",
    "plan_redundancy", "rank_schedule", "schedule_from_json",
    "schedule_to_json", "strip_and_correct", "symbols_to_base",
    "synthesis_time_bound", "unrank_schedule",
    # ecc
    "EccCode", "EccError", "ReedSolomonCode", "RepetitionCode",
    "rs_for_parity_budget", "rs_for_radius",
    # simulator
    "ChannelTrace", "PipelineSetup", "RatePoint", "SimulationReport",
    "Unrecoverable", "quantize_trace", "random_schedule", "rate_curve",
    "rate_curve_csv", "read_and_decode", "simulate_schedules", "synthesize",
    "trace_to_json",
]

__version__ = "0.1.0"
