"""Multi-copy synthesis channel: sampling, reading, and rate sweeps.

The channel keeps the round structure and run letters intact and distorts
only run lengths: every round of the schedule yields one independent
length per synthesized copy.  Rounds whose length comes out zero in a
copy are deletions; they are counted and surfaced, and a round deleted in
every copy quantizes to the first index with a low-confidence flag.
Alignment across copies is assumed, so letters stay readable unless
``strict_deletions`` asks the reader to give up on a fully deleted
letter-bearing round.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from prdna.codec import (
    RedundancyPlan,
    Schedule,
    attach_redundancy,
    decode_payload,
    encode_payload,
    make_schedule,
    max_payload_bits,
    plan_redundancy,
    strip_and_correct,
    time_bound_formula,
)
from prdna.ecc import EccCode, EccError, rs_for_radius
from prdna.graph import SynthesisGraph, capacity, max_entropic_chain, uniform_graph
from prdna.quantizer import (
    BINOMIAL,
    POISSON,
    Infeasible,
    QuantizerDesign,
    RunLengthModel,
    design_binomial,
    design_poisson,
)


class Unrecoverable(Exception):
    """The receiver cannot reconstruct the payload from this trace."""


# ---------------------------------------------------------------------------
# Channel sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChannelTrace:
    """Sampled run lengths for every copy of a synthesized schedule."""

    schedule: Schedule
    copies: np.ndarray  # shape (n_copies, n_rounds)
    rounds_with_deletion: tuple[int, ...]
    rounds_fully_deleted: tuple[int, ...]
    quantized: tuple[int, ...] | None = None

    @property
    def n_copies(self) -> int:
        return self.copies.shape[0]


def _stream(seed: int, trial: int | None = None) -> np.random.Generator:
    spawn = () if trial is None else (trial,)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=spawn)))


def synthesize(
    schedule: Schedule,
    model: RunLengthModel,
    seed: int,
    trial: int | None = None,
) -> ChannelTrace:
    """Draw run lengths for every (copy, round) from the model's family.

    Streams are counter-based and keyed by (seed, trial), so repeated
    calls reproduce traces exactly and trials can run in parallel.
    """
    rng = _stream(seed, trial)
    indices = np.array(schedule.indices(), dtype=np.int64)
    n_rounds = len(indices)
    lengths = np.zeros((model.copies, n_rounds), dtype=np.int64)
    for idx in np.unique(indices):
        cols = np.nonzero(indices == idx)[0]
        if model.family == BINOMIAL:
            t, p = model.copy_run_params(int(idx))
            draws = rng.binomial(t, p, size=(model.copies, cols.size))
        else:
            (lam,) = model.copy_run_params(int(idx))
            draws = rng.poisson(lam, size=(model.copies, cols.size))
        lengths[:, cols] = draws
    zero = lengths == 0
    with_deletion = np.nonzero(zero.any(axis=0))[0]
    fully_deleted = np.nonzero(zero.all(axis=0))[0]
    return ChannelTrace(
        schedule=schedule,
        copies=lengths,
        rounds_with_deletion=tuple(int(r) for r in with_deletion),
        rounds_fully_deleted=tuple(int(r) for r in fully_deleted),
    )


def quantize_trace(trace: ChannelTrace, design: QuantizerDesign) -> ChannelTrace:
    """Attach per-round decisions on the copy sums to the trace."""
    sums = trace.copies.sum(axis=0)
    inner = np.array(design.sum_thresholds[1:], dtype=np.int64)
    positions = np.searchsorted(inner, sums, side="left")
    decisions = np.minimum(positions + 1, design.ell)
    return replace(trace, quantized=tuple(int(d) for d in decisions))


def trace_to_json(trace: ChannelTrace) -> str:
    """Debug dump: schedule, per-copy lengths, deletions, decisions."""
    payload = {
        "start": trace.schedule.start,
        "rounds": [[a, i] for a, i in trace.schedule.rounds],
        "copies": trace.copies.tolist(),
        "rounds_with_deletion": list(trace.rounds_with_deletion),
        "rounds_fully_deleted": list(trace.rounds_fully_deleted),
        "quantized": None if trace.quantized is None else list(trace.quantized),
    }
    return json.dumps(payload, indent=2)


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

@dataclass
class SimulationReport:
    """Aggregated trial statistics; counts merge by exact addition."""

    ell: int
    trials: int = 0
    successes: int = 0
    unrecoverable: int = 0
    per_index_errors: list[int] = field(default_factory=list)
    per_index_rounds: list[int] = field(default_factory=list)
    rounds_with_deletion: int = 0
    rounds_fully_deleted: int = 0
    total_rounds: int = 0
    payload_bits: int = 0
    synthesis_time: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if not self.per_index_errors:
            self.per_index_errors = [0] * self.ell
        if not self.per_index_rounds:
            self.per_index_rounds = [0] * self.ell

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials if self.trials else math.nan

    @property
    def bits_per_time(self) -> float:
        return self.payload_bits / self.synthesis_time if self.synthesis_time else math.nan

    def error_rate(self, index: int) -> float:
        n = self.per_index_rounds[index - 1]
        return self.per_index_errors[index - 1] / n if n else math.nan

    def confidence_radius(self, index: int) -> float:
        n = self.per_index_rounds[index - 1]
        if not n:
            return math.nan
        rate = self.error_rate(index)
        return 3.0 * math.sqrt(rate * (1.0 - rate) / n)

    def merge(self, other: "SimulationReport") -> "SimulationReport":
        if other.ell != self.ell:
            raise ValueError("cannot merge reports with different index counts")
        self.trials += other.trials
        self.successes += other.successes
        self.unrecoverable += other.unrecoverable
        for i in range(self.ell):
            self.per_index_errors[i] += other.per_index_errors[i]
            self.per_index_rounds[i] += other.per_index_rounds[i]
        self.rounds_with_deletion += other.rounds_with_deletion
        self.rounds_fully_deleted += other.rounds_fully_deleted
        self.total_rounds += other.total_rounds
        self.payload_bits += other.payload_bits
        self.synthesis_time += other.synthesis_time
        return self

    def to_json(self) -> str:
        payload = {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.success_rate if self.trials else None,
            "unrecoverable": self.unrecoverable,
            "per_index_error_rates": [
                self.error_rate(i) if self.per_index_rounds[i - 1] else None
                for i in range(1, self.ell + 1)
            ],
            "per_index_confidence_radii": [
                self.confidence_radius(i) if self.per_index_rounds[i - 1] else None
                for i in range(1, self.ell + 1)
            ],
            "rounds_with_deletion": self.rounds_with_deletion,
            "rounds_fully_deleted": self.rounds_fully_deleted,
            "total_rounds": self.total_rounds,
            "bits_per_time": None if math.isnan(self.bits_per_time) else self.bits_per_time,
            "seed": self.seed,
        }
        return json.dumps(payload, indent=2)


def _tally_quantization(report: SimulationReport, design: QuantizerDesign, trace: ChannelTrace, n_payload: int):
    truth = trace.schedule.indices()[:n_payload]
    decided = trace.quantized[:n_payload]
    sums = trace.copies[:, :n_payload].sum(axis=0)
    taus = design.sum_thresholds
    for j, true_idx in enumerate(truth):
        report.per_index_rounds[true_idx - 1] += 1
        total = int(sums[j])
        wrong = total <= taus[true_idx - 1] or (
            true_idx < design.ell and total > taus[true_idx]
        )
        if wrong:
            report.per_index_errors[true_idx - 1] += 1


def read_and_decode(
    trace: ChannelTrace,
    design: QuantizerDesign,
    plan: RedundancyPlan,
    ecc: EccCode | None,
    graph: SynthesisGraph,
    total_duration: int | None,
    n_bits: int | None = None,
    strict_deletions: bool = False,
) -> tuple[str | None, list[int]]:
    """Quantize payload rounds, strip parity, correct, and unrank.

    Returns the recovered bitstring (None when the graph has non-integer
    durations, where only index recovery is meaningful) and the corrected
    duration indices.  Raises :class:`Unrecoverable` when the code gives
    up or, under ``strict_deletions``, when a letter-bearing appended
    round was deleted in every copy.
    """
    s = plan.payload_rounds
    quantized = quantize_trace(trace, design) if trace.quantized is None else trace
    if strict_deletions and any(r >= s for r in quantized.rounds_fully_deleted):
        raise Unrecoverable("an appended letter round was deleted in every copy")
    letters = quantized.schedule.letters()
    try:
        corrected = strip_and_correct(
            letters, list(quantized.quantized[:s]), plan, ecc, graph.alphabet
        )
    except EccError as exc:
        raise Unrecoverable(str(exc)) from exc
    bits = None
    if total_duration is not None and graph.is_integer():
        payload = make_schedule(graph, quantized.schedule.start, list(zip(letters[:s], corrected)))
        bits = decode_payload(payload, graph, total_duration, n_bits=n_bits)
    return bits, corrected


# ---------------------------------------------------------------------------
# Trial drivers
# ---------------------------------------------------------------------------

def random_schedule(graph: SynthesisGraph, start: str, n_rounds: int, rng) -> Schedule:
    """Uniformly random rounds: any other letter, any duration index."""
    letters = graph.alphabet.letters
    rounds = []
    prev = graph.alphabet.index(start)
    for _ in range(n_rounds):
        step = int(rng.integers(1, graph.q))
        nxt = (prev + step) % graph.q
        index = int(rng.integers(1, graph.ell + 1))
        rounds.append((letters[nxt], index))
        prev = nxt
    return make_schedule(graph, start, rounds)


@dataclass(frozen=True)
class PipelineSetup:
    """Everything one trial needs: graph, design, sizing, and code."""

    graph: SynthesisGraph
    design: QuantizerDesign
    plan: RedundancyPlan
    ecc: EccCode | None
    start: str = "A"

    @classmethod
    def for_design(
        cls,
        design: QuantizerDesign,
        payload_rounds: int,
        q: int = 4,
        margin: float = 3.0,
        start: str = "A",
    ) -> "PipelineSetup":
        graph = uniform_graph(q, design.durations)
        if design.ell >= 2:
            need = lambda radius: rs_for_radius(payload_rounds, design.ell, radius).parity_len
            plan = plan_redundancy(
                payload_rounds, design.error_budget, design.ell, q, margin, parity_for_radius=need
            )
            ecc = rs_for_radius(payload_rounds, design.ell, plan.radius_target)
        else:
            plan = plan_redundancy(payload_rounds, design.error_budget, design.ell, q, margin)
            ecc = None
        return cls(graph=graph, design=design, plan=plan, ecc=ecc, start=start)


def run_schedule_trial(
    setup: PipelineSetup,
    seed: int,
    trial: int,
    strict_deletions: bool = False,
) -> SimulationReport:
    """One trial over a uniformly random payload schedule of the planned length."""
    design = setup.design
    report = SimulationReport(ell=design.ell)
    rng = _stream(seed, trial)
    payload = random_schedule(setup.graph, setup.start, setup.plan.payload_rounds, rng)
    full = attach_redundancy(setup.graph, payload, setup.plan, setup.ecc)
    trace = quantize_trace(
        synthesize(full, RunLengthModel.from_design(design), seed, trial), design
    )
    report.trials = 1
    report.total_rounds = full.num_rounds
    report.rounds_with_deletion = len(trace.rounds_with_deletion)
    report.rounds_fully_deleted = len(trace.rounds_fully_deleted)
    report.synthesis_time = float(full.total_time)
    if setup.graph.is_integer():
        report.payload_bits = max_payload_bits(setup.graph, setup.start, int(payload.total_time))
    _tally_quantization(report, design, trace, setup.plan.payload_rounds)
    try:
        _, corrected = read_and_decode(
            trace, design, setup.plan, setup.ecc, setup.graph, None,
            strict_deletions=strict_deletions,
        )
        if tuple(corrected) == payload.indices():
            report.successes = 1
    except Unrecoverable:
        report.unrecoverable = 1
    return report


def run_bits_trial(
    setup: PipelineSetup,
    bits: str,
    total_duration: int,
    seed: int,
    trial: int,
    strict_deletions: bool = False,
) -> SimulationReport:
    """One trial carrying an explicit bit payload through the channel."""
    design = setup.design
    report = SimulationReport(ell=design.ell)
    payload = encode_payload(bits, setup.graph, setup.start, total_duration)
    plan = setup.plan
    if plan.payload_rounds != payload.num_rounds:
        setup = PipelineSetup.for_design(
            design, payload.num_rounds, setup.graph.q, plan.margin, setup.start
        )
        plan = setup.plan
    full = attach_redundancy(setup.graph, payload, plan, setup.ecc)
    trace = quantize_trace(
        synthesize(full, RunLengthModel.from_design(design), seed, trial), design
    )
    report.trials = 1
    report.total_rounds = full.num_rounds
    report.rounds_with_deletion = len(trace.rounds_with_deletion)
    report.rounds_fully_deleted = len(trace.rounds_fully_deleted)
    report.synthesis_time = float(full.total_time)
    report.payload_bits = len(bits)
    _tally_quantization(report, design, trace, plan.payload_rounds)
    try:
        recovered, _ = read_and_decode(
            trace, design, plan, setup.ecc, setup.graph, total_duration,
            n_bits=len(bits), strict_deletions=strict_deletions,
        )
        if recovered == bits:
            report.successes = 1
    except Unrecoverable:
        report.unrecoverable = 1
    return report


def _schedule_chunk(args) -> SimulationReport:
    setup, seed, trials, strict = args
    report = SimulationReport(ell=setup.design.ell)
    for trial in trials:
        report.merge(run_schedule_trial(setup, seed, trial, strict))
    return report


def simulate_schedules(
    setup: PipelineSetup,
    trials: int,
    seed: int,
    jobs: int = 1,
    strict_deletions: bool = False,
) -> SimulationReport:
    """Run independent random-schedule trials; result is jobs-invariant."""
    indices = list(range(trials))
    if jobs <= 1:
        report = _schedule_chunk((setup, seed, indices, strict_deletions))
    else:
        chunks = [
            (setup, seed, indices[w::jobs], strict_deletions) for w in range(jobs)
        ]
        report = SimulationReport(ell=setup.design.ell)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_schedule_chunk, chunks):
                report.merge(part)
    report.seed = seed
    return report


# ---------------------------------------------------------------------------
# Rate curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatePoint:
    """One grid point of an achievable-rate sweep."""

    param: float
    copies: int
    delta: float
    max_duration: float | None
    ell: int | None
    capacity_bits_per_time: float | None
    rounds_per_time: float | None
    rate_bound: float | None
    lambda1: float | None
    status: str


def _rate_of(graph: SynthesisGraph, delta: float) -> tuple[float, float, float]:
    cap = capacity(graph).capacity
    alpha = max_entropic_chain(graph).rounds_per_time
    # time per bit from the expected-time bound; its reciprocal is the rate
    time_per_bit = time_bound_formula(1, cap, delta, graph.ell, graph.q, alpha)
    return cap, alpha, 1.0 / time_per_bit


def rate_curve(
    family: str,
    sweep: str,
    values: Sequence[float],
    p: float | None = None,
    delta: float | None = None,
    copies: int | None = None,
    max_duration: float = 10,
    ell_max: int = 10,
    q: int = 4,
) -> list[RatePoint]:
    """Design, then rate-analyze, one quantizer per swept parameter value.

    ``sweep`` names the swept parameter: ``p`` (binomial only), ``delta``
    or ``N``.  Infeasible designs yield a status row instead of aborting.
    Rows follow the input order of ``values``.
    """
    if family not in (BINOMIAL, POISSON):
        raise ValueError(f"unknown family {family!r}")
    if sweep not in ("p", "delta", "N"):
        raise ValueError("sweep is one of 'p', 'delta', 'N'")
    if family == POISSON and sweep == "p":
        raise ValueError("Poisson designs have no success probability to sweep")

    points = []
    for value in values:
        cur_p = float(value) if sweep == "p" else p
        cur_delta = float(value) if sweep == "delta" else delta
        cur_copies = int(value) if sweep == "N" else copies
        if cur_delta is None or cur_copies is None or (family == BINOMIAL and cur_p is None):
            raise ValueError("sweep leaves a required parameter unset")
        try:
            if family == BINOMIAL:
                design = design_binomial(cur_p, cur_delta, cur_copies, int(max_duration))
            else:
                design = design_poisson(cur_delta, cur_copies, ell_max=ell_max)
        except Infeasible:
            points.append(
                RatePoint(
                    param=float(value), copies=cur_copies, delta=cur_delta,
                    max_duration=max_duration, ell=None, capacity_bits_per_time=None,
                    rounds_per_time=None, rate_bound=None, lambda1=None,
                    status="infeasible",
                )
            )
            continue
        graph = uniform_graph(q, design.durations)
        cap, alpha, rate = _rate_of(graph, cur_delta)
        points.append(
            RatePoint(
                param=float(value), copies=cur_copies, delta=cur_delta,
                max_duration=max_duration, ell=design.ell,
                capacity_bits_per_time=cap, rounds_per_time=alpha, rate_bound=rate,
                lambda1=None if design.rates is None else design.rates[0],
                status="ok",
            )
        )
    return points


RATE_CURVE_HEADER = "param,N,delta,M,ell,capacity_bits_per_time,alpha,rate_thm2,lambda1,status"


def rate_curve_csv(points: Sequence[RatePoint]) -> str:
    """Render sweep rows with 9-significant-digit numeric fields."""

    def num(x) -> str:
        return "" if x is None else f"{x:.9g}"

    lines = [RATE_CURVE_HEADER]
    for pt in points:
        lines.append(
            ",".join(
                [
                    num(pt.param), str(pt.copies), num(pt.delta), num(pt.max_duration),
                    "" if pt.ell is None else str(pt.ell),
                    num(pt.capacity_bits_per_time), num(pt.rounds_per_time),
                    num(pt.rate_bound), num(pt.lambda1), pt.status,
                ]
            )
        )
    return "\n".join(lines) + "\n"
