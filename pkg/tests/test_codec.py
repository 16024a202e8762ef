"""Enumerative coding, redundancy sizing, letter framing, time bounds."""

import math
import random

import pytest

from prdna.codec import (
    BudgetTooSmall,
    InvalidSchedule,
    Schedule,
    ZeroDifference,
    append_redundancy,
    attach_redundancy,
    base_to_symbols,
    code_rate,
    decode_payload,
    encode_payload,
    extract_redundancy,
    letters_needed,
    make_schedule,
    max_payload_bits,
    plan_redundancy,
    rank_schedule,
    strip_and_correct,
    symbols_to_base,
    synthesis_time_bound,
    time_bound_formula,
    unrank_schedule,
)
from prdna.ecc import rs_for_radius
from prdna.graph import capacity, count_schedules, iter_schedules, uniform_graph


# ---------------------------------------------------------------------------
# Rate formula
# ---------------------------------------------------------------------------

def test_code_rate_noiseless():
    assert code_rate(0.0, 2) == 1.0
    assert code_rate(0.0, 10) == 1.0


def test_code_rate_binary_matches_entropy():
    h2 = -(0.02 * math.log2(0.02) + 0.98 * math.log2(0.98))
    assert abs(code_rate(0.02, 2) - (1 - h2)) < 1e-12


def test_code_rate_quaternary_direct_formula():
    want = 1 + 0.02 * math.log(0.02 / 3, 4) + 0.98 * math.log(0.98, 4)
    assert abs(code_rate(0.02, 4) - want) < 1e-12
    assert abs(code_rate(0.02, 4) - 0.91343) < 5e-5


def test_code_rate_domain():
    with pytest.raises(ValueError):
        code_rate(0.5, 2)
    with pytest.raises(ValueError):
        code_rate(0.8, 4)
    assert code_rate(0.74, 4) > 0.0


# ---------------------------------------------------------------------------
# Enumerative coding
# ---------------------------------------------------------------------------

def test_rank_zero_is_lexicographically_first():
    g = uniform_graph(4, [1])
    sched = encode_payload("", g, "A", 3)
    assert sched.rounds == (("C", 1), ("A", 1), ("C", 1))
    assert sched.total_time == 3


def test_all_ranks_distinct_and_invertible():
    g = uniform_graph(4, [1, 2])
    seen = set()
    for value in range(count_schedules(g, "A", 2)):
        sched = unrank_schedule(g, "A", 2, value)
        seen.add(sched.rounds)
        assert rank_schedule(g, sched, 2) == value
    assert len(seen) == 12


def test_unrank_order_matches_enumeration_order():
    g = uniform_graph(4, [1, 2])
    for total in (3, 5):
        listed = list(iter_schedules(g, "G", total))
        for value, rounds in enumerate(listed):
            assert unrank_schedule(g, "G", total, value).rounds == rounds


def test_payload_capacity_of_unit_menu():
    g = uniform_graph(4, [1])
    assert max_payload_bits(g, "A", 60) == 95
    bits = "1" * 95
    sched = encode_payload(bits, g, "A", 60)
    assert decode_payload(sched, g, 60) == bits
    with pytest.raises(BudgetTooSmall):
        encode_payload("0" * 96, g, "A", 60)


def test_bits_roundtrip_random():
    g = uniform_graph(4, [1, 2])
    rng = random.Random(99)
    for total in (10, 17, 25):
        width = max_payload_bits(g, "A", total)
        for _ in range(20):
            bits = "".join(rng.choice("01") for _ in range(width))
            assert decode_payload(encode_payload(bits, g, "A", total), g, total) == bits


def test_decode_empty_schedule():
    g = uniform_graph(4, [1, 2])
    sched = make_schedule(g, "A", [])
    assert decode_payload(sched, g, 0) == ""


def test_schedule_json_roundtrip():
    from prdna.codec import schedule_from_json, schedule_to_json

    g = uniform_graph(4, [1, 2])
    sched = make_schedule(g, "A", [("C", 2), ("T", 1), ("A", 2)])
    again = schedule_from_json(schedule_to_json(sched), g)
    assert again == sched


def test_decode_rejects_tampered_schedules():
    g = uniform_graph(4, [1, 2])
    with pytest.raises(InvalidSchedule):
        make_schedule(g, "A", [("C", 1), ("C", 1)])
    with pytest.raises(InvalidSchedule):
        make_schedule(g, "A", [("A", 1)])
    with pytest.raises(InvalidSchedule):
        make_schedule(g, "A", [("C", 3)])
    ok = make_schedule(g, "A", [("C", 2), ("G", 1)])
    with pytest.raises(InvalidSchedule):
        decode_payload(ok, g, 5)  # lasts 3, not 5


def test_rate_achieved_at_long_budget():
    g = uniform_graph(4, [1])
    bits_per_time = max_payload_bits(g, "A", 200) / 200
    assert bits_per_time >= math.log2(3) - 0.05


# ---------------------------------------------------------------------------
# Redundancy sizing
# ---------------------------------------------------------------------------

def test_plan_noiseless_is_empty():
    plan = plan_redundancy(1000, 0.0, 2, 4)
    assert plan.parity_symbols == 0 and plan.redundancy_rounds == 0


def test_plan_formula_binary():
    plan = plan_redundancy(1000, 0.02, 2, 4)
    assert plan.parity_symbols_formula == 165
    assert plan.parity_symbols == 165
    assert plan.redundancy_rounds == 105


def test_plan_formula_quaternary():
    plan = plan_redundancy(100, 0.02, 4, 4)
    assert plan.parity_symbols_formula == 10
    assert plan.parity_symbols >= 10
    assert plan.redundancy_rounds == letters_needed(plan.parity_symbols, 4, 4)


def test_plan_grows_for_concrete_code():
    need = lambda radius: rs_for_radius(1000, 2, radius).parity_len
    plan = plan_redundancy(1000, 0.02, 2, 4, margin=3.0, parity_for_radius=need)
    assert plan.radius_target == math.ceil(0.02 * 1000 + 3 * math.sqrt(1000))
    assert plan.parity_symbols == max(165, need(plan.radius_target))
    assert plan.parity_symbols > plan.parity_symbols_formula


def test_plan_single_duration_menu_needs_nothing():
    plan = plan_redundancy(500, 0.02, 1, 4)
    assert plan.parity_symbols == 0 and plan.redundancy_rounds == 0


# ---------------------------------------------------------------------------
# Base conversion
# ---------------------------------------------------------------------------

def test_symbols_to_base_worked_example():
    assert symbols_to_base((3, 1), q=4, base=4) == (1, 3, 3)


def test_all_ones_maps_to_all_ones():
    assert symbols_to_base((1, 1, 1, 1), q=4, base=4) == (1,) * letters_needed(4, 4, 4)
    assert set(symbols_to_base((1,) * 9, q=5, base=3)) == {1}


def test_base_conversion_roundtrip_random():
    rng = random.Random(4)
    for _ in range(10_000):
        base = rng.choice([2, 3, 4, 9])
        q = rng.choice([3, 4, 5])
        width = rng.randint(1, 12)
        symbols = tuple(rng.randint(1, base) for _ in range(width))
        barred = symbols_to_base(symbols, q=q, base=base)
        assert all(1 <= v <= q - 1 for v in barred)
        assert base_to_symbols(barred, base, width, q) == symbols


def test_symbols_to_base_rejects_empty_and_out_of_range():
    with pytest.raises(ValueError):
        symbols_to_base((), q=4, base=4)
    with pytest.raises(ValueError):
        symbols_to_base((0, 1), q=4, base=4)


# ---------------------------------------------------------------------------
# Differential letters
# ---------------------------------------------------------------------------

def test_append_worked_example():
    g = uniform_graph(4, [1, 2])
    sched = make_schedule(g, "C", [("A", 1)])
    full = append_redundancy(g, sched, (1, 3, 2))
    assert full.letters()[1:] == ("C", "A", "G")
    assert full.indices()[1:] == (1, 1, 1)


def test_append_max_increment_cycles_backward():
    g = uniform_graph(4, [1])
    sched = make_schedule(g, "A", [("T", 1)])
    full = append_redundancy(g, sched, (3, 3, 3))
    assert full.letters() == ("T", "G", "C", "A")


def test_append_extract_roundtrip_random():
    g = uniform_graph(4, [1, 2])
    rng = random.Random(12)
    for _ in range(10_000):
        barred = tuple(rng.randint(1, 3) for _ in range(rng.randint(1, 8)))
        first = rng.choice("CGT")
        sched = make_schedule(g, "A", [(first, 1)])
        full = append_redundancy(g, sched, barred)
        assert extract_redundancy(full.letters(), g.alphabet) == barred


def test_extract_rejects_repeats():
    g = uniform_graph(4, [1])
    with pytest.raises(ZeroDifference):
        extract_redundancy(("A", "C", "C"), g.alphabet)


def test_append_increments_cover_duration_time():
    g = uniform_graph(4, [2, 5])
    sched = make_schedule(g, "A", [("C", 2)])
    full = append_redundancy(g, sched, (1, 1))
    assert full.total_time == 5 + 2 + 2  # appended rounds use the shortest duration


# ---------------------------------------------------------------------------
# Time bounds
# ---------------------------------------------------------------------------

def test_bound_noiseless_equals_capacity_ratio():
    g = uniform_graph(4, [1, 2])
    cap = capacity(g).capacity
    assert abs(synthesis_time_bound(1000, g, 0.0, "worst") - 1000 / cap) < 1e-9
    assert abs(synthesis_time_bound(1000, g, 0.0, "expected") - 1000 / cap) < 1e-9


def test_bound_worked_example():
    g = uniform_graph(4, [1, 2])
    bound = synthesis_time_bound(1000, g, 0.02, "worst")
    cap = math.log2((3 + math.sqrt(21)) / 2)
    manual = 1000 / cap * (1 + (1 / code_rate(0.02, 2) - 1) * math.log(2, 3))
    assert abs(bound - manual) < 1e-9
    assert abs(bound - 574.2) <= 0.1


def test_expected_bound_never_exceeds_worst():
    for menu in ([1, 2], [1, 3], [2, 3, 7], [1, 2, 4, 8]):
        g = uniform_graph(4, menu)
        for delta in (0.01, 0.05, 0.1):
            worst = synthesis_time_bound(500, g, delta, "worst")
            expected = synthesis_time_bound(500, g, delta, "expected")
            assert expected <= worst + 1e-12


# ---------------------------------------------------------------------------
# Whole-message pipeline
# ---------------------------------------------------------------------------

def _pipeline_encode(graph, bits, start, total, delta, margin=3.0):
    payload = encode_payload(bits, graph, start, total)
    s = payload.num_rounds
    need = lambda radius: rs_for_radius(s, graph.ell, radius).parity_len
    plan = plan_redundancy(s, delta, graph.ell, graph.q, margin, parity_for_radius=need)
    ecc = rs_for_radius(s, graph.ell, plan.radius_target)
    return attach_redundancy(graph, payload, plan, ecc), plan, ecc


def test_noiseless_pipeline_roundtrip():
    g = uniform_graph(4, [1, 2])
    rng = random.Random(7)
    for total in (10, 20, 30, 40):
        width = max_payload_bits(g, "A", total)
        bits = "".join(rng.choice("01") for _ in range(width))
        full, plan, ecc = _pipeline_encode(g, bits, "A", total, delta=0.02)
        indices = list(full.indices()[: plan.payload_rounds])
        corrected = strip_and_correct(full.letters(), indices, plan, ecc, g.alphabet)
        payload = make_schedule(
            g, "A", list(zip(full.letters()[: plan.payload_rounds], corrected))
        )
        assert decode_payload(payload, g, total, n_bits=width) == bits


def test_noisy_pipeline_recovers_at_design_fraction():
    g = uniform_graph(4, [1, 2])
    rng = random.Random(21)
    total = 60
    width = max_payload_bits(g, "A", total)
    bits = "".join(rng.choice("01") for _ in range(width))
    full, plan, ecc = _pipeline_encode(g, bits, "A", total, delta=0.05)
    s = plan.payload_rounds
    flips = int(0.05 * s)
    assert flips <= plan.radius_target
    indices = list(full.indices()[:s])
    for pos in rng.sample(range(s), flips):
        indices[pos] = (indices[pos] % g.ell) + 1
    corrected = strip_and_correct(full.letters(), indices, plan, ecc, g.alphabet)
    payload = make_schedule(g, "A", list(zip(full.letters()[:s], corrected)))
    assert decode_payload(payload, g, total, n_bits=width) == bits


def test_pipeline_time_stays_under_worst_case_bound():
    # Information-theoretic parity sizing (no code adjustment, no margin):
    # the measured synthesis time, averaged over uniform payloads, stays
    # below the worst-case bound once budgets reach a hundred time units.
    g = uniform_graph(4, [1, 2])
    delta = 0.02
    rng = random.Random(123)
    for total in (100, 150, 200):
        width = max_payload_bits(g, "A", total)
        bound = synthesis_time_bound(width, g, delta, "worst")
        measured = []
        for _ in range(20):
            bits = "".join(rng.choice("01") for _ in range(width))
            payload = encode_payload(bits, g, "A", total)
            plan = plan_redundancy(payload.num_rounds, delta, g.ell, g.q, margin=0.0)
            full = attach_redundancy(g, payload, plan, None)
            measured.append(full.total_time)
        assert sum(measured) / len(measured) <= bound, total
