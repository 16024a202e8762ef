"""Bits to schedules and back, with parity riding on extra letters.

Payload bits pick one schedule out of all schedules of an exact total
duration (enumerative coding).  The duration indices of those rounds are
then protected by a Reed-Solomon code; its parity symbols become one big
integer, the integer becomes nonzero letter increments, and the
increments become short appended rounds.
"""

import random

from prdna import (
    attach_redundancy,
    decode_payload,
    encode_payload,
    make_schedule,
    max_payload_bits,
    plan_redundancy,
    rs_for_radius,
    strip_and_correct,
    uniform_graph,
)

graph = uniform_graph(4, [1, 2])
budget = 40
width = max_payload_bits(graph, "A", budget)
print(f"duration budget {budget} from 'A' carries {width} bits")

rng = random.Random(0)
bits = "".join(rng.choice("01") for _ in range(width))
payload = encode_payload(bits, graph, "A", budget)
print("payload rounds:", payload.num_rounds, "| first five:", payload.rounds[:5])

# Size the parity for a 2% per-round error budget plus a safety margin.
s = payload.num_rounds
need = lambda radius: rs_for_radius(s, graph.ell, radius).parity_len
plan = plan_redundancy(s, delta=0.02, ell=graph.ell, q=graph.q, margin=3.0,
                       parity_for_radius=need)
ecc = rs_for_radius(s, graph.ell, plan.radius_target)
full = attach_redundancy(graph, payload, plan, ecc)
print(f"parity: {plan.parity_symbols} symbols -> {plan.redundancy_rounds} appended rounds "
      f"(repairs up to {plan.radius_target} bad indices)")

# Corrupt a handful of duration indices, as a noisy read would.
received = list(full.indices()[:s])
for pos in rng.sample(range(s), plan.radius_target // 2):
    received[pos] = (received[pos] % graph.ell) + 1
corrected = strip_and_correct(full.letters(), received, plan, ecc, graph.alphabet)
print("errors injected:", plan.radius_target // 2,
      "| corrected matches truth:", tuple(corrected) == payload.indices())

restored = make_schedule(graph, "A", list(zip(full.letters()[:s], corrected)))
print("bits recovered exactly:", decode_payload(restored, graph, budget, n_bits=width) == bits)
