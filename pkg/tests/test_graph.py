"""Schedule-graph construction, capacity, expansion, counting, losslessness."""

import math

import numpy as np
import pytest

from prdna.graph import (
    Alphabet,
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
    transfer_matrix,
    uniform_graph,
)


# ---------------------------------------------------------------------------
# Independent oracles
# ---------------------------------------------------------------------------

def power_iteration_radius(mat, iters=20000, tol=1e-13, seed=0):
    """Dominant eigenvalue magnitude via plain power iteration."""
    mat = np.asarray(mat, dtype=float)
    rng = np.random.default_rng(seed)
    x = rng.random(mat.shape[0]) + 0.5
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(iters):
        y = mat @ x
        norm = np.linalg.norm(y)
        lam_new = float(x @ y)
        x = y / norm
        if abs(lam_new - lam) < tol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    return lam


def brute_force_schedules(graph, start, total):
    """Recursive enumeration of duration-exact schedules, independent of iter_schedules."""
    letters = graph.alphabet.letters
    results = []

    def go(prev_idx, remaining, acc):
        if remaining == 0:
            results.append(tuple(acc))
            return
        for ai, a in enumerate(letters):
            if ai == prev_idx:
                continue
            for i, t in enumerate(graph.menus[prev_idx][ai], start=1):
                if t <= remaining:
                    acc.append((a, i))
                    go(ai, remaining - int(t), acc)
                    acc.pop()

    go(graph.alphabet.index(start), total, [])
    return results


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------

def test_alphabet_defaults_and_validation():
    assert default_alphabet(4).letters == ("A", "C", "G", "T")
    assert default_alphabet(2).q == 2
    with pytest.raises(ValueError):
        Alphabet(("A",))
    with pytest.raises(ValueError):
        Alphabet(("A", "A"))


def test_build_graph_edge_counts():
    g = uniform_graph(4, [1], max_duration=10)
    assert g.q == 4 and g.num_edges == 12 and g.ell == 1

    g2 = uniform_graph(2, [1])
    assert g2.num_edges == 2

    g3 = uniform_graph(4, [1, 2])
    assert g3.num_edges == 24 and g3.ell == 2


def test_build_graph_rejections():
    alpha = default_alphabet(4)
    with pytest.raises(ValueError):
        build_graph(alpha, {"A>A": [1]})
    with pytest.raises(ValueError):
        build_graph(alpha, {"default": [2, 1]})
    with pytest.raises(ValueError):
        build_graph(alpha, {"default": [1, 5]}, max_duration=3)
    with pytest.raises(ValueError):
        build_graph(alpha, {"default": [1], "C>A": [1, 2]})
    with pytest.raises(ValueError):
        build_graph(alpha, {"C>A": [1]})  # other pairs uncovered


def test_per_pair_menus_allowed():
    alpha = default_alphabet(4)
    g = build_graph(alpha, {"default": [1, 2], "C>A": [1, 3]})
    assert g.menu("C", "A") == (1, 3)
    assert g.menu("A", "C") == (1, 2)


# ---------------------------------------------------------------------------
# Capacity
# ---------------------------------------------------------------------------

def test_capacity_unit_menu_q4():
    res = capacity(uniform_graph(4, [1]))
    assert abs(res.capacity - math.log2(3)) < 1e-9
    assert abs(res.perron_root - 3.0) < 1e-9


def test_capacity_q2_unit_menu_is_zero():
    res = capacity(uniform_graph(2, [1]))
    assert res.capacity == 0.0


def test_capacity_q4_two_durations_closed_form():
    # root of 3/z + 3/z^2 = 1, i.e. z^2 - 3z - 3 = 0
    res = capacity(uniform_graph(4, [1, 2]))
    assert abs(res.perron_root - (3 + math.sqrt(21)) / 2) < 1e-9
    assert abs(res.capacity - math.log2((3 + math.sqrt(21)) / 2)) < 1e-9


def test_capacity_matches_power_iteration_on_expansion():
    for menu in ([1], [1, 2], [1, 3], [2, 5], [1, 2, 4]):
        g = uniform_graph(4, menu)
        res = capacity(g)
        radius = power_iteration_radius(ordinary_expand(g).adjacency)
        assert abs(res.capacity - math.log2(radius)) < 1e-9, menu


def test_capacity_heterogeneous_menus():
    alpha = default_alphabet(3)
    g = build_graph(alpha, {"default": [1, 2], "B>A": [1, 3], "C>B": [2, 3]})
    res = capacity(g)
    radius = power_iteration_radius(ordinary_expand(g).adjacency)
    assert abs(res.capacity - math.log2(radius)) < 1e-9


def test_capacity_real_durations_match_rescaled_integer_graph():
    g = uniform_graph(4, [1.0, 2.5])
    res = capacity(g)
    scaled = rescale_to_integer(g, denominator=2)
    assert scaled.menu("A", "C") == (2, 5)
    res_scaled = capacity(scaled)
    assert abs(res.capacity - 2 * res_scaled.capacity) < 1e-9


def test_capacity_monotone_in_menu_growth():
    base = capacity(uniform_graph(4, [2])).capacity
    for extra in (3, 5, 9):
        grown = capacity(uniform_graph(4, [2, extra])).capacity
        assert grown >= base - 1e-12


def test_right_vector_fixed_point():
    g = uniform_graph(4, [1, 2])
    res = capacity(g)
    x = np.array(res.right_vector)
    assert np.all(x > 0)
    np.testing.assert_allclose(transfer_matrix(g, res.perron_root) @ x, x, atol=1e-9)


# ---------------------------------------------------------------------------
# Ordinary expansion
# ---------------------------------------------------------------------------

def test_expand_unit_menu_is_identity_shape():
    og = ordinary_expand(uniform_graph(4, [1]))
    assert og.num_vertices == 4 and og.num_auxiliary == 0
    assert og.adjacency.sum() == 12


def test_expand_counts_q4():
    og = ordinary_expand(uniform_graph(4, [1, 2]))
    assert og.num_vertices == 16 and og.num_auxiliary == 12
    assert og.adjacency.sum() == 12 + 24


def test_expand_counts_q2_duration3():
    og = ordinary_expand(uniform_graph(2, [3]))
    assert og.num_auxiliary == 4
    assert og.num_vertices == 6


def test_expand_rejects_real_durations():
    with pytest.raises(ValueError):
        ordinary_expand(uniform_graph(4, [1.0, 2.5]))


def test_rescale_collision_rejected():
    with pytest.raises(ValueError):
        rescale_to_integer(uniform_graph(4, [1.0, 1.04]), denominator=10)


# ---------------------------------------------------------------------------
# Max-entropic round process
# ---------------------------------------------------------------------------

def test_chain_unit_menu():
    chain = max_entropic_chain(uniform_graph(4, [1]))
    assert abs(chain.rounds_per_time - 1.0) < 1e-12
    assert abs(chain.mean_round_duration - 1.0) < 1e-12


def test_chain_fixed_duration_two():
    chain = max_entropic_chain(uniform_graph(2, [2]))
    assert abs(chain.rounds_per_time - 0.5) < 1e-12


def test_chain_probabilities_normalized():
    for menu in ([1, 2], [1, 3], [2, 3, 7]):
        chain = max_entropic_chain(uniform_graph(4, menu))
        for out in chain.edge_probabilities:
            assert abs(sum(p for _, _, p in out) - 1.0) < 1e-12
        assert abs(sum(chain.stationary) - 1.0) < 1e-12
        assert abs(chain.rounds_per_time * chain.mean_round_duration - 1.0) < 1e-12


def test_chain_matches_stationary_mass_of_expansion():
    # Fraction of non-auxiliary vertices in the stationary law of the
    # unit-step chain on the expansion equals rounds per time unit.
    g = uniform_graph(4, [1, 2])
    chain = max_entropic_chain(g)
    og = ordinary_expand(g)
    adj = og.adjacency.astype(float)
    values, vectors = np.linalg.eig(adj)
    lead = int(np.argmax(values.real))
    lam = float(values[lead].real)
    x = np.abs(vectors[:, lead].real)
    values_l, vectors_l = np.linalg.eig(adj.T)
    lead_l = int(np.argmax(values_l.real))
    y = np.abs(vectors_l[:, lead_l].real)
    pi = x * y
    pi /= pi.sum()
    assert abs(lam - capacity(g).perron_root) < 1e-9
    assert abs(pi[og.non_auxiliary].sum() - chain.rounds_per_time) < 1e-9


def test_chain_against_random_walk_on_expansion():
    # Long random walk over the unit-step chain of the expansion: the
    # fraction of steps landing on letter vertices estimates rounds per
    # time unit.
    g = uniform_graph(4, [1, 2])
    chain = max_entropic_chain(g)
    og = ordinary_expand(g)
    adj = og.adjacency.astype(float)
    values, vectors = np.linalg.eig(adj)
    lead = int(np.argmax(values.real))
    lam = float(values[lead].real)
    x = np.abs(vectors[:, lead].real)
    n = og.num_vertices
    probs = adj * x[None, :] / (lam * x[:, None])
    probs /= probs.sum(axis=1, keepdims=True)

    rng = np.random.default_rng(20240817)
    steps = 1_000_000
    cumulative = probs.cumsum(axis=1)
    draws = rng.random(steps)
    state = 0
    hits = 0
    non_aux = og.non_auxiliary
    for u in range(steps):
        state = int(np.searchsorted(cumulative[state], draws[u], side="right"))
        if non_aux[state]:
            hits += 1
    frac = hits / steps
    sigma = math.sqrt(frac * (1 - frac) / steps)
    assert abs(frac - chain.rounds_per_time) < 3 * sigma + 1e-4


# ---------------------------------------------------------------------------
# Counting and losslessness
# ---------------------------------------------------------------------------

def test_count_unit_menu():
    g = uniform_graph(4, [1])
    assert count_schedules(g, "A", 3) == 27
    assert count_schedules(g, "G", 0) == 1


def test_count_two_durations_exhaustive():
    g = uniform_graph(4, [1, 2])
    assert count_schedules(g, "A", 2) == 12
    for total in range(0, 9):
        listed = brute_force_schedules(g, "C", total)
        assert count_schedules(g, "C", total) == len(listed)
        assert listed == list(iter_schedules(g, "C", total))


def test_count_growth_approaches_capacity():
    g = uniform_graph(4, [1, 2])
    cap = capacity(g).capacity
    n = 60
    rate = math.log2(count_schedules(g, "A", n)) / n
    assert abs(rate - cap) < 0.02


def test_losslessness_by_exhaustion():
    # Distinct schedules from one start letter generate distinct words,
    # tracked per (start, end) vertex pair.
    for menu in ([1], [1, 2], [1, 3]):
        g = uniform_graph(4, menu)
        for start in g.alphabet.letters:
            seen = {}
            for total in range(1, 7):
                for rounds in iter_schedules(g, start, total):
                    end = rounds[-1][0]
                    word = rounds_to_word(g, start, rounds)
                    key = (end, word)
                    assert key not in seen, (menu, start, key)
                    seen[key] = rounds


# ---------------------------------------------------------------------------
# JSON profiles
# ---------------------------------------------------------------------------

def test_json_roundtrip_uniform():
    g = uniform_graph(4, [1, 2], max_duration=10)
    again = graph_from_json(graph_to_json(g))
    assert again == g


def test_json_roundtrip_per_pair():
    alpha = default_alphabet(3)
    g = build_graph(alpha, {"default": [1, 2], "B>A": [1, 3]})
    again = graph_from_json(graph_to_json(g))
    assert again == g


def test_json_reader_accepts_default_letters():
    g = graph_from_json('{"q": 4, "M": 10, "menus": {"default": [1, 2]}}')
    assert g.alphabet.letters == ("A", "C", "G", "T")
    assert g.max_duration == 10
