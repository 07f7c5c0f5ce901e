import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrmatch.align import (
    Matcher,
    TooLarge,
    alignment_candidates,
    brute_force,
    compute_match_weights,
    hill_climb,
    partial_map_count,
    profile_local_optima,
    solve,
    solve_exact,
)
from mrmatch.graph import Graph
from mrmatch.score import count_matches

from synth import adversarial_pair, scratch_pair, make_rng, random_graph, random_pair, shuffled_rename


def G(triples, root=None):
    return Graph.from_triples(triples, root=root)


def idx(w, va, vb):
    return w.vars_a.index(va), w.vars_b.index(vb)


def test_scratch_weights():
    a, b = scratch_pair()
    w = compute_match_weights(a, b)
    assert w.u[idx(w, "c", "y")] == 1
    assert w.u[idx(w, "c", "z")] == 0
    assert w.u[idx(w, "s", "x")] == 1
    i, j = idx(w, "s", "x")
    k, l = idx(w, "c", "y")
    assert w.b[(i, j, k, l)] == 1
    assert all(v > 0 for v in w.b.values())
    assert w.integral and w.const == 0


def test_single_node_weights():
    w = compute_match_weights(G([("a", ":instance", "alpha")]), G([("b", ":instance", "alpha")]))
    assert w.u.tolist() == [[1.0]] and w.b == {}
    for solver in ("exact", "hillclimb", "brute"):
        sol = solve(w, solver)
        assert sol.lower == 1 and sol.optimal and sol.map == {"a": "b"}


def test_scratch_optimum_all_solvers():
    a, b = scratch_pair()
    w = compute_match_weights(a, b)
    for solver in ("exact", "brute"):
        sol = solve(w, solver)
        assert sol.lower == 4 and sol.optimal
        assert sol.map == {"c": "y", "d": "z", "s": "x"}
    assert hill_climb(w).lower == 4


def test_search_space_counts():
    assert alignment_candidates(3, 5) == 60
    assert partial_map_count(3, 5) == 136
    assert partial_map_count(0, 4) == 1


def test_binary_links_need_distinct_pairs():
    # self-loops fold into u
    a = G([("x", ":instance", "a"), ("x", ":mod", "x")])
    b = G([("y", ":instance", "a"), ("y", ":mod", "y")])
    w = compute_match_weights(a, b)
    assert w.u.tolist() == [[2.0]] and w.b == {}


def test_constant_only_triples():
    a = Graph.from_triples([("k", ":mod", "v")], variables=set())
    b = Graph.from_triples([("k", ":mod", "v"), ("x", ":instance", "c")], root="x")
    w = compute_match_weights(a, b)
    assert w.const == 1
    for solver in ("exact", "brute", "hillclimb"):
        assert solve(w, solver).lower == 1


def test_too_large():
    g = random_graph(make_rng(1), 10)
    w = compute_match_weights(g, g)
    with pytest.raises(TooLarge):
        brute_force(w, cap=8)
    assert brute_force(compute_match_weights(g, G([("q", ":instance", "cat")])), cap=8).optimal


def test_bad_arguments():
    w = compute_match_weights(*scratch_pair())
    with pytest.raises(ValueError):
        hill_climb(w, restarts=0)
    with pytest.raises(ValueError):
        solve_exact(w, timeout=0)
    with pytest.raises(ValueError):
        solve(w, "ilp")
    with pytest.raises(ValueError):
        profile_local_optima(w, tries=0)


def test_hill_climb_seed_determinism():
    a, b = adversarial_pair(make_rng(7))
    w = compute_match_weights(a, b)
    s1, s2 = hill_climb(w, 6, seed=3), hill_climb(w, 6, seed=3)
    assert s1.map == s2.map and s1.lower == s2.lower and s1.history == s2.history


def test_profile_local_optima():
    a, b = adversarial_pair(make_rng(11))
    vals = profile_local_optima(compute_match_weights(a, b), tries=20, seed=0)
    assert len(vals) == 20
    one = compute_match_weights(G([("a", ":instance", "x")]), G([("b", ":instance", "x")]))
    assert len(set(profile_local_optima(one, tries=20))) == 1


def test_exact_timeout_returns_valid_bound():
    rng = make_rng(5)
    a = random_graph(rng, 12, 30, concepts=["x", "y"], relations=[":arg0", ":arg1"], prefix="a")
    b = random_graph(rng, 12, 30, concepts=["x", "y"], relations=[":arg0", ":arg1"], prefix="b")
    w = compute_match_weights(a, b)
    fast = solve_exact(w, timeout=1e-4)
    full = solve_exact(w, timeout=120)
    assert full.optimal
    assert fast.lower <= full.lower <= fast.upper <= w.trivial_upper
    assert fast.lower == count_matches(a, b, fast.map)
    if not fast.optimal:
        assert fast.lower < fast.upper


def test_fractional_matcher():
    sim = lambda c1, c2: 1.0 if c1 == c2 else (0.5 if c1[0] == c2[0] else 0.0)
    m = Matcher(concept_sim=sim, weight=lambda t, t2: 2.0 if t.relation == ":arg0" else 1.0)
    for seed in range(30):
        a, b = random_pair(make_rng(seed), n_range=(2, 5))
        w = compute_match_weights(a, b, m)
        ex, bf, hc = solve_exact(w), brute_force(w), hill_climb(w)
        assert math.isclose(ex.lower, bf.lower, abs_tol=1e-9)
        assert hc.lower <= bf.lower + 1e-9
        assert ex.upper <= w.trivial_upper + 1e-9
        assert math.isclose(count_matches(a, b, ex.map, m), ex.lower, abs_tol=1e-9)


def _check_solution(a, b, w, sol):
    assert len(set(sol.map.values())) == len(sol.map)
    assert set(sol.map) <= a.variables and set(sol.map.values()) <= b.variables
    assert sol.lower == count_matches(a, b, sol.map)
    assert sol.lower <= sol.upper <= min(len(a), len(b))
    assert sol.optimal == (sol.lower == sol.upper)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**6))
def test_solvers_agree_with_oracle(seed):
    a, b = random_pair(make_rng(seed))
    w = compute_match_weights(a, b)
    bf, ex, hc = brute_force(w), solve_exact(w), hill_climb(w, 4, seed)
    for sol in (bf, ex, hc):
        _check_solution(a, b, w, sol)
    assert ex.lower == bf.lower and ex.optimal
    assert hc.lower <= ex.lower
    assert all(x <= y for x, y in zip(hc.history, hc.history[1:]))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_renaming_invariance(seed):
    rng = make_rng(seed)
    a, b = random_pair(rng)
    base = solve_exact(compute_match_weights(a, b)).lower
    assert solve_exact(compute_match_weights(shuffled_rename(rng, a, "m"), shuffled_rename(rng, b, "n"))).lower == base
    # the metric is symmetric in its arguments
    assert solve_exact(compute_match_weights(b, a)).lower == base


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_hill_climb_self_match(seed):
    rng = make_rng(seed)
    g = random_graph(rng, rng.randint(1, 7))
    h = shuffled_rename(rng, g)
    sol = hill_climb(compute_match_weights(g, h), 4, seed)
    assert sol.lower == len(g) and sol.optimal


def test_adversarial_strict_gap_exists():
    gaps = 0
    for seed in range(100):
        a, b = adversarial_pair(make_rng(seed))
        w = compute_match_weights(a, b)
        ex, hc = solve_exact(w), hill_climb(w, 4, 0)
        assert ex.lower >= hc.lower
        gaps += ex.lower > hc.lower
    assert gaps >= 1


def test_weights_nonnegative_integral_default():
    for seed in range(20):
        w = compute_match_weights(*random_pair(make_rng(seed)))
        assert (w.u >= 0).all() and np.all(w.u == np.round(w.u))
        assert all(v > 0 and v == int(v) for v in w.b.values())
