import math
from fractions import Fraction

import numpy as np
import pytest

from gramdex.gram import query_grams
from gramdex.kmedian import distance_matrix, k_median, query_distance
from gramdex.select_best import (
    BestConfig, CoverLists, benefit, cover, gram_cost, reduce_workload, select_best,
    utility, write_trace_csv,
)
from gramdex.workload import Workload

from helpers import greedy_oracle, pair_cover, sliced_workload, support


def _sets(w):
    return [query_grams(q.literals) for q in w.queries]


def test_cover_hand_count():
    w = Workload.from_texts([b"ab", b"cd", b"ce", b"cf"], [b"ab", b"zz"])
    assert len(cover(b"a", w)) == 3
    assert cover(b"q", w) == set()


def test_cover_random_matches_pair_oracle():
    rng = np.random.default_rng(1)
    w = sliced_workload(rng, n_records=8, n_queries=5)
    sets = _sets(w)
    for g in set().union(*sets):
        assert cover(g, w) == pair_cover(g, sets, w.texts)


def test_benefit_examples():
    rng = np.random.default_rng(2)
    w = sliced_workload(rng, n_records=8, n_queries=5)
    sets = _sets(w)
    grams = sorted(set().union(*sets))
    assert all(benefit(g, [], w) == len(cover(g, w)) for g in grams)
    chosen = grams[:2]
    base = set().union(*(pair_cover(s, sets, w.texts) for s in chosen))
    for g in grams[2:]:
        assert benefit(g, chosen, w) == len(pair_cover(g, sets, w.texts) - base)


def test_benefit_full_overlap_is_zero():
    w = Workload.from_texts([b"abc", b"x"], [b"abc"])
    # "abc" covers exactly what "ab" covers for the only query
    assert benefit(b"abc", [b"ab"], w) == 0


def test_utility_and_cost():
    w = Workload.from_texts([b"a", b"a", b"b", b"c", b"d", b"e", b"f", b"g"], [b"a", b"ab"])
    # "a" is absent from 6 records in each of 2 queries, cost 2
    assert benefit(b"a", [], w) == 12
    assert utility(b"a", [], w) == Fraction(6)
    assert gram_cost(0) == 1 and gram_cost(7) == 7
    assert utility(b"a", [b"a"], w) == 0


def test_submodularity_sampled():
    rng = np.random.default_rng(3)
    for _ in range(40):
        w = sliced_workload(rng, n_records=10, n_queries=4)
        grams = sorted(set().union(*_sets(w)))
        for _ in range(5):
            big = [g for g in grams if rng.random() < 0.5]
            small = [g for g in big if rng.random() < 0.5]
            for g in grams:
                if g not in big:
                    assert benefit(g, small, w) >= benefit(g, big, w)


def test_micro_workload_equals_greedy_oracle():
    w = Workload.from_texts([b"abc", b"abd", b"bcd", b"xab", b"cdx", b"q"], [b"ab.*c", b"bcd", b"x"])
    got = select_best(w, BestConfig(c=1.0, max_keys=2)).grams
    sets = _sets(w)
    assert got == greedy_oracle(sets, w.texts, set().union(*sets), 2)


def test_tie_break_order():
    # "a" and "b" tie on utility, benefit and cost; shorter then bytes decide
    w = Workload.from_texts([b"a", b"b", b"z", b"z"], [b"a", b"b"])
    trace = []
    r = select_best(w, BestConfig(c=1.0, max_keys=2), trace=trace)
    assert r.grams == [b"a", b"b"]
    assert trace[0] == (b"a", 3, 1, Fraction(3))


def test_zero_budget_and_pruning():
    w = Workload.from_texts([b"ab", b"ab", b"cd"], [b"ab"])
    assert select_best(w, BestConfig(max_keys=0)).grams == []
    r = select_best(w, BestConfig(c=0.5, max_keys=5))
    assert r.grams == [] and r.warnings
    r = select_best(w, BestConfig(c=2 / 3, max_keys=5))
    assert all(support(w.texts, g) / 3 <= 2 / 3 for g in r.grams)


def test_stops_without_positive_benefit():
    w = Workload.from_texts([b"ab", b"cd"], [b"ab"])
    r = select_best(w, BestConfig(c=1.0, max_keys=10))
    assert r.grams == [b"a"]
    assert not r.stopped_early


def test_cover_lists_invariants():
    rng = np.random.default_rng(4)
    w = sliced_workload(rng, n_records=15, n_queries=6)
    sets = _sets(w)
    lists = CoverLists.build(w, sets, set().union(*sets))
    for q, gids in enumerate(lists.qg):
        assert {lists.grams[g] for g in gids} == sets[q]
    for g, ids in zip(lists.grams, lists.gd):
        assert ids.tolist() == [i for i, t in enumerate(w.texts) if g in t]


def test_distance_values():
    a, b = {b"a", b"b", b"c"}, {b"b", b"c", b"d"}
    assert query_distance(a, b) == 1.0
    assert query_distance(a, a) == 0.0
    assert query_distance(set(), set()) == 0.0
    assert math.isinf(query_distance({b"a"}, {b"b"}))
    assert query_distance(a, b) == query_distance(b, a)


def test_k_median_separates_obvious_groups():
    sets = [{b"a", b"b"}, {b"a", b"b", b"c"}, {b"x", b"y"}, {b"x", b"y", b"z"}]
    medoids, labels = k_median(distance_matrix(sets), 2, seed=1)
    assert labels[0] == labels[1] != labels[2] == labels[3]
    assert k_median(distance_matrix(sets), 2, seed=1)[0] == medoids


def test_reduction_rules():
    sets = [{bytes([i])} for i in range(10)]
    assert reduce_workload(sets, BestConfig()) == list(range(10))
    assert len(reduce_workload(sets, BestConfig(reduction_factor=5))) <= 2
    assert reduce_workload(sets[:1], BestConfig(reduction_factor=5, clusters=2)) == [0]


def test_clusters_and_threads_do_not_change_result():
    rng = np.random.default_rng(6)
    w = sliced_workload(rng, n_records=40, n_queries=12)
    base = select_best(w, BestConfig(c=1.0, max_keys=8)).grams
    assert select_best(w, BestConfig(c=1.0, max_keys=8, clusters=3), threads=3).grams == base


def test_config_validation():
    for bad in (dict(c=0), dict(max_keys=-1), dict(clusters=0), dict(reduction_factor=0.5)):
        with pytest.raises(ValueError):
            BestConfig(**bad)


def test_trace_csv(tmp_path):
    w = Workload.from_texts([b"a", b"b", b"z"], [b"a"])
    trace = []
    select_best(w, BestConfig(c=1.0, max_keys=1), trace=trace)
    path = tmp_path / "t.csv"
    write_trace_csv(trace, path)
    assert path.read_text().splitlines()[1] == "1,a,2,1,2.000000"
