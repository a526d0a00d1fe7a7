"""Tests for the statistics engine.

Correctness is checked against independent reference implementations in
tests/oracles.py: dictionary-based average ranks, plain-sum Pearson, matrix
permutation enumeration, a pairwise O(mn) A12, and a recompute-everything
exhaustive Scott-Knott that shares only the keep-rule.
"""

import math

import numpy as np
import pytest

from beliefminer.stats import (
    EXACT_P_MAX_N,
    GroupEntry,
    RankedGroup,
    SupportScore,
    Treatment,
    a12,
    bootstrap_different,
    derive_split_seed,
    quartiles,
    rank_with_ties,
    scott_knott,
    spearman,
    split_is_distinct,
)

from oracles import (
    a12_brute,
    exact_permutation_p,
    mc_permutation_p,
    rank_brute,
    scott_knott_brute,
    spearman_brute,
)


# --- ranks -------------------------------------------------------------------


def test_rank_basic_and_ties():
    assert rank_with_ties([10.0, 20.0, 30.0]) == [1.0, 2.0, 3.0]
    assert rank_with_ties([30.0, 10.0, 20.0]) == [3.0, 1.0, 2.0]
    assert rank_with_ties([10.0, 20.0, 20.0, 30.0]) == [1.0, 2.5, 2.5, 4.0]
    assert rank_with_ties([5.0, 5.0, 5.0]) == [2.0, 2.0, 2.0]
    assert rank_with_ties([7.0]) == [1.0]
    with pytest.raises(ValueError):
        rank_with_ties([])


def test_rank_matches_oracle():
    rng = np.random.default_rng(101)
    for _ in range(300):
        n = int(rng.integers(1, 20))
        values = [float(v) for v in rng.integers(0, 6, n)]
        assert rank_with_ties(values) == rank_brute(values)


def test_rank_sum_invariant():
    rng = np.random.default_rng(102)
    for _ in range(100):
        n = int(rng.integers(1, 30))
        values = [float(v) for v in rng.integers(0, 5, n)]
        assert sum(rank_with_ties(values)) == pytest.approx(n * (n + 1) / 2)


# --- spearman ----------------------------------------------------------------


def test_spearman_perfect_monotone():
    score = spearman([1.0, 2.0, 3.0, 4.0, 5.0], [2.0, 4.0, 8.0, 16.0, 32.0])
    assert score.rho == pytest.approx(1.0)
    # only the two extreme orderings of five distinct ranks reach |rho| = 1
    assert score.p_value == pytest.approx(2 / math.factorial(5))
    reverse = spearman([1.0, 2.0, 3.0, 4.0, 5.0], [5.0, 4.0, 3.0, 2.0, 1.0])
    assert reverse.rho == pytest.approx(-1.0)
    assert reverse.p_value == score.p_value


def test_spearman_constant_vector_convention():
    assert spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]) == SupportScore(0.0, 1.0, 3)
    assert spearman([1.0, 2.0, 3.0], [7.0, 7.0, 7.0]) == SupportScore(0.0, 1.0, 3)
    assert spearman([2.0, 2.0], [3.0, 3.0]).rho == 0.0


def test_spearman_monotone_transform_invariance():
    rng = np.random.default_rng(103)
    for _ in range(50):
        n = int(rng.integers(3, 12))
        x = [float(v) for v in rng.uniform(0.1, 10.0, n)]
        y = [float(v) for v in rng.uniform(0.1, 10.0, n)]
        base = spearman(x, y, exact_p=False).rho
        assert spearman([math.sqrt(v) for v in x], y, exact_p=False).rho == pytest.approx(base)
        assert spearman(x, [math.log(v) for v in y], exact_p=False).rho == pytest.approx(base)


def test_spearman_symmetry():
    rng = np.random.default_rng(104)
    for _ in range(50):
        n = int(rng.integers(3, 10))
        x = [float(v) for v in rng.integers(0, 8, n)]
        y = [float(v) for v in rng.integers(0, 8, n)]
        assert spearman(x, y).rho == pytest.approx(spearman(y, x).rho)


def test_spearman_rho_matches_oracle_with_ties():
    rng = np.random.default_rng(105)
    for _ in range(200):
        n = int(rng.integers(3, 15))
        x = [float(v) for v in rng.integers(0, 5, n)]
        y = [float(v) for v in rng.integers(0, 5, n)]
        if min(x) == max(x) or min(y) == max(y):
            continue
        got = spearman(x, y, exact_p=False).rho
        assert got == pytest.approx(spearman_brute(x, y), abs=1e-12)


def test_exact_p_matches_enumeration_oracle():
    rng = np.random.default_rng(106)
    checked = 0
    while checked < 40:
        n = int(rng.integers(3, EXACT_P_MAX_N))
        x = [float(v) for v in rng.integers(0, 5, n)]
        y = [float(v) for v in rng.integers(0, 5, n)]
        if min(x) == max(x) or min(y) == max(y):
            continue
        got = spearman(x, y).p_value
        assert got == pytest.approx(exact_permutation_p(x, y), abs=1e-12)
        checked += 1


def test_exact_p_counts_tied_permutations():
    # duplicated y values make whole blocks of permutations tie exactly;
    # every tied block must count, so p stays a clean multiple of 1/n!
    x = [1.0, 2.0, 3.0, 4.0]
    y = [1.0, 1.0, 2.0, 2.0]
    score = spearman(x, y)
    assert score.p_value == pytest.approx(exact_permutation_p(x, y), abs=1e-12)
    hits = round(score.p_value * math.factorial(4))
    assert score.p_value == pytest.approx(hits / math.factorial(4))


def test_t_approximation_formula():
    x = [float(v) for v in range(10)]
    y = [0.0, 2.0, 1.0, 4.0, 3.0, 5.0, 7.0, 6.0, 9.0, 8.0]
    score = spearman(x, y)  # n = 10 > EXACT_P_MAX_N
    from scipy.stats import t as student_t

    t_stat = abs(score.rho) * math.sqrt((10 - 2) / (1 - score.rho**2))
    assert score.p_value == pytest.approx(2 * student_t.sf(t_stat, 8))


def test_t_approximation_near_exact_for_medium_n():
    rng = np.random.default_rng(107)
    worst = 0.0
    for trial in range(40):
        n = 8 + trial % 5
        x = [float(v) for v in rng.uniform(0, 1, n)]
        y = [float(v) for v in rng.uniform(0, 1, n)]
        approx = spearman(x, y, exact_p=False).p_value
        if n <= EXACT_P_MAX_N:
            reference = exact_permutation_p(x, y)
        else:
            reference = mc_permutation_p(x, y, samples=20000, seed=trial)
        worst = max(worst, abs(approx - reference))
    assert worst <= 0.05


def test_perfect_rho_gives_zero_t_p():
    x = [float(v) for v in range(12)]
    score = spearman(x, x)
    assert score.rho == 1.0
    assert score.p_value == 0.0


def test_spearman_validation():
    with pytest.raises(ValueError):
        spearman([1.0], [1.0])
    with pytest.raises(ValueError):
        spearman([1.0, 2.0], [1.0])


def test_support_score_validation():
    with pytest.raises(ValueError):
        SupportScore(1.5, 0.5, 5)
    with pytest.raises(ValueError):
        SupportScore(0.5, -0.1, 5)
    with pytest.raises(ValueError):
        SupportScore(0.5, 0.5, 1)
    score = SupportScore(0.5, 0.5, 5, belief_id="B3", release_ordinal=7)
    assert score.belief_id == "B3"


# --- a12 ---------------------------------------------------------------------


def test_a12_examples():
    assert a12([2.0, 3.0], [0.0, 1.0]) == 1.0
    assert a12([0.0, 1.0], [2.0, 3.0]) == 0.0
    assert a12([1.0, 1.0], [1.0, 1.0]) == 0.5
    assert a12([0.0, 2.0], [1.0]) == 0.5
    assert a12([1.0, 2.0, 3.0], [2.0]) == pytest.approx((1 + 0.5) / 3)


def test_a12_complement_is_exact():
    rng = np.random.default_rng(108)
    for _ in range(200):
        m = [float(v) for v in rng.integers(0, 6, int(rng.integers(1, 12)))]
        n = [float(v) for v in rng.integers(0, 6, int(rng.integers(1, 12)))]
        assert a12(m, n) + a12(n, m) == 1.0  # exact, not approximate


def test_a12_matches_pairwise_oracle():
    rng = np.random.default_rng(109)
    for _ in range(200):
        m = [float(v) for v in rng.normal(0, 1, int(rng.integers(1, 15)))]
        n = [float(v) for v in rng.normal(0, 1, int(rng.integers(1, 15)))]
        assert a12(m, n) == pytest.approx(a12_brute(m, n), abs=1e-12)


def test_a12_validation():
    with pytest.raises(ValueError):
        a12([], [1.0])
    with pytest.raises(ValueError):
        a12([1.0], [])


# --- bootstrap ---------------------------------------------------------------


def test_bootstrap_identical_samples_not_different():
    values = [5.0] * 10
    assert bootstrap_different(values, values, seed=1) is False


def test_bootstrap_separated_samples_different():
    m = [float(v) for v in range(10)]
    n = [float(v + 100) for v in range(10)]
    assert bootstrap_different(m, n, seed=1) is True


def test_bootstrap_deterministic():
    rng = np.random.default_rng(110)
    for trial in range(20):
        m = [float(v) for v in rng.normal(0, 1, 12)]
        n = [float(v) for v in rng.normal(0.8, 1, 12)]
        first = bootstrap_different(m, n, seed=trial)
        assert bootstrap_different(m, n, seed=trial) == first


def test_bootstrap_false_positive_rate():
    # both samples from one normal: reject rate must sit near alpha
    rng = np.random.default_rng(111)
    rejections = 0
    trials = 300
    for trial in range(trials):
        m = [float(v) for v in rng.normal(0, 1, 10)]
        n = [float(v) for v in rng.normal(0, 1, 10)]
        if bootstrap_different(m, n, seed=trial):
            rejections += 1
    assert rejections / trials <= 0.08


def test_bootstrap_power_on_shifted_samples():
    rng = np.random.default_rng(112)
    rejections = 0
    trials = 200
    for trial in range(trials):
        m = [float(v) for v in rng.normal(0, 1, 10)]
        n = [float(v) for v in rng.normal(2.0, 1, 10)]
        if bootstrap_different(m, n, seed=trial):
            rejections += 1
    assert rejections / trials >= 0.90


def test_bootstrap_validation():
    with pytest.raises(ValueError):
        bootstrap_different([1.0], [2.0], iterations=99)
    with pytest.raises(ValueError):
        bootstrap_different([], [1.0])


# --- split seed and keep-rule --------------------------------------------------


def test_derive_split_seed_is_stable_and_data_sensitive():
    lower, upper = [1.0, 2.0], [3.0, 4.0]
    seed = derive_split_seed(42, lower, upper)
    assert seed == derive_split_seed(42, lower, upper)
    assert 0 <= seed < 2**64
    assert seed != derive_split_seed(43, lower, upper)
    assert seed != derive_split_seed(42, upper, lower)
    assert seed != derive_split_seed(42, [1.0, 2.5], upper)


def test_split_keep_rule_requires_a12_effect():
    # bootstrap separates both orientations, so the a12 gate decides:
    # the heavy-tailed side has the higher mean but loses most pairings
    tens = [10.0] * 20
    heavy = [0.0] * 12 + [120.0] * 8
    assert a12(heavy, tens) < 0.56
    assert a12(tens, heavy) >= 0.56
    assert split_is_distinct(tens, heavy, seed=7) is False
    assert split_is_distinct(heavy, tens, seed=7) is True


def test_split_keep_rule_requires_bootstrap():
    values = [1.0, 2.0, 3.0, 4.0]
    assert split_is_distinct(values, values, seed=0) is False


# --- quartiles ---------------------------------------------------------------


def test_quartiles():
    assert quartiles([float(v) for v in range(1, 10)]) == (3.0, 5.0, 7.0)
    assert quartiles([1.0, 2.0, 3.0, 4.0]) == (1.75, 2.5, 3.25)
    assert quartiles([5.0]) == (5.0, 5.0, 5.0)
    with pytest.raises(ValueError):
        quartiles([])


# --- scott-knott -------------------------------------------------------------


def test_scott_knott_single_treatment():
    groups = scott_knott([Treatment("only", [1.0, 2.0, 3.0])])
    assert len(groups) == 1
    assert groups[0].rank == 1
    assert groups[0].treatments[0].label == "only"
    assert groups[0].treatments[0].median == 2.0


def test_scott_knott_separates_distant_treatments():
    low = Treatment("low", [1.0, 1.1, 0.9, 1.2, 0.8, 1.0, 1.1, 0.95])
    high = Treatment("high", [9.0, 9.1, 8.9, 9.2, 8.8, 9.0, 9.1, 8.95])
    groups = scott_knott([high, low], seed=3)
    assert [g.rank for g in groups] == [1, 2]
    assert groups[0].treatments[0].label == "low"  # rank 1 = lowest median
    assert groups[1].treatments[0].label == "high"


def test_scott_knott_merges_identical_treatments():
    same = [1.0, 2.0, 3.0, 4.0, 5.0]
    groups = scott_knott([Treatment("b", same), Treatment("a", same)], seed=3)
    assert len(groups) == 1
    assert [e.label for e in groups[0].treatments] == ["a", "b"]  # label tie-break


def test_scott_knott_three_bands():
    rng = np.random.default_rng(113)
    treatments = [
        Treatment("lo", [float(v) for v in rng.normal(0, 0.3, 12)]),
        Treatment("mid", [float(v) for v in rng.normal(5, 0.3, 12)]),
        Treatment("hi", [float(v) for v in rng.normal(10, 0.3, 12)]),
    ]
    groups = scott_knott(treatments, seed=5)
    assert [g.rank for g in groups] == [1, 2, 3]
    assert [g.treatments[0].label for g in groups] == ["lo", "mid", "hi"]


def test_scott_knott_group_entries_carry_median_and_iqr():
    values = [1.0, 2.0, 3.0, 4.0]
    groups = scott_knott([Treatment("t", values)])
    entry = groups[0].treatments[0]
    q1, q2, q3 = quartiles(values)
    assert entry.median == q2
    assert entry.iqr == q3 - q1


def test_scott_knott_partition_invariants():
    rng = np.random.default_rng(114)
    for trial in range(40):
        k = int(rng.integers(1, 7))
        treatments = [
            Treatment(
                f"t{i:02d}",
                [float(v) for v in rng.normal(rng.uniform(0, 4), 0.5, int(rng.integers(4, 10)))],
            )
            for i in range(k)
        ]
        groups = scott_knott(treatments, seed=trial)
        assert [g.rank for g in groups] == list(range(1, len(groups) + 1))
        labels = [e.label for g in groups for e in g.treatments]
        assert sorted(labels) == sorted(t.label for t in treatments)
        medians = [e.median for g in groups for e in g.treatments]
        assert medians == sorted(medians)


def test_scott_knott_matches_exhaustive_oracle():
    rng = np.random.default_rng(115)
    for trial in range(60):
        k = int(rng.integers(2, 7))
        treatments = [
            Treatment(
                f"t{i:02d}",
                [float(rng.uniform(0, 3) + rng.normal(0, 0.6)) for _ in range(int(rng.integers(4, 12)))],
            )
            for i in range(k)
        ]
        got = [[e.label for e in g.treatments] for g in scott_knott(treatments, seed=trial)]
        assert got == scott_knott_brute(treatments, seed=trial)


def test_scott_knott_deterministic():
    rng = np.random.default_rng(116)
    treatments = [
        Treatment(f"t{i}", [float(v) for v in rng.normal(i * 0.8, 1.0, 10)])
        for i in range(5)
    ]
    first = scott_knott(treatments, seed=9)
    second = scott_knott(treatments, seed=9)
    assert first == second


def test_scott_knott_validation():
    with pytest.raises(ValueError):
        scott_knott([])


def test_treatment_validation_and_coercion():
    with pytest.raises(ValueError):
        Treatment("empty", [])
    t = Treatment("t", [1, 2, 3])
    assert t.measurements == (1.0, 2.0, 3.0)
    assert isinstance(t.measurements[0], float)


def test_ranked_group_shape():
    group = RankedGroup(rank=1, treatments=(GroupEntry("a", 1.0, 0.5),))
    assert group.rank == 1
    assert group.treatments[0].iqr == 0.5
