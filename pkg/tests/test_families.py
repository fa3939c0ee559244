import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sral.errors import (
    BudgetExceeded,
    CoefficientTooLarge,
    DimMismatch,
    LengthMismatch,
    RadiusNotBelowOne,
    RowSumExceeded,
)
from sral.families import (
    BoundedFamily,
    SummableFamily,
    mixing_transform,
    berger_wang_gap,
    word_norm_sum,
    family_convolution,
    family_disjoint_union,
    family_power,
    family_product,
    family_sum,
    free_semigroup_lift,
    geometric_bracket,
    geometric_family,
    jsr_bracket,
    coefficient_combination,
    power_norm_table,
    tsr_bracket,
)
from sral.linalg import match_spectra, op_norm, random_complex, spectral_radius

GOLDEN = (1 + math.sqrt(5)) / 2
N3 = np.diag([1.0, 1.0], 1)


def _brute_word_sum(mats, mults, n):
    # plain re-enumeration: every word multiplied out from scratch
    total = 0.0
    for word in itertools.product(range(len(mats)), repeat=n):
        p = np.eye(mats[0].shape[0], dtype=complex)
        w = 1
        for i in word:
            p = p @ mats[i]
            w *= mults[i]
        total += w * np.linalg.norm(p, 2)
    return total


def _random_family(rng, k, d, mult=False):
    mats = [random_complex(rng, (d, d)) for _ in range(k)]
    m = [int(x) for x in rng.integers(1, 4, k)] if mult else None
    return SummableFamily(mats, m)


def test_eta_examples():
    assert word_norm_sum(SummableFamily([np.eye(2)])) == pytest.approx(1.0)
    a = 2 * np.eye(2)
    assert word_norm_sum(SummableFamily([a], [3])) == pytest.approx(6.0)
    assert word_norm_sum(SummableFamily([np.diag([1.0, 0]), np.diag([0, 2.0])])) == pytest.approx(3.0)


def test_family_product_examples():
    rng = np.random.default_rng(0)
    M = _random_family(rng, 3, 2)
    P = family_product(M, SummableFamily([np.eye(2)]))
    assert np.allclose(sorted(map(op_norm, P.members)), sorted(map(op_norm, M.members)))
    a, b = random_complex(rng, (2, 2)), random_complex(rng, (2, 2))
    assert np.allclose(family_product(SummableFamily([a]), SummableFamily([b])).members[0], a @ b)
    A, B = _random_family(rng, 2, 2), _random_family(rng, 2, 2)
    four = sum(op_norm(x @ y) for x in A.members for y in B.members)
    assert word_norm_sum(family_product(A, B)) == pytest.approx(four)


def test_union_and_convolution_examples():
    rng = np.random.default_rng(1)
    a, b = random_complex(rng, (2, 2)), random_complex(rng, (2, 2))
    U = family_disjoint_union(SummableFamily([a]), SummableFamily([b]))
    assert len(U) == 2 and word_norm_sum(U) == pytest.approx(op_norm(a) + op_norm(b))
    C = family_convolution(SummableFamily([a]), SummableFamily([b]))
    assert len(C) == 1 and np.allclose(C.members[0], a @ b)
    a1, a2, b1, b2 = (random_complex(rng, (2, 2)) for _ in range(4))
    C = family_convolution(SummableFamily([a1, a2]), SummableFamily([b1, b2]))
    assert np.allclose(C.members, [a1 @ b1, a1 @ b2 + a2 @ b1, a2 @ b2])


def test_family_ops_reject_mismatches():
    with pytest.raises(DimMismatch):
        family_product(SummableFamily([np.eye(2)]), SummableFamily([np.eye(3)]))
    with pytest.raises(LengthMismatch):
        family_sum(SummableFamily([np.eye(2)]), SummableFamily([np.eye(2), np.eye(2)]))


def test_power_table_examples():
    t = power_norm_table(SummableFamily([0.7 * np.eye(3)]), 6)
    assert np.allclose(t.word_sums, 0.7 ** np.arange(1, 7))
    t = power_norm_table(SummableFamily([N3]), 5)
    assert np.all(t.word_sums[2:] == 0)


def test_power_table_matches_brute_force():
    rng = np.random.default_rng(2)
    M = _random_family(rng, 2, 2, mult=True)
    t = power_norm_table(M, 6)
    for n in range(1, 7):
        ref = _brute_word_sum(list(M.members), M.multiplicities, n)
        assert t.word_sums[n - 1] == pytest.approx(ref, rel=1e-12)


def test_power_table_respects_budget():
    M = SummableFamily([np.eye(2)] * 3)
    with pytest.raises(BudgetExceeded):
        power_norm_table(M, 10, budget=1000)


def test_tsr_examples():
    br = tsr_bracket(SummableFamily([0.5 * np.eye(2)]), 6)
    assert br.lower == pytest.approx(0.5) and br.upper == pytest.approx(0.5)
    br = tsr_bracket(SummableFamily([N3]), 5)
    assert br.lower == 0 and br.upper == 0


def test_tsr_commuting_projections_against_word_count():
    # mixed words vanish, so exactly two nonzero words of each length
    P = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    depth = 6
    counts = [sum(1 for w in itertools.product(range(2), repeat=n) if len(set(w)) == 1) for n in range(1, depth + 1)]
    t = power_norm_table(SummableFamily(P), depth)
    assert np.allclose(t.word_sums, counts)
    br = tsr_bracket(SummableFamily(P), depth)
    ref_upper = min(c ** (1 / n) for n, c in enumerate(counts, 1))
    assert br.upper == pytest.approx(ref_upper)
    assert br.contains(1.0)


def test_jsr_single_matrix():
    rng = np.random.default_rng(3)
    a = random_complex(rng, (4, 4))
    br = jsr_bracket([a], delta=1e-4)
    assert br.certified and br.lower <= spectral_radius(a) * (1 + 1e-12) <= br.upper
    assert br.width <= 1e-4 + 1e-15


def test_jsr_diagonal_pair():
    br = jsr_bracket([np.diag([2.0, 0.0]), np.diag([0.0, 3.0])])
    assert br.lower == pytest.approx(3.0) and br.contains(3.0)


def test_jsr_golden_pair_against_deep_radius():
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    K = [a, a.T]
    br = jsr_bracket(K, delta=1e-3, budget=10**6)
    assert br.certified and br.contains(GOLDEN)
    # independent oracle: the best product radius over all words of length 20
    t = power_norm_table(SummableFamily(K), 20)
    assert t.gen_radii[-1] == pytest.approx(GOLDEN, rel=1e-9)


def test_jsr_is_deterministic():
    rng = np.random.default_rng(4)
    K = [random_complex(rng, (3, 3)) for _ in range(2)]
    assert jsr_bracket(K, 1e-2) == jsr_bracket(K, 1e-2)


def test_jsr_budget_gives_uncertified_bracket():
    rng = np.random.default_rng(5)
    K = [random_complex(rng, (3, 3)) for _ in range(3)]
    br = jsr_bracket(K, delta=1e-6, budget=30)
    assert not br.certified
    full = jsr_bracket(K, delta=1e-3)
    assert br.lower <= full.upper and full.lower <= br.upper


def test_berger_wang_examples():
    rng = np.random.default_rng(6)
    a = random_complex(rng, (3, 3))
    r, upper, gap = berger_wang_gap([a], 12)
    assert gap >= -1e-12
    assert gap <= op_norm(np.linalg.matrix_power(a, 12)) ** (1 / 12) - spectral_radius(a) + 1e-12
    u = np.linalg.qr(random_complex(rng, (3, 3)))[0]
    K = [u @ np.diag(random_complex(rng, 3)) @ u.conj().T for _ in range(2)]
    assert abs(berger_wang_gap(K, 1)[2]) <= 1e-9


def test_mixing_transform_examples():
    rng = np.random.default_rng(7)
    M = _random_family(rng, 2, 2)
    same = mixing_transform(M, np.eye(2))
    assert np.allclose(same.members, M.members)
    half = mixing_transform(M, np.array([[0.5], [0.5]]))
    assert np.allclose(half.members[0], (M.members[0] + M.members[1]) / 2)
    assert word_norm_sum(half) <= word_norm_sum(M) + 1e-12
    with pytest.raises(RowSumExceeded):
        mixing_transform(M, np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_mixing_transform_word_sums_against_brute_force():
    rng = np.random.default_rng(8)
    M = _random_family(rng, 3, 2)
    T = rng.uniform(0, 1, (3, 3))
    T = T / T.sum(axis=1, keepdims=True)
    N = mixing_transform(M, T)
    for k in range(1, 5):
        assert _brute_word_sum(list(N.members), [1] * 3, k) <= _brute_word_sum(list(M.members), [1] * 3, k) * (1 + 1e-9)


def test_coefficient_combination_examples():
    M = SummableFamily([0.5 * np.eye(2)])
    assert np.allclose(coefficient_combination(M, [0]), 0)
    assert spectral_radius(coefficient_combination(M, [1])) == pytest.approx(0.5)
    rng = np.random.default_rng(9)
    nil = SummableFamily([np.triu(random_complex(rng, (3, 3)), 1) for _ in range(2)])
    for t in ([1, -1], [0.3, 0.9j]):
        assert spectral_radius(coefficient_combination(nil, t)) < 1e-5
    with pytest.raises(CoefficientTooLarge):
        coefficient_combination(M, [2.0])


def test_geometric_examples():
    rep = geometric_bracket(SummableFamily([np.array([[0.5]])]), m_max=25, depth=8)
    assert rep.limit.contains(1.0, 1e-12)
    rep = geometric_bracket(SummableFamily([np.array([[0.25]])]), m_max=20, depth=8)
    assert rep.limit.contains(1 / 3, 1e-12)
    rep = geometric_bracket(SummableFamily([N3]), m_max=5, depth=4)
    assert rep.limit.upper == 0 and rep.truncated.upper == 0
    with pytest.raises(RadiusNotBelowOne):
        geometric_family(SummableFamily([np.eye(2)]), 3)


def test_geometric_word_sums_against_explicit_family():
    rng = np.random.default_rng(10)
    M = SummableFamily([0.3 * random_complex(rng, (2, 2)) for _ in range(2)])
    G = geometric_family(M, 3)
    rep = geometric_bracket(M, m_max=3, depth=3)
    for n in range(1, 4):
        assert rep.word_sums[n - 1] == pytest.approx(word_norm_sum(family_power(G, n)), rel=1e-10)


def test_free_semigroup_examples():
    rng = np.random.default_rng(11)
    M = _random_family(rng, 2, 2, mult=True)
    assert free_semigroup_lift(M, 1).l1_norm() == pytest.approx(word_norm_sum(M))
    a = random_complex(rng, (3, 3))
    lift = free_semigroup_lift(SummableFamily([a]), 4)
    assert len(lift) == 1
    assert lift.l1_norm() == pytest.approx(op_norm(np.linalg.matrix_power(a, 4)))
    M2 = _random_family(rng, 2, 2)
    lift = free_semigroup_lift(M2, 3)
    assert len(lift) == 8
    assert lift.l1_norm() == pytest.approx(power_norm_table(M2, 3).word_sums[2], rel=1e-12)


def test_bounded_family_norm():
    K = BoundedFamily([np.eye(2), 2 * np.eye(2)])
    assert K.norm == pytest.approx(2.0)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_word_sums_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    M = _random_family(rng, 2, 2, mult=True)
    e = power_norm_table(M, 6).word_sums
    for n in range(1, 6):
        for m in range(1, 7 - n):
            assert e[n + m - 1] <= e[n - 1] * e[m - 1] * (1 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(2, 3))
def test_power_bracket_overlaps_bracket_power(seed, m):
    rng = np.random.default_rng(seed)
    M = _random_family(rng, 2, 2)
    b = tsr_bracket(M, 6)
    bm = tsr_bracket(family_power(M, m), 3)
    lo, hi = max(b.lower**m, bm.lower), min(b.upper**m, bm.upper)
    assert lo <= hi * (1 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_commuting_families_word_sum_bound(seed):
    rng = np.random.default_rng(seed)
    u = np.linalg.qr(random_complex(rng, (3, 3)))[0]
    M = SummableFamily([u @ np.diag(random_complex(rng, 3)) @ u.conj().T for _ in range(2)])
    N = SummableFamily([u @ np.diag(random_complex(rng, 3)) @ u.conj().T for _ in range(2)])
    mn, nm = family_product(M, N), family_product(N, M)
    assert match_spectra(
        np.array([np.trace(x) for x in mn.members]), np.array([np.trace(x) for x in nm.members]), 1e-12
    )
    for n in range(1, 4):
        assert word_norm_sum(family_power(nm, n)) <= word_norm_sum(family_power(N, n)) * word_norm_sum(family_power(M, n)) * (1 + 1e-12)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_equivalent_norm_brackets_intersect(seed):
    rng = np.random.default_rng(seed)
    d = 3
    M = _random_family(rng, 2, d)
    b_op = tsr_bracket(M, d)
    b_fro = tsr_bracket(M, d, norm="fro")
    assert b_op.intersects(b_fro)
    assert b_fro.upper <= math.sqrt(d) * power_norm_table(M, 1).word_sums[0] + 1e-12


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_scalar_combination_radius_bounded_by_joint_radius(seed):
    rng = np.random.default_rng(seed)
    K = [random_complex(rng, (2, 2)) for _ in range(2)]
    lam = random_complex(rng, 2)
    u = jsr_bracket(K, delta=1e-2).upper
    comb = lam[0] * K[0] + lam[1] * K[1]
    assert spectral_radius(comb) <= np.sum(np.abs(lam)) * u * (1 + 1e-12)
