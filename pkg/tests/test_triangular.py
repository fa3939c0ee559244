import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sral.errors import ChainNotInvariant, NotNilFamily, RadicalHypothesisViolated, TooFewFactors
from sral.linalg import op_norm, random_complex
from sral.triangular import (
    chain_block_bounds,
    chain_product_check,
    invariance_residual,
    is_nil_family,
    lowering_residual,
    product_decay,
    subspace_product_bound,
    triangularize,
)

E12 = np.array([[0.0, 1.0], [0.0, 0.0]])
N3 = np.diag([1.0, 1.0], 1)
N4 = np.diag(np.ones(3), 1)


def _principal_angle_sines(u, v):
    # sines of principal angles between column spaces of orthonormal u, v
    qu, _ = np.linalg.qr(u)
    qv, _ = np.linalg.qr(v)
    c = np.clip(np.linalg.svd(qu.conj().T @ qv, compute_uv=False), 0, 1)
    return np.sqrt(1 - c**2)


def test_is_nil_family_examples():
    assert is_nil_family([E12])
    assert is_nil_family([N3, N3 @ N3])
    assert not is_nil_family([np.eye(2)])
    # each generator is nilpotent but E12 + E21 is not
    assert not is_nil_family([E12, E12.T])


def test_jordan_chain():
    chain = triangularize([N3])
    assert len(chain) == 2
    e1 = np.array([[1.0], [0.0], [0.0]])
    e12 = np.eye(3)[:, :2]
    assert np.max(_principal_angle_sines(chain.bases[0], e1)) < 1e-12
    assert np.max(_principal_angle_sines(chain.bases[1], e12)) < 1e-12
    assert lowering_residual(N3, chain) < 1e-12


def test_commuting_strictly_upper_pair_is_lowered():
    rng = np.random.default_rng(0)
    a = np.triu(random_complex(rng, (4, 4)), 1)
    b = a @ a + 2 * a
    chain = triangularize([a, b])
    for g in (a, b, a @ b):
        assert lowering_residual(g, chain) < 1e-9


def test_chain_is_strictly_increasing_and_proper():
    rng = np.random.default_rng(1)
    gens = [np.triu(random_complex(rng, (5, 5)), 1) for _ in range(3)]
    chain = triangularize(gens)
    dims = [b.shape[1] for b in chain.bases]
    assert dims == sorted(set(dims)) and dims[-1] < 5
    for b in chain.bases:
        assert np.allclose(b.conj().T @ b, np.eye(b.shape[1]), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_conjugated_family_chain_is_covariant(seed):
    rng = np.random.default_rng(seed)
    d = 4
    gens = [np.triu(random_complex(rng, (d, d)), 1) for _ in range(2)]
    while True:
        s = random_complex(rng, (d, d)) + 2 * np.eye(d)
        if np.linalg.cond(s) <= 1e3:
            break
    sinv = np.linalg.inv(s)
    base = triangularize(gens)
    conj = triangularize([s @ g @ sinv for g in gens])
    assert len(base) == len(conj)
    for u, v in zip(base.bases, conj.bases):
        assert np.max(_principal_angle_sines(s @ u, v)) <= 1e-7
    for g in gens:
        assert lowering_residual(s @ g @ sinv, conj) < 1e-7


def test_triangularize_rejects_non_nil():
    with pytest.raises(NotNilFamily):
        triangularize([E12, E12.T])
    with pytest.raises(NotNilFamily):
        triangularize([np.eye(2)], bounded=[E12])


def test_bounded_elements_preserve_radical_chain():
    rng = np.random.default_rng(2)
    f = np.triu(random_complex(rng, (4, 4)))
    chain = triangularize([N4], bounded=[f])
    assert lowering_residual(N4, chain) < 1e-9
    assert invariance_residual(f, chain) < 1e-9


def test_chain_product_zero_and_square_zero():
    chain = triangularize([N3])
    rep = chain_product_check([np.zeros((3, 3))] * 3, chain)
    assert rep["product_norm"] == 0 and rep["holds"]
    n = np.zeros((4, 4))
    n[0, 2] = n[1, 3] = 1.0
    chain = triangularize([n])
    rep = chain_product_check([n, n], chain)
    assert rep["product_norm"] == 0 and rep["holds"] and rep["pair_bound_holds"]


def test_chain_product_random_triangular_products():
    rng = np.random.default_rng(3)
    d = 4
    chain = triangularize([N4])
    for _ in range(30):
        ops = [np.triu(random_complex(rng, (d, d))) for _ in range(int(rng.integers(3, 7)))]
        rep = chain_product_check(ops, chain)
        oracle = op_norm(np.linalg.multi_dot(ops))
        assert rep["product_norm"] == pytest.approx(oracle, rel=1e-12)
        bb = chain_block_bounds(ops, chain)
        m, k = len(ops), len(chain)
        assert rep["bound"] == pytest.approx(2.0**m * math.comb(m, k) * bb.max_norm**k * bb.max_gap_norm ** (m - k))
        assert rep["holds"] and rep["pair_bound_holds"]


def test_chain_product_rejects_short_products_and_moving_operators():
    chain = triangularize([N4])
    with pytest.raises(TooFewFactors):
        chain_product_check([N4], chain)
    with pytest.raises(ChainNotInvariant):
        chain_product_check([N4.T] * 3, chain)


def test_subspace_product_bound_example():
    rng = np.random.default_rng(4)
    a, b = np.triu(random_complex(rng, (3, 3))), np.triu(random_complex(rng, (3, 3)))
    w = np.eye(3)[:, :1]
    lhs, rhs = subspace_product_bound(a, b, w)
    assert lhs == pytest.approx(op_norm(a @ b)) and lhs <= rhs


def test_decay_pure_nilpotent_vanishes_past_nil_index():
    curve = product_decay([N4], [], 0.5, 6)
    assert curve.nil_index == 4
    assert np.all(curve.roots[:3] == 1.0)
    assert np.all(curve.max_norms[3:] == 0.0)


def test_decay_with_identity_factors():
    curve = product_decay([N4], [np.eye(4)], 0.5, 12)
    # N^j has norm one while ceil(m / 2) <= 3
    assert np.allclose(curve.roots[:6], 1.0)
    assert np.all(curve.roots[6:] == 0.0)
    assert curve.roots[-1] <= 0.5 * curve.roots[1]
    # words with exactly ceil(m/2) K-factors: C(m, ceil(m/2)) of them at least
    for m, c in zip(curve.m[:6], curve.counts[:6]):
        assert c >= math.comb(int(m), math.ceil(m / 2))
    assert curve.decay_trend


def test_decay_three_by_three():
    rng = np.random.default_rng(5)
    f = np.triu(random_complex(rng, (3, 3)))
    curve = product_decay([N3], [f], 1 / 3, 12)
    assert curve.nil_index == 3
    assert np.all(curve.roots[6:] == 0.0)
    assert curve.decay_trend
    lines = curve.to_csv().splitlines()
    assert lines[0] == "m,count_enumerated,max_norm,root" and len(lines) == 13


def test_decay_rejects_element_outside_radical():
    with pytest.raises(RadicalHypothesisViolated):
        product_decay([np.eye(2)], [], 0.5, 3)
    with pytest.raises(ValueError):
        product_decay([E12], [], 1.5, 3)
