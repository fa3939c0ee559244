import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sral.errors import EigenvalueOnContour, InvalidP, NonSquare, ShapeMismatch
from sral.linalg import (
    Contour,
    SpectrumSet,
    kron_lift,
    match_spectra,
    nuclear_norm,
    one_sided_hausdorff,
    op_norm,
    projection_rank,
    random_complex,
    riesz_projection,
    schatten_norm,
    spectrum,
    subspace_distance,
    unvec,
    vec,
)


def _op_oracle(a):
    # largest eigenvalue of a* a, independent of the SVD path
    return float(np.sqrt(np.max(np.linalg.eigvalsh(a.conj().T @ a))))


def test_op_norm_examples():
    assert op_norm(np.eye(3)) == pytest.approx(1.0)
    assert op_norm(np.zeros((2, 2))) == 0.0
    assert op_norm(np.diag([3, -4j])) == pytest.approx(4.0)


def test_op_norm_matches_gram_eigenvalues():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = random_complex(rng, tuple(rng.integers(1, 6, 2)))
        assert op_norm(a) == pytest.approx(_op_oracle(a), rel=1e-12)


def test_spectrum_examples():
    assert np.allclose(spectrum(np.diag([1.0, 2.0])).sorted(), [1, 2])
    assert np.allclose(spectrum(np.array([[0, 1], [0, 0]])).eigenvalues, 0)
    ev = spectrum(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert match_spectra(ev.eigenvalues, [1j, -1j], 1e-12)


def test_spectrum_rejects_non_square():
    with pytest.raises(NonSquare):
        spectrum(np.zeros((2, 3)))


def test_schatten_examples():
    assert schatten_norm(np.diag([1.0, 0.0]), 0.3) == pytest.approx(1.0)
    assert schatten_norm(np.eye(2), 1) == pytest.approx(2.0)
    assert schatten_norm(np.diag([3.0, 4.0]), 0.5) == pytest.approx((3**0.5 + 2) ** 2, rel=1e-12)
    assert schatten_norm(np.diag([3.0, 4.0]), np.inf) == pytest.approx(4.0)


@pytest.mark.parametrize("p", [0.0, -1.0])
def test_schatten_rejects_nonpositive_p(p):
    with pytest.raises(InvalidP):
        schatten_norm(np.eye(2), p)


def test_schatten_against_gram_oracle():
    rng = np.random.default_rng(1)
    for p in (1.0, 0.5, 0.25, 2.0):
        a = random_complex(rng, (4, 3))
        s = np.sqrt(np.clip(np.linalg.eigvalsh(a.conj().T @ a), 0, None))
        assert schatten_norm(a, p) == pytest.approx(np.sum(s**p) ** (1 / p), rel=1e-10)


def test_rank_one_quasinorm_is_operator_norm():
    rng = np.random.default_rng(2)
    u, v = random_complex(rng, 4), random_complex(rng, 3)
    x = np.outer(u, v.conj())
    for p in (1.0, 0.5, 0.1):
        assert schatten_norm(x, p) == pytest.approx(op_norm(x), rel=1e-12)


def test_kron_lift_examples():
    assert np.allclose(kron_lift(np.eye(2), np.eye(3)), np.eye(6))
    assert np.allclose(kron_lift(np.array([[2.0]]), np.array([[3.0]])), [[6.0]])
    rng = np.random.default_rng(3)
    a, b = random_complex(rng, (3, 3)), random_complex(rng, (2, 2))
    assert np.trace(kron_lift(a, b)) == pytest.approx(np.trace(a) * np.trace(b))


def test_kron_lift_acts_as_two_sided_multiplication():
    rng = np.random.default_rng(4)
    a, b, x = random_complex(rng, (3, 3)), random_complex(rng, (2, 2)), random_complex(rng, (3, 2))
    assert np.allclose(unvec(kron_lift(a, b) @ vec(x), 3, 2), a @ x @ b)


def test_kron_lift_spectrum_is_pointwise_products():
    rng = np.random.default_rng(5)
    a, b = random_complex(rng, (3, 3)), random_complex(rng, (2, 2))
    prods = (np.linalg.eigvals(a)[:, None] * np.linalg.eigvals(b)[None, :]).ravel()
    assert match_spectra(spectrum(kron_lift(a, b)).eigenvalues, prods, 1e-7)


def test_riesz_diagonal_example():
    p = riesz_projection(np.diag([1.0, 3.0]), Contour(1.0, 0.5))
    assert np.allclose(p, np.diag([1.0, 0.0]), atol=1e-12)


def test_riesz_enclosing_everything_is_identity():
    rng = np.random.default_rng(6)
    a = random_complex(rng, (4, 4))
    r = 2 * max(abs(np.linalg.eigvals(a)))
    assert np.allclose(riesz_projection(a, Contour(0.0, r)), np.eye(4), atol=1e-9)


def test_riesz_matches_explicit_eigenprojection():
    a = np.array([[1.0, 1.0], [0.0, 3.0]])
    p = riesz_projection(a, Contour(1.0, 0.5))
    # projection onto the 1-eigenspace along the 3-eigenspace
    oracle = (a - 3 * np.eye(2)) / (1 - 3)
    assert np.allclose(p, oracle, atol=1e-12)
    assert projection_rank(p) == 1
    assert np.allclose(p @ a, a @ p, atol=1e-12)


def test_riesz_rejects_eigenvalue_on_contour():
    with pytest.raises(EigenvalueOnContour):
        riesz_projection(np.diag([1.0, 1.5]), Contour(1.0, 0.5))


def test_riesz_ranks_complement():
    rng = np.random.default_rng(7)
    ev = np.array([0.0, 0.2, 4.0, 4.3, 4.1])
    s = random_complex(rng, (5, 5)) + 3 * np.eye(5)
    a = s @ np.diag(ev) @ np.linalg.inv(s)
    p = riesz_projection(a, Contour(4.0, 1.0))
    assert np.linalg.norm(p @ p - p) < 1e-8
    assert projection_rank(p) + projection_rank(np.eye(5) - p) == 5
    assert projection_rank(p) == 3


def test_subspace_distance_examples():
    e11 = np.diag([1.0, 0.0])
    assert subspace_distance(np.eye(2), [e11]) == pytest.approx(1.0)
    assert subspace_distance(2 * e11, [e11]) < 1e-12
    x = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert subspace_distance(x, []) == pytest.approx(np.linalg.norm(x))
    with pytest.raises(ShapeMismatch):
        subspace_distance(np.eye(2), [np.eye(3)])


def test_one_sided_hausdorff_is_directional():
    assert one_sided_hausdorff([0.0], [0.0, 5.0]) == 0.0
    assert one_sided_hausdorff([0.0, 5.0], [0.0]) == pytest.approx(5.0)


def test_spectrum_set_matches_with_tolerance():
    s = SpectrumSet(np.array([1.0, 2.0]))
    assert s.matches(SpectrumSet(np.array([2.0 + 1e-9, 1.0])))
    assert not s.matches(SpectrumSet(np.array([2.0, 1.1])))


matrices = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s))


@settings(max_examples=40, deadline=None)
@given(matrices, st.sampled_from([1.0, 0.75, 0.5, 0.25]))
def test_quasinorm_p_triangle(rng, p):
    x, y = random_complex(rng, (3, 4)), random_complex(rng, (3, 4))
    lhs = schatten_norm(x + y, p) ** p
    assert lhs <= (schatten_norm(x, p) ** p + schatten_norm(y, p) ** p) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(matrices, st.sampled_from([1.0, 0.5, 0.25]))
def test_quasinorm_ideal_property_and_ordering(rng, p):
    a, x, b = random_complex(rng, (3, 3)), random_complex(rng, (3, 2)), random_complex(rng, (2, 2))
    assert schatten_norm(a @ x @ b, p) <= op_norm(a) * schatten_norm(x, p) * op_norm(b) * (1 + 1e-12)
    assert op_norm(x) <= schatten_norm(x, p) * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(matrices)
def test_op_norm_submultiplicative(rng):
    a, b = random_complex(rng, (3, 4)), random_complex(rng, (4, 2))
    assert op_norm(a @ b) <= op_norm(a) * op_norm(b) * (1 + 1e-12)


def test_nuclear_norm_is_schatten_one():
    x = np.array([[1.0, 2.0], [0.0, 1.0]])
    assert nuclear_norm(x) == pytest.approx(schatten_norm(x, 1.0))
