"""Elementary operators ``x -> sum a_i x b_i`` on rectangular matrix spaces.

The operator acts on ``m x n`` matrices with left coefficients ``m x m`` and
right coefficients ``n x n``.  Its matrix on column-major vectorizations is
``sum kron(b_i.T, a_i)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, NodeCountZero, ShapeMismatch
from .linalg import (
    SpectrumSet,
    as_cmatrix,
    one_sided_hausdorff,
    op_norm,
    spectrum,
    unvec,
    vec,
)
from .radical import (
    MatrixAlgebra,
    algebra_closure,
    engel_check,
    jacobson_radical,
)


@dataclass(frozen=True, eq=False)
class ElementaryOperator:
    """Finite sum of two-sided multiplications on ``m x n`` matrices.

    ``compact_flags[i]`` marks which of ``(a_i, b_i)`` is designated as
    belonging to the small ideal.
    """

    m: int
    n: int
    terms: tuple
    compact_flags: tuple = ()

    def __init__(self, m: int, n: int, terms: Sequence, compact_flags: Sequence | None = None):
        if not terms:
            raise InputError("an elementary operator needs at least one term")
        clean = []
        for a, b in terms:
            a = as_cmatrix(a, square=True)
            b = as_cmatrix(b, square=True)
            if a.shape[0] != m or b.shape[0] != n:
                raise ShapeMismatch(
                    f"term coefficients {a.shape}, {b.shape} do not act on {m}x{n} matrices"
                )
            clean.append((a, b))
        flags = tuple((False, False) for _ in clean) if compact_flags is None else tuple(
            (bool(f[0]), bool(f[1])) for f in compact_flags
        )
        if len(flags) != len(clean):
            raise InputError("one flag pair per term is required")
        object.__setattr__(self, "m", int(m))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "terms", tuple(clean))
        object.__setattr__(self, "compact_flags", flags)

    @classmethod
    def single(cls, a, b) -> "ElementaryOperator":
        a, b = as_cmatrix(a), as_cmatrix(b)
        return cls(a.shape[0], b.shape[0], [(a, b)])

    @property
    def dims(self) -> tuple[int, int]:
        return (self.m, self.n)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "ElementaryOperator") -> "ElementaryOperator":
        _same_dims(self, other)
        return ElementaryOperator(
            self.m, self.n, self.terms + other.terms, self.compact_flags + other.compact_flags
        )

    def __matmul__(self, other: "ElementaryOperator") -> "ElementaryOperator":
        """Composition ``self o other``: terms ``(a c, d b)``."""
        _same_dims(self, other)
        terms, flags = [], []
        for (a, b), fa in zip(self.terms, self.compact_flags):
            for (c, d), fc in zip(other.terms, other.compact_flags):
                terms.append((a @ c, d @ b))
                flags.append((fa[0] or fc[0], fa[1] or fc[1]))
        return ElementaryOperator(self.m, self.n, terms, flags)

    def scaled(self, c: complex) -> "ElementaryOperator":
        return ElementaryOperator(
            self.m, self.n, [(c * a, b) for a, b in self.terms], self.compact_flags
        )

    def left_coefficients(self) -> list[np.ndarray]:
        return [a for a, _ in self.terms]

    def right_coefficients(self) -> list[np.ndarray]:
        return [b for _, b in self.terms]


def _same_dims(u: ElementaryOperator, v: ElementaryOperator):
    if u.dims != v.dims:
        raise ShapeMismatch(f"operators act on {u.dims} and {v.dims} matrices")


def elem_apply(T: ElementaryOperator, x) -> np.ndarray:
    x = as_cmatrix(x)
    if x.shape != T.dims:
        raise ShapeMismatch(f"operand {x.shape} does not match {T.dims}")
    out = np.zeros(T.dims, dtype=complex)
    for a, b in T.terms:
        out += a @ x @ b
    return out


def elem_matrix(T: ElementaryOperator) -> np.ndarray:
    A = np.array([a for a, _ in T.terms])
    B = np.array([b for _, b in T.terms])
    # sum of kron(b.T, a) in one contraction
    return np.einsum("kij,kac->jaic", B, A).reshape(T.m * T.n, T.m * T.n)


def elem_spectrum(T: ElementaryOperator, match_tolerance: float = 1e-7) -> SpectrumSet:
    return spectrum(elem_matrix(T), match_tolerance)


def elem_norm_bound(T: ElementaryOperator) -> float:
    """Representation bound ``sum |a_i| |b_i|`` for the given terms."""
    return float(sum(op_norm(a) * op_norm(b) for a, b in T.terms))


def elem_trace(T: ElementaryOperator) -> complex:
    """``sum trace(a_i) trace(b_i)``, the trace on the ``mn``-dim space."""
    return complex(sum(np.trace(a) * np.trace(b) for a, b in T.terms))


def minkowski_sum(x, y) -> np.ndarray:
    return (np.asarray(x)[:, None] + np.asarray(y)[None, :]).ravel()


def pointwise_products(x, y) -> np.ndarray:
    return (np.asarray(x)[:, None] * np.asarray(y)[None, :]).ravel()


def _commutator_residual(R, xs, ys) -> float:
    worst = 0.0
    for x in xs:
        for y in ys:
            c = x @ y - y @ x
            if np.any(c):
                worst = max(worst, R.distance(c))
    return worst


def spectral_inclusion_check(
    u: ElementaryOperator, v: ElementaryOperator, tol: float = 1e-7
) -> dict:
    """Test ``sigma(u+v) in sigma(u)+sigma(v)`` and ``sigma(uv) in sigma(u)sigma(v)``.

    The hypothesis is that commutators of left coefficients of ``u`` with
    those of ``v`` (and likewise on the right) lie in the radical of the
    algebra generated by all coefficients.  For a square bimodule the left
    and right coefficients generate one algebra; otherwise each side has its
    own.  Distances are one-sided Hausdorff distances.
    """
    _same_dims(u, v)
    la, lc = u.left_coefficients(), v.left_coefficients()
    rb, rd = u.right_coefficients(), v.right_coefficients()
    if u.m == u.n:
        R = jacobson_radical(algebra_closure(la + lc + rb + rd, unital=True))
        Rl = Rr = R
    else:
        Rl = jacobson_radical(algebra_closure(la + lc, unital=True))
        Rr = jacobson_radical(algebra_closure(rb + rd, unital=True))
    scale = max(1.0, max(op_norm(x) for x in la + lc + rb + rd) ** 2)
    hyp_res = max(_commutator_residual(Rl, la, lc), _commutator_residual(Rr, rb, rd))
    hypothesis = hyp_res <= tol * scale
    su = elem_spectrum(u).eigenvalues
    sv = elem_spectrum(v).eigenvalues
    s_sum = elem_spectrum(u + v).eigenvalues
    s_prod = elem_spectrum(u @ v).eigenvalues
    d_sum = one_sided_hausdorff(s_sum, minkowski_sum(su, sv))
    d_prod = one_sided_hausdorff(s_prod, pointwise_products(su, sv))
    inclusion = d_sum <= tol and d_prod <= tol
    return {
        "hypothesis_satisfied": bool(hypothesis),
        "hypothesis_residual": float(hyp_res),
        "sum_distance": float(d_sum),
        "product_distance": float(d_prod),
        "inclusion_holds": bool(inclusion),
        "passed": bool(inclusion or not hypothesis),
        "tol": float(tol),
    }


def strong_engel_check(T: ElementaryOperator, tol: float = 1e-7) -> dict:
    """Test ``sigma(sum L_a R_b) in sigma(sum a b)`` for an Engel coefficient
    algebra (square bimodule only)."""
    if T.m != T.n:
        raise ShapeMismatch("strong Engel check needs a square bimodule")
    coeffs = T.left_coefficients() + T.right_coefficients()
    eng = engel_check(algebra_closure(coeffs, unital=True))
    prod = sum(a @ b for a, b in T.terms)
    dist = one_sided_hausdorff(elem_spectrum(T).eigenvalues, spectrum(prod).eigenvalues)
    return {
        "hypothesis_satisfied": bool(eng["passed"]),
        "distance": float(dist),
        "inclusion_holds": bool(dist <= tol),
        "passed": bool(dist <= tol or not eng["passed"]),
        "tol": float(tol),
    }


@dataclass(frozen=True)
class OperatorValuedCurve:
    """Matrix-valued function on an interval, sampled on demand."""

    sample: Callable[[float], np.ndarray]
    interval: tuple[float, float]
    side: str = "left"

    @classmethod
    def from_samples(cls, samples, interval, side: str = "left") -> "OperatorValuedCurve":
        """Curve known only at the equispaced midpoints of ``len(samples)`` cells."""
        mats = [as_cmatrix(s) for s in samples]
        lo, hi = float(interval[0]), float(interval[1])
        h = (hi - lo) / len(mats)

        def sample(t: float) -> np.ndarray:
            i = int(np.clip(np.floor((t - lo) / h), 0, len(mats) - 1))
            return mats[i]

        return cls(sample, (lo, hi), side)


def midpoint_nodes(interval, nodes: int) -> tuple[np.ndarray, float]:
    if nodes < 1:
        raise NodeCountZero("quadrature needs at least one node")
    lo, hi = interval
    h = (hi - lo) / nodes
    return lo + (np.arange(nodes) + 0.5) * h, h


def discrete_l2_norm(curve: OperatorValuedCurve, nodes: int) -> float:
    """``sqrt(sum_k h |c(t_k)|^2)`` on the midpoint nodes."""
    t, h = midpoint_nodes(curve.interval, nodes)
    return float(np.sqrt(sum(h * op_norm(curve.sample(x)) ** 2 for x in t)))


def quadrature_lift(
    a: OperatorValuedCurve, b: OperatorValuedCurve, nodes: int
) -> ElementaryOperator:
    """Composite-midpoint discretization of ``x -> int a(t) x b(t) dt``.

    The weight ``h`` enters as ``sqrt(h)`` on both sides, so the
    representation bound is a discrete Cauchy-Schwarz product of the two
    ``L2`` norms.
    """
    if a.side != "left" or b.side != "right":
        raise InputError("need a left-sided and a right-sided curve")
    if tuple(a.interval) != tuple(b.interval):
        raise InputError("curves must share one interval")
    t, h = midpoint_nodes(a.interval, nodes)
    rh = np.sqrt(h)
    terms = [(rh * as_cmatrix(a.sample(x)), rh * as_cmatrix(b.sample(x))) for x in t]
    m, n = terms[0][0].shape[0], terms[0][1].shape[0]
    return ElementaryOperator(m, n, terms)


@dataclass(frozen=True, eq=False)
class BlockElementaryOperator:
    """Square grid of elementary operators; ``None`` entries are zero."""

    blocks: tuple

    def __init__(self, blocks):
        rows = [tuple(r) for r in blocks]
        size = len(rows)
        if size == 0 or any(len(r) != size for r in rows):
            raise ShapeMismatch("blocks must form a nonempty square grid")
        dims = {b.dims for r in rows for b in r if b is not None}
        if len(dims) > 1:
            raise ShapeMismatch("all blocks must act on one matrix shape")
        if not dims:
            raise ShapeMismatch("at least one block must be nonzero")
        object.__setattr__(self, "blocks", tuple(rows))

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def dims(self) -> tuple[int, int]:
        return next(b.dims for r in self.blocks for b in r if b is not None)


def block_lift(B: BlockElementaryOperator) -> np.ndarray:
    """Matrix of ``y_i = sum_j T_ij x_j`` on stacked vectorizations."""
    m, n = B.dims
    s = m * n
    out = np.zeros((B.size * s, B.size * s), dtype=complex)
    for i, row in enumerate(B.blocks):
        for j, blk in enumerate(row):
            if blk is not None:
                out[i * s : (i + 1) * s, j * s : (j + 1) * s] = elem_matrix(blk)
    return out


def block_spectrum(B: BlockElementaryOperator, match_tolerance: float = 1e-7) -> SpectrumSet:
    return spectrum(block_lift(B), match_tolerance)
