"""Operator norm versus Schatten quasinorm on one matrix space.

``X`` is the space of ``m x n`` matrices with the operator norm and ``Y`` the
same space with the Schatten ``p``-quasinorm, ``0 < p <= 1``.  Since
``|x|_op <= |x|_p``, ``Y`` sits inside ``X`` with a norm-one inclusion.

Induced norms on these non-Hilbertian spaces have no closed form, so they
are reported as brackets: a lower value attained by an explicit unit
vector, and an upper value from norm-equivalence constants or from a
term-wise representation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elementary import ElementaryOperator, elem_matrix
from .errors import (
    ContractionFails,
    InvalidP,
    NotAnEigenvalue,
    NotSurjectiveOnSubspace,
    ShapeMismatch,
    NonFiniteOperator,
)
from .linalg import (
    Contour,
    op_norm,
    random_complex,
    range_basis,
    riesz_projection,
    schatten_norm,
    singular_values,
    spectrum,
    unvec,
    vec,
)

RESTARTS = 10
ASCENT_STEPS = 60


@dataclass(frozen=True)
class OrderedPairNorm:
    p: float = 1.0
    dims: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise InvalidP(f"p must lie in (0, 1], got {self.p}")

    def op_norm(self, x) -> float:
        return op_norm(x)

    def schatten_norm(self, x) -> float:
        return schatten_norm(x, self.p)

    @property
    def max_rank(self) -> int:
        return min(self.dims)


@dataclass(frozen=True)
class PairNormReport:
    op_induced: tuple[float, float]
    schatten_induced: tuple[float, float]

    @property
    def value(self) -> tuple[float, float]:
        lo = max(self.op_induced[0], self.schatten_induced[0])
        hi = max(self.op_induced[1], self.schatten_induced[1])
        return (lo, hi)

    def to_dict(self) -> dict:
        return {
            "op_induced": [float(v) for v in self.op_induced],
            "schatten_induced": [float(v) for v in self.schatten_induced],
            "pair_norm": [float(v) for v in self.value],
        }


def _polar(g: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(g, full_matrices=False)
    return u @ vh


def _top_pair(y: np.ndarray):
    u, s, vh = np.linalg.svd(y)
    return u[:, 0], vh[0].conj(), s


def _apply(lift: np.ndarray, x: np.ndarray, dims) -> np.ndarray:
    return unvec(lift @ vec(x), *dims)


def _adjoint(lift: np.ndarray, y: np.ndarray, dims) -> np.ndarray:
    return unvec(lift.conj().T @ vec(y), *dims)


def _op_induced_lower(lift, dims, rng) -> float:
    # extreme points of the operator-norm ball are partial isometries; ascend
    # on them with the polar factor of the dual gradient
    best = 0.0
    for _ in range(RESTARTS):
        x = _polar(random_complex(rng, dims))
        val = op_norm(_apply(lift, x, dims))
        for _ in range(ASCENT_STEPS):
            y = _apply(lift, x, dims)
            u, v, _ = _top_pair(y)
            g = _adjoint(lift, np.outer(u, v.conj()), dims)
            if not np.any(g):
                break
            x_new = _polar(g)
            new = op_norm(_apply(lift, x_new, dims))
            if new <= val * (1 + 1e-13):
                break
            x, val = x_new, new
        best = max(best, val)
    return best


def _schatten_induced_lower(lift, dims, p, rng) -> float:
    # for p <= 1 the supremum over the quasinorm ball is attained at rank one
    best = 0.0
    m, n = dims
    for _ in range(RESTARTS):
        u = random_complex(rng, m)
        v = random_complex(rng, n)
        u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
        val = schatten_norm(_apply(lift, np.outer(u, v.conj()), dims), p)
        for _ in range(ASCENT_STEPS):
            y = _apply(lift, np.outer(u, v.conj()), dims)
            if not np.any(y):
                break
            g = _adjoint(lift, _polar(y), dims)
            u2, v2, _ = _top_pair(g)
            new = schatten_norm(_apply(lift, np.outer(u2, v2.conj()), dims), p)
            if new <= val * (1 + 1e-13):
                break
            u, v, val = u2, v2, new
        best = max(best, val)
    return best


def _op_norms(mats) -> np.ndarray:
    return np.linalg.svd(np.array(mats), compute_uv=False)[:, 0]


def representation_bound(T: ElementaryOperator, p: float = 1.0) -> float:
    """``(sum (|a_i| |b_i|)^p)^(1/p)``: bounds both induced norms."""
    c = _op_norms(T.left_coefficients()) * _op_norms(T.right_coefficients())
    if not np.any(c):
        return 0.0
    top = float(np.max(c))
    return top * float(np.sum((c / top) ** p)) ** (1.0 / p)


def pair_norm(T, pair: OrderedPairNorm, seed: int = 42) -> PairNormReport:
    """Brackets for the operator norms of ``T`` on ``X`` and on ``Y``.

    ``T`` is an ``ElementaryOperator`` or its lifted matrix.  Upper values
    use ``|y|_op <= |y|_F <= sqrt(r) |y|_op`` and
    ``|y|_F <= |y|_p <= r^(1/p - 1/2) |y|_F`` with ``r = min(m, n)``, and
    for elementary operators also the representation bound.
    """
    rep = None
    if isinstance(T, ElementaryOperator):
        if T.dims != tuple(pair.dims):
            raise ShapeMismatch("operator and pair act on different shapes")
        rep = representation_bound(T, pair.p)
        lift = elem_matrix(T)
    else:
        lift = np.asarray(T, dtype=complex)
    m, n = pair.dims
    if lift.shape != (m * n, m * n):
        raise ShapeMismatch(f"lift of shape {lift.shape} does not act on {m}x{n} matrices")
    if not np.all(np.isfinite(lift)):
        raise NonFiniteOperator("operator has non-finite entries")
    rng = np.random.default_rng(seed)
    r = pair.max_rank
    l2 = op_norm(lift)
    op_hi = math.sqrt(r) * l2
    sp_hi = r ** (1.0 / pair.p - 0.5) * l2
    if rep is not None:
        op_hi, sp_hi = min(op_hi, rep), min(sp_hi, rep)
    op_lo = min(_op_induced_lower(lift, pair.dims, rng), op_hi)
    sp_lo = min(_schatten_induced_lower(lift, pair.dims, pair.p, rng), sp_hi)
    return PairNormReport((op_lo, op_hi), (sp_lo, sp_hi))


def op_to_schatten_bound(op, dims, p: float = 1.0) -> float:
    """Upper bound for ``sup |op(x)|_p`` over ``|x|_op <= 1``.

    For terms ``c x d``: ``|c x d|_p <= min(|c|_p |d|, |c| |d|_p) |x|``,
    combined with the ``p``-triangle inequality; also the equivalence bound
    ``r^(1/p - 1/2) sqrt(r) |lift|``.
    """
    m, n = dims
    r = min(m, n)
    if isinstance(op, ElementaryOperator):
        sa = np.linalg.svd(np.array(op.left_coefficients()), compute_uv=False)
        sb = np.linalg.svd(np.array(op.right_coefficients()), compute_uv=False)
        c = np.minimum(_batched_schatten(sa, p) * sb[:, 0], sa[:, 0] * _batched_schatten(sb, p))
        top = float(np.max(c)) if len(c) else 0.0
        rep = 0.0 if top == 0 else top * float(np.sum((c / top) ** p)) ** (1.0 / p)
        lift = elem_matrix(op)
        return min(rep, r ** (1.0 / p - 0.5) * math.sqrt(r) * op_norm(lift))
    return r ** (1.0 / p - 0.5) * math.sqrt(r) * op_norm(np.asarray(op))


def _batched_schatten(s: np.ndarray, p: float) -> np.ndarray:
    # rows of singular values; noise below the usual rank cutoff is dropped
    top = s[:, :1]
    keep = s > s.shape[1] * np.finfo(float).eps * top
    safe = np.where(top > 0, top, 1.0)
    return top[:, 0] * np.sum(np.where(keep, s / safe, 0.0) ** p, axis=1) ** (1.0 / p)


@dataclass
class SpectralSubspaceRun:
    power: int
    preimage_constant: float
    remainder_rate: float
    head_bound: float
    bound_constant: float
    z_op_norm: float
    z_schatten_norm: float
    partial_sum_residuals: list
    verdict: bool
    terms_used: int
    p: float = 1.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "power": self.power,
            "preimage_constant": float(self.preimage_constant),
            "remainder_rate": float(self.remainder_rate),
            "p": float(self.p),
            "head_norm_upper": float(self.head_bound),
            "z_op_norm": float(self.z_op_norm),
            "z_schatten_norm": float(self.z_schatten_norm),
            "bound_constant": float(self.bound_constant),
            "partial_sum_residuals": [float(v) for v in self.partial_sum_residuals],
            "terms_used": self.terms_used,
            "verdict": bool(self.verdict),
        }


def _as_lift(op, dims) -> np.ndarray:
    if isinstance(op, ElementaryOperator):
        return elem_matrix(op)
    return np.asarray(op, dtype=complex)


def _lift_bound(lift: np.ndarray, dims, p: float) -> float:
    # both induced norms from the Euclidean one via norm equivalence
    r = min(dims)
    return op_norm(lift) * max(math.sqrt(r), r ** (1.0 / p - 0.5))


def reconstruct_series(
    T: ElementaryOperator,
    power: int,
    head,
    z,
    preimage_constant: float,
    remainder_rate: float,
    basis: np.ndarray,
    p: float = 1.0,
    remainder=None,
    tol: float = 1e-9,
    max_terms: int = 500,
    head_bound: float | None = None,
) -> SpectralSubspaceRun:
    """Rebuild ``z`` from ``H z_1 + R H z_2 + R^2 H z_3 + ...``.

    With ``m = power``, ``t = preimage_constant`` and
    ``eps = remainder_rate``: ``T^m = H + R`` splits into a head ``H`` and a
    remainder ``R`` with ``|R| <= eps^m``, ``z_k`` solves
    ``T^m z_{k+1} = z_k`` inside the invariant subspace spanned by
    ``basis`` (columns of vectorized matrices) with ``|z_k| <= t^(mk) |z|``,
    and the resulting estimate is
    ``|z|_p <= t^m / (1 - eps^m t^m) * |H|_{op->p} * |z|_op`` (for ``p < 1``
    the denominator becomes ``(1 - (eps t)^(mp))^(1/p)``).

    ``head`` and ``remainder`` may be elementary operators (their
    representation bounds are then used) or lifted matrices.  ``remainder``
    defaults to ``T^m - head``.  ``head_bound`` overrides the computed upper
    bound for ``|H|_{op->p}``.

    Raises
    ------
    ContractionFails
        If ``eps * t >= 1`` or the remainder is larger than ``eps^m``.
    NotSurjectiveOnSubspace
        If the subspace is not invariant, ``T^m`` is not invertible on it,
        or a preimage exceeds the growth allowed by ``t``.
    """
    m, t, eps = power, preimage_constant, remainder_rate
    dims = T.dims
    z = np.asarray(z, dtype=complex)
    if z.shape != dims:
        raise ShapeMismatch("z does not match the operator shape")
    if eps * t >= 1:
        raise ContractionFails(f"eps * t = {eps * t:.6g} is not below 1")
    lift = elem_matrix(T)
    tm = np.linalg.matrix_power(lift, m)
    h_lift = _as_lift(head, dims)
    if remainder is None:
        r_lift = tm - h_lift
        r_bound = _lift_bound(r_lift, dims, p)
    else:
        r_lift = _as_lift(remainder, dims)
        if op_norm(h_lift + r_lift - tm) > 1e-9 * max(1.0, op_norm(tm)):
            raise ContractionFails("head plus remainder does not reproduce T^m")
        if isinstance(remainder, ElementaryOperator):
            r_bound = representation_bound(remainder, p)
        else:
            r_bound = _lift_bound(r_lift, dims, p)
    if r_bound > eps**m * (1 + 1e-12) + 1e-300:
        raise ContractionFails(f"remainder bound {r_bound:.6g} exceeds eps^m = {eps**m:.6g}")
    Z = np.asarray(basis, dtype=complex)
    C = Z.conj().T @ tm @ Z
    if op_norm(tm @ Z - Z @ C) > 1e-8 * max(1.0, op_norm(tm)):
        raise NotSurjectiveOnSubspace("subspace is not invariant under T^m")
    c0 = Z.conj().T @ vec(z)
    if np.linalg.norm(Z @ c0 - vec(z)) > 1e-8 * max(1.0, np.linalg.norm(c0)):
        raise NotSurjectiveOnSubspace("z is not in the subspace")
    if head_bound is None:
        head_bound = op_to_schatten_bound(head, dims, p)
    z_op = op_norm(z)
    z_sp = schatten_norm(z, p)
    # p-triangle inequality over the series terms; p = 1 is the plain sum
    const = t**m / (1 - (eps * t) ** (m * p)) ** (1.0 / p)
    residuals = []
    partial = np.zeros(dims, dtype=complex)
    c = c0
    r_pow = np.eye(len(lift), dtype=complex)
    k = 0
    while k < max_terms:
        k += 1
        c_next, *_ = np.linalg.lstsq(C, c, rcond=None)
        if np.linalg.norm(C @ c_next - c) > 1e-8 * max(1.0, np.linalg.norm(c)):
            raise NotSurjectiveOnSubspace("T^m is not onto the subspace")
        c = c_next
        zk = unvec(Z @ c, *dims)
        if op_norm(zk) > t ** (m * k) * z_op * (1 + 1e-8) + 1e-300:
            raise NotSurjectiveOnSubspace(f"preimage growth exceeds t^(mk) at k={k}")
        partial = partial + unvec(r_pow @ (h_lift @ vec(zk)), *dims)
        residuals.append(op_norm(z - partial))
        # geometric tail of the remaining terms in the Schatten metric
        tail = const * head_bound * z_op * (eps * t) ** (m * k)
        if tail < 1e-12 * max(z_sp, 1e-300) or not np.any(r_lift):
            break
        r_pow = r_lift @ r_pow
    converged = residuals[-1] <= tol * max(z_op, 1e-300)
    within = z_sp <= const * head_bound * z_op * (1 + tol) + tol
    return SpectralSubspaceRun(
        m, t, eps, head_bound, const * head_bound, z_op, z_sp, residuals, bool(converged and within), k, p,
        {"series_converged": bool(converged), "bound_holds": bool(within)},
    )


def _top_rows_zero(w: np.ndarray, r: int, tol: float = 1e-12) -> bool:
    nw = np.linalg.norm(w)
    return nw == 0 or np.linalg.norm(w[r:]) <= tol * nw


def split_power(T: ElementaryOperator, power: int, corank_rows: int) -> tuple:
    """Split ``T^power`` into word terms with a coefficient inside the
    top-row ideal (matrices vanishing below row ``corank_rows``) and the rest.

    Returns ``(head, remainder)`` as elementary operators; either may be
    ``None`` when it has no terms.
    """
    k = len(T.terms)
    head_terms, rest_terms = [], []
    for word in np.ndindex(*(k,) * power):
        left = np.eye(T.m, dtype=complex)
        right = np.eye(T.n, dtype=complex)
        for i in word:
            a, b = T.terms[i]
            left = left @ a
            right = b @ right
        if _top_rows_zero(left, corank_rows) or _top_rows_zero(right, corank_rows):
            head_terms.append((left, right))
        else:
            rest_terms.append((left, right))
    head = ElementaryOperator(T.m, T.n, head_terms) if head_terms else None
    rest = ElementaryOperator(T.m, T.n, rest_terms) if rest_terms else None
    return head, rest


def surjectivity_constant(T: ElementaryOperator, basis: np.ndarray) -> float:
    """Upper bound ``sqrt(r) |(T|_Z)^{-1}|_F`` for the operator-norm
    preimage constant on the subspace ``Z``."""
    lift = elem_matrix(T)
    Z = np.asarray(basis, dtype=complex)
    C = Z.conj().T @ lift @ Z
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] == 0:
        raise NotSurjectiveOnSubspace("operator is singular on the subspace")
    return math.sqrt(min(T.dims)) / float(s[-1])


def isolating_contour(eigenvalues, target: complex) -> Contour:
    """Circle around ``target`` that excludes 0 and every eigenvalue not
    numerically equal to it."""
    ev = np.asarray(eigenvalues, dtype=complex)
    scale = max(1.0, abs(target))
    others = ev[np.abs(ev - target) > 1e-6 * scale]
    gap = float(np.min(np.abs(others - target))) if others.size else abs(target)
    radius = 0.5 * min(gap, abs(target))
    return Contour(complex(target), radius, 16)


def spectral_subspace(T: ElementaryOperator, contour: Contour) -> np.ndarray:
    """Orthonormal basis (vectorized) of the Riesz spectral subspace."""
    return range_basis(riesz_projection(elem_matrix(T), contour))


@dataclass(frozen=True, eq=False)
class SeriesConstants:
    power: int
    preimage_constant: float
    remainder_rate: float
    head: ElementaryOperator
    remainder: object
    head_bound: float


def measure_constants(
    T: ElementaryOperator, basis: np.ndarray, corank_rows: int, max_power: int = 8, p: float = 1.0
) -> SeriesConstants:
    """Measure the series constants for a corner-ideal semicompact ``T``.

    The preimage constant ``t`` comes from ``surjectivity_constant``; the
    power ``m`` is the smallest one for which the remainder rate ``eps``
    (``eps^m`` the representation bound of the remainder, which controls
    both induced norms) gives ``eps * t < 1``.
    """
    t = surjectivity_constant(T, basis)
    for m in range(1, max_power + 1):
        head, rest = split_power(T, m, corank_rows)
        if head is None:
            continue
        if rest is None:
            eps, rest = 0.0, np.zeros((T.m * T.n,) * 2, dtype=complex)
        else:
            eps = representation_bound(rest, p) ** (1.0 / m)
        if eps * t < 1:
            return SeriesConstants(m, t, eps, head, rest, op_to_schatten_bound(head, T.dims, p))
    raise ContractionFails(f"no power <= {max_power} gives eps * t < 1")


def spectral_subspace_run(
    T: ElementaryOperator, z, basis: np.ndarray, constants: SeriesConstants, p: float = 1.0
) -> SpectralSubspaceRun:
    c = constants
    return reconstruct_series(
        T, c.power, c.head, z, c.preimage_constant, c.remainder_rate, basis,
        p=p, remainder=c.remainder, head_bound=c.head_bound,
    )


@dataclass(frozen=True)
class EigenspaceReport:
    eigenvalue: complex
    ratios: list
    p_norm_holds: bool
    rank_bound_holds: bool
    worst_p_norm: float
    worst_rank: float

    @property
    def passed(self) -> bool:
        return self.p_norm_holds and self.rank_bound_holds

    def to_dict(self) -> dict:
        return {
            "eigenvalue": [float(self.eigenvalue.real), float(self.eigenvalue.imag)],
            "quasinorm_ratios": [float(r) for r in self.ratios],
            "operator_bound_holds": bool(self.p_norm_holds),
            "rank_bound_holds": bool(self.rank_bound_holds),
            "operator_bound_excess": float(self.worst_p_norm),
            "rank_bound_excess": float(self.worst_rank),
        }


def eigenspace_ideal_check(T: ElementaryOperator, eigenvalue: complex, p: float = 1.0, tol: float = 1e-9) -> EigenspaceReport:
    """Quasinorm estimates on the eigenspace of ``T`` for ``eigenvalue``.

    For each basis eigenmatrix ``x`` checks
    ``|T x|_p <= N^((1-p)/p) (sum |a_i| |b_i|) |x|_p`` (``N`` terms) and
    ``|x|_p <= r^((1-p)/p) |x|_1`` (``r`` the numerical rank of ``x``).

    Raises
    ------
    NotAnEigenvalue
        If ``eigenvalue`` is not an eigenvalue (relative cutoff 1e-8) or is 0.
    """
    if not 0 < p <= 1:
        raise InvalidP(f"p must lie in (0, 1], got {p}")
    lam = complex(eigenvalue)
    lift = elem_matrix(T)
    scale = max(1.0, op_norm(lift))
    if abs(lam) <= tol:
        raise NotAnEigenvalue("eigenvalue must be nonzero")
    _, s, vh = np.linalg.svd(lift - lam * np.eye(len(lift)))
    null = vh[s <= 1e-8 * scale].conj()
    if len(null) == 0:
        raise NotAnEigenvalue(f"{lam} is not an eigenvalue (smallest singular value {s[-1]:.3e})")
    N = len(T.terms)
    rep = float(sum(op_norm(a) * op_norm(b) for a, b in T.terms))
    ratios, w1, w2 = [], -math.inf, -math.inf
    for v in null:
        x = unvec(v, *T.dims)
        xp = schatten_norm(x, p)
        ratios.append(xp / op_norm(x))
        tx = unvec(lift @ v, *T.dims)
        lhs = schatten_norm(tx, p)
        rhs = N ** ((1 - p) / p) * rep * xp
        w1 = max(w1, (lhs - rhs) / max(rhs, 1e-300))
        r = int(np.count_nonzero(singular_values(x)))
        rhs2 = r ** ((1 - p) / p) * schatten_norm(x, 1.0)
        w2 = max(w2, (xp - rhs2) / max(rhs2, 1e-300))
    return EigenspaceReport(lam, ratios, w1 <= tol, w2 <= tol, w1, w2)
