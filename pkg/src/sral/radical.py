"""Finite-dimensional matrix algebras: closure, radical, and rates modulo ideals.

Algebras are stored by a Frobenius-orthonormal basis.  The radical is the
kernel of the trace form ``(x, y) -> trace(L_x L_y)`` of the left-regular
representation, which in characteristic zero is the largest nil ideal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClosureViolated, IdealNotNil, InputError, NotInAlgebra
from .families import RadiusBracket, SummableFamily, tsr_bracket
from .linalg import as_cmatrix, op_norm
from .words import WordBlock, walk

CLOSURE_CUTOFF = 1e-10
KERNEL_CUTOFF = 1e-9
CLOSED_TOL = 1e-9
NIL_TOL = 1e-8


def _extend_basis(q: list[np.ndarray], vectors, thresh: float) -> bool:
    """Append the orthonormalized residuals of ``vectors`` to ``q``; return
    whether anything was added."""
    grew = False
    for v in vectors:
        r = np.asarray(v, dtype=complex).ravel().copy()
        for _ in range(2):
            for row in q:
                r -= np.vdot(row, r) * row
        nr = np.linalg.norm(r)
        if nr > thresh:
            q.append(r / nr)
            grew = True
    return grew


@dataclass(frozen=True, eq=False)
class MatrixAlgebra:
    """Subalgebra of ``d x d`` matrices given by an orthonormal basis."""

    dimension: int
    basis: np.ndarray  # (r, d, d), Frobenius-orthonormal
    unital: bool = False

    @property
    def rank(self) -> int:
        return len(self.basis)

    def _flat(self) -> np.ndarray:
        return self.basis.reshape(self.rank, -1)

    def coordinates(self, x) -> np.ndarray:
        return self._flat().conj() @ np.asarray(x, dtype=complex).ravel()

    def residual(self, x) -> float:
        """Frobenius distance from ``x`` to the span."""
        x = np.asarray(x, dtype=complex)
        if self.rank == 0:
            return float(np.linalg.norm(x))
        r = x.ravel() - self.coordinates(x) @ self._flat()
        return float(np.linalg.norm(r))

    def contains(self, x, tol: float = CLOSED_TOL) -> bool:
        return self.residual(x) <= tol * max(1.0, float(np.linalg.norm(x)))

    def structure(self) -> np.ndarray:
        """``L[i]`` is the matrix of left multiplication by ``basis[i]``."""
        r = self.rank
        flat = self._flat().conj()
        L = np.zeros((r, r, r), dtype=complex)
        for i in range(r):
            prods = np.matmul(self.basis[i][None], self.basis).reshape(r, -1)
            L[i] = (prods @ flat.T).T
        return L


@dataclass(frozen=True, eq=False)
class IdealSubspace:
    parent: MatrixAlgebra
    basis: np.ndarray  # (s, d, d), Frobenius-orthonormal

    @property
    def rank(self) -> int:
        return len(self.basis)

    def distances(self, stack: np.ndarray) -> np.ndarray:
        """Frobenius distance of each matrix in a stack to the span."""
        flat = stack.reshape(len(stack), -1)
        if self.rank == 0:
            return np.linalg.norm(flat, axis=1)
        q = self.basis.reshape(self.rank, -1)
        coords = flat @ q.conj().T
        return np.linalg.norm(flat - coords @ q, axis=1)

    def distance(self, x) -> float:
        return float(self.distances(np.asarray(x, dtype=complex)[None])[0])

    def as_algebra(self) -> MatrixAlgebra:
        return MatrixAlgebra(self.parent.dimension, self.basis, False)


def _gen_stack(generators) -> np.ndarray:
    mats = [as_cmatrix(g, square=True) for g in generators]
    if not mats:
        raise InputError("need at least one generator")
    d = mats[0].shape[0]
    if any(g.shape[0] != d for g in mats):
        raise InputError("generators must share one dimension")
    return np.array(mats)


def algebra_closure(generators, unital: bool = False) -> MatrixAlgebra:
    """Smallest subalgebra containing ``generators`` (and ``I`` if unital).

    The span is extended by right products with the generators until its
    dimension stops growing; residuals below ``1e-10`` times the largest
    generator norm count as already spanned.
    """
    gens = _gen_stack(generators)
    d = gens.shape[1]
    scale = max(float(np.max(np.linalg.norm(gens.reshape(len(gens), -1), axis=1))), 1.0 if unital else 0.0)
    if scale == 0:
        return MatrixAlgebra(d, np.zeros((0, d, d), dtype=complex), unital)
    thresh = CLOSURE_CUTOFF * scale
    q: list[np.ndarray] = []
    start = ([np.eye(d)] if unital else []) + list(gens)
    _extend_basis(q, start, thresh)
    frontier = list(q)
    while frontier:
        before = len(q)
        cands = [f.reshape(d, d) @ g for f in frontier for g in gens]
        _extend_basis(q, cands, thresh)
        frontier = q[before:]
    basis = np.array(q).reshape(len(q), d, d) if q else np.zeros((0, d, d), dtype=complex)
    return MatrixAlgebra(d, basis, unital)


def check_closed(A: MatrixAlgebra, tol: float = CLOSED_TOL) -> float:
    """Largest product residual over basis pairs; raises if above ``tol``."""
    worst = 0.0
    for i in range(A.rank):
        prods = np.matmul(A.basis[i][None], A.basis)
        for p in prods:
            worst = max(worst, A.residual(p))
    if worst > tol:
        raise ClosureViolated(f"basis products leave the span (residual {worst:.3e})")
    return worst


def span_of(vectors, d: int, thresh: float = 1e-12) -> np.ndarray:
    q: list[np.ndarray] = []
    _extend_basis(q, vectors, thresh)
    if not q:
        return np.zeros((0, d, d), dtype=complex)
    return np.array(q).reshape(len(q), d, d)


def ideal_closure(parent: MatrixAlgebra, generators) -> IdealSubspace:
    """Two-sided ideal of ``parent`` generated by ``generators``."""
    d = parent.dimension
    gens = [as_cmatrix(g) for g in generators]
    thresh = CLOSURE_CUTOFF * max([float(np.linalg.norm(g)) for g in gens] + [1e-300])
    q: list[np.ndarray] = []
    _extend_basis(q, gens, thresh)
    frontier = list(q)
    while frontier:
        before = len(q)
        cands = []
        for f in frontier:
            fm = f.reshape(d, d)
            for a in parent.basis:
                cands.append(a @ fm)
                cands.append(fm @ a)
        _extend_basis(q, cands, thresh)
        frontier = q[before:]
    basis = np.array(q).reshape(len(q), d, d) if q else np.zeros((0, d, d), dtype=complex)
    return IdealSubspace(parent, basis)


def is_ideal(J: IdealSubspace, tol: float = CLOSED_TOL) -> float:
    """Largest residual of ``a j`` and ``j a`` outside ``J``."""
    worst = 0.0
    for a in J.parent.basis:
        for j in J.basis:
            worst = max(worst, J.distance(a @ j), J.distance(j @ a))
    return worst


def nil_index(basis: np.ndarray, tol: float = NIL_TOL) -> int:
    """Smallest ``s`` with ``span(basis)^s = 0`` (``0`` for the zero space),
    or ``-1`` if the powers stop shrinking before reaching zero."""
    if len(basis) == 0:
        return 0
    d = basis.shape[1]
    cur = basis
    s = 1
    while len(cur):
        prods = [x @ y for x in cur for y in basis]
        nxt = span_of(prods, d, thresh=tol)
        if len(nxt) >= len(cur):
            return -1
        cur = nxt
        s += 1
    return s


def is_nil_algebra(A: MatrixAlgebra, tol: float = NIL_TOL) -> bool:
    """An algebra is nil iff its powers reach zero (finite dimension)."""
    return nil_index(A.basis, tol) >= 0


def jacobson_radical(A: MatrixAlgebra) -> IdealSubspace:
    """Radical as the kernel of the trace form of the left-regular
    representation (singular-value cutoff ``1e-9`` relative).

    Raises
    ------
    ClosureViolated
        If ``A`` is not closed, or the computed kernel fails the ideal or
        nilpotency checks.
    """
    check_closed(A)
    r, d = A.rank, A.dimension
    if r == 0:
        return IdealSubspace(A, np.zeros((0, d, d), dtype=complex))
    L = A.structure()
    G = np.einsum("iab,jba->ij", L, L)
    u, s, vh = np.linalg.svd(G.T)
    smax = s[0] if s.size else 0.0
    if smax == 0:
        null = np.eye(r, dtype=complex)
    else:
        keep = s <= KERNEL_CUTOFF * smax
        null = vh[keep].conj()
    flat = A.basis.reshape(r, -1)
    rad = (null @ flat).reshape(len(null), d, d)
    J = IdealSubspace(A, rad)
    if len(rad):
        if is_ideal(J) > CLOSED_TOL * 10:
            raise ClosureViolated("trace-form kernel is not a two-sided ideal")
        if nil_index(rad) < 0:
            raise ClosureViolated("trace-form kernel is not nil")
    return J


@dataclass(frozen=True)
class QuotientRateReport:
    rates: np.ndarray
    inf_rate: float
    epsilon_certificate: tuple
    quasinilpotent_mod_ideal: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "rates": [float(x) for x in self.rates],
            "inf_rate": float(self.inf_rate),
            "epsilon_certificate": [[float(e), int(n)] for e, n in self.epsilon_certificate],
            "quasinilpotent_mod_ideal": bool(self.quasinilpotent_mod_ideal),
            "threshold": float(self.threshold),
        }


def _certificate(rates: np.ndarray) -> tuple:
    # (eps, n0) with dist(a^m, J) < eps^m for every tabulated m >= n0;
    # keep the pairs where eps strictly improves
    out = []
    best = math.inf
    tail = np.maximum.accumulate(rates[::-1])[::-1]
    for n0 in range(1, len(rates) + 1):
        eps = float(tail[n0 - 1]) * (1 + 1e-12) + 1e-300
        if eps < best:
            out.append((eps, n0))
            best = eps
    return tuple(out)


def quotient_rate(a, J: IdealSubspace, n_max: int = 50, threshold: float = 1e-3) -> QuotientRateReport:
    """Rates ``dist(a^n, J)^(1/n)`` for ``n = 1..n_max`` (Frobenius distance).

    Powers are renormalized at each step and the scale is carried in logs,
    so long tables neither overflow nor underflow.

    Raises
    ------
    NotInAlgebra
        If ``a`` is not in the parent algebra.
    """
    a = as_cmatrix(a, square=True)
    if J.parent.residual(a) > CLOSED_TOL * max(1.0, float(np.linalg.norm(a))):
        raise NotInAlgebra("element is not in the parent algebra")
    rates = np.zeros(n_max)
    q = a.copy()
    log_s = 0.0
    for n in range(1, n_max + 1):
        if n > 1:
            q = q @ a
        s = float(np.linalg.norm(q))
        if s == 0:
            break
        q = q / s
        log_s += math.log(s)
        dist = J.distance(q)
        rates[n - 1] = math.exp((log_s + math.log(dist)) / n) if dist > 0 else 0.0
    inf_rate = float(np.min(rates))
    return QuotientRateReport(rates, inf_rate, _certificate(rates), inf_rate <= threshold, threshold)


def tsr_mod_ideal(
    M: SummableFamily,
    I: IdealSubspace,
    depth: int,
    seed: int = 42,
    budget: int | None = None,
) -> RadiusBracket:
    """Bracket for the tensor radius of ``M`` in the quotient by a nil ideal.

    Upper: ``min_n eta_q(M^n)^(1/n)`` with ``eta_q`` the word sum of Frobenius
    distances to ``I`` (a submultiplicative seminorm on the quotient),
    intersected with the full-algebra upper bound, since the quotient map
    cannot increase the radius.  Lower: spectra are unchanged modulo an
    ideal inside the radical, so the full-algebra lower bound applies.

    Raises
    ------
    NotInAlgebra
        If a member is outside the parent algebra.
    IdealNotNil
        If ``I`` is not closed under products or not nil.
    """
    for a in M.members:
        if not I.parent.contains(a):
            raise NotInAlgebra("family member is not in the parent algebra")
    if I.rank:
        prods = np.array([x @ y for x in I.basis for y in I.basis])
        if np.max(I.distances(prods)) > CLOSED_TOL * 10:
            raise IdealNotNil("ideal span is not closed under products")
        if nil_index(I.basis) < 0:
            raise IdealNotNil("ideal is not nil")
    full = tsr_bracket(M, depth, seed=seed, budget=budget)
    eta_q = np.zeros(depth)

    def visit(blk: WordBlock):
        eta_q[blk.level - 1] += float(np.dot(blk.weights, I.distances(blk.products)))

    walk(M.members, depth, visit, weights=M.weights, budget=budget)
    roots = eta_q ** (1.0 / np.arange(1, depth + 1))
    i = int(np.argmin(roots))
    upper = min(float(roots[i]), full.upper)
    up_depth = i + 1 if roots[i] <= full.upper else full.upper_depth
    lower = min(full.lower, upper)
    return RadiusBracket(lower, upper, full.lower_witness, up_depth, True, full.witness_kind)


def _ad_matrices(A: MatrixAlgebra) -> np.ndarray:
    L = A.structure()
    # right multiplication: coordinates of e_j e_i
    r = A.rank
    flat = A.basis.reshape(r, -1).conj()
    R = np.zeros_like(L)
    for i in range(r):
        prods = np.matmul(A.basis, A.basis[i][None]).reshape(r, -1)
        R[i] = (prods @ flat.T).T
    return L - R


def engel_check(A: MatrixAlgebra, tol: float = NIL_TOL) -> dict:
    """Whether every inner derivation ``L_a - R_a`` on ``A`` is nilpotent.

    The derivations form a Lie algebra; all of them are nilpotent exactly
    when the associative algebra they generate is nil, which is what is
    tested (a basis-only check would miss combinations).
    """
    check_closed(A)
    ads = _ad_matrices(A)
    worst = 0.0
    for m in ads:
        nm = op_norm(m)
        if nm > 0:
            worst = max(worst, op_norm(np.linalg.matrix_power(m / nm, len(m))))
    if A.rank == 0 or all(op_norm(m) == 0 for m in ads):
        passed = True
    else:
        passed = is_nil_algebra(algebra_closure(list(ads)), tol)
    return {"passed": bool(passed), "max_power_residual": float(worst), "rank": A.rank}


def comm_mod_rad_check(A: MatrixAlgebra, tol: float = 1e-9) -> dict:
    """Whether every commutator of basis elements lies in the radical."""
    R = jacobson_radical(A)
    worst = 0.0
    witness = None
    for i in range(A.rank):
        for j in range(i + 1, A.rank):
            c = A.basis[i] @ A.basis[j] - A.basis[j] @ A.basis[i]
            res = R.distance(c)
            if res > worst:
                worst, witness = res, (i, j)
    return {
        "passed": bool(worst <= tol),
        "max_residual": float(worst),
        "witness": list(witness) if witness else [],
        "radical_rank": R.rank,
    }
