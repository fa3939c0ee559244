"""Invariant chains for nil families and product-norm bounds along them."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ChainNotInvariant,
    NotNilFamily,
    RadicalHypothesisViolated,
    TooFewFactors,
)
from .linalg import as_cmatrix, op_norm, op_norms
from .radical import (
    algebra_closure,
    is_nil_algebra,
    jacobson_radical,
    nil_index,
)
from .words import DEFAULT_BUDGET, WordBlock, walk

IMAGE_CUTOFF = 1e-9
INVARIANCE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SubspaceChain:
    """Strictly increasing chain ``X_1 < ... < X_k`` of proper subspaces.

    ``bases[j]`` holds orthonormal columns for ``X_{j+1}``; each basis is a
    prefix of the next.
    """

    dimension: int
    bases: tuple

    def __len__(self) -> int:
        return len(self.bases)

    def projector(self, j: int) -> np.ndarray:
        """Orthogonal projector onto ``X_j`` (``X_0 = 0``, ``X_{k+1}`` the
        whole space)."""
        d = self.dimension
        if j <= 0:
            return np.zeros((d, d), dtype=complex)
        if j > len(self.bases):
            return np.eye(d, dtype=complex)
        b = self.bases[j - 1]
        return b @ b.conj().T

    def gap_projectors(self) -> list[np.ndarray]:
        """Projectors onto ``X_j - X_{j-1}`` for ``j = 1..k+1``."""
        return [self.projector(j) - self.projector(j - 1) for j in range(1, len(self.bases) + 2)]


def _range(mat: np.ndarray, cutoff: float) -> np.ndarray:
    if mat.shape[1] == 0:
        return mat
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, s > cutoff]


def _chain_from_images(ops: np.ndarray, d: int) -> SubspaceChain:
    # descending images V_{j+1} = span(ops V_j), then reversed
    v = np.eye(d, dtype=complex)
    spaces = []
    while v.shape[1]:
        img = np.hstack([a @ v for a in ops])
        v_next = _range(img, IMAGE_CUTOFF)
        if v_next.shape[1] >= v.shape[1]:
            break
        v = v_next
        if v.shape[1]:
            spaces.append(v)
    spaces.reverse()
    bases = []
    cur = np.zeros((d, 0), dtype=complex)
    for sp in spaces:
        resid = sp - cur @ (cur.conj().T @ sp)
        extra = _range(resid, 1e-8)
        cur = np.hstack([cur, extra])
        bases.append(cur.copy())
    return SubspaceChain(d, tuple(bases))


def is_nil_family(gens, tol: float = 1e-8) -> bool:
    """Whether the algebra generated by ``gens`` (no unit) is nil."""
    A = algebra_closure([as_cmatrix(g, square=True) for g in gens])
    return A.rank == 0 or is_nil_algebra(A, tol)


def triangularize(gens, bounded=None) -> SubspaceChain:
    """Common invariant chain for a nil family.

    With ``bounded`` elements ``F`` supplied, the chain is built from the
    radical ``R`` of the unital algebra generated by ``gens`` and ``F``:
    ``V_{j+1} = span(R V_j)``.  Elements of ``gens`` must lie in ``R``;
    they then lower the chain strictly while ``F`` only preserves it.

    Raises
    ------
    NotNilFamily
        If ``gens`` do not generate a nil algebra (or, with ``bounded``, do
        not lie in the radical).
    """
    gens = [as_cmatrix(g, square=True) for g in gens]
    d = gens[0].shape[0]
    if bounded:
        F = [as_cmatrix(f, square=True) for f in bounded]
        A = algebra_closure(gens + F, unital=True)
        R = jacobson_radical(A)
        for g in gens:
            if R.distance(g) > 1e-8 * max(1.0, op_norm(g)):
                raise NotNilFamily("a nil generator is outside the radical")
        return _chain_from_images(R.basis, d)
    A = algebra_closure(gens)
    if A.rank and not is_nil_algebra(A):
        raise NotNilFamily("generators do not span a nil algebra")
    return _chain_from_images(A.basis, d)


def lowering_residual(g, chain: SubspaceChain) -> float:
    """Largest relative ``|(1 - P_{j-1}) g P_j|`` over ``j = 1..k+1``."""
    g = as_cmatrix(g)
    ng = op_norm(g)
    if ng == 0:
        return 0.0
    d = chain.dimension
    worst = 0.0
    for j in range(1, len(chain) + 2):
        r = (np.eye(d) - chain.projector(j - 1)) @ g @ chain.projector(j)
        worst = max(worst, op_norm(r) / ng)
    return worst


def invariance_residual(g, chain: SubspaceChain) -> float:
    """Largest relative ``|(1 - P_j) g P_j|`` over the chain."""
    g = as_cmatrix(g)
    ng = op_norm(g)
    if ng == 0:
        return 0.0
    d = chain.dimension
    worst = 0.0
    for j in range(1, len(chain) + 1):
        p = chain.projector(j)
        worst = max(worst, op_norm((np.eye(d) - p) @ g @ p) / ng)
    return worst


@dataclass(frozen=True)
class ChainBlockBounds:
    max_norm: float
    max_gap_norm: float
    chain_length: int


def chain_block_bounds(ops, chain: SubspaceChain) -> ChainBlockBounds:
    """Largest norm ``max |a|`` and largest compression ``max |Q_j a Q_j|``
    over every gap of the chain, including the top one."""
    ops = [as_cmatrix(a) for a in ops]
    top = max(op_norm(a) for a in ops)
    qs = chain.gap_projectors()
    gap = max(op_norm(q @ a @ q) for a in ops for q in qs)
    return ChainBlockBounds(top, min(gap, top), len(chain))


def subspace_product_bound(a, b, w_basis: np.ndarray) -> tuple[float, float]:
    """``(|a b|, 2 |a|_W| |b| + |a| |b|_{X/W}|)`` for a common invariant ``W``."""
    d = a.shape[0]
    pw = w_basis @ w_basis.conj().T
    qw = np.eye(d) - pw
    a_w = op_norm(a @ w_basis) if w_basis.shape[1] else 0.0
    b_q = op_norm(qw @ b @ qw)
    return op_norm(a @ b), 2 * a_w * op_norm(b) + op_norm(a) * b_q


def chain_product_check(ops, chain: SubspaceChain, tol: float = 1e-9) -> dict:
    """Check ``|a_1 ... a_m| <= 2^m C(m,k) M^k G^(m-k)`` (``M`` the largest
    norm, ``G`` the largest gap compression, ``k`` the chain length) and the
    two-factor bound across the first subspace for adjacent pairs.

    Raises
    ------
    TooFewFactors
        If ``m < k``.
    ChainNotInvariant
        If an operator moves some ``X_j`` (relative residual above 1e-9).
    """
    ops = [as_cmatrix(a) for a in ops]
    m, k = len(ops), len(chain)
    if m < k:
        raise TooFewFactors(f"{m} factors for a chain of length {k}")
    for a in ops:
        res = invariance_residual(a, chain)
        if res > INVARIANCE_TOL:
            raise ChainNotInvariant(f"operator moves the chain (residual {res:.3e})")
    bb = chain_block_bounds(ops, chain)
    prod = ops[0]
    for a in ops[1:]:
        prod = prod @ a
    pn = op_norm(prod)
    bound = 2.0**m * math.comb(m, k) * bb.max_norm**k * bb.max_gap_norm ** (m - k)
    slack = tol * max(bb.max_norm, 1e-300) ** m
    w = chain.bases[0] if k else np.zeros((chain.dimension, 0), dtype=complex)
    pair_excess = 0.0
    for a, b in zip(ops, ops[1:]):
        lhs, rhs = subspace_product_bound(a, b, w)
        pair_excess = max(pair_excess, lhs - rhs - tol * max(op_norm(a) * op_norm(b), 1e-300))
    return {
        "max_norm": bb.max_norm,
        "max_gap_norm": bb.max_gap_norm,
        "k": k,
        "m": m,
        "product_norm": pn,
        "bound": bound,
        "holds": bool(pn <= bound + slack),
        "pair_bound_holds": bool(pair_excess <= 0),
        "pair_bound_excess": float(pair_excess),
    }


@dataclass(frozen=True)
class DecayCurve:
    m: np.ndarray
    counts: np.ndarray
    max_norms: np.ndarray
    roots: np.ndarray
    nil_index: int

    def thirds(self) -> tuple[float, float]:
        """Mean root over the first and the last third of ``m``."""
        n = len(self.roots)
        t = max(1, n // 3)
        return float(np.mean(self.roots[:t])), float(np.mean(self.roots[-t:]))

    @property
    def decay_trend(self) -> bool:
        head, tail = self.thirds()
        return tail < head

    def to_csv(self) -> str:
        lines = ["m,count_enumerated,max_norm,root"]
        for m, c, x, r in zip(self.m, self.counts, self.max_norms, self.roots):
            lines.append(f"{int(m)},{int(c)},{float(x)!r},{float(r)!r}")
        return "\n".join(lines) + "\n"


def product_decay(
    radical_factors, bounded_factors, fraction: float, m_max: int, budget: int | None = None
) -> DecayCurve:
    """Largest norm of length-``m`` products with at least
    ``ceil(fraction * m)`` radical factors, for ``m = 1..m_max``.

    The radical factors must lie in the radical ``R`` of the unital algebra
    generated by both lists.  If ``R^s = 0``, a word with ``s`` radical
    factors is exactly zero (group each radical factor with the bounded
    factors before it), so such prefixes are not extended, and lengths with
    ``ceil(fraction * m) >= s`` are zero without enumeration.

    Raises
    ------
    RadicalHypothesisViolated
        If some radical factor is outside the radical.
    BudgetExceeded
        If enumeration needs more word products than ``budget``.
    """
    K = [as_cmatrix(x, square=True) for x in radical_factors]
    F = [as_cmatrix(x, square=True) for x in (bounded_factors or [])]
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    A = algebra_closure(K + F, unital=True)
    R = jacobson_radical(A)
    for x in K:
        if R.distance(x) > 1e-8 * max(1.0, op_norm(x)):
            raise RadicalHypothesisViolated("a radical factor is outside the radical")
    s = nil_index(R.basis)
    members = np.array(K + F)
    tags = np.array([1] * len(K) + [0] * len(F))
    budget = DEFAULT_BUDGET if budget is None else budget
    ms = np.arange(1, m_max + 1)
    counts = np.zeros(m_max, dtype=np.int64)
    norms = np.zeros(m_max)
    used = 0
    for m in ms:
        need = math.ceil(fraction * m - 1e-12)
        if need >= s:
            continue
        best = [0.0, 0]

        def visit(blk: WordBlock, m=m, need=need, best=best):
            if blk.level == m:
                ok = blk.tags >= need
                best[1] += int(np.count_nonzero(ok))
                # words with s or more radical factors are exactly zero
                ok &= blk.tags < s
                if np.any(ok):
                    best[0] = max(best[0], float(np.max(op_norms(blk.products[ok]))))

        def expand(blk: WordBlock, m=m, need=need):
            left = m - blk.level
            return (blk.tags < s) & (blk.tags + left >= need)

        used += walk(members, m, visit, tags=tags, expand=expand, budget=budget - used, precheck=False)
        norms[m - 1], counts[m - 1] = best
    roots = norms ** (1.0 / ms)
    return DecayCurve(ms, counts, norms, roots, s)
