"""Matrix families, word sums, and spectral-radius brackets.

A summable family is a finite list of square matrices with positive integer
multiplicities.  ``word_norm_sum`` sums multiplicity-weighted operator norms, and the
word sums ``word_norm_sum(M^n)`` over all length-``n`` products give the tensor
spectral radius ``inf_n word_norm_sum(M^n)^(1/n)``.  The joint spectral radius of a
bounded family uses the max instead of the sum.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BudgetExceeded,
    CoefficientTooLarge,
    DimMismatch,
    InputError,
    LengthMismatch,
    RadiusNotBelowOne,
    RowSumExceeded,
)
from .linalg import as_cmatrix, fro_norms, op_norm, op_norms, spectral_radii, spectral_radius
from .words import DEFAULT_BUDGET, WordBlock, decode_word, walk, word_count

SIGN_EXHAUSTIVE_MAX = 12
TORUS_SAMPLES = 4096
# relative widening that absorbs roundoff in computed roots and radii
ROUNDING = 64 * np.finfo(float).eps


def _stack(members) -> np.ndarray:
    mats = [as_cmatrix(a, square=True) for a in members]
    if not mats:
        raise InputError("a family needs at least one member")
    d = mats[0].shape[0]
    for a in mats:
        if a.shape[0] != d:
            raise DimMismatch("family members must share one dimension")
    return np.array(mats)


@dataclass(frozen=True, eq=False)
class SummableFamily:
    """Finite family of ``d x d`` matrices with multiplicities."""

    members: np.ndarray
    multiplicities: tuple[int, ...]

    def __init__(self, members, multiplicities=None):
        mats = _stack(members)
        if multiplicities is None:
            mult = (1,) * len(mats)
        else:
            mult = tuple(int(m) for m in multiplicities)
        if len(mult) != len(mats):
            raise LengthMismatch("one multiplicity per member is required")
        if any(m < 1 for m in mult):
            raise InputError("multiplicities must be positive integers")
        object.__setattr__(self, "members", mats)
        object.__setattr__(self, "multiplicities", mult)

    @property
    def dimension(self) -> int:
        return self.members.shape[1]

    def __len__(self) -> int:
        return len(self.members)

    @property
    def weights(self) -> np.ndarray:
        return np.array(self.multiplicities, dtype=float)

    def expanded(self) -> np.ndarray:
        """Members repeated by multiplicity, in listed order."""
        return np.repeat(self.members, self.multiplicities, axis=0)


@dataclass(frozen=True, eq=False)
class BoundedFamily:
    members: np.ndarray

    def __init__(self, members):
        object.__setattr__(self, "members", _stack(members))

    @property
    def dimension(self) -> int:
        return self.members.shape[1]

    def __len__(self) -> int:
        return len(self.members)

    @property
    def norm(self) -> float:
        return float(np.max(op_norms(self.members)))


def _members(fam) -> np.ndarray:
    if isinstance(fam, (SummableFamily, BoundedFamily)):
        return fam.members
    return _stack(fam)


@dataclass(frozen=True)
class PowerNormTable:
    depth: int
    word_sums: np.ndarray
    set_norms: np.ndarray
    gen_radii: np.ndarray
    radius_words: tuple = ()
    words_evaluated: int = 0


@dataclass(frozen=True)
class RadiusBracket:
    """Certified interval for a spectral radius.

    ``lower_witness`` is a word (generator indices) when ``witness_kind`` is
    ``"word"``, a coefficient vector when it is ``"signs"``.
    """

    lower: float
    upper: float
    lower_witness: tuple = ()
    upper_depth: int = 0
    certified: bool = True
    witness_kind: str = "word"

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def intersects(self, other: "RadiusBracket", tol: float = 0.0) -> bool:
        return self.lower <= other.upper + tol and other.lower <= self.upper + tol

    def to_dict(self) -> dict:
        wit = []
        for w in self.lower_witness:
            if isinstance(w, complex) or np.iscomplexobj(w):
                wit.append([float(np.real(w)), float(np.imag(w))])
            else:
                wit.append(int(w) if float(w).is_integer() else float(w))
        return {
            "lower": float(self.lower),
            "upper": float(self.upper),
            "lower_witness": wit,
            "upper_depth": int(self.upper_depth),
            "certified": bool(self.certified),
        }


def word_norm_sum(M: SummableFamily, norm: str = "op") -> float:
    """Multiplicity-weighted sum of member norms."""
    norms = op_norms(M.members) if norm == "op" else fro_norms(M.members)
    return float(np.dot(M.weights, norms))


def _check_dims(M, N):
    if M.dimension != N.dimension:
        raise DimMismatch(f"dimensions {M.dimension} and {N.dimension} differ")


def family_product(M: SummableFamily, N: SummableFamily) -> SummableFamily:
    """All products ``a_i b_j`` with multiplicity ``mult_i * mult_j``."""
    _check_dims(M, N)
    prods = np.matmul(M.members[:, None], N.members[None]).reshape(-1, M.dimension, M.dimension)
    mult = [p * q for p in M.multiplicities for q in N.multiplicities]
    return SummableFamily(prods, mult)


def family_disjoint_union(M: SummableFamily, N: SummableFamily) -> SummableFamily:
    _check_dims(M, N)
    return SummableFamily(
        np.concatenate([M.members, N.members]), M.multiplicities + N.multiplicities
    )


def family_convolution(M: SummableFamily, N: SummableFamily) -> SummableFamily:
    """Cauchy product ``c_n = sum_{i+j=n+1} a_i b_j`` of the expanded lists."""
    _check_dims(M, N)
    a, b = M.expanded(), N.expanded()
    p, q = len(a), len(b)
    d = M.dimension
    out = np.zeros((p + q - 1, d, d), dtype=complex)
    for i in range(p):
        out[i : i + q] += np.matmul(a[i][None], b)
    return SummableFamily(out)


def family_sum(M: SummableFamily, N: SummableFamily) -> SummableFamily:
    """Entrywise sum of the aligned expanded lists."""
    _check_dims(M, N)
    a, b = M.expanded(), N.expanded()
    if len(a) != len(b):
        raise LengthMismatch(f"expanded lengths {len(a)} and {len(b)} differ")
    return SummableFamily(a + b)


def family_power(M: SummableFamily, n: int, budget: int | None = None) -> SummableFamily:
    """The family ``M^n`` of all length-``n`` words, weights multiplied."""
    if n < 1:
        raise InputError("power must be at least 1")
    budget = DEFAULT_BUDGET if budget is None else budget
    if len(M) ** n > budget:
        raise BudgetExceeded(f"{len(M) ** n} words exceed the budget of {budget}")
    prods, weights = [], []

    def visit(blk: WordBlock):
        if blk.level == n:
            prods.append(blk.products)
            weights.append(blk.weights)

    walk(M.members, n, visit, weights=M.weights, budget=budget, precheck=False)
    w = np.concatenate(weights)
    return SummableFamily(np.concatenate(prods), np.rint(w).astype(int))


def _norm_fn(norm):
    if callable(norm):
        return norm
    if norm == "op":
        return op_norms
    if norm == "fro":
        return fro_norms
    raise InputError(f"unknown norm {norm!r}")


def power_norm_table(
    M: SummableFamily,
    depth: int,
    norm="op",
    radii: bool = True,
    budget: int | None = None,
) -> PowerNormTable:
    """Exact word sums ``word_norm_sum(M^n)``, maxima ``|K^n|`` and radii ``r_n``.

    Parameters
    ----------
    norm : {"op", "fro"} or callable
        Norm applied to each word product; a callable maps a ``(B, d, d)``
        stack to ``B`` values.
    radii : bool
        Also compute ``r_n = max_w rho(P_w)^(1/n)`` with a witness word.
    """
    if depth < 1:
        raise InputError("depth must be at least 1")
    k = len(M)
    fn = _norm_fn(norm)
    eta_v = np.zeros(depth)
    set_n = np.zeros(depth)
    gen_r = np.zeros(depth)
    best_code = [0] * depth

    def visit(blk: WordBlock):
        i = blk.level - 1
        nv = fn(blk.products)
        eta_v[i] += float(np.dot(blk.weights, nv))
        set_n[i] = max(set_n[i], float(np.max(nv)))
        if radii:
            rv = spectral_radii(blk.products)
            j = int(np.argmax(rv))
            r = float(rv[j]) ** (1.0 / blk.level)
            if r > gen_r[i]:
                gen_r[i] = r
                best_code[i] = int(blk.codes[j])

    formed = walk(M.members, depth, visit, weights=M.weights, budget=budget)
    words = tuple(tuple(decode_word(best_code[i], k, i + 1)) for i in range(depth))
    return PowerNormTable(depth, eta_v, set_n, gen_r, words, formed)


def _sign_vectors(count: int, rng: np.random.Generator) -> np.ndarray:
    if count <= SIGN_EXHAUSTIVE_MAX:
        return np.array(list(itertools.product((1.0, -1.0), repeat=count)), dtype=complex)
    theta = rng.uniform(0.0, 2 * np.pi, size=(TORUS_SAMPLES, count))
    return np.vstack([np.ones((1, count), dtype=complex), np.exp(1j * theta)])


def sign_combination_lower_bound(M: SummableFamily, seed: int = 42) -> tuple[float, np.ndarray]:
    """Largest ``rho(sum t_i a_i)`` over sign vectors (exhaustive for at most
    12 expanded members, otherwise seeded torus samples plus all-ones)."""
    a = M.expanded()
    t = _sign_vectors(len(a), np.random.default_rng(seed))
    best, best_t = 0.0, t[0]
    d = M.dimension
    flat = a.reshape(len(a), d * d)
    for s in range(0, len(t), 1024):
        blk = t[s : s + 1024]
        combos = (blk @ flat).reshape(len(blk), d, d)
        rv = spectral_radii(combos)
        j = int(np.argmax(rv))
        if rv[j] > best:
            best, best_t = float(rv[j]), blk[j]
    return best, best_t


def _outward(lower: float, upper: float) -> tuple[float, float]:
    return lower * (1 - ROUNDING), upper * (1 + ROUNDING)


def _witness(t: np.ndarray) -> tuple:
    if np.all(np.abs(t.imag) == 0):
        return tuple(float(x) for x in t.real)
    return tuple(complex(x) for x in t)


def tsr_bracket(
    M: SummableFamily,
    depth: int,
    norm="op",
    seed: int = 42,
    budget: int | None = None,
    table: PowerNormTable | None = None,
) -> RadiusBracket:
    """Bracket for the tensor spectral radius.

    Upper: ``min_{m <= depth} word_norm_sum(M^m)^(1/m)``, valid because the radius is
    an infimum.  Lower: the larger of the generalized radii ``r_m`` and the
    spectral radii of sign combinations of the members.
    """
    if table is None:
        table = power_norm_table(M, depth, norm=norm, radii=True, budget=budget)
    n = np.arange(1, table.depth + 1)
    roots = table.word_sums ** (1.0 / n)
    up_i = int(np.argmin(roots))
    upper = float(roots[up_i])
    r_i = int(np.argmax(table.gen_radii))
    lower = float(table.gen_radii[r_i])
    witness: tuple = table.radius_words[r_i]
    kind = "word"
    om, t = sign_combination_lower_bound(M, seed)
    if om > lower:
        lower, witness, kind = om, _witness(t), "signs"
    lower, upper = _outward(lower, upper)
    return RadiusBracket(lower, upper, witness, up_i + 1, True, kind)


def _jsr_single(a: np.ndarray, delta: float, budget: int) -> RadiusBracket:
    # One generator: the word tree is a chain.  Prefix norms are sampled at
    # powers 2^j by repeated squaring of a / s, logs tracking the scale.
    rho = spectral_radius(a)
    s = rho if rho > 0 else op_norm(a)
    if s == 0:
        return RadiusBracket(0.0, delta, (0,), 1, True)
    y = a / s
    ny = op_norm(y)
    g = s * ny
    lower, best_j = rho, 1
    log_n = math.log(ny)
    y = y / ny
    j, evaluated = 1, 1
    while g > lower + delta:
        if evaluated >= budget:
            return RadiusBracket(lower, g, (0,) * min(best_j, 64), j, False)
        y2 = y @ y
        n2 = op_norm(y2)
        j *= 2
        evaluated += 1
        if n2 == 0:
            g = 0.0
            break
        log_n = 2 * log_n + math.log(n2)
        y = y2 / n2
        g = min(g, s * math.exp(log_n / j))
        r = spectral_radius(y)
        if r > 0:
            rj = s * math.exp((log_n + math.log(r)) / j)
            if rj > lower:
                lower, best_j = rj, j
    return RadiusBracket(lower, lower + delta, (0,) * min(best_j, 64), j, True)


def jsr_bracket(K, delta: float = 1e-3, budget: int | None = None) -> RadiusBracket:
    """Branch-and-bound bracket for the joint spectral radius.

    Keeps a word ``w`` while ``g(w) = min_j |P_{w[:j]}|^(1/j)`` exceeds
    ``L + delta``, ``L`` being the best ``rho(P_w)^(1/|w|)`` so far; the
    frontier is a max-heap on ``g``.  On exhaustion returns
    ``[L, L + delta]``; when the budget runs out, returns
    ``[L, max(L + delta, max frontier g)]`` flagged as not certified.
    """
    if not delta > 0:
        raise InputError("delta must be positive")
    mats = _members(K)
    budget = DEFAULT_BUDGET if budget is None else int(budget)
    k = len(mats)
    if k == 1:
        return _jsr_single(mats[0], delta, budget)
    norms = op_norms(mats)
    rhos = spectral_radii(mats)
    i0 = int(np.argmax(rhos))
    lower, witness = float(rhos[i0]), (i0,)
    heap: list = []
    counter = 0
    for i in range(k):
        if norms[i] > 0:
            heapq.heappush(heap, (-float(norms[i]), counter, (i,), mats[i] / norms[i], math.log(norms[i])))
            counter += 1
    evaluated = k
    certified = True
    while heap:
        neg_g, _, word, q, log_s = heap[0]
        g = -neg_g
        if g <= lower + delta:
            heapq.heappop(heap)
            continue
        if evaluated + k > budget:
            certified = False
            break
        heapq.heappop(heap)
        n = len(word) + 1
        kids = np.matmul(q[None], mats)
        kn = op_norms(kids)
        kr = spectral_radii(kids)
        evaluated += k
        with np.errstate(divide="ignore"):
            log_kn = log_s + np.log(kn)
            log_kr = log_s + np.log(kr)
        for i in range(k):
            if kr[i] > 0:
                r = math.exp(log_kr[i] / n)
                if r > lower:
                    lower, witness = r, word + (i,)
        for i in range(k):
            if kn[i] == 0:
                continue
            gi = min(g, math.exp(log_kn[i] / n))
            if gi > lower + delta:
                heapq.heappush(heap, (-gi, counter, word + (i,), kids[i] / kn[i], float(log_kn[i])))
                counter += 1
    frontier = max((-h[0] for h in heap if -h[0] > lower + delta), default=0.0)
    upper = max(lower + delta, frontier)
    return RadiusBracket(lower, upper, witness, 0, certified)


def berger_wang_gap(K, depth: int, budget: int | None = None) -> tuple[float, float, float]:
    """``(max_m r_m, min_m |K^m|^(1/m), gap)`` over ``m <= depth``."""
    fam = SummableFamily(_members(K))
    table = power_norm_table(fam, depth, radii=True, budget=budget)
    n = np.arange(1, depth + 1)
    upper = float(np.min(table.set_norms ** (1.0 / n)))
    r = float(np.max(table.gen_radii))
    return r, upper, upper - r


def mixing_transform(M: SummableFamily, T) -> SummableFamily:
    """``b_m = sum_n t[n, m] a_n`` over the expanded list of ``M``.

    Raises
    ------
    RowSumExceeded
        If some row of ``T`` has absolute sum above 1.
    """
    a = M.expanded()
    T = np.asarray(T, dtype=complex)
    if T.ndim != 2 or T.shape[0] != len(a):
        raise LengthMismatch(f"coefficient matrix needs {len(a)} rows, got shape {T.shape}")
    rows = np.sum(np.abs(T), axis=1)
    if np.any(rows > 1 + 1e-12):
        raise RowSumExceeded(f"row l1 sum {float(np.max(rows)):.6g} exceeds 1")
    return SummableFamily(np.einsum("nm,nij->mij", T, a))


def coefficient_combination(M: SummableFamily, t) -> np.ndarray:
    """``sum t_i a_i`` over the expanded list, with ``|t_i| <= 1``."""
    a = M.expanded()
    t = np.asarray(t, dtype=complex).ravel()
    if len(t) != len(a):
        raise LengthMismatch(f"need {len(a)} coefficients, got {len(t)}")
    if np.any(np.abs(t) > 1 + 1e-12):
        raise CoefficientTooLarge("coefficients must satisfy |t_i| <= 1")
    return np.tensordot(t, a, axes=1)


def geometric_family(
    M: SummableFamily, m_max: int, check_depth: int = 8, budget: int | None = None
) -> SummableFamily:
    """The truncated disjoint union of ``M, M^2, ..., M^m_max``.

    Raises
    ------
    RadiusNotBelowOne
        If the tensor-radius upper bound of ``M`` at ``check_depth`` is not
        below 1.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    br = tsr_bracket(M, min(check_depth, _feasible_depth(len(M), budget)), budget=budget)
    if not br.upper < 1:
        raise RadiusNotBelowOne(f"tensor radius upper bound {br.upper:.6g} is not below 1")
    if word_count(len(M), m_max) > budget:
        raise BudgetExceeded("geometric family too large for the budget")
    parts = [family_power(M, m, budget) for m in range(1, m_max + 1)]
    members = np.concatenate([p.members for p in parts])
    mult = sum((p.multiplicities for p in parts), ())
    return SummableFamily(members, mult)


def _feasible_depth(k: int, budget: int, cap: int = 10_000) -> int:
    if k <= 1:
        return max(1, min(cap, budget))
    n, total, level = 1, k, k
    while n < cap:
        level *= k
        if total + level > budget:
            break
        total += level
        n += 1
    return n


def _composition_counts(n_max: int, m_max: int) -> list[np.ndarray]:
    """``c[n][L]``: compositions of ``L`` into ``n`` parts in ``1..m_max``."""
    counts = [np.zeros(1)]
    counts[0][0] = 1.0
    for n in range(1, n_max + 1):
        prev = counts[-1]
        cur = np.zeros(len(prev) + m_max)
        for j in range(1, m_max + 1):
            cur[j : j + len(prev)] += prev
        counts.append(cur)
    return counts


@dataclass(frozen=True)
class GeometricReport:
    truncated: RadiusBracket
    limit: RadiusBracket
    base: RadiusBracket
    word_sums: np.ndarray


def geometric_bracket(
    M: SummableFamily, m_max: int, depth: int, budget: int | None = None, seed: int = 42
) -> GeometricReport:
    """Brackets for the geometric family built from ``M``.

    ``word_norm_sum(G^n)`` for the truncated family ``G`` is computed exactly from the
    word sums of ``M``: a length-``n`` word of ``G`` is a word of ``M`` of
    length ``L`` split into ``n`` blocks of sizes in ``1..m_max``, so
    ``word_norm_sum(G^n) = sum_L c(n, L) word_norm_sum(M^L)`` with composition counts ``c``.
    Word sums of ``M`` beyond the enumerable depth are replaced by
    submultiplicative upper bounds.  The limit bracket applies
    ``x -> x / (1 - x)`` to the bracket of ``M`` and is tightened below by the
    truncated family, which is a subfamily.
    """
    budget = DEFAULT_BUDGET if budget is None else budget
    k = len(M)
    need = depth * m_max
    m_depth = min(need, _feasible_depth(k, budget))
    table = power_norm_table(M, m_depth, radii=True, budget=budget)
    base = tsr_bracket(M, m_depth, seed=seed, table=table)
    if not base.upper < 1:
        raise RadiusNotBelowOne(f"tensor radius upper bound {base.upper:.6g} is not below 1")
    eta_m = np.zeros(need + 1)
    eta_m[1 : m_depth + 1] = table.word_sums
    for L in range(m_depth + 1, need + 1):
        q, r = divmod(L, m_depth)
        eta_m[L] = table.word_sums[m_depth - 1] ** q * (eta_m[r] if r else 1.0)
    counts = _composition_counts(depth, m_max)
    eta_g = np.array([float(np.dot(counts[n][: need + 1], eta_m[: len(counts[n])])) for n in range(1, depth + 1)])
    roots = eta_g ** (1.0 / np.arange(1, depth + 1))
    up_i = int(np.argmin(roots))
    t_upper = float(roots[up_i])
    # one-letter words of G are words of M of length m <= m_max
    m_idx = np.arange(1, min(m_max, m_depth) + 1)
    r_one = table.gen_radii[: len(m_idx)] ** m_idx
    t_lower = float(np.max(r_one))
    t_wit: tuple = table.radius_words[int(np.argmax(r_one))]
    kind = "word"
    if word_count(k, m_max) <= min(budget, 100_000):
        G = geometric_family(M, m_max, check_depth=min(8, m_depth), budget=budget)
        om, t = sign_combination_lower_bound(G, seed)
        if om > t_lower:
            t_lower, t_wit, kind = om, _witness(t), "signs"
    t_lower, t_upper = _outward(t_lower, t_upper)
    truncated = RadiusBracket(t_lower, t_upper, t_wit, up_i + 1, True, kind)
    f = lambda x: x / (1.0 - x)
    lim_lower, lim_upper = _outward(max(f(base.lower), t_lower), f(base.upper))
    limit = RadiusBracket(
        lim_lower, lim_upper, t_wit if t_lower >= f(base.lower) else base.lower_witness,
        base.upper_depth, True, kind if t_lower >= f(base.lower) else base.witness_kind,
    )
    return GeometricReport(truncated, limit, base, eta_g)


@dataclass
class FreeWordElement:
    """Finite sum ``sum_w c_w w`` with matrix coefficients over free words."""

    terms: dict = field(default_factory=dict)

    def __mul__(self, other: "FreeWordElement") -> "FreeWordElement":
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                prod = c1 @ c2
                if w in out:
                    out[w] = out[w] + prod
                else:
                    out[w] = prod
        return FreeWordElement(out)

    def l1_norm(self) -> float:
        return float(sum(op_norm(c) for c in self.terms.values()))

    def __len__(self) -> int:
        return len(self.terms)


def free_semigroup_lift(M: SummableFamily, n: int, budget: int | None = None) -> FreeWordElement:
    """``n``-th power of ``sum_k a_k (x) g_k``, one free generator per
    expanded member; its l1 norm equals ``word_norm_sum(M^n)``."""
    a = M.expanded()
    budget = DEFAULT_BUDGET if budget is None else budget
    if len(a) ** n > budget:
        raise BudgetExceeded(f"{len(a) ** n} words exceed the budget of {budget}")
    gen = FreeWordElement({(i,): a[i] for i in range(len(a))})
    out = gen
    for _ in range(n - 1):
        out = out * gen
    return out
