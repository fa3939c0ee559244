"""Seeded property suites, one per acceptance property.

Every suite takes a base seed and returns a plain dictionary with a
``passed`` flag and deterministic summary numbers (no timings), so two runs
with the same seed serialize to identical bytes.  Each suite derives its own
generator from the base seed and its name, so suites are independent of the
order or process they run in.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

from .elementary import (
    ElementaryOperator,
    elem_matrix,
    elem_trace,
    spectral_inclusion_check,
    strong_engel_check,
)
from .families import (
    SummableFamily,
    mixing_transform,
    word_norm_sum,
    family_convolution,
    family_disjoint_union,
    family_power,
    family_product,
    family_sum,
    free_semigroup_lift,
    geometric_bracket,
    jsr_bracket,
    power_norm_table,
)
from .io import to_plain
from .linalg import (
    Contour,
    op_norm,
    projection_rank,
    random_complex,
    random_unitary,
    riesz_projection,
    spectral_radius,
    spectrum,
    unvec,
)
from .ordered_pair import (
    eigenspace_ideal_check,
    isolating_contour,
    measure_constants,
    spectral_subspace,
    spectral_subspace_run,
)
from .radical import IdealSubspace, MatrixAlgebra, quotient_rate
from .triangular import chain_product_check, lowering_residual, product_decay, triangularize

GOLDEN = (1 + math.sqrt(5)) / 2


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(name.encode())])


def _report(name: str, passed: bool, cases: int, **details) -> dict:
    return to_plain({"suite": name, "passed": bool(passed), "cases": int(cases), "details": details})


def jsr_single(seed: int = 42) -> dict:
    """Single-matrix brackets against the spectral radius."""
    rng = _rng(seed, "jsr_single")
    failures, widest = 0, 0.0
    for _ in range(100):
        d = int(rng.integers(1, 6))
        a = random_complex(rng, (d, d)) / math.sqrt(d)
        br = jsr_bracket([a], delta=1e-4)
        rho = spectral_radius(a)
        widest = max(widest, br.width)
        ok = br.certified and br.lower <= rho * (1 + 1e-12) + 1e-15 and rho <= br.upper and br.width <= 1e-3
        failures += not ok
    return _report("jsr_single", failures == 0, 100, failures=failures, max_width=widest)


def jsr_golden(seed: int = 42) -> dict:
    """The pair of unipotent shears whose joint radius is the golden ratio."""
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    b = a.T
    br = jsr_bracket([a, b], delta=1e-3, budget=10**6)
    ok = br.lower <= GOLDEN <= br.upper and br.width <= 0.05
    return _report("jsr_golden", ok, 1, bracket=br.to_dict(), target=GOLDEN)


def berger_wang(seed: int = 42) -> dict:
    """Gap between the product-norm bound and the generalized radius."""
    rng = _rng(seed, "berger_wang")
    gaps6, gaps14, negative = [], [], 0
    n = np.arange(1, 15)
    for _ in range(50):
        K = SummableFamily([random_complex(rng, (2, 2)) for _ in range(2)])
        t = power_norm_table(K, 14, radii=True)
        roots = t.set_norms ** (1.0 / n)
        for depth, out in ((6, gaps6), (14, gaps14)):
            g = float(np.min(roots[:depth]) - np.max(t.gen_radii[:depth]))
            negative += g < -1e-12
            out.append(g)
    m6, m14 = float(np.median(gaps6)), float(np.median(gaps14))
    ok = negative == 0 and m14 < m6
    return _report("berger_wang", ok, 50, negative_gaps=negative, median_gap_6=m6, median_gap_14=m14,
                   min_gap=float(min(gaps6 + gaps14)))


def _rel_excess(lhs: float, rhs: float) -> float:
    return (lhs - rhs) / max(abs(rhs), 1e-300)


def word_sum_inequalities(seed: int = 42) -> dict:
    """Exact word-sum inequalities of the family calculus."""
    rng = _rng(seed, "word_sum_inequalities")
    tol = 1e-9
    worst = {"submultiplicative": -math.inf, "convolution": -math.inf, "sum": -math.inf, "abs": -math.inf}
    viol = dict.fromkeys(worst, 0)

    def record(key, lhs, rhs):
        e = _rel_excess(lhs, rhs)
        worst[key] = max(worst[key], e)
        viol[key] += e > tol

    for _ in range(100):
        d = int(rng.integers(1, 4))
        p = int(rng.integers(1, 3))
        M = SummableFamily([random_complex(rng, (d, d)) for _ in range(p)])
        N = SummableFamily([random_complex(rng, (d, d)) for _ in range(p)])
        k = int(rng.integers(1, 6))
        table = power_norm_table(M, k, radii=False)
        e = table.word_sums
        for i in range(1, k):
            for j in range(1, k - i + 1):
                record("submultiplicative", e[i + j - 1], e[i - 1] * e[j - 1])
        conv, prod = family_convolution(M, N), family_product(M, N)
        kk = min(k, 3)
        record("convolution", word_norm_sum(family_power(conv, kk)), word_norm_sum(family_power(prod, kk)))
        record("sum", word_norm_sum(family_power(family_sum(M, N), k)), word_norm_sum(family_power(family_disjoint_union(M, N), k)))
        T = random_complex(rng, (p, int(rng.integers(1, 4))))
        T = T / np.maximum(np.sum(np.abs(T), axis=1, keepdims=True), 1.0) * rng.uniform(0.2, 1.0)
        A = mixing_transform(M, T)
        record("abs", word_norm_sum(family_power(A, k)), word_norm_sum(family_power(M, k)))
    total = sum(viol.values())
    return _report("word_sum_inequalities", total == 0, 100, violations=viol, worst_relative_excess=worst)


def geometric_formula(seed: int = 42) -> dict:
    """Geometric family of a scalar family versus ``c / (1 - c)``."""
    out, ok = {}, True
    for c in (0.25, 0.5):
        rep = geometric_bracket(SummableFamily([np.array([[c]])]), m_max=25, depth=8, seed=seed)
        target = c / (1 - c)
        good = rep.limit.contains(target, 1e-12) and rep.limit.width <= 1e-3
        ok &= good
        out[str(c)] = {"limit": rep.limit.to_dict(), "target": target, "passed": bool(good)}
    return _report("geometric_formula", ok, 2, scalars=out)


def free_semigroup(seed: int = 42) -> dict:
    """l1 norm of the free-semigroup lift against the word sum."""
    rng = _rng(seed, "free_semigroup")
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        k = int(rng.integers(1, 4))
        mult = [int(x) for x in rng.integers(1, 3, k)]
        M = SummableFamily([random_complex(rng, (d, d)) for _ in range(k)], mult)
        n = int(rng.integers(1, 7))
        if len(M.expanded()) ** n > 50_000:
            n = max(1, int(math.log(50_000) / math.log(len(M.expanded()))))
        lift = free_semigroup_lift(M, n).l1_norm()
        ref = word_norm_sum(family_power(M, n))
        worst = max(worst, abs(lift - ref) / ref)
    return _report("free_semigroup", worst <= 1e-12, 20, max_relative_error=worst)


def trace_formula(seed: int = 42) -> dict:
    """Term-wise trace against the trace of the Kronecker lift."""
    rng = _rng(seed, "trace_formula")
    worst = 0.0
    for _ in range(200):
        m, n = (int(x) for x in rng.integers(1, 7, 2))
        k = int(rng.integers(1, 11))
        T = ElementaryOperator(m, n, [(random_complex(rng, (m, m)), random_complex(rng, (n, n))) for _ in range(k)])
        ref = complex(np.trace(elem_matrix(T)))
        scale = max(1.0, sum(np.abs(np.diag(a)).sum() * np.abs(np.diag(b)).sum() for a, b in T.terms))
        worst = max(worst, abs(elem_trace(T) - ref) / scale)
    return _report("trace", worst <= 1e-10, 200, max_relative_error=worst)


def _upper(rng, d):
    return np.triu(random_complex(rng, (d, d)))


def spectral_inclusion(seed: int = 42) -> dict:
    """Sum and product inclusions for upper-triangular coefficients."""
    rng = _rng(seed, "spectral_inclusion")
    worst, failures, hyp = 0.0, 0, 0
    for _ in range(100):
        m, n = (int(x) for x in rng.integers(1, 5, 2))
        k = int(rng.integers(1, 4))
        u = ElementaryOperator(m, n, [(_upper(rng, m), _upper(rng, n)) for _ in range(k)])
        v = ElementaryOperator(m, n, [(_upper(rng, m), _upper(rng, n)) for _ in range(k)])
        r = spectral_inclusion_check(u, v)
        worst = max(worst, r["sum_distance"], r["product_distance"])
        hyp += not r["hypothesis_satisfied"]
        failures += not r["inclusion_holds"]
    return _report("spectral_inclusion", failures == 0 and hyp == 0, 100, failures=failures,
                   hypothesis_failures=hyp, max_distance=worst)


def strong_engel(seed: int = 42) -> dict:
    """Coefficients drawn from scalars plus strictly upper-triangular."""
    rng = _rng(seed, "strong_engel")
    worst, failures = 0.0, 0
    for _ in range(100):
        d = int(rng.integers(2, 6))
        k = int(rng.integers(1, 5))

        def unipotent_plus_scalar():
            return random_complex(rng, ()) * np.eye(d) + np.triu(random_complex(rng, (d, d)), 1)

        T = ElementaryOperator(d, d, [(unipotent_plus_scalar(), unipotent_plus_scalar()) for _ in range(k)])
        r = strong_engel_check(T)
        worst = max(worst, r["distance"])
        failures += not (r["hypothesis_satisfied"] and r["inclusion_holds"])
    return _report("strong_engel", failures == 0, 100, failures=failures, max_distance=worst)


def _block_algebra(sizes) -> tuple[MatrixAlgebra, IdealSubspace]:
    d = sum(sizes)
    block = np.repeat(np.arange(len(sizes)), sizes)
    units, off = [], []
    for i in range(d):
        for j in range(d):
            if block[i] <= block[j]:
                e = np.zeros((d, d), dtype=complex)
                e[i, j] = 1
                units.append(e)
                if block[i] < block[j]:
                    off.append(e)
    A = MatrixAlgebra(d, np.array(units), True)
    J = IdealSubspace(A, np.array(off) if off else np.zeros((0, d, d), dtype=complex))
    return A, J


def quotient_rate_oracle(seed: int = 42) -> dict:
    """Rate of ``dist(a^n, J)`` against the radius of the diagonal part.

    Diagonal blocks are normal with a separated top modulus, so the
    Frobenius rates reach the radius geometrically fast.
    """
    rng = _rng(seed, "quotient_rate_oracle")
    worst = 0.0
    for _ in range(50):
        sizes = [int(x) for x in rng.integers(1, 3, int(rng.integers(2, 4)))]
        d = sum(sizes)
        mods = rng.uniform(0.1, 0.9, d)
        top = int(rng.integers(d))
        mods[top] = 1.0
        eig = mods * np.exp(2j * np.pi * rng.uniform(size=d))
        diag = np.zeros((d, d), dtype=complex)
        start = 0
        for s in sizes:
            u = random_unitary(rng, s)
            diag[start : start + s, start : start + s] = u @ np.diag(eig[start : start + s]) @ u.conj().T
            start += s
        _, J = _block_algebra(sizes)
        a = diag + np.tensordot(random_complex(rng, len(J.basis)), J.basis, axes=1)
        rho = spectral_radius(diag)
        rep = quotient_rate(a, J, n_max=200)
        worst = max(worst, abs(rep.inf_rate - rho))
    return _report("quotient_rate_oracle", worst <= 1e-6, 50, max_abs_error=worst)


def triangularization(seed: int = 42) -> dict:
    """Chains for nil families conjugated by well-conditioned similarities."""
    rng = _rng(seed, "triangularization")
    low, prod, viol, sampled = 0.0, 0.0, 0, 0
    for _ in range(100):
        d = int(rng.integers(2, 7))
        k = int(rng.integers(1, 4))
        S = random_unitary(rng, d) @ np.diag(np.exp(rng.uniform(0, math.log(10), d))) @ random_unitary(rng, d)
        Si = np.linalg.inv(S)
        gens = [S @ np.triu(random_complex(rng, (d, d)), 1) @ Si for _ in range(k)]
        chain = triangularize(gens)
        low = max(low, max(lowering_residual(g, chain) for g in gens))
        max_norm = max(op_norm(g) for g in gens)
        for _ in range(5):
            p = np.eye(d, dtype=complex)
            for i in rng.integers(0, k, d):
                p = p @ gens[i]
            prod = max(prod, op_norm(p) / max_norm**d)
        for _ in range(2):
            m = int(rng.integers(len(chain), 11))
            r = chain_product_check([gens[i] for i in rng.integers(0, k, m)], chain)
            sampled += 1
            viol += not (r["holds"] and r["pair_bound_holds"])
    ok = low <= 1e-9 and prod <= 1e-8 and viol == 0
    return _report("triangularization", ok, 100, max_lowering_residual=low,
                   max_relative_product=prod, bound_violations=viol, sampled_products=sampled)


def product_decay_trend(seed: int = 42) -> dict:
    """Head versus tail of the decay curve for radical-weighted products."""
    rng = _rng(seed, "product_decay_trend")
    rows, failures = [], 0
    for _ in range(10):
        d = int(rng.integers(3, 5))
        frac = float(rng.choice([1 / 3, 1 / 2]))
        S = random_unitary(rng, d) @ np.diag(np.exp(rng.uniform(0, math.log(3), d))) @ random_unitary(rng, d)
        Si = np.linalg.inv(S)
        K = [S @ np.triu(random_complex(rng, (d, d), 0.7), 1) @ Si]
        F = [S @ np.triu(random_complex(rng, (d, d), 0.3) + np.diag(rng.uniform(0.6, 1.0, d))) @ Si]
        curve = product_decay(K, F, frac, 16)
        head, tail = curve.thirds()
        good = tail <= 0.6 * head
        failures += not good
        rows.append({"fraction": frac, "dimension": d, "head_mean": head, "tail_mean": tail})
    return _report("product_decay", failures == 0, 10, failures=failures, configurations=rows)


def _semicompact(rng, d: int, r: int, terms: int) -> ElementaryOperator:
    # each term has one coefficient upper triangular with zero diagonal past
    # index r, so long products of it land in the first-r-rows ideal
    out, flags = [], []
    for _ in range(terms):
        small = _upper(rng, d)
        small[np.arange(r, d), np.arange(r, d)] = 0
        other = _upper(rng, d)
        if rng.random() < 0.5:
            out.append((small, other))
            flags.append((True, False))
        else:
            out.append((other, small))
            flags.append((False, True))
    return ElementaryOperator(d, d, out, flags)


def spectral_subspace_bound(seed: int = 42) -> dict:
    """Nuclear norm bound on the Riesz subspace of semicompact operators."""
    rng = _rng(seed, "spectral_subspace_bound")
    d, r = 6, 3
    violations, checked, tightest = 0, 0, 0.0
    ms = []
    for _ in range(50):
        T = _semicompact(rng, d, r, 3)
        ev = spectrum(elem_matrix(T)).eigenvalues
        lam = ev[int(np.argmax(np.abs(ev)))]
        Z = spectral_subspace(T, isolating_contour(ev, lam))
        consts = measure_constants(T, Z, r)
        ms.append(consts.power)
        zs = [Z[:, j] for j in range(Z.shape[1])]
        zs += [Z @ random_complex(rng, Z.shape[1]) for _ in range(3)]
        for v in zs:
            run = spectral_subspace_run(T, unvec(v, d, d), Z, consts)
            checked += 1
            violations += not run.verdict
            tightest = max(tightest, run.z_schatten_norm / (run.bound_constant * run.z_op_norm))
    return _report("spectral_subspace_bound", violations == 0, 50, violations=violations,
                   elements_checked=checked, max_bound_ratio=tightest, powers_used=sorted(set(ms)))


def quasinorm_bounds(seed: int = 42) -> dict:
    """Quasinorm inequalities on eigenspaces of random operators."""
    rng = _rng(seed, "quasinorm_bounds")
    failures, worst = {}, {}
    for p in (1.0, 0.5, 0.25):
        fail, w = 0, -math.inf
        for _ in range(50):
            T = ElementaryOperator(4, 4, [(random_complex(rng, (4, 4)), random_complex(rng, (4, 4))) for _ in range(5)])
            ev = spectrum(elem_matrix(T)).eigenvalues
            lam = ev[int(np.argmax(np.abs(ev)))]
            rep = eigenspace_ideal_check(T, lam, p)
            fail += not rep.passed
            w = max(w, rep.worst_p_norm, rep.worst_rank)
        failures[str(p)] = fail
        worst[str(p)] = w
    return _report("quasinorm_bounds", sum(failures.values()) == 0, 150, failures=failures,
                   worst_relative_excess=worst)


def riesz_projection_suite(seed: int = 42) -> dict:
    """Idempotence, commutation and rank of contour projections."""
    rng = _rng(seed, "riesz_projection")
    idem, comm, rank_fail = 0.0, 0.0, 0
    for _ in range(100):
        d = int(rng.integers(2, 7))
        centers = np.array([0.0, 3.0, 3.0j, -3.0])[: int(rng.integers(2, 5))]
        labels = rng.integers(0, len(centers), d)
        ev = centers[labels] + random_complex(rng, d, 0.3)
        S = random_unitary(rng, d) @ np.diag(np.exp(rng.uniform(0, math.log(10), d))) @ random_unitary(rng, d)
        a = S @ np.diag(ev) @ np.linalg.inv(S)
        pick = int(labels[0])
        p = riesz_projection(a, Contour(complex(centers[pick]), 1.5))
        scale = max(1.0, op_norm(p))
        idem = max(idem, op_norm(p @ p - p) / scale**2)
        comm = max(comm, op_norm(p @ a - a @ p) / (scale * max(1.0, op_norm(a))))
        rank_fail += projection_rank(p) != int(np.count_nonzero(labels == pick))
    ok = idem <= 1e-8 and comm <= 1e-8 and rank_fail == 0
    return _report("riesz_projection", ok, 100, max_idempotence_residual=idem,
                   max_commutator_residual=comm, rank_failures=rank_fail)


SUITES = {
    "jsr_single": jsr_single,
    "jsr_golden": jsr_golden,
    "berger_wang": berger_wang,
    "word_sum_inequalities": word_sum_inequalities,
    "geometric_formula": geometric_formula,
    "free_semigroup": free_semigroup,
    "trace": trace_formula,
    "spectral_inclusion": spectral_inclusion,
    "strong_engel": strong_engel,
    "quotient_rate_oracle": quotient_rate_oracle,
    "triangularization": triangularization,
    "product_decay": product_decay_trend,
    "spectral_subspace_bound": spectral_subspace_bound,
    "quasinorm_bounds": quasinorm_bounds,
    "riesz_projection": riesz_projection_suite,
}


def run_suite(name: str, seed: int = 42) -> dict:
    return SUITES[name](seed)
