"""Dense complex matrix substrate: norms, spectra, lifts, projections.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Vectorization
is column-major throughout, so the map ``x -> a @ x @ b`` on ``m x n``
matrices has the ``(mn) x (mn)`` matrix ``kron(b.T, a)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimMismatch,
    EigenvalueOnContour,
    InputError,
    InvalidP,
    NonSquare,
    ShapeMismatch,
    SingularResolvent,
)

EPS = np.finfo(float).eps


def as_cmatrix(a, square: bool = False) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex array.

    Raises
    ------
    InputError
        If ``a`` is not 2-D or has non-finite entries.
    NonSquare
        If ``square`` is requested and ``a`` is rectangular.
    """
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise InputError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("matrix has non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {arr.shape}")
    return arr


def vec(x: np.ndarray) -> np.ndarray:
    """Column-major vectorization."""
    return np.asarray(x).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    return np.asarray(v).reshape(rows, cols, order="F")


def op_norm(a) -> float:
    """Largest singular value."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def op_norms(stack: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a ``(B, m, n)`` stack."""
    if stack.shape[0] == 0:
        return np.zeros(0)
    if stack.shape[1] == 1 or stack.shape[2] == 1:
        return np.sqrt(np.sum(np.abs(stack) ** 2, axis=(1, 2)))
    return np.linalg.norm(stack, 2, axis=(1, 2))


def fro_norms(stack: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.abs(stack) ** 2, axis=(1, 2)))


def spectral_radii(stack: np.ndarray) -> np.ndarray:
    """Spectral radius of each square matrix in a ``(B, d, d)`` stack."""
    if stack.shape[0] == 0:
        return np.zeros(0)
    if stack.shape[1] == 1:
        return np.abs(stack[:, 0, 0])
    return np.max(np.abs(np.linalg.eigvals(stack)), axis=1)


def spectral_radius(a) -> float:
    a = as_cmatrix(a, square=True)
    return float(spectral_radii(a[None])[0])


def singular_values(a) -> np.ndarray:
    """Singular values with numerically-zero ones set to exactly 0.

    Values at or below ``max(m, n) * eps * s_max`` are rounding noise of a
    rank-deficient matrix; zeroing them keeps quasinorms with small ``p``
    (where ``s**p`` magnifies noise) consistent with the numerical rank.
    """
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros(0)
    s = np.linalg.svd(a, compute_uv=False)
    if s[0] > 0:
        s = np.where(s > max(a.shape) * EPS * s[0], s, 0.0)
    return s


def numerical_rank(a) -> int:
    return int(np.count_nonzero(singular_values(a)))


def schatten_norm(a, p: float) -> float:
    """Schatten ``p``-(quasi)norm ``(sum s_i**p)**(1/p)``; ``p = inf`` gives the
    operator norm.

    Raises
    ------
    InvalidP
        If ``p <= 0``.
    """
    p = float(p)
    if not p > 0:
        raise InvalidP(f"p must be positive, got {p}")
    s = singular_values(as_cmatrix(a))
    if s.size == 0 or s[0] == 0:
        return 0.0
    if np.isinf(p):
        return float(s[0])
    # scale by s_max so small p does not overflow
    t = s[s > 0] / s[0]
    return float(s[0] * np.sum(t**p) ** (1.0 / p))


def nuclear_norm(a) -> float:
    return schatten_norm(a, 1.0)


def kron_lift(a, b, bimodule_dims: tuple[int, int] | None = None) -> np.ndarray:
    """Matrix of ``x -> a x b`` on ``m x n`` matrices (column-major)."""
    a = as_cmatrix(a, square=True)
    b = as_cmatrix(b, square=True)
    if bimodule_dims is not None:
        m, n = bimodule_dims
        if a.shape[0] != m or b.shape[0] != n:
            raise DimMismatch(
                f"coefficients {a.shape}, {b.shape} do not act on {m}x{n} matrices"
            )
    return np.kron(b.T, a)


@dataclass(frozen=True)
class SpectrumSet:
    """Eigenvalue multiset with a matching tolerance."""

    eigenvalues: np.ndarray
    match_tolerance: float = 1e-7

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def radius(self) -> float:
        if len(self.eigenvalues) == 0:
            return 0.0
        return float(np.max(np.abs(self.eigenvalues)))

    def sorted(self) -> np.ndarray:
        ev = np.asarray(self.eigenvalues)
        return ev[np.lexsort((ev.imag.round(12), ev.real.round(12)))]

    def distance_into(self, points) -> float:
        """One-sided Hausdorff distance from this multiset into ``points``."""
        return one_sided_hausdorff(self.eigenvalues, points)

    def matches(self, other: "SpectrumSet", tol: float | None = None) -> bool:
        tol = self.match_tolerance if tol is None else tol
        return match_spectra(self.eigenvalues, other.eigenvalues, tol)


def spectrum(a, match_tolerance: float = 1e-7) -> SpectrumSet:
    """Eigenvalues of a square matrix, with algebraic multiplicity."""
    a = as_cmatrix(a, square=True)
    if a.shape[0] == 0:
        return SpectrumSet(np.zeros(0, dtype=complex), match_tolerance)
    return SpectrumSet(np.linalg.eigvals(a).astype(complex), match_tolerance)


def one_sided_hausdorff(points, targets) -> float:
    """``max_p min_t |p - t|``; 0 for an empty source, inf for empty targets."""
    p = np.asarray(points, dtype=complex).ravel()
    t = np.asarray(targets, dtype=complex).ravel()
    if p.size == 0:
        return 0.0
    if t.size == 0:
        return float("inf")
    best = np.full(p.size, np.inf)
    step = max(1, 2_000_000 // max(t.size, 1))
    for s in range(0, p.size, step):
        blk = p[s : s + step]
        best[s : s + step] = np.min(np.abs(blk[:, None] - t[None, :]), axis=1)
    return float(np.max(best))


def match_spectra(first, second, tol: float) -> bool:
    """Greedy minimal-distance bipartite matching of two multisets.

    Repeatedly pairs the globally closest unmatched elements; succeeds when
    the sizes agree and every chosen pair is within ``tol``.
    """
    x = np.asarray(first, dtype=complex).ravel()
    y = np.asarray(second, dtype=complex).ravel()
    if x.size != y.size:
        return False
    if x.size == 0:
        return True
    dist = np.abs(x[:, None] - y[None, :])
    order = np.argsort(dist, axis=None, kind="stable")
    used_x = np.zeros(x.size, bool)
    used_y = np.zeros(y.size, bool)
    matched = 0
    for flat in order:
        i, j = divmod(int(flat), y.size)
        if used_x[i] or used_y[j]:
            continue
        if dist[i, j] > tol:
            return False
        used_x[i] = used_y[j] = True
        matched += 1
        if matched == x.size:
            break
    return True


@dataclass(frozen=True)
class Contour:
    """Positively oriented circle used for spectral projections."""

    center: complex
    radius: float
    nodes: int = 16

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("contour radius must be positive")
        if self.nodes < 16:
            raise InputError("a contour needs at least 16 nodes")

    def points(self, count: int) -> np.ndarray:
        theta = 2 * np.pi * np.arange(count) / count
        return self.center + self.radius * np.exp(1j * theta)


def _resolvent_sum(a: np.ndarray, gamma: Contour, theta: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    eye = np.eye(d)
    acc = np.zeros((d, d), dtype=complex)
    for th in theta:
        w = gamma.radius * np.exp(1j * th)
        try:
            acc += w * np.linalg.solve((gamma.center + w) * eye - a, eye)
        except np.linalg.LinAlgError as exc:
            raise SingularResolvent(f"resolvent singular at node {gamma.center + w}") from exc
    return acc


def riesz_projection(
    a, gamma: Contour, rtol: float = 1e-10, max_nodes: int = 1 << 16
) -> np.ndarray:
    """Spectral projection ``(1/2 pi i) \\oint (z - a)^{-1} dz`` over a circle.

    Trapezoid rule on equispaced nodes; the node count doubles (reusing the
    previous nodes) until two successive results differ by less than
    ``rtol * max(1, |p|)`` in operator norm.

    Raises
    ------
    EigenvalueOnContour
        If an eigenvalue lies within ``radius * 1e-6`` of the circle, or the
        quadrature fails to settle within ``max_nodes``.
    SingularResolvent
        If a resolvent solve fails at a node.
    """
    a = as_cmatrix(a, square=True)
    ev = spectrum(a).eigenvalues
    gap = np.abs(np.abs(ev - gamma.center) - gamma.radius)
    if ev.size and np.min(gap) <= gamma.radius * 1e-6:
        raise EigenvalueOnContour(
            f"eigenvalue within {np.min(gap):.3e} of the contour"
        )
    n = gamma.nodes
    acc = _resolvent_sum(a, gamma, 2 * np.pi * np.arange(n) / n)
    p = acc / n
    while n < max_nodes:
        odd = 2 * np.pi * (np.arange(n) + 0.5) / n
        acc = acc + _resolvent_sum(a, gamma, odd)
        n *= 2
        p_new = acc / n
        if op_norm(p_new - p) < rtol * max(1.0, op_norm(p_new)):
            return p_new
        p = p_new
    raise EigenvalueOnContour("contour quadrature did not converge; eigenvalue too close")


def projection_rank(p) -> int:
    """Rank of a (possibly oblique) projection: its nonzero singular values
    are all at least 1, so a cutoff of 1/2 separates them from noise."""
    s = np.linalg.svd(np.asarray(p), compute_uv=False)
    return int(np.count_nonzero(s > 0.5))


def range_basis(p, cutoff: float = 0.5) -> np.ndarray:
    """Orthonormal columns spanning the range of ``p`` (singular values above
    ``cutoff``)."""
    u, s, _ = np.linalg.svd(np.asarray(p))
    return u[:, s > cutoff]


def orthonormalize(vectors, rel_cutoff: float = 1e-12, scale: float | None = None):
    """Modified Gram-Schmidt with one reorthogonalization pass.

    ``vectors`` is a sequence of 1-D arrays.  A vector is dropped when its
    residual falls below ``rel_cutoff * scale``; ``scale`` defaults to the
    largest input norm.  Returns a ``(k, N)`` array of orthonormal rows.
    """
    vs = [np.asarray(v, dtype=complex).ravel() for v in vectors]
    if not vs:
        return np.zeros((0, 0), dtype=complex)
    if scale is None:
        scale = max(float(np.linalg.norm(v)) for v in vs)
    out: list[np.ndarray] = []
    thresh = rel_cutoff * scale
    for v in vs:
        r = v.copy()
        for _ in range(2):
            for q in out:
                r -= np.vdot(q, r) * q
        nr = np.linalg.norm(r)
        if nr > thresh and nr > 0:
            out.append(r / nr)
    if not out:
        return np.zeros((0, vs[0].size), dtype=complex)
    return np.array(out)


def subspace_distance(a, basis) -> float:
    """Frobenius distance from ``a`` to the span of ``basis``.

    Raises
    ------
    ShapeMismatch
        If a basis element differs in shape from ``a``.
    """
    a = as_cmatrix(a)
    basis = [as_cmatrix(b) for b in basis]
    for b in basis:
        if b.shape != a.shape:
            raise ShapeMismatch(f"basis element {b.shape} vs target {a.shape}")
    if not basis:
        return float(np.linalg.norm(a))
    q = orthonormalize([b.ravel() for b in basis])
    r = a.ravel().copy()
    for _ in range(2):
        for row in q:
            r -= np.vdot(row, r) * row
    return float(np.linalg.norm(r))


def random_complex(rng: np.random.Generator, shape, scale: float = 1.0) -> np.ndarray:
    """Complex Gaussian entries with unit second moment times ``scale``."""
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return scale * z / np.sqrt(2)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(random_complex(rng, (n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def is_nilpotent(a, tol: float = 1e-8) -> bool:
    """Nilpotency test ``|a^d| <= tol * |a|^d``.

    Eigenvalues of a rounded nilpotent matrix scatter like ``eps**(1/d)``,
    so the power test is the stable criterion.
    """
    a = as_cmatrix(a, square=True)
    d = a.shape[0]
    na = op_norm(a)
    if na == 0:
        return True
    x = a / na
    return op_norm(np.linalg.matrix_power(x, d)) <= tol
