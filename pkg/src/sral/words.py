"""Depth-first enumeration of matrix words with prefix reuse.

Prefixes are processed in blocks: a block holds the products of a batch of
words of the same length, and its children are formed with one batched
matrix multiplication by every generator.  Blocks larger than ``chunk`` are
split, so memory stays bounded while the numpy kernels stay vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BudgetExceeded

DEFAULT_BUDGET = 50_000_000


@dataclass
class WordBlock:
    level: int
    products: np.ndarray  # (B, d, d)
    weights: np.ndarray  # (B,) product of multiplicities
    codes: np.ndarray  # (B,) base-k word codes
    tags: np.ndarray  # (B,) accumulated generator tags


def word_count(k: int, depth: int) -> int:
    """Number of nonempty words of length at most ``depth`` over ``k`` letters."""
    if k <= 1:
        return max(depth, 0) * k
    return (k ** (depth + 1) - k) // (k - 1)


def decode_word(code: int, k: int, length: int) -> list[int]:
    """Generator indices of a word from its base-``k`` code."""
    out = []
    for _ in range(length):
        code, r = divmod(int(code), k)
        out.append(r)
    return out[::-1]


def walk(
    members: np.ndarray,
    depth: int,
    visit: Callable[[WordBlock], None],
    weights=None,
    tags=None,
    expand: Callable[[WordBlock], np.ndarray] | None = None,
    budget: int | None = None,
    chunk: int = 1 << 15,
    precheck: bool = True,
) -> int:
    """Visit every word of length ``1..depth`` over ``members``.

    ``visit`` is called once per block.  ``expand`` may return a boolean mask
    of prefixes whose subtrees should be explored; masked-out prefixes are
    not extended.  Returns the number of word products formed.

    Raises
    ------
    BudgetExceeded
        When the full word count (if ``precheck``) or the running count
        exceeds ``budget``.
    """
    members = np.asarray(members, dtype=complex)
    k, d = members.shape[0], members.shape[1]
    budget = DEFAULT_BUDGET if budget is None else int(budget)
    if precheck and word_count(k, depth) > budget:
        raise BudgetExceeded(
            f"{word_count(k, depth)} words exceed the budget of {budget}"
        )
    w0 = np.ones(k) if weights is None else np.asarray(weights, dtype=float)
    t0 = np.zeros(k, dtype=np.int64) if tags is None else np.asarray(tags, np.int64)
    stack = [WordBlock(1, members.copy(), w0.copy(), np.arange(k, dtype=np.int64), t0.copy())]
    formed = k
    step = max(1, chunk // k)
    while stack:
        blk = stack.pop()
        visit(blk)
        if blk.level >= depth:
            continue
        keep = None if expand is None else expand(blk)
        prods, wts, codes, tg = blk.products, blk.weights, blk.codes, blk.tags
        if keep is not None:
            prods, wts, codes, tg = prods[keep], wts[keep], codes[keep], tg[keep]
        if prods.shape[0] == 0:
            continue
        pieces = []
        for s in range(0, prods.shape[0], step):
            p = prods[s : s + step]
            b = p.shape[0]
            formed += b * k
            if formed > budget:
                raise BudgetExceeded(f"word budget of {budget} exhausted")
            child = np.matmul(p[:, None], members[None]).reshape(b * k, d, d)
            pieces.append(
                WordBlock(
                    blk.level + 1,
                    child,
                    (wts[s : s + step, None] * w0[None]).ravel(),
                    (codes[s : s + step, None] * k + np.arange(k)[None]).ravel(),
                    (tg[s : s + step, None] + t0[None]).ravel(),
                )
            )
        stack.extend(reversed(pieces))
    return formed
