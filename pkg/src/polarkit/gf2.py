"""Dense GF(2) linear algebra on numpy 0/1 arrays.

All routines treat inputs as binary matrices/vectors (dtype-agnostic, values
reduced mod 2) and never mutate their arguments.
"""

from __future__ import annotations

import numpy as np


def as_bits(a, ndim: int) -> np.ndarray:
    """Validate and copy `a` into a uint8 array of 0/1 entries."""
    m = np.asarray(a)
    if m.ndim != ndim:
        raise ValueError(f"expected a {ndim}-dimensional array, got shape {m.shape}")
    if m.size and not np.isin(m, (0, 1)).all():
        raise ValueError("entries must be 0 or 1")
    return m.astype(np.uint8)


def rank(m) -> int:
    """GF(2) row rank via Gaussian elimination."""
    a = as_bits(m, 2).copy()
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def in_span(v, basis) -> bool:
    """True iff vector `v` is a GF(2) linear combination of the basis vectors.

    The empty combination is allowed, so the zero vector is in every span.
    Raises ValueError on length mismatches.
    """
    vec = as_bits(v, 1)
    rows = [as_bits(b, 1) for b in basis]
    for b in rows:
        if b.shape != vec.shape:
            raise ValueError("all vectors must have the same length")
    if not rows:
        return not vec.any()
    b = np.array(rows, dtype=np.uint8)
    return rank(b) == rank(np.vstack([b, vec]))


def solve(a, b):
    """One solution x of A x = b over GF(2), or None if the system is insoluble.

    When the solution space has positive dimension the returned solution is
    the one with free variables set to zero (deterministic).
    """
    a = as_bits(a, 2)
    b = as_bits(b, 1)
    rows, cols = a.shape
    if b.shape[0] != rows:
        raise ValueError("right-hand side length does not match matrix rows")
    aug = np.hstack([a, b[:, None]]).astype(np.uint8)
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if aug[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != r:
            aug[[r, pivot]] = aug[[pivot, r]]
        for i in range(rows):
            if i != r and aug[i, c]:
                aug[i] ^= aug[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    # Any remaining nonzero augmented column entry below the pivots means b
    # is outside the column space.
    if aug[r:, cols].any():
        return None
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        x[c] = aug[i, cols]
    return x


def null_space(a) -> np.ndarray:
    """Basis for {x : A x = 0} over GF(2), returned as rows (possibly empty)."""
    a = as_bits(a, 2).copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if a[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != r:
            a[[r, pivot]] = a[[pivot, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, fc in enumerate(free):
        basis[k, fc] = 1
        for i, pc in enumerate(pivots):
            basis[k, pc] = a[i, fc]
    return basis


def kron(a, b) -> np.ndarray:
    """Kronecker product over GF(2)."""
    return (np.kron(as_bits(a, 2), as_bits(b, 2)) & 1).astype(np.uint8)
