"""Polarisation kernels: parsing, partial distances, rate exponents, families.

A kernel is an l x l binary matrix applied at every recursion level of a polar
transform; row i multiplies input u_i. Kernels are immutable once built and
their invertibility flag is always recomputed from the matrix, never taken
from input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from . import gf2
from .errors import BudgetExceededError, KernelFormatError


@dataclass(frozen=True, eq=False)
class Kernel:
    """An l x l binary kernel with its GF(2) invertibility."""

    matrix: np.ndarray
    l: int = field(init=False)
    invertible: bool = field(init=False)

    def __post_init__(self):
        m = gf2.as_bits(self.matrix, 2)
        if m.shape[0] != m.shape[1]:
            raise KernelFormatError(f"kernel must be square, got shape {m.shape}")
        if m.shape[0] < 2:
            raise KernelFormatError("kernel size must be at least 2x2")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "l", m.shape[0])
        object.__setattr__(self, "invertible", gf2.rank(m) == m.shape[0])

    def row_bits(self) -> tuple[int, ...]:
        """Rows as integers, bit j (LSB first) holding column j."""
        weights = 1 << np.arange(self.l)
        return tuple(int(x) for x in self.matrix @ weights)

    def row_strings(self) -> tuple[str, ...]:
        return tuple("".join(str(int(b)) for b in row) for row in self.matrix)

    def descriptor(self) -> str:
        return ",".join(self.row_strings())

    def to_json_dict(self) -> dict:
        return {"l": self.l, "rows": list(self.row_strings())}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Kernel":
        k = parse_kernel(",".join(d["rows"]))
        if k.l != d.get("l", k.l):
            raise KernelFormatError("kernel 'l' field does not match its rows")
        return k

    def __eq__(self, other):
        return isinstance(other, Kernel) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.l, self.row_bits()))

    def __repr__(self):
        return f"Kernel({self.descriptor()!r})"


@dataclass(frozen=True)
class PartialDistances:
    """Per-row partial distances d_1..d_l and the rate exponent they induce."""

    d: tuple[int, ...]
    exponent: float


def parse_kernel(text: str) -> Kernel:
    """Parse a comma-separated binary row descriptor, e.g. "100,110,011".

    Row i of the matrix multiplies input u_i. Raises KernelFormatError on
    non-binary characters, ragged rows, or a non-square shape.
    """
    rows = [r.strip() for r in text.strip().split(",")]
    if any(not r for r in rows):
        raise KernelFormatError(f"empty row in kernel descriptor {text!r}")
    width = len(rows[0])
    for r in rows:
        if len(r) != width:
            raise KernelFormatError(f"ragged rows in kernel descriptor {text!r}")
        if set(r) - {"0", "1"}:
            raise KernelFormatError(f"non-binary character in kernel row {r!r}")
    if len(rows) != width:
        raise KernelFormatError(
            f"kernel must be square, got {len(rows)} rows of width {width}"
        )
    m = np.array([[int(c) for c in r] for r in rows], dtype=np.uint8)
    return Kernel(m)


def partial_distances(k: Kernel) -> PartialDistances:
    """Partial distances of an invertible kernel and its rate exponent.

    d_i is the minimum Hamming distance from row i to the GF(2) span of rows
    i+1..l; for the last row the span is {0}, so d_l is the row weight. The
    exponent is (1/l) * sum_i log_l(d_i).
    """
    if not k.invertible:
        raise ValueError(
            "partial distances are ill-defined for singular kernels "
            "(some row lies in the span of the later rows, giving d_i = 0)"
        )
    l = k.l
    d = []
    for i in range(l):
        later = k.matrix[i + 1 :]
        best = l + 1
        # Enumerate all 2^(l-1-i) combinations of the later rows.
        for r in range(len(later) + 1):
            for combo in combinations(range(len(later)), r):
                v = k.matrix[i].copy()
                for j in combo:
                    v ^= later[j]
                best = min(best, int(v.sum()))
        d.append(best)
    exponent = sum(math.log(x, l) for x in d) / l
    return PartialDistances(d=tuple(d), exponent=exponent)


def rate_exponent_table(family: Sequence[Kernel]) -> list[tuple[Kernel, float]]:
    """Rate exponent for each kernel, preserving the input order."""
    return [(k, partial_distances(k).exponent) for k in family]


def enumerate_kernels(l: int, family: str = "all") -> Iterator[Kernel]:
    """Yield every kernel of a family in deterministic binary-counting order.

    Free entries are filled row-major from a counter whose least significant
    bit is the last free entry, so the all-zero filling comes first. The
    "lower_triangular_unit_diagonal" family fixes the diagonal to 1 and the
    strict upper triangle to 0; "all" ranges over every l*l matrix, singular
    ones included.
    """
    if l < 2:
        raise ValueError("kernel size must be at least 2")
    if family == "all":
        free = [(r, c) for r in range(l) for c in range(l)]
        base = np.zeros((l, l), dtype=np.uint8)
    elif family == "lower_triangular_unit_diagonal":
        free = [(r, c) for r in range(l) for c in range(l) if c < r]
        base = np.eye(l, dtype=np.uint8)
    else:
        raise ValueError(f"unknown kernel family {family!r}")
    nbits = len(free)
    for counter in range(1 << nbits):
        m = base.copy()
        for pos, (r, c) in enumerate(free):
            m[r, c] = (counter >> (nbits - 1 - pos)) & 1
        yield Kernel(m)


def kronecker_generator(k: Kernel, n: int, max_size: int = 4096) -> np.ndarray:
    """The l^n x l^n matrix k^(x n) over GF(2); n = 0 gives the 1x1 identity.

    Reference oracle only: raises BudgetExceededError when l^n exceeds
    `max_size`.
    """
    if n < 0:
        raise ValueError("recursion depth must be >= 0")
    size = k.l**n
    if size > max_size:
        raise BudgetExceededError(
            f"Kronecker power of size {size} exceeds the budget of {max_size}"
        )
    out = np.ones((1, 1), dtype=np.uint8)
    for _ in range(n):
        out = gf2.kron(out, k.matrix)
    return out


def digit_reversal_permutation(l: int, n: int) -> np.ndarray:
    """Permutation reversing the base-l digits of each index in 0..l^n - 1.

    This is the row permutation that turns the plain Kronecker power into the
    generator actually applied by the recursive kernel-then-shuffle encoder.
    """
    if l < 2 or n < 0:
        raise ValueError("need l >= 2 and n >= 0")
    size = l**n
    perm = np.zeros(size, dtype=np.int64)
    for i in range(size):
        x, rev = i, 0
        for _ in range(n):
            x, d = divmod(x, l)
            rev = rev * l + d
        perm[i] = rev
    return perm


def reference_generator(k: Kernel, n: int, max_size: int = 4096) -> np.ndarray:
    """Generator matrix of the depth-n transform: digit-reversed Kronecker power.

    Row i is row digit_reversal(i) of k^(x n); multiplying an input row vector
    by this matrix reproduces the recursive encoder on all l^n inputs.
    """
    gen = kronecker_generator(k, n, max_size=max_size)
    return gen[digit_reversal_permutation(k.l, n)]
