"""Kernel family surveys: polarisation signatures, grouping, CSV export.

Every kernel of a family is scored by its normalised polarisation distance
curve over increasing recursion depth; kernels with identical curves (within
1e-12 componentwise) land in one group. The survey pipeline recomputes the
per-kernel one-step count tables and curves in bulk with vectorised numpy;
tests pin it against the scalar single-kernel path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bec import bernstein_eval, evolve_spectrum, one_step_profile, polarisation_distance
from .errors import BudgetExceededError
from .ioutil import atomic_write_text
from .kernels import Kernel

#: componentwise tolerance for treating two distance curves as identical
CURVE_TOL = 1e-12

#: a kernel "shows polarisation" iff its curve drops by more than this margin
#: between the first and the final depth
POLARISING_MARGIN = 1e-9

_MAX_SPECTRUM = 1 << 20


@dataclass(frozen=True)
class Signature:
    """Canonical per-kernel polarisation fingerprint.

    `profile_multiset` is the kernel's one-step count table with the rows
    sorted lexicographically; kernels with equal multisets provably share one
    distance curve (the recursion only sees the multiset of one-step maps).
    """

    profile_multiset: tuple[tuple[int, ...], ...]
    distance_curve: tuple[float, ...]


@dataclass(frozen=True)
class SurveyMember:
    descriptor: str
    exponent: float | None
    order: int


@dataclass(frozen=True)
class GroupRecord:
    """One survey group: kernels sharing a distance curve.

    group_id 1 has the lowest (best) curve value at the final depth; ids are
    contiguous. `polarising` applies to every member (the flag is a function
    of the shared curve).
    """

    group_id: int
    member_count: int
    representative: Kernel
    distance_curve: tuple[float, ...]
    polarising: bool
    members: tuple[SurveyMember, ...]

    @property
    def invertible_count(self) -> int:
        return sum(1 for m in self.members if m.exponent is not None)


@dataclass(frozen=True)
class FamilySummary:
    """Survey headline numbers over the code-capable (invertible) kernels.

    Singular kernels lose capacity at every step, so their distance curves
    decay to zero trivially (dead channels park at erasure probability one);
    the meaningful polarisation census therefore restricts to invertible
    kernels. `curve_count` is the number of distinct curves among them,
    `best_group_size` the membership of the best such group, and
    `polarising_count` how many invertible kernels have a genuinely
    decreasing curve.
    """

    curve_count: int
    best_group_size: int
    polarising_count: int


def invertible_summary(records: Sequence[GroupRecord]) -> FamilySummary:
    """Headline counts of a survey restricted to invertible members."""
    inv = [r for r in records if r.invertible_count > 0]
    if not inv:
        return FamilySummary(0, 0, 0)
    best = min(inv, key=lambda r: r.group_id)
    polarising = sum(r.invertible_count for r in inv if r.polarising)
    return FamilySummary(
        curve_count=len(inv),
        best_group_size=best.invertible_count,
        polarising_count=polarising,
    )


def signature(k: Kernel, eps0: float, depth: int) -> Signature:
    """Signature of one kernel via the scalar spectrum machinery."""
    if k.l**depth > _MAX_SPECTRUM:
        raise BudgetExceededError(
            f"signature depth {depth} exceeds the spectrum budget for l={k.l}"
        )
    profile = one_step_profile(k)
    curve = tuple(
        polarisation_distance(evolve_spectrum(k, eps0, d)) for d in range(1, depth + 1)
    )
    return Signature(profile_multiset=profile.multiset(), distance_curve=curve)


def _row_bits(kernels: Sequence[Kernel]) -> np.ndarray:
    return np.array([k.row_bits() for k in kernels], dtype=np.uint32)


def _batch_profiles(rows: np.ndarray, l: int) -> np.ndarray:
    """Count tables for a batch of kernels, shape (M, l, l+1).

    Mirrors one_step_profile: for every erasure pattern, input i is
    undetermined iff its restricted row is a XOR of restricted later rows
    (empty combination included). Subsets are walked in Gray-code order so
    each step costs one XOR per kernel.
    """
    m_count = rows.shape[0]
    counts = np.zeros((m_count, l, l + 1), dtype=np.int64)
    full = (1 << l) - 1
    for pattern in range(1 << l):
        keep = np.uint32(~pattern & full)
        restricted = rows & keep
        weight = bin(pattern).count("1")
        for i in range(l):
            target = restricted[:, i]
            undet = target == 0
            acc = np.zeros(m_count, dtype=np.uint32)
            prev = 0
            for g in range(1, 1 << (l - 1 - i)):
                gray = g ^ (g >> 1)
                j = (gray ^ prev).bit_length() - 1
                prev = gray
                acc = acc ^ restricted[:, i + 1 + j]
                undet |= acc == target
            counts[:, i, weight] += undet
    return counts


def _batch_curves(counts: np.ndarray, eps0: float, depth: int) -> np.ndarray:
    """Distance curves for a batch of count tables, shape (M, depth)."""
    m_count, l = counts.shape[0], counts.shape[1]
    coeffs = counts.astype(np.float64)
    curves = np.empty((m_count, depth))
    z = np.full((m_count, 1), eps0)
    for d in range(depth):
        children = np.empty((m_count, z.shape[1], l))
        for t in range(l):
            children[:, :, t] = bernstein_eval(coeffs[:, t, :][:, None, :], z)
        z = np.clip(children.reshape(m_count, -1), 0.0, 1.0)
        small = np.minimum(z, 1.0 - z)
        curves[:, d] = (small * small).mean(axis=1) / (eps0 * eps0)
    return curves


def _batch_exponents(rows: np.ndarray, l: int) -> np.ndarray:
    """Rate exponents per kernel; NaN marks singular kernels."""
    m_count = rows.shape[0]
    dists = np.empty((m_count, l), dtype=np.int64)
    for i in range(l):
        best = np.bitwise_count(rows[:, i].astype(np.uint64))
        acc = np.zeros(m_count, dtype=np.uint32)
        prev = 0
        for g in range(1, 1 << (l - 1 - i)):
            gray = g ^ (g >> 1)
            j = (gray ^ prev).bit_length() - 1
            prev = gray
            acc = acc ^ rows[:, i + 1 + j]
            best = np.minimum(
                best, np.bitwise_count((rows[:, i] ^ acc).astype(np.uint64))
            )
        dists[:, i] = best
    singular = (dists == 0).any(axis=1)
    exps = np.full(m_count, np.nan)
    good = ~singular
    with np.errstate(divide="ignore"):
        exps[good] = np.log(dists[good]).sum(axis=1) / (l * math.log(l))
    return exps


def group_survey(
    family: Iterable[Kernel], eps0: float, depth: int, chunk: int = 4096
) -> list[GroupRecord]:
    """Cluster a kernel family by exact distance-curve equality.

    Groups are sorted by curve value at the final depth (ties by the full
    curve), ids starting at 1. A group is polarising iff its curve at the
    final depth sits below its depth-1 value by more than 1e-9.
    """
    kernels = list(family)
    if not kernels:
        raise ValueError("kernel family is empty")
    l = kernels[0].l
    if any(k.l != l for k in kernels):
        raise ValueError("kernel family mixes sizes")
    if l**depth > _MAX_SPECTRUM:
        raise BudgetExceededError(
            f"survey depth {depth} exceeds the spectrum budget for l={l}"
        )
    rows = _row_bits(kernels)
    m_count = rows.shape[0]
    curves = np.empty((m_count, depth))
    exponents = np.empty(m_count)
    for start in range(0, m_count, chunk):
        stop = min(start + chunk, m_count)
        counts = _batch_profiles(rows[start:stop], l)
        curves[start:stop] = _batch_curves(counts, eps0, depth)
        exponents[start:stop] = _batch_exponents(rows[start:stop], l)

    order = np.lexsort(tuple(curves[:, j] for j in range(depth - 1, -1, -1)))
    ordered = curves[order]
    breaks = np.zeros(m_count, dtype=bool)
    breaks[0] = True
    if m_count > 1:
        breaks[1:] = (np.abs(np.diff(ordered, axis=0)) > CURVE_TOL).any(axis=1)
    starts = np.flatnonzero(breaks)
    ends = np.append(starts[1:], m_count)

    raw_groups = []
    for s, e in zip(starts, ends):
        members = np.sort(order[s:e])
        curve = tuple(float(v) for v in curves[members[0]])
        raw_groups.append((curve, members))
    raw_groups.sort(key=lambda g: (g[0][-1], g[0]))

    records = []
    for gid, (curve, members) in enumerate(raw_groups, start=1):
        entries = tuple(
            SurveyMember(
                descriptor=kernels[i].descriptor(),
                exponent=None if math.isnan(exponents[i]) else float(exponents[i]),
                order=int(i),
            )
            for i in members
        )
        records.append(
            GroupRecord(
                group_id=gid,
                member_count=len(entries),
                representative=kernels[members[0]],
                distance_curve=curve,
                polarising=bool(curve[-1] < curve[0] - POLARISING_MARGIN),
                members=entries,
            )
        )
    return records


def survey_csv_text(records: Sequence[GroupRecord]) -> str:
    if not records:
        raise ValueError("no survey records to export")
    depth = len(records[0].distance_curve)
    header = "kernel_rows,group_id,polarising,exponent," + ",".join(
        f"d{i}" for i in range(1, depth + 1)
    )
    lines = [header]
    for rec in records:
        curve = ",".join(f"{v:.12g}" for v in rec.distance_curve)
        for member in rec.members:
            exp = "" if member.exponent is None else f"{member.exponent:.12g}"
            rows = member.descriptor.replace(",", ";")
            lines.append(
                f"{rows},{rec.group_id},{int(rec.polarising)},{exp},{curve}"
            )
    return "\n".join(lines) + "\n"


def export_survey(records: Sequence[GroupRecord], destination) -> None:
    """Write the survey CSV (one row per kernel, groups in id order)."""
    atomic_write_text(destination, survey_csv_text(records))
