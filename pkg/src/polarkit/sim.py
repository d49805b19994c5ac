"""Seeded BEC channel and Monte Carlo BER/FER estimation.

Randomness layout (fixed for byte-exact reproducibility, all streams Philox
counter-based so results are independent of execution order and batching):

* Channel noise: the raw 64-bit word stream of ``Philox(key=(seed, 2**62))``,
  read as a bitstream with bit t of word w at stream position 64*w + t.
  Erasure decisions use k-bit subuniforms, k being the smallest of
  {1, 2, 4, 8, 16, 32, 64} for which eps * 2**k is an exact integer (64
  otherwise): symbol p of trial j reads the k bits at offset (j*N + p)*k and
  is erased iff their value is below floor(eps * 2**k). The threshold is
  computed in exact integer arithmetic, so the erasure probability matches
  the requested float to within 2**-64.

* Message bits: trial j draws K doubles from ``Philox(key=(seed, j))``; bit
  = (double < 0.5).

Most trials decode without any ambiguity, and over the BEC the frame-error
event depends only on the erasure pattern: the first ambiguous information
decision of the decoder coincides with the first genie-aided ambiguity
(before it, every decision is determined and correct). run_monte_carlo
therefore screens erasure patterns in bulk with the bit-packed genie
recursion and runs the full decoder only on flagged frames; the tallies are
exactly those of decoding every trial individually (verified in tests
against the literal per-trial loop).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import (
    PolarCode,
    Symbol,
    _encode_batch,
    _screen_known_planes,
    decode_batch,
)
from . import gf2

_CHANNEL_TAG = 1 << 62
_MASK64 = (1 << 64) - 1

#: two-sided 95% normal quantile, used by the Wilson interval
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class BecChannel:
    """Binary erasure channel with deterministic per-trial noise.

    Identical (master_seed, trial_index, input) triples always produce
    identical outputs; distinct trials read disjoint segments of one keyed
    counter-based stream, so transmissions may run in any order.
    """

    eps: float
    master_seed: int = 0
    trial_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"erasure probability must be in [0, 1], got {self.eps}")


@dataclass(frozen=True)
class StopRule:
    """Stop after `min_frame_errors` frame errors or `max_trials` trials,
    whichever comes first."""

    min_frame_errors: int = 100
    max_trials: int = 100_000

    def __post_init__(self):
        if self.max_trials < 1:
            raise ValueError("max_trials must be >= 1")
        if self.min_frame_errors < 1:
            raise ValueError("min_frame_errors must be >= 1")


@dataclass(frozen=True)
class SimReport:
    """Monte Carlo tallies with a 95% Wilson interval on the FER.

    Erased (flagged) information decisions count as bit errors; a frame is
    errored iff any information bit is flagged or wrong.
    """

    code_id: str
    eps: float
    N: int
    K: int
    trials: int
    bit_errors: int
    bit_erasures: int
    frame_errors: int
    ber: float
    fer: float
    fer_ci_low: float
    fer_ci_high: float
    master_seed: int


@dataclass(frozen=True)
class ReportComparison:
    indistinguishable: bool
    gap: float
    message: str


def _subuniform(eps: float) -> tuple[int, int]:
    """Bits per symbol and integer erasure threshold for a given eps."""
    if eps <= 0.0:
        return 1, 0
    if eps >= 1.0:
        return 1, 2
    num, den = float(eps).as_integer_ratio()  # den is a power of two
    for k in (1, 2, 4, 8, 16, 32, 64):
        if den <= (1 << k):
            return k, (num << k) // den
    return 64, (num << 64) // den


def _channel_words(master_seed: int, word_start: int, count: int) -> np.ndarray:
    """Words [word_start, word_start + count) of the keyed channel stream."""
    key = np.array([master_seed & _MASK64, _CHANNEL_TAG], dtype=np.uint64)
    block, lane = divmod(word_start, 4)
    bg = np.random.Philox(key=key, counter=np.array([block, 0, 0, 0], dtype=np.uint64))
    return bg.random_raw(lane + count)[lane:]


_TRANSPOSE_MASKS = [
    (32, np.uint64(0xFFFFFFFF00000000)),
    (16, np.uint64(0xFFFF0000FFFF0000)),
    (8, np.uint64(0xFF00FF00FF00FF00)),
    (4, np.uint64(0xF0F0F0F0F0F0F0F0)),
    (2, np.uint64(0xCCCCCCCCCCCCCCCC)),
    (1, np.uint64(0xAAAAAAAAAAAAAAAA)),
]


def _bit_transpose(words: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Transpose a bit matrix packed row-major into uint64 words (LSB first).

    rows and cols must both be multiples of 64; returns the packed transpose
    of shape (cols, rows // 64).
    """
    # copy(): the swap rounds below must never alias the caller's words
    tiles = words.reshape(rows // 64, 64, cols // 64).transpose(0, 2, 1)
    x = tiles.copy().reshape(-1, 64)
    idx = np.arange(64)
    for s, m in _TRANSPOSE_MASKS:
        sh = np.uint64(s)
        hi = idx[(idx & s) == 0]
        lo = hi + s
        a, b = x[:, hi], x[:, lo]
        swap = (a ^ (b << sh)) & m
        x[:, hi] = a ^ swap
        x[:, lo] = b ^ (swap >> sh)
    tiles_t = x.reshape(rows // 64, cols // 64, 64).transpose(1, 2, 0)
    return np.ascontiguousarray(tiles_t).reshape(cols, rows // 64)


def _erasure_block(
    master_seed: int, eps: float, n: int, trial_start: int, trials: int
) -> np.ndarray:
    """Erasure pattern rows for trials [trial_start, trial_start + trials)."""
    k, threshold = _subuniform(eps)
    if threshold == 0:
        return np.zeros((trials, n), dtype=bool)
    if threshold == 1 << k:
        return np.ones((trials, n), dtype=bool)
    bit0 = trial_start * n * k
    nbits = trials * n * k
    w0 = bit0 >> 6
    words = _channel_words(master_seed, w0, ((bit0 + nbits - 1) >> 6) + 1 - w0)
    if k == 1:
        bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        erased = bits[bit0 - 64 * w0 : bit0 - 64 * w0 + nbits] < threshold
        return erased.reshape(trials, n)
    sym = np.arange(trial_start * n, (trial_start + trials) * n, dtype=np.uint64)
    bitpos = sym * np.uint64(k)
    vals = words[(bitpos >> np.uint64(6)) - np.uint64(w0)] >> (
        bitpos & np.uint64(63)
    )
    if k < 64:
        vals = vals & np.uint64((1 << k) - 1)
    return (vals < np.uint64(threshold)).reshape(trials, n)


def bec_transmit(x, ch: BecChannel) -> np.ndarray:
    """Transmit a bit vector: each symbol is independently erased with
    probability eps, never flipped."""
    bits = gf2.as_bits(x, 1)
    erased = _erasure_block(ch.master_seed, ch.eps, bits.shape[0], ch.trial_index, 1)[0]
    return np.where(erased, np.uint8(Symbol.ERASED), bits)


def _message_bits(master_seed: int, trial_index: int, k: int) -> np.ndarray:
    key = np.array([master_seed & _MASK64, trial_index], dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    return (gen.random(k) < 0.5).astype(np.uint8)


def wilson_interval(successes: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion.

    Zero (or full) success counts yield an exact one-sided interval.
    """
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = p + z * z / (2 * trials)
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4 * trials * trials))
    low = 0.0 if successes == 0 else max(0.0, (centre - half) / denom)
    high = 1.0 if successes == trials else min(1.0, (centre + half) / denom)
    return low, high


def _assemble_inputs(code: PolarCode, trial_indices, master_seed: int) -> np.ndarray:
    u = np.tile(code.frozen_values, (len(trial_indices), 1))
    info = code.info_set
    for row, j in enumerate(trial_indices):
        u[row, info] = _message_bits(master_seed, int(j), info.size)
    return u


def run_monte_carlo(
    code: PolarCode,
    eps: float,
    stop: StopRule,
    master_seed: int,
    batch_size: int = 1 << 15,
) -> SimReport:
    """Estimate BER/FER of a code on the BEC by seeded Monte Carlo.

    Repeats [draw information bits, encode, transmit, SC-decode, tally] until
    the stop rule fires, cutting exactly at the trial that records the
    min_frame_errors-th frame error. Results are byte-identical for identical
    (code, eps, stop, master_seed) regardless of batch size.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"erasure probability must be in [0, 1], got {eps}")
    n, info = code.N, code.info_set
    k_bits, threshold = _subuniform(eps)
    # With a one-bit subuniform and threshold 1 the known-bit planes are the
    # raw channel bits themselves, transposable without unpacking.
    fast = k_bits == 1 and threshold == 1 and n % 64 == 0
    trials = frame_errors = bit_errors = bit_erasures = 0
    while trials < stop.max_trials and frame_errors < stop.min_frame_errors:
        chunk = min(batch_size, stop.max_trials - trials)
        erased = None
        if info.size and fast:
            padded = -(-chunk // 64) * 64
            words = _channel_words(
                master_seed, trials * n // 64, padded * n // 64
            )
            known = _bit_transpose(words, padded, n).view(np.uint8)
        elif info.size:
            erased = _erasure_block(master_seed, eps, n, trials, chunk)
            known = np.packbits(~erased.T, axis=1, bitorder="little")
        if info.size:
            root_known = _screen_known_planes(code.kernel, code.depth, known)
            frame_plane = np.bitwise_or.reduce(~root_known[info], axis=0)
            frames = (
                np.unpackbits(frame_plane, count=chunk, bitorder="little") == 1
            )
        else:
            frames = np.zeros(chunk, dtype=bool)
        # Cut exactly where the error budget is exhausted.
        used = chunk
        cum = frame_errors + np.cumsum(frames)
        hit = np.flatnonzero(cum >= stop.min_frame_errors)
        if hit.size:
            used = int(hit[0]) + 1
            frames = frames[:used]
        flagged = np.flatnonzero(frames)
        if flagged.size:
            trial_ids = trials + flagged
            if erased is None:
                byte_rows = words.view(np.uint8).reshape(padded, n // 8)
                flagged_bits = np.unpackbits(
                    byte_rows[flagged], axis=1, bitorder="little"
                )
                flagged_erased = flagged_bits == 0
            else:
                flagged_erased = erased[flagged]
            u = _assemble_inputs(code, trial_ids, master_seed)
            x = _encode_batch(code.kernel, u)
            y = np.where(flagged_erased, np.uint8(Symbol.ERASED), x)
            u_hat, flags = decode_batch(code, y)
            bad = (flags[:, info] == 1) | (u_hat[:, info] != u[:, info])
            frame_bad = bad.any(axis=1)
            if not frame_bad.all():
                raise AssertionError("screen flagged a frame the decoder resolved")
            bit_errors += int(bad.sum())
            bit_erasures += int((flags[:, info] == 1).sum())
            frame_errors += int(frame_bad.sum())
        trials += used
    fer = frame_errors / trials
    lo, hi = wilson_interval(frame_errors, trials)
    return SimReport(
        code_id=code.code_id(),
        eps=eps,
        N=n,
        K=int(info.size),
        trials=trials,
        bit_errors=bit_errors,
        bit_erasures=bit_erasures,
        frame_errors=frame_errors,
        ber=bit_errors / (info.size * trials) if info.size else 0.0,
        fer=fer,
        fer_ci_low=lo,
        fer_ci_high=hi,
        master_seed=master_seed,
    )


def _run_direct(
    code: PolarCode, eps: float, stop: StopRule, master_seed: int
) -> SimReport:
    """Literal per-trial reference loop; used to validate run_monte_carlo."""
    from .codec import encode, sc_decode

    n, info = code.N, code.info_set
    trials = frame_errors = bit_errors = bit_erasures = 0
    while trials < stop.max_trials and frame_errors < stop.min_frame_errors:
        j = trials
        u = code.frozen_values.copy()
        u[info] = _message_bits(master_seed, j, info.size)
        y = bec_transmit(encode(code, u), BecChannel(eps, master_seed, j))
        res = sc_decode(code, y)
        bad = (res.erased_flags[info] == 1) | (res.u_hat[info] != u[info])
        bit_errors += int(bad.sum())
        bit_erasures += int((res.erased_flags[info] == 1).sum())
        frame_errors += int(bad.any())
        trials += 1
    fer = frame_errors / trials
    lo, hi = wilson_interval(frame_errors, trials)
    return SimReport(
        code_id=code.code_id(),
        eps=eps,
        N=n,
        K=int(info.size),
        trials=trials,
        bit_errors=bit_errors,
        bit_erasures=bit_erasures,
        frame_errors=frame_errors,
        ber=bit_errors / (info.size * trials) if info.size else 0.0,
        fer=fer,
        fer_ci_low=lo,
        fer_ci_high=hi,
        master_seed=master_seed,
    )


def compare_reports(a: SimReport, b: SimReport) -> ReportComparison:
    """Verdict on whether two FER estimates are statistically distinguishable.

    "Indistinguishable" means the 95% intervals overlap. Reports must share
    the channel erasure rate and the code rate.
    """
    if a.eps != b.eps:
        raise ValueError(f"reports ran at different eps: {a.eps} vs {b.eps}")
    if abs(a.K / a.N - b.K / b.N) > 1e-12:
        raise ValueError(
            f"reports have different rates: {a.K}/{a.N} vs {b.K}/{b.N}"
        )
    overlap = a.fer_ci_low <= b.fer_ci_high and b.fer_ci_low <= a.fer_ci_high
    if overlap:
        msg = (
            f"statistically indistinguishable: fer {a.fer:.3g} "
            f"[{a.fer_ci_low:.3g}, {a.fer_ci_high:.3g}] vs {b.fer:.3g} "
            f"[{b.fer_ci_low:.3g}, {b.fer_ci_high:.3g}]"
        )
        return ReportComparison(True, 0.0, msg)
    gap = max(a.fer_ci_low - b.fer_ci_high, b.fer_ci_low - a.fer_ci_high)
    msg = (
        f"distinguishable: fer {a.fer:.3g} vs {b.fer:.3g}, "
        f"interval gap {gap:.3g}"
    )
    return ReportComparison(False, gap, msg)


_SIM_CSV_HEADER = (
    "epsilon,N,K,trials,bit_errors,bit_erasures,frame_errors,ber,fer,"
    "ci_low,ci_high,seed"
)


def sim_csv_text(reports) -> str:
    lines = [_SIM_CSV_HEADER]
    for r in reports:
        lines.append(
            f"{r.eps:.12g},{r.N},{r.K},{r.trials},{r.bit_errors},"
            f"{r.bit_erasures},{r.frame_errors},{r.ber:.12g},{r.fer:.12g},"
            f"{r.fer_ci_low:.12g},{r.fer_ci_high:.12g},{r.master_seed}"
        )
    return "\n".join(lines) + "\n"
