"""Record size reduction and re-gridding onto uniform displacement steps.

Two stages: a regular reduction that keeps every m-th sample, and an
irregular resampling that re-grids each monotonic displacement segment
onto integer multiples of 1/scale via linear interpolation of load over
displacement.
"""

from __future__ import annotations

import numpy as np

from pivotfit.ingest import SignalPair, validate


class SegmentError(ValueError):
    """Raised when a resampling segment cannot be interpolated."""

    def __init__(self, segment: int, message: str):
        self.segment = segment
        super().__init__(f"segment {segment}: {message}")


def regular_reduce(pair: SignalPair, step: int) -> SignalPair:
    """Keep samples at 1-based indices 1, 1+m, 1+2m, ... of both arrays.

    Output length is ceil(n/m). ``step`` of 1 returns an identical pair.
    """
    if int(step) != step or step < 1:
        raise ValueError(f"reduction step must be a positive integer, got {step}")
    step = int(step)
    validate(pair)
    return pair.with_arrays(pair.displacement[::step], pair.load[::step])


def detect_reversals(values) -> np.ndarray:
    """Find 1-based indices where the sign of the first difference flips.

    Zero differences (plateaus) carry no direction; a reversal is
    reported at the sample where a nonzero difference contradicts the
    previous nonzero direction. The final index n is always appended, so
    a constant array yields just [n]. Output is strictly increasing.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    if n < 2:
        raise ValueError(f"need at least 2 samples to detect reversals, got {n}")
    indices = []
    prev_sign = 0
    for k in range(n - 1):  # k is the 0-based index of the difference
        diff = values[k + 1] - values[k]
        if diff == 0.0:
            continue
        sign = 1 if diff > 0 else -1
        if prev_sign != 0 and sign != prev_sign:
            indices.append(k + 1)  # 1-based sample where the new run starts
        prev_sign = sign
    indices.append(n)
    return np.array(indices, dtype=int)


def _snap_floor(scaled: np.ndarray) -> np.ndarray:
    """Floor toward negative infinity, snapping near-integers first.

    Values within a few ulps of an integer (binary-rounding residue of
    d*scale for decimal data) are treated as that integer so that
    flooring is stable and resampling is idempotent.
    """
    nearest = np.rint(scaled)
    tol = 4.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(scaled))
    snapped = np.where(np.abs(scaled - nearest) <= tol, nearest, scaled)
    return np.floor(snapped)


def _unique_first(values: np.ndarray):
    """Unique values in encounter order, keeping first occurrences."""
    _, first = np.unique(values, return_index=True)
    first.sort()
    return values[first], first


def irregular_resample(pair: SignalPair, scale: int, changes) -> SignalPair:
    """Re-grid a record to uniform displacement increments of 1/scale.

    ``changes`` are the 1-based direction-change indices of the
    displacement trace with the final sample index appended (the output
    of :func:`detect_reversals`). Both arrays are multiplied by
    ``scale``; displacements are floored toward negative infinity; each
    monotonic segment is queried on the integer grid from the previous
    endpoint to the segment end (ascending for rising segments,
    descending for falling), duplicates keeping first occurrence; load is
    linearly interpolated over displacement at the query points; the
    concatenated result is divided back by ``scale``.

    A segment whose endpoint equals the running previous endpoint after
    flooring contributes no points. Within every contributed segment the
    displacement increment is 1/scale with constant sign.
    """
    if int(scale) != scale or scale <= 10:
        raise ValueError(f"resampling scale must be an integer > 10, got {scale}")
    scale = int(scale)
    validate(pair)

    n = len(pair)
    changes = np.asarray(changes, dtype=int)
    if changes.ndim != 1 or changes.size == 0:
        raise ValueError("direction-change indices must be a non-empty 1-d array")
    if changes[0] < 1 or changes[-1] != n or np.any(np.diff(changes) <= 0):
        raise ValueError(
            "direction-change indices must be strictly increasing, within "
            f"[1, {n}], and end at {n}"
        )

    disp = _snap_floor(pair.displacement * scale)
    load = pair.load * scale

    out_disp = []
    out_load = []
    first_val = disp[0]
    first_idx = 0  # 0-based index of the running previous endpoint
    for seg, target in enumerate(changes, start=1):
        last_idx = target - 1
        last_val = disp[last_idx]
        if last_val == first_val:
            continue  # segment shorter than one grid cell
        rising = last_val > first_val
        if rising:
            queries = np.arange(first_val + 1, last_val + 1)
        else:
            queries = np.arange(first_val - 1, last_val - 1, -1)
        seg_disp = disp[first_idx : last_idx + 1]
        seg_load = load[first_idx : last_idx + 1]
        uniq, first_occurrence = _unique_first(seg_disp)
        uniq_load = seg_load[first_occurrence]
        diffs = np.diff(uniq)
        if rising and not np.all(diffs > 0):
            raise SegmentError(seg, "displacements not strictly increasing after flooring")
        if not rising and not np.all(diffs < 0):
            raise SegmentError(seg, "displacements not strictly decreasing after flooring")
        if rising:
            interp = np.interp(queries, uniq, uniq_load)
        else:
            interp = np.interp(queries, uniq[::-1], uniq_load[::-1])
        out_disp.append(queries)
        out_load.append(interp)
        first_idx = last_idx
        first_val = last_val

    if not out_disp:
        raise ValueError("resampling produced an empty record (no segment spans a grid cell)")
    result = pair.with_arrays(
        np.concatenate(out_disp) / scale, np.concatenate(out_load) / scale
    )
    if len(result) < 2:
        raise ValueError("resampling produced fewer than 2 samples")
    return result
