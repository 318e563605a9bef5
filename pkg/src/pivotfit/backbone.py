"""Backbone envelope extraction and 7-point idealization.

The envelope is the locus of the signed load extremum of each loading
half-cycle, sorted ascending by displacement. The idealization reduces
it to seven points: on each side an elastic-limit point (first point
whose load magnitude exceeds 65% of the side's extreme load), the
extreme-load point and the extreme-displacement point, plus the origin.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from pivotfit.ingest import SignalPair, validate

YIELD_FRACTION = 0.65


@dataclass(frozen=True)
class EnvelopeCurve:
    """Backbone points sorted strictly ascending by displacement."""

    displacement: np.ndarray
    load: np.ndarray
    degenerate: bool = False  # one-sided record, single-extremum envelope

    def __post_init__(self):
        object.__setattr__(
            self, "displacement", np.asarray(self.displacement, dtype=float)
        )
        object.__setattr__(self, "load", np.asarray(self.load, dtype=float))

    def __len__(self):
        return self.displacement.shape[0]


@dataclass(frozen=True)
class IdealizedBackbone:
    """Exactly 7 (displacement, load) points; point 4 is the origin.

    Points 1-3 describe the negative side (ultimate displacement,
    extreme load, elastic limit), points 5-7 mirror them on the positive
    side. ``yield_equals_peak_positive``/``negative`` flag the degenerate
    case where the elastic-limit scan stopped at the extreme-load point.
    """

    displacement: np.ndarray
    load: np.ndarray
    yield_equals_peak_positive: bool = False
    yield_equals_peak_negative: bool = False

    def __post_init__(self):
        d = np.asarray(self.displacement, dtype=float)
        f = np.asarray(self.load, dtype=float)
        object.__setattr__(self, "displacement", d)
        object.__setattr__(self, "load", f)
        _check_idealized(d, f)

    def point(self, k: int):
        """1-based point accessor."""
        return self.displacement[k - 1], self.load[k - 1]


def _check_idealized(d, f):
    if d.shape != (7,) or f.shape != (7,):
        raise ValueError("idealized backbone must have exactly 7 points")
    if d[3] != 0.0 or f[3] != 0.0:
        raise ValueError("idealized point 4 must be the origin")
    if np.any(np.diff(d) < 0):
        raise ValueError("idealized displacements must be non-decreasing")
    if np.any(d[:3] > 0) or np.any(d[4:] < 0):
        raise ValueError("points 1-3 must be non-positive and 5-7 non-negative in displacement")


def _subset_bounds(load: np.ndarray):
    """0-based inclusive boundary indices splitting load at sign changes.

    A zero-load sample belongs to the preceding subset; a new subset
    starts at the next strictly-signed sample.
    """
    n = load.shape[0]
    bounds = [0]
    prev_sign = 0
    for i in range(n):
        if load[i] > 0:
            sign = 1
        elif load[i] < 0:
            sign = -1
        else:
            continue
        if prev_sign != 0 and sign != prev_sign:
            bounds.append(i - 1)
        prev_sign = sign
    bounds.append(n - 1)
    return bounds


def extract_envelope(pair: SignalPair) -> EnvelopeCurve:
    """Extract the cyclic backbone envelope from a load-deformation record.

    The load trace is cut into subsets between consecutive sign changes;
    each subset contributes its maximum if the subset mean is positive,
    otherwise its minimum; the selected points are mapped to their
    displacements and sorted ascending by displacement. Duplicate
    displacements keep the point with the larger load magnitude.

    A record whose load never changes sign yields a degenerate
    single-point envelope, flagged on the result and via a warning.
    """
    validate(pair)
    load = pair.load
    disp = pair.displacement

    bounds = _subset_bounds(load)
    env_idx = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        subset = load[a : b + 1]
        if subset.shape[0] == 0:
            continue
        if subset.mean() > 0:
            local = int(np.argmax(subset))
        else:
            local = int(np.argmin(subset))
        env_idx.append(a + local)

    degenerate = len(bounds) == 2  # no sign change: single subset
    if degenerate:
        warnings.warn(
            "load never changes sign: degenerate single-extremum envelope",
            stacklevel=2,
        )

    env_d = disp[env_idx]
    env_f = load[env_idx]
    order = np.argsort(env_d, kind="stable")
    env_d = env_d[order]
    env_f = env_f[order]

    # Duplicate displacements: keep the outermost point (larger |load|).
    keep_d, keep_f = [], []
    for dv, fv in zip(env_d, env_f):
        if keep_d and dv == keep_d[-1]:
            if abs(fv) > abs(keep_f[-1]):
                keep_f[-1] = fv
        else:
            keep_d.append(dv)
            keep_f.append(fv)

    return EnvelopeCurve(np.array(keep_d), np.array(keep_f), degenerate=degenerate)


def idealize(env: EnvelopeCurve) -> IdealizedBackbone:
    """Reduce an envelope to the 7-point idealized backbone.

    Requires at least 3 points on each displacement sign side. The
    elastic-limit scan on the positive side walks points in ascending
    displacement order and stops at the first load exceeding 65% of the
    maximum envelope load; the negative side mirrors it in descending
    order against 65% of the minimum. If a scan stops at the
    extreme-load point itself the yield point coincides with the peak;
    this is flagged and warned about, not an error.
    """
    d = env.displacement
    f = env.load
    n_neg = int(np.sum(d < 0))
    n_pos = int(np.sum(d > 0))
    if n_neg < 3 or n_pos < 3:
        raise ValueError(
            f"need at least 3 envelope points per side, got {n_neg} negative "
            f"and {n_pos} positive"
        )

    out_d = np.zeros(7)
    out_f = np.zeros(7)

    # Ultimate-displacement points (earliest index on ties).
    i_dmax = int(np.argmax(d))
    i_dmin = int(np.argmin(d))
    out_d[6], out_f[6] = d[i_dmax], f[i_dmax]
    out_d[0], out_f[0] = d[i_dmin], f[i_dmin]

    # Extreme-load points.
    i_fmax = int(np.argmax(f))
    i_fmin = int(np.argmin(f))
    out_d[5], out_f[5] = d[i_fmax], f[i_fmax]
    out_d[1], out_f[1] = d[i_fmin], f[i_fmin]

    f_max = f[i_fmax]
    f_min = f[i_fmin]
    if f_max <= 0 or f_min >= 0:
        raise ValueError("envelope must contain both positive and negative loads")

    # Elastic-limit points: first threshold crossing per side.
    pos_threshold = YIELD_FRACTION * f_max
    i_yield_pos = None
    for i in range(d.shape[0]):  # ascending displacement
        if f[i] > pos_threshold:
            i_yield_pos = i
            break
    neg_threshold = YIELD_FRACTION * f_min
    i_yield_neg = None
    for i in range(d.shape[0] - 1, -1, -1):  # descending displacement
        if f[i] < neg_threshold:
            i_yield_neg = i
            break
    out_d[4], out_f[4] = d[i_yield_pos], f[i_yield_pos]
    out_d[2], out_f[2] = d[i_yield_neg], f[i_yield_neg]

    yep = i_yield_pos == i_fmax
    yen = i_yield_neg == i_fmin
    if yep or yen:
        sides = " and ".join(
            s for s, hit in (("positive", yep), ("negative", yen)) if hit
        )
        warnings.warn(
            f"yield point coincides with the extreme-load point on the {sides} side",
            stacklevel=2,
        )

    return IdealizedBackbone(
        out_d,
        out_f,
        yield_equals_peak_positive=yep,
        yield_equals_peak_negative=yen,
    )
