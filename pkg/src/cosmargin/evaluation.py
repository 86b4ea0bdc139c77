"""Detection error rates: threshold sweeps, EER, and DET-curve points.

Score convention: higher means more target-like. The sweep visits every
distinct score plus -inf/+inf sentinels; at a threshold t,

    false-positive rate = fraction of nontarget scores >= t
    false-negative rate = fraction of target  scores <  t

so nontarget scores tied with the threshold count as false positives. That
tie rule is part of the contract: EER on tied data depends on it.

The equal error rate is read off the sweep polyline by linear
interpolation: both rates vary linearly between adjacent sweep points, and
the reported EER is the common value where they cross. This matches common
toolkit practice and is stable for small trial counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Trial
from .scoring import ScoreSet

# Rates are clipped to this range before the probit transform.
DET_CLIP = 1e-6


@dataclass(frozen=True)
class ErrorRates:
    """One threshold sweep: ascending thresholds with their error rates."""

    thresholds: np.ndarray
    fpr: np.ndarray
    fnr: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=np.float64)
        fpr = np.asarray(self.fpr, dtype=np.float64)
        fnr = np.asarray(self.fnr, dtype=np.float64)
        if not (t.shape == fpr.shape == fnr.shape) or t.ndim != 1:
            raise ValueError("thresholds, fpr, fnr must be 1-D and equal length")
        if np.any(np.diff(t) <= 0):
            raise ValueError("thresholds must be strictly ascending")
        for name, r in (("fpr", fpr), ("fnr", fnr)):
            if r.size and (r.min() < 0.0 or r.max() > 1.0):
                raise ValueError(f"{name} values must lie in [0, 1]")
        if np.any(np.diff(fpr) > 0):
            raise ValueError("fpr must be non-increasing along the sweep")
        if np.any(np.diff(fnr) < 0):
            raise ValueError("fnr must be non-decreasing along the sweep")
        for name, arr in (("thresholds", t), ("fpr", fpr), ("fnr", fnr)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class EerResult:
    eer: float
    threshold: float


def _split_scores(scores: ScoreSet, trials: list[Trial]):
    known = scores.keys()
    missing = sorted(
        (t.enroll_utt, t.test_utt)
        for t in trials
        if (t.enroll_utt, t.test_utt) not in known
    )
    if missing:
        raise ValueError(f"trials without scores: {missing[:10]}")
    target = np.array(
        [scores.get(t.enroll_utt, t.test_utt) for t in trials if t.is_target]
    )
    nontarget = np.array(
        [scores.get(t.enroll_utt, t.test_utt) for t in trials if not t.is_target]
    )
    if target.size == 0:
        raise ValueError("no target trials")
    if nontarget.size == 0:
        raise ValueError("no nontarget trials")
    return target, nontarget


def error_curve(scores: ScoreSet, trials: list[Trial]) -> ErrorRates:
    """Sweep every distinct score (plus sentinels) and tabulate the rates."""
    target, nontarget = _split_scores(scores, trials)
    thresholds = np.concatenate(
        ([-np.inf], np.unique(np.concatenate((target, nontarget))), [np.inf])
    )
    tar_sorted = np.sort(target)
    non_sorted = np.sort(nontarget)
    # count of nontargets >= t, and of targets < t
    fpr = (non_sorted.size - np.searchsorted(non_sorted, thresholds, side="left"))
    fnr = np.searchsorted(tar_sorted, thresholds, side="left")
    return ErrorRates(thresholds, fpr / non_sorted.size, fnr / tar_sorted.size)


def eer(scores: ScoreSet, trials: list[Trial]) -> EerResult:
    """Equal error rate and the threshold where the rates cross.

    The difference fnr - fpr is non-decreasing along the sweep and spans
    [-1, 1], so it has a unique zero crossing; between sweep points the
    crossing value is interpolated linearly. When the crossing segment ends
    at a sentinel, the reported threshold is the finite endpoint.
    """
    curve = error_curve(scores, trials)
    gap = curve.fnr - curve.fpr
    idx = int(np.searchsorted(gap, 0.0, side="left"))
    if gap[idx] == 0.0:
        return EerResult(float(curve.fpr[idx]), float(curve.thresholds[idx]))
    # gap[idx] > 0 > gap[idx - 1]: interpolate inside the segment
    g0, g1 = gap[idx - 1], gap[idx]
    s = g0 / (g0 - g1)
    value = curve.fpr[idx - 1] + s * (curve.fpr[idx] - curve.fpr[idx - 1])
    t0, t1 = curve.thresholds[idx - 1], curve.thresholds[idx]
    if math.isinf(t0):
        threshold = t1
    elif math.isinf(t1):
        threshold = t0
    else:
        threshold = t0 + s * (t1 - t0)
    return EerResult(float(value), float(threshold))


def det_points(curve: ErrorRates) -> list[tuple[float, float]]:
    """(probit(fpr), probit(fnr)) per sweep point, for external plotting.

    Rates are clipped away from 0 and 1 first so the transform stays
    finite.
    """
    fpr = np.clip(curve.fpr, DET_CLIP, 1.0 - DET_CLIP)
    fnr = np.clip(curve.fnr, DET_CLIP, 1.0 - DET_CLIP)
    return list(zip(probit(fpr).tolist(), probit(fnr).tolist()))


# Rational approximation of the inverse standard-normal CDF (Acklam-style
# coefficients; absolute error below 1.5e-7 over (0, 1), in fact ~1e-9).
_PROBIT_A = (
    -3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
    1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00,
)
_PROBIT_B = (
    -5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
    6.680131188771972e+01, -1.328068155288572e+01,
)
_PROBIT_C = (
    -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
    -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00,
)
_PROBIT_D = (
    7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
    3.754408661907416e+00,
)
_PROBIT_LOW = 0.02425


def _probit_tail(q: np.ndarray) -> np.ndarray:
    c = _PROBIT_C
    d = _PROBIT_D
    num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
    den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
    return num / den


def probit(p) -> np.ndarray:
    """Inverse standard-normal CDF, elementwise, for p strictly in (0, 1)."""
    p = np.asarray(p, dtype=np.float64)
    if p.size and (p.min() <= 0.0 or p.max() >= 1.0):
        raise ValueError("probit needs probabilities strictly inside (0, 1)")
    out = np.empty_like(p)

    low = p < _PROBIT_LOW
    high = p > 1.0 - _PROBIT_LOW
    mid = ~(low | high)

    if np.any(low):
        q = np.sqrt(-2.0 * np.log(p[low]))
        out[low] = _probit_tail(q)
    if np.any(high):
        q = np.sqrt(-2.0 * np.log(1.0 - p[high]))
        out[high] = -_probit_tail(q)
    if np.any(mid):
        a = _PROBIT_A
        b = _PROBIT_B
        q = p[mid] - 0.5
        r = q * q
        num = ((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]
        den = ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
        out[mid] = q * num / den
    return out
