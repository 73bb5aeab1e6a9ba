"""Two-stage detection: doubletalk statistics and echo-path-change discriminators."""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .signals import Signal, as_activity, extend_forward

ABOVE = "declare-when-above"
BELOW = "declare-when-below"


@dataclass
class StatisticTrace:
    """Per-sample detection statistic plus its declaration orientation."""

    values: np.ndarray
    orientation: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.orientation not in (ABOVE, BELOW):
            raise ValueError(f"unknown orientation {self.orientation!r}")


@dataclass
class DecisionTrace:
    phi: np.ndarray
    epsilon: np.ndarray
    t1: float
    t2: float = None


@dataclass
class DetectorConfig:
    kind: str = "geigel"  # geigel | xcorr
    window: int = None    # default: 1024 for geigel, 256 for xcorr
    hangover: int = 240

    def __post_init__(self):
        if self.kind not in ("geigel", "xcorr"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if self.window is None:
            self.window = 1024 if self.kind == "geigel" else 256
        if self.window < 1 or (self.kind == "xcorr" and self.window < 2):
            raise ValueError("window too small")
        if self.hangover < 0:
            raise ValueError("hangover must be >= 0")


def _trailing_max(x: np.ndarray, window: int) -> np.ndarray:
    size = window
    # origin shifts the window so it covers [n - window + 1, n]
    return maximum_filter1d(x, size=size, origin=(size - 1) // 2, mode="constant")


def _trailing_sum(x: np.ndarray, window: int) -> np.ndarray:
    c = np.concatenate(([0.0], np.cumsum(x)))
    out = c[1:].copy()
    out[window:] -= c[1:-window]
    return out


def geigel_statistic(far: Signal, mic: Signal, window: int = 1024) -> StatisticTrace:
    """|d(n)| over the max of |x| in the trailing window; declare when above.

    A silent far-end window gives +inf when the mic sample is nonzero
    (doubletalk at any finite threshold) and 0 otherwise.
    """
    if len(far) != len(mic):
        raise ValueError("far and mic must have equal length")
    if window < 1:
        raise ValueError("window must be >= 1")
    xmax = _trailing_max(np.abs(far.samples), window)
    dmag = np.abs(mic.samples)
    values = np.empty(len(dmag))
    nz = xmax > 0
    values[nz] = dmag[nz] / xmax[nz]
    values[~nz] = np.where(dmag[~nz] > 0, np.inf, 0.0)
    return StatisticTrace(values, ABOVE)


def xcorr_statistic(far: Signal, mic: Signal, window: int = 256) -> StatisticTrace:
    """Windowed normalized cross-correlation magnitude; declare when below.

    Low correlation between x and d indicates the mic is dominated by
    near-end speech. Windows where either signal has zero energy yield 1
    (no declaration).
    """
    if len(far) != len(mic):
        raise ValueError("far and mic must have equal length")
    if window < 2:
        raise ValueError("window must be >= 2")
    values = _windowed_ncc(far.samples, mic.samples, window, zero_energy_value=1.0)
    return StatisticTrace(values, BELOW)


def _windowed_ncc(x: np.ndarray, d: np.ndarray, window: int, zero_energy_value: float) -> np.ndarray:
    xd = _trailing_sum(x * d, window)
    xx = np.maximum(_trailing_sum(x * x, window), 0.0)
    dd = np.maximum(_trailing_sum(d * d, window), 0.0)
    denom = np.sqrt(xx * dd)
    values = np.full(len(x), zero_energy_value)
    nz = denom > 0
    values[nz] = np.minimum(np.abs(xd[nz]) / denom[nz], 1.0)
    return values


def decide(stat: StatisticTrace, threshold: float, hangover: int = 0) -> np.ndarray:
    """Threshold a statistic (strict inequality) and extend hits by hangover."""
    if not np.isfinite(threshold):
        # -inf under declare-when-above (or +inf under below) declares always
        if (stat.orientation == ABOVE) == (threshold < 0):
            return np.ones(len(stat.values), dtype=np.uint8)
        return np.zeros(len(stat.values), dtype=np.uint8)
    if stat.orientation == ABOVE:
        raw = stat.values > threshold
    else:
        raw = stat.values < threshold
    return extend_forward(raw.astype(np.uint8), hangover)


def epcd_constant(length: int) -> np.ndarray:
    """Second stage of a detector that never distinguishes path changes: eps = 1."""
    return np.ones(length, dtype=np.uint8)


def epcd_oracle(c, v) -> np.ndarray:
    """Ground-truth second stage: declare change exactly on change-only samples."""
    c = as_activity(c)
    v = as_activity(v)
    if len(c) != len(v):
        raise ValueError("c and v must have equal length")
    eps = np.ones(len(c), dtype=np.uint8)
    eps[(c == 1) & (v == 0)] = 0
    return eps


def epcd_error_corr(far: Signal, err: Signal, window: int = 256) -> StatisticTrace:
    """Change-vs-doubletalk statistic from far-end / residual-error correlation.

    After a path change the residual tracks the far-end; during doubletalk it
    is dominated by near-end speech. Declare-when-above maps to eps = 0
    (change) past the second threshold. Zero-energy windows yield 0.
    """
    if len(far) != len(err):
        raise ValueError("far and err must have equal length")
    if window < 2:
        raise ValueError("window must be >= 2")
    values = _windowed_ncc(far.samples, err.samples, window, zero_energy_value=0.0)
    return StatisticTrace(values, ABOVE)


def epsilon_from_statistic(stat: StatisticTrace, t2: float, hangover: int = 0) -> np.ndarray:
    """Map a second-stage statistic to eps: change declared (eps=0) on hits."""
    return (1 - decide(stat, t2, hangover)).astype(np.uint8)


def run_detector(cfg: DetectorConfig, far: Signal, mic: Signal) -> StatisticTrace:
    """Compute the first-stage statistic for a configured detector."""
    if cfg.kind == "geigel":
        return geigel_statistic(far, mic, cfg.window)
    return xcorr_statistic(far, mic, cfg.window)
