"""Echo-path simulation and the block-NLMS adaptive filter."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.signal import fftconvolve

from .signals import Signal, as_activity

MISALIGNMENT_FLOOR_DB = -300.0


@dataclass
class EchoPath:
    """Room impulse response as a flat tap vector."""

    taps: np.ndarray

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if self.taps.ndim != 1 or len(self.taps) < 1:
            raise ValueError("echo path must be a nonempty 1-D tap vector")
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("echo path taps must be finite")

    def __len__(self):
        return len(self.taps)


@dataclass
class EchoPathSchedule:
    """Piecewise-constant echo path: (start_sample, EchoPath) segments."""

    segments: list
    t_hold: int = 8000

    def __post_init__(self):
        if not self.segments:
            raise ValueError("schedule needs at least one segment")
        starts = [s for s, _ in self.segments]
        if starts[0] != 0:
            raise ValueError("first segment must start at sample 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        lengths = {len(p) for _, p in self.segments}
        if len(lengths) != 1:
            raise ValueError("all echo paths in a schedule must share tap length")

    @property
    def change_times(self):
        """Instants where the path switches (excludes the initial segment)."""
        return [s for s, _ in self.segments[1:]]

    def path_at(self, n: int) -> EchoPath:
        path = self.segments[0][1]
        for start, p in self.segments:
            if start <= n:
                path = p
            else:
                break
        return path


@dataclass
class AdaptiveFilterConfig:
    taps: int = 1024
    stepsize: float = 0.5
    block_size: int = 256
    regularization: float = None

    def __post_init__(self):
        if not 0 <= self.stepsize <= 2:
            raise ValueError("stepsize must lie in [0, 2]")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.regularization is None:
            self.regularization = 1e-6 * self.taps
        if self.regularization <= 0:
            raise ValueError("regularization must be > 0")


@dataclass
class SimulationTrace:
    """Signals and diagnostics from one adaptive-filter run."""

    echo: Signal
    microphone: Signal
    error: Signal
    estimate_coeffs_final: np.ndarray
    misalignment_db: np.ndarray = None


def random_echo_path(taps: int, decay_tau: float, seed: int, gain: float = 0.7) -> EchoPath:
    """Seeded exponentially decaying white-noise impulse response.

    gain is the l2 norm of the tap vector.
    """
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(taps) * np.exp(-np.arange(taps) / decay_tau)
    h *= gain / np.linalg.norm(h)
    return EchoPath(h)


def scale_damping(h: EchoPath, factor: float) -> EchoPath:
    """Multiply every tap by factor (> 0)."""
    if factor <= 0:
        raise ValueError("damping factor must be > 0")
    return EchoPath(h.taps * factor)


def schedule_from_changes(base: EchoPath, changes, t_hold: int) -> EchoPathSchedule:
    """Build a schedule from (sample, relative damping factor) pairs.

    Each factor multiplies the previous segment's path.
    """
    segments = [(0, base)]
    current = base
    for at, factor in changes:
        current = scale_damping(current, factor)
        segments.append((int(at), current))
    return EchoPathSchedule(segments, t_hold=t_hold)


def render_echo(far: Signal, schedule: EchoPathSchedule) -> Signal:
    """Convolve far-end speech through the time-varying echo path.

    The path switches instantaneously at segment boundaries; each output
    sample uses the full input history through the segment active at that
    sample (zero history before n=0).
    """
    x = far.samples
    if len(x) == 0:
        raise ValueError("far-end signal is empty")
    y = np.empty_like(x)
    n = len(x)
    starts = [s for s, _ in schedule.segments] + [n]
    for (start, path), end in zip(schedule.segments, starts[1:]):
        if start >= n:
            break
        full = fftconvolve(x, path.taps)[:n]
        y[start:min(end, n)] = full[start:min(end, n)]
    return Signal(y, far.sample_rate)


def mix_microphone(echo: Signal, near: Signal, noise_db: float = None, seed: int = 0) -> Signal:
    """Microphone signal d = echo + near, plus optional seeded white noise.

    noise_db is relative to the echo power; None disables noise.
    """
    if len(echo) != len(near):
        raise ValueError("echo and near must have equal length")
    d = echo.samples + near.samples
    if noise_db is not None:
        echo_pow = np.mean(echo.samples ** 2)
        sigma = np.sqrt(echo_pow * 10.0 ** (noise_db / 10.0))
        d = d + sigma * np.random.default_rng(seed).standard_normal(len(d))
    return Signal(d, echo.sample_rate)


def misalignment_db(estimate: np.ndarray, truth: EchoPath) -> float:
    """Normalized tap distance 20*log10(||truth - estimate|| / ||truth||).

    Exact matches return the -300 dB floor instead of -inf.
    """
    estimate = np.asarray(estimate, dtype=np.float64)
    if len(estimate) != len(truth):
        raise ValueError("tap counts differ")
    ref = np.linalg.norm(truth.taps)
    if ref == 0:
        raise ValueError("truth path has zero norm")
    ratio = np.linalg.norm(truth.taps - estimate) / ref
    if ratio < 10.0 ** (MISALIGNMENT_FLOOR_DB / 20.0):
        return MISALIGNMENT_FLOOR_DB
    return float(20.0 * np.log10(ratio))


def _block_gram(xpad: np.ndarray, lo: int, rows: int, taps: int) -> np.ndarray:
    """Gram matrix X X^T of a block's data matrix, built lag by lag.

    Row i of X is the (reversed) tap window ending at sample lo+i, so entry
    (i, j) is a windowed autocorrelation of the padded input at lag |i - j|.
    Cumulative sums over the per-lag products give the whole matrix in
    O(rows * (rows + taps)) instead of the O(rows^2 * taps) dense product.
    """
    seg = xpad[lo:lo + taps - 1 + rows]
    gram = np.empty((rows, rows))
    for m in range(rows):
        prod = seg[:len(seg) - m] * seg[m:]
        csum = np.concatenate(([0.0], np.cumsum(prod)))
        vals = csum[taps:taps + rows - m] - csum[:rows - m]
        idx = np.arange(rows - m)
        gram[idx, idx + m] = vals
        gram[idx + m, idx] = vals
    return gram


def run_bnlms(far: Signal, mic: Signal, cfg: AdaptiveFilterConfig,
              freeze=None, truth: EchoPathSchedule = None,
              echo: Signal = None) -> SimulationTrace:
    """Block-NLMS echo canceller.

    Per block: e = d - X h, then h += mu * X^T e / (denom + delta). The
    denominator is the energy of the samples spanned by the block's tap
    windows, which gives sample-NLMS convergence speed on broadband input,
    but that alone can diverge when the input is strongly colored (the top
    eigenvalue of X^T X then dwarfs the window energy). A stability guard
    therefore raises the denominator to mu * lambda_max(X X^T) / 1.8
    whenever that exceeds the window energy, keeping the per-block error
    contraction strictly inside the unit circle for any input.

    Blocks containing any freeze bit skip the update but still produce
    output. With a truth schedule, per-block misalignment against the path
    active at the block end is recorded.
    """
    if len(far) != len(mic):
        raise ValueError("far and mic must have equal length")
    n = len(far)
    L, B = cfg.taps, cfg.block_size
    if freeze is None:
        freeze = np.zeros(n, dtype=np.uint8)
    freeze = as_activity(freeze)
    if len(freeze) != n:
        raise ValueError("freeze length must match signals")

    xpad = np.concatenate((np.zeros(L - 1), far.samples))
    # windows[n] = x[n-L+1 .. n]; reversed below to x[n], x[n-1], ...
    windows = np.lib.stride_tricks.sliding_window_view(xpad, L)
    d = mic.samples
    h = np.zeros(L)
    e = np.empty(n)
    n_blocks = int(np.ceil(n / B))
    mis = np.empty(n_blocks) if truth is not None else None

    for k in range(n_blocks):
        lo, hi = k * B, min((k + 1) * B, n)
        X = windows[lo:hi, ::-1]
        e[lo:hi] = d[lo:hi] - X @ h
        if not freeze[lo:hi].any():
            energy = np.dot(xpad[lo:hi + L - 1], xpad[lo:hi + L - 1])
            gram = _block_gram(xpad, lo, hi - lo, L)
            top = eigh(gram, subset_by_index=(len(gram) - 1, len(gram) - 1),
                       eigvals_only=True)[0]
            denom = max(energy, cfg.stepsize * top / 1.8) + cfg.regularization
            h = h + cfg.stepsize * (X.T @ e[lo:hi]) / denom
        if truth is not None:
            mis[k] = misalignment_db(h, truth.path_at(hi - 1))

    return SimulationTrace(
        echo=echo,
        microphone=mic,
        error=Signal(e, far.sample_rate),
        estimate_coeffs_final=h,
        misalignment_db=mis,
    )
