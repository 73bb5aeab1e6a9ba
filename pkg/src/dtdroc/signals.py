"""Signal generation, file I/O, voice activity labeling and level control."""

import wave
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter


@dataclass
class Signal:
    """Mono audio signal with a sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite samples")

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class VadConfig:
    """Frame-energy VAD with a peak-relative threshold and forward hangover."""

    frame_len: int = 80
    energy_threshold_db: float = -40.0
    hangover: int = 240

    def __post_init__(self):
        if self.frame_len < 1:
            raise ValueError("frame_len must be >= 1")
        if self.hangover < 0:
            raise ValueError("hangover must be >= 0")


@dataclass
class SynthSpeechConfig:
    """Seeded speech-like generator: on/off gating with AR-colored noise.

    The gate starts with one pause of exactly pause_ms, then alternates
    exponential talk/pause durations with the given means. ar_coeffs are the
    trailing denominator coefficients of the shaping filter 1/A(z),
    A = [1, *ar_coeffs].
    """

    seed: int = 0
    duration: int = 80000
    sample_rate: int = 8000
    talk_spurt_ms: float = 1200.0
    pause_ms: float = 800.0
    ar_coeffs: tuple = (-1.2, 0.5)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be > 0")
        poly = np.concatenate(([1.0], np.asarray(self.ar_coeffs, dtype=np.float64)))
        if len(poly) > 1 and np.max(np.abs(np.roots(poly))) >= 1.0:
            raise ValueError("unstable AR coefficients (pole on or outside unit circle)")


def as_activity(bits) -> np.ndarray:
    """Validate and coerce a 0/1 sequence to a uint8 activity vector."""
    arr = np.asarray(bits)
    if arr.dtype == bool:
        return arr.astype(np.uint8)
    arr = arr.astype(np.uint8)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("activity vector elements must be 0 or 1")
    return arr


def load_signal(path, format: str, expected_rate: int) -> Signal:
    """Load a mono signal from a 16-bit WAV or raw float64-LE file.

    WAV sample rate is read from the header and must equal expected_rate;
    raw files have no header, so expected_rate is taken as the rate.
    """
    if format == "wav16-mono":
        with wave.open(str(path), "rb") as wf:
            if wf.getnchannels() != 1:
                raise ValueError(f"{path}: multi-channel input not supported")
            if wf.getsampwidth() != 2:
                raise ValueError(f"{path}: expected 16-bit PCM, got {8 * wf.getsampwidth()}-bit")
            rate = wf.getframerate()
            if rate != expected_rate:
                raise ValueError(f"{path}: sample-rate mismatch (file {rate} Hz, expected {expected_rate} Hz)")
            raw = wf.readframes(wf.getnframes())
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
        return Signal(samples, rate)
    if format == "raw-f64le":
        samples = np.fromfile(str(path), dtype="<f8")
        return Signal(samples, expected_rate)
    raise ValueError(f"unknown format {format!r}")


def save_signal(sig: Signal, path, format: str) -> None:
    """Write a signal in one of the load_signal formats (bit-exact for raw)."""
    if format == "wav16-mono":
        pcm = np.clip(np.round(sig.samples * 32768.0), -32768, 32767).astype("<i2")
        with wave.open(str(path), "wb") as wf:
            wf.setnchannels(1)
            wf.setsampwidth(2)
            wf.setframerate(sig.sample_rate)
            wf.writeframes(pcm.tobytes())
    elif format == "raw-f64le":
        sig.samples.astype("<f8").tofile(str(path))
    else:
        raise ValueError(f"unknown format {format!r}")


def _gate_from_config(cfg: SynthSpeechConfig, rng: np.random.Generator) -> np.ndarray:
    ms_to_samp = cfg.sample_rate / 1000.0
    gate = np.zeros(cfg.duration, dtype=np.uint8)
    pos = int(round(cfg.pause_ms * ms_to_samp))  # leading pause of one mean length
    talking = True
    while pos < cfg.duration:
        mean_ms = cfg.talk_spurt_ms if talking else cfg.pause_ms
        n = max(1, int(round(rng.exponential(mean_ms) * ms_to_samp)))
        if talking:
            gate[pos:pos + n] = 1
        pos += n
        talking = not talking
    return gate


def synth_speech_labeled(cfg: SynthSpeechConfig):
    """Generate a speech-like signal plus its exact gating vector.

    Deterministic for a fixed seed. Returns (Signal, ActivityVector); the gate
    is the ground-truth activity used in place of a VAD for synthetic runs.
    """
    rng = np.random.default_rng(cfg.seed)
    gate = _gate_from_config(cfg, rng)
    noise = rng.standard_normal(cfg.duration)
    denom = np.concatenate(([1.0], np.asarray(cfg.ar_coeffs, dtype=np.float64)))
    colored = lfilter([1.0], denom, noise)
    samples = colored * gate
    peak = np.max(np.abs(samples))
    if peak > 0:
        samples = samples * (0.9 / peak)
    return Signal(samples, cfg.sample_rate), gate


def synth_speech(cfg: SynthSpeechConfig) -> Signal:
    """Generate a speech-like signal (see synth_speech_labeled)."""
    return synth_speech_labeled(cfg)[0]


def energy_vad(s: Signal, cfg: VadConfig = VadConfig()) -> np.ndarray:
    """Per-sample activity from frame energy against a peak-relative threshold.

    A frame is active when its energy exceeds the global peak frame energy by
    more than energy_threshold_db; activity is extended forward by hangover
    samples. Scale-invariant by construction. An all-zero signal yields an
    all-zero vector.
    """
    x = s.samples
    if len(x) == 0:
        raise ValueError("empty signal")
    n_frames = int(np.ceil(len(x) / cfg.frame_len))
    padded = np.zeros(n_frames * cfg.frame_len)
    padded[:len(x)] = x
    energies = np.sum(padded.reshape(n_frames, cfg.frame_len) ** 2, axis=1)
    peak = energies.max()
    if peak == 0:
        return np.zeros(len(x), dtype=np.uint8)
    active = energies > peak * 10.0 ** (cfg.energy_threshold_db / 10.0)
    bits = np.repeat(active, cfg.frame_len)[:len(x)].astype(np.uint8)
    return extend_forward(bits, cfg.hangover)


def extend_forward(bits: np.ndarray, hangover: int) -> np.ndarray:
    """Extend every 1 forward by hangover samples (trailing-window max)."""
    bits = as_activity(bits)
    if hangover <= 0 or len(bits) == 0:
        return bits
    from scipy.ndimage import maximum_filter1d
    size = hangover + 1
    # origin shifts the window so it covers [n - hangover, n]
    return maximum_filter1d(bits, size=size, origin=(size - 1) // 2, mode="constant")


def build_change_vector(change_times, t_hold: int, length: int) -> np.ndarray:
    """Mark [t_k, t_k + t_hold) as 1 for each change time; overlaps merge."""
    times = list(change_times)
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("change times must be strictly increasing")
    if any(t < 0 or t >= length for t in times):
        raise ValueError("change times must lie in [0, length)")
    c = np.zeros(length, dtype=np.uint8)
    for t in times:
        c[t:min(t + t_hold, length)] = 1
    return c


def apply_nfr(near: Signal, far: Signal, far_vad, near_vad, nfr_db: float) -> Signal:
    """Scale near so active-region near power / active-region far power hits nfr_db."""
    if len(near) != len(far):
        raise ValueError("near and far must have equal length")
    far_vad = as_activity(far_vad)
    near_vad = as_activity(near_vad)
    far_pow = _active_power(far.samples, far_vad)
    near_pow = _active_power(near.samples, near_vad)
    if far_pow == 0 or near_pow == 0:
        raise ValueError("zero active energy in near or far signal")
    target = 10.0 ** (nfr_db / 10.0)
    scale = np.sqrt(target * far_pow / near_pow)
    return Signal(near.samples * scale, near.sample_rate)


def _active_power(samples: np.ndarray, vad: np.ndarray) -> float:
    mask = vad.astype(bool)
    if not mask.any():
        return 0.0
    return float(np.mean(samples[mask] ** 2))
