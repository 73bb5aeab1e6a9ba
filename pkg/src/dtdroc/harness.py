"""End-to-end scenario execution: signals -> AEC -> detection -> ROC -> Pareto."""

import time
from dataclasses import dataclass, field

import numpy as np

from . import aecsim, detectors, pareto, rocprobs, signals
from .config import ScenarioConfig


@dataclass
class SimBundle:
    """Everything one simulated scenario produces before thresholding."""

    far: signals.Signal
    near: signals.Signal
    echo: signals.Signal
    mic: signals.Signal
    x: np.ndarray
    v: np.ndarray
    y: np.ndarray
    schedule: aecsim.EchoPathSchedule
    trace: aecsim.SimulationTrace
    t_hold: int
    stats: dict = field(default_factory=dict)        # detector kind -> StatisticTrace
    epcd_stats: dict = field(default_factory=dict)   # detector kind -> StatisticTrace

    @property
    def n(self) -> int:
        return len(self.far)

    def change_vector(self, t_hold: int = None) -> np.ndarray:
        hold = self.t_hold if t_hold is None else t_hold
        return signals.build_change_vector(self.schedule.change_times, hold, self.n)


@dataclass
class ExperimentReport:
    """Plain-data result of a scenario run; JSON-serializable as-is."""

    meta: dict
    fronts: dict            # label -> [point dict]
    merged: list            # [point dict]
    pxpy: dict              # label -> [[px, py], ...] (2-D pruned projection)
    binary: dict            # label -> [{"t1":, "p_f":, "p_m":}, ...]
    residuals: dict         # label -> {"far":, "dbl":, "chg_shortfall":}
    misalignment_db: list = field(default_factory=list)


def _source_signal(cfg: ScenarioConfig, side: str, n: int):
    src = cfg[side]
    rate = cfg["sample_rate"]
    vad_cfg = signals.VadConfig(
        frame_len=cfg["vad"]["frame_len"],
        energy_threshold_db=cfg["vad"]["threshold_db"],
        hangover=cfg["vad"]["hangover"],
    )
    if src["kind"] == "file":
        sig = signals.load_signal(src["path"], src["format"], rate)
        samples = np.zeros(n)
        samples[:min(n, len(sig))] = sig.samples[:n]
        sig = signals.Signal(samples, rate)
        return sig, signals.energy_vad(sig, vad_cfg)
    synth_cfg = signals.SynthSpeechConfig(
        seed=src["seed"],
        duration=n,
        sample_rate=rate,
        talk_spurt_ms=src["talk_spurt_ms"],
        pause_ms=src["pause_ms"],
        ar_coeffs=tuple(src["ar_coeffs"]),
    )
    return signals.synth_speech_labeled(synth_cfg)


def _echo_schedule(cfg: ScenarioConfig, t_hold: int) -> aecsim.EchoPathSchedule:
    ep = cfg["echo_path"]
    if ep["kind"] == "file":
        taps = np.fromfile(ep["path"], dtype="<f8")
        base = aecsim.EchoPath(taps)
    else:
        base = aecsim.random_echo_path(ep["taps"], ep["decay_tau"], ep["seed"], ep["gain"])
    rate = cfg["sample_rate"]
    changes = [(int(round(ch["at_s"] * rate)), ch["damping"]) for ch in ep["changes"]]
    return aecsim.schedule_from_changes(base, changes, t_hold=t_hold)


def estimate_t_hold(mis_db: np.ndarray, schedule: aecsim.EchoPathSchedule,
                    block_size: int, recross_db: float = -10.0) -> int:
    """Longest time (samples) the filter needs to re-reach recross_db after a change.

    Falls back to one second worth of blocks when a change never reconverges.
    """
    worst = 0
    n_blocks = len(mis_db)
    for t in schedule.change_times:
        k0 = t // block_size
        recovered = None
        for k in range(k0, n_blocks):
            if mis_db[k] <= recross_db:
                recovered = (k + 1) * block_size - t
                break
        worst = max(worst, recovered if recovered is not None else 8000)
    return max(worst, block_size)


def prepare(cfg: ScenarioConfig) -> SimBundle:
    """Run the simulation once; detection statistics are cached for sweeps."""
    n = cfg.n_samples
    rate = cfg["sample_rate"]
    far, x = _source_signal(cfg, "far", n)
    near_raw, v = _source_signal(cfg, "near", n)

    t_hold_s = cfg["echo_path"]["t_hold_s"]
    t_hold = int(round(t_hold_s * rate)) if t_hold_s is not None else None
    schedule = _echo_schedule(cfg, t_hold or rate)

    echo = aecsim.render_echo(far, schedule)
    near = signals.apply_nfr(near_raw, far, x, v, cfg["nfr_db"])
    mic = aecsim.mix_microphone(echo, near, cfg["noise_db"], seed=int(cfg["seed"]) + 4)

    vad_cfg = signals.VadConfig(
        frame_len=cfg["vad"]["frame_len"],
        energy_threshold_db=cfg["vad"]["threshold_db"],
        hangover=cfg["vad"]["hangover"],
    )
    y = signals.energy_vad(echo, vad_cfg)

    fcfg = aecsim.AdaptiveFilterConfig(
        taps=cfg["filter"]["taps"],
        stepsize=cfg["filter"]["stepsize"],
        block_size=cfg["filter"]["block_size"],
        regularization=cfg["filter"]["regularization"],
    )
    # freeze adaptation on ground-truth doubletalk, not on the detector under
    # test: both statistics depend only on x and d, so one simulation serves
    # the whole threshold sweep
    freeze = (x & v).astype(np.uint8)
    trace = aecsim.run_bnlms(far, mic, fcfg, freeze=freeze, truth=schedule, echo=echo)

    if t_hold is None:
        t_hold = estimate_t_hold(trace.misalignment_db, schedule, fcfg.block_size)
        schedule.t_hold = t_hold

    bundle = SimBundle(far=far, near=near, echo=echo, mic=mic, x=x, v=v, y=y,
                       schedule=schedule, trace=trace, t_hold=t_hold)
    for det in cfg["detectors"]:
        dc = detectors.DetectorConfig(kind=det["kind"], window=det["window"],
                                      hangover=det["hangover"])
        bundle.stats[det["kind"]] = detectors.run_detector(dc, far, mic)
        if det["epcd"] == "error_corr":
            bundle.epcd_stats[det["kind"]] = detectors.epcd_error_corr(
                far, trace.error, det["epcd_window"])
    return bundle


def threshold_grid(stat: detectors.StatisticTrace, n_points: int,
                   q_lo: float = 0.005, q_hi: float = 0.995) -> np.ndarray:
    """Even grid across the statistic's central quantile range (finite values)."""
    finite = stat.values[np.isfinite(stat.values)]
    if len(finite) == 0:
        raise ValueError("statistic has no finite values to span")
    lo, hi = np.quantile(finite, [q_lo, q_hi])
    if lo == hi:
        return np.array([lo])
    return np.linspace(lo, hi, n_points)


def sweep_detector(bundle: SimBundle, det: dict, grid_cfg: dict,
                   c: np.ndarray, label: str = None) -> pareto.ParetoArchive:
    """Build one detector's Pareto front over its threshold grid."""
    kind = det["kind"]
    label = label or kind
    stat = bundle.stats[kind]
    t1_grid = threshold_grid(stat, grid_cfg["points"],
                             grid_cfg["quantile_lo"], grid_cfg["quantile_hi"])
    t2_grid = None
    estat = None
    if det["epcd"] == "error_corr":
        estat = bundle.epcd_stats[kind]
        t2_points = grid_cfg["t2_points"] or 16
        t2_grid = threshold_grid(estat, t2_points,
                                 grid_cfg["quantile_lo"], grid_cfg["quantile_hi"])

    def evaluate(t1, t2):
        phi = detectors.decide(stat, t1, det["hangover"])
        if det["epcd"] == "constant":
            eps = detectors.epcd_constant(bundle.n)
        elif det["epcd"] == "oracle":
            eps = detectors.epcd_oracle(c, bundle.v)
        else:
            eps = detectors.epsilon_from_statistic(estat, t2, det["hangover"])
        run = rocprobs.LabeledRun(x=bundle.x, v=bundle.v, y=bundle.y, c=c,
                                  phi=phi, epsilon=eps)
        probs = rocprobs.three_class_probs(run)
        return pareto.OperatingPoint(t1=float(t1),
                                     t2=None if t2 is None else float(t2),
                                     rates=rocprobs.misclass_vector(probs),
                                     probs=probs, label=label)

    try:
        return pareto.build_front(evaluate, t1_grid, t2_grid, label=label)
    except rocprobs.EmptyConditionClassError as exc:
        raise rocprobs.EmptyConditionClassError(f"{exc.which} (detector {label})") from exc


def _binary_series(bundle: SimBundle, det: dict, grid_cfg: dict) -> list:
    stat = bundle.stats[det["kind"]]
    t1_grid = threshold_grid(stat, grid_cfg["points"],
                             grid_cfg["quantile_lo"], grid_cfg["quantile_hi"])
    eps = detectors.epcd_constant(bundle.n)
    out = []
    for t1 in t1_grid:
        phi = detectors.decide(stat, float(t1), det["hangover"])
        run = rocprobs.LabeledRun(x=bundle.x, v=bundle.v, y=bundle.y,
                                  c=np.zeros(bundle.n, dtype=np.uint8),
                                  phi=phi, epsilon=eps)
        roc = rocprobs.binary_roc(run)
        out.append({"t1": float(t1), "p_f": roc.p_f, "p_m": roc.p_m})
    return out


def _residuals(bundle: SimBundle, c: np.ndarray, front: pareto.ParetoArchive) -> dict:
    if not front.points:
        return {"far": 0.0, "dbl": 0.0, "chg_shortfall": 0.0}
    probs = front.points[0].probs
    return {
        "far": abs(probs.p_ff + probs.p_fd + probs.p_fc - 1.0),
        "dbl": abs(probs.p_df + probs.p_dd + probs.p_dc - 1.0),
        "chg_shortfall": rocprobs.change_row_shortfall(probs),
    }


def _control_check(bundle: SimBundle, det: dict, grid_cfg: dict) -> None:
    """On the no-change control (c=0, eps=1): p_df + p_dc must equal binary p_m."""
    stat = bundle.stats[det["kind"]]
    t1 = float(np.median(stat.values[np.isfinite(stat.values)]))
    phi = detectors.decide(stat, t1, det["hangover"])
    x, v = bundle.x.astype(bool), bundle.v.astype(bool)
    dbl = int(np.sum(x & v))
    if dbl == 0:
        raise rocprobs.EmptyConditionClassError("doubletalk (control segment)")
    p_miss = int(np.sum(x & v & (phi == 0))) / dbl
    run = rocprobs.LabeledRun(x=bundle.x, v=bundle.v, y=bundle.y,
                              c=np.zeros(bundle.n, dtype=np.uint8),
                              phi=phi, epsilon=detectors.epcd_constant(bundle.n))
    if rocprobs.binary_roc(run).p_m != p_miss:
        raise AssertionError("reduction self-check failed: two-class miss rates disagree")


def _meta(cfg: ScenarioConfig, bundle: SimBundle, elapsed: float, extra: dict = None) -> dict:
    meta = {
        "config_hash": cfg.config_hash(),
        "seed": cfg["seed"],
        "sample_rate": cfg["sample_rate"],
        "n_samples": bundle.n,
        "duration_s": cfg["duration_s"],
        "t_hold_samples": bundle.t_hold,
        "block_size": cfg["filter"]["block_size"],
        "elapsed_s": round(elapsed, 3),
    }
    if extra:
        meta.update(extra)
    return meta


def _report_from_fronts(cfg, bundle, fronts: dict, elapsed: float, extra_meta=None) -> ExperimentReport:
    from .report import point_to_dict

    merged = pareto.ParetoArchive()
    for front in fronts.values():
        merged = pareto.merge_fronts(merged, front)
    pxpy = {
        label: [[px, py] for px, py, _ in pareto.project_front(front)]
        for label, front in fronts.items()
    }
    pxpy["merged"] = [[px, py] for px, py, _ in pareto.project_front(merged)]
    binary = {}
    residuals = {}
    for det in cfg["detectors"]:
        if det["kind"] in bundle.stats:
            binary[det["kind"]] = _binary_series(bundle, det, cfg["grid"])
            _control_check(bundle, det, cfg["grid"])
    for label, front in fronts.items():
        residuals[label] = _residuals(bundle, None, front)
    return ExperimentReport(
        meta=_meta(cfg, bundle, elapsed, extra_meta),
        fronts={label: [point_to_dict(p) for p in front] for label, front in fronts.items()},
        merged=[point_to_dict(p) for p in merged],
        pxpy=pxpy,
        binary=binary,
        residuals=residuals,
        misalignment_db=[float(m) for m in bundle.trace.misalignment_db],
    )


def run_scenario(cfg: ScenarioConfig) -> ExperimentReport:
    """Full pipeline for every configured detector."""
    start = time.perf_counter()
    bundle = prepare(cfg)
    c = bundle.change_vector()
    fronts = {det["kind"]: sweep_detector(bundle, det, cfg["grid"], c)
              for det in cfg["detectors"]}
    return _report_from_fronts(cfg, bundle, fronts, time.perf_counter() - start)


def compare_detectors(cfg: ScenarioConfig) -> ExperimentReport:
    """Per-detector fronts plus their merged front (detector comparison)."""
    dets = cfg["detectors"]
    if len(dets) == 1:
        dets = dets * 2  # comparing a detector with itself is well-defined
    start = time.perf_counter()
    bundle = prepare(cfg)
    c = bundle.change_vector()
    fronts = {}
    for det in dets:
        label = det["kind"]
        if label in fronts:
            continue
        fronts[label] = sweep_detector(bundle, det, cfg["grid"], c)
    return _report_from_fronts(cfg, bundle, fronts, time.perf_counter() - start,
                               extra_meta={"mode": "compare"})


def thold_sweep(cfg: ScenarioConfig, t_hold_values_s) -> ExperimentReport:
    """Re-label the change vector per hold time and rebuild every front.

    The simulation and detection statistics are computed once and reused.
    """
    start = time.perf_counter()
    rate = cfg["sample_rate"]
    bundle = prepare(cfg)
    fronts = {}
    for th_s in t_hold_values_s:
        t_hold = int(round(th_s * rate))
        c = bundle.change_vector(t_hold)
        for det in cfg["detectors"]:
            label = f"{det['kind']}@{int(round(th_s * 1000))}ms"
            fronts[label] = sweep_detector(bundle, det, cfg["grid"], c, label=label)
    return _report_from_fronts(cfg, bundle, fronts, time.perf_counter() - start,
                               extra_meta={"mode": "thold-sweep",
                                           "t_hold_values_s": list(t_hold_values_s)})


def selfcheck(cfg: ScenarioConfig) -> list:
    """Run the report-time invariants on the configured scenario.

    Returns (name, ok, detail) triples.
    """
    results = []
    bundle = prepare(cfg)
    c = bundle.change_vector()
    det = cfg["detectors"][0]
    front = sweep_detector(bundle, det, cfg["grid"], c)

    res = _residuals(bundle, c, front)
    results.append(("row-sums far/dbl exact", res["far"] == 0.0 and res["dbl"] == 0.0,
                    f"far={res['far']} dbl={res['dbl']}"))

    x, v, y = bundle.x.astype(bool), bundle.v.astype(bool), bundle.y.astype(bool)
    denom = int(np.sum(((x | (~x & ~y)) & ~v & (c == 1))))
    num = int(np.sum(x & ~v & (c == 1)))
    if front.points:
        expect = abs(num / denom - 1.0) if denom else 0.0
        results.append(("change-row shortfall matches counts",
                        abs(res["chg_shortfall"] - expect) < 1e-15,
                        f"reported={res['chg_shortfall']} expected={expect}"))

    try:
        _control_check(bundle, det, cfg["grid"])
        results.append(("binary reduction control", True, ""))
    except AssertionError as exc:
        results.append(("binary reduction control", False, str(exc)))

    m = front.rate_matrix()
    mutual = True
    for i in range(len(m)):
        for j in range(len(m)):
            if i != j and pareto.dominance(m[i], m[j]) == pareto.STRICT:
                mutual = False
    results.append(("front mutually non-dominating", mutual, ""))
    return results
