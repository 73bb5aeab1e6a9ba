"""Three-class ROC evaluation of doubletalk detectors in acoustic echo cancellation."""

from .signals import (
    Signal, VadConfig, SynthSpeechConfig,
    load_signal, save_signal, synth_speech, synth_speech_labeled,
    energy_vad, build_change_vector, apply_nfr,
)
from .aecsim import (
    EchoPath, EchoPathSchedule, AdaptiveFilterConfig, SimulationTrace,
    random_echo_path, scale_damping, schedule_from_changes,
    render_echo, mix_microphone, run_bnlms, misalignment_db,
)
from .detectors import (
    StatisticTrace, DecisionTrace, DetectorConfig,
    geigel_statistic, xcorr_statistic, decide,
    epcd_constant, epcd_oracle, epcd_error_corr, epsilon_from_statistic,
)
from .rocprobs import (
    LabeledRun, ThreeClassProbs, BinaryRoc, EmptyConditionClassError,
    three_class_probs, binary_roc, reduce_p_false, reduce_p_miss,
    normalization_residuals, change_row_shortfall, misclass_vector,
)
from .pareto import (
    OperatingPoint, ParetoArchive,
    dominance, archive_insert, build_front, merge_fronts,
    band_filter, aggregate_px_py, project_front, py_at_px,
)
from .config import ScenarioConfig, ConfigError, default_config, load_config, validate_config
from .harness import run_scenario, compare_detectors, thold_sweep, selfcheck, ExperimentReport

__version__ = "0.1.0"
