"""Band SNR reporting, leave-one-patient-out evaluation and ablation sweeps.

The experiment pipeline has two stages.  Stage A is per-recording signal
work (conditioning, motion handling, source separation) and is independent
of how windows are cut; stage B segments, balances, normalizes and trains.
Sweeps over stride or class ratio therefore reuse stage A products, while a
motion ablation reruns stage A.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.signal import welch

from .emd import separate_recording_emd
from .features import (
    LabeledEpoch,
    WindowSpec,
    apply_normalizer,
    balance_epochs,
    features_for_epochs,
    fit_normalizer,
    segment_recording,
)
from .models import make_model
from .models.cnn import CnnClassifier
from .nnmf import NnmfConfig, TemplateBank, separate_recording_nnmf
from .preprocess import PreprocessConfig, bandpass_filter, preprocess_recording
from .signals import Recording
from .vmd import MOTION_R_THRESHOLD, remove_motion_artifacts

SNR_EPS = 1e-20


# ---------------------------------------------------------------------------
# Signal-to-noise reporting
# ---------------------------------------------------------------------------

def band_snr(x: np.ndarray, fs: float, band: tuple[float, float | None]) -> float:
    """In-band over out-of-band mean Welch PSD, in dB.

    The PSD uses 1 s Hann segments with 50% overlap.  An open-ended band
    (hi = None) extends to the Nyquist frequency.
    """
    x = np.asarray(x, dtype=np.float64)
    lo, hi = band
    hi = fs / 2 if hi is None else hi
    nperseg = min(len(x), int(round(fs)))
    freqs, psd = welch(x, fs=fs, window="hann", nperseg=nperseg, noverlap=nperseg // 2)
    inside = (freqs >= lo) & (freqs <= hi)
    if not inside.any() or inside.all():
        raise ValueError(f"band [{lo}, {hi}] Hz leaves nothing to compare at fs={fs}")
    num = max(psd[inside].mean(), SNR_EPS)
    den = max(psd[~inside].mean(), SNR_EPS)
    return float(10.0 * np.log10(num / den))


def epoch_band_snr(
    x: np.ndarray, fs: float, band: tuple[float, float | None], epoch_s: float = 10.0
) -> np.ndarray:
    """Band SNR of each non-overlapping ``epoch_s`` chunk."""
    n = int(round(epoch_s * fs))
    count = len(x) // n
    if count == 0:
        raise ValueError("signal shorter than one epoch")
    return np.array([band_snr(x[i * n:(i + 1) * n], fs, band) for i in range(count)])


def compare_snr(
    raw: np.ndarray,
    processed: np.ndarray,
    fs: float,
    bands: dict[str, tuple[float, float | None]],
    epoch_s: float = 10.0,
) -> dict[str, dict[str, float]]:
    """Epoch-averaged band SNR before/after processing, plus the delta in dB."""
    out = {}
    for name, band in bands.items():
        raw_db = float(np.mean(epoch_band_snr(raw, fs, band, epoch_s)))
        proc_db = float(np.mean(epoch_band_snr(processed, fs, band, epoch_s)))
        out[name] = {"raw_db": raw_db, "processed_db": proc_db, "delta_db": proc_db - raw_db}
    return out


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Metrics:
    """Binary confusion counts with the derived rates (seizure = positive)."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def specificity(self) -> float:
        d = self.tn + self.fp
        return self.tn / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "specificity": self.specificity, "f1": self.f1,
        }


def confusion(y_true: np.ndarray, y_pred: np.ndarray) -> Metrics:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in length")
    return Metrics(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
    )


def macro_average(folds: list[Metrics]) -> dict[str, float]:
    """Unweighted mean of each derived rate across folds (the headline)."""
    if not folds:
        raise ValueError("no folds to average")
    keys = ("accuracy", "precision", "recall", "specificity", "f1")
    return {k: float(np.mean([getattr(m, k) for m in folds])) for k in keys}


def micro_average(folds: list[Metrics]) -> Metrics:
    """Pooled confusion counts across folds."""
    return Metrics(
        tp=sum(m.tp for m in folds),
        fp=sum(m.fp for m in folds),
        tn=sum(m.tn for m in folds),
        fn=sum(m.fn for m in folds),
    )


# ---------------------------------------------------------------------------
# Fold planning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldPlan:
    test_patient: str
    train_patients: tuple[str, ...]


def lopo_folds(patient_ids) -> list[FoldPlan]:
    """One fold per patient, ordered by patient id."""
    unique = sorted(set(patient_ids))
    if len(unique) < 2:
        raise ValueError("leave-one-patient-out needs at least two patients")
    return [
        FoldPlan(test_patient=p, train_patients=tuple(q for q in unique if q != p))
        for p in unique
    ]


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    stride_s: int = 1
    ratio: str = "1:1"
    model: str = "svm"
    separation: str = "nnmf"  # or "emd"
    motion: str = "vmd"  # "vmd", "bandpass" (1-30 Hz baseline) or "off"
    motion_threshold: float = MOTION_R_THRESHOLD
    normalization: str = "zscore"
    mains_hz: float = 60.0
    cnn_epochs: int = 350
    master_seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    folds: list[dict]
    macro: dict[str, float]
    micro: Metrics

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "folds": self.folds,
            "macro": self.macro,
            "micro": self.micro.to_dict(),
        }


def prepare_recording(
    rec: Recording,
    cfg: ExperimentConfig,
    templates: TemplateBank | None = None,
) -> Recording:
    """Stage A: condition, handle motion, separate into the six roles."""
    conditioned = preprocess_recording(rec, PreprocessConfig(mains_hz=cfg.mains_hz))
    if cfg.motion == "vmd":
        if conditioned.imu is None:
            raise ValueError(f"recording {rec.patient_id} has no IMU track for motion removal")
        for role in list(conditioned.channels):
            cleaned, _ = remove_motion_artifacts(
                conditioned.channels[role],
                conditioned.sample_rate,
                conditioned.imu,
                conditioned.imu_rate,
                threshold=cfg.motion_threshold,
            )
            conditioned.channels[role] = cleaned
    elif cfg.motion == "bandpass":
        for role in list(conditioned.channels):
            conditioned.channels[role] = bandpass_filter(
                conditioned.channels[role], conditioned.sample_rate, 1.0, 30.0
            )
    elif cfg.motion != "off":
        raise ValueError(f"unknown motion mode {cfg.motion!r}")

    if cfg.separation == "nnmf":
        if templates is None:
            raise ValueError("nnmf separation needs a template bank")
        return separate_recording_nnmf(conditioned, templates)
    if cfg.separation == "emd":
        return separate_recording_emd(conditioned)
    raise ValueError(f"unknown separation method {cfg.separation!r}")


def _fold_seed(master_seed: int, purpose: int, index: int) -> int:
    return int(np.random.SeedSequence([master_seed, purpose, index]).generate_state(1)[0])


def run_experiment(
    recordings: list[Recording],
    cfg: ExperimentConfig = ExperimentConfig(),
    templates: TemplateBank | None = None,
    separated: list[Recording] | None = None,
) -> ExperimentResult:
    """Full pipeline + leave-one-patient-out evaluation.

    ``separated`` may carry precomputed stage A outputs (used by sweeps);
    otherwise every recording runs through :func:`prepare_recording`.
    Evaluation folds never balance the held-out patient and normalization
    statistics come from the training folds alone.
    """
    if separated is None:
        separated = [prepare_recording(r, cfg, templates) for r in recordings]

    window = WindowSpec(stride_s=cfg.stride_s)
    by_patient: dict[str, list[LabeledEpoch]] = {}
    for rec in separated:
        by_patient.setdefault(rec.patient_id, []).extend(segment_recording(rec, window))

    folds = lopo_folds(by_patient.keys())
    fs = separated[0].sample_rate
    fold_rows: list[dict] = []
    fold_metrics: list[Metrics] = []
    use_windows = cfg.model == "cnn"

    for fold_idx, fold in enumerate(folds):
        train_epochs = [e for p in fold.train_patients for e in by_patient[p]]
        test_epochs = by_patient[fold.test_patient]
        balanced = balance_epochs(
            train_epochs, cfg.ratio, seed=_fold_seed(cfg.master_seed, 1, fold_idx)
        )
        y_train = np.array([e.label for e in balanced])
        y_test = np.array([e.label for e in test_epochs])

        if use_windows:
            x_train = np.stack([e.channels for e in balanced])
            x_test = np.stack([e.channels for e in test_epochs])
            model = make_model("cnn", seed=_fold_seed(cfg.master_seed, 2, fold_idx))
            model.train_config = type(model.train_config)(
                epochs=cfg.cnn_epochs, seed=_fold_seed(cfg.master_seed, 2, fold_idx)
            )
        else:
            norm = fit_normalizer(features_for_epochs(balanced, fs), mode=cfg.normalization)
            x_train = apply_normalizer(features_for_epochs(balanced, fs), norm)
            x_test = apply_normalizer(features_for_epochs(test_epochs, fs), norm)
            model = make_model(cfg.model, seed=_fold_seed(cfg.master_seed, 2, fold_idx))

        model.fit(x_train, y_train)
        metrics = confusion(y_test, model.predict(x_test))
        fold_metrics.append(metrics)
        fold_rows.append({
            "patient": fold.test_patient,
            "n_train": len(balanced),
            "n_test": len(test_epochs),
            "metrics": metrics.to_dict(),
        })

    return ExperimentResult(
        config=cfg,
        folds=fold_rows,
        macro=macro_average(fold_metrics),
        micro=micro_average(fold_metrics),
    )


SWEEP_AXES = {
    "stride": [1, 2, 3, 4, 5, 6, 7, 8, 9],
    "ratio": ["1:1", "1:2", "1:3"],
    "motion": ["vmd", "off"],
}


def sweep(
    recordings: list[Recording],
    cfg: ExperimentConfig,
    axis: str,
    templates: TemplateBank | None = None,
) -> list[dict]:
    """Rerun the experiment along one ablation axis.

    Stride and ratio sweeps reuse the separated signals; the motion sweep
    has to redo stage A since motion handling happens upstream.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {sorted(SWEEP_AXES)}, got {axis!r}")
    rows = []
    if axis == "motion":
        for value in SWEEP_AXES[axis]:
            sub = _replace_cfg(cfg, motion=value)
            result = run_experiment(recordings, sub, templates)
            rows.append(_sweep_row(axis, value, result))
        return rows

    separated = [prepare_recording(r, cfg, templates) for r in recordings]
    for value in SWEEP_AXES[axis]:
        sub = _replace_cfg(cfg, **{"stride_s" if axis == "stride" else "ratio": value})
        result = run_experiment(recordings, sub, templates, separated=separated)
        rows.append(_sweep_row(axis, value, result))
    return rows


def _replace_cfg(cfg: ExperimentConfig, **kwargs) -> ExperimentConfig:
    data = cfg.to_dict()
    data.update(kwargs)
    return ExperimentConfig(**data)


def _sweep_row(axis: str, value, result: ExperimentResult) -> dict:
    return {
        "axis": axis,
        "value": value,
        "macro_accuracy": result.macro["accuracy"],
        "macro_recall": result.macro["recall"],
        "macro_f1": result.macro["f1"],
        "micro_accuracy": result.micro.accuracy,
    }
