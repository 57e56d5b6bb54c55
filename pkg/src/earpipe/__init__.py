"""Behind-the-ear biosignal pipeline: conditioning, artifact removal,
source separation, feature extraction and patient-held-out evaluation."""

__version__ = "0.1.0"

from .signals import (
    BIOPOTENTIAL_RATE_HZ,
    ChannelRole,
    EEG_BANDS,
    EMG_BAND,
    EOG_BAND,
    IMU_RATE_HZ,
    MIXED_ROLES,
    Recording,
    SEPARATED_ROLES,
    SeizureAnnotation,
    SynthComponent,
    SynthesisSpec,
    synthesize_recording,
)
from .io import load_recording, save_recording
from .preprocess import (
    ImpedanceReading,
    PreprocessConfig,
    bandpass_filter,
    detrend_linear,
    electrode_impedance,
    notch_filter,
    outlier_clip,
    preprocess_recording,
)
from .stft import Spectrogram, StftConfig, istft, stft
from .vmd import (
    MotionCorrelation,
    VmdResult,
    motion_correlation,
    reconstruct_excluding_motion,
    remove_motion_artifacts,
    vmd_decompose,
)
from .emd import (
    EmdResult,
    ModalityAssignment,
    assign_modalities,
    emd_decompose,
    separate_recording_emd,
)
from .nnmf import (
    NnmfConfig,
    TemplateBank,
    beta_divergence,
    load_templates,
    nnmf_factorize,
    save_templates,
    separate_channel,
    separate_recording_nnmf,
    train_templates,
)
from .features import (
    LabeledEpoch,
    WindowSpec,
    apply_normalizer,
    balance_epochs,
    epoch_features,
    feature_names,
    fit_normalizer,
    mfcc_features,
    segment_recording,
    time_features,
)
from .models import make_model
from .evaluation import (
    ExperimentConfig,
    ExperimentResult,
    Metrics,
    band_snr,
    compare_snr,
    confusion,
    lopo_folds,
    run_experiment,
    sweep,
)
from .corpus import make_synthetic_corpus, template_sources, train_corpus_templates
