"""Speech augmentation, VTLN feature normalization, and ASR bias evaluation."""

from .corpus import (
    FeatureArchive,
    UtteranceRecord,
    load_manifest,
    read_feature_archive,
    read_wav,
    write_feature_archive,
    write_wav,
)
from .dsp import (
    FeatureMatrix,
    FrameConfig,
    MelConfig,
    Waveform,
    log_mel,
    mel_filterbank,
    mfcc,
    power_spectrum,
    speed_perturb,
    synth_formants,
    warp_freq,
)
from .gmm import DiagGmm, train_gmm
from .scoring import (
    AlignmentResult,
    BiasReport,
    GroupScore,
    align,
    bias_report,
    bias_report_from_rates,
    corpus_error_rate,
    individual_bias,
    overall_bias,
    tokenize,
)
from .specaug import SpecAugPolicy, freq_mask, spec_augment, time_mask, time_warp
from .vtln import (
    AffineTransform,
    VtlnConfig,
    VtlnModel,
    WarpAssignment,
    WarpGrid,
    apply_warp,
    estimate_transform,
    estimate_warp,
    train_vtln,
    warp_statistics,
)

__version__ = "0.1.0"
