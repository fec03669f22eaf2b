"""
Pydantic schemas for VoxPath with proper type safety
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Enums for better type safety
class WindowKind(str, Enum):
    HAMMING = "hamming"
    RECTANGULAR = "rectangular"


class Label(str, Enum):
    HEALTHY = "healthy"
    PATHOLOGICAL = "pathological"


class Gender(str, Enum):
    MALE = "M"
    FEMALE = "F"


class Scenario(str, Enum):
    FEMALE = "F"
    MALE = "M"
    BOTH = "MF"


class ClassifierKind(str, Enum):
    KNN = "knn"
    FOREST = "forest"
    SVM = "svm"


class KernelKind(str, Enum):
    HEAVISIDE = "heaviside"
    GAUSSIAN = "gaussian"
    EXPONENTIAL = "exponential"
    LAPLACIAN = "laplacian"
    CIRCULAR = "circular"
    SPHERICAL = "spherical"
    CAUCHY = "cauchy"
    TRIANGULAR = "triangular"


class ImfParameter(str, Enum):
    TKEO = "TKEO"
    SEO = "SEO"
    SHE = "SHE"
    RE = "RE"
    ZCR = "ZCR"


# Base schemas
class BaseSchema(BaseModel):
    """Base schema with common configuration"""

    model_config = ConfigDict(from_attributes=True, arbitrary_types_allowed=True)


class ArraySchema(BaseSchema):
    """Immutable schema holding numpy arrays"""

    model_config = ConfigDict(from_attributes=True, arbitrary_types_allowed=True, frozen=True)


def _readonly(values: Any, dtype: Any = float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


# Signal schemas
class Signal(ArraySchema):
    """Mono discrete-time waveform"""
    samples: np.ndarray = Field(..., description="Amplitude samples")
    rate: float = Field(..., gt=0, description="Sampling rate in Hz")

    @field_validator("samples", mode="before")
    @classmethod
    def validate_samples(cls, v: Any) -> np.ndarray:
        samples = _readonly(v)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        return samples

    @property
    def duration(self) -> float:
        return self.samples.size / self.rate

    def __len__(self) -> int:
        return int(self.samples.size)


class FrameGrid(ArraySchema):
    """Windowed segmentation of a signal"""
    frame_len: int = Field(..., gt=0, description="Frame length in samples")
    hop: int = Field(..., gt=0, description="Frame step in samples")
    window: WindowKind = Field(default=WindowKind.HAMMING, description="Window function")
    rate: float = Field(..., gt=0, description="Sampling rate of the framed signal")
    frames: np.ndarray = Field(..., description="Segment matrix, one windowed frame per row")

    @field_validator("frames", mode="before")
    @classmethod
    def validate_frames(cls, v: Any) -> np.ndarray:
        frames = _readonly(v)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ValueError("frames must be a matrix with at least one row")
        return frames

    @model_validator(mode="after")
    def validate_geometry(self) -> "FrameGrid":
        if self.hop > self.frame_len:
            raise ValueError("hop must not exceed frame_len")
        if self.frames.shape[1] != self.frame_len:
            raise ValueError("frame matrix width must equal frame_len")
        return self

    @property
    def count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def frame_rate(self) -> float:
        return self.rate / self.hop


# Dataset schemas
class ManifestEntry(BaseSchema):
    """One recording of the dataset manifest"""
    path: str = Field(..., description="Path to the WAV recording")
    label: Label = Field(..., description="Diagnosis label")
    speaker: str = Field(..., description="Speaker identifier")
    gender: Gender = Field(..., description="Speaker gender")


class Manifest(BaseSchema):
    """Dataset manifest"""
    entries: List[ManifestEntry] = Field(default_factory=list, description="Recordings")

    def __len__(self) -> int:
        return len(self.entries)


# Configuration schemas
class ExtractionConfig(BaseSchema):
    """Settings echoed next to every feature matrix"""
    sample_rate: int = Field(default=16000, gt=0, description="Pipeline sampling rate in Hz")
    frame_ms: float = Field(default=25.0, gt=0, description="Frame length in ms")
    hop_ms: float = Field(default=10.0, gt=0, description="Frame step in ms")
    window: WindowKind = Field(default=WindowKind.HAMMING, description="Window function")
    mel_filters: int = Field(default=20, ge=2, description="Mel/gammatone band count")
    f_max: float = Field(default=350.0, gt=0, description="Maximum expected fundamental frequency")
    bispec_max_len: int = Field(default=512, ge=4, description="Frame length cap for bispectral analysis")
    embed_dim: int = Field(default=2, ge=1, description="Embedding dimension for AE/SE")
    embed_delay: int = Field(default=1, ge=1, description="Embedding delay for AE/SE")
    entropy_radius: float = Field(default=0.2, gt=0, description="Radius as a multiple of the frame std")
    emd_max_imfs: int = Field(default=12, ge=1, description="Maximum number of IMFs")
    emd_max_sifts: int = Field(default=10, ge=1, description="Maximum sifting iterations per IMF")
    emd_sd_threshold: float = Field(default=0.2, gt=0, description="Sifting SD stop threshold")
    lpc_order: int = Field(default=13, ge=1, description="IMF-GNE inverse filter order")

    @classmethod
    def from_settings(cls, settings: Any) -> "ExtractionConfig":
        return cls(
            sample_rate=settings.SAMPLE_RATE,
            frame_ms=settings.FRAME_MS,
            hop_ms=settings.HOP_MS,
            window=settings.WINDOW,
            mel_filters=settings.MEL_FILTERS,
            f_max=settings.F_MAX,
            bispec_max_len=settings.BISPEC_MAX_LEN,
            embed_dim=settings.EMBED_DIM,
            embed_delay=settings.EMBED_DELAY,
            entropy_radius=settings.ENTROPY_RADIUS,
            emd_max_imfs=settings.EMD_MAX_IMFS,
            emd_max_sifts=settings.EMD_MAX_SIFTS,
            emd_sd_threshold=settings.EMD_SD_THRESHOLD,
            lpc_order=settings.LPC_ORDER,
        )


class ExperimentConfig(BaseSchema):
    """Settings of the repeated-split classification protocol"""
    classifier: ClassifierKind = Field(default=ClassifierKind.FOREST, description="Classifier")
    repetitions: int = Field(default=100, gt=0, description="Number of random splits")
    test_size: float = Field(default=0.25, gt=0, lt=1, description="Test fraction per split")
    seed: int = Field(default=0, description="Master seed; repetition i uses seed + i")
    alpha: float = Field(default=0.05, gt=0, lt=1, description="Mann-Whitney significance level")
    missing_threshold: float = Field(default=0.10, ge=0, le=1, description="Max missing fraction per column")
    knn_k: int = Field(default=5, gt=0, description="Neighbours for k-NN")
    forest_trees: int = Field(default=100, gt=0, description="Trees in the random forest")
    forest_max_depth: int = Field(default=16, gt=0, description="Maximum tree depth")
    scenario: Scenario = Field(default=Scenario.BOTH, description="Gender scenario")
    max_redraws: int = Field(default=10, ge=0, description="Split redraws before giving up")
    selection_on: str = Field(default="train", description="Rows used for feature selection")

    @classmethod
    def from_settings(cls, settings: Any, **overrides: Any) -> "ExperimentConfig":
        values: Dict[str, Any] = dict(
            classifier=settings.CLASSIFIER,
            repetitions=settings.REPETITIONS,
            test_size=settings.TEST_SIZE,
            seed=settings.SEED,
            alpha=settings.ALPHA,
            missing_threshold=settings.MISSING_THRESHOLD,
            knn_k=settings.KNN_K,
            forest_trees=settings.FOREST_TREES,
            forest_max_depth=settings.FOREST_MAX_DEPTH,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


# Report schemas
class RepetitionResult(BaseSchema):
    """Outcome of one random split"""
    index: int = Field(..., ge=0, description="Repetition index")
    seed: int = Field(..., description="Seed used for this repetition")
    acc: float = Field(..., ge=0, le=100, description="Accuracy in %")
    sen: float = Field(..., ge=0, le=100, description="Sensitivity in %")
    spe: float = Field(..., ge=0, le=100, description="Specificity in %")
    n_selected: int = Field(..., ge=0, description="Number of selected features")
    selection_fallback: bool = Field(default=False, description="No feature passed the test")
    oob_accuracy: Optional[float] = Field(default=None, description="Forest out-of-bag accuracy in %")
    redraws: int = Field(default=0, ge=0, description="Split redraws needed")


class MetricSummary(BaseSchema):
    """mean ± std of a metric over repetitions"""
    mean: float = Field(..., description="Mean over repetitions")
    std: float = Field(..., ge=0, description="Sample standard deviation over repetitions")


class ExperimentReport(BaseSchema):
    """Per-repetition and aggregate classification results"""
    config: ExperimentConfig = Field(..., description="Protocol configuration")
    extraction: Optional[Dict[str, Any]] = Field(default=None, description="Extraction config echo")
    n_recordings: int = Field(..., ge=0, description="Rows used")
    n_features: int = Field(..., ge=0, description="Feature columns available")
    repetitions: List[RepetitionResult] = Field(default_factory=list, description="Per-repetition results")
    acc: MetricSummary = Field(..., description="Accuracy summary")
    sen: MetricSummary = Field(..., description="Sensitivity summary")
    spe: MetricSummary = Field(..., description="Specificity summary")
    n_selected: MetricSummary = Field(..., description="Selected feature count summary")
    rule_of_30_threshold: float = Field(..., description="Minimum reliable error rate in %")
    reliable: bool = Field(..., description="Observed error rate is at or above the Rule-of-30 threshold")
    skipped_recordings: List[str] = Field(default_factory=list, description="Recordings skipped at extraction")
