"""
Recording-level feature extraction: manifest ingestion, the per-recording
feature pipeline, parallel orchestration and significance reporting
"""

from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy import stats

from src.aggregation.statistics import FeatureVector, split_column
from src.audio.wav_io import frame, frame_samples, load_recording
from src.config.settings import settings
from src.features.bispec import BispectralAccumulator, cap_frames
from src.features.colliculus import gammatone_bank, icc_features
from src.features.emd import (
    emd,
    imf_cpp,
    imf_fd,
    imf_gne_from_set,
    imf_nsr,
    imf_snr,
)
from src.features.entropy import entropy_profile
from src.features.modspec import mel_filterbank, modulation_features, modulation_spectrum
from src.schemas.models import (
    ExtractionConfig,
    Gender,
    ImfParameter,
    KernelKind,
    Label,
    Manifest,
    ManifestEntry,
    Scenario,
    Signal,
    WindowKind,
)
from src.selection.stats_select import META_COLUMNS, FeatureMatrix, select_features
from src.spectral.core import ucpp
from src.utils.exceptions import ParameterError, VoxPathError
from src.utils.helpers import split_into_batches
from src.utils.logging_config import get_logger

logger = get_logger(__name__)

NAN = float("nan")

MODSPEC_SCALARS = ["MSER", "MFP", "RPHM"]
COLLICULUS_SCALARS = ["ICER", "RPHIC"]
BISPEC_SCALARS = ["BCII", "HFEBC", "LFEBC", "LCBCER", "HCBCER", "LSBER", "HSBER"]
INTERFERENCE_SCALARS = ["BCMII", "BCPII"]
SNR_PARAMETERS = list(ImfParameter)
NSR_PARAMETERS = [p for p in ImfParameter if p is not ImfParameter.ZCR]
EMD_SCALARS = (
    [f"IMF-SNR_{p.value}" for p in SNR_PARAMETERS]
    + [f"IMF-NSR_{p.value}" for p in NSR_PARAMETERS]
    + ["IMF-FD"]
)
DISTANCE_SEQUENCES = ["BCMD", "BCPD", "BMD", "BPD"]
ENTROPY_SEQUENCES = [f"{kind}({k.value})" for k in KernelKind for kind in ("AE", "SE")]

FAMILIES: Dict[str, str] = {
    **{name: "modspec" for name in MODSPEC_SCALARS + ["PSI"]},
    **{name: "colliculus" for name in COLLICULUS_SCALARS + ["XI"]},
    **{name: "bispec" for name in BISPEC_SCALARS + INTERFERENCE_SCALARS + DISTANCE_SEQUENCES},
    **{name: "entropy" for name in ENTROPY_SEQUENCES},
    **{name: "emd" for name in EMD_SCALARS + ["IMF-CPP", "IMF-GNE"]},
    "UCPP": "cepstral",
}

# per-feature failures are recorded as missing values, never abort a recording
FEATURE_ERRORS = (VoxPathError, ValueError, ArithmeticError, np.linalg.LinAlgError)


class RecordingResult(BaseModel):
    """Outcome of extracting one recording"""
    path: str = Field(..., description="Recording path")
    status: str = Field(..., description="completed or failed")
    features: Optional[Dict[str, float]] = Field(default=None, description="Named feature values")
    error: Optional[str] = Field(default=None, description="Error message if failed")


# Manifest handling
def load_manifest(path: Union[str, Path]) -> Manifest:
    """Read a path,label,speaker,gender CSV; relative paths resolve against its directory"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")

    table = pd.read_csv(path, dtype=str, keep_default_na=False)
    absent = [c for c in META_COLUMNS if c not in table.columns]
    if absent:
        raise ParameterError(f"Manifest {path} lacks column(s): {', '.join(absent)}")

    entries: List[ManifestEntry] = []
    missing_files: List[str] = []
    for row in table.itertuples(index=False):
        recording = Path(row.path)
        if not recording.is_absolute():
            recording = path.parent / recording
        if not recording.exists():
            missing_files.append(str(recording))
            continue
        label = row.label.strip().lower()
        gender = row.gender.strip().upper()
        try:
            entries.append(ManifestEntry(
                path=str(recording), label=Label(label), speaker=row.speaker.strip(), gender=Gender(gender),
            ))
        except ValueError as e:
            raise ParameterError(f"Invalid manifest row for {row.path}: {e}") from e

    if missing_files:
        raise ParameterError(f"{len(missing_files)} manifest path(s) do not exist, e.g. {missing_files[0]}")
    logger.info("Loaded manifest %s with %d recordings", path, len(entries))
    return Manifest(entries=entries)


def filter_scenario(data, scenario: Union[Scenario, str]):
    """Restrict a Manifest or FeatureMatrix to one gender scenario (F, M or MF)"""
    scenario = Scenario(scenario)
    if scenario is Scenario.BOTH:
        return data
    if isinstance(data, Manifest):
        return Manifest(entries=[e for e in data.entries if e.gender.value == scenario.value])
    if isinstance(data, FeatureMatrix):
        rows = np.flatnonzero(data.meta["gender"].to_numpy() == scenario.value)
        return data.subset(rows)
    raise ParameterError(f"Cannot filter {type(data).__name__} by scenario")


# Feature extraction
def _add_scalars(fv: FeatureVector, names: Sequence[str], compute: Callable[[], Sequence[float]]) -> None:
    try:
        values = list(compute())
    except FEATURE_ERRORS as e:
        logger.debug("Scalar features %s missing: %s", ", ".join(names), e)
        values = [NAN] * len(names)
    for name, value in zip(names, values):
        fv.add_scalar(name, value)


def _add_sequences(fv: FeatureVector, names: Sequence[str], compute: Callable[[], Sequence]) -> None:
    try:
        sequences = list(compute())
    except FEATURE_ERRORS as e:
        logger.debug("Sequence features %s missing: %s", ", ".join(names), e)
        sequences = [None] * len(names)
    for name, seq in zip(names, sequences):
        if seq is None:
            fv.add_sequence_placeholder(name)
        else:
            fv.add_sequence(name, seq)


def _add_matrix(fv: FeatureVector, name: str, rows: int, compute: Callable[[], Optional[np.ndarray]]) -> None:
    try:
        matrix = compute()
    except FEATURE_ERRORS as e:
        logger.debug("Matrix feature %s missing: %s", name, e)
        matrix = None
    if matrix is None or matrix.shape[0] != rows:
        fv.add_sequence_placeholder(name, rows)
    else:
        fv.add_matrix(name, matrix)


def _guarded(fn: Callable[[], float]) -> float:
    try:
        return float(fn())
    except FEATURE_ERRORS:
        return NAN


def _frame_decompositions(raw_frames: np.ndarray, config: ExtractionConfig) -> List:
    decompositions = []
    for f in raw_frames:
        try:
            decompositions.append(emd(f, config.emd_max_imfs, config.emd_max_sifts, config.emd_sd_threshold))
        except FEATURE_ERRORS:
            decompositions.append(None)
    return decompositions


def _entropy_sequences(raw_frames: np.ndarray, config: ExtractionConfig) -> List[np.ndarray]:
    columns = {name: [] for name in ENTROPY_SEQUENCES}
    for f in raw_frames:
        try:
            profile = entropy_profile(f, list(KernelKind), config.embed_dim, config.embed_delay,
                                      config.entropy_radius)
        except FEATURE_ERRORS:
            profile = {}
        for k in KernelKind:
            pair = profile.get(k)
            columns[f"AE({k.value})"].append(pair.approximate if pair else NAN)
            columns[f"SE({k.value})"].append(pair.sample if pair else NAN)
    return [np.asarray(columns[name]) for name in ENTROPY_SEQUENCES]


def extract_signal(sig: Signal, config: ExtractionConfig) -> FeatureVector:
    """Every scalar, sequence and matrix feature of one resampled recording"""
    fv = FeatureVector()
    rate = sig.rate
    P = config.mel_filters

    grid = frame(sig, config.frame_ms, config.hop_ms, config.window)
    raw = frame_samples(sig, grid.frame_len, grid.hop, WindowKind.RECTANGULAR)

    spectrum = {}

    def modulation():
        spectrum["ms"] = modulation_spectrum(grid, mel_filterbank(P, grid.frame_len, rate))
        return modulation_features(spectrum["ms"])

    _add_scalars(fv, MODSPEC_SCALARS, modulation)

    icc = {}

    def colliculus():
        icc["result"] = icc_features(grid, gammatone_bank(P, rate, grid.frame_len))
        return icc["result"].icer, icc["result"].rphic

    _add_scalars(fv, COLLICULUS_SCALARS, colliculus)

    accumulator = BispectralAccumulator(rate, config.f_max)
    try:
        accumulator.add_all(cap_frames(grid.frames, config.bispec_max_len))
    except FEATURE_ERRORS as e:
        logger.debug("Bispectral analysis failed: %s", e)
    _add_scalars(fv, BISPEC_SCALARS, accumulator.features)
    _add_scalars(fv, INTERFERENCE_SCALARS, accumulator.interference)

    def whole_signal_emd():
        imf_set = emd(sig.samples, config.emd_max_imfs, config.emd_max_sifts, config.emd_sd_threshold)
        return (
            [imf_snr(imf_set, p) for p in SNR_PARAMETERS]
            + [imf_nsr(imf_set, p) for p in NSR_PARAMETERS]
            + [imf_fd(imf_set)]
        )

    _add_scalars(fv, EMD_SCALARS, whole_signal_emd)

    _add_sequences(fv, ["UCPP"], lambda: [
        np.array([_guarded(lambda f=f: ucpp(f, rate, config.f_max)) for f in grid.frames])
    ])

    decompositions = _frame_decompositions(raw.frames, config)
    _add_sequences(fv, ["IMF-CPP", "IMF-GNE"], lambda: [
        np.array([NAN if d is None else _guarded(lambda d=d: imf_cpp(d, rate, config.f_max))
                  for d in decompositions]),
        np.array([NAN if d is None else imf_gne_from_set(d, rate, config.lpc_order)
                  for d in decompositions]),
    ])

    _add_sequences(fv, DISTANCE_SEQUENCES, accumulator.distance_sequences)
    _add_sequences(fv, ENTROPY_SEQUENCES, lambda: _entropy_sequences(raw.frames, config))

    _add_matrix(fv, "PSI", P, lambda: spectrum["ms"].psi_n if "ms" in spectrum else None)
    _add_matrix(fv, "XI", P, lambda: icc["result"].icc.xi_matrix if "result" in icc else None)
    return fv


def extract_recording(path: Union[str, Path], config: Optional[ExtractionConfig] = None) -> FeatureVector:
    config = config or ExtractionConfig.from_settings(settings)
    return extract_signal(load_recording(path, config.sample_rate), config)


def feature_columns(config: Optional[ExtractionConfig] = None) -> List[str]:
    """Column names in extraction order, independent of any recording"""
    config = config or ExtractionConfig.from_settings(settings)
    fv = FeatureVector()
    for name in MODSPEC_SCALARS + COLLICULUS_SCALARS + BISPEC_SCALARS + INTERFERENCE_SCALARS + EMD_SCALARS:
        fv.add_scalar(name, NAN)
    for name in ["UCPP", "IMF-CPP", "IMF-GNE"] + DISTANCE_SEQUENCES + ENTROPY_SEQUENCES:
        fv.add_sequence_placeholder(name)
    fv.add_sequence_placeholder("PSI", config.mel_filters)
    fv.add_sequence_placeholder("XI", config.mel_filters)
    return fv.names()


def feature_family(column: str) -> str:
    local, _ = split_column(column)
    base = local.split("[", 1)[0]
    return FAMILIES.get(base, "other")


def _extract_entry(path: str, config_json: str) -> RecordingResult:
    """Worker entry point; arguments are plain strings so it pickles cheaply"""
    config = ExtractionConfig.model_validate_json(config_json)
    try:
        fv = extract_recording(path, config)
        return RecordingResult(path=path, status="completed", features=fv.entries)
    except Exception as e:
        return RecordingResult(path=path, status="failed", error=f"{type(e).__name__}: {e}")


def extract_all(
    manifest: Manifest,
    config: Optional[ExtractionConfig] = None,
    workers: Optional[int] = None,
    batch_size: int = 32,
) -> FeatureMatrix:
    """Feature matrix of every readable recording; failures are skipped with a warning"""
    config = config or ExtractionConfig.from_settings(settings)
    workers = max(1, min(workers or settings.THREADS, len(manifest) or 1))
    columns = feature_columns(config)
    config_json = config.model_dump_json()

    results: List[RecordingResult] = []
    batches = split_into_batches(manifest.entries, batch_size)
    executor = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for i, batch in enumerate(batches, start=1):
            logger.info("Processing batch %d/%d (%d recordings)", i, len(batches), len(batch))
            paths = [entry.path for entry in batch]
            if executor is None:
                results.extend(_extract_entry(p, config_json) for p in paths)
            else:
                results.extend(executor.map(_extract_entry, paths, [config_json] * len(paths)))
    finally:
        if executor is not None:
            executor.shutdown()

    rows, meta, skipped = [], [], []
    for entry, result in zip(manifest.entries, results):
        if result.status != "completed":
            logger.warning("Skipping %s: %s", entry.path, result.error)
            skipped.append(entry.path)
            continue
        rows.append([result.features.get(c, NAN) for c in columns])
        meta.append({"path": entry.path, "label": entry.label.value,
                     "speaker": entry.speaker, "gender": entry.gender.value})

    logger.info("Extracted %d feature columns for %d recordings (%d skipped)",
                len(columns), len(rows), len(skipped))
    return FeatureMatrix(
        features=pd.DataFrame(rows, columns=columns, dtype=float),
        meta=pd.DataFrame(meta, columns=META_COLUMNS),
        extraction=config.model_dump(mode="json"),
        skipped=skipped,
    )


# Reports and curves
def significance_report(fm: FeatureMatrix, alpha: float = 0.05, missing_threshold: float = 0.10,
                        top: int = 10) -> pd.DataFrame:
    """Most significant features as (local_feature, statistic, p_value, family)"""
    result = select_features(fm, alpha, missing_threshold)
    records = []
    for column, p in result.top(top).items():
        local, statistic = split_column(column)
        records.append({
            "feature_name": column,
            "local_feature": local,
            "statistic": statistic or "identity",
            "p_value": float(p),
            "family": feature_family(column),
        })
    return pd.DataFrame(records, columns=["feature_name", "local_feature", "statistic", "p_value", "family"])


def density_curves(fm: FeatureMatrix, features: Sequence[str], points: int = 200) -> pd.DataFrame:
    """Per-class Gaussian KDE of each feature on a shared grid"""
    y = fm.labels
    frames = []
    for name in features:
        values = fm.features[name].to_numpy(dtype=float)
        finite = np.isfinite(values)
        if not np.any(finite):
            continue
        grid = np.linspace(values[finite].min(), values[finite].max(), points)
        curves = {}
        for label, code in ((Label.HEALTHY, 0), (Label.PATHOLOGICAL, 1)):
            sample = values[finite & (y == code)]
            try:
                curves[label] = stats.gaussian_kde(sample)(grid) if np.unique(sample).size > 1 else np.full(points, NAN)
            except (np.linalg.LinAlgError, ValueError):
                curves[label] = np.full(points, NAN)
        frames.append(pd.DataFrame({
            "feature": name,
            "x": grid,
            "density_healthy": curves[Label.HEALTHY],
            "density_pathological": curves[Label.PATHOLOGICAL],
        }))
    if not frames:
        return pd.DataFrame(columns=["feature", "x", "density_healthy", "density_pathological"])
    return pd.concat(frames, ignore_index=True)


def psi_curve(path: Union[str, Path], config: Optional[ExtractionConfig] = None) -> pd.DataFrame:
    """ψ[l] of one recording as (mod_freq_hz, psi)"""
    config = config or ExtractionConfig.from_settings(settings)
    sig = load_recording(path, config.sample_rate)
    grid = frame(sig, config.frame_ms, config.hop_ms, config.window)
    ms = modulation_spectrum(grid, mel_filterbank(config.mel_filters, grid.frame_len, sig.rate))
    return pd.DataFrame({"mod_freq_hz": ms.frequencies, "psi": ms.psi})


def xi_curve(path: Union[str, Path], config: Optional[ExtractionConfig] = None) -> pd.DataFrame:
    """ξ[p] of one recording as (band_index, xi), bands numbered from 1"""
    config = config or ExtractionConfig.from_settings(settings)
    sig = load_recording(path, config.sample_rate)
    grid = frame(sig, config.frame_ms, config.hop_ms, config.window)
    result = icc_features(grid, gammatone_bank(config.mel_filters, sig.rate, grid.frame_len))
    return pd.DataFrame({"band_index": np.arange(1, result.icc.xi.size + 1), "xi": result.icc.xi})
