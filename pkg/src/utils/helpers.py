"""
Utility functions for VoxPath
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from src.schemas.models import MetricSummary

PathLike = Union[str, Path]


def split_into_batches(items: List[Any], batch_size: int) -> List[List[Any]]:
    """Split a list into batches of specified size"""
    batches = []
    for i in range(0, len(items), batch_size):
        batches.append(items[i:i + batch_size])
    return batches


def summarize(values: Sequence[float]) -> MetricSummary:
    """mean ± sample std; a single value has std 0"""
    array = np.asarray(values, dtype=float)
    if array.size == 0:
        return MetricSummary(mean=float("nan"), std=0.0)
    std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
    return MetricSummary(mean=float(np.mean(array)), std=std)


def format_mean_std(summary: MetricSummary, digits: int = 1) -> str:
    """Format a summary as 'mean±std'"""
    return f"{summary.mean:.{digits}f}±{summary.std:.{digits}f}"


def ensure_parent_dir(path: PathLike) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def sidecar_path(csv_path: PathLike) -> Path:
    """JSON metadata file stored next to a feature CSV"""
    return Path(csv_path).with_suffix(".json")


def _json_safe(value: Any) -> Any:
    # NaN and inf are not valid JSON; write them as null
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    path = ensure_parent_dir(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_json_safe(payload), f, indent=2)
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
