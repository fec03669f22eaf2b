"""
Delay embedding and kernel-based approximate/sample entropy
"""

from typing import Dict, Iterable, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator
from scipy.spatial.distance import cdist

from src.schemas.models import ArraySchema, KernelKind
from src.utils.exceptions import DegenerateInputError, InsufficientDataError, ParameterError

BLOCK_ROWS = 1024
CHEBYSHEV_KERNELS = frozenset({KernelKind.HEAVISIDE})


class Embedding(ArraySchema):
    """Delay-coordinate vectors [s[n], s[n+τ], ..., s[n+(m-1)τ]]"""
    vectors: np.ndarray = Field(..., description="(N - (m-1)τ) x m matrix")
    m: int = Field(..., ge=1, description="Embedding dimension")
    tau: int = Field(..., ge=1, description="Delay in samples")

    @model_validator(mode="after")
    def validate_shape(self) -> "Embedding":
        if self.vectors.ndim != 2 or self.vectors.shape[1] != self.m:
            raise ValueError("embedding vectors must have m columns")
        return self

    def __len__(self) -> int:
        return int(self.vectors.shape[0])


class EntropyPair(NamedTuple):
    approximate: float
    sample: float


def embed(sig, m: int, tau: int) -> Embedding:
    s = np.asarray(sig, dtype=float)
    if m < 1 or tau < 1:
        raise ParameterError("embedding dimension and delay must be positive")
    count = s.size - (m - 1) * tau
    if count < 1:
        raise InsufficientDataError(
            f"signal of length {s.size} too short for m={m}, tau={tau}"
        )
    vectors = np.stack([s[k * tau:k * tau + count] for k in range(m)], axis=1)
    vectors.setflags(write=False)
    return Embedding(vectors=vectors, m=m, tau=tau)


def kernel(kind: KernelKind, d, r: float):
    """κ(d, r) for a distance d (scalar or array) and radius r"""
    if r <= 0:
        raise ParameterError("kernel radius must be positive")
    kind = KernelKind(kind)
    d = np.asarray(d, dtype=float)
    u = d / r
    inside = u < 1.0

    if kind is KernelKind.HEAVISIDE:
        value = (d <= r).astype(float)
    elif kind is KernelKind.GAUSSIAN:
        value = np.exp(-d ** 2 / (10.0 * r ** 2))
    elif kind is KernelKind.EXPONENTIAL:
        value = np.exp(-d / (2.0 * r ** 2))
    elif kind is KernelKind.LAPLACIAN:
        value = np.exp(-u)
    elif kind is KernelKind.CIRCULAR:
        clipped = np.clip(u, 0.0, 1.0)
        value = np.where(
            inside,
            (2.0 / np.pi) * (np.arccos(clipped) - clipped * np.sqrt(1.0 - clipped ** 2)),
            0.0,
        )
    elif kind is KernelKind.SPHERICAL:
        value = np.where(inside, 1.0 - 1.5 * u + 0.5 * u ** 3, 0.0)
    elif kind is KernelKind.CAUCHY:
        value = np.where(inside, 1.0 / (1.0 + d ** 2 / r), 0.0)
    else:
        value = np.where(inside, 1.0 - u, 0.0)

    return float(value) if value.ndim == 0 else value


def radius(sig, factor: float = 0.2) -> float:
    """factor · sample standard deviation of the raw signal"""
    s = np.asarray(sig, dtype=float)
    if s.size < 2:
        raise InsufficientDataError("radius needs at least two samples")
    r = factor * float(np.std(s, ddof=1))
    if r <= 0:
        raise DegenerateInputError("constant signal gives a zero radius")
    return r


def _kernel_row_sums(
    vectors: np.ndarray, r: float, kinds: Iterable[KernelKind]
) -> Dict[KernelKind, np.ndarray]:
    """Σ_j κ(i, j, r) for every row i, self-matches included.

    Distances are evaluated in row blocks so memory stays linear in N.
    """
    kinds = [KernelKind(k) for k in kinds]
    K = vectors.shape[0]
    sums = {kind: np.zeros(K) for kind in kinds}
    need_chebyshev = any(k in CHEBYSHEV_KERNELS for k in kinds)
    need_euclidean = any(k not in CHEBYSHEV_KERNELS for k in kinds)

    for start in range(0, K, BLOCK_ROWS):
        block = vectors[start:start + BLOCK_ROWS]
        chebyshev = cdist(block, vectors, metric="chebyshev") if need_chebyshev else None
        euclidean = cdist(block, vectors, metric="euclidean") if need_euclidean else None
        for kind in kinds:
            d = chebyshev if kind in CHEBYSHEV_KERNELS else euclidean
            sums[kind][start:start + block.shape[0]] = kernel(kind, d, r).sum(axis=1)
    return sums


def _check_rows(row_sums: np.ndarray) -> int:
    K = row_sums.size
    if K < 2:
        raise InsufficientDataError("entropy needs at least two embedding vectors")
    return K


def _phi(row_sums: np.ndarray) -> float:
    """Mean log match fraction; self-matches keep every fraction positive"""
    K = _check_rows(row_sums)
    return float(np.sum(np.log(row_sums / (K - 1))) / (K - 1))


def _pooled_match_rate(row_sums: np.ndarray, self_match: float) -> float:
    """Share of distinct template pairs that match"""
    K = _check_rows(row_sums)
    return float(np.sum(row_sums - self_match) / (K * (K - 1)))


def _sample_entropy(sums_low: np.ndarray, sums_high: np.ndarray, self_match: float) -> float:
    # pooled over templates; missing only when no pair matches at either dimension
    low = _pooled_match_rate(sums_low, self_match)
    high = _pooled_match_rate(sums_high, self_match)
    if low <= 0 or high <= 0:
        return float("nan")
    return float(np.log(low) - np.log(high))


def entropy_profile(
    sig,
    kinds: Optional[Iterable[KernelKind]] = None,
    m: int = 2,
    tau: int = 1,
    radius_factor: float = 0.2,
) -> Dict[KernelKind, EntropyPair]:
    """AE and SE for several kernels sharing one pair of distance passes"""
    kinds = list(kinds) if kinds is not None else list(KernelKind)
    r = radius(sig, radius_factor)
    low = embed(sig, m, tau).vectors
    high = embed(sig, m + 1, tau).vectors
    if high.shape[0] < 2:
        raise InsufficientDataError("signal too short for entropy at dimension m + 1")

    sums_low = _kernel_row_sums(low, r, kinds)
    sums_high = _kernel_row_sums(high, r, kinds)

    profile: Dict[KernelKind, EntropyPair] = {}
    for kind in kinds:
        self_match = kernel(kind, 0.0, r)
        ae = _phi(sums_low[kind]) - _phi(sums_high[kind])
        se = _sample_entropy(sums_low[kind], sums_high[kind], self_match)
        profile[KernelKind(kind)] = EntropyPair(approximate=ae, sample=se)
    return profile


def approx_entropy(sig, kind: KernelKind = KernelKind.HEAVISIDE, m: int = 2, tau: int = 1,
                   radius_factor: float = 0.2) -> float:
    return entropy_profile(sig, [kind], m, tau, radius_factor)[KernelKind(kind)].approximate


def sample_entropy(sig, kind: KernelKind = KernelKind.HEAVISIDE, m: int = 2, tau: int = 1,
                   radius_factor: float = 0.2) -> float:
    return entropy_profile(sig, [kind], m, tau, radius_factor)[KernelKind(kind)].sample


def match_fractions(sig, kind: KernelKind, m: int = 2, tau: int = 1,
                    radius_factor: float = 0.2) -> Tuple[np.ndarray, np.ndarray]:
    """Per-vector C[i] with and without self-matches at dimension m"""
    r = radius(sig, radius_factor)
    vectors = embed(sig, m, tau).vectors
    sums = _kernel_row_sums(vectors, r, [kind])[KernelKind(kind)]
    K = vectors.shape[0]
    return sums / (K - 1), (sums - kernel(kind, 0.0, r)) / (K - 1)
