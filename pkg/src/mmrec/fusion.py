"""Representation and fusion of per-modality features.

Joint representation projects every modality into one shared vector; here
that projection is concatenation, the common simplest choice.  Coordinate
representation keeps one latent space per modality (optionally through a
linear map) and defers combining to early fusion (on representations) or
late fusion (on per-modality prediction scores).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .data import FeatureMatrix, Modality
from .errors import DataError, DimMismatch, EmptyModalities, UnknownModality


class FusionMethod(enum.Enum):
    CONCAT = "concat"
    SUM = "sum"
    MUL = "mul"
    AVG = "avg"


@dataclass(frozen=True)
class RepresentationMode:
    """How per-modality features reach the scorer.

    ``projections`` holds one linear map per active modality for the
    coordinate modes (``None`` meaning identity).  Joint mode needs none.
    """

    mode: str  # joint | coordinate_early | coordinate_late
    projections: Mapping[Modality, Optional[np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("joint", "coordinate_early", "coordinate_late"):
            raise DataError(f"unknown representation mode: {self.mode!r}")


def _as_vectors(features: Sequence[np.ndarray]) -> list[np.ndarray]:
    if len(features) == 0:
        raise EmptyModalities("at least one modality is required")
    return [np.asarray(f, dtype=np.float64) for f in features]


def _check_same_shape(vectors: list[np.ndarray], method: FusionMethod) -> None:
    dims = {v.shape for v in vectors}
    if len(dims) > 1:
        raise DimMismatch(f"{method.value} needs equal shapes, got {sorted(dims)}")


def early_fuse(features: Sequence[np.ndarray], method: FusionMethod) -> np.ndarray:
    """Combine per-modality representations into one vector.

    concat preserves the declared modality order; sum/mul/avg are
    element-wise and need a single shared dimension.
    """
    vectors = _as_vectors(features)
    if method is FusionMethod.CONCAT:
        return np.concatenate(vectors, axis=-1)
    _check_same_shape(vectors, method)
    stacked = np.stack(vectors)
    if method is FusionMethod.SUM:
        return stacked.sum(axis=0)
    if method is FusionMethod.MUL:
        out = vectors[0].copy()
        for v in vectors[1:]:
            out *= v
        return out
    if method is FusionMethod.AVG:
        return stacked.mean(axis=0)
    raise DataError(f"unknown fusion method: {method}")


def joint_represent(features: Sequence[np.ndarray]) -> np.ndarray:
    """Project all modality features into the shared space (concatenation)."""
    return np.concatenate(_as_vectors(features), axis=-1)


def coordinate_project(
    feature: np.ndarray, modality: Modality, mode: RepresentationMode
) -> np.ndarray:
    """Apply the modality's registered linear map (identity allowed).

    Constraint sets between modality spaces are permitted to be empty and
    that is what this implementation uses: the projection alone.
    """
    if modality not in mode.projections:
        raise UnknownModality(modality)
    projection = mode.projections[modality]
    vec = np.asarray(feature, dtype=np.float64)
    if projection is None:
        return vec
    proj = np.asarray(projection, dtype=np.float64)
    if proj.shape[1] != vec.shape[-1]:
        raise DimMismatch(
            f"projection expects dim {proj.shape[1]}, feature has {vec.shape[-1]}"
        )
    return vec @ proj.T


def late_fuse(scores: Sequence, method: FusionMethod):
    """Aggregate per-modality prediction scores into one prediction.

    Accepts scalars or aligned score vectors; only sum and avg make sense
    for score aggregation.
    """
    if len(scores) == 0:
        raise EmptyModalities("at least one modality score is required")
    if method not in (FusionMethod.SUM, FusionMethod.AVG):
        raise DataError(f"late fusion supports sum/avg, got {method.value}")
    arrays = [np.asarray(s, dtype=np.float64) for s in scores]
    _check_same_shape(arrays, method)
    total = np.sum(arrays, axis=0)
    if method is FusionMethod.AVG:
        total = total / len(arrays)
    if total.ndim == 0:
        return float(total)
    return total


def fuse_feature_matrices(
    blocks: Sequence[FeatureMatrix], method: FusionMethod
) -> FeatureMatrix:
    """Row-aligned fusion of whole feature blocks.

    All blocks must carry identical row ids in identical order (the
    remapping step guarantees that in the pipeline).  The fused block is
    tagged visual_textual, the catch-all for already-fused spaces.
    """
    if len(blocks) == 0:
        raise EmptyModalities("no feature blocks to fuse")
    ids = blocks[0].row_ids
    for block in blocks[1:]:
        if block.row_ids != ids:
            raise DataError("feature blocks are not row-aligned")
    fused = early_fuse([b.values.astype(np.float64) for b in blocks], method)
    modality = blocks[0].modality if len(blocks) == 1 else Modality.VISUAL_TEXTUAL
    return FeatureMatrix(
        modality=modality, row_ids=ids, values=fused.astype(np.float32)
    )
