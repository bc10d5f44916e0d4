"""Shared data model: modalities, interactions, features, index maps.

All types are immutable after construction (numpy buffers are marked
read-only), so they can be shared freely across evaluation workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DataError, UnknownToken


class Modality(enum.Enum):
    """Content channel of an item feature block.

    ``visual_textual`` marks the output of a dual-encoder extractor that
    already lives in a single fused space.
    """

    VISUAL = "visual"
    TEXTUAL = "textual"
    AUDIO = "audio"
    VISUAL_TEXTUAL = "visual_textual"

    @property
    def wire_code(self) -> int:
        return _MODALITY_CODES[self]

    @classmethod
    def from_wire_code(cls, code: int) -> "Modality":
        for mod, c in _MODALITY_CODES.items():
            if c == code:
                return mod
        raise DataError(f"unknown modality code: {code}")


_MODALITY_CODES = {
    Modality.VISUAL: 0,
    Modality.TEXTUAL: 1,
    Modality.AUDIO: 2,
    Modality.VISUAL_TEXTUAL: 3,
}


@dataclass(frozen=True)
class InteractionSet:
    """Deduplicated implicit-feedback pairs in first-appearance order."""

    entries: tuple[tuple[str, str], ...]

    @classmethod
    def from_entries(cls, pairs: Iterable[tuple[str, str]]) -> "InteractionSet":
        seen = set()
        kept = []
        for user, item in pairs:
            if not user or not item:
                raise DataError(f"empty token in pair ({user!r}, {item!r})")
            if (user, item) in seen:
                continue
            seen.add((user, item))
            kept.append((user, item))
        return cls(entries=tuple(kept))

    @cached_property
    def user_items(self) -> Mapping[str, tuple[str, ...]]:
        adj: dict[str, list[str]] = {}
        for user, item in self.entries:
            adj.setdefault(user, []).append(item)
        return {u: tuple(items) for u, items in adj.items()}

    @cached_property
    def users(self) -> tuple[str, ...]:
        seen = dict.fromkeys(u for u, _ in self.entries)
        return tuple(seen)

    @cached_property
    def items(self) -> tuple[str, ...]:
        seen = dict.fromkeys(i for _, i in self.entries)
        return tuple(seen)

    @cached_property
    def pair_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.entries)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_items(self) -> int:
        return len(self.items)

    @property
    def num_interactions(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ItemMetadata:
    """Catalog-side evidence used by pre-filtering."""

    item_token: str
    image_url: Optional[str] = None
    description: Optional[str] = None
    extra: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense per-modality item feature block.

    Values are 32-bit floats (the on-disk convention); trainers promote to
    float64 internally.  Rows align with ``row_ids``.
    """

    modality: Modality
    row_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float32)
        if values.ndim != 2:
            raise DataError(f"feature block must be 2-D, got shape {values.shape}")
        if values.shape[0] != len(self.row_ids):
            raise DataError(
                f"{len(self.row_ids)} row ids but {values.shape[0]} feature rows"
            )
        if len(set(self.row_ids)) != len(self.row_ids):
            raise DataError("feature row ids are not unique")
        if not np.all(np.isfinite(values)):
            raise DataError("feature block contains NaN/Inf entries")
        values.setflags(write=False)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[1])

    @property
    def num_rows(self) -> int:
        return int(self.values.shape[0])

    @cached_property
    def row_index(self) -> Mapping[str, int]:
        return {rid: k for k, rid in enumerate(self.row_ids)}


@dataclass(frozen=True)
class IndexMap:
    """Bijection between raw tokens and contiguous dense indices."""

    user_fwd: Mapping[str, int]
    item_fwd: Mapping[str, int]
    user_rev: tuple[str, ...]
    item_rev: tuple[str, ...]

    @classmethod
    def build(cls, users: Sequence[str], items: Sequence[str]) -> "IndexMap":
        user_fwd = {u: k for k, u in enumerate(users)}
        item_fwd = {i: k for k, i in enumerate(items)}
        if len(user_fwd) != len(users) or len(item_fwd) != len(items):
            raise DataError("duplicate tokens when building index")
        return cls(
            user_fwd=user_fwd,
            item_fwd=item_fwd,
            user_rev=tuple(users),
            item_rev=tuple(items),
        )

    @property
    def num_users(self) -> int:
        return len(self.user_rev)

    @property
    def num_items(self) -> int:
        return len(self.item_rev)


@dataclass(frozen=True)
class SplitBundle:
    """Train/validation/test interaction sets plus the train-anchored index."""

    train: InteractionSet
    validation: InteractionSet
    test: InteractionSet
    index: IndexMap
    seed: int


def build_interaction_matrix(train: InteractionSet, index: IndexMap) -> sp.csr_matrix:
    """Binary user-item matrix over dense indices.

    Raises UnknownToken if the training set mentions a token the index does
    not carry.  CSR supports fast per-row iteration; callers needing column
    iteration convert once with ``.tocsc()``.
    """
    rows = []
    cols = []
    for user, item in train.entries:
        if user not in index.user_fwd:
            raise UnknownToken(user, "user")
        if item not in index.item_fwd:
            raise UnknownToken(item, "item")
        rows.append(index.user_fwd[user])
        cols.append(index.item_fwd[item])
    data = np.ones(len(rows), dtype=np.float64)
    return sp.csr_matrix(
        (data, (rows, cols)), shape=(index.num_users, index.num_items)
    )


@dataclass(frozen=True)
class ValidationReport:
    """Consistency check outcome for a bundle plus its feature blocks."""

    items_without_features: tuple[tuple[str, str], ...]  # (modality, token)
    features_without_index: tuple[tuple[str, str], ...]  # (modality, token)
    disjointness_violations: tuple[tuple[str, str, str], ...]  # (split_a, split_b, "u|i")

    @property
    def valid(self) -> bool:
        return not (
            self.items_without_features
            or self.features_without_index
            or self.disjointness_violations
        )


def validate_bundle(
    bundle: SplitBundle, features: Sequence[FeatureMatrix]
) -> ValidationReport:
    """Report-only check: feature coverage both ways plus split disjointness."""
    missing = []
    orphaned = []
    for block in features:
        ids = set(block.row_ids)
        for token in bundle.index.item_rev:
            if token not in ids:
                missing.append((block.modality.value, token))
        known = set(bundle.index.item_fwd)
        for token in block.row_ids:
            if token not in known:
                orphaned.append((block.modality.value, token))

    violations = []
    splits = [
        ("train", bundle.train),
        ("validation", bundle.validation),
        ("test", bundle.test),
    ]
    for a in range(len(splits)):
        for b in range(a + 1, len(splits)):
            name_a, set_a = splits[a]
            name_b, set_b = splits[b]
            for user, item in sorted(set_a.pair_set & set_b.pair_set):
                violations.append((name_a, name_b, f"{user}|{item}"))

    return ValidationReport(
        items_without_features=tuple(missing),
        features_without_index=tuple(orphaned),
        disjointness_violations=tuple(violations),
    )
