"""Train/validation/test splitting and train-anchored dense indexing.

The split is a seeded random per-user holdout: each user's interactions
are shuffled with a stream derived from (seed, user token) only, so the
assignment of any one user is independent of every other user and of
iteration order.  Reports downstream record the split strategy so results
stay self-describing.

Rounding of per-user quotas is round-half-up.  After the per-user
assignment, validation/test entries whose item never made it into any
user's train share are purged: the index is anchored to the training set
and models cannot rank unseen items.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .data import FeatureMatrix, IndexMap, InteractionSet, SplitBundle
from .errors import DataError, Degenerate, MissingFeatureRow
from .rng import derive


@dataclass(frozen=True)
class SplitConfig:
    test_ratio: float = 0.2
    val_ratio_of_train: float = 0.1
    seed: int = 42
    min_train_per_user: int = 1

    def __post_init__(self):
        if not (0.0 < self.test_ratio < 1.0):
            raise DataError(f"test_ratio must be in (0,1), got {self.test_ratio}")
        if not (0.0 <= self.val_ratio_of_train < 1.0):
            raise DataError(
                f"val_ratio_of_train must be in [0,1), got {self.val_ratio_of_train}"
            )
        if self.min_train_per_user < 0:
            raise DataError("min_train_per_user must be non-negative")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _train_anchored_index(train: InteractionSet) -> IndexMap:
    # First-appearance order over the lexicographically sorted training
    # entries: deterministic regardless of input file ordering.
    users: dict[str, None] = {}
    items: dict[str, None] = {}
    for user, item in sorted(train.entries):
        users.setdefault(user, None)
        items.setdefault(item, None)
    return IndexMap.build(tuple(users), tuple(items))


def split(interactions: InteractionSet, cfg: SplitConfig) -> SplitBundle:
    """Per-user holdout split plus dense reindexing from the train set."""
    if len(interactions) == 0:
        raise Degenerate("cannot split an empty interaction set")

    train_pairs: list[tuple[str, str]] = []
    val_pairs: list[tuple[str, str]] = []
    test_pairs: list[tuple[str, str]] = []

    for user in interactions.users:
        items = list(interactions.user_items[user])
        n = len(items)
        n_test = min(_round_half_up(n * cfg.test_ratio), max(n - cfg.min_train_per_user, 0))
        remaining = n - n_test
        n_val = min(
            _round_half_up(remaining * cfg.val_ratio_of_train),
            max(remaining - cfg.min_train_per_user, 0),
        )
        order = derive(cfg.seed, "split", user).permutation(n)
        shuffled = [items[k] for k in order]
        test_pairs.extend((user, i) for i in shuffled[:n_test])
        val_pairs.extend((user, i) for i in shuffled[n_test : n_test + n_val])
        train_pairs.extend((user, i) for i in shuffled[n_test + n_val :])

    train = InteractionSet.from_entries(train_pairs)
    if len(train) == 0:
        raise Degenerate("split produced an empty training set")

    index = _train_anchored_index(train)
    known_items = set(index.item_fwd)
    known_users = set(index.user_fwd)
    validation = InteractionSet.from_entries(
        (u, i) for u, i in val_pairs if u in known_users and i in known_items
    )
    test = InteractionSet.from_entries(
        (u, i) for u, i in test_pairs if u in known_users and i in known_items
    )
    return SplitBundle(
        train=train, validation=validation, test=test, index=index, seed=cfg.seed
    )


def remap_features(features: FeatureMatrix, index: IndexMap) -> FeatureMatrix:
    """Reorder feature rows into dense item order, dropping unindexed rows."""
    rows = np.empty((index.num_items, features.dim), dtype=np.float32)
    lookup = features.row_index
    for k, token in enumerate(index.item_rev):
        row = lookup.get(token)
        if row is None:
            raise MissingFeatureRow(token)
        rows[k] = features.values[row]
    return FeatureMatrix(
        modality=features.modality, row_ids=index.item_rev, values=rows
    )


def save_bundle(bundle: SplitBundle, directory) -> None:
    """Persist a bundle: dense-index TSVs plus token/index maps."""
    os.makedirs(directory, exist_ok=True)
    for name, part in (
        ("train", bundle.train),
        ("validation", bundle.validation),
        ("test", bundle.test),
    ):
        with open(os.path.join(directory, f"{name}.tsv"), "w", encoding="utf-8") as fh:
            for user, item in part.entries:
                fh.write(
                    f"{bundle.index.user_fwd[user]}\t{bundle.index.item_fwd[item]}\n"
                )
    with open(os.path.join(directory, "users.tsv"), "w", encoding="utf-8") as fh:
        for k, token in enumerate(bundle.index.user_rev):
            fh.write(f"{token}\t{k}\n")
    with open(os.path.join(directory, "items.tsv"), "w", encoding="utf-8") as fh:
        for k, token in enumerate(bundle.index.item_rev):
            fh.write(f"{token}\t{k}\n")
    with open(os.path.join(directory, "meta.json"), "w", encoding="utf-8") as fh:
        json.dump({"seed": bundle.seed}, fh)
        fh.write("\n")


def load_bundle(directory) -> SplitBundle:
    def read_map(path):
        tokens = {}
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                token, idx = line.rstrip("\n").split("\t")
                tokens[int(idx)] = token
        return tuple(tokens[k] for k in range(len(tokens)))

    user_rev = read_map(os.path.join(directory, "users.tsv"))
    item_rev = read_map(os.path.join(directory, "items.tsv"))
    index = IndexMap.build(user_rev, item_rev)

    def read_part(name):
        pairs = []
        with open(os.path.join(directory, f"{name}.tsv"), "r", encoding="utf-8") as fh:
            for line in fh:
                u, i = line.rstrip("\n").split("\t")
                pairs.append((user_rev[int(u)], item_rev[int(i)]))
        return InteractionSet.from_entries(pairs)

    seed = 0
    meta_path = os.path.join(directory, "meta.json")
    if os.path.exists(meta_path):
        with open(meta_path, "r", encoding="utf-8") as fh:
            seed = int(json.load(fh).get("seed", 0))

    return SplitBundle(
        train=read_part("train"),
        validation=read_part("validation"),
        test=read_part("test"),
        index=index,
        seed=seed,
    )
