"""Raw file parsing and catalog pre-filtering.

Interactions arrive as headerless UTF-8 TSV (user, item, optional rating
and timestamp columns which are ignored: feedback is binarized).  Item
metadata arrives as JSON-lines following the Amazon metadata dump
convention: ``item`` (required), ``imUrl`` and ``description`` (optional).

Pre-filtering removes items whose visual or textual evidence is missing or
invalid, then drops every interaction touching a removed item.  Checking
whether an image link actually resolves would need network probing, so the
link check is an injected oracle; the default is a purely syntactic URL
check, which keeps runs hermetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional, Sequence
from urllib.parse import urlparse

from .data import InteractionSet, ItemMetadata
from .errors import DuplicateItem, Malformed


def parse_interactions(path) -> InteractionSet:
    """Parse a TSV interaction file, deduplicating repeated pairs."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 2 or not fields[0].strip() or not fields[1].strip():
                raise Malformed(line_no, "expected at least user<TAB>item")
            pairs.append((fields[0].strip(), fields[1].strip()))
    return InteractionSet.from_entries(pairs)


def parse_item_metadata(path) -> list[ItemMetadata]:
    """Parse JSON-lines item metadata; absent fields stay None."""
    records = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise Malformed(line_no, f"bad JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or "item" not in obj:
                raise Malformed(line_no, "object must carry an 'item' field")
            token = str(obj["item"])
            if token in seen:
                raise DuplicateItem(token)
            seen.add(token)
            extra = {
                str(k): str(v)
                for k, v in obj.items()
                if k not in ("item", "imUrl", "description")
            }
            records.append(
                ItemMetadata(
                    item_token=token,
                    image_url=obj.get("imUrl"),
                    description=obj.get("description"),
                    extra=extra,
                )
            )
    return records


def syntactic_url_ok(url: str) -> bool:
    """Default link oracle: http(s) scheme with a non-empty host."""
    try:
        parsed = urlparse(url)
    except ValueError:
        return False
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def _description_ok(description: Optional[str]) -> bool:
    if description is None:
        return False
    text = description.strip()
    return bool(text) and text.lower() != "nan"


@dataclass(frozen=True)
class FilterReport:
    """Counts reconciling what pre-filtering removed and why.

    An item missing both kinds of evidence counts in both removal buckets;
    the before/after item delta deduplicates per item.  Counts cover items
    that appear in the interaction data (metadata-only items are inert).
    """

    items_removed_missing_visual: int
    items_removed_missing_textual: int
    interactions_dropped: int
    items_before: int
    items_after: int
    users_before: int
    users_after: int


def prefilter(
    interactions: InteractionSet,
    metadata: Sequence[ItemMetadata],
    url_validity: Callable[[str], bool] | None = None,
) -> tuple[InteractionSet, FilterReport]:
    """Drop items with missing/invalid visual or textual evidence.

    Removal rules, per item appearing in the interactions:
      - visual: no metadata record, no image URL, or ``url_validity`` fails;
      - textual: no metadata record, or description absent / blank / "nan".
    Every interaction referencing a removed item is dropped; users left
    without interactions disappear with them.  Idempotent by construction.
    """
    check_url = url_validity if url_validity is not None else syntactic_url_ok
    by_token = {m.item_token: m for m in metadata}

    interaction_items = set(i for _, i in interactions.entries)
    removed_visual = set()
    removed_textual = set()
    for token in interaction_items:
        meta = by_token.get(token)
        if meta is None:
            removed_visual.add(token)
            removed_textual.add(token)
            continue
        if not meta.image_url or not check_url(meta.image_url):
            removed_visual.add(token)
        if not _description_ok(meta.description):
            removed_textual.add(token)

    removed = removed_visual | removed_textual
    kept_pairs = [(u, i) for u, i in interactions.entries if i not in removed]
    filtered = InteractionSet.from_entries(kept_pairs)

    report = FilterReport(
        items_removed_missing_visual=len(removed_visual),
        items_removed_missing_textual=len(removed_textual),
        interactions_dropped=len(interactions) - len(filtered),
        items_before=len(interaction_items),
        items_after=filtered.num_items,
        users_before=interactions.num_users,
        users_after=filtered.num_users,
    )
    return filtered, report
