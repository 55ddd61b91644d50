"""Durable, shareable snapshots of filtered comparisons.

Saving is an event, not an upsert: the same inputs saved twice yield two
permalinks. Each save appends one JSON line to a journal file which is
replayed at startup, so ids stay valid across restarts without a database.
Loading restricts the source comparison to the frozen id list; rows whose
contributions disappeared in a later ingest are marked tombstoned rather
than dropped, so staleness is visible instead of silent.
"""

from __future__ import annotations

import base64
import json
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .comparison import Comparison
from .errors import InvalidSubset, MalformedDocument, NotFound, PersistenceFailure
from .filters import FilterSet, filter_set_from_json, filter_set_to_json


def new_permalink_id() -> str:
    """128 random bits, base32: URL-safe and unguessable without coordination."""
    raw = base64.b32encode(secrets.token_bytes(16)).decode("ascii")
    return raw.rstrip("=").lower()


@dataclass(frozen=True)
class Permalink:
    permalink_id: str
    comparison_id: str
    filters: FilterSet
    surviving_ids: tuple[str, ...]
    snapshot_revision: int
    created_at: str


class PermalinkJournal:
    """Append-only journal of saved permalinks with an in-memory index.

    Writes are serialized; reads against the index are lock-free.
    """

    def __init__(self, path: str | Path):
        self._path = Path(path)
        self._write_lock = threading.Lock()
        self._index: dict[str, Permalink] = {}
        if self._path.exists():
            self._replay()

    def _replay(self) -> None:
        with open(self._path, "r", encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                stripped = raw.strip()
                if not stripped:
                    continue
                try:
                    obj = json.loads(stripped)
                except json.JSONDecodeError as exc:
                    raise MalformedDocument(
                        f"invalid permalink journal line: {exc.msg}", line=line_no
                    ) from None
                permalink = Permalink(
                    permalink_id=obj["permalink_id"],
                    comparison_id=obj["comparison_id"],
                    filters=filter_set_from_json(obj["filters"]),
                    surviving_ids=tuple(obj["surviving_ids"]),
                    snapshot_revision=obj["snapshot_revision"],
                    created_at=obj["created_at"],
                )
                self._index[permalink.permalink_id] = permalink

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, permalink_id: str) -> bool:
        return permalink_id in self._index

    def entries(self) -> list[Permalink]:
        return list(self._index.values())

    def save(
        self,
        comparison: Comparison,
        filter_set: FilterSet,
        surviving_ids: list[str] | tuple[str, ...],
        *,
        snapshot_revision: int,
    ) -> Permalink:
        """Persist a filtered subset; every call yields a fresh permalink id."""
        known = set(comparison.contribution_ids)
        foreign = [cid for cid in surviving_ids if cid not in known]
        if foreign:
            raise InvalidSubset(foreign)

        permalink = Permalink(
            permalink_id=new_permalink_id(),
            comparison_id=comparison.id,
            filters=filter_set,
            surviving_ids=tuple(surviving_ids),
            snapshot_revision=snapshot_revision,
            created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        record = {
            "permalink_id": permalink.permalink_id,
            "comparison_id": permalink.comparison_id,
            "filters": filter_set_to_json(filter_set),
            "surviving_ids": list(permalink.surviving_ids),
            "snapshot_revision": permalink.snapshot_revision,
            "created_at": permalink.created_at,
        }
        line = json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        with self._write_lock:
            try:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with open(self._path, "a", encoding="utf-8") as handle:
                    handle.write(line + "\n")
                    handle.flush()
            except OSError as exc:
                raise PersistenceFailure(str(exc)) from exc
            self._index[permalink.permalink_id] = permalink
        return permalink

    def get(self, permalink_id: str) -> Permalink:
        try:
            return self._index[permalink_id]
        except KeyError:
            raise NotFound(permalink_id, kind="permalink") from None

    def load(self, permalink_id: str, source: Comparison) -> tuple[Comparison, FilterSet]:
        """Reconstruct the frozen subset against the current source comparison.

        The frozen id list governs: ids the source no longer carries come
        back as tombstoned rows.
        """
        permalink = self.get(permalink_id)
        restricted = source.restricted_to(permalink.surviving_ids)
        return restricted, permalink.filters
