"""Tabular comparisons: property columns x contribution rows.

Column order is deterministic: properties sort by descending coverage (how
many of the selected contributions carry the property), ties broken
lexicographically by label, then by property id. Cells are multi-valued and
may be absent. Comparisons are plain immutable values; restricting one to a
subset of rows never rewrites cell content.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import EmptySelection, UnknownContribution
from .store import StoreSnapshot
from .values import Value


@dataclass(frozen=True)
class PropertyColumn:
    property_id: str
    label: str


@dataclass(frozen=True)
class Comparison:
    id: str
    label: str
    columns: tuple[PropertyColumn, ...]
    contribution_ids: tuple[str, ...]
    # column-major: property id -> contribution id -> values
    cells: Mapping[str, Mapping[str, tuple[Value, ...]]]
    tombstoned: frozenset[str] = frozenset()

    @property
    def row_count(self) -> int:
        return len(self.contribution_ids)

    def column_ids(self) -> list[str]:
        return [column.property_id for column in self.columns]

    def values_for(self, contribution_id: str, property_id: str) -> tuple[Value, ...]:
        """Cell content; empty tuple when the cell is absent."""
        return self.cells.get(property_id, {}).get(contribution_id, ())

    def column_values(self, property_id: str) -> Mapping[str, tuple[Value, ...]]:
        return self.cells.get(property_id, {})

    def restricted_to(self, surviving_ids: Sequence[str]) -> "Comparison":
        """The comparison narrowed to the given rows, in their given order.

        Ids that no longer resolve to a row stay in the row list but are
        marked tombstoned instead of being dropped.
        """
        kept = tuple(surviving_ids)
        kept_set = set(kept)
        live = set(self.contribution_ids) - self.tombstoned
        tombstoned = frozenset(cid for cid in kept if cid not in live)
        cells = {
            property_id: {
                cid: values for cid, values in by_row.items() if cid in kept_set
            }
            for property_id, by_row in self.cells.items()
        }
        return Comparison(
            id=self.id,
            label=self.label,
            columns=self.columns,
            contribution_ids=kept,
            cells=cells,
            tombstoned=tombstoned,
        )


def _default_comparison_id(contribution_ids: Iterable[str]) -> str:
    digest = hashlib.sha256(",".join(sorted(contribution_ids)).encode("utf-8")).hexdigest()
    return f"cmp-{digest[:12]}"


def build_comparison(
    snapshot: StoreSnapshot,
    contribution_ids: Sequence[str],
    *,
    comparison_id: str | None = None,
    label: str | None = None,
) -> Comparison:
    """Build the comparison table for the given contributions.

    Columns are the union of the contributions' property ids; duplicate ids
    in the input keep their first position. Raises ``EmptySelection`` for an
    empty input and ``UnknownContribution`` for an id the snapshot lacks.
    """
    ordered_ids: list[str] = []
    seen: set[str] = set()
    for cid in contribution_ids:
        if cid not in seen:
            seen.add(cid)
            ordered_ids.append(cid)
    if not ordered_ids:
        raise EmptySelection()

    rows = []
    for cid in ordered_ids:
        if cid not in snapshot.contributions:
            raise UnknownContribution(cid)
        rows.append(snapshot.contributions[cid])

    coverage: dict[str, int] = {}
    for contribution in rows:
        for property_id in contribution.values:
            coverage[property_id] = coverage.get(property_id, 0) + 1

    def column_key(pid: str):
        label = snapshot.property_label(pid)
        return (-coverage[pid], label.casefold(), label, pid)

    columns = tuple(
        PropertyColumn(property_id, snapshot.property_label(property_id))
        for property_id in sorted(coverage, key=column_key)
    )

    cells: dict[str, dict[str, tuple[Value, ...]]] = {
        column.property_id: {} for column in columns
    }
    for contribution in rows:
        for property_id, values in contribution.values.items():
            cells[property_id][contribution.id] = values

    return Comparison(
        id=comparison_id or _default_comparison_id(ordered_ids),
        label=label or f"Comparison of {len(ordered_ids)} contributions",
        columns=columns,
        contribution_ids=tuple(ordered_ids),
        cells=cells,
    )
