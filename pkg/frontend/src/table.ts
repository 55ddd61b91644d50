/**
 * Comparison table: properties as rows (labels in the leftmost column),
 * contributions as columns. Filter icons sit on the property rows; active
 * ones are highlighted and carry a tooltip of their selections.
 */

import { describeExpr, type FilterMap } from "./filters.js";
import type { ComparisonPayload } from "./types.js";

export interface TableOptions {
  survivors: string[] | null; // null = unfiltered, show everything
  activeFilters: FilterMap | null;
  facetKinds: Record<string, string>;
  onFilterIcon?: (propertyId: string) => void;
}

export class PayloadShapeError extends Error {}

function assertComparisonShape(payload: ComparisonPayload): void {
  if (
    !payload ||
    !Array.isArray(payload.columns) ||
    !Array.isArray(payload.contribution_ids) ||
    typeof payload.cells !== "object" ||
    payload.cells === null
  ) {
    throw new PayloadShapeError("comparison payload does not match the expected schema");
  }
  for (const column of payload.columns) {
    if (typeof column.property_id !== "string" || typeof column.label !== "string") {
      throw new PayloadShapeError("comparison column entries are malformed");
    }
  }
}

export function renderComparisonTable(
  payload: ComparisonPayload,
  options: TableOptions,
): HTMLElement {
  assertComparisonShape(payload);
  const container = document.createElement("div");
  container.className = "comparison";

  const shown = options.survivors
    ? payload.contribution_ids.filter((cid) => options.survivors!.includes(cid))
    : [...payload.contribution_ids];

  if (payload.contribution_ids.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "This comparison has no contributions.";
    container.appendChild(empty);
    return container;
  }
  if (shown.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No contributions match the active filters.";
    container.appendChild(empty);
    return container;
  }

  const tombstoned = new Set(payload.tombstoned ?? []);
  const table = document.createElement("table");
  table.className = "comparison-table";

  const thead = document.createElement("thead");
  table.appendChild(thead);
  const head = document.createElement("tr");
  thead.appendChild(head);
  const corner = document.createElement("th");
  corner.textContent = "Properties";
  corner.className = "property-corner";
  head.appendChild(corner);
  for (const cid of shown) {
    const th = document.createElement("th");
    th.dataset.contribution = cid;
    const meta = payload.contributions[cid];
    th.textContent = meta ? meta.label : cid;
    if (meta?.paper_title) {
      th.title = `${meta.paper_title}${meta.year ? ` (${meta.year})` : ""}`;
    }
    if (tombstoned.has(cid)) {
      th.classList.add("tombstoned");
      const note = document.createElement("div");
      note.className = "tombstone-note";
      note.textContent = "no longer in the dataset";
      th.appendChild(note);
    }
    head.appendChild(th);
  }

  const body = document.createElement("tbody");
  table.appendChild(body);
  for (const column of payload.columns) {
    const row = document.createElement("tr");
    body.appendChild(row);
    const header = document.createElement("th");
    header.className = "property-label";
    header.dataset.property = column.property_id;

    const labelSpan = document.createElement("span");
    labelSpan.textContent = column.label;
    header.appendChild(labelSpan);

    if (options.facetKinds[column.property_id]) {
      const icon = document.createElement("button");
      icon.type = "button";
      icon.className = "filter-icon";
      icon.dataset.property = column.property_id;
      icon.textContent = "▼";
      icon.setAttribute("aria-label", `filter ${column.label}`);
      const active = options.activeFilters?.[column.property_id];
      if (active && active.length > 0) {
        icon.classList.add("active");
        icon.title = active.map(describeExpr).join("; ");
      }
      icon.addEventListener("click", () => options.onFilterIcon?.(column.property_id));
      header.appendChild(icon);
    }
    row.appendChild(header);

    for (const cid of shown) {
      const cell = document.createElement("td");
      row.appendChild(cell);
      const values = payload.cells[column.property_id]?.[cid] ?? [];
      if (tombstoned.has(cid)) {
        cell.className = "tombstoned";
      }
      if (values.length === 0) {
        cell.className = `${cell.className} empty-cell`.trim();
        cell.textContent = "—";
      } else {
        cell.textContent = values.map((v) => v.display).join("; ");
      }
    }
  }

  container.appendChild(table);
  return container;
}
