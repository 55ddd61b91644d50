/** Applied-filter chips above the table, one per expression, each removable. */

import type { Chip } from "./state.js";

export function renderChips(
  chips: Chip[],
  onRemove: (propertyId: string, exprIndex: number) => void,
  onClearAll: () => void,
): HTMLElement {
  const row = document.createElement("div");
  row.className = "chip-row";
  if (chips.length === 0) {
    row.hidden = true;
    return row;
  }
  for (const chip of chips) {
    const element = document.createElement("span");
    element.className = "chip";
    element.dataset.property = chip.propertyId;
    element.textContent = `${chip.facetLabel}: ${chip.text}`;
    const remove = document.createElement("button");
    remove.type = "button";
    remove.className = "chip-remove";
    remove.textContent = "×";
    remove.setAttribute("aria-label", `remove ${chip.facetLabel} filter`);
    remove.addEventListener("click", () => onRemove(chip.propertyId, chip.exprIndex));
    element.appendChild(remove);
    row.appendChild(element);
  }
  const clear = document.createElement("button");
  clear.type = "button";
  clear.className = "chip-clear-all";
  clear.textContent = "Clear all";
  clear.addEventListener("click", onClearAll);
  row.appendChild(clear);
  return row;
}
