/**
 * Facet dialogs. Each facet kind gets its own dialog; all of them emit
 * expressions only through the guarded builders in filters.ts, so a dialog
 * can submit nothing the server would reject. Invalid input surfaces as an
 * inline message and the expression is simply not produced.
 */

import {
  FilterBuildError,
  NUMERIC_OPS,
  categoricalIn,
  numericCompare,
  numericExclude,
  numericRange,
  taxonomicUnder,
  temporalAfter,
  temporalBefore,
  temporalInterval,
  temporalOn,
  type AncestorRef,
  type FilterExpr,
} from "./filters.js";
import { reconcileSelection } from "./state.js";
import type { FacetPayload, LevelBucket, TaxonomyLevel } from "./types.js";

export const AUTOCOMPLETE_DEBOUNCE_MS = 150;

export interface CandidateFetcher {
  (prefix: string): Promise<{ value: string; count: number }[]>;
}

export interface BucketFetcher {
  (level: TaxonomyLevel): Promise<LevelBucket[]>;
}

export interface DialogCallbacks {
  onApply: (exprs: FilterExpr[]) => void;
  onClose: () => void;
}

function dialogShell(title: string, callbacks: DialogCallbacks): {
  root: HTMLElement;
  body: HTMLElement;
  error: HTMLElement;
  applyButton: HTMLButtonElement;
} {
  const root = document.createElement("div");
  root.className = "facet-dialog";

  const heading = document.createElement("header");
  heading.textContent = title;
  const close = document.createElement("button");
  close.type = "button";
  close.className = "close";
  close.textContent = "×";
  close.addEventListener("click", callbacks.onClose);
  heading.appendChild(close);
  root.appendChild(heading);

  const body = document.createElement("div");
  body.className = "dialog-body";
  root.appendChild(body);

  const error = document.createElement("p");
  error.className = "dialog-error";
  error.hidden = true;
  root.appendChild(error);

  const footer = document.createElement("footer");
  const applyButton = document.createElement("button");
  applyButton.type = "button";
  applyButton.className = "apply";
  applyButton.textContent = "Apply";
  footer.appendChild(applyButton);
  root.appendChild(footer);

  return { root, body, error, applyButton };
}

function showError(element: HTMLElement, message: string): void {
  element.textContent = message;
  element.hidden = false;
}

function applyGuarded(
  error: HTMLElement,
  callbacks: DialogCallbacks,
  build: () => FilterExpr[],
): void {
  try {
    error.hidden = true;
    callbacks.onApply(build());
  } catch (problem) {
    if (problem instanceof FilterBuildError) {
      showError(error, problem.message);
      return;
    }
    throw problem;
  }
}

/** Multi-select with prefix auto-complete over the candidates endpoint. */
export function categoricalDialog(
  facet: FacetPayload,
  fetchCandidates: CandidateFetcher,
  callbacks: DialogCallbacks,
  initial: string[] = [],
): HTMLElement {
  const { root, body, error, applyButton } = dialogShell(facet.label, callbacks);
  root.dataset.kind = "categorical";
  const selected = new Set(initial);

  const search = document.createElement("input");
  search.type = "search";
  search.placeholder = "Type to suggest values…";
  body.appendChild(search);

  const list = document.createElement("ul");
  list.className = "candidate-list";
  body.appendChild(list);

  function renderList(candidates: { value: string; count: number }[]): void {
    list.textContent = "";
    for (const candidate of candidates) {
      const item = document.createElement("li");
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = candidate.value;
      box.checked = selected.has(candidate.value);
      box.addEventListener("change", () => {
        if (box.checked) {
          selected.add(candidate.value);
        } else {
          selected.delete(candidate.value);
        }
      });
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${candidate.value} (${candidate.count})`));
      item.appendChild(label);
      list.appendChild(item);
    }
  }

  let debounce: ReturnType<typeof setTimeout> | null = null;
  search.addEventListener("input", () => {
    if (debounce !== null) {
      clearTimeout(debounce);
    }
    debounce = setTimeout(() => {
      void fetchCandidates(search.value).then(renderList);
    }, AUTOCOMPLETE_DEBOUNCE_MS);
  });
  void fetchCandidates("").then(renderList);

  applyButton.addEventListener("click", () =>
    applyGuarded(error, callbacks, () => [categoricalIn(selected)]),
  );
  return root;
}

/** Operator picker plus value, range or exclusion inputs. */
export function numericDialog(
  facet: FacetPayload,
  callbacks: DialogCallbacks,
): HTMLElement {
  const { root, body, error, applyButton } = dialogShell(facet.label, callbacks);
  root.dataset.kind = "numeric";

  if (facet.mixed_units) {
    const warning = document.createElement("p");
    warning.className = "unit-warning";
    warning.textContent =
      `Values mix units (${(facet.units ?? []).join(", ")}); comparisons use raw magnitudes.`;
    body.appendChild(warning);
  }

  const hint = document.createElement("p");
  hint.className = "range-hint";
  hint.textContent = `Values span ${facet.minimum} to ${facet.maximum}.`;
  body.appendChild(hint);

  const opSelect = document.createElement("select");
  opSelect.className = "numeric-op";
  for (const op of [...NUMERIC_OPS, "range", "exclude"]) {
    const option = document.createElement("option");
    option.value = op;
    option.textContent = op;
    opSelect.appendChild(option);
  }
  body.appendChild(opSelect);

  const single = document.createElement("input");
  single.className = "bound";
  single.placeholder = "value";
  body.appendChild(single);

  const low = document.createElement("input");
  low.className = "low";
  low.placeholder = "low";
  low.hidden = true;
  const high = document.createElement("input");
  high.className = "high";
  high.placeholder = "high";
  high.hidden = true;
  const lowInc = document.createElement("input");
  lowInc.type = "checkbox";
  lowInc.className = "low-inclusive";
  lowInc.checked = true;
  lowInc.hidden = true;
  const highInc = document.createElement("input");
  highInc.type = "checkbox";
  highInc.className = "high-inclusive";
  highInc.checked = true;
  highInc.hidden = true;
  const excludeInput = document.createElement("input");
  excludeInput.className = "exclude-values";
  excludeInput.placeholder = "values, comma separated";
  excludeInput.hidden = true;
  body.append(low, high, lowInc, highInc, excludeInput);

  opSelect.addEventListener("change", () => {
    const mode = opSelect.value;
    single.hidden = mode === "range" || mode === "exclude";
    low.hidden = high.hidden = lowInc.hidden = highInc.hidden = mode !== "range";
    excludeInput.hidden = mode !== "exclude";
  });

  applyButton.addEventListener("click", () =>
    applyGuarded(error, callbacks, () => {
      const mode = opSelect.value;
      if (mode === "range") {
        return [numericRange(low.value, high.value, lowInc.checked, highInc.checked)];
      }
      if (mode === "exclude") {
        return [numericExclude(excludeInput.value.split(",").filter((v) => v.trim()))];
      }
      return [numericCompare(mode, single.value)];
    }),
  );
  return root;
}

/** Date picker with on / before / after / interval modes. */
export function temporalDialog(
  facet: FacetPayload,
  callbacks: DialogCallbacks,
): HTMLElement {
  const { root, body, error, applyButton } = dialogShell(facet.label, callbacks);
  root.dataset.kind = "temporal";

  const hint = document.createElement("p");
  hint.className = "range-hint";
  hint.textContent = `Studies range from ${facet.earliest} to ${facet.latest}.`;
  body.appendChild(hint);

  const modeSelect = document.createElement("select");
  modeSelect.className = "temporal-mode";
  for (const mode of ["on", "before", "after", "interval"]) {
    const option = document.createElement("option");
    option.value = mode;
    option.textContent = mode;
    modeSelect.appendChild(option);
  }
  body.appendChild(modeSelect);

  const day = document.createElement("input");
  day.type = "date";
  day.className = "day";
  body.appendChild(day);

  const start = document.createElement("input");
  start.type = "date";
  start.className = "start";
  start.hidden = true;
  const end = document.createElement("input");
  end.type = "date";
  end.className = "end";
  end.hidden = true;
  body.append(start, end);

  modeSelect.addEventListener("change", () => {
    const interval = modeSelect.value === "interval";
    day.hidden = interval;
    start.hidden = end.hidden = !interval;
  });

  applyButton.addEventListener("click", () =>
    applyGuarded(error, callbacks, () => {
      switch (modeSelect.value) {
        case "on":
          return [temporalOn(day.value)];
        case "before":
          return [temporalBefore(day.value)];
        case "after":
          return [temporalAfter(day.value)];
        default:
          return [temporalInterval(start.value, end.value)];
      }
    }),
  );
  return root;
}

/** Level selector plus multi-select of the buckets at that level. */
export function taxonomicDialog(
  facet: FacetPayload,
  fetchBuckets: BucketFetcher,
  callbacks: DialogCallbacks & { onLevelChange?: (level: TaxonomyLevel) => void },
  initialLevel: TaxonomyLevel = "country",
): HTMLElement {
  const { root, body, error, applyButton } = dialogShell(facet.label, callbacks);
  root.dataset.kind = "taxonomic";
  let level: TaxonomyLevel = initialLevel;
  let selected: AncestorRef[] = [];

  const levelSelect = document.createElement("select");
  levelSelect.className = "level-select";
  for (const candidate of facet.levels ?? []) {
    const option = document.createElement("option");
    option.value = candidate;
    option.textContent = candidate;
    if (candidate === level) {
      option.selected = true;
    }
    levelSelect.appendChild(option);
  }
  body.appendChild(levelSelect);

  const notice = document.createElement("p");
  notice.className = "level-notice";
  notice.hidden = true;
  body.appendChild(notice);

  const list = document.createElement("ul");
  list.className = "bucket-list";
  body.appendChild(list);

  function renderBuckets(buckets: LevelBucket[]): void {
    list.textContent = "";
    const chosen = new Set(selected.map((a) => a.external_id));
    for (const bucket of buckets) {
      const item = document.createElement("li");
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.disabled = bucket.external_id === null;
      box.value = bucket.external_id ?? "";
      box.checked = bucket.external_id !== null && chosen.has(bucket.external_id);
      box.addEventListener("change", () => {
        if (bucket.external_id === null) {
          return;
        }
        if (box.checked) {
          selected.push({
            external_id: bucket.external_id,
            label: bucket.label,
            graph: facet.leaves?.[0]?.graph ?? null,
          });
        } else {
          selected = selected.filter((a) => a.external_id !== bucket.external_id);
        }
      });
      label.appendChild(box);
      label.appendChild(document.createTextNode(` ${bucket.label} (${bucket.count})`));
      item.appendChild(label);
      list.appendChild(item);
    }
  }

  function loadLevel(next: TaxonomyLevel): Promise<void> {
    return fetchBuckets(next).then((buckets) => {
      const { kept, dropped } = reconcileSelection(selected, buckets);
      selected = kept;
      if (dropped.length > 0) {
        notice.textContent =
          `Dropped ${dropped.map((a) => a.label ?? a.external_id).join(", ")}: ` +
          `not present at the ${next} level.`;
        notice.hidden = false;
      } else {
        notice.hidden = true;
      }
      level = next;
      callbacks.onLevelChange?.(next);
      renderBuckets(buckets);
    });
  }

  levelSelect.addEventListener("change", () => {
    void loadLevel(levelSelect.value as TaxonomyLevel);
  });
  void loadLevel(level);

  applyButton.addEventListener("click", () =>
    applyGuarded(error, callbacks, () => [taxonomicUnder(selected, level)]),
  );
  return root;
}

export function openFacetDialog(
  facet: FacetPayload,
  deps: {
    fetchCandidates: CandidateFetcher;
    fetchBuckets: BucketFetcher;
    initialLevel?: TaxonomyLevel;
    initialCategorical?: string[];
  },
  callbacks: DialogCallbacks & { onLevelChange?: (level: TaxonomyLevel) => void },
): HTMLElement {
  switch (facet.kind) {
    case "categorical":
      return categoricalDialog(facet, deps.fetchCandidates, callbacks, deps.initialCategorical);
    case "numeric":
      return numericDialog(facet, callbacks);
    case "temporal":
      return temporalDialog(facet, callbacks);
    case "taxonomic":
      return taxonomicDialog(facet, deps.fetchBuckets, callbacks, deps.initialLevel ?? "country");
  }
}
