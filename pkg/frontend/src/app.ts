/**
 * Application wiring: live comparison view and frozen permalink view.
 *
 * The live URL carries only the comparison id (?comparison=...); filter
 * state stays client-side until saved, and saved views are reached through
 * their permalink URL (?view=<permalink id>). Every successful filter
 * round trip repaints the table immediately; degraded responses show a
 * warning banner instead of failing.
 */

import { ApiClient, ApiRequestError } from "./api.js";
import { renderChips } from "./chips.js";
import { openFacetDialog } from "./dialogs.js";
import type { FilterMap } from "./filters.js";
import { FilterStore, chipsFor } from "./state.js";
import { PayloadShapeError, renderComparisonTable } from "./table.js";
import type { ComparisonPayload, FacetPayload, FacetsResponse, TaxonomyLevel } from "./types.js";

interface AppContext {
  api: ApiClient;
  root: HTMLElement;
  store: FilterStore;
  comparison: ComparisonPayload;
  facets: FacetPayload[];
  degradedFacets: boolean;
}

function banner(kind: "error" | "warning" | "info", text: string): HTMLElement {
  const element = document.createElement("div");
  element.className = `banner ${kind}`;
  element.textContent = text;
  return element;
}

function facetKindMap(facets: FacetPayload[]): Record<string, string> {
  return Object.fromEntries(facets.map((facet) => [facet.property_id, facet.kind]));
}

async function applyAndRender(context: AppContext): Promise<void> {
  const filters: FilterMap = context.store.state.filters;
  try {
    const response = await context.api.applyFilters(context.comparison.id, filters);
    if (response === null) {
      return; // superseded by a newer request
    }
    context.store.applied(filters, response.surviving_ids, response.degraded);
  } catch (problem) {
    if (problem instanceof ApiRequestError && problem.status === 502) {
      renderView(context, {
        notice: "The location hierarchy service is unreachable; taxonomic filtering is unavailable.",
      });
      return;
    }
    throw problem;
  }
  renderView(context, {});
}

function renderView(context: AppContext, options: { notice?: string }): void {
  const { root, store, comparison, facets } = context;
  root.textContent = "";

  const title = document.createElement("h1");
  title.textContent = comparison.label;
  root.appendChild(title);

  if (options.notice) {
    root.appendChild(banner("error", options.notice));
  }
  if (context.degradedFacets || store.state.degraded) {
    root.appendChild(
      banner(
        "warning",
        "Location hierarchy unavailable: location facets fall back to plain labels.",
      ),
    );
  }

  const chips = chipsFor(store.state.lastApplied, facets);
  root.appendChild(
    renderChips(
      chips,
      (propertyId, exprIndex) => {
        store.removeExpr(propertyId, exprIndex);
        void applyAndRender(context);
      },
      () => {
        store.clear();
        void applyAndRender(context);
      },
    ),
  );

  const counts = document.createElement("p");
  counts.className = "result-count";
  const shown = store.state.survivors?.length ?? comparison.contribution_ids.length;
  counts.textContent = `${shown} of ${comparison.contribution_ids.length} contributions`;
  root.appendChild(counts);

  const actions = document.createElement("div");
  actions.className = "actions";
  const saveButton = document.createElement("button");
  saveButton.type = "button";
  saveButton.className = "save-button";
  saveButton.textContent = "Save & share";
  saveButton.addEventListener("click", () => void saveAndShare(context));
  actions.appendChild(saveButton);
  root.appendChild(actions);

  root.appendChild(
    renderComparisonTable(comparison, {
      survivors: store.state.survivors,
      activeFilters: store.state.lastApplied,
      facetKinds: facetKindMap(facets),
      onFilterIcon: (propertyId) => openDialogFor(context, propertyId),
    }),
  );
}

function openDialogFor(context: AppContext, propertyId: string): void {
  const facet = context.facets.find((f) => f.property_id === propertyId);
  if (!facet) {
    return;
  }
  context.store.openDialog(propertyId);
  const host = document.createElement("div");
  host.className = "dialog-host";
  const level = context.store.state.levelByProperty[propertyId] ?? "country";

  const close = () => {
    context.store.openDialog(null);
    host.remove();
  };
  const dialog = openFacetDialog(
    facet,
    {
      fetchCandidates: async (prefix) =>
        (await context.api.candidates(context.comparison.id, propertyId, prefix)).values,
      fetchBuckets: async (l: TaxonomyLevel) =>
        (await context.api.levelValues(context.comparison.id, propertyId, l)).buckets,
      initialLevel: level,
    },
    {
      onApply: (exprs) => {
        context.store.setExprs(propertyId, exprs);
        close();
        void applyAndRender(context);
      },
      onClose: close,
      onLevelChange: (l) => context.store.setLevel(propertyId, l),
    },
  );
  host.appendChild(dialog);
  context.root.appendChild(host);
}

async function saveAndShare(context: AppContext): Promise<void> {
  const survivors = context.store.state.survivors ?? [...context.comparison.contribution_ids];
  const filters = context.store.state.lastApplied ?? {};
  try {
    const saved = await context.api.save(context.comparison.id, filters, survivors);
    const host = document.createElement("div");
    host.className = "dialog-host share-dialog";
    const url = new URL(window.location.href);
    url.search = `?view=${saved.permalink_id}`;
    const box = document.createElement("div");
    box.className = "facet-dialog";
    const heading = document.createElement("header");
    heading.textContent = "Shareable link";
    box.appendChild(heading);
    const input = document.createElement("input");
    input.readOnly = true;
    input.className = "share-url";
    input.value = url.toString();
    box.appendChild(input);
    const copy = document.createElement("button");
    copy.type = "button";
    copy.textContent = "Copy";
    copy.addEventListener("click", () => {
      input.select();
      void navigator.clipboard?.writeText(input.value);
    });
    box.appendChild(copy);
    const done = document.createElement("button");
    done.type = "button";
    done.textContent = "Close";
    done.addEventListener("click", () => host.remove());
    box.appendChild(done);
    host.appendChild(box);
    context.root.appendChild(host);
  } catch (problem) {
    const message =
      problem instanceof ApiRequestError
        ? `Saving failed: ${problem.message}`
        : "Saving failed: the journal is not reachable.";
    context.root.prepend(banner("error", message));
  }
}

async function bootLive(api: ApiClient, root: HTMLElement, comparisonId: string): Promise<void> {
  let comparison: ComparisonPayload;
  let facetsResponse: FacetsResponse;
  try {
    comparison = await api.comparison(comparisonId);
    facetsResponse = await api.facets(comparisonId);
  } catch (problem) {
    if (problem instanceof ApiRequestError && problem.status === 404) {
      root.appendChild(banner("error", `No comparison named "${comparisonId}".`));
      return;
    }
    throw problem;
  }
  const context: AppContext = {
    api,
    root,
    store: new FilterStore(comparisonId),
    comparison,
    facets: facetsResponse.facets,
    degradedFacets: facetsResponse.degraded,
  };
  try {
    renderView(context, {});
  } catch (problem) {
    if (problem instanceof PayloadShapeError) {
      root.textContent = "";
      root.appendChild(banner("error", problem.message));
      return;
    }
    throw problem;
  }
}

async function bootSaved(api: ApiClient, root: HTMLElement, permalinkId: string): Promise<void> {
  let saved;
  try {
    saved = await api.saved(permalinkId);
  } catch (problem) {
    if (problem instanceof ApiRequestError && problem.status === 404) {
      const message = document.createElement("div");
      message.className = "not-found-page";
      message.appendChild(banner("error", "404: this saved comparison does not exist."));
      root.appendChild(message);
      return;
    }
    throw problem;
  }
  const facetsResponse = await api.facets(permalinkId);
  const context: AppContext = {
    api,
    root,
    store: new FilterStore(permalinkId),
    comparison: saved.comparison,
    facets: facetsResponse.facets,
    degradedFacets: facetsResponse.degraded,
  };
  context.store.applied(
    saved.filters as FilterMap,
    saved.comparison.contribution_ids,
    false,
  );
  renderView(context, {});
  const meta = banner(
    "info",
    `Frozen view saved ${saved.created_at} (dataset revision ${saved.snapshot_revision}).`,
  );
  root.prepend(meta);
}

export async function boot(root: HTMLElement): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "");
  const permalinkId = params.get("view");
  if (permalinkId) {
    await bootSaved(api, root, permalinkId);
    return;
  }
  const requested = params.get("comparison");
  if (requested) {
    await bootLive(api, root, requested);
    return;
  }
  const entries = await api.listComparisons();
  const live = entries.find((entry) => entry.kind === "comparison");
  if (!live) {
    root.appendChild(banner("info", "No comparisons available."));
    return;
  }
  await bootLive(api, root, live.id);
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app")!);
}
