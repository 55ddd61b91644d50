/**
 * Client-side filter state.
 *
 * The canonical state is the wire-shaped filter map itself; dialog state
 * (which facet is open, the chosen taxonomy level) lives beside it and
 * never leaks into payloads. Chips always derive from the filters of the
 * last *successful* request, so the chip row is exactly what the table
 * currently shows.
 */

import { describeExpr, type FilterExpr, type FilterMap } from "./filters.js";
import type { AncestorRef } from "./filters.js";
import type { FacetPayload, LevelBucket, TaxonomyLevel } from "./types.js";

export interface Chip {
  propertyId: string;
  facetLabel: string;
  exprIndex: number;
  text: string;
}

export function chipsFor(applied: FilterMap | null, facets: FacetPayload[]): Chip[] {
  if (!applied) {
    return [];
  }
  const labels = new Map(facets.map((f) => [f.property_id, f.label]));
  const chips: Chip[] = [];
  for (const propertyId of Object.keys(applied).sort()) {
    applied[propertyId].forEach((expr, exprIndex) => {
      chips.push({
        propertyId,
        facetLabel: labels.get(propertyId) ?? propertyId,
        exprIndex,
        text: describeExpr(expr),
      });
    });
  }
  return chips;
}

export interface LevelSwitchResult {
  kept: AncestorRef[];
  dropped: AncestorRef[];
}

/**
 * Level switching keeps selected ancestors that still exist in the new
 * level's buckets and drops the rest (the caller shows a notice for them).
 */
export function reconcileSelection(
  selected: AncestorRef[],
  buckets: LevelBucket[],
): LevelSwitchResult {
  const available = new Set(buckets.map((b) => b.external_id).filter((x) => x !== null));
  const kept: AncestorRef[] = [];
  const dropped: AncestorRef[] = [];
  for (const ancestor of selected) {
    (available.has(ancestor.external_id) ? kept : dropped).push(ancestor);
  }
  return { kept, dropped };
}

export interface UiState {
  comparisonId: string;
  filters: FilterMap;
  openDialog: string | null;
  levelByProperty: Record<string, TaxonomyLevel>;
  lastApplied: FilterMap | null;
  survivors: string[] | null;
  degraded: boolean;
}

export class FilterStore {
  state: UiState;
  private listeners: ((state: UiState) => void)[] = [];

  constructor(comparisonId: string) {
    this.state = {
      comparisonId,
      filters: {},
      openDialog: null,
      levelByProperty: {},
      lastApplied: null,
      survivors: null,
      degraded: false,
    };
  }

  subscribe(listener: (state: UiState) => void): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  setExprs(propertyId: string, exprs: FilterExpr[]): void {
    const filters = { ...this.state.filters };
    if (exprs.length === 0) {
      delete filters[propertyId];
    } else {
      filters[propertyId] = exprs;
    }
    this.state = { ...this.state, filters };
    this.emit();
  }

  removeExpr(propertyId: string, exprIndex: number): void {
    const current = this.state.filters[propertyId] ?? [];
    this.setExprs(
      propertyId,
      current.filter((_, index) => index !== exprIndex),
    );
  }

  clear(): void {
    this.state = { ...this.state, filters: {} };
    this.emit();
  }

  openDialog(propertyId: string | null): void {
    this.state = { ...this.state, openDialog: propertyId };
    this.emit();
  }

  setLevel(propertyId: string, level: TaxonomyLevel): void {
    this.state = {
      ...this.state,
      levelByProperty: { ...this.state.levelByProperty, [propertyId]: level },
    };
    this.emit();
  }

  /** Record a successful filter round trip; chips and table follow this. */
  applied(filters: FilterMap, survivors: string[], degraded: boolean): void {
    this.state = {
      ...this.state,
      lastApplied: JSON.parse(JSON.stringify(filters)) as FilterMap,
      survivors: [...survivors],
      degraded,
    };
    this.emit();
  }
}
