/**
 * Filter expressions: the exact wire schema plus guarded builders.
 *
 * Every function here either returns a well-formed expression or throws,
 * so state assembled through the dialogs can never fail server-side
 * validation. Serialization is canonical (sorted keys and sorted
 * selections) to match the server's own byte-stable form.
 */

import type { TaxonomyLevel } from "./types.js";

export type NumericOp = "<" | "<=" | ">" | ">=" | "=" | "!=";

export const NUMERIC_OPS: NumericOp[] = ["<", "<=", ">", ">=", "=", "!="];

export interface AncestorRef {
  external_id: string;
  label: string | null;
  graph: string | null;
}

export type FilterExpr =
  | { type: "categorical_in"; values: string[] }
  | { type: "numeric_cmp"; op: NumericOp; bound: string }
  | {
      type: "numeric_range";
      low: string;
      high: string;
      low_inclusive: boolean;
      high_inclusive: boolean;
    }
  | { type: "numeric_exclude"; values: string[] }
  | { type: "temporal_on"; date: string }
  | { type: "temporal_before"; date: string }
  | { type: "temporal_after"; date: string }
  | { type: "temporal_interval"; start: string; end: string }
  | { type: "taxonomic_under"; ancestors: AncestorRef[]; level?: TaxonomyLevel };

export type FilterMap = Record<string, FilterExpr[]>;

export class FilterBuildError extends Error {}

function requireFiniteNumber(raw: string, what: string): string {
  const trimmed = raw.trim();
  if (!trimmed || !Number.isFinite(Number(trimmed))) {
    throw new FilterBuildError(`${what} must be a finite number, got "${raw}"`);
  }
  return trimmed;
}

const ISO_DAY = /^\d{4}-\d{2}-\d{2}$/;

function requireIsoDay(raw: string, what: string): string {
  const trimmed = raw.trim();
  if (!ISO_DAY.test(trimmed) || Number.isNaN(Date.parse(trimmed))) {
    throw new FilterBuildError(`${what} must be a full ISO date (YYYY-MM-DD), got "${raw}"`);
  }
  return trimmed;
}

export function categoricalIn(values: Iterable<string>): FilterExpr {
  const distinct = [...new Set(values)].filter((v) => v.length > 0).sort();
  if (distinct.length === 0) {
    throw new FilterBuildError("select at least one value");
  }
  return { type: "categorical_in", values: distinct };
}

export function numericCompare(op: string, bound: string): FilterExpr {
  if (!NUMERIC_OPS.includes(op as NumericOp)) {
    throw new FilterBuildError(`unknown operator "${op}"`);
  }
  return { type: "numeric_cmp", op: op as NumericOp, bound: requireFiniteNumber(bound, "bound") };
}

export function numericRange(
  low: string,
  high: string,
  lowInclusive = true,
  highInclusive = true,
): FilterExpr {
  const lo = requireFiniteNumber(low, "low bound");
  const hi = requireFiniteNumber(high, "high bound");
  if (Number(lo) > Number(hi)) {
    throw new FilterBuildError(`low bound ${lo} exceeds high bound ${hi}`);
  }
  return {
    type: "numeric_range",
    low: lo,
    high: hi,
    low_inclusive: lowInclusive,
    high_inclusive: highInclusive,
  };
}

export function numericExclude(values: Iterable<string>): FilterExpr {
  const parsed = [...values].map((v) => requireFiniteNumber(v, "excluded value"));
  if (parsed.length === 0) {
    throw new FilterBuildError("exclude at least one value");
  }
  return { type: "numeric_exclude", values: [...new Set(parsed)].sort() };
}

export function temporalOn(day: string): FilterExpr {
  return { type: "temporal_on", date: requireIsoDay(day, "date") };
}

export function temporalBefore(day: string): FilterExpr {
  return { type: "temporal_before", date: requireIsoDay(day, "date") };
}

export function temporalAfter(day: string): FilterExpr {
  return { type: "temporal_after", date: requireIsoDay(day, "date") };
}

export function temporalInterval(start: string, end: string): FilterExpr {
  const s = requireIsoDay(start, "interval start");
  const e = requireIsoDay(end, "interval end");
  if (s > e) {
    throw new FilterBuildError(`interval start ${s} is after end ${e}`);
  }
  return { type: "temporal_interval", start: s, end: e };
}

export function taxonomicUnder(ancestors: AncestorRef[], level?: TaxonomyLevel): FilterExpr {
  const byId = new Map(ancestors.map((a) => [a.external_id, a]));
  const distinct = [...byId.values()].sort((a, b) =>
    a.external_id < b.external_id ? -1 : a.external_id > b.external_id ? 1 : 0,
  );
  if (distinct.length === 0 || distinct.some((a) => !a.external_id)) {
    throw new FilterBuildError("select at least one place");
  }
  const expr: FilterExpr = { type: "taxonomic_under", ancestors: distinct };
  if (level) {
    expr.level = level;
  }
  return expr;
}

/** Stable JSON for payloads and equality checks: sorted keys, sorted sets. */
export function canonicalFilterJson(filters: FilterMap): string {
  const ordered: FilterMap = {};
  for (const key of Object.keys(filters).sort()) {
    ordered[key] = filters[key];
  }
  return JSON.stringify(ordered, (_key, value) => {
    if (value !== null && typeof value === "object" && !Array.isArray(value)) {
      const record = value as Record<string, unknown>;
      return Object.keys(record)
        .sort()
        .reduce<Record<string, unknown>>((acc, k) => ((acc[k] = record[k]), acc), {});
    }
    return value;
  });
}

export function filtersEqual(a: FilterMap, b: FilterMap): boolean {
  return canonicalFilterJson(a) === canonicalFilterJson(b);
}

/** Chip caption for one expression; mirrors the server's applied summary. */
export function describeExpr(expr: FilterExpr): string {
  switch (expr.type) {
    case "categorical_in":
      return `is one of: ${expr.values.join(", ")}`;
    case "numeric_cmp":
      return `${expr.op} ${expr.bound}`;
    case "numeric_range": {
      const left = expr.low_inclusive ? "[" : "(";
      const right = expr.high_inclusive ? "]" : ")";
      return `in ${left}${expr.low}, ${expr.high}${right}`;
    }
    case "numeric_exclude":
      return `excludes ${expr.values.join(", ")}`;
    case "temporal_on":
      return `on ${expr.date}`;
    case "temporal_before":
      return `before ${expr.date}`;
    case "temporal_after":
      return `after ${expr.date}`;
    case "temporal_interval":
      return `${expr.start} to ${expr.end}`;
    case "taxonomic_under": {
      const names = expr.ancestors.map((a) => a.label ?? a.external_id).join(", ");
      return expr.level ? `under ${names} (${expr.level} level)` : `under ${names}`;
    }
  }
}
