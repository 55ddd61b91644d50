/** Payload types of the search service JSON API (see ../docs/formats.md). */

export type FacetKind = "categorical" | "numeric" | "temporal" | "taxonomic";

export type TaxonomyLevel = "continent" | "country" | "region" | "city" | "leaf";

export const LEVELS: TaxonomyLevel[] = ["continent", "country", "region", "city", "leaf"];

export interface ComparisonListEntry {
  id: string;
  label: string;
  kind: "comparison" | "saved";
  row_count: number;
}

export interface ValuePayload {
  type: "text" | "quantity" | "date" | "entity";
  display: string;
  [extra: string]: unknown;
}

export interface ComparisonPayload {
  id: string;
  label: string;
  columns: { property_id: string; label: string }[];
  contribution_ids: string[];
  tombstoned: string[];
  cells: Record<string, Record<string, ValuePayload[]>>;
  contributions: Record<
    string,
    { label: string; paper_id: string; paper_title: string | null; year: number | null }
  >;
}

export interface FacetPayload {
  property_id: string;
  label: string;
  kind: FacetKind;
  degraded: boolean;
  values?: { value: string; count: number }[];
  minimum?: string;
  maximum?: string;
  count?: number;
  units?: string[];
  mixed_units?: boolean;
  earliest?: string;
  latest?: string;
  leaves?: { label: string; external_id: string | null; graph: string | null; count: number }[];
  levels?: TaxonomyLevel[];
}

export interface FacetsResponse {
  comparison_id: string;
  degraded: boolean;
  facets: FacetPayload[];
}

export interface CandidatesResponse {
  values: { value: string; count: number }[];
  truncated: boolean;
  degraded: boolean;
}

export interface LevelBucket {
  label: string;
  external_id: string | null;
  count: number;
}

export interface LevelsResponse {
  level: TaxonomyLevel;
  degraded: boolean;
  buckets: LevelBucket[];
}

export interface AppliedSummary {
  property_id: string;
  label: string;
  kind: FacetKind;
  level: string | null;
  descriptions: string[];
}

export interface FilterResponse {
  comparison_id: string;
  surviving_ids: string[];
  total: number;
  surviving: number;
  degraded: boolean;
  applied: AppliedSummary[];
}

export interface SaveResponse {
  permalink_id: string;
  url: string;
  comparison_id: string;
  created_at: string;
}

export interface SavedResponse {
  permalink_id: string;
  comparison_id: string;
  snapshot_revision: number;
  created_at: string;
  filters: Record<string, unknown[]>;
  comparison: ComparisonPayload;
}

export interface ApiError {
  code: string;
  message: string;
  detail: Record<string, unknown>;
}
