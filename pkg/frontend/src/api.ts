/**
 * Typed client for the search service.
 *
 * Filter requests go through a superseding slot: starting a new one aborts
 * the in-flight request, and a stale response that somehow completes is
 * dropped by sequence number, so the table never regresses to older state.
 */

import type { FilterMap } from "./filters.js";
import type {
  CandidatesResponse,
  ComparisonListEntry,
  ComparisonPayload,
  FacetsResponse,
  FilterResponse,
  LevelsResponse,
  SaveResponse,
  SavedResponse,
  TaxonomyLevel,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "error";
  let message = `${response.status} ${response.statusText}`;
  let detail: Record<string, unknown> = {};
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
    detail = body.detail ?? {};
  } catch {
    // non-JSON error body; keep the HTTP line
  }
  throw new ApiRequestError(response.status, code, message, detail);
}

export class ApiClient {
  private filterAbort: AbortController | null = null;
  private filterSeq = 0;

  constructor(public baseUrl: string = "") {}

  private async get<T>(path: string): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`);
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as T;
  }

  async listComparisons(): Promise<ComparisonListEntry[]> {
    const body = await this.get<{ comparisons: ComparisonListEntry[] }>("/comparisons");
    return body.comparisons;
  }

  comparison(id: string): Promise<ComparisonPayload> {
    return this.get<ComparisonPayload>(`/comparisons/${encodeURIComponent(id)}`);
  }

  facets(id: string): Promise<FacetsResponse> {
    return this.get<FacetsResponse>(`/comparisons/${encodeURIComponent(id)}/facets`);
  }

  candidates(id: string, propertyId: string, prefix: string): Promise<CandidatesResponse> {
    const query = prefix ? `?prefix=${encodeURIComponent(prefix)}` : "";
    return this.get<CandidatesResponse>(
      `/comparisons/${encodeURIComponent(id)}/facets/${encodeURIComponent(propertyId)}/candidates${query}`,
    );
  }

  levelValues(id: string, propertyId: string, level: TaxonomyLevel): Promise<LevelsResponse> {
    return this.get<LevelsResponse>(
      `/comparisons/${encodeURIComponent(id)}/facets/${encodeURIComponent(propertyId)}/levels/${level}`,
    );
  }

  saved(permalinkId: string): Promise<SavedResponse> {
    return this.get<SavedResponse>(`/saved/${encodeURIComponent(permalinkId)}`);
  }

  /**
   * Apply filters; a newer call supersedes an older in-flight one. Returns
   * null when this request was superseded (the caller just drops it).
   */
  async applyFilters(id: string, filters: FilterMap): Promise<FilterResponse | null> {
    this.filterAbort?.abort();
    const abort = new AbortController();
    this.filterAbort = abort;
    const seq = ++this.filterSeq;
    let response: Response;
    try {
      response = await fetch(`${this.baseUrl}/comparisons/${encodeURIComponent(id)}/filter`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ filters }),
        signal: abort.signal,
      });
    } catch (error) {
      if (abort.signal.aborted) {
        return null;
      }
      throw error;
    }
    if (seq !== this.filterSeq) {
      return null; // a newer request already owns the view
    }
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as FilterResponse;
  }

  async save(id: string, filters: FilterMap, survivingIds: string[]): Promise<SaveResponse> {
    const response = await fetch(`${this.baseUrl}/comparisons/${encodeURIComponent(id)}/save`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ filters, surviving_ids: survivingIds }),
    });
    if (!response.ok) {
      await parseError(response);
    }
    return (await response.json()) as SaveResponse;
  }
}
