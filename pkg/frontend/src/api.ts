// Typed client for the knowledge-base search API.

import { FacetState, facetToQuery } from "./facets.js";

export interface Vocabulary {
  version: string;
  occasions: string[];
  categories: string[];
  attributes: { name: string; values: string[] }[];
}

export interface Provenance {
  post_id: string;
  region_id: string;
}

export interface TripletResult {
  occasion: string;
  gender: string;
  category: string;
  count: number;
  samples: Provenance[];
}

export interface TripletInstance {
  occasion: string;
  gender: string;
  category: string;
  attribute_values: Record<string, string>;
  region_id: string;
}

export interface PostResult {
  post_id: string;
  caption: string;
  hashtags: string[];
  timestamp: number;
  location: string | null;
  likes: number;
  comments: number;
  image_width: number;
  image_height: number;
  triplets: TripletInstance[];
}

export interface Page<T> {
  results: T[];
  total: number;
  offset: number;
  limit: number;
}

export interface ApiErrorBody {
  error: string;
  message: string;
  facet?: string;
  value?: string;
  valid_values?: string[];
}

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message ?? body.error);
    this.code = body.error;
    this.status = status;
    this.body = body;
  }
}

/** The API query string for a state: everything except the UI-only mode key. */
export function apiQuery(state: FacetState): string {
  const params = new URLSearchParams(facetToQuery(state));
  params.delete("mode");
  return params.toString();
}

export function apiPath(state: FacetState): string {
  const query = apiQuery(state);
  const endpoint = state.mode === "posts" ? "/api/posts" : "/api/triplets";
  return query ? `${endpoint}?${query}` : endpoint;
}

type FetchLike = (input: string, init?: { signal?: AbortSignal }) => Promise<Response>;

export class SearchClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, signal?: AbortSignal): Promise<T> {
    const response = await this.fetchImpl(this.base + path, { signal });
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  vocabulary(signal?: AbortSignal): Promise<Vocabulary> {
    return this.request<Vocabulary>("/api/vocab", signal);
  }

  health(signal?: AbortSignal): Promise<{ status: string; instances: number }> {
    return this.request("/api/health", signal);
  }

  triplets(state: FacetState, signal?: AbortSignal): Promise<Page<TripletResult>> {
    return this.request<Page<TripletResult>>(apiPath({ ...state, mode: "triplets" }), signal);
  }

  posts(state: FacetState, signal?: AbortSignal): Promise<Page<PostResult>> {
    return this.request<Page<PostResult>>(apiPath({ ...state, mode: "posts" }), signal);
  }
}
