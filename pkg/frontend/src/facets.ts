// Facet state for the explorer: what the user has selected, which mode they
// are in, and where they are in the result pages. The URL query string is
// the single source of truth; serialization must round-trip losslessly.

export type Mode = "triplets" | "posts";

export const DEFAULT_LIMIT = 24;

export interface FacetState {
  mode: Mode;
  occasions: string[];
  genders: string[];
  categories: string[];
  /** attribute type -> selected values (types kept in sorted order) */
  attributes: Record<string, string[]>;
  hashtags: string[];
  locations: string[];
  timeFrom?: number;
  timeTo?: number;
  minLikes?: number;
  minComments?: number;
  offset: number;
  limit: number;
}

export function emptyState(mode: Mode = "triplets"): FacetState {
  return {
    mode,
    occasions: [],
    genders: [],
    categories: [],
    attributes: {},
    hashtags: [],
    locations: [],
    offset: 0,
    limit: DEFAULT_LIMIT,
  };
}

function pushAll(params: URLSearchParams, key: string, values: string[]): void {
  for (const value of values) {
    params.append(key, value);
  }
}

/**
 * Deterministic, order-stable query-string encoding. Facet keys appear in a
 * fixed order; attribute types are emitted in sorted order; defaults
 * (mode=triplets, offset=0, limit=24) are omitted so an empty state encodes
 * to the empty string.
 */
export function facetToQuery(state: FacetState): string {
  const params = new URLSearchParams();
  if (state.mode !== "triplets") {
    params.set("mode", state.mode);
  }
  pushAll(params, "occasion", state.occasions);
  pushAll(params, "gender", state.genders);
  pushAll(params, "category", state.categories);
  for (const type of Object.keys(state.attributes).sort()) {
    for (const value of state.attributes[type]) {
      params.append("attr", `${type}:${value}`);
    }
  }
  pushAll(params, "hashtag", state.hashtags);
  pushAll(params, "location", state.locations);
  if (state.timeFrom !== undefined) params.set("time_from", String(state.timeFrom));
  if (state.timeTo !== undefined) params.set("time_to", String(state.timeTo));
  if (state.minLikes !== undefined) params.set("min_likes", String(state.minLikes));
  if (state.minComments !== undefined) params.set("min_comments", String(state.minComments));
  if (state.offset !== 0) params.set("offset", String(state.offset));
  if (state.limit !== DEFAULT_LIMIT) params.set("limit", String(state.limit));
  return params.toString();
}

function intOrUndefined(raw: string | null): number | undefined {
  if (raw === null || raw === "") return undefined;
  const value = Number.parseInt(raw, 10);
  return Number.isNaN(value) ? undefined : value;
}

/** Inverse of facetToQuery: parse(facetToQuery(s)) equals s. */
export function parseQuery(query: string): FacetState {
  const params = new URLSearchParams(query);
  const state = emptyState(params.get("mode") === "posts" ? "posts" : "triplets");
  state.occasions = params.getAll("occasion");
  state.genders = params.getAll("gender");
  state.categories = params.getAll("category");
  for (const raw of params.getAll("attr")) {
    const split = raw.indexOf(":");
    if (split <= 0) continue;
    const type = raw.slice(0, split);
    const value = raw.slice(split + 1);
    (state.attributes[type] ??= []).push(value);
  }
  // canonical form keeps attribute types sorted
  state.attributes = Object.fromEntries(
    Object.keys(state.attributes)
      .sort()
      .map((k) => [k, state.attributes[k]]),
  );
  state.hashtags = params.getAll("hashtag");
  state.locations = params.getAll("location");
  state.timeFrom = intOrUndefined(params.get("time_from"));
  state.timeTo = intOrUndefined(params.get("time_to"));
  state.minLikes = intOrUndefined(params.get("min_likes"));
  state.minComments = intOrUndefined(params.get("min_comments"));
  state.offset = intOrUndefined(params.get("offset")) ?? 0;
  state.limit = intOrUndefined(params.get("limit")) ?? DEFAULT_LIMIT;
  return state;
}

/** Toggle one value inside a multi-valued facet list, returning a new state. */
export function toggleValue(state: FacetState, facet: "occasions" | "genders" | "categories" | "hashtags" | "locations", value: string): FacetState {
  const current = state[facet];
  const next = current.includes(value)
    ? current.filter((v) => v !== value)
    : [...current, value];
  return { ...state, [facet]: next, offset: 0 };
}

export function toggleAttribute(state: FacetState, type: string, value: string): FacetState {
  const attributes: Record<string, string[]> = {};
  for (const key of Object.keys(state.attributes)) {
    attributes[key] = [...state.attributes[key]];
  }
  const current = attributes[type] ?? [];
  const next = current.includes(value)
    ? current.filter((v) => v !== value)
    : [...current, value];
  if (next.length > 0) {
    attributes[type] = next;
  } else {
    delete attributes[type];
  }
  const sorted = Object.fromEntries(
    Object.keys(attributes)
      .sort()
      .map((k) => [k, attributes[k]]),
  );
  return { ...state, attributes: sorted, offset: 0 };
}
