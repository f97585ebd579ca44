// Browser wiring: the URL query string is the single source of truth. Every
// interaction produces a new state, pushes it to the URL, and re-renders
// from there; reloads and back/forward reproduce the identical view. At
// most one request is in flight per facet change; newer changes abort older
// requests.

import { ApiError, SearchClient, Vocabulary } from "./api.js";
import {
  FacetState,
  emptyState,
  facetToQuery,
  parseQuery,
  toggleAttribute,
  toggleValue,
} from "./facets.js";
import {
  cardFacets,
  renderError,
  renderFacetPanel,
  renderPagination,
  renderPostGrid,
  renderTripletGrid,
} from "./render.js";

const client = new SearchClient("");
let vocab: Vocabulary | null = null;
let inflight: AbortController | null = null;

function currentState(): FacetState {
  return parseQuery(window.location.search.replace(/^\?/, ""));
}

function pushState(state: FacetState): void {
  const query = facetToQuery(state);
  const url = query ? `?${query}` : window.location.pathname;
  history.pushState(null, "", url);
  void refresh();
}

async function refresh(): Promise<void> {
  const state = currentState();
  const grid = document.getElementById("grid")!;
  const panel = document.getElementById("facet-panel")!;
  const pager = document.getElementById("pagination")!;
  const modeToggle = document.getElementById("mode-toggle")!;

  if (vocab === null) {
    vocab = await client.vocabulary();
  }
  panel.innerHTML = renderFacetPanel(vocab, state);
  for (const button of modeToggle.querySelectorAll<HTMLButtonElement>("button[data-mode]")) {
    button.classList.toggle("active", button.dataset.mode === state.mode);
  }

  inflight?.abort();
  const controller = new AbortController();
  inflight = controller;
  grid.classList.add("loading");
  try {
    if (state.mode === "posts") {
      const page = await client.posts(state, controller.signal);
      grid.innerHTML = renderPostGrid(page);
      pager.innerHTML = renderPagination(page);
    } else {
      const page = await client.triplets(state, controller.signal);
      grid.innerHTML = renderTripletGrid(page);
      pager.innerHTML = renderPagination(page);
    }
  } catch (err) {
    if (controller.signal.aborted) return;
    if (err instanceof ApiError) {
      grid.innerHTML = renderError(err.code, err.message);
    } else {
      grid.innerHTML = renderError("network_error", String(err));
    }
    pager.innerHTML = "";
  } finally {
    grid.classList.remove("loading");
  }
}

function wireEvents(): void {
  const panel = document.getElementById("facet-panel")!;
  const grid = document.getElementById("grid")!;
  const pager = document.getElementById("pagination")!;
  const modeToggle = document.getElementById("mode-toggle")!;

  panel.addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const state = currentState();
    if (input.dataset.facet === "attr" && input.dataset.type) {
      pushState(toggleAttribute(state, input.dataset.type, input.dataset.value!));
    } else if (input.dataset.facet) {
      const facetKey = {
        occasion: "occasions",
        gender: "genders",
        category: "categories",
      }[input.dataset.facet] as "occasions" | "genders" | "categories" | undefined;
      if (facetKey) pushState(toggleValue(state, facetKey, input.dataset.value!));
    } else if (input.dataset.meta) {
      const next = { ...state, offset: 0 };
      const raw = input.value.trim();
      switch (input.dataset.meta) {
        case "hashtag":
          next.hashtags = raw ? [raw.toLowerCase().replace(/^#/, "")] : [];
          break;
        case "location":
          next.locations = raw ? [raw] : [];
          break;
        case "min_likes":
          next.minLikes = raw ? Number.parseInt(raw, 10) : undefined;
          break;
        case "min_comments":
          next.minComments = raw ? Number.parseInt(raw, 10) : undefined;
          break;
      }
      pushState(next);
    }
  });

  grid.addEventListener("click", (event) => {
    const card = (event.target as HTMLElement).closest<HTMLElement>(".triplet-card");
    if (!card) return;
    pushState(
      cardFacets({
        occasion: card.dataset.occasion!,
        gender: card.dataset.gender!,
        category: card.dataset.category!,
      }),
    );
  });

  pager.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLButtonElement>("button[data-page]");
    if (!button || button.disabled) return;
    const state = currentState();
    const delta = button.dataset.page === "next" ? state.limit : -state.limit;
    pushState({ ...state, offset: Math.max(0, state.offset + delta) });
  });

  modeToggle.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest<HTMLButtonElement>("button[data-mode]");
    if (!button) return;
    const state = currentState();
    const mode = button.dataset.mode === "posts" ? "posts" : "triplets";
    if (mode !== state.mode) {
      pushState({ ...state, mode, offset: 0 });
    }
  });

  document.getElementById("clear-facets")!.addEventListener("click", () => {
    pushState(emptyState(currentState().mode));
  });

  window.addEventListener("popstate", () => void refresh());
}

wireEvents();
void refresh();
