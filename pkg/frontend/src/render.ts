// Pure view builders: API responses in, HTML strings out. The grid never
// reorders API results, and every facet option list comes from the served
// vocabulary, never from constants baked into the client.

import { Page, PostResult, TripletResult, Vocabulary } from "./api.js";
import { FacetState, emptyState } from "./facets.js";

export const GENDERS = ["female", "male", "unknown"];

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** The facet state a triplet card navigates to: exactly the card's key, in
 * post mode, everything else reset. */
export function cardFacets(result: Pick<TripletResult, "occasion" | "gender" | "category">): FacetState {
  const state = emptyState("posts");
  state.occasions = [result.occasion];
  state.genders = [result.gender];
  state.categories = [result.category];
  return state;
}

export function thumbnailUrl(postId: string): string {
  return `/media/${postId}.jpg`;
}

export function renderTripletCard(result: TripletResult): string {
  const sample = result.samples[0];
  const thumbs = result.samples
    .slice(0, 4)
    .map(
      (s) =>
        `<img class="thumb" src="${esc(thumbnailUrl(s.post_id))}" alt="" ` +
        `onerror="this.classList.add('missing')">`,
    )
    .join("");
  return (
    `<article class="card triplet-card" data-occasion="${esc(result.occasion)}" ` +
    `data-gender="${esc(result.gender)}" data-category="${esc(result.category)}" ` +
    `data-count="${result.count}">` +
    `<div class="thumbs">${thumbs || '<div class="thumb missing"></div>'}</div>` +
    `<h3>&lt;${esc(result.occasion)}, ${esc(result.gender)}, ${esc(result.category)}&gt;</h3>` +
    `<p class="count">${result.count} instance${result.count === 1 ? "" : "s"}</p>` +
    (sample ? `<p class="sample">e.g. ${esc(sample.post_id)}</p>` : "") +
    `</article>`
  );
}

/** Cards in response order (the API already ranks by count descending). */
export function renderTripletGrid(page: Page<TripletResult>): string {
  if (page.results.length === 0) {
    return `<div class="empty-state">no triplets match the selected facets</div>`;
  }
  return page.results.map(renderTripletCard).join("\n");
}

export function renderPostCard(result: PostResult): string {
  const chips = result.triplets
    .map(
      (t) =>
        `<span class="chip">&lt;${esc(t.occasion)}, ${esc(t.gender)}, ` +
        `${esc(t.category)}&gt;</span>`,
    )
    .join("");
  const location = result.location ? `<span class="loc">${esc(result.location)}</span>` : "";
  return (
    `<article class="card post-card" data-post-id="${esc(result.post_id)}">` +
    `<img class="photo" src="${esc(thumbnailUrl(result.post_id))}" alt="" ` +
    `onerror="this.classList.add('missing')">` +
    `<div class="overlay"><span class="likes">♥ ${result.likes}</span>` +
    `<span class="comments">💬 ${result.comments}</span>${location}</div>` +
    `<p class="caption">${esc(result.caption)}</p>` +
    `<div class="chips">${chips}</div>` +
    `</article>`
  );
}

export function renderPostGrid(page: Page<PostResult>): string {
  if (page.results.length === 0) {
    return `<div class="empty-state">no posts match the selected facets</div>`;
  }
  return page.results.map(renderPostCard).join("\n");
}

export function renderError(code: string, message: string): string {
  return (
    `<div class="error-banner" data-code="${esc(code)}">` +
    `<strong>${esc(code)}</strong> ${esc(message)}</div>`
  );
}

function checkboxList(
  facet: string,
  values: readonly string[],
  selected: readonly string[],
): string {
  const items = values
    .map((value) => {
      const checked = selected.includes(value) ? " checked" : "";
      return (
        `<label><input type="checkbox" data-facet="${esc(facet)}" ` +
        `data-value="${esc(value)}"${checked}> ${esc(value)}</label>`
      );
    })
    .join("");
  return `<fieldset data-facet-group="${esc(facet)}"><legend>${esc(facet)}</legend>${items}</fieldset>`;
}

/** Facet panel: every option comes from the served vocabulary. */
export function renderFacetPanel(vocab: Vocabulary, state: FacetState): string {
  const attributeGroups = vocab.attributes
    .map((attr) => {
      const selected = state.attributes[attr.name] ?? [];
      const items = attr.values
        .map((value) => {
          const checked = selected.includes(value) ? " checked" : "";
          return (
            `<label><input type="checkbox" data-facet="attr" ` +
            `data-type="${esc(attr.name)}" data-value="${esc(value)}"${checked}> ` +
            `${esc(value)}</label>`
          );
        })
        .join("");
      return `<fieldset data-facet-group="attr:${esc(attr.name)}"><legend>${esc(attr.name)}</legend>${items}</fieldset>`;
    })
    .join("");
  return (
    checkboxList("occasion", vocab.occasions, state.occasions) +
    checkboxList("gender", GENDERS, state.genders) +
    checkboxList("category", vocab.categories, state.categories) +
    attributeGroups +
    `<fieldset data-facet-group="metadata"><legend>metadata</legend>` +
    `<label>hashtag <input type="text" data-meta="hashtag" value="${esc(state.hashtags[0] ?? "")}"></label>` +
    `<label>location <input type="text" data-meta="location" value="${esc(state.locations[0] ?? "")}"></label>` +
    `<label>min likes <input type="number" data-meta="min_likes" value="${state.minLikes ?? ""}"></label>` +
    `<label>min comments <input type="number" data-meta="min_comments" value="${state.minComments ?? ""}"></label>` +
    `</fieldset>`
  );
}

export function renderPagination(page: Page<unknown>): string {
  const shownFrom = page.total === 0 ? 0 : page.offset + 1;
  const shownTo = Math.min(page.offset + page.results.length, page.total);
  const prevDisabled = page.offset <= 0 ? " disabled" : "";
  const nextDisabled = page.offset + page.limit >= page.total ? " disabled" : "";
  return (
    `<button data-page="prev"${prevDisabled}>&larr; prev</button>` +
    `<span class="page-info">${shownFrom}&ndash;${shownTo} of ${page.total}</span>` +
    `<button data-page="next"${nextDisabled}>next &rarr;</button>`
  );
}
