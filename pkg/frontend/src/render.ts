/**
 * DOM rendering for cluster cards, the ranked results grid, and banners.
 *
 * Rendering never reorders or filters what the API returned: display order
 * equals response order.
 */

import type { ClusterCard, RankedItem } from "./api.js";
import { makeTile } from "./placeholder.js";
import type { UiSessionState } from "./state.js";

export interface RenderCallbacks {
  onClusterClick: (clusterId: number) => void;
}

export function renderClusterCards(
  container: HTMLElement,
  state: UiSessionState,
  callbacks: RenderCallbacks,
  imageUrl: (index: number) => string | null = () => null,
): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  if (state.k === 1) {
    const hint = doc.createElement("p");
    hint.className = "hint unambiguous-hint";
    hint.textContent =
      "Only one sense cluster was found; this query appears unambiguous.";
    container.appendChild(hint);
  }
  for (const cluster of state.clusters) {
    container.appendChild(
      renderCard(doc, cluster, state, callbacks, imageUrl),
    );
  }
}

function renderCard(
  doc: Document,
  cluster: ClusterCard,
  state: UiSessionState,
  callbacks: RenderCallbacks,
  imageUrl: (index: number) => string | null,
): HTMLElement {
  const card = doc.createElement("div");
  card.className = "cluster-card";
  card.dataset.clusterId = String(cluster.id);
  const selected = state.selection.has(cluster.id);
  if (selected) card.classList.add("selected");

  const header = doc.createElement("label");
  header.className = "card-header";
  const input = doc.createElement("input");
  input.type = state.mode === "single" ? "radio" : "checkbox";
  input.name = "cluster-selection";
  input.value = String(cluster.id);
  input.checked = selected;
  input.addEventListener("change", () => callbacks.onClusterClick(cluster.id));
  header.appendChild(input);
  const title = doc.createElement("span");
  title.textContent = `Cluster ${cluster.id} (${cluster.size} neighbors)`;
  header.appendChild(title);
  card.appendChild(header);

  const strip = doc.createElement("div");
  strip.className = "preview-strip";
  for (const preview of cluster.previews) {
    const tile = makeTile(doc, preview.index, imageUrl(preview.index));
    tile.title = `item ${preview.index} · distance ${preview.distance.toFixed(3)}`;
    strip.appendChild(tile);
  }
  card.appendChild(strip);
  return card;
}

export function renderResults(
  grid: HTMLElement,
  state: UiSessionState,
  imageUrl: (index: number) => string | null = () => null,
): void {
  const doc = grid.ownerDocument;
  grid.replaceChildren();
  for (const item of state.items) {
    grid.appendChild(renderResultCell(doc, item, imageUrl));
  }
}

function renderResultCell(
  doc: Document,
  item: RankedItem,
  imageUrl: (index: number) => string | null,
): HTMLElement {
  const cell = doc.createElement("figure");
  cell.className = "result-cell";
  cell.dataset.index = String(item.index);
  cell.appendChild(makeTile(doc, item.index, imageUrl(item.index)));
  const caption = doc.createElement("figcaption");
  caption.textContent = `δ̃ ${item.delta_tilde.toFixed(3)}`;
  caption.title = `delta ${item.delta.toFixed(4)} · sigma ${item.sigma.toFixed(4)}`;
  cell.appendChild(caption);
  return cell;
}

export function renderNotice(container: HTMLElement, message: string | null): void {
  container.replaceChildren();
  if (message === null) return;
  const note = container.ownerDocument.createElement("p");
  note.className = "notice";
  note.textContent = message;
  container.appendChild(note);
}

export function renderError(
  container: HTMLElement,
  message: string | null,
  onRetry: (() => void) | null = null,
): void {
  container.replaceChildren();
  if (message === null) return;
  const doc = container.ownerDocument;
  const banner = doc.createElement("div");
  banner.className = "error-banner";
  const text = doc.createElement("span");
  text.textContent = message;
  banner.appendChild(text);
  if (onRetry !== null) {
    const button = doc.createElement("button");
    button.className = "retry-button";
    button.textContent = "Retry";
    button.addEventListener("click", onRetry);
    banner.appendChild(button);
  }
  container.appendChild(banner);
}

export function renderPageInfo(container: HTMLElement, state: UiSessionState): void {
  if (state.items.length === 0) {
    container.textContent = "";
    return;
  }
  const first = state.offset + 1;
  const last = state.offset + state.items.length;
  container.textContent = `${first}–${last} of ${state.total}`;
}
