/**
 * Application wiring: query form, cluster selection, gamma slider, paging.
 */

import { ApiClient, ApiError } from "./api.js";
import {
  applyFeedbackResponse,
  applyQueryResponse,
  DEFAULT_LIMIT,
  hasNextPage,
  hasPrevPage,
  initialState,
  nextRequestSeq,
  selectionList,
  setMode,
  toggleCluster,
  type FeedbackMode,
} from "./state.js";
import {
  renderClusterCards,
  renderError,
  renderNotice,
  renderPageInfo,
  renderResults,
} from "./render.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing element #${id}`);
  return node as T;
}

const api = new ApiClient(
  new URLSearchParams(location.search).get("api") ?? "",
);
const state = initialState();

const clustersEl = el<HTMLElement>("clusters");
const resultsEl = el<HTMLElement>("results");
const noticeEl = el<HTMLElement>("notice");
const errorEl = el<HTMLElement>("error");
const pageInfoEl = el<HTMLElement>("page-info");
const paramsEl = el<HTMLElement>("session-params");
const gammaSlider = el<HTMLInputElement>("gamma");
const gammaValue = el<HTMLElement>("gamma-value");
const prevButton = el<HTMLButtonElement>("prev-page");
const nextButton = el<HTMLButtonElement>("next-page");

function imageUrl(index: number): string {
  return api.imageUrl(index);
}

function describeError(err: unknown): string {
  if (err instanceof ApiError) return `Service error ${err.status}: ${err.message}`;
  return `Request failed: ${String(err)}`;
}

function refreshClusterCards(): void {
  renderClusterCards(clustersEl, state, { onClusterClick: handleClusterClick }, imageUrl);
}

function refreshSessionParams(): void {
  if (state.params === null) {
    paramsEl.textContent = "";
    return;
  }
  const { m, eta, r } = state.params;
  paramsEl.textContent = `m=${m} · eta=${eta.toFixed(3)} · r=${r}`;
}

function refreshPager(): void {
  prevButton.disabled = !hasPrevPage(state);
  nextButton.disabled = !hasNextPage(state);
  renderPageInfo(pageInfoEl, state);
}

async function startQuery(body: { item_index?: number; vector?: number[] }) {
  renderError(errorEl, null);
  try {
    const res = await api.query(body);
    applyQueryResponse(state, res);
    refreshClusterCards();
    refreshSessionParams();
    renderNotice(noticeEl, null);
    renderResults(resultsEl, state, imageUrl);
    refreshPager();
  } catch (err) {
    // surface verbatim with a retry affordance; no state change
    renderError(errorEl, describeError(err), () => void startQuery(body));
  }
}

async function refine(offset: number): Promise<void> {
  if (state.sessionId === null) return;
  const selected = selectionList(state);
  const seq = nextRequestSeq(state);
  renderError(errorEl, null);
  try {
    const res = await api.feedback(state.sessionId, {
      selected,
      offset,
      limit: state.limit,
      gamma: state.gamma,
    });
    if (!applyFeedbackResponse(state, seq, res.offset, res.total, res.items)) {
      return; // stale response; a newer request is in flight or applied
    }
    renderResults(resultsEl, state, imageUrl);
    renderNotice(
      noticeEl,
      selected.length === 0
        ? "No cluster selected: showing the baseline ranking without refinement."
        : null,
    );
    refreshPager();
  } catch (err) {
    renderError(errorEl, describeError(err), () => void refine(offset));
  }
}

function handleClusterClick(clusterId: number): void {
  toggleCluster(state, clusterId);
  refreshClusterCards();
  void refine(0);
}

el<HTMLFormElement>("query-form").addEventListener("submit", (event) => {
  event.preventDefault();
  const raw = el<HTMLInputElement>("item-index").value.trim();
  const index = Number.parseInt(raw, 10);
  if (Number.isNaN(index)) {
    renderError(errorEl, "Enter a database item index to query.");
    return;
  }
  void startQuery({ item_index: index });
});

el<HTMLInputElement>("vector-file").addEventListener("change", async (event) => {
  const input = event.target as HTMLInputElement;
  const file = input.files?.[0];
  if (file === undefined) return;
  try {
    const vector = JSON.parse(await file.text()) as number[];
    void startQuery({ vector });
  } catch {
    renderError(errorEl, `Could not parse ${file.name} as a JSON vector.`);
  }
});

for (const mode of ["single", "multi"] as FeedbackMode[]) {
  el<HTMLInputElement>(`mode-${mode}`).addEventListener("change", () => {
    setMode(state, mode);
    refreshClusterCards();
    void refine(0);
  });
}

gammaSlider.addEventListener("input", () => {
  gammaValue.textContent = Number(gammaSlider.value).toFixed(1);
});
gammaSlider.addEventListener("change", () => {
  state.gamma = Number(gammaSlider.value);
  void refine(0); // same selection, new scores
});

prevButton.addEventListener("click", () => {
  void refine(Math.max(0, state.offset - state.limit));
});
nextButton.addEventListener("click", () => {
  void refine(state.offset + state.limit);
});

state.limit = DEFAULT_LIMIT;
void api.health().then(
  (info) => {
    el<HTMLElement>("dataset-info").textContent =
      `${info.items} items · ${info.dim} dimensions`;
  },
  (err) => renderError(errorEl, describeError(err)),
);
