/**
 * Session state and its transitions, kept free of DOM concerns.
 *
 * Selection semantics: "single" mode behaves like radio buttons (the last
 * clicked cluster replaces the selection), "multi" like checkboxes. Each
 * feedback request gets a sequence number; responses older than the latest
 * issued request are discarded so a slow page can never overwrite a newer
 * one.
 */

import type { ClusterCard, QueryResponse, RankedItem } from "./api.js";

export type FeedbackMode = "single" | "multi";

export interface UiSessionState {
  sessionId: string | null;
  k: number;
  clusters: ClusterCard[];
  params: QueryResponse["params"] | null;
  mode: FeedbackMode;
  selection: Set<number>;
  gamma: number;
  offset: number;
  limit: number;
  total: number;
  items: RankedItem[];
  /** sequence number of the newest issued feedback request */
  requestSeq: number;
  /** sequence number of the newest applied feedback response */
  appliedSeq: number;
}

export const DEFAULT_LIMIT = 24;

export function initialState(): UiSessionState {
  return {
    sessionId: null,
    k: 0,
    clusters: [],
    params: null,
    mode: "single",
    selection: new Set(),
    gamma: 1.0,
    offset: 0,
    limit: DEFAULT_LIMIT,
    total: 0,
    items: [],
    requestSeq: 0,
    appliedSeq: 0,
  };
}

/** Install a fresh query response; selection and results reset. */
export function applyQueryResponse(state: UiSessionState, res: QueryResponse): void {
  state.sessionId = res.session_id;
  state.k = res.k;
  state.clusters = res.clusters;
  state.params = res.params;
  state.selection = new Set();
  state.offset = 0;
  state.total = 0;
  state.items = [];
}

/** Flip a cluster in or out of the selection per the active mode. */
export function toggleCluster(state: UiSessionState, clusterId: number): void {
  if (state.mode === "single") {
    state.selection = new Set([clusterId]);
    return;
  }
  if (state.selection.has(clusterId)) {
    state.selection.delete(clusterId);
  } else {
    state.selection.add(clusterId);
  }
}

/** Switching to single mode keeps at most the lowest selected cluster id. */
export function setMode(state: UiSessionState, mode: FeedbackMode): void {
  state.mode = mode;
  if (mode === "single" && state.selection.size > 1) {
    const lowest = Math.min(...state.selection);
    state.selection = new Set([lowest]);
  }
}

export function selectionList(state: UiSessionState): number[] {
  return [...state.selection].sort((a, b) => a - b);
}

/** Reserve a sequence number for an outgoing feedback request. */
export function nextRequestSeq(state: UiSessionState): number {
  state.requestSeq += 1;
  return state.requestSeq;
}

/**
 * Apply a feedback response unless a newer request has been issued since.
 * Returns false when the response is stale and was dropped.
 */
export function applyFeedbackResponse(
  state: UiSessionState,
  seq: number,
  offset: number,
  total: number,
  items: RankedItem[],
): boolean {
  if (seq < state.requestSeq || seq <= state.appliedSeq) {
    return false;
  }
  state.appliedSeq = seq;
  state.offset = offset;
  state.total = total;
  state.items = items;
  return true;
}

export function hasNextPage(state: UiSessionState): boolean {
  return state.offset + state.items.length < state.total;
}

export function hasPrevPage(state: UiSessionState): boolean {
  return state.offset > 0;
}
