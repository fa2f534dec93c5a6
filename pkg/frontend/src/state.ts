/**
 * UI state and its pure transitions. The controller in main.ts applies
 * these to a single ViewState instance; nothing here touches the DOM or
 * the network, which keeps every transition unit-testable.
 */

import type { Side, Summary } from "./types.js";

export interface ViewState {
  sessionId: string | null;
  /** pid of the problem currently shown, or null before the first load. */
  currentPid: string | null;
  side: Side;
  /** first label clicked while arming a merge, if any. */
  mergeArm: string | null;
  /** zero-round verdicts by pid, cached once computed. */
  zeroRound: Map<string, boolean>;
  /** last error surfaced to the user, or null. */
  error: string | null;
  busy: boolean;
}

export function initialState(): ViewState {
  return {
    sessionId: null,
    currentPid: null,
    side: "white",
    mergeArm: null,
    zeroRound: new Map(),
    error: null,
    busy: false,
  };
}

export type MergeClick =
  | { kind: "armed"; label: string }
  | { kind: "disarmed" }
  | { kind: "merge"; a: string; b: string };

/**
 * Handle a click on a diagram node. First click arms the merge; clicking
 * the armed label again disarms; a second distinct label requests the
 * merge (stronger label first is the server's concern, we pass click order).
 */
export function clickLabel(state: ViewState, label: string): MergeClick {
  if (state.mergeArm === null) {
    state.mergeArm = label;
    return { kind: "armed", label };
  }
  if (state.mergeArm === label) {
    state.mergeArm = null;
    return { kind: "disarmed" };
  }
  const a = state.mergeArm;
  state.mergeArm = null;
  return { kind: "merge", a, b: label };
}

export function selectProblem(state: ViewState, pid: string): void {
  state.currentPid = pid;
  state.mergeArm = null;
  state.error = null;
}

export function toggleSide(state: ViewState): Side {
  state.side = state.side === "white" ? "black" : "white";
  state.mergeArm = null;
  return state.side;
}

export function setError(state: ViewState, message: string | null): void {
  state.error = message;
}

export function recordZeroRound(
  state: ViewState,
  pid: string,
  solvable: boolean,
): void {
  state.zeroRound.set(pid, solvable);
}

/** Root-to-node pid path in a provenance tree, for breadcrumb display. */
export function pathToRoot(
  nodes: readonly Summary[],
  pid: string,
): string[] {
  const parent = new Map(nodes.map((n) => [n.pid, n.parent]));
  const path: string[] = [];
  let cur: string | null = pid;
  while (cur !== null && path.length <= nodes.length) {
    path.push(cur);
    cur = parent.get(cur) ?? null;
  }
  return path.reverse();
}
