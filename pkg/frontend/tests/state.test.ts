import { describe, expect, it } from "vitest";
import {
  clickLabel,
  initialState,
  pathToRoot,
  recordZeroRound,
  selectProblem,
  toggleSide,
} from "../src/state.js";
import type { Summary } from "../src/types.js";

describe("clickLabel", () => {
  it("arms on first click, disarms on repeat, merges on second label", () => {
    const s = initialState();
    expect(clickLabel(s, "A_1")).toEqual({ kind: "armed", label: "A_1" });
    expect(s.mergeArm).toBe("A_1");
    expect(clickLabel(s, "A_1")).toEqual({ kind: "disarmed" });
    expect(s.mergeArm).toBeNull();
    clickLabel(s, "A_1");
    expect(clickLabel(s, "B_1")).toEqual({
      kind: "merge",
      a: "A_1",
      b: "B_1",
    });
    expect(s.mergeArm).toBeNull();
  });
});

describe("selection and side toggling", () => {
  it("selecting a problem clears the armed merge and any error", () => {
    const s = initialState();
    clickLabel(s, "A_1");
    s.error = "boom";
    selectProblem(s, "p2");
    expect(s.currentPid).toBe("p2");
    expect(s.mergeArm).toBeNull();
    expect(s.error).toBeNull();
  });

  it("toggleSide flips white/black and disarms", () => {
    const s = initialState();
    clickLabel(s, "A_1");
    expect(toggleSide(s)).toBe("black");
    expect(s.mergeArm).toBeNull();
    expect(toggleSide(s)).toBe("white");
  });
});

describe("zero-round cache", () => {
  it("records verdicts per pid", () => {
    const s = initialState();
    recordZeroRound(s, "p1", false);
    recordZeroRound(s, "p2", true);
    expect(s.zeroRound.get("p1")).toBe(false);
    expect(s.zeroRound.get("p2")).toBe(true);
  });
});

function summary(pid: string, parent: string | null): Summary {
  return {
    v: 1,
    pid,
    name: pid,
    op: parent === null ? "load" : "re",
    params: {},
    parent,
    hash: "0".repeat(64),
    alphabet_size: 1,
    white_configs: 1,
    black_configs: 1,
  };
}

describe("pathToRoot", () => {
  it("walks parents back to the root in order", () => {
    const nodes = [
      summary("p1", null),
      summary("p2", "p1"),
      summary("p3", "p2"),
      summary("p4", "p1"),
    ];
    expect(pathToRoot(nodes, "p3")).toEqual(["p1", "p2", "p3"]);
    expect(pathToRoot(nodes, "p4")).toEqual(["p1", "p4"]);
    expect(pathToRoot(nodes, "p1")).toEqual(["p1"]);
  });
});
