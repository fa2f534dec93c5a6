// @vitest-environment happy-dom
import { describe, expect, it, vi } from "vitest";
import {
  renderDiagram,
  renderError,
  renderProblem,
  renderTree,
} from "../src/render.js";
import type { DiagramData, ProblemDetail, Summary, TreeData } from "../src/types.js";

const DETAIL: ProblemDetail = {
  v: 1,
  pid: "p1",
  name: "demo",
  op: "load",
  params: {},
  parent: null,
  hash: "cd".repeat(32),
  alphabet_size: 3,
  white_configs: 1,
  black_configs: 2,
  alphabet: ["A_1", "B_1", "A_2"],
  white: [[["A_1"], ["A_2", "B_1"], ["A_2", "B_1"]]],
  black: [[["A_1"], ["A_1"]], [["A_2"], ["B_1"]]],
  white_arity: 3,
  black_arity: 2,
  sets: null,
  text: "problem demo\n",
};

describe("renderProblem", () => {
  it("shows facts, per-color alphabet groups, and both constraints", () => {
    const node = renderProblem(document, DETAIL);
    const text = node.textContent ?? "";
    expect(text).toContain("demo");
    expect(text).toContain("3 labels");
    expect(text).toContain("white arity 3");
    expect(text).toContain(DETAIL.hash);
    const rows = node.querySelectorAll(".color-row");
    expect(rows).toHaveLength(2); // colors 1 and 2
    expect(rows[0]?.textContent).toContain("color 1");
    expect(rows[0]?.textContent).toContain("(2)");
    expect(node.querySelectorAll(".config")).toHaveLength(3);
    expect(node.textContent).toContain("A_1 [A_2,B_1] [A_2,B_1]");
  });
});

const DIAGRAM: DiagramData = {
  v: 1,
  side: "white",
  nodes: ["A_1", "B_1", "C_1"],
  edges: [
    ["A_1", "B_1"],
    ["B_1", "C_1"],
  ],
  equal_pairs: [],
  heuristic_pair: ["A_1", "B_1"],
};

describe("renderDiagram", () => {
  it("draws one clickable node per label and highlights the suggestion", () => {
    const clicks: string[] = [];
    const node = renderDiagram(document, DIAGRAM, null, {
      onLabelClick: (l) => clicks.push(l),
    });
    const groups = node.querySelectorAll("g.node");
    expect(groups).toHaveLength(3);
    expect(node.querySelectorAll(".node-heuristic")).toHaveLength(2);
    expect(node.querySelectorAll("line.edge")).toHaveLength(2);
    expect(node.querySelectorAll(".edge-heuristic")).toHaveLength(1);
    (groups[0] as SVGGElement).dispatchEvent(
      new MouseEvent("click", { bubbles: true }),
    );
    expect(clicks).toHaveLength(1);
    expect(DIAGRAM.nodes).toContain(clicks[0]);
    expect(node.textContent).toContain("suggested merge");
  });

  it("marks the armed label and switches the hint", () => {
    const node = renderDiagram(document, DIAGRAM, "B_1", {
      onLabelClick: vi.fn(),
    });
    const armed = node.querySelector(".node-armed");
    expect(armed?.getAttribute("data-label")).toBe("B_1");
    expect(node.textContent).toContain("merge armed: B_1");
  });
});

function summary(pid: string, parent: string | null, op: string): Summary {
  return {
    v: 1,
    pid,
    name: `prob-${pid}`,
    op,
    params: {},
    parent,
    hash: pid.repeat(32).slice(0, 64).padEnd(64, "0"),
    alphabet_size: 4,
    white_configs: 2,
    black_configs: 3,
  };
}

describe("renderTree", () => {
  it("indents by depth, badges ops and verdicts, and selects on click", () => {
    const tree: TreeData = {
      v: 1,
      session_id: "s1",
      nodes: [
        summary("p1", null, "load"),
        summary("p2", "p1", "re"),
        summary("p3", "p2", "merge"),
      ],
      edges: [
        { parent: "p1", child: "p2", op: "re" },
        { parent: "p2", child: "p3", op: "merge" },
      ],
    };
    const selected: string[] = [];
    const node = renderTree(
      document,
      tree,
      "p2",
      new Map([
        ["p1", false],
        ["p3", true],
      ]),
      { onSelect: (pid) => selected.push(pid) },
    );
    const items = [...node.querySelectorAll(".tree-node")] as HTMLElement[];
    expect(items).toHaveLength(3);
    expect(items[0]?.style.marginLeft).toBe("0rem");
    expect(items[2]?.style.marginLeft).toBe("3rem");
    expect(items[1]?.classList.contains("tree-node-current")).toBe(true);
    expect(items[0]?.textContent).toContain("UNSOLVABLE");
    expect(items[2]?.textContent).toContain("SOLVABLE");
    expect(items[1]?.textContent).not.toContain("SOLVABLE");
    expect(items[1]?.querySelector(".badge-op")?.textContent).toBe("re");
    // hashes shown truncated but full hash kept in the tooltip
    const code = items[0]?.querySelector("code.hash");
    expect(code?.textContent).toHaveLength(12);
    expect(code?.getAttribute("title")).toHaveLength(64);
    (items[2]?.querySelector("a.tree-name") as HTMLAnchorElement).click();
    expect(selected).toEqual(["p3"]);
  });
});

describe("renderError", () => {
  it("is hidden when there is no message and visible otherwise", () => {
    expect(
      renderError(document, null).classList.contains("error-banner-visible"),
    ).toBe(false);
    const box = renderError(document, "409 too_large: alphabet cap");
    expect(box.classList.contains("error-banner-visible")).toBe(true);
    expect(box.textContent).toContain("alphabet cap");
  });
});
