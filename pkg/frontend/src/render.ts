/**
 * DOM renderers. Each function builds a detached element from data and
 * callbacks; main.ts swaps them into the page. No fetching happens here.
 */

import { groupByColor, layoutDiagram } from "./layout.js";
import type { DiagramData, ProblemDetail, TreeData } from "./types.js";

const SVG = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  cls?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

function configText(config: string[][]): string {
  return config
    .map((group) => (group.length === 1 ? group[0]! : `[${group.join(",")}]`))
    .join(" ");
}

/** Problem panel: header facts, per-color alphabet, both constraints. */
export function renderProblem(
  doc: Document,
  detail: ProblemDetail,
): HTMLElement {
  const root = el(doc, "section", "problem");

  const head = el(doc, "div", "problem-head");
  head.append(
    el(doc, "h2", "", detail.name || "(unnamed problem)"),
    el(
      doc,
      "p",
      "problem-facts",
      `${detail.alphabet_size} labels · white arity ${detail.white_arity} · ` +
        `black arity ${detail.black_arity} · ${detail.white_configs} white / ` +
        `${detail.black_configs} black configurations`,
    ),
  );
  const hash = el(doc, "code", "hash", detail.hash);
  hash.title = "content hash of this snapshot";
  head.append(hash);
  root.append(head);

  const alpha = el(doc, "div", "alphabet");
  alpha.append(el(doc, "h3", "", "Alphabet"));
  for (const [color, labels] of groupByColor(detail.alphabet)) {
    const row = el(doc, "div", "color-row");
    row.append(
      el(doc, "span", "color-tag", color === "" ? "—" : `color ${color}`),
      el(
        doc,
        "span",
        "color-labels",
        `${labels.join("  ")}  (${labels.length})`,
      ),
    );
    alpha.append(row);
  }
  root.append(alpha);

  for (const side of ["white", "black"] as const) {
    const sec = el(doc, "div", `constraint constraint-${side}`);
    sec.append(el(doc, "h3", "", `${side} constraint`));
    const list = el(doc, "ul");
    for (const config of detail[side]) {
      list.append(el(doc, "li", "config", configText(config)));
    }
    sec.append(list);
    root.append(sec);
  }
  return root;
}

export interface DiagramCallbacks {
  onLabelClick: (label: string) => void;
}

/** Strength diagram as SVG: layered nodes, arrows weak → strong, the
 * heuristic suggestion highlighted, the armed merge label marked. */
export function renderDiagram(
  doc: Document,
  data: DiagramData,
  armed: string | null,
  cb: DiagramCallbacks,
): HTMLElement {
  const root = el(doc, "section", "diagram");
  root.append(el(doc, "h2", "", `${data.side} strength diagram`));

  const layout = layoutDiagram(data.nodes, data.edges);
  const cellW = 110;
  const cellH = 70;
  const width = Math.max(1, layout.width) * cellW;
  const height = Math.max(1, layout.height) * cellH;

  const svg = doc.createElementNS(SVG, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "diagram-svg");

  const pos = new Map(
    layout.nodes.map((n) => [
      n.id,
      { x: (n.x + 0.5) * cellW, y: (n.y + 0.5) * cellH },
    ]),
  );
  const heur = data.heuristic_pair;
  const isHeurEdge = (a: string, b: string) =>
    heur !== null &&
    ((heur[0] === a && heur[1] === b) || (heur[0] === b && heur[1] === a));

  for (const [a, b] of data.edges) {
    const pa = pos.get(a);
    const pb = pos.get(b);
    if (!pa || !pb) continue;
    const line = doc.createElementNS(SVG, "line");
    line.setAttribute("x1", String(pa.x));
    line.setAttribute("y1", String(pa.y));
    line.setAttribute("x2", String(pb.x));
    line.setAttribute("y2", String(pb.y));
    line.setAttribute(
      "class",
      isHeurEdge(a, b) ? "edge edge-heuristic" : "edge",
    );
    svg.append(line);
  }

  const heurSet = new Set(heur ?? []);
  for (const node of layout.nodes) {
    const p = pos.get(node.id)!;
    const g = doc.createElementNS(SVG, "g");
    const classes = ["node"];
    if (heurSet.has(node.id)) classes.push("node-heuristic");
    if (armed === node.id) classes.push("node-armed");
    g.setAttribute("class", classes.join(" "));
    g.setAttribute("data-label", node.id);
    g.addEventListener("click", () => cb.onLabelClick(node.id));

    const circle = doc.createElementNS(SVG, "ellipse");
    circle.setAttribute("cx", String(p.x));
    circle.setAttribute("cy", String(p.y));
    circle.setAttribute("rx", "44");
    circle.setAttribute("ry", "18");
    const text = doc.createElementNS(SVG, "text");
    text.setAttribute("x", String(p.x));
    text.setAttribute("y", String(p.y + 4));
    text.setAttribute("text-anchor", "middle");
    text.textContent = node.id;
    g.append(circle, text);
    svg.append(g);
  }
  root.append(svg);

  const hint = el(
    doc,
    "p",
    "diagram-hint",
    armed
      ? `merge armed: ${armed} — click a second label to merge, or ${armed} again to cancel`
      : heur
        ? `suggested merge: ${heur[0]} ← ${heur[1]} (highlighted)`
        : "click two labels to merge them",
  );
  root.append(hint);
  return root;
}

export interface TreeCallbacks {
  onSelect: (pid: string) => void;
}

/** Provenance tree: one row per snapshot, indented by depth, with an
 * operation badge, a solvability badge when known, and the content hash. */
export function renderTree(
  doc: Document,
  tree: TreeData,
  currentPid: string | null,
  zeroRound: ReadonlyMap<string, boolean>,
  cb: TreeCallbacks,
): HTMLElement {
  const root = el(doc, "section", "tree");
  root.append(el(doc, "h2", "", "Session tree"));

  const depth = new Map<string, number>();
  const list = el(doc, "ul", "tree-list");
  for (const node of tree.nodes) {
    const d = node.parent === null ? 0 : (depth.get(node.parent) ?? 0) + 1;
    depth.set(node.pid, d);

    const item = el(doc, "li", "tree-node");
    if (node.pid === currentPid) item.classList.add("tree-node-current");
    item.style.marginLeft = `${d * 1.5}rem`;
    item.dataset["pid"] = node.pid;

    const badge = el(doc, "span", `badge badge-op badge-${node.op}`, node.op);
    const name = el(doc, "a", "tree-name", node.name || node.pid);
    name.href = "#";
    name.addEventListener("click", (ev) => {
      ev.preventDefault();
      cb.onSelect(node.pid);
    });
    const facts = el(
      doc,
      "span",
      "tree-facts",
      `${node.alphabet_size} labels, ${node.white_configs}w/${node.black_configs}b`,
    );
    const hash = el(doc, "code", "hash hash-short", node.hash.slice(0, 12));
    hash.title = node.hash;
    item.append(badge, name, facts, hash);

    const verdict = zeroRound.get(node.pid);
    if (verdict !== undefined) {
      item.append(
        el(
          doc,
          "span",
          verdict ? "badge badge-solvable" : "badge badge-unsolvable",
          verdict ? "SOLVABLE" : "UNSOLVABLE",
        ),
      );
    }
    list.append(item);
  }
  root.append(list);
  return root;
}

/** One-line error banner (empty element when there is nothing to show). */
export function renderError(doc: Document, message: string | null): HTMLElement {
  const box = el(doc, "div", "error-banner");
  if (message) {
    box.classList.add("error-banner-visible");
    box.textContent = message;
  }
  return box;
}
