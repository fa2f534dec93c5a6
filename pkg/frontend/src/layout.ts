/**
 * Pure layered layout for strength diagrams (directed acyclic graphs whose
 * edges point from weaker to stronger labels).
 *
 * Layering is by longest path from a source; within each layer, nodes are
 * ordered by a few barycenter sweeps to reduce edge crossings. Coordinates
 * are abstract grid units; the renderer scales them to pixels.
 */

export type Edge = [string, string];

export interface PlacedNode {
  id: string;
  layer: number;
  /** 0-based slot within the layer after ordering. */
  index: number;
  x: number;
  y: number;
}

export interface Layout {
  nodes: PlacedNode[];
  layers: string[][];
  width: number;
  height: number;
}

/** Longest-path layer of every node (sources at 0). Cycles are broken by
 * capping at the node count, so malformed input cannot hang the layout. */
export function layerByLongestPath(
  nodes: readonly string[],
  edges: readonly Edge[],
): Map<string, number> {
  const layer = new Map<string, number>(nodes.map((n) => [n, 0]));
  const out = new Map<string, string[]>(nodes.map((n) => [n, []]));
  const indeg = new Map<string, number>(nodes.map((n) => [n, 0]));
  for (const [a, b] of edges) {
    if (!layer.has(a) || !layer.has(b)) continue;
    out.get(a)!.push(b);
    indeg.set(b, (indeg.get(b) ?? 0) + 1);
  }
  const queue = nodes.filter((n) => (indeg.get(n) ?? 0) === 0);
  let processed = 0;
  while (queue.length > 0 && processed <= nodes.length * nodes.length) {
    const n = queue.shift()!;
    processed += 1;
    for (const m of out.get(n) ?? []) {
      layer.set(m, Math.max(layer.get(m)!, layer.get(n)! + 1));
      indeg.set(m, indeg.get(m)! - 1);
      if (indeg.get(m) === 0) queue.push(m);
    }
  }
  return layer;
}

function barycenterSweeps(
  layers: string[][],
  edges: readonly Edge[],
  sweeps: number,
): void {
  const up = new Map<string, string[]>();
  const down = new Map<string, string[]>();
  for (const [a, b] of edges) {
    (down.get(a) ?? down.set(a, []).get(a)!).push(b);
    (up.get(b) ?? up.set(b, []).get(b)!).push(a);
  }
  const pos = new Map<string, number>();
  const refresh = () => {
    pos.clear();
    for (const row of layers) row.forEach((n, i) => pos.set(n, i));
  };
  refresh();
  const order = (row: string[], nbrs: Map<string, string[]>) => {
    const score = (n: string): number => {
      const ns = nbrs.get(n) ?? [];
      if (ns.length === 0) return pos.get(n)!;
      return ns.reduce((s, m) => s + (pos.get(m) ?? 0), 0) / ns.length;
    };
    row.sort((a, b) => score(a) - score(b) || a.localeCompare(b));
  };
  for (let s = 0; s < sweeps; s++) {
    for (let i = 1; i < layers.length; i++) order(layers[i]!, up);
    refresh();
    for (let i = layers.length - 2; i >= 0; i--) order(layers[i]!, down);
    refresh();
  }
}

/** Lay out a diagram on an abstract grid: x = slot in layer, y = layer. */
export function layoutDiagram(
  nodes: readonly string[],
  edges: readonly Edge[],
): Layout {
  const layerOf = layerByLongestPath(nodes, edges);
  const depth = nodes.length ? Math.max(...layerOf.values()) + 1 : 0;
  const layers: string[][] = Array.from({ length: depth }, () => []);
  for (const n of [...nodes].sort()) layers[layerOf.get(n)!]!.push(n);
  barycenterSweeps(layers, edges, 4);

  const width = Math.max(1, ...layers.map((l) => l.length));
  const placed: PlacedNode[] = [];
  layers.forEach((row, layer) => {
    row.forEach((id, index) => {
      // center each layer horizontally on the grid
      const x = index + (width - row.length) / 2;
      placed.push({ id, layer, index, x, y: layer });
    });
  });
  return { nodes: placed, layers, width, height: depth };
}

/** Group labels by their trailing color tag (`_c`); untagged labels share
 * one bucket keyed "". Bucket order is numeric-then-lexicographic. */
export function groupByColor(
  labels: readonly string[],
): Map<string, string[]> {
  const buckets = new Map<string, string[]>();
  for (const label of labels) {
    const m = /_([0-9]+)$/.exec(label);
    const key = m ? m[1]! : "";
    (buckets.get(key) ?? buckets.set(key, []).get(key)!).push(label);
  }
  const keys = [...buckets.keys()].sort((a, b) => {
    if (a === "") return 1;
    if (b === "") return -1;
    return Number(a) - Number(b);
  });
  return new Map(keys.map((k) => [k, buckets.get(k)!.sort()]));
}
