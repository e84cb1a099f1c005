/** Scene construction: a pure function of (layout JSON, displayed edges,
 * view state). The painter consumes the scene without further decisions, so
 * identical inputs always produce an identical scene graph. */

import { DisplayedEdge, LayoutJson } from "./types.js";
import { ViewState } from "./state.js";

export const PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
  "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
];

export const TWO_PI = Math.PI * 2;
const WEDGE_START = -Math.PI / 2; // twelve o'clock

export interface SceneWedge {
  cluster: number;
  start: number;
  end: number;
  color: string;
}

export interface SceneNode {
  id: string;
  x: number;
  y: number;
  r: number;
  color: string;
  cluster: number | null;
  wedges: SceneWedge[];
  dimmed: boolean;
  selected: boolean;
  pulsing: boolean;
  emphasisScale: number;
}

export interface SceneEdge {
  id: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
  highlighted: boolean;
  onPath: boolean;
}

export interface SceneHull {
  cluster: number;
  points: [number, number][];
  color: string;
  dimmed: boolean;
}

export interface SceneBundle {
  id: string;
  anchor: [number, number];
  target: [number, number] | null;
  edgeCount: number;
  expanded: boolean;
}

export interface Scene {
  regions: { type: string; cx: number; cy: number; r: number }[];
  hulls: SceneHull[];
  nodes: SceneNode[];
  edges: SceneEdge[];
  bundles: SceneBundle[];
  legend: { cluster: number; label: string; size: number; color: string; active: boolean }[];
}

export function clusterColor(cluster: number): string {
  return PALETTE[((cluster % PALETTE.length) + PALETTE.length) % PALETTE.length];
}

/** Wedge angles for a pie, starting at twelve o'clock, in fraction order. */
export function wedgeAngles(
  pie: { cluster: number; frac: number }[],
): SceneWedge[] {
  const wedges: SceneWedge[] = [];
  let angle = WEDGE_START;
  for (const part of pie) {
    const end = angle + part.frac * TWO_PI;
    wedges.push({ cluster: part.cluster, start: angle, end, color: clusterColor(part.cluster) });
    angle = end;
  }
  return wedges;
}

export function buildScene(
  layout: LayoutJson,
  displayedEdges: DisplayedEdge[],
  view: ViewState,
): Scene {
  const emphasisScale = new Map<string, number>();
  for (const entry of layout.emphasis.nodes) {
    emphasisScale.set(entry.id, entry.scale);
  }
  const highlightedEdges = new Set(layout.emphasis.edges);
  const pathEdges = new Set<string>();
  const pathNodes = new Set<string>();
  for (const path of layout.emphasis.paths) {
    for (const e of path.edges) pathEdges.add(e);
    for (const n of path.nodes) pathNodes.add(n);
  }

  const highlighted = view.highlightedCluster;
  const nodeById = new Map(layout.nodes.map((n) => [n.id, n]));
  const selected = new Set(view.selectedNodeIds);

  const nodes: SceneNode[] = layout.nodes.map((n) => {
    const scale = emphasisScale.get(n.id) ?? 1;
    const cluster = n.cluster ?? null;
    const memberOfHighlight =
      highlighted === null ||
      cluster === highlighted ||
      (n.pie ?? []).some((w) => w.cluster === highlighted);
    return {
      id: n.id,
      x: n.x,
      y: n.y,
      r: n.r * scale,
      color: cluster !== null ? clusterColor(cluster) : "#8a8a8a",
      cluster,
      wedges: n.pie && n.pie.length > 1 ? wedgeAngles(n.pie) : [],
      dimmed: !memberOfHighlight,
      selected: selected.has(n.id),
      pulsing: view.pulseNodeId === n.id,
      emphasisScale: scale,
    };
  });

  const hulls: SceneHull[] = layout.hulls.map((h) => ({
    cluster: h.cluster,
    points: h.points,
    color: clusterColor(h.cluster),
    dimmed: highlighted !== null && h.cluster !== highlighted,
  }));

  // Edges are revealed on demand: incident to a selected node, members of an
  // expanded bundle, or part of a highlighted path.
  const expanded = new Set(
    layout.emphasis.bundles.filter((b) => b.expanded).map((b) => b.id),
  );
  const expandedEdgeIds = new Set<string>();
  for (const bundle of layout.emphasis.bundles) {
    if (bundle.expanded || view.expandedBundleIds.includes(bundle.id)) {
      for (const e of bundle.edges) expandedEdgeIds.add(e);
    }
  }
  const edges: SceneEdge[] = [];
  for (const edge of displayedEdges) {
    const visible =
      selected.has(edge.source) ||
      selected.has(edge.target) ||
      expandedEdgeIds.has(edge.id) ||
      pathEdges.has(edge.id);
    if (!visible) continue;
    const a = nodeById.get(edge.source);
    const b = nodeById.get(edge.target);
    if (!a || !b) continue;
    edges.push({
      id: edge.id,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
      highlighted: highlightedEdges.has(edge.id),
      onPath: pathEdges.has(edge.id),
    });
  }

  const edgeById = new Map(displayedEdges.map((e) => [e.id, e]));
  const bundles: SceneBundle[] = layout.emphasis.bundles.map((b) => {
    let target: [number, number] | null = null;
    const first = edgeById.get(b.edges[0] ?? "");
    if (first) {
      // The shared endpoint of the bundle is the connected node.
      const counts = new Map<string, number>();
      for (const id of b.edges) {
        const e = edgeById.get(id);
        if (!e) continue;
        counts.set(e.source, (counts.get(e.source) ?? 0) + 1);
        counts.set(e.target, (counts.get(e.target) ?? 0) + 1);
      }
      let best: string | null = null;
      for (const [nodeId, count] of counts) {
        if (count === b.edges.length && (best === null || nodeId < best)) best = nodeId;
      }
      const node = best !== null ? nodeById.get(best) : undefined;
      if (node) target = [node.x, node.y];
    }
    return {
      id: b.id,
      anchor: b.anchor,
      target,
      edgeCount: b.edges.length,
      expanded: expanded.has(b.id) || view.expandedBundleIds.includes(b.id),
    };
  });

  const legend = (layout.clusters ?? []).map((c) => ({
    cluster: c.id,
    label: c.label,
    size: c.size,
    color: clusterColor(c.id),
    active: highlighted === null || highlighted === c.id,
  }));

  return {
    regions: layout.regions.map((r) => ({ type: r.type, cx: r.cx, cy: r.cy, r: r.r })),
    hulls,
    nodes,
    edges,
    bundles,
    legend,
  };
}
