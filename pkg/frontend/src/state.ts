/** View state: everything the browser owns. Analytic state lives server-side;
 * this is viewport, selection, and panel bookkeeping only. */

import { identity, Transform } from "./transform.js";

export type PanelId = "context" | "ontology" | "answers" | "insights";

export interface ViewState {
  transform: Transform;
  selectedNodeIds: string[];
  highlightedCluster: number | null;
  expandedBundleIds: string[];
  activePanels: PanelId[];
  pulseNodeId: string | null;
}

export function initialViewState(): ViewState {
  return {
    transform: { ...identity },
    selectedNodeIds: [],
    highlightedCluster: null,
    expandedBundleIds: [],
    activePanels: ["context", "ontology", "answers", "insights"],
    pulseNodeId: null,
  };
}

export function toggleCluster(state: ViewState, cluster: number): ViewState {
  return {
    ...state,
    highlightedCluster: state.highlightedCluster === cluster ? null : cluster,
  };
}

export function toggleNodeSelection(state: ViewState, nodeId: string): ViewState {
  const selected = state.selectedNodeIds.includes(nodeId)
    ? state.selectedNodeIds.filter((id) => id !== nodeId)
    : [...state.selectedNodeIds, nodeId];
  return { ...state, selectedNodeIds: selected };
}

export function clearSelections(state: ViewState): ViewState {
  return {
    ...state,
    selectedNodeIds: [],
    highlightedCluster: null,
    expandedBundleIds: [],
    pulseNodeId: null,
  };
}
