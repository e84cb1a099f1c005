/** Application store: last fetched server state plus view state, with the
 * operations the panels invoke. At most one mutating request is in flight;
 * stale responses (superseded request ids) are discarded. */

import { ApiClient, ApiError } from "./api.js";
import { buildScene, Scene } from "./scene.js";
import { clearSelections, initialViewState, toggleCluster, toggleNodeSelection, ViewState } from "./state.js";
import { fitBounds, focusOn } from "./transform.js";
import { DisplayedEdge, Insights, LayoutJson, OntologyView, QueryResponse } from "./types.js";

export interface StoreSnapshot {
  sessionId: string | null;
  layout: LayoutJson | null;
  displayedEdges: DisplayedEdge[];
  preference: QueryResponse["preference"] | null;
  answerSubgraph: QueryResponse["answer_subgraph"] | null;
  insights: Insights | null;
  ontology: OntologyView | null;
  view: ViewState;
  errorMessage: string | null;
  searchMessage: string | null;
  lastQuestion: string | null;
  diversity: number;
  busy: boolean;
}

type Listener = () => void;

export class AppStore {
  sessionId: string | null = null;
  layout: LayoutJson | null = null;
  displayedEdges: DisplayedEdge[] = [];
  preference: QueryResponse["preference"] | null = null;
  answerSubgraph: QueryResponse["answer_subgraph"] | null = null;
  insights: Insights | null = null;
  ontology: OntologyView | null = null;
  view: ViewState = initialViewState();
  errorMessage: string | null = null;
  searchMessage: string | null = null;
  lastQuestion: string | null = null;
  diversity = 0.5;
  busy = false;

  viewportWidth = 1200;
  viewportHeight = 800;

  private listeners: Listener[] = [];
  private requestCounter = 0;

  constructor(private api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  /** The rendered scene is a pure function of the snapshot. */
  scene(): Scene | null {
    if (!this.layout) return null;
    return buildScene(this.layout, this.displayedEdges, this.view);
  }

  snapshot(): StoreSnapshot {
    return {
      sessionId: this.sessionId,
      layout: this.layout,
      displayedEdges: this.displayedEdges,
      preference: this.preference,
      answerSubgraph: this.answerSubgraph,
      insights: this.insights,
      ontology: this.ontology,
      view: this.view,
      errorMessage: this.errorMessage,
      searchMessage: this.searchMessage,
      lastQuestion: this.lastQuestion,
      diversity: this.diversity,
      busy: this.busy,
    };
  }

  async openSession(graph: string | object, seed?: number): Promise<void> {
    const result = await this.api.createSession(graph, seed);
    this.sessionId = result.sessionId;
    // Switching sessions clears selections and panel state.
    this.layout = null;
    this.displayedEdges = [];
    this.preference = null;
    this.answerSubgraph = null;
    this.insights = null;
    this.view = clearSelections(initialViewState());
    this.errorMessage = null;
    this.lastQuestion = null;
    this.ontology = await this.api.ontology(result.sessionId).catch(() => null);
    this.notify();
  }

  /** Reattach to an existing session (refresh-safe URLs carry the id). */
  async attachSession(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    this.view = clearSelections(initialViewState());
    this.ontology = await this.api.ontology(sessionId).catch(() => null);
    this.notify();
  }

  async submitQuestion(question: string): Promise<void> {
    if (!this.sessionId) return;
    const requestId = ++this.requestCounter;
    this.busy = true;
    this.notify();
    try {
      const response = await this.api.query(this.sessionId, question, this.diversity);
      if (requestId !== this.requestCounter) return; // superseded
      this.layout = response.layout;
      this.displayedEdges = response.displayed_edges;
      this.preference = response.preference;
      this.answerSubgraph = response.answer_subgraph;
      this.errorMessage = null;
      this.lastQuestion = question;
      this.insights = null; // refreshed lazily
      this.fitViewport();
    } catch (error) {
      // Previous scene is retained; only the banner changes.
      if (requestId === this.requestCounter) {
        this.errorMessage = describeError(error);
      }
    } finally {
      if (requestId === this.requestCounter) this.busy = false;
      this.notify();
    }
  }

  async submitContext(description: string): Promise<void> {
    if (!this.sessionId) return;
    const requestId = ++this.requestCounter;
    this.busy = true;
    this.notify();
    try {
      const response = await this.api.context(this.sessionId, description);
      if (requestId !== this.requestCounter) return;
      this.layout = response.layout;
      this.displayedEdges = response.displayed_edges;
      this.errorMessage = null;
      this.insights = null;
    } catch (error) {
      if (requestId === this.requestCounter) {
        this.errorMessage = describeError(error);
      }
    } finally {
      if (requestId === this.requestCounter) this.busy = false;
      this.notify();
    }
  }

  /** Changing diversity re-issues the last question with the new setting. */
  async setDiversity(value: number): Promise<void> {
    this.diversity = value;
    if (this.lastQuestion) {
      await this.submitQuestion(this.lastQuestion);
    } else {
      this.notify();
    }
  }

  async refreshInsights(): Promise<void> {
    if (!this.sessionId) return;
    try {
      this.insights = await this.api.insights(this.sessionId);
      this.notify();
    } catch (error) {
      this.errorMessage = describeError(error);
      this.notify();
    }
  }

  async searchAndFocus(name: string): Promise<void> {
    if (!this.sessionId) return;
    try {
      const result = await this.api.searchNodes(this.sessionId, name);
      const shown = new Set((this.layout?.nodes ?? []).map((n) => n.id));
      const hit = result.matches.find((m) => shown.has(m.id)) ?? result.matches[0] ?? null;
      const node = hit ? this.layout?.nodes.find((n) => n.id === hit.id) : undefined;
      if (!hit || !node) {
        this.searchMessage = `not found: ${name}`;
        this.notify();
        return;
      }
      this.searchMessage = null;
      this.view = {
        ...this.view,
        pulseNodeId: node.id,
        transform: focusOn(node.x, node.y, this.viewportWidth, this.viewportHeight, 2.0),
      };
      this.notify();
    } catch (error) {
      this.searchMessage = describeError(error);
      this.notify();
    }
  }

  async expandBundle(bundleId: string): Promise<void> {
    if (!this.sessionId) return;
    try {
      const response = await this.api.expandBundle(this.sessionId, bundleId);
      this.layout = response.layout;
      this.displayedEdges = response.displayed_edges;
      this.notify();
    } catch (error) {
      this.errorMessage = describeError(error);
      this.notify();
    }
  }

  legendToggle(cluster: number): void {
    const known = (this.layout?.clusters ?? []).some((c) => c.id === cluster);
    if (!known) return; // unknown cluster: no-op
    this.view = toggleCluster(this.view, cluster);
    this.notify();
  }

  selectNode(nodeId: string): void {
    this.view = toggleNodeSelection(this.view, nodeId);
    this.notify();
  }

  setViewport(width: number, height: number): void {
    this.viewportWidth = width;
    this.viewportHeight = height;
  }

  private fitViewport(): void {
    if (!this.layout || this.layout.regions.length === 0) return;
    let minX = Infinity;
    let minY = Infinity;
    let maxX = -Infinity;
    let maxY = -Infinity;
    for (const region of this.layout.regions) {
      minX = Math.min(minX, region.cx - region.r);
      minY = Math.min(minY, region.cy - region.r);
      maxX = Math.max(maxX, region.cx + region.r);
      maxY = Math.max(maxY, region.cy + region.r);
    }
    this.view = {
      ...this.view,
      transform: fitBounds(minX, minY, maxX, maxY, this.viewportWidth, this.viewportHeight),
    };
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}
