/** Thin typed client for the layout service. Every response is validated
 * against the wire schema before it reaches application state. */

import {
  ContextResponse,
  contextResponseSchema,
  Insights,
  insightsSchema,
  OntologyView,
  ontologyViewSchema,
  QueryResponse,
  queryResponseSchema,
  SearchResponse,
  searchResponseSchema,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request(url: string, init?: RequestInit): Promise<unknown> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body;
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async createSession(graph: string | object, seed?: number): Promise<{ sessionId: string; seed: number }> {
    const body = await request(this.url("/sessions"), {
      method: "POST",
      body: JSON.stringify(seed === undefined ? { graph } : { graph, seed }),
    });
    const parsed = body as { session_id: string; seed: number };
    return { sessionId: parsed.session_id, seed: parsed.seed };
  }

  async query(
    sessionId: string,
    question: string,
    diversity?: number,
    budget?: number,
  ): Promise<QueryResponse> {
    const body = await request(this.url(`/sessions/${sessionId}/query`), {
      method: "POST",
      body: JSON.stringify({ question, diversity, budget }),
    });
    return queryResponseSchema.parse(body);
  }

  async context(sessionId: string, description: string): Promise<ContextResponse> {
    const body = await request(this.url(`/sessions/${sessionId}/context`), {
      method: "POST",
      body: JSON.stringify({ description }),
    });
    return contextResponseSchema.parse(body);
  }

  async insights(sessionId: string): Promise<Insights> {
    return insightsSchema.parse(await request(this.url(`/sessions/${sessionId}/insights`)));
  }

  async ontology(sessionId: string): Promise<OntologyView> {
    return ontologyViewSchema.parse(await request(this.url(`/sessions/${sessionId}/ontology`)));
  }

  async searchNodes(sessionId: string, name: string): Promise<SearchResponse> {
    const encoded = encodeURIComponent(name);
    return searchResponseSchema.parse(
      await request(this.url(`/sessions/${sessionId}/nodes?name=${encoded}`)),
    );
  }

  async expandBundle(sessionId: string, bundleId: string): Promise<ContextResponse> {
    const body = await request(
      this.url(`/sessions/${sessionId}/bundles/${encodeURIComponent(bundleId)}/expand`),
      { method: "POST" },
    );
    return contextResponseSchema.parse(body);
  }
}
