/** Round-trips against the real service in offline mode (spawned by the
 * vitest global setup). These cover the UI acceptance checks: question to
 * scene, context emphasis with zero position deltas, legend round-trip,
 * search focus, and inline error handling. */

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { AppStore } from "../src/store.js";
import { SERVICE_URL } from "./service-setup.js";

const QUESTION = "Find papers published in 2018 and their authors.";

function newStore(): AppStore {
  return new AppStore(new ApiClient(SERVICE_URL));
}

describe("service round-trips", () => {
  let store: AppStore;

  beforeAll(async () => {
    store = newStore();
    await store.openSession("academic", 42);
  });

  it("question produces a scene with node count equal to the layout JSON", async () => {
    await store.submitQuestion(QUESTION);
    expect(store.errorMessage).toBeNull();
    const scene = store.scene();
    expect(scene).not.toBeNull();
    expect(scene!.nodes.length).toBe(store.layout!.nodes.length);
    expect(store.preference?.attribute_value).toBe("2018");
    expect(store.answerSubgraph?.nodes.some((n) => n.answer)).toBe(true);
  });

  it("context description changes emphasis with zero position deltas", async () => {
    await store.submitQuestion(QUESTION);
    const before = new Map(store.layout!.nodes.map((n) => [n.id, [n.x, n.y]]));
    await store.submitContext("Show me which of these authors are the most prolific.");
    expect(store.errorMessage).toBeNull();
    const layout = store.layout!;
    expect(layout.emphasis.nodes.length).toBeGreaterThan(0);
    for (const node of layout.nodes) {
      expect(before.get(node.id)).toEqual([node.x, node.y]);
    }
  });

  it("legend toggle on and off restores the baseline scene", async () => {
    await store.submitQuestion(QUESTION);
    const baseline = store.scene();
    const cluster = store.layout!.clusters![0].id;
    store.legendToggle(cluster);
    const highlighted = store.scene();
    expect(highlighted).not.toEqual(baseline);
    store.legendToggle(cluster);
    expect(store.scene()).toEqual(baseline);
  });

  it("search hit focuses the node; miss reports inline", async () => {
    await store.submitQuestion(QUESTION);
    store.setViewport(1000, 700);
    const shownId = store.layout!.nodes[0].id;
    const match = await new ApiClient(SERVICE_URL).searchNodes(store.sessionId!, "Study");
    expect(match.matches.length).toBeGreaterThan(0);
    const target = match.matches.find((m) => store.layout!.nodes.some((n) => n.id === m.id));
    expect(target).toBeDefined();
    await store.searchAndFocus(target!.label);
    expect(store.searchMessage).toBeNull();
    expect(store.view.pulseNodeId).toBe(target!.id);
    const node = store.layout!.nodes.find((n) => n.id === target!.id)!;
    const t = store.view.transform;
    expect(node.x * t.scale + t.tx).toBeCloseTo(500, 4);
    expect(node.y * t.scale + t.ty).toBeCloseTo(350, 4);

    const viewBefore = store.view.transform;
    await store.searchAndFocus("zz-definitely-not-there");
    expect(store.searchMessage).toContain("not found");
    expect(store.view.transform).toEqual(viewBefore);
    expect(shownId).toBeDefined();
  });

  it("bundle expansion reveals member edges in the scene", async () => {
    await store.submitQuestion(QUESTION);
    await store.submitContext("Highlight edges representing writtenBy relations.");
    const bundles = store.layout!.emphasis.bundles;
    expect(bundles.length).toBeGreaterThan(0);
    const target = bundles[0];
    await store.expandBundle(target.id);
    const scene = store.scene()!;
    const visible = new Set(scene.edges.map((e) => e.id));
    for (const edgeId of target.edges) {
      expect(visible.has(edgeId)).toBe(true);
    }
  });

  it("empty question reports the server error inline and keeps the scene", async () => {
    await store.submitQuestion(QUESTION);
    const before = store.scene();
    await store.submitQuestion("   ");
    expect(store.errorMessage).not.toBeNull();
    expect(store.scene()).toEqual(before);
  });

  it("insights panel content comes from the server", async () => {
    await store.submitQuestion(QUESTION);
    await store.refreshInsights();
    expect(store.insights).not.toBeNull();
    expect(store.insights!.bullets.length).toBeGreaterThanOrEqual(4);
    expect(store.insights!.validation_log).toEqual([]);
  });

  it("ontology view lists the schema types", async () => {
    const api = new ApiClient(SERVICE_URL);
    const view = await api.ontology(store.sessionId!);
    expect(view.types.map((t) => t.type).sort()).toEqual(["Author", "Concept", "Paper"]);
  });

  it("unknown session yields a typed error", async () => {
    const api = new ApiClient(SERVICE_URL);
    await expect(api.query("does-not-exist", QUESTION)).rejects.toThrowError(ApiError);
  });
});
