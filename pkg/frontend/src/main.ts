/** DOM wiring: panels, inputs, pan/zoom, and the render loop. */

import { ApiClient } from "./api.js";
import { paintScene, pickNode } from "./render.js";
import { AppStore } from "./store.js";
import { pan, zoomAt } from "./transform.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "http://127.0.0.1:8400";
}

function sessionFromUrl(): string | null {
  return new URLSearchParams(window.location.search).get("session");
}

export function start(): void {
  const store = new AppStore(new ApiClient(apiBase()));
  const canvas = el<HTMLCanvasElement>("context-canvas");
  const overlay = document.getElementById("context-overlay") as unknown as SVGSVGElement;

  const render = () => {
    const scene = store.scene();
    const snapshot = store.snapshot();

    el("error-banner").textContent = snapshot.errorMessage ?? "";
    el("error-banner").style.display = snapshot.errorMessage ? "block" : "none";
    el("search-message").textContent = snapshot.searchMessage ?? "";

    const pref = snapshot.preference;
    el("preference-banner").textContent = pref
      ? `${pref.interest_type} | ${pref.attribute} = ${pref.attribute_value} | ` +
        `connected: ${pref.connected_types.join(", ")} | diversity ${snapshot.diversity.toFixed(2)}`
      : "ask a question to begin";

    if (scene) {
      paintScene(canvas, overlay, scene, snapshot.view.transform);
      renderLegend(scene);
      renderAnswers(snapshot);
      renderInsights(snapshot);
      renderBundles(scene);
    }
  };

  const renderLegend = (scene: NonNullable<ReturnType<AppStore["scene"]>>) => {
    const legend = el("legend");
    legend.innerHTML = "";
    for (const entry of scene.legend) {
      const item = document.createElement("button");
      item.className = entry.active ? "legend-item" : "legend-item dimmed";
      item.textContent = `${entry.label} (${entry.size})`;
      item.style.borderLeft = `10px solid ${entry.color}`;
      item.onclick = () => store.legendToggle(entry.cluster);
      legend.appendChild(item);
    }
  };

  const renderAnswers = (snapshot: ReturnType<AppStore["snapshot"]>) => {
    const list = el("answer-list");
    list.innerHTML = "";
    for (const node of snapshot.answerSubgraph?.nodes ?? []) {
      if (!node.answer) continue;
      const item = document.createElement("li");
      item.textContent = `${node.label} (${node.type})`;
      item.onclick = () => void store.searchAndFocus(node.label);
      list.appendChild(item);
    }
  };

  const renderInsights = (snapshot: ReturnType<AppStore["snapshot"]>) => {
    const list = el("insight-list");
    list.innerHTML = "";
    for (const bullet of snapshot.insights?.bullets ?? []) {
      const item = document.createElement("li");
      item.textContent = bullet.text;
      list.appendChild(item);
    }
  };

  const renderBundles = (scene: NonNullable<ReturnType<AppStore["scene"]>>) => {
    const list = el("bundle-list");
    list.innerHTML = "";
    for (const bundle of scene.bundles) {
      const item = document.createElement("button");
      item.className = "bundle-item";
      item.textContent = `${bundle.id} (${bundle.edgeCount} edges)${bundle.expanded ? " expanded" : ""}`;
      item.disabled = bundle.expanded;
      item.onclick = () => void store.expandBundle(bundle.id);
      list.appendChild(item);
    }
  };

  store.subscribe(render);

  const resize = () => {
    canvas.width = canvas.clientWidth;
    canvas.height = canvas.clientHeight;
    overlay.setAttribute("width", String(canvas.clientWidth));
    overlay.setAttribute("height", String(canvas.clientHeight));
    store.setViewport(canvas.clientWidth, canvas.clientHeight);
    render();
  };
  window.addEventListener("resize", resize);

  el<HTMLFormElement>("question-form").onsubmit = (event) => {
    event.preventDefault();
    const input = el<HTMLInputElement>("question-input");
    void store.submitQuestion(input.value);
  };
  el<HTMLFormElement>("context-form").onsubmit = (event) => {
    event.preventDefault();
    const input = el<HTMLInputElement>("context-input");
    void store.submitContext(input.value).then(() => {
      input.value = "";
    });
  };
  el<HTMLFormElement>("search-form").onsubmit = (event) => {
    event.preventDefault();
    void store.searchAndFocus(el<HTMLInputElement>("search-input").value);
  };
  el<HTMLInputElement>("diversity-slider").oninput = (event) => {
    const value = Number((event.target as HTMLInputElement).value);
    el("diversity-value").textContent = value.toFixed(2);
  };
  el<HTMLInputElement>("diversity-slider").onchange = (event) => {
    void store.setDiversity(Number((event.target as HTMLInputElement).value));
  };
  el<HTMLButtonElement>("insights-refresh").onclick = () => void store.refreshInsights();

  // Pan with drag, zoom with wheel, select on click.
  let dragging = false;
  let moved = false;
  let lastX = 0;
  let lastY = 0;
  canvas.addEventListener("mousedown", (event) => {
    dragging = true;
    moved = false;
    lastX = event.offsetX;
    lastY = event.offsetY;
  });
  canvas.addEventListener("mousemove", (event) => {
    if (!dragging) return;
    const dx = event.offsetX - lastX;
    const dy = event.offsetY - lastY;
    if (Math.abs(dx) + Math.abs(dy) > 2) moved = true;
    store.view = { ...store.view, transform: pan(store.view.transform, dx, dy) };
    lastX = event.offsetX;
    lastY = event.offsetY;
    render();
  });
  canvas.addEventListener("mouseup", (event) => {
    dragging = false;
    if (moved) return;
    const scene = store.scene();
    if (!scene) return;
    const hit = pickNode(scene, store.view.transform, event.offsetX, event.offsetY);
    if (hit) store.selectNode(hit);
  });
  canvas.addEventListener("wheel", (event) => {
    event.preventDefault();
    const factor = event.deltaY < 0 ? 1.15 : 1 / 1.15;
    store.view = {
      ...store.view,
      transform: zoomAt(store.view.transform, factor, event.offsetX, event.offsetY),
    };
    render();
  });

  resize();
  const existing = sessionFromUrl();
  const boot = existing ? store.attachSession(existing) : store.openSession("academic");
  void boot
    .then(() => {
      if (store.sessionId) {
        const url = new URL(window.location.href);
        url.searchParams.set("session", store.sessionId);
        window.history.replaceState(null, "", url.toString());
      }
    })
    .catch((error) => {
      el("error-banner").textContent = String(error);
      el("error-banner").style.display = "block";
    });
}

start();
