/** Canvas painter for the context view plus the SVG overlay for hulls and
 * region labels. Consumes a Scene verbatim; no layout decisions here. */

import { Scene } from "./scene.js";
import { apply, Transform } from "./transform.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export function paintScene(
  canvas: HTMLCanvasElement,
  overlay: SVGSVGElement,
  scene: Scene,
  transform: Transform,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.save();
  ctx.setTransform(transform.scale, 0, 0, transform.scale, transform.tx, transform.ty);

  // Regions.
  for (const region of scene.regions) {
    ctx.beginPath();
    ctx.arc(region.cx, region.cy, region.r, 0, Math.PI * 2);
    ctx.fillStyle = "rgba(120, 130, 150, 0.06)";
    ctx.fill();
    ctx.lineWidth = 1 / transform.scale;
    ctx.strokeStyle = "rgba(90, 100, 120, 0.4)";
    ctx.stroke();
  }

  // Edges under nodes.
  for (const edge of scene.edges) {
    ctx.beginPath();
    ctx.moveTo(edge.x1, edge.y1);
    ctx.lineTo(edge.x2, edge.y2);
    ctx.lineWidth = (edge.highlighted || edge.onPath ? 2.2 : 1) / transform.scale;
    ctx.strokeStyle = edge.onPath
      ? "rgba(214, 39, 40, 0.9)"
      : edge.highlighted
        ? "rgba(31, 119, 180, 0.85)"
        : "rgba(120, 120, 120, 0.45)";
    ctx.stroke();
  }

  // Collapsed bundles as thick stubs from anchor to target.
  for (const bundle of scene.bundles) {
    if (bundle.expanded || !bundle.target) continue;
    ctx.beginPath();
    ctx.moveTo(bundle.anchor[0], bundle.anchor[1]);
    ctx.lineTo(bundle.target[0], bundle.target[1]);
    ctx.lineWidth = Math.min(1 + bundle.edgeCount, 6) / transform.scale;
    ctx.strokeStyle = "rgba(31, 119, 180, 0.35)";
    ctx.stroke();
  }

  // Nodes: solid discs or pie glyphs.
  for (const node of scene.nodes) {
    ctx.globalAlpha = node.dimmed ? 0.18 : 1.0;
    if (node.wedges.length > 1) {
      for (const wedge of node.wedges) {
        ctx.beginPath();
        ctx.moveTo(node.x, node.y);
        ctx.arc(node.x, node.y, node.r, wedge.start, wedge.end);
        ctx.closePath();
        ctx.fillStyle = wedge.color;
        ctx.fill();
      }
    } else {
      ctx.beginPath();
      ctx.arc(node.x, node.y, node.r, 0, Math.PI * 2);
      ctx.fillStyle = node.color;
      ctx.fill();
    }
    if (node.selected || node.pulsing) {
      ctx.beginPath();
      ctx.arc(node.x, node.y, node.r + 3 / transform.scale, 0, Math.PI * 2);
      ctx.lineWidth = 2 / transform.scale;
      ctx.strokeStyle = node.pulsing ? "#d62728" : "#111";
      ctx.stroke();
    }
  }
  ctx.globalAlpha = 1.0;
  ctx.restore();

  paintOverlay(overlay, scene, transform);
}

function paintOverlay(overlay: SVGSVGElement, scene: Scene, transform: Transform): void {
  while (overlay.firstChild) overlay.removeChild(overlay.firstChild);
  for (const hull of scene.hulls) {
    const polygon = document.createElementNS(SVG_NS, "polygon");
    const points = hull.points
      .map(([x, y]) => apply(transform, x, y).join(","))
      .join(" ");
    polygon.setAttribute("points", points);
    polygon.setAttribute("fill", hull.color);
    polygon.setAttribute("fill-opacity", hull.dimmed ? "0.04" : "0.12");
    polygon.setAttribute("stroke", hull.color);
    polygon.setAttribute("stroke-opacity", hull.dimmed ? "0.2" : "0.8");
    overlay.appendChild(polygon);
  }
  for (const region of scene.regions) {
    const label = document.createElementNS(SVG_NS, "text");
    const [x, y] = apply(transform, region.cx, region.cy - region.r);
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(y - 6));
    label.setAttribute("text-anchor", "middle");
    label.setAttribute("class", "region-label");
    label.textContent = region.type;
    overlay.appendChild(label);
  }
}

/** Hit test in screen coordinates; nearest node within its radius. */
export function pickNode(
  scene: Scene,
  transform: Transform,
  sx: number,
  sy: number,
): string | null {
  let best: string | null = null;
  let bestDist = Infinity;
  for (const node of scene.nodes) {
    const [x, y] = apply(transform, node.x, node.y);
    const dist = Math.hypot(x - sx, y - sy);
    const radius = Math.max(node.r * transform.scale, 6);
    if (dist <= radius && dist < bestDist) {
      best = node.id;
      bestDist = dist;
    }
  }
  return best;
}
