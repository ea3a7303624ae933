/** Top-down orthographic scene renderer. Box footprints are drawn on a
 * canvas colored by object color; a DOM legend mirrors the same state so the
 * view stays inspectable where 2D contexts are unavailable. Hovering shows
 * the object label and its grasp pose arrow. */

import type { GraspPose, SceneDoc, SceneObject } from "./types.js";
import { describeObject } from "./viewmodel.js";

const CSS_COLORS: Record<string, string> = {
  black: "#30353b",
  blue: "#3b82f6",
  green: "#22a35a",
  orange: "#f08c1a",
  pink: "#ef6eb8",
  purple: "#8b5cf6",
  red: "#e0442d",
  silver: "#9aa4ae",
  white: "#e8e4da",
  yellow: "#eacf2e",
};

const MARGIN = 26;

interface RectShape {
  id: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  fill: string;
  highlighted: boolean;
  pulsing: boolean;
}

interface ArrowShape {
  x: number;
  y: number;
  dx: number;
  dy: number;
  halfLen: number;
}

export interface DisplayList {
  rects: RectShape[];
  masks: { x0: number; y0: number; x1: number; y1: number }[];
  arrow: ArrowShape | null;
}

export function colorCss(name: string): string {
  return CSS_COLORS[name] ?? "#7a8088";
}

let canvas2d: boolean | null = null;

/** 2D context, or null where canvas is unimplemented (emulated DOM). The
 * probe result is cached so the fallback path stays quiet and cheap. */
function context2d(canvas: HTMLCanvasElement): CanvasRenderingContext2D | null {
  if (canvas2d === false) return null;
  let ctx: CanvasRenderingContext2D | null = null;
  try {
    ctx = canvas.getContext("2d");
  } catch {
    ctx = null;
  }
  canvas2d = ctx !== null;
  return ctx;
}

export class SceneView {
  readonly canvas: HTMLCanvasElement;
  readonly legend: HTMLUListElement;
  private readonly tooltip: HTMLDivElement;
  private scene: SceneDoc | null = null;
  private highlightIds = new Set<number>();
  private pulseIds = new Set<number>();
  private maskRects: [number, number, number, number][] = [];
  private pose: GraspPose | null = null;
  private hoverId: number | null = null;
  /** Last render, kept as data so tests can check geometry. */
  display: DisplayList = { rects: [], masks: [], arrow: null };

  constructor(root: HTMLElement) {
    this.canvas = document.createElement("canvas");
    this.canvas.width = 640;
    this.canvas.height = 520;
    this.canvas.className = "scene-canvas";
    this.tooltip = document.createElement("div");
    this.tooltip.className = "scene-tooltip";
    this.tooltip.hidden = true;
    this.legend = document.createElement("ul");
    this.legend.className = "scene-legend";
    root.append(this.canvas, this.tooltip, this.legend);
    this.canvas.addEventListener("mousemove", (e) => this.onMove(e));
    this.canvas.addEventListener("mouseleave", () => this.onLeave());
  }

  setScene(scene: SceneDoc | null): void {
    this.scene = scene;
    this.highlightIds.clear();
    this.pulseIds.clear();
    this.maskRects = [];
    this.pose = null;
    this.hoverId = null;
    this.render();
  }

  setHighlight(ids: number[]): void {
    this.highlightIds = new Set(ids);
    this.render();
  }

  setPulse(ids: number[]): void {
    this.pulseIds = new Set(ids);
    this.render();
  }

  setMasks(masks: [number, number, number, number][]): void {
    this.maskRects = masks;
    this.render();
  }

  setPose(pose: GraspPose | null): void {
    this.pose = pose;
    this.render();
  }

  private scale(): number {
    if (this.scene === null) return 1;
    const { w, d } = this.scene.workspace;
    return Math.min(
      (this.canvas.width - 2 * MARGIN) / w,
      (this.canvas.height - 2 * MARGIN) / d,
    );
  }

  /** Workspace (x, y) to canvas pixels; y points away from the viewer. */
  toCanvas(x: number, y: number): [number, number] {
    const s = this.scale();
    return [MARGIN + x * s, this.canvas.height - MARGIN - y * s];
  }

  fromCanvas(px: number, py: number): [number, number] {
    const s = this.scale();
    return [(px - MARGIN) / s, (this.canvas.height - MARGIN - py) / s];
  }

  private footprint(obj: SceneObject): [number, number, number, number] {
    const [cx, cy] = obj.box.center;
    const [ex, ey] = obj.box.extents;
    return [cx - ex / 2, cy - ey / 2, cx + ex / 2, cy + ey / 2];
  }

  hitTest(x: number, y: number): SceneObject | null {
    if (this.scene === null) return null;
    for (const obj of [...this.scene.objects].reverse()) {
      const [x0, y0, x1, y1] = this.footprint(obj);
      if (x >= x0 && x <= x1 && y >= y0 && y <= y1) return obj;
    }
    return null;
  }

  private build(): DisplayList {
    const rects: RectShape[] = [];
    const masks: DisplayList["masks"] = [];
    let arrow: ArrowShape | null = null;
    if (this.scene !== null) {
      for (const obj of this.scene.objects) {
        const [x0, y0, x1, y1] = this.footprint(obj);
        const [px0, py1] = this.toCanvas(x0, y0);
        const [px1, py0] = this.toCanvas(x1, y1);
        rects.push({
          id: obj.id,
          x0: px0,
          y0: py0,
          x1: px1,
          y1: py1,
          fill: colorCss(obj.color),
          highlighted: this.highlightIds.has(obj.id),
          pulsing: this.pulseIds.has(obj.id),
        });
      }
      for (const [mx0, my0, mx1, my1] of this.maskRects) {
        const [px0, py1] = this.toCanvas(mx0, my0);
        const [px1, py0] = this.toCanvas(mx1, my1);
        masks.push({ x0: px0, y0: py0, x1: px1, y1: py1 });
      }
      const pose = this.pose ?? this.hoverPose();
      if (pose !== null) {
        const [px, py] = this.toCanvas(pose.u, pose.v);
        const s = this.scale();
        arrow = {
          x: px,
          y: py,
          dx: Math.cos(pose.phi),
          dy: -Math.sin(pose.phi),
          halfLen: Math.max(pose.omega, 0.03) * s,
        };
      }
    }
    return { rects, masks, arrow };
  }

  private hoverPose(): GraspPose | null {
    if (this.scene === null || this.hoverId === null) return null;
    const obj = this.scene.objects.find((o) => o.id === this.hoverId);
    return obj === undefined ? null : obj.grasp;
  }

  render(): void {
    this.display = this.build();
    this.paint();
    this.syncLegend();
  }

  private paint(): void {
    const ctx = context2d(this.canvas);
    if (ctx === null) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = "#f4f1ea";
    ctx.fillRect(0, 0, width, height);
    if (this.scene !== null) {
      const [wx0, wy1] = this.toCanvas(0, 0);
      const [wx1, wy0] = this.toCanvas(this.scene.workspace.w, this.scene.workspace.d);
      ctx.strokeStyle = "#b9b2a4";
      ctx.strokeRect(wx0, wy0, wx1 - wx0, wy1 - wy0);
    }
    for (const r of this.display.rects) {
      ctx.globalAlpha = r.highlighted ? 0.95 : 0.65;
      ctx.fillStyle = r.fill;
      ctx.fillRect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0);
      ctx.globalAlpha = 1;
      ctx.lineWidth = r.highlighted ? 3 : 1;
      ctx.strokeStyle = r.highlighted ? "#1d4ed8" : "#4a4f57";
      ctx.strokeRect(r.x0, r.y0, r.x1 - r.x0, r.y1 - r.y0);
      if (r.pulsing) {
        ctx.lineWidth = 2;
        ctx.strokeStyle = "#d97706";
        ctx.setLineDash([5, 4]);
        ctx.strokeRect(r.x0 - 4, r.y0 - 4, r.x1 - r.x0 + 8, r.y1 - r.y0 + 8);
        ctx.setLineDash([]);
      }
    }
    ctx.lineWidth = 2;
    ctx.strokeStyle = "#0f766e";
    for (const m of this.display.masks) {
      ctx.strokeRect(m.x0, m.y0, m.x1 - m.x0, m.y1 - m.y0);
    }
    const a = this.display.arrow;
    if (a !== null) {
      ctx.strokeStyle = "#111827";
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(a.x - a.dx * a.halfLen, a.y - a.dy * a.halfLen);
      ctx.lineTo(a.x + a.dx * a.halfLen, a.y + a.dy * a.halfLen);
      ctx.stroke();
      const hx = a.x + a.dx * a.halfLen;
      const hy = a.y + a.dy * a.halfLen;
      ctx.beginPath();
      ctx.moveTo(hx, hy);
      ctx.lineTo(hx - a.dx * 8 - a.dy * 5, hy - a.dy * 8 + a.dx * 5);
      ctx.lineTo(hx - a.dx * 8 + a.dy * 5, hy - a.dy * 8 - a.dx * 5);
      ctx.closePath();
      ctx.fill();
    }
  }

  private syncLegend(): void {
    this.legend.textContent = "";
    if (this.scene === null) return;
    for (const obj of this.scene.objects) {
      const item = document.createElement("li");
      item.dataset.objectId = String(obj.id);
      item.className = "legend-chip";
      if (this.highlightIds.has(obj.id)) item.classList.add("highlight");
      if (this.pulseIds.has(obj.id)) item.classList.add("pulse");
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.background = colorCss(obj.color);
      const label = document.createElement("span");
      label.textContent = describeObject(this.scene, obj.id);
      item.append(swatch, label);
      this.legend.append(item);
    }
  }

  private onMove(event: MouseEvent): void {
    const bounds = this.canvas.getBoundingClientRect();
    const [x, y] = this.fromCanvas(event.clientX - bounds.left, event.clientY - bounds.top);
    const hit = this.hitTest(x, y);
    const id = hit === null ? null : hit.id;
    if (id !== this.hoverId) {
      this.hoverId = id;
      this.render();
    }
    if (hit !== null && this.scene !== null) {
      this.tooltip.hidden = false;
      this.tooltip.textContent = describeObject(this.scene, hit.id);
      this.tooltip.style.left = `${event.clientX - bounds.left + 14}px`;
      this.tooltip.style.top = `${event.clientY - bounds.top + 14}px`;
    } else {
      this.tooltip.hidden = true;
    }
  }

  private onLeave(): void {
    this.hoverId = null;
    this.tooltip.hidden = true;
    this.render();
  }
}
