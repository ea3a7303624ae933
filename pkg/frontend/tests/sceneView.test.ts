import { beforeEach, describe, expect, it } from "vitest";

import { SceneView, colorCss } from "../src/sceneView.js";
import type { SceneDoc } from "../src/types.js";

import sceneDoc from "../e2e/fixtures/duo.json";

const scene = { ...sceneDoc, scene_id: "duo" } as SceneDoc;

let view: SceneView;

beforeEach(() => {
  document.body.innerHTML = "<div id='panel'></div>";
  view = new SceneView(document.getElementById("panel")!);
  view.setScene(scene);
});

describe("SceneView", () => {
  it("draws one footprint per object, colored by attribute", () => {
    expect(view.display.rects).toHaveLength(3);
    const byId = new Map(view.display.rects.map((r) => [r.id, r]));
    expect(byId.get(0)!.fill).toBe(colorCss("red"));
    expect(byId.get(1)!.fill).toBe(colorCss("silver"));
    expect(byId.get(2)!.fill).toBe(colorCss("yellow"));
  });

  it("keeps rectangles inside the canvas and oriented", () => {
    for (const r of view.display.rects) {
      expect(r.x0).toBeLessThan(r.x1);
      expect(r.y0).toBeLessThan(r.y1);
      expect(r.x0).toBeGreaterThanOrEqual(0);
      expect(r.y1).toBeLessThanOrEqual(view.canvas.height);
    }
  });

  it("round-trips workspace coordinates through the canvas transform", () => {
    const [px, py] = view.toCanvas(0.25, 0.3);
    const [x, y] = view.fromCanvas(px, py);
    expect(x).toBeCloseTo(0.25, 10);
    expect(y).toBeCloseTo(0.3, 10);
  });

  it("hit-tests object footprints in workspace coordinates", () => {
    expect(view.hitTest(0.25, 0.3)!.id).toBe(0);
    expect(view.hitTest(0.75, 0.3)!.id).toBe(1);
    expect(view.hitTest(0.5, 0.7)!.id).toBe(2);
    expect(view.hitTest(0.05, 0.05)).toBeNull();
  });

  it("mirrors objects into the legend with full labels", () => {
    const chips = [...view.legend.querySelectorAll("li")];
    expect(chips).toHaveLength(3);
    expect(chips[0].dataset.objectId).toBe("0");
    expect(chips[0].textContent).toContain("red aluminium soda (object 0)");
  });

  it("marks highlighted and pulsing objects on the legend", () => {
    view.setHighlight([1]);
    view.setPulse([0, 1]);
    const chips = [...view.legend.querySelectorAll("li")];
    expect(chips[1].classList.contains("highlight")).toBe(true);
    expect(chips[0].classList.contains("pulse")).toBe(true);
    expect(chips[1].classList.contains("pulse")).toBe(true);
    expect(chips[2].classList.contains("pulse")).toBe(false);
  });

  it("projects server mask footprints with the same transform", () => {
    view.setMasks([[0.2, 0.2, 0.4, 0.4]]);
    expect(view.display.masks).toHaveLength(1);
    const m = view.display.masks[0];
    const [px0, py1] = view.toCanvas(0.2, 0.2);
    const [px1, py0] = view.toCanvas(0.4, 0.4);
    expect(m).toEqual({ x0: px0, y0: py0, x1: px1, y1: py1 });
  });

  it("draws the grasp pose arrow along phi", () => {
    view.setPose({ u: 0.5, v: 0.4, phi: 0, omega: 0.06, q: 1 });
    const arrow = view.display.arrow!;
    const [px, py] = view.toCanvas(0.5, 0.4);
    expect(arrow.x).toBeCloseTo(px, 10);
    expect(arrow.y).toBeCloseTo(py, 10);
    expect(arrow.dx).toBeCloseTo(1, 10);
    expect(arrow.dy).toBeCloseTo(0, 10);
    expect(arrow.halfLen).toBeGreaterThan(0);
  });

  it("shows a hover label with the grasp arrow for the object under the mouse", () => {
    const [px, py] = view.toCanvas(0.25, 0.3);
    view.canvas.dispatchEvent(
      new MouseEvent("mousemove", { clientX: px, clientY: py, bubbles: true }),
    );
    const tooltip = document.querySelector<HTMLElement>(".scene-tooltip")!;
    expect(tooltip.hidden).toBe(false);
    expect(tooltip.textContent).toBe("red aluminium soda (object 0)");
    expect(view.display.arrow).not.toBeNull();

    view.canvas.dispatchEvent(new MouseEvent("mouseleave", { bubbles: true }));
    expect(tooltip.hidden).toBe(true);
    expect(view.display.arrow).toBeNull();
  });

  it("clears decorations when the scene changes", () => {
    view.setHighlight([0]);
    view.setScene(scene);
    expect(view.display.rects.every((r) => !r.highlighted)).toBe(true);
  });
});
