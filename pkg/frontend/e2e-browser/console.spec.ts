/** Browser versions of the three console flows. Every response body is
 * captured off the wire so the assertions can prove the rendered programs
 * and answers are server-sourced. Requires a playwright browser install
 * (`npx playwright install chromium`); skips cleanly where none exists. */

import { existsSync } from "node:fs";
import { chromium, expect, test, type Page } from "@playwright/test";

const API = "http://127.0.0.1:8941";
const PAGE = `/index.html?api=${encodeURIComponent(API)}`;

const browserAvailable = (() => {
  try {
    return existsSync(chromium.executablePath());
  } catch {
    return false;
  }
})();

test.skip(!browserAvailable, "no chromium binary installed");

async function openScene(page: Page, wire: string[], sceneId: string): Promise<void> {
  page.on("response", (res) => {
    if (res.url().startsWith(API)) {
      void res.text().then((body) => wire.push(body), () => {});
    }
  });
  await page.goto(PAGE);
  await page.locator("#scene-select").selectOption(sceneId);
  await page.locator("#open-session").click();
  await expect(page.locator("#session-label")).toContainText(sceneId);
}

async function ask(page: Page, text: string): Promise<void> {
  await page.locator("#query-input").fill(text);
  await page.locator("#query-send").click();
}

test("count query shows server program, bounded stepper, integer badge", async ({ page }) => {
  const wire: string[] = [];
  await openScene(page, wire, "mugshelf");
  await ask(page, "how many mugs are there?");

  await expect(page.locator("#answer-badge")).toHaveText("3");
  await expect(page.locator("#program-list li")).toHaveCount(3);
  await expect(page.locator("#program-list li").nth(1)).toHaveAttribute("data-concept", "mug");
  await expect(page.locator("#trace-slider")).toHaveAttribute("max", "2");

  expect(wire.some((b) => b.includes('"value":3'))).toBe(true);
  expect(wire.some((b) => b.includes('"filter_category"'))).toBe(true);
});

test("clarification dialogue pulses candidates and diffs the repair", async ({ page }) => {
  const wire: string[] = [];
  await openScene(page, wire, "duo");
  await ask(page, "grasp the soda.");

  await expect(page.locator("#clarification-box")).toBeVisible();
  await expect(page.locator("#clarification-text")).toContainText("Which one do you mean");
  await expect(page.locator(".legend-chip.pulse")).toHaveCount(2);

  await page.locator("#feedback-input").fill("the red one.");
  await page.locator("#feedback-send").click();

  await expect(page.locator("#answer-badge")).toHaveText("grasp object 0");
  const inserted = page.locator("#program-list li.inserted");
  await expect(inserted).toHaveCount(1);
  await expect(inserted).toHaveAttribute("data-op", "filter_color");
  await expect(inserted).toHaveAttribute("data-concept", "red");

  expect(wire.some((b) => b.includes("Which one do you mean"))).toBe(true);
  expect(wire.some((b) => b.includes('"filter_color"'))).toBe(true);
});

test("malformed query renders the 422 envelope message", async ({ page }) => {
  const wire: string[] = [];
  await openScene(page, wire, "mugshelf");
  await ask(page, "blorble the zorp?");

  await expect(page.locator("#failure-box")).toHaveText("no template matches: blorble the zorp");
  await expect(page.locator("#program-list li")).toHaveCount(0);
  await expect(page.locator("#answer-badge")).toBeHidden();

  expect(wire.some((b) => b.includes("no template matches: blorble the zorp"))).toBe(true);
});
