import { defineConfig } from "@playwright/test";

export default defineConfig({
  testDir: "e2e-browser",
  timeout: 60_000,
  use: {
    headless: true,
    baseURL: "http://127.0.0.1:8780",
  },
  webServer: [
    {
      command: "tnsr serve --scene-dir e2e/fixtures --port 8941",
      url: "http://127.0.0.1:8941/health",
      reuseExistingServer: true,
    },
    {
      command: "npx http-server . -p 8780 -c-1 --silent",
      url: "http://127.0.0.1:8780/index.html",
      reuseExistingServer: true,
    },
  ],
});
