/** Browser entry point. The service base URL comes from ?api=, defaulting
 * to port 8000 on the page's host. */

import { initConsole } from "./app.js";

const params = new URLSearchParams(location.search);
const base =
  params.get("api") ?? `${location.protocol}//${location.hostname || "127.0.0.1"}:8000`;

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");

initConsole(root, base).catch((err) => {
  root.innerHTML = `<p class="failure">service unreachable at ${base}: ${String(err)}</p>`;
});
