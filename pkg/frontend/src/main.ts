/** Page bootstrap: locate the service, pick a grammar, mount the editor.
 * `?api=` overrides the service base, `?grammar=` the grammar id. */

import { ApiClient } from "./api.js";
import { Editor } from "./editor.js";

const DEFAULT_BASE = "http://127.0.0.1:8000";

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? DEFAULT_BASE;
  const api = new ApiClient(base);
  const root = document.getElementById("editor");
  if (!root) throw new Error("missing #editor mount point");
  try {
    const grammars = await api.grammars();
    const wanted = params.get("grammar");
    const grammar = wanted
      ? grammars.find((g) => g.id === wanted) : grammars[0];
    if (!grammar) throw new Error("service exposes no usable grammar");
    const editor = new Editor(root, api, grammar.id);
    await editor.start();
  } catch (error) {
    root.textContent = `cannot reach the sentence service at ${base}: ` +
      (error instanceof Error ? error.message : String(error));
  }
}

void boot();
