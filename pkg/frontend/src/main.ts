// Browser entry point: wire the wizard to window.fetch and mount it.

import { ApiClient } from "./api.js";
import { Wizard } from "./app.js";
import { mountApp } from "./dom.js";
import { renderApp } from "./pages/root.js";

function saveBlob(bytes: Uint8Array, filename: string): void {
  // copy into a fresh buffer so the part is plain-ArrayBuffer backed
  const blob = new Blob([new Uint8Array(bytes)], { type: "application/zip" });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement("a");
  anchor.href = url;
  anchor.download = filename;
  anchor.click();
  URL.revokeObjectURL(url);
}

const api = new ApiClient((url, init) => window.fetch(url, init));
const wizard = new Wizard(api, { save: saveBlob });

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app mount point");
mountApp(root, () => renderApp(wizard.store.get(), wizard), wizard.store);
