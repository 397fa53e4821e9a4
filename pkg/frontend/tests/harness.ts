// Shared setup: wizards wired to the mock server, with immediate or
// hand-released polling naps and a recording save hook.

import { ApiClient } from "../src/api.js";
import { Wizard } from "../src/app.js";
import { renderApp } from "../src/pages/root.js";
import type { VNode } from "../src/render.js";
import { LONG_DESCRIPTION, MockServer } from "./mock_server.js";

export interface SavedFile {
  bytes: Uint8Array;
  filename: string;
}

// Releases one polling nap per release() call, so tests can look at
// the page mid stage-run.
export class ManualSleeper {
  private waiters: (() => void)[] = [];

  sleep = (): Promise<void> =>
    new Promise((resolve) => {
      this.waiters.push(resolve);
    });

  release(): void {
    const next = this.waiters.shift();
    if (next !== undefined) next();
  }

  get pending(): number {
    return this.waiters.length;
  }
}

export interface HarnessOptions {
  sleep?: () => Promise<void>;
  saved?: SavedFile[];
}

export function makeWizard(server: MockServer, options: HarnessOptions = {}): Wizard {
  const sleep = options.sleep ?? (async () => {});
  const saved = options.saved;
  return new Wizard(new ApiClient(server.fetch), {
    sleep,
    pollIntervalMs: 0,
    save: saved === undefined ? undefined : (bytes, filename) => saved.push({ bytes, filename }),
  });
}

export function render(wizard: Wizard): VNode {
  return renderApp(wizard.store.get(), wizard);
}

export async function atHighlights(server: MockServer, options: HarnessOptions = {}): Promise<Wizard> {
  const wizard = makeWizard(server, options);
  wizard.setDraft(LONG_DESCRIPTION);
  await wizard.create();
  return wizard;
}

export async function atTraits(server: MockServer, options: HarnessOptions = {}): Promise<Wizard> {
  const wizard = await atHighlights(server, options);
  await wizard.select(0);
  return wizard;
}

export async function atSummary(server: MockServer, options: HarnessOptions = {}): Promise<Wizard> {
  const wizard = await atTraits(server, options);
  await wizard.finalize();
  return wizard;
}
