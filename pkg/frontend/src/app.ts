// Wizard controller: client-side mirror of the service's stage machine.
//
// Every action guards its own preconditions (stage, busy, pinned) so
// the UI never sends a request the server would reject for stage
// reasons; pages additionally disable the matching controls. Stage
// runs go through runStage, which posts the mutation and then polls
// /status until the server-side worker settles.

import { ApiClient, describeError, pollUntilIdle } from "./api.js";
import { createStore, type Store } from "./store.js";
import { MIN_DESCRIPTION_CHARS, type SessionView, type Stage } from "./types.js";

export type Route = "describe" | "highlights" | "traits" | "summary";

export interface WizardState {
  draft: string;
  session: SessionView | null;
  busy: boolean;
  busySlot: number | null;
  banner: string | null;
}

export interface WizardOptions {
  pollIntervalMs?: number;
  pollTimeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
  save?: (bytes: Uint8Array, filename: string) => void;
}

export function routeFor(state: WizardState): Route {
  const view = state.session;
  if (view === null) return "describe";
  switch (view.stage) {
    case "Describe":
      // Busy at Describe means the first highlight run is in flight;
      // show the highlights page in its loading state.
      return state.busy ? "highlights" : "describe";
    case "Highlights":
      return "highlights";
    case "Expansion":
      return "traits";
    case "Generated":
      return "summary";
  }
}

export function draftReady(draft: string): boolean {
  return draft.trim().length >= MIN_DESCRIPTION_CHARS;
}

export class Wizard {
  readonly store: Store<WizardState>;

  constructor(
    private readonly api: ApiClient,
    private readonly options: WizardOptions = {},
  ) {
    this.store = createStore<WizardState>({
      draft: "",
      session: null,
      busy: false,
      busySlot: null,
      banner: null,
    });
  }

  private patch(changes: Partial<WizardState>): void {
    this.store.set({ ...this.store.get(), ...changes });
  }

  private sessionId(): string {
    const view = this.store.get().session;
    if (view === null) throw new Error("no active session");
    return view.id;
  }

  setDraft(text: string): void {
    this.patch({ draft: text });
  }

  private async runStage(start: () => Promise<SessionView>, busySlot: number | null = null): Promise<void> {
    this.patch({ busy: true, busySlot, banner: null });
    try {
      const started = await start();
      this.patch({ session: started });
      const status = await pollUntilIdle(this.api, started.id, {
        intervalMs: this.options.pollIntervalMs ?? 1500,
        timeoutMs: this.options.pollTimeoutMs,
        sleep: this.options.sleep,
      });
      const view = await this.api.session(started.id);
      this.patch({ session: view, busy: false, busySlot: null, banner: status.lastError });
    } catch (err) {
      this.patch({ busy: false, busySlot: null, banner: describeError(err) });
    }
  }

  // Sync mutations answer with the fresh session document directly.
  private async apply(send: () => Promise<SessionView>): Promise<void> {
    if (this.store.get().busy) return;
    try {
      const view = await send();
      this.patch({ session: view, banner: null });
    } catch (err) {
      this.patch({ banner: describeError(err) });
    }
  }

  async create(): Promise<void> {
    const state = this.store.get();
    if (!draftReady(state.draft) || state.busy) return;
    await this.runStage(() => this.api.createSession(state.draft));
  }

  async pin(slot: number): Promise<void> {
    await this.apply(() => this.api.pin(this.sessionId(), slot));
  }

  async unpin(slot: number): Promise<void> {
    await this.apply(() => this.api.unpin(this.sessionId(), slot));
  }

  async regenerate(slot: number): Promise<void> {
    const state = this.store.get();
    if (state.busy || state.session === null) return;
    if (state.session.pinned.includes(slot)) return;
    await this.runStage(() => this.api.regenerate(this.sessionId(), slot), slot);
  }

  async select(slot: number): Promise<void> {
    if (this.store.get().busy) return;
    await this.runStage(() => this.api.select(this.sessionId(), slot));
  }

  async edit(fieldPath: string, value: string): Promise<void> {
    await this.apply(() => this.api.edit(this.sessionId(), fieldPath, value));
  }

  async removeDialogue(index: number): Promise<void> {
    const expansion = this.store.get().session?.expansion;
    if (expansion === undefined || expansion === null) return;
    if (expansion.dialogues.length <= 1) return;
    await this.edit(`sampleDialogues.${index}`, "");
  }

  async finalize(): Promise<void> {
    if (this.store.get().busy) return;
    await this.runStage(() => this.api.finalize(this.sessionId()));
  }

  async back(target: Stage): Promise<void> {
    await this.apply(() => this.api.back(this.sessionId(), target));
    if (target === "Describe") {
      const view = this.store.get().session;
      if (view !== null) this.patch({ draft: view.description });
    }
  }

  async download(): Promise<void> {
    const save = this.options.save;
    if (save === undefined) return;
    try {
      const pack = await this.api.downloadPack(this.sessionId());
      save(pack.bytes, pack.filename);
    } catch (err) {
      this.patch({ banner: describeError(err) });
    }
  }
}
