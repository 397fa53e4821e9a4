// Step 1: free-form character description with a live length gate.

import { h, type VNode } from "../render.js";
import { MIN_DESCRIPTION_CHARS } from "../types.js";
import { draftReady, type Wizard, type WizardState } from "../app.js";
import { banner } from "./parts.js";

export function describePage(state: WizardState, wizard: Wizard): VNode {
  const length = state.draft.trim().length;
  const ready = draftReady(state.draft);
  return h(
    "section",
    { class: "page page-describe" },
    h("h1", {}, "Describe your character"),
    h("p", { class: "lead" },
      "A few sentences about who they are, what they do and how they carry themselves."),
    h("textarea", {
      id: "description",
      class: "description-input",
      rows: 8,
      placeholder: "A weathered fisherman who has spent thirty years working these waters...",
      value: state.draft,
      onInput: (value: string) => wizard.setDraft(value),
    }),
    h("p", { class: "char-counter" }, `${length} / ${MIN_DESCRIPTION_CHARS} characters minimum`),
    banner(state),
    h(
      "button",
      {
        class: "primary create-character",
        disabled: !ready || state.busy,
        title: ready
          ? "Generate three character highlights"
          : `Write at least ${MIN_DESCRIPTION_CHARS} characters`,
        onClick: () => {
          void wizard.create();
        },
      },
      "Create Character",
    ),
  );
}
