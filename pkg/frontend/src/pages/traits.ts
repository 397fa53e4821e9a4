// Step 3: the full trait sheet, editable field by field.
//
// Every control carries data-field with the dotted path the PATCH
// endpoint expects; edits commit on change. The three personality
// enums render as closed drop-downs, so an out-of-range value is
// unsendable from this page.

import { h, type VNode } from "../render.js";
import { TRAIT_OPTIONS, type TraitField } from "../types.js";
import type { Wizard, WizardState } from "../app.js";
import { banner, field } from "./parts.js";

function textEdit(path: string, value: string, state: WizardState, wizard: Wizard, rows = 3): VNode {
  return h("textarea", {
    "data-field": path,
    rows,
    value,
    disabled: state.busy,
    onChange: (next: string) => {
      void wizard.edit(path, next);
    },
  });
}

function lineEdit(path: string, value: string, state: WizardState, wizard: Wizard): VNode {
  return h("input", {
    "data-field": path,
    type: "text",
    value,
    disabled: state.busy,
    onChange: (next: string) => {
      void wizard.edit(path, next);
    },
  });
}

function enumSelect(trait: TraitField, current: string, state: WizardState, wizard: Wizard): VNode {
  const path = `personality.${trait}`;
  return h(
    "select",
    {
      "data-field": path,
      class: `trait-${trait}`,
      value: current,
      disabled: state.busy,
      onChange: (next: string) => {
        void wizard.edit(path, next);
      },
    },
    TRAIT_OPTIONS[trait].map((option) =>
      h("option", { value: option, selected: option === current }, option),
    ),
  );
}

export function traitsPage(state: WizardState, wizard: Wizard): VNode {
  const expansion = state.session !== null ? state.session.expansion : null;
  if (expansion === null) {
    return h(
      "section",
      { class: "page page-traits" },
      h("p", { class: "working" }, "Expanding the selected card..."),
    );
  }
  const p = expansion.personality;
  const lastDialogue = expansion.dialogues.length <= 1;
  return h(
    "section",
    { class: "page page-traits" },
    h("h1", {}, expansion.name),
    h("p", { class: "lead" }, expansion.title),
    banner(state),
    h(
      "div",
      { class: "traits-columns" },
      h(
        "div",
        { class: "basic-info" },
        h("h2", {}, "Basic info"),
        field("Name", lineEdit("name", expansion.name, state, wizard)),
        field("Age", lineEdit("age", String(expansion.age), state, wizard)),
        field("Gender", lineEdit("gender", expansion.gender, state, wizard)),
        field("Birthday", lineEdit("birthday", expansion.birthday, state, wizard)),
        field("Title", lineEdit("title", expansion.title, state, wizard)),
        field("Quote", textEdit("quote", expansion.quote, state, wizard, 2)),
        field("Summary", textEdit("summary", expansion.summary, state, wizard)),
      ),
      h(
        "div",
        { class: "personality" },
        h("h2", {}, "Personality"),
        field("Characteristics", textEdit("personality.characteristics", p.characteristics, state, wizard)),
        field("Job", lineEdit("personality.job", p.job, state, wizard)),
        field("Hobbies", textEdit("personality.hobbies", p.hobbies, state, wizard, 2)),
        field("Food and drinks", textEdit("personality.foodAndDrinks", p.foodAndDrinks, state, wizard, 2)),
        field("Others", textEdit("personality.others", p.others, state, wizard, 2)),
        field("Manners", enumSelect("manners", p.manners, state, wizard)),
        field("Manners description", textEdit("personality.mannersDescription", p.mannersDescription, state, wizard, 2)),
        field("Social anxiety", enumSelect("socialAnxiety", p.socialAnxiety, state, wizard)),
        field("Social anxiety description", textEdit("personality.socialAnxietyDescription", p.socialAnxietyDescription, state, wizard, 2)),
        field("Optimism", enumSelect("optimism", p.optimism, state, wizard)),
        field("Optimism description", textEdit("personality.optimismDescription", p.optimismDescription, state, wizard, 2)),
      ),
    ),
    h(
      "div",
      { class: "dialogues" },
      h("h2", {}, "Sample dialogues"),
      expansion.dialogues.map((line, index) =>
        h(
          "div",
          { class: "dialogue-row" },
          lineEdit(`sampleDialogues.${index}`, line, state, wizard),
          h(
            "button",
            {
              class: "remove-dialogue",
              disabled: lastDialogue || state.busy,
              title: lastDialogue ? "The last dialogue line cannot be removed" : "Remove this line",
              onClick: () => {
                void wizard.removeDialogue(index);
              },
            },
            "Remove",
          ),
        ),
      ),
    ),
    h(
      "div",
      { class: "schedule-summaries" },
      h("h2", {}, "Schedule"),
      expansion.schedules.map((summary, index) =>
        h(
          "div",
          { class: "summary-row" },
          lineEdit(`scheduleSummaries.${index}.title`, summary.title, state, wizard),
          textEdit(`scheduleSummaries.${index}.description`, summary.description, state, wizard, 2),
        ),
      ),
    ),
    h(
      "footer",
      { class: "page-actions" },
      h(
        "button",
        {
          class: "back",
          disabled: state.busy,
          onClick: () => {
            void wizard.back("Highlights");
          },
        },
        "Back",
      ),
      h(
        "button",
        {
          class: "back-to-main",
          disabled: state.busy,
          onClick: () => {
            void wizard.back("Describe");
          },
        },
        "Back to Main",
      ),
      h(
        "button",
        {
          class: "primary generate",
          disabled: state.busy,
          onClick: () => {
            void wizard.finalize();
          },
        },
        state.busy ? "Generating..." : "Generate Character",
      ),
    ),
  );
}
