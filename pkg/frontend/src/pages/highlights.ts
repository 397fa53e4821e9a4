// Step 2: three candidate cards with pin, regenerate and view controls.
//
// One stage run at a time: while any card regenerates (or a selection
// expands), every control on the page is disabled; the busy card's
// regenerate button doubles as its progress indicator. Pinned cards
// can never be regenerated, matching the server's PinnedSlot rule.

import { h, type VNode } from "../render.js";
import type { HighlightCard } from "../types.js";
import type { Wizard, WizardState } from "../app.js";
import { banner } from "./parts.js";

function cardView(card: HighlightCard, slot: number, state: WizardState, wizard: Wizard): VNode {
  const pinned = state.session !== null && state.session.pinned.includes(slot);
  const regenerating = state.busySlot === slot;
  return h(
    "article",
    { class: pinned ? "card pinned" : "card", "data-slot": slot },
    h(
      "header",
      { class: "card-head" },
      h("h2", {}, card.name),
      pinned ? h("span", { class: "lock", title: "Pinned" }, "\u{1F512}") : null,
    ),
    h("p", { class: "card-title" }, card.title),
    h("p", { class: "card-meta" }, `${card.gender}, ${card.age}. Birthday: ${card.birthday}`),
    h("ul", { class: "card-bullets" }, card.highlights.map((line) => h("li", {}, line))),
    h("blockquote", { class: "card-quote" }, card.description_qoute),
    h(
      "footer",
      { class: "card-actions" },
      h(
        "button",
        {
          class: "pin-toggle",
          disabled: state.busy,
          title: pinned ? "Let this card regenerate again" : "Keep this card through regenerations",
          onClick: () => {
            void (pinned ? wizard.unpin(slot) : wizard.pin(slot));
          },
        },
        pinned ? "Unpin" : "Pin",
      ),
      h(
        "button",
        {
          class: "regenerate",
          disabled: pinned || state.busy,
          title: pinned ? "Pinned cards never regenerate" : "Replace this card with a fresh one",
          onClick: () => {
            void wizard.regenerate(slot);
          },
        },
        regenerating ? "Generating..." : "Regenerate",
      ),
      h(
        "button",
        {
          class: "view-card",
          disabled: state.busy,
          title: "Expand this card into a full trait sheet",
          onClick: () => {
            void wizard.select(slot);
          },
        },
        "View",
      ),
    ),
  );
}

export function highlightsPage(state: WizardState, wizard: Wizard): VNode {
  const cards = state.session !== null ? state.session.highlights : null;
  return h(
    "section",
    { class: "page page-highlights" },
    h("h1", {}, "Character highlights"),
    h("p", { class: "lead" }, "Pick the take you like; pin keepers and reroll the rest."),
    banner(state),
    cards === null
      ? h("p", { class: "working" }, "Generating highlights...")
      : h("div", { class: "card-row" }, cards.map((card, slot) => cardView(card, slot, state, wizard))),
    h(
      "footer",
      { class: "page-actions" },
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
    ),
  );
}
