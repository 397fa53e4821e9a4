// Step 4: the finished character, with the emitted documents laid out
// for review and a download control for the installable archive.

import { h, type VNode } from "../render.js";
import { groupDialogues, WEEK_DAYS, type DialoguePair } from "../format.js";
import type { Wizard, WizardState } from "../app.js";
import { banner } from "./parts.js";

function dialogueGroup(title: string, cls: string, pairs: DialoguePair[]): VNode {
  return h(
    "section",
    { class: `dialogue-group ${cls}` },
    h("h3", {}, title),
    pairs.length === 0
      ? h("p", { class: "empty" }, "none")
      : h("dl", {}, pairs.map(([key, line]) => [h("dt", {}, key), h("dd", {}, line)])),
  );
}

function giftList(label: string, items: string[]): VNode {
  return h(
    "p",
    { class: "gift-list" },
    h("strong", {}, `${label}: `),
    items.length > 0 ? items.join(", ") : "nothing in particular",
  );
}

export function summaryPage(state: WizardState, wizard: Wizard): VNode {
  const view = state.session;
  const bundle = view !== null ? view.bundle : null;
  if (view === null || bundle === null) {
    return h(
      "section",
      { class: "page page-summary" },
      h("p", { class: "working" }, "Assembling the pack..."),
    );
  }
  const groups = groupDialogues(bundle.dialogues);
  const name = view.expansion !== null ? view.expansion.name : "Your character";
  return h(
    "section",
    { class: "page page-summary" },
    h("h1", {}, name),
    banner(state),
    view.notices.length > 0
      ? h("ul", { class: "notices" }, view.notices.map((notice) => h("li", {}, notice)))
      : null,
    h(
      "section",
      { class: "schedule-table" },
      h("h2", {}, "Weekly schedule"),
      h("dl", {}, WEEK_DAYS.map((day) => [h("dt", {}, day), h("dd", {}, bundle.schedule[day] ?? "")])),
    ),
    h(
      "section",
      { class: "dialogue-groups" },
      h("h2", {}, "Dialogues"),
      dialogueGroup("Day of month", "by-month-day", groups.monthDays),
      dialogueGroup("Day of week", "by-week-day", groups.weekDays),
      dialogueGroup("Location", "by-location", groups.locations),
    ),
    view.preferences !== null
      ? h(
          "section",
          { class: "gift-tastes" },
          h("h2", {}, "Gift tastes"),
          giftList("Loves", view.preferences.loves),
          giftList("Likes", view.preferences.likes),
          giftList("Dislikes", view.preferences.dislikes),
          giftList("Hates", view.preferences.hates),
        )
      : null,
    view.pack !== null
      ? h(
          "p",
          { class: "pack-files" },
          `Pack ${view.pack.uniqueId ?? ""}: ${view.pack.files.join(", ")}`,
        )
      : null,
    h(
      "footer",
      { class: "page-actions" },
      h(
        "button",
        {
          class: "back",
          onClick: () => {
            void wizard.back("Expansion");
          },
        },
        "Back",
      ),
      h(
        "button",
        {
          class: "primary download",
          title: "Download the content pack archive",
          onClick: () => {
            void wizard.download();
          },
        },
        "Download Files",
      ),
    ),
  );
}
