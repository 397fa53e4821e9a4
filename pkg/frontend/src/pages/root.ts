// Route dispatch: the page follows the server-side stage.

import type { VNode } from "../render.js";
import { routeFor, type Wizard, type WizardState } from "../app.js";
import { describePage } from "./describe.js";
import { highlightsPage } from "./highlights.js";
import { traitsPage } from "./traits.js";
import { summaryPage } from "./summary.js";

export function renderApp(state: WizardState, wizard: Wizard): VNode {
  switch (routeFor(state)) {
    case "describe":
      return describePage(state, wizard);
    case "highlights":
      return highlightsPage(state, wizard);
    case "traits":
      return traitsPage(state, wizard);
    case "summary":
      return summaryPage(state, wizard);
  }
}
