// Small view pieces shared across pages.

import { h, type VNode } from "../render.js";
import type { WizardState } from "../app.js";

export function banner(state: WizardState): VNode | null {
  if (state.banner === null) return null;
  return h("div", { class: "banner error", role: "alert" }, state.banner);
}

export function field(label: string, control: VNode): VNode {
  return h("label", { class: "field" }, h("span", { class: "field-name" }, label), control);
}
