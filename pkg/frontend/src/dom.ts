// Browser renderer: materialize a VNode tree into real DOM.
//
// The app re-renders from scratch on every store change; focus and
// caret position on id-carrying controls are restored afterwards so
// typing into the description box survives the replacement.

import type { VChild } from "./render.js";
import type { Store } from "./store.js";

export function toDom(node: VChild, doc: Document): Node {
  if (typeof node === "string") return doc.createTextNode(node);
  const el = doc.createElement(node.tag);
  for (const [name, value] of Object.entries(node.attrs)) {
    el.setAttribute(name, value);
  }
  const { click, input, change } = node.on;
  if (click !== undefined) el.addEventListener("click", () => click());
  if (input !== undefined) {
    el.addEventListener("input", () => input((el as HTMLInputElement).value));
  }
  if (change !== undefined) {
    el.addEventListener("change", () => change((el as HTMLSelectElement).value));
  }
  for (const child of node.children) el.appendChild(toDom(child, doc));
  // Value must land after children so <select> can match an option.
  if ("value" in node.attrs) (el as HTMLInputElement).value = node.attrs["value"];
  if ("disabled" in node.attrs) (el as HTMLButtonElement).disabled = true;
  return el;
}

interface FocusMemo {
  id: string;
  start: number | null;
  end: number | null;
}

function captureFocus(doc: Document): FocusMemo | null {
  const active = doc.activeElement;
  if (active === null || active.id === "") return null;
  const textual = active as HTMLTextAreaElement;
  return {
    id: active.id,
    start: typeof textual.selectionStart === "number" ? textual.selectionStart : null,
    end: typeof textual.selectionEnd === "number" ? textual.selectionEnd : null,
  };
}

function restoreFocus(doc: Document, memo: FocusMemo | null): void {
  if (memo === null) return;
  const el = doc.getElementById(memo.id);
  if (el === null) return;
  (el as HTMLElement).focus();
  if (memo.start !== null && memo.end !== null) {
    try {
      (el as HTMLTextAreaElement).setSelectionRange(memo.start, memo.end);
    } catch {
      // not a selectable control; focus alone is enough
    }
  }
}

export function mountApp(root: HTMLElement, render: () => VChild, store: Store<unknown>): () => void {
  const doc = root.ownerDocument;
  const sync = (): void => {
    const memo = captureFocus(doc);
    root.textContent = "";
    root.appendChild(toDom(render(), doc));
    restoreFocus(doc, memo);
  };
  sync();
  return store.subscribe(sync);
}
