// Tiny hyperscript layer.
//
// Pages build plain VNode trees with semantic event handlers (click,
// input-with-value, change-with-value). The browser renderer in dom.ts
// materializes them; tests walk the trees and call the handlers
// directly, so page logic never touches the real DOM.

export interface Handlers {
  click?: () => void;
  input?: (value: string) => void;
  change?: (value: string) => void;
}

export interface VNode {
  tag: string;
  attrs: Record<string, string>;
  on: Handlers;
  children: VChild[];
}

export type VChild = VNode | string;

type AttrIn = string | number | boolean | undefined;
type HandlerIn = (() => void) | ((value: string) => void);

export interface Props {
  [name: string]: AttrIn | HandlerIn;
}

type ChildIn = VChild | ChildIn[] | null | undefined | false;

export function h(tag: string, props: Props = {}, ...rest: ChildIn[]): VNode {
  const attrs: Record<string, string> = {};
  const on: Handlers = {};
  for (const [name, value] of Object.entries(props)) {
    if (value === undefined || value === false) continue;
    if (name === "onClick") on.click = value as () => void;
    else if (name === "onInput") on.input = value as (v: string) => void;
    else if (name === "onChange") on.change = value as (v: string) => void;
    else if (value === true) attrs[name] = "";
    else attrs[name] = String(value);
  }
  const children: VChild[] = [];
  const push = (item: ChildIn): void => {
    if (item === null || item === undefined || item === false) return;
    if (Array.isArray(item)) {
      item.forEach(push);
      return;
    }
    children.push(item);
  };
  rest.forEach(push);
  return { tag, attrs, on, children };
}
