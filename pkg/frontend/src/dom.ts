type Child = Node | string | null | undefined;

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  ...children: Child[]
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    if (name === "class") node.className = value;
    else node.setAttribute(name, value);
  }
  for (const child of children) {
    if (child == null) continue;
    node.append(child);
  }
  return node;
}

/** KB content always renders right-to-left, whatever the chrome locale. */
export function kbText(tag: "span" | "div" | "h3" | "li", text: string, cls = ""): HTMLElement {
  return el(tag, { dir: "rtl", lang: "ar", class: cls ? `kb ${cls}` : "kb" }, text);
}

const BLOCKED_ELEMENTS = "script,style,iframe,object,embed,link,meta,form";

/** Defense in depth: the server already escapes KB text; strip anything
 * executable again before the fragment enters the live DOM. */
export function sanitizeFragment(html: string): DocumentFragment {
  const parsed = new DOMParser().parseFromString(html, "text/html");
  parsed.querySelectorAll(BLOCKED_ELEMENTS).forEach((node) => node.remove());
  for (const element of parsed.body.querySelectorAll("*")) {
    for (const attr of Array.from(element.attributes)) {
      const name = attr.name.toLowerCase();
      const value = attr.value.trim().toLowerCase();
      if (name.startsWith("on") || ((name === "href" || name === "src") && value.startsWith("javascript:"))) {
        element.removeAttribute(attr.name);
      }
    }
  }
  const fragment = document.createDocumentFragment();
  for (const child of Array.from(parsed.body.childNodes)) {
    fragment.append(document.importNode(child, true));
  }
  return fragment;
}
