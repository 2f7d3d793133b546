/**
 * Publish the working equipment as a local template product. Validation runs
 * client-side first (no request leaves on invalid input); conflicts with
 * crawled products surface as inline errors.
 */

import { el } from "../dom.js";
import { validateEquipment, type WorkingEquipment } from "../equipment.js";
import type { PublishResponseDto } from "../types.js";

export interface PublishState {
  readonly sku: string;
  readonly category: string;
  readonly error: string | null;
  readonly published: PublishResponseDto | null;
}

export interface PublishHandlers {
  onSku(value: string): void;
  onCategory(value: string): void;
  onSubmit(): void;
  onShowPublished(productId: string): void;
}

export function renderPublish(
  equipment: WorkingEquipment,
  state: PublishState,
  handlers: PublishHandlers,
): HTMLElement {
  if (equipment.parameters.length === 0) {
    return el("p", { class: "empty-state" }, "Nothing to publish; the working equipment is empty.");
  }
  const problems = validateEquipment(equipment);
  const parameterRows = equipment.parameters.map((parameter) =>
    el(
      "tr",
      { "data-name": parameter.name },
      el("td", {}, parameter.name),
      el("td", { class: "value" }, parameter.unit ? `${parameter.value} ${parameter.unit}` : parameter.value),
      el("td", { class: "problem" }, problems.get(parameter.name) ?? ""),
    ),
  );
  const children: (HTMLElement | null)[] = [
    el(
      "label",
      {},
      "sku ",
      el("input", {
        type: "text",
        class: "sku",
        value: state.sku,
        oninput: (event: Event) => handlers.onSku((event.target as HTMLInputElement).value),
      }),
    ),
    el(
      "label",
      {},
      "category ",
      el("input", {
        type: "text",
        class: "category",
        value: state.category,
        oninput: (event: Event) => handlers.onCategory((event.target as HTMLInputElement).value),
      }),
    ),
    el("table", {}, el("tbody", {}, ...parameterRows)),
    state.error !== null ? el("p", { class: "publish-error" }, state.error) : null,
  ];
  if (state.published !== null) {
    children.push(
      el(
        "p",
        { class: "publish-success" },
        `${state.published.outcome}: `,
        el(
          "a",
          {
            href: `#product/${state.published.product.id}`,
            class: "published-link",
            onclick: () => handlers.onShowPublished(state.published!.product.id),
          },
          state.published.product.id,
        ),
      ),
    );
  }
  return el(
    "form",
    {
      class: "publish-form",
      onsubmit: (event: Event) => {
        event.preventDefault();
        handlers.onSubmit();
      },
    },
    ...children,
    el("button", { type: "submit", class: "publish", ...(problems.size > 0 ? { disabled: true } : {}) }, "publish as template"),
  );
}
