/**
 * Uncertainty search: per-parameter include toggles and uncertainty inputs
 * plus a global default, results in exactly the order the hub returned them.
 * Scores and distances are displayed verbatim; choosing a result takes the
 * product's values over into the working equipment.
 */

import { el } from "../dom.js";
import type { SearchHitDto, SearchResponseDto } from "../types.js";
import type { WorkingEquipment } from "../equipment.js";

export interface SearchFormHandlers {
  onToggle(name: string, included: boolean): void;
  onUncertainty(name: string, value: string): void;
  onDefaultUncertainty(value: string): void;
  onSubmit(): void;
}

export function renderSearchForm(
  equipment: WorkingEquipment,
  defaultUncertainty: string,
  handlers: SearchFormHandlers,
): HTMLElement {
  if (equipment.parameters.length === 0) {
    return el("p", { class: "empty-state" }, "The working equipment has no parameters; pick a product first.");
  }
  const rows = equipment.parameters.map((parameter) =>
    el(
      "tr",
      { class: "criterion", "data-name": parameter.name },
      el(
        "td",
        {},
        el("input", {
          type: "checkbox",
          class: "include",
          ...(parameter.included ? { checked: true } : {}),
          onchange: (event: Event) =>
            handlers.onToggle(parameter.name, (event.target as HTMLInputElement).checked),
        }),
      ),
      el("td", {}, parameter.name),
      el("td", { class: "target" }, parameter.unit ? `${parameter.value} ${parameter.unit}` : parameter.value),
      el(
        "td",
        {},
        el("input", {
          type: "text",
          class: "uncertainty",
          placeholder: `default (${defaultUncertainty})`,
          value: parameter.uncertainty,
          oninput: (event: Event) =>
            handlers.onUncertainty(parameter.name, (event.target as HTMLInputElement).value),
        }),
      ),
    ),
  );
  return el(
    "form",
    {
      class: "search-form",
      onsubmit: (event: Event) => {
        event.preventDefault();
        handlers.onSubmit();
      },
    },
    el(
      "table",
      {},
      el("thead", {}, el("tr", {}, el("th", {}, "use"), el("th", {}, "parameter"), el("th", {}, "target"), el("th", {}, "uncertainty"))),
      el("tbody", {}, ...rows),
    ),
    el(
      "label",
      {},
      "default uncertainty ",
      el("input", {
        type: "text",
        class: "default-uncertainty",
        value: defaultUncertainty,
        oninput: (event: Event) => handlers.onDefaultUncertainty((event.target as HTMLInputElement).value),
      }),
    ),
    el("button", { type: "submit", class: "run-search" }, "search products"),
  );
}

export interface ResultHandlers {
  onTakeOver(hit: SearchHitDto): void;
}

export function renderResults(response: SearchResponseDto | null, handlers: ResultHandlers): HTMLElement {
  if (response === null) {
    return el("p", { class: "hint" }, "Run a search to see matching products.");
  }
  if (response.results.length === 0) {
    return el("p", { class: "no-matches" }, "No products fit this specification within the given uncertainty.");
  }
  const rows = response.results.map((hit, index) =>
    el(
      "tr",
      { class: "result", "data-id": hit.product_id },
      el("td", {}, String(index + 1)),
      el("td", { class: "product-id" }, hit.product_id),
      el("td", {}, hit.product.name),
      el("td", { class: "score" }, hit.score),
      el(
        "td",
        { class: "distances" },
        Object.entries(hit.distances)
          .map(([name, distance]) => `${name}=${distance}`)
          .join(" "),
      ),
      el("td", {}, el("button", { class: "take-over", onclick: () => handlers.onTakeOver(hit) }, "take over values")),
    ),
  );
  return el(
    "div",
    { class: "results" },
    el("p", { class: "match-count" }, `${response.total_matches} matching products`),
    el(
      "table",
      {},
      el(
        "thead",
        {},
        el("tr", {}, el("th", {}, "#"), el("th", {}, "product"), el("th", {}, "name"), el("th", {}, "score"), el("th", {}, "distances"), el("th", {}, "")),
      ),
      el("tbody", {}, ...rows),
    ),
  );
}
