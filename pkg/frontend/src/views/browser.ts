/**
 * Product browser: paginated table of the catalog. Every cell is a verbatim
 * join of strings the hub sent; selecting a row seeds the working equipment.
 */

import { el } from "../dom.js";
import type { ParameterDto, ProductDto } from "../types.js";

export interface BrowserRow {
  readonly id: string;
  readonly name: string;
  readonly manufacturer: string;
  readonly category: string;
  readonly mass: string;
  readonly dimensions: string;
  readonly stale: boolean;
  /** Vendor wording per parameter, e.g. `Weigth: 520 gram` (semantics caveat). */
  readonly vendorWording: readonly string[];
}

function renderParameter(p: ParameterDto): string {
  const approx = p.approximate ? "~" : "";
  return p.unit !== undefined ? `${approx}${p.value} ${p.unit}` : `${approx}${p.value}`;
}

function rawWording(p: ParameterDto): string {
  const unit = p.raw.unit !== undefined ? ` ${p.raw.unit}` : "";
  return `${p.raw.name}: ${p.raw.value}${unit}`;
}

export function productRow(product: ProductDto): BrowserRow {
  const mass = product.parameters.find((p) => p.name === "mass");
  const lengths = product.parameters.filter((p) => p.kind === "length");
  return {
    id: product.id,
    name: product.name,
    manufacturer: product.manufacturer_id,
    category: product.category,
    mass: mass !== undefined ? renderParameter(mass) : "",
    dimensions: lengths.map((p) => `${p.name} ${renderParameter(p)}`).join(", "),
    stale: product.stale,
    vendorWording: product.parameters.map(rawWording),
  };
}

export interface BrowserHandlers {
  onSelect(product: ProductDto): void;
}

export function renderBrowser(products: readonly ProductDto[], handlers: BrowserHandlers): HTMLElement {
  if (products.length === 0) {
    return el("p", { class: "empty-state" }, "No products in the hub yet. Crawl a vendor or publish a template.");
  }
  const header = el(
    "tr",
    {},
    el("th", {}, "product"),
    el("th", {}, "manufacturer"),
    el("th", {}, "category"),
    el("th", {}, "mass"),
    el("th", {}, "dimensions"),
    el("th", {}, ""),
  );
  const body = products.map((product) => {
    const row = productRow(product);
    return el(
      "tr",
      { class: row.stale ? "product stale" : "product", "data-id": row.id },
      el(
        "td",
        { title: row.vendorWording.join("\n") },
        row.name,
        row.stale ? el("span", { class: "badge" }, "stale") : null,
      ),
      el("td", {}, row.manufacturer),
      el("td", {}, row.category),
      el("td", { class: "mass" }, row.mass),
      el("td", { class: "dimensions" }, row.dimensions),
      el(
        "td",
        {},
        el("button", { class: "select", onclick: () => handlers.onSelect(product) }, "use as equipment"),
      ),
    );
  });
  return el("table", { class: "products" }, el("thead", {}, header), el("tbody", {}, ...body));
}
