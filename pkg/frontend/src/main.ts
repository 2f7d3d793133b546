/**
 * Application wiring: three tabs (browse, search, publish) sharing one
 * working equipment. All catalog math lives in the hub; this file only moves
 * state between API responses and the DOM.
 */

import { HubClient, HubError, SequenceGate } from "./api.js";
import { clear, el } from "./dom.js";
import {
  applyProductToEquipment,
  emptyEquipment,
  equipmentFromProduct,
  toCriteria,
  toSubmission,
  updateParameter,
  validateEquipment,
  type WorkingEquipment,
} from "./equipment.js";
import { renderBrowser } from "./views/browser.js";
import { renderResults, renderSearchForm } from "./views/search.js";
import { renderPublish, type PublishState } from "./views/publish.js";
import type { ProductDto, SearchHitDto, SearchResponseDto } from "./types.js";

export type Tab = "browse" | "search" | "publish";

export class App {
  equipment: WorkingEquipment = emptyEquipment();
  products: readonly ProductDto[] = [];
  searchResponse: SearchResponseDto | null = null;
  defaultUncertainty = "0.1";
  publishState: PublishState = { sku: "", category: "template", error: null, published: null };
  tab: Tab = "browse";
  statusLine = "";

  private readonly gate = new SequenceGate();

  constructor(
    private readonly client: HubClient,
    private readonly root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    await this.refreshProducts();
    this.render();
  }

  async refreshProducts(): Promise<void> {
    try {
      const page = await this.client.listProducts({ limit: 200 });
      this.products = page.items;
      this.statusLine = `${page.total} products in the hub`;
    } catch (error) {
      this.products = [];
      this.statusLine = error instanceof HubError ? error.message : "hub unreachable";
    }
  }

  selectProduct(product: ProductDto): void {
    this.equipment = equipmentFromProduct(product);
    this.publishState = { ...this.publishState, published: null, error: null };
    this.tab = "search";
    this.render();
  }

  takeOver(hit: SearchHitDto): void {
    this.equipment = applyProductToEquipment(this.equipment, hit.product);
    this.render();
  }

  async runSearch(): Promise<void> {
    const ticket = this.gate.next();
    let response: SearchResponseDto | null;
    try {
      response = await this.client.search({
        criteria: toCriteria(this.equipment),
        default_uncertainty: this.defaultUncertainty,
      });
    } catch (error) {
      if (this.gate.isCurrent(ticket)) {
        this.statusLine = error instanceof HubError ? error.message : "search failed";
        this.render();
      }
      return;
    }
    if (!this.gate.isCurrent(ticket)) return; // superseded by a newer search
    this.searchResponse = response;
    this.render();
  }

  async publish(): Promise<void> {
    if (validateEquipment(this.equipment).size > 0) {
      return; // invalid input never leaves the browser
    }
    const sku = this.publishState.sku.trim();
    if (sku === "") {
      this.publishState = { ...this.publishState, error: "sku must not be empty", published: null };
      this.render();
      return;
    }
    try {
      const published = await this.client.publish(
        toSubmission(this.equipment, sku, this.publishState.category.trim() || "template"),
      );
      this.publishState = { ...this.publishState, error: null, published };
      await this.refreshProducts();
    } catch (error) {
      const message = error instanceof HubError ? error.message : "publish failed";
      this.publishState = { ...this.publishState, error: message, published: null };
    }
    this.render();
  }

  setTab(tab: Tab): void {
    this.tab = tab;
    this.render();
  }

  render(): void {
    clear(this.root);
    const tabs = el(
      "nav",
      {},
      ...(["browse", "search", "publish"] as const).map((tab) =>
        el(
          "button",
          { class: this.tab === tab ? "tab active" : "tab", "data-tab": tab, onclick: () => this.setTab(tab) },
          tab,
        ),
      ),
    );
    const status = el("p", { class: "status" }, this.statusLine);
    let view: HTMLElement;
    if (this.tab === "browse") {
      view = renderBrowser(this.products, { onSelect: (product) => this.selectProduct(product) });
    } else if (this.tab === "search") {
      view = el(
        "div",
        {},
        renderSearchForm(this.equipment, this.defaultUncertainty, {
          onToggle: (name, included) => {
            this.equipment = updateParameter(this.equipment, name, { included });
          },
          onUncertainty: (name, uncertainty) => {
            this.equipment = updateParameter(this.equipment, name, { uncertainty });
          },
          onDefaultUncertainty: (value) => {
            this.defaultUncertainty = value;
          },
          onSubmit: () => void this.runSearch(),
        }),
        renderResults(this.searchResponse, { onTakeOver: (hit) => this.takeOver(hit) }),
      );
    } else {
      view = renderPublish(this.equipment, this.publishState, {
        onSku: (sku) => {
          this.publishState = { ...this.publishState, sku };
        },
        onCategory: (category) => {
          this.publishState = { ...this.publishState, category };
        },
        onSubmit: () => void this.publish(),
        onShowPublished: () => void this.refreshProducts().then(() => this.setTab("browse")),
      });
    }
    this.root.append(el("h1", {}, "Product Data Hub"), tabs, status, view);
  }
}

export function mount(root: HTMLElement, baseUrl = ""): App {
  const app = new App(new HubClient(baseUrl), root);
  void app.start();
  return app;
}

declare global {
  interface Window {
    pdhApp?: App;
  }
}

if (typeof document !== "undefined" && document.getElementById("app") !== null) {
  window.pdhApp = mount(document.getElementById("app") as HTMLElement);
}
