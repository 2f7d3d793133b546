/** Shared fixtures and a programmable fetch stub with a full request log. */

import { vi } from "vitest";
import type { ProductDto, SearchHitDto, SearchResponseDto } from "../src/types.js";

export function product(overrides: Partial<ProductDto> & { id: string }): ProductDto {
  const [manufacturer_id, ...rest] = overrides.id.split("/");
  return {
    manufacturer_id,
    sku: rest.join("/"),
    name: overrides.id,
    category: "misc",
    parameters: [],
    revision: 1,
    first_seen: "2026-01-15T12:00:00.000000Z",
    last_seen: "2026-01-15T12:00:00.000000Z",
    stale: false,
    ...overrides,
  };
}

export const BATTERY: ProductDto = product({
  id: "vendor-b/bat-2s",
  name: "Battery Pack 2S",
  category: "power",
  parameters: [
    {
      name: "mass",
      kind: "mass",
      value: "0.52",
      approximate: false,
      unit: "kg",
      raw: { name: "Weigth", value: "520", unit: "gram" },
    },
    {
      name: "height",
      kind: "length",
      value: "0.023",
      approximate: false,
      unit: "m",
      raw: { name: "Height", value: "23", unit: "millimetre" },
    },
  ],
});

export const WHEEL: ProductDto = product({
  id: "vendor-a/rw-250",
  name: "Reaction Wheel 250",
  category: "adcs",
  parameters: [
    {
      name: "mass",
      kind: "mass",
      value: "0.48",
      approximate: false,
      unit: "kg",
      raw: { name: "massPerUnit", value: "0.48", unit: "kg" },
    },
    {
      name: "shape",
      kind: "categorical",
      value: "box",
      approximate: false,
      raw: { name: "shape", value: "box" },
    },
  ],
});

export function hit(productDto: ProductDto, score: string, distances: Record<string, string>): SearchHitDto {
  return { product_id: productDto.id, score, distances, product: productDto };
}

export function searchResponse(hits: SearchHitDto[]): SearchResponseDto {
  return { results: hits, total_matches: hits.length, limit: 100 };
}

export interface LoggedRequest {
  readonly method: string;
  readonly url: string;
  readonly body: unknown;
}

export interface FetchStub {
  readonly calls: LoggedRequest[];
  /** Replace the response for "METHOD /path" (path matched as prefix). */
  route(key: string, responder: (body: unknown) => Response | Promise<Response>): void;
  restore(): void;
}

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function stubFetch(initial: Record<string, unknown> = {}): FetchStub {
  const routes = new Map<string, (body: unknown) => Response | Promise<Response>>();
  for (const [key, payload] of Object.entries(initial)) {
    routes.set(key, () => jsonResponse(payload));
  }
  const calls: LoggedRequest[] = [];
  const fake = vi.fn(async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const body = init?.body !== undefined ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, url, body });
    for (const [key, responder] of routes) {
      const [routeMethod, path] = key.split(" ");
      if (method === routeMethod && url.split("?")[0].endsWith(path)) {
        return responder(body);
      }
    }
    return jsonResponse({ status: 404, code: "not_found", message: `no stub for ${method} ${url}` }, 404);
  });
  vi.stubGlobal("fetch", fake);
  return {
    calls,
    route(key, responder) {
      routes.set(key, responder);
    },
    restore() {
      vi.unstubAllGlobals();
    },
  };
}
