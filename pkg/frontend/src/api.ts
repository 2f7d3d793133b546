/**
 * Typed client for the hub API. Thin by design: every displayed number comes
 * back out of these calls exactly as the hub rendered it.
 */

import type {
  ApiErrorDto,
  HealthDto,
  ManufacturerDto,
  ProductDto,
  ProductListDto,
  PublishResponseDto,
  SearchRequestDto,
  SearchResponseDto,
  SubmissionDto,
} from "./types.js";

export class HubError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(error: ApiErrorDto) {
    super(error.message);
    this.status = error.status;
    this.code = error.code;
  }
}

async function parseError(response: Response): Promise<never> {
  let body: ApiErrorDto;
  try {
    body = (await response.json()) as ApiErrorDto;
  } catch {
    body = { status: response.status, code: "http_error", message: response.statusText };
  }
  throw new HubError(body);
}

export interface ListOptions {
  readonly limit?: number;
  readonly offset?: number;
  readonly category?: string;
  readonly manufacturer?: string;
  readonly includeStale?: boolean;
}

export class HubClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}/api/v1${path}`;
  }

  async listProducts(options: ListOptions = {}): Promise<ProductListDto> {
    const params = new URLSearchParams();
    if (options.limit !== undefined) params.set("limit", String(options.limit));
    if (options.offset !== undefined) params.set("offset", String(options.offset));
    if (options.category) params.set("category", options.category);
    if (options.manufacturer) params.set("manufacturer", options.manufacturer);
    if (options.includeStale) params.set("include_stale", "true");
    const suffix = params.toString() ? `?${params}` : "";
    const response = await fetch(this.url(`/products${suffix}`));
    if (!response.ok) await parseError(response);
    return (await response.json()) as ProductListDto;
  }

  async getProduct(id: string): Promise<ProductDto> {
    const response = await fetch(this.url(`/products/${id}`));
    if (!response.ok) await parseError(response);
    return (await response.json()) as ProductDto;
  }

  async listManufacturers(): Promise<readonly ManufacturerDto[]> {
    const response = await fetch(this.url("/manufacturers"));
    if (!response.ok) await parseError(response);
    const body = (await response.json()) as { items: ManufacturerDto[] };
    return body.items;
  }

  async health(): Promise<HealthDto> {
    const response = await fetch(this.url("/healthz"));
    if (!response.ok) await parseError(response);
    return (await response.json()) as HealthDto;
  }

  async search(request: SearchRequestDto): Promise<SearchResponseDto> {
    const response = await fetch(this.url("/search"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as SearchResponseDto;
  }

  async publish(submission: SubmissionDto): Promise<PublishResponseDto> {
    const response = await fetch(this.url("/products"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(submission),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as PublishResponseDto;
  }
}

/**
 * Drops responses that arrive after a newer request was issued, so a slow
 * search can never overwrite the results of a later one.
 */
export class SequenceGate {
  private ticket = 0;

  next(): number {
    return ++this.ticket;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.ticket;
  }
}
