/**
 * Wire types for the hub API (/api/v1). These mirror the server's JSON
 * exactly; all numeric parameter values travel as decimal strings and the UI
 * passes them through verbatim.
 */

export type QuantityKind = "mass" | "length" | "dimensionless" | "categorical";

export interface RawProvenance {
  readonly name: string;
  readonly value: string;
  readonly unit?: string;
}

export interface ParameterDto {
  readonly name: string;
  readonly kind: QuantityKind;
  readonly value: string;
  readonly approximate: boolean;
  readonly unit?: string;
  readonly raw: RawProvenance;
}

export interface ProductDto {
  readonly id: string;
  readonly manufacturer_id: string;
  readonly sku: string;
  readonly name: string;
  readonly category: string;
  readonly parameters: readonly ParameterDto[];
  readonly revision: number;
  readonly first_seen: string;
  readonly last_seen: string;
  readonly stale: boolean;
}

export interface ProductListDto {
  readonly items: readonly ProductDto[];
  readonly total: number;
  readonly limit: number;
  readonly offset: number;
}

export interface ManufacturerDto {
  readonly id: string;
  readonly name: string;
  readonly status: "active" | "unreachable" | "retired";
  readonly consecutive_failures: number;
  readonly feed_url?: string;
  readonly last_success?: string;
}

export interface CriterionDto {
  readonly name: string;
  readonly value: string;
  readonly unit?: string;
  readonly uncertainty?: string;
}

export interface SearchRequestDto {
  readonly criteria: readonly CriterionDto[];
  readonly default_uncertainty?: string;
  readonly category?: string;
  readonly allow_missing?: boolean;
  readonly include_stale?: boolean;
  readonly limit?: number;
}

export interface SearchHitDto {
  readonly product_id: string;
  readonly score: string;
  readonly distances: Readonly<Record<string, string>>;
  readonly product: ProductDto;
}

export interface SearchResponseDto {
  readonly results: readonly SearchHitDto[];
  readonly total_matches: number;
  readonly limit: number | null;
}

export interface SubmissionParameterDto {
  readonly name: string;
  readonly value: string;
  readonly unit?: string;
}

export interface SubmissionDto {
  readonly sku?: string;
  readonly name: string;
  readonly category?: string;
  readonly parameters: readonly SubmissionParameterDto[];
}

export interface PublishResponseDto {
  readonly outcome: "inserted" | "updated" | "unchanged";
  readonly product: ProductDto;
}

export interface ApiErrorDto {
  readonly status: number;
  readonly code: string;
  readonly message: string;
}

export interface HealthDto {
  readonly status: string;
  readonly product_count: number;
  readonly sources: readonly ManufacturerDto[];
}
