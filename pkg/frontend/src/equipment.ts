/**
 * The working equipment: client-side state for the select/search/take-over
 * loop. Values live as the hub's decimal strings; taking a product over
 * copies them verbatim and clears any uncertainty on overwritten entries,
 * and nothing here ever talks to the network (publishing is a separate,
 * explicit step).
 */

import type { CriterionDto, ProductDto, QuantityKind, SubmissionDto } from "./types.js";

export interface WorkingParameter {
  readonly name: string;
  readonly kind: QuantityKind;
  readonly value: string;
  readonly unit?: string;
  /** Uncertainty fraction as entered by the user; empty string means "use the default". */
  readonly uncertainty: string;
  /** Whether this parameter takes part in the next search. */
  readonly included: boolean;
}

export interface WorkingEquipment {
  readonly name: string;
  readonly derivedFrom?: string;
  readonly parameters: readonly WorkingParameter[];
}

export function emptyEquipment(name = "untitled equipment"): WorkingEquipment {
  return { name, parameters: [] };
}

export function equipmentFromProduct(product: ProductDto): WorkingEquipment {
  return {
    name: product.name,
    derivedFrom: product.id,
    parameters: product.parameters.map((p) => ({
      name: p.name,
      kind: p.kind,
      value: p.value,
      unit: p.unit,
      uncertainty: "",
      included: true, // all values selected by default
    })),
  };
}

/** Take over every product value; entries without a counterpart survive untouched. */
export function applyProductToEquipment(
  equipment: WorkingEquipment,
  product: ProductDto,
): WorkingEquipment {
  const incoming = new Map(product.parameters.map((p) => [p.name, p]));
  const merged: WorkingParameter[] = equipment.parameters.map((entry) => {
    const update = incoming.get(entry.name);
    if (update === undefined) return entry;
    incoming.delete(entry.name);
    return {
      name: update.name,
      kind: update.kind,
      value: update.value,
      unit: update.unit,
      uncertainty: "",
      included: entry.included,
    };
  });
  for (const p of product.parameters) {
    if (incoming.has(p.name)) {
      merged.push({ name: p.name, kind: p.kind, value: p.value, unit: p.unit, uncertainty: "", included: true });
    }
  }
  return { name: equipment.name, derivedFrom: product.id, parameters: merged };
}

export function updateParameter(
  equipment: WorkingEquipment,
  name: string,
  patch: Partial<Pick<WorkingParameter, "value" | "uncertainty" | "included">>,
): WorkingEquipment {
  return {
    ...equipment,
    parameters: equipment.parameters.map((p) => (p.name === name ? { ...p, ...patch } : p)),
  };
}

export function renameEquipment(equipment: WorkingEquipment, name: string): WorkingEquipment {
  return { ...equipment, name };
}

const DECIMAL_RE = /^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$/;

/** Client-side sanity check; the hub revalidates everything on publish. */
export function validateParameter(parameter: WorkingParameter): string | null {
  if (parameter.kind === "categorical") {
    return parameter.value.trim() ? null : "label must not be empty";
  }
  if (!DECIMAL_RE.test(parameter.value.trim())) {
    return "not a decimal number";
  }
  const numeric = Number(parameter.value);
  if (parameter.kind === "dimensionless" ? numeric < 0 : numeric <= 0) {
    return parameter.kind === "dimensionless" ? "must be >= 0" : "must be positive";
  }
  if (parameter.uncertainty.trim() !== "") {
    if (!DECIMAL_RE.test(parameter.uncertainty.trim()) || Number(parameter.uncertainty) < 0) {
      return "uncertainty must be a fraction >= 0";
    }
  }
  return null;
}

export function validateEquipment(equipment: WorkingEquipment): Map<string, string> {
  const problems = new Map<string, string>();
  for (const parameter of equipment.parameters) {
    const problem = validateParameter(parameter);
    if (problem !== null) problems.set(parameter.name, problem);
  }
  return problems;
}

/** Criteria for POST /search, built from the included parameters only. */
export function toCriteria(equipment: WorkingEquipment): CriterionDto[] {
  return equipment.parameters
    .filter((p) => p.included)
    .map((p) => {
      const criterion: { name: string; value: string; unit?: string; uncertainty?: string } = {
        name: p.name,
        value: p.value,
      };
      if (p.unit !== undefined) criterion.unit = p.unit;
      if (p.uncertainty.trim() !== "") criterion.uncertainty = p.uncertainty.trim();
      return criterion;
    });
}

/** Body for POST /products; uncertainties are a search concept and stay behind. */
export function toSubmission(
  equipment: WorkingEquipment,
  sku: string,
  category: string,
): SubmissionDto {
  return {
    sku,
    name: equipment.name,
    category,
    parameters: equipment.parameters.map((p) =>
      p.unit !== undefined
        ? { name: p.name, value: p.value, unit: p.unit }
        : { name: p.name, value: p.value },
    ),
  };
}
