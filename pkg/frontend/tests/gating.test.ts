import { describe, expect, it } from "vitest";

import {
  ALL_JUSTIFICATIONS,
  IllegalSelectionError,
  LEGAL_JUSTIFICATIONS,
  buildAnnotationRecord,
  isJustificationEnabled,
  isLegalSelection,
} from "../src/gating.js";
import type { Justification, Label } from "../src/types.js";

const LABELS: Label[] = ["GOOD", "BAD"];

function subsets(items: readonly Justification[]): Justification[][] {
  const out: Justification[][] = [[]];
  for (const item of items) {
    for (const existing of [...out]) {
      out.push([...existing, item]);
    }
  }
  return out;
}

describe("justification gating", () => {
  it("mirrors the server schema sets exactly", () => {
    expect(LEGAL_JUSTIFICATIONS.GOOD).toEqual(["SOCIAL", "USEFUL"]);
    expect(LEGAL_JUSTIFICATIONS.BAD).toEqual(["INAPPROPRIATE", "MISLEADING"]);
  });

  it("enables exactly the selected label's justifications", () => {
    for (const label of LABELS) {
      for (const justification of ALL_JUSTIFICATIONS) {
        expect(isJustificationEnabled(label, justification)).toBe(
          LEGAL_JUSTIFICATIONS[label].includes(justification),
        );
      }
    }
  });

  it("accepts exactly the legal subsets, exhaustively enumerated", () => {
    for (const label of LABELS) {
      for (const subset of subsets(ALL_JUSTIFICATIONS)) {
        const legal = subset.every((j) => LEGAL_JUSTIFICATIONS[label].includes(j));
        expect(isLegalSelection(label, subset)).toBe(legal);
      }
    }
    // 2 labels x 16 subsets covered
    expect(subsets(ALL_JUSTIFICATIONS)).toHaveLength(16);
  });

  it("cannot build a record violating the schema", () => {
    for (const label of LABELS) {
      for (const subset of subsets(ALL_JUSTIFICATIONS)) {
        const legal = subset.every((j) => LEGAL_JUSTIFICATIONS[label].includes(j));
        if (legal) {
          const record = buildAnnotationRecord("c1", "a1", label, subset, "t0");
          expect(record.label).toBe(label);
          expect(record.justifications).toEqual([...subset].sort());
        } else {
          expect(() => buildAnnotationRecord("c1", "a1", label, subset, "t0")).toThrow(
            IllegalSelectionError,
          );
        }
      }
    }
  });

  it("allows the neither-justification case for both labels", () => {
    expect(buildAnnotationRecord("c1", "a1", "GOOD", [], "t0").justifications).toEqual([]);
    expect(buildAnnotationRecord("c1", "a1", "BAD", [], "t0").justifications).toEqual([]);
  });

  it("deduplicates repeated selections", () => {
    const record = buildAnnotationRecord("c1", "a1", "GOOD", ["SOCIAL", "SOCIAL"], "t0");
    expect(record.justifications).toEqual(["SOCIAL"]);
  });
});
