/** Client-side mirror of the server's annotation schema.
 *
 * The UI routes every record through buildAnnotationRecord, so a request
 * violating the label/justification pairing cannot be constructed: the
 * checkboxes for the other label's justifications are disabled, and the
 * builder throws if one slips through anyway.
 */

import type { AnnotationRecord, Justification, Label } from "./types.js";

export const ALL_JUSTIFICATIONS: readonly Justification[] = [
  "SOCIAL",
  "USEFUL",
  "INAPPROPRIATE",
  "MISLEADING",
];

export const LEGAL_JUSTIFICATIONS: Record<Label, readonly Justification[]> = {
  GOOD: ["SOCIAL", "USEFUL"],
  BAD: ["INAPPROPRIATE", "MISLEADING"],
};

export function isJustificationEnabled(label: Label, justification: Justification): boolean {
  return LEGAL_JUSTIFICATIONS[label].includes(justification);
}

/** Zero, one, or both of the label's legal justifications are allowed. */
export function isLegalSelection(label: Label, selected: Iterable<Justification>): boolean {
  for (const justification of selected) {
    if (!isJustificationEnabled(label, justification)) {
      return false;
    }
  }
  return true;
}

export class IllegalSelectionError extends Error {
  constructor(label: Label, justification: Justification) {
    super(`justification ${justification} is not valid for label ${label}`);
    this.name = "IllegalSelectionError";
  }
}

export function buildAnnotationRecord(
  candidateId: string,
  annotatorId: string,
  label: Label,
  selected: Iterable<Justification>,
  timestamp?: string,
): AnnotationRecord {
  const justifications: Justification[] = [];
  for (const justification of selected) {
    if (!isJustificationEnabled(label, justification)) {
      throw new IllegalSelectionError(label, justification);
    }
    if (!justifications.includes(justification)) {
      justifications.push(justification);
    }
  }
  justifications.sort();
  return {
    candidate_id: candidateId,
    annotator_id: annotatorId,
    label,
    justifications,
    timestamp: timestamp ?? new Date().toISOString(),
  };
}
