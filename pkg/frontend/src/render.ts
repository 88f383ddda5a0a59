/** DOM rendering helpers shared by the two task views. */

import type { CandidatePayload, ContextTurn, TranscriptTurn } from "./types.js";

function turnRow(doc: Document, speaker: string): HTMLElement {
  const row = doc.createElement("div");
  row.className = `turn turn-${speaker.toLowerCase()}`;
  const who = doc.createElement("span");
  who.className = "speaker";
  who.textContent = speaker.toLowerCase() === "user" ? "User:" : "Assistant:";
  row.appendChild(who);
  return row;
}

/** Render the dialogue with the candidate highlighted in place: prepended
 * or appended to its system turn, visually distinct from the original
 * response so annotators judge the add-on itself. */
export function renderAnnotationContext(
  container: HTMLElement,
  context: ContextTurn[],
  candidate: CandidatePayload,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  context.forEach((turn, index) => {
    const row = turnRow(doc, turn.speaker);
    const body = doc.createElement("span");
    body.className = "utterance";
    body.textContent = ` ${turn.utterance}`;
    if (index === candidate.turn_index) {
      const highlight = doc.createElement("mark");
      highlight.className = "chitchat-candidate";
      highlight.textContent = candidate.text;
      if (candidate.position === "prepend") {
        row.appendChild(doc.createTextNode(" "));
        row.appendChild(highlight);
        row.appendChild(body);
      } else {
        row.appendChild(body);
        row.appendChild(doc.createTextNode(" "));
        row.appendChild(highlight);
      }
    } else {
      row.appendChild(body);
    }
    container.appendChild(row);
  });
}

/** Render one side of a comparison; returns the number of turns drawn so
 * callers can gate the choice buttons on completeness. */
export function renderTranscript(container: HTMLElement, turns: TranscriptTurn[]): number {
  const doc = container.ownerDocument;
  container.textContent = "";
  for (const turn of turns) {
    const row = turnRow(doc, turn.speaker);
    const body = doc.createElement("span");
    body.className = "utterance";
    body.textContent = ` ${turn.text}`;
    row.appendChild(body);
    container.appendChild(row);
  }
  return turns.length;
}

export function renderGuidance(container: HTMLElement, guidance: string): void {
  container.textContent = "";
  const doc = container.ownerDocument;
  for (const paragraph of guidance.split("\n")) {
    if (!paragraph.trim()) {
      continue;
    }
    const p = doc.createElement("p");
    p.textContent = paragraph;
    container.appendChild(p);
  }
}
