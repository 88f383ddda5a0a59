// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";

import { AnnotateView } from "../src/annotate.js";
import { ALL_JUSTIFICATIONS, LEGAL_JUSTIFICATIONS } from "../src/gating.js";
import type { Justification, Label } from "../src/types.js";
import { FakeApi, MemoryStorage, makeAnnotationTask } from "./fakes.js";

function setup() {
  const api = new FakeApi();
  api.annotationTasks = [makeAnnotationTask()];
  const root = document.createElement("div");
  document.body.appendChild(root);
  const view = new AnnotateView(root, api, "annotator-1", new MemoryStorage(), 5);
  return { api, root, view };
}

describe("annotation view", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("renders the candidate highlighted inside its system turn", async () => {
    const { root, view } = setup();
    await view.loadNext();
    const mark = root.querySelector("mark.chitchat-candidate");
    expect(mark).not.toBeNull();
    expect(mark!.textContent).toBe("It's a great way to kick off the summer.");
    const systemRow = mark!.closest(".turn-system");
    expect(systemRow).not.toBeNull();
    expect(systemRow!.textContent).toContain("It starts at 6:30 pm.");
  });

  it("shows the assistant-role guidance panel", async () => {
    const { root, view } = setup();
    await view.loadNext();
    expect(root.querySelector(".guidance-pane")!.textContent).toContain(
      "Who is the virtual assistant?",
    );
  });

  it("disables the other label's justifications and clears stale ticks", async () => {
    const { view } = setup();
    await view.loadNext();
    view.setLabel("GOOD");
    view.toggleJustification("SOCIAL");
    expect(view.selectedJustifications()).toEqual(["SOCIAL"]);

    view.setLabel("BAD");
    // the good-side tick is dropped and its checkbox is disabled
    expect(view.selectedJustifications()).toEqual([]);
    view.toggleJustification("SOCIAL");
    expect(view.selectedJustifications()).toEqual([]);
    view.toggleJustification("MISLEADING");
    expect(view.selectedJustifications()).toEqual(["MISLEADING"]);
  });

  it("cannot submit before a label is picked", async () => {
    const { api, view } = setup();
    await view.loadNext();
    const record = await view.submit();
    expect(record).toBeNull();
    expect(api.postedAnnotations).toHaveLength(0);
  });

  it("submits the neither-justification case", async () => {
    const { api, view } = setup();
    await view.loadNext();
    view.setLabel("GOOD");
    await view.submit();
    expect(api.postedAnnotations).toHaveLength(1);
    expect(api.postedAnnotations[0].justifications).toEqual([]);
  });

  it("every reachable control state posts a schema-legal record", async () => {
    const labels: Label[] = ["GOOD", "BAD"];
    for (const label of labels) {
      for (let mask = 0; mask < 16; mask++) {
        const attempt = ALL_JUSTIFICATIONS.filter((_, i) => mask & (1 << i));
        const { api, view } = setup();
        await view.loadNext();
        view.setLabel(label);
        for (const justification of attempt) {
          view.toggleJustification(justification);
        }
        await view.submit();
        expect(api.postedAnnotations).toHaveLength(1);
        const posted = api.postedAnnotations[0];
        const legal = LEGAL_JUSTIFICATIONS[label];
        // disabled checkboxes ignored the toggle, so only legal picks remain
        const expected = attempt.filter((j) => legal.includes(j)).sort();
        expect(posted.label).toBe(label);
        expect(posted.justifications).toEqual(expected);
        expect(posted.justifications.every((j: Justification) => legal.includes(j))).toBe(
          true,
        );
      }
    }
  });

  it("surfaces server rejections inline without losing the view", async () => {
    const { api, root, view } = setup();
    api.annotationOutcome = { delivered: false, rejected: true, detail: "schema break" };
    await view.loadNext();
    view.setLabel("GOOD");
    await view.submit();
    expect(root.querySelector(".status")!.textContent).toContain("schema break");
    expect(view.queue.pending()).toEqual([]);
  });

  it("queues the record when the network is down", async () => {
    const { api, root, view } = setup();
    api.annotationOutcome = { delivered: false, rejected: false };
    await view.loadNext();
    view.setLabel("BAD");
    await view.submit();
    expect(view.queue.pending()).toHaveLength(1);
    expect(root.querySelector(".status")!.textContent).toContain("queued");

    // connectivity returns: the queued record is delivered on the next flush
    api.annotationOutcome = { delivered: true, rejected: false };
    const report = await view.queue.flush((r) => api.submitAnnotation(r));
    expect(report.delivered).toHaveLength(1);
    expect(api.postedAnnotations).toHaveLength(1);
  });

  it("keyboard shortcuts drive label and justification selection", async () => {
    const { api, view } = setup();
    await view.loadNext();
    view.handleKey("g");
    view.handleKey("2");
    expect(view.selectedJustifications()).toEqual(["USEFUL"]);
    view.handleKey("Enter");
    await new Promise((resolve) => setTimeout(resolve, 0));
    expect(api.postedAnnotations).toHaveLength(1);
    expect(api.postedAnnotations[0].justifications).toEqual(["USEFUL"]);
  });
});
