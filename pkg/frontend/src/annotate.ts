/** Annotation flow: fetch task batches, enforce justification gating in the
 * controls, and submit through the persistent queue so nothing is lost on
 * refresh or network failure. Server rejections surface inline.
 */

import type { AnnotationApi } from "./api.js";
import {
  ALL_JUSTIFICATIONS,
  buildAnnotationRecord,
  isJustificationEnabled,
} from "./gating.js";
import { RetryQueue, StorageLike } from "./queue.js";
import { renderAnnotationContext, renderGuidance } from "./render.js";
import type { AnnotationRecord, AnnotationTask, Justification, Label } from "./types.js";

const JUSTIFICATION_CAPTIONS: Record<Justification, string> = {
  SOCIAL: "Social: keeps the conversation flowing smoothly",
  USEFUL: "Useful: adds pertinent, truthful information or opinions",
  INAPPROPRIATE: "Inappropriate: does not fit the context or the assistant's role",
  MISLEADING: "Misleading: adds unverified or false information",
};

export class AnnotateView {
  private tasks: AnnotationTask[] = [];
  private current: AnnotationTask | null = null;
  private label: Label | null = null;
  private readonly checked = new Set<Justification>();
  readonly queue: RetryQueue<AnnotationRecord>;

  private readonly contextPane: HTMLElement;
  private readonly guidancePane: HTMLElement;
  private readonly controls: HTMLElement;
  private readonly status: HTMLElement;
  private readonly labelButtons = new Map<Label, HTMLButtonElement>();
  private readonly checkboxes = new Map<Justification, HTMLInputElement>();
  private submitButton!: HTMLButtonElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: AnnotationApi,
    private readonly annotatorId: string,
    storage: StorageLike,
    private readonly batchSize = 10,
  ) {
    this.queue = new RetryQueue<AnnotationRecord>(
      `chatweave-annotations-${annotatorId}`,
      storage,
    );
    const doc = root.ownerDocument;
    this.contextPane = doc.createElement("section");
    this.contextPane.className = "context-pane";
    this.guidancePane = doc.createElement("aside");
    this.guidancePane.className = "guidance-pane";
    this.controls = doc.createElement("section");
    this.controls.className = "controls";
    this.status = doc.createElement("p");
    this.status.className = "status";
    root.append(this.guidancePane, this.contextPane, this.controls, this.status);
    this.buildControls();
  }

  private buildControls(): void {
    const doc = this.root.ownerDocument;
    for (const label of ["GOOD", "BAD"] as Label[]) {
      const button = doc.createElement("button");
      button.textContent = label.toLowerCase();
      button.className = `label-button label-${label.toLowerCase()}`;
      button.addEventListener("click", () => this.setLabel(label));
      this.labelButtons.set(label, button);
      this.controls.appendChild(button);
    }
    for (const justification of ALL_JUSTIFICATIONS) {
      const wrapper = doc.createElement("label");
      wrapper.className = "justification";
      const box = doc.createElement("input");
      box.type = "checkbox";
      box.disabled = true;
      box.addEventListener("change", () => {
        if (box.checked) {
          this.checked.add(justification);
        } else {
          this.checked.delete(justification);
        }
      });
      wrapper.appendChild(box);
      wrapper.appendChild(doc.createTextNode(JUSTIFICATION_CAPTIONS[justification]));
      this.checkboxes.set(justification, box);
      this.controls.appendChild(wrapper);
    }
    this.submitButton = doc.createElement("button");
    this.submitButton.textContent = "submit";
    this.submitButton.className = "submit";
    this.submitButton.disabled = true;
    this.submitButton.addEventListener("click", () => void this.submit());
    this.controls.appendChild(this.submitButton);
  }

  /** Keyboard shortcuts: g/b pick the label, 1/2 toggle its justifications
   * in display order, Enter submits. */
  handleKey(key: string): void {
    if (key === "g") {
      this.setLabel("GOOD");
    } else if (key === "b") {
      this.setLabel("BAD");
    } else if ((key === "1" || key === "2") && this.label) {
      const legal = ALL_JUSTIFICATIONS.filter((j) =>
        isJustificationEnabled(this.label as Label, j),
      );
      const justification = legal[Number(key) - 1];
      if (justification) {
        this.toggleJustification(justification);
      }
    } else if (key === "Enter") {
      void this.submit();
    }
  }

  setLabel(label: Label): void {
    this.label = label;
    for (const [name, button] of this.labelButtons) {
      button.classList.toggle("selected", name === label);
    }
    for (const [justification, box] of this.checkboxes) {
      const enabled = isJustificationEnabled(label, justification);
      box.disabled = !enabled;
      if (!enabled && box.checked) {
        box.checked = false;
        this.checked.delete(justification);
      }
    }
    this.submitButton.disabled = false;
  }

  toggleJustification(justification: Justification): void {
    const box = this.checkboxes.get(justification);
    if (!box || box.disabled) {
      return;
    }
    box.checked = !box.checked;
    if (box.checked) {
      this.checked.add(justification);
    } else {
      this.checked.delete(justification);
    }
  }

  selectedJustifications(): Justification[] {
    return [...this.checked].sort();
  }

  async loadNext(): Promise<AnnotationTask | null> {
    if (this.tasks.length === 0) {
      this.tasks = await this.api.fetchAnnotationTasks(this.annotatorId, this.batchSize);
    }
    this.current = this.tasks.shift() ?? null;
    if (this.current) {
      this.renderTask(this.current);
    } else {
      this.status.textContent = "No tasks left. Thank you!";
    }
    return this.current;
  }

  renderTask(task: AnnotationTask): void {
    renderGuidance(this.guidancePane, task.guidance);
    renderAnnotationContext(this.contextPane, task.context, task.candidate);
    this.label = null;
    this.checked.clear();
    for (const [, box] of this.checkboxes) {
      box.checked = false;
      box.disabled = true;
    }
    for (const [, button] of this.labelButtons) {
      button.classList.remove("selected");
    }
    this.submitButton.disabled = true;
    this.status.textContent = "";
  }

  /** Queue the record, then try to deliver everything pending. */
  async submit(): Promise<AnnotationRecord | null> {
    if (!this.current || !this.label) {
      return null;
    }
    const record = buildAnnotationRecord(
      this.current.candidate.candidate_id,
      this.annotatorId,
      this.label,
      this.selectedJustifications(),
    );
    this.queue.enqueue(record);
    const report = await this.queue.flush((r) => this.api.submitAnnotation(r));
    if (report.rejected.length > 0) {
      this.status.textContent = `rejected: ${report.rejected[0].detail}`;
    } else if (report.kept.length > 0) {
      this.status.textContent = "offline; submission queued";
    } else {
      this.status.textContent = "saved";
      await this.loadNext();
    }
    return record;
  }
}
