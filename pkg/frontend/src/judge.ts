/** Pairwise judging flow: both transcripts render fully before the forced
 * choice unlocks; there is no tie option and system identities never reach
 * the browser (the server strips them).
 */

import type { AnnotationApi } from "./api.js";
import { RetryQueue, StorageLike } from "./queue.js";
import { renderTranscript } from "./render.js";
import type { ComparisonTask, JudgmentRecord, Winner } from "./types.js";

export class JudgeView {
  private tasks: ComparisonTask[] = [];
  private current: ComparisonTask | null = null;
  private bothRendered = false;
  readonly queue: RetryQueue<JudgmentRecord>;

  private readonly prompt: HTMLElement;
  private readonly leftPane: HTMLElement;
  private readonly rightPane: HTMLElement;
  private readonly leftButton: HTMLButtonElement;
  private readonly rightButton: HTMLButtonElement;
  private readonly status: HTMLElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: AnnotationApi,
    private readonly judgeId: string,
    storage: StorageLike,
    private readonly batchSize = 10,
  ) {
    this.queue = new RetryQueue<JudgmentRecord>(`chatweave-judgments-${judgeId}`, storage);
    const doc = root.ownerDocument;
    this.prompt = doc.createElement("h2");
    this.prompt.className = "axis-prompt";
    const panes = doc.createElement("div");
    panes.className = "panes";
    this.leftPane = doc.createElement("section");
    this.leftPane.className = "transcript transcript-left";
    this.rightPane = doc.createElement("section");
    this.rightPane.className = "transcript transcript-right";
    panes.append(this.leftPane, this.rightPane);
    const choiceRow = doc.createElement("div");
    choiceRow.className = "choice-row";
    this.leftButton = doc.createElement("button");
    this.leftButton.textContent = "left is better";
    this.leftButton.disabled = true;
    this.leftButton.addEventListener("click", () => void this.choose("LEFT"));
    this.rightButton = doc.createElement("button");
    this.rightButton.textContent = "right is better";
    this.rightButton.disabled = true;
    this.rightButton.addEventListener("click", () => void this.choose("RIGHT"));
    choiceRow.append(this.leftButton, this.rightButton);
    this.status = doc.createElement("p");
    this.status.className = "status";
    root.append(this.prompt, panes, choiceRow, this.status);
  }

  handleKey(key: string): void {
    if (key === "ArrowLeft") {
      void this.choose("LEFT");
    } else if (key === "ArrowRight") {
      void this.choose("RIGHT");
    }
  }

  choiceEnabled(): boolean {
    return this.bothRendered;
  }

  async loadNext(): Promise<ComparisonTask | null> {
    if (this.tasks.length === 0) {
      this.tasks = await this.api.fetchComparisonTasks(this.judgeId, this.batchSize);
    }
    this.current = this.tasks.shift() ?? null;
    if (this.current) {
      this.renderTask(this.current);
    } else {
      this.status.textContent = "No comparisons left. Thank you!";
    }
    return this.current;
  }

  renderTask(task: ComparisonTask): void {
    this.bothRendered = false;
    this.leftButton.disabled = true;
    this.rightButton.disabled = true;
    this.prompt.textContent = task.prompt;
    const leftCount = renderTranscript(this.leftPane, task.left);
    const rightCount = renderTranscript(this.rightPane, task.right);
    this.bothRendered = leftCount === task.left.length && rightCount === task.right.length;
    this.leftButton.disabled = !this.bothRendered;
    this.rightButton.disabled = !this.bothRendered;
    this.status.textContent = "";
  }

  async choose(winner: Winner): Promise<JudgmentRecord | null> {
    if (!this.current || !this.bothRendered) {
      return null;
    }
    const record: JudgmentRecord = {
      task_id: this.current.task_id,
      judge_id: this.judgeId,
      winner,
      timestamp: new Date().toISOString(),
    };
    this.queue.enqueue(record);
    const report = await this.queue.flush((r) => this.api.submitJudgment(r));
    if (report.rejected.length > 0) {
      this.status.textContent = `rejected: ${report.rejected[0].detail}`;
    } else if (report.kept.length > 0) {
      this.status.textContent = "offline; judgment queued";
    } else {
      this.status.textContent = "saved";
      await this.loadNext();
    }
    return record;
  }
}
