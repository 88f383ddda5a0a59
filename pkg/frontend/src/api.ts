/** Thin client for the annotation service HTTP API. */

import type {
  AnnotationRecord,
  AnnotationTask,
  ComparisonTask,
  JudgmentRecord,
} from "./types.js";
import type { SubmitOutcome } from "./queue.js";

type FetchLike = typeof fetch;

/** Structural interface the task views depend on; tests substitute fakes. */
export interface AnnotationApi {
  fetchAnnotationTasks(annotator: string, n: number): Promise<AnnotationTask[]>;
  fetchComparisonTasks(judge: string, n: number): Promise<ComparisonTask[]>;
  submitAnnotation(record: AnnotationRecord): Promise<SubmitOutcome>;
  submitJudgment(record: JudgmentRecord): Promise<SubmitOutcome>;
}

export class ApiClient implements AnnotationApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private url(path: string, params?: Record<string, string | number>): string {
    const url = new URL(path, this.baseUrl);
    for (const [key, value] of Object.entries(params ?? {})) {
      url.searchParams.set(key, String(value));
    }
    return url.toString();
  }

  async fetchAnnotationTasks(annotator: string, n: number): Promise<AnnotationTask[]> {
    const response = await this.fetchFn(this.url("/tasks", { annotator, n }));
    if (!response.ok) {
      throw new Error(`task fetch failed: ${response.status}`);
    }
    const body = (await response.json()) as { tasks: AnnotationTask[] };
    return body.tasks;
  }

  async fetchComparisonTasks(judge: string, n: number): Promise<ComparisonTask[]> {
    const response = await this.fetchFn(
      this.url("/tasks", { type: "comparison", judge, n }),
    );
    if (!response.ok) {
      throw new Error(`comparison fetch failed: ${response.status}`);
    }
    const body = (await response.json()) as { tasks: ComparisonTask[] };
    return body.tasks;
  }

  private async post(path: string, payload: unknown): Promise<SubmitOutcome> {
    const response = await this.fetchFn(this.url(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (response.ok) {
      return { delivered: true, rejected: false };
    }
    if (response.status >= 400 && response.status < 500) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) {
          detail = body.detail;
        }
      } catch {
        // keep the status code as detail
      }
      return { delivered: false, rejected: true, detail };
    }
    return { delivered: false, rejected: false };
  }

  submitAnnotation(record: AnnotationRecord): Promise<SubmitOutcome> {
    return this.post("/annotations", record);
  }

  submitJudgment(record: JudgmentRecord): Promise<SubmitOutcome> {
    return this.post("/judgments", record);
  }

  async stats(): Promise<unknown> {
    const response = await this.fetchFn(this.url("/stats"));
    if (!response.ok) {
      throw new Error(`stats fetch failed: ${response.status}`);
    }
    return response.json();
  }
}
