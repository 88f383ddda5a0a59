/** Persistent submission queue.
 *
 * Records are written to storage before the first delivery attempt, so a
 * refresh or dropped connection never loses an unsubmitted record. Flushing
 * distinguishes transport failures (record stays queued) from server
 * rejections (record is dequeued and reported, its data handed back to the
 * caller to surface inline).
 */

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface SubmitOutcome {
  delivered: boolean;
  rejected: boolean;
  detail?: string;
}

export interface FlushReport<T> {
  delivered: T[];
  rejected: { record: T; detail: string }[];
  kept: T[];
}

export class RetryQueue<T> {
  constructor(
    private readonly key: string,
    private readonly storage: StorageLike,
  ) {}

  pending(): T[] {
    const raw = this.storage.getItem(this.key);
    if (!raw) {
      return [];
    }
    try {
      return JSON.parse(raw) as T[];
    } catch {
      return [];
    }
  }

  private write(records: T[]): void {
    if (records.length === 0) {
      this.storage.removeItem(this.key);
    } else {
      this.storage.setItem(this.key, JSON.stringify(records));
    }
  }

  enqueue(record: T): void {
    const records = this.pending();
    records.push(record);
    this.write(records);
  }

  async flush(submit: (record: T) => Promise<SubmitOutcome>): Promise<FlushReport<T>> {
    const report: FlushReport<T> = { delivered: [], rejected: [], kept: [] };
    for (const record of this.pending()) {
      let outcome: SubmitOutcome;
      try {
        outcome = await submit(record);
      } catch {
        outcome = { delivered: false, rejected: false };
      }
      if (outcome.delivered) {
        report.delivered.push(record);
      } else if (outcome.rejected) {
        report.rejected.push({ record, detail: outcome.detail ?? "rejected" });
      } else {
        report.kept.push(record);
      }
    }
    this.write(report.kept);
    return report;
  }
}
