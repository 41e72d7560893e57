// View-model and controller for the annotation console. No DOM here: the
// app layer renders from this state and calls the controller's actions, so
// the whole labelling flow is testable against a real server.

import {
  ApiError,
  BatchResponse,
  Histogram,
  Label,
  SessionApi,
  StatusResponse,
} from "./api.js";

export interface PendingDoc {
  id: string;
  text: string;
  label: Label | null;
}

export type Phase = "SEEDING" | "ACTIVE" | "EXPORT-ONLY";

export class ConsoleViewModel {
  sessionId: string | null = null;
  phase: Phase = "SEEDING";
  docs: PendingDoc[] = [];
  cursor = 0;
  labelled = 0;
  budget = 0;
  corpusSize = 0;
  histogram: Histogram | null = null;
  submitting = false;
  lastError: string | null = null;

  loadBatch(batch: BatchResponse): void {
    // keep the annotator's choices for ids that survive a reload
    const kept = new Map(this.docs.map((d) => [d.id, d.label]));
    this.docs = batch.doc_ids.map((id, i) => ({
      id,
      text: batch.texts[i],
      label: kept.get(id) ?? null,
    }));
    this.phase = batch.phase as Phase;
    this.cursor = 0;
  }

  applyStatus(status: StatusResponse): void {
    this.phase = status.phase as Phase;
    this.labelled = status.labelled;
    this.budget = status.budget;
    this.corpusSize = status.corpus_size;
    this.histogram = status.confidence_histogram;
  }

  setLabel(docId: string, label: Label): void {
    const doc = this.docs.find((d) => d.id === docId);
    if (doc) doc.label = label;
  }

  labelCurrent(label: Label): void {
    const doc = this.docs[this.cursor];
    if (doc) {
      doc.label = label;
      this.next();
    }
  }

  next(): void {
    if (this.cursor < this.docs.length - 1) this.cursor += 1;
  }

  prev(): void {
    if (this.cursor > 0) this.cursor -= 1;
  }

  allLabelled(): boolean {
    return this.docs.length > 0 && this.docs.every((d) => d.label !== null);
  }

  chosenLabels(): Record<string, Label> {
    const labels: Record<string, Label> = {};
    for (const doc of this.docs) {
      if (doc.label === null) throw new Error(`document ${doc.id} is unlabelled`);
      labels[doc.id] = doc.label;
    }
    return labels;
  }

  progressFraction(): number {
    return this.budget > 0 ? this.labelled / this.budget : 0;
  }
}

export class ConsoleController {
  constructor(public api: SessionApi, public vm: ConsoleViewModel) {}

  async start(opts: { strategy?: string; budget?: number; seed?: number } = {}): Promise<void> {
    const session = await this.api.createSession(opts);
    this.vm.sessionId = session.session_id;
    this.vm.budget = session.budget;
    this.vm.phase = session.phase as Phase;
    this.vm.loadBatch(await this.api.getBatch(session.session_id));
    this.vm.applyStatus(await this.api.getStatus(session.session_id));
  }

  /** Submit the chosen labels. Exactly the user's choices are posted, and a
   * duplicate call while one is in flight is a no-op. On a conflict the
   * pending batch is reloaded with matching choices preserved. */
  async submit(): Promise<void> {
    const vm = this.vm;
    if (!vm.sessionId || vm.submitting || !vm.allLabelled()) return;
    vm.submitting = true;
    vm.lastError = null;
    try {
      const status = await this.api.postLabels(vm.sessionId, vm.chosenLabels());
      vm.applyStatus(status);
      if (status.phase === "EXPORT-ONLY") {
        vm.docs = [];
      } else {
        vm.docs = [];
        vm.loadBatch(await this.api.getBatch(vm.sessionId));
      }
    } catch (err) {
      if (err instanceof ApiError && err.status === 409 && vm.sessionId) {
        // stale batch: reload and keep the labels that still apply
        try {
          vm.loadBatch(await this.api.getBatch(vm.sessionId));
        } catch {
          vm.phase = "EXPORT-ONLY";
          vm.docs = [];
        }
        vm.lastError = `conflict: ${err.message}`;
      } else {
        vm.lastError = err instanceof Error ? err.message : String(err);
      }
    } finally {
      vm.submitting = false;
    }
  }

  async refreshStatus(): Promise<void> {
    if (this.vm.sessionId) {
      this.vm.applyStatus(await this.api.getStatus(this.vm.sessionId));
    }
  }

  exportUrl(): string | null {
    return this.vm.sessionId ? this.api.exportUrl(this.vm.sessionId) : null;
  }
}
