// View model: the latest snapshot plus connection bookkeeping. The page
// renders only from this — there is no client-side simulation, so a reload
// mid-trial reproduces the identical view from the next snapshot.

import { Command, Snapshot } from "./protocol.js";

export const STALE_AFTER_MS = 1000;

export interface SentCommand {
  command: Command;
  simTime: number; // sim-time of the latest snapshot when the user acted
  wallMs: number;
}

export class ViewModel {
  snapshot: Snapshot | null = null;
  connected = false;
  lastSnapshotMs = 0;
  selectedScenario: string | null = null;
  sent: SentCommand[] = [];
  protocolErrors: string[] = [];

  applySnapshot(snap: Snapshot, nowMs: number): void {
    this.snapshot = snap;
    this.connected = true;
    this.lastSnapshotMs = nowMs;
  }

  noteSent(command: Command, nowMs: number): SentCommand {
    const entry = { command, simTime: this.simTime(), wallMs: nowMs };
    this.sent.push(entry);
    return entry;
  }

  noteError(message: string): void {
    this.protocolErrors.push(message);
    if (this.protocolErrors.length > 20) this.protocolErrors.shift();
  }

  simTime(): number {
    return this.snapshot ? this.snapshot.sim_time : 0;
  }

  // No snapshot for over a second means the view can no longer be trusted.
  isStale(nowMs: number): boolean {
    return !this.connected || nowMs - this.lastSnapshotMs > STALE_AFTER_MS;
  }

  disconnected(): void {
    this.connected = false;
  }
}
