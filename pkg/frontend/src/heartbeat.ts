/** Lease heartbeat controller.
 *
 * The server counts a heartbeat as activity; the lock expires after 30
 * minutes without one. Any canvas interaction marks activity, but beats are
 * throttled so at most one request goes out per interval. Heartbeats stop
 * permanently once the annotation is submitted or the lease released --
 * a zombie timer must never keep a lease alive.
 */

export type Clock = () => number; // milliseconds

export class HeartbeatLoop {
  private lastSent = -Infinity;
  private stopped = false;
  private pendingActivity = false;

  sent: number[] = [];

  constructor(
    private beat: () => Promise<unknown>,
    private now: Clock = () => Date.now(),
    readonly intervalMs: number = 30_000,
  ) {}

  /** Called on pointer/keyboard interaction with the canvas. */
  activity(): void {
    if (this.stopped) return;
    this.pendingActivity = true;
    this.flush();
  }

  /** Called on a timer tick; sends a beat only if there was activity. */
  tick(): void {
    if (this.stopped) return;
    this.flush();
  }

  private flush(): void {
    if (!this.pendingActivity) return;
    const at = this.now();
    if (at - this.lastSent < this.intervalMs) return;
    this.lastSent = at;
    this.pendingActivity = false;
    this.sent.push(at);
    void this.beat().catch(() => {
      // a failed beat is not fatal; the next interaction retries
      this.pendingActivity = true;
    });
  }

  /** Terminal: after submit or release no further beats are ever sent. */
  stop(): void {
    this.stopped = true;
    this.pendingActivity = false;
  }

  get isStopped(): boolean {
    return this.stopped;
  }
}
