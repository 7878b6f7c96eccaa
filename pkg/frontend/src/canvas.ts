/** Polygon drawing state machine.
 *
 * Coordinates are stored in image space, never screen space, so zooming
 * the canvas cannot distort a saved polygon. Clicking within the snap
 * radius of the first vertex closes the polygon; Escape discards it.
 */

import type { Point } from "./api.js";

export const SNAP_RADIUS_PX = 8;
export const MIN_VERTICES = 3;

export class CloseTooEarly extends Error {
  constructor(count: number) {
    super(`polygon needs at least ${MIN_VERTICES} vertices, has ${count}`);
  }
}

export interface CommittedPolygon {
  polygon: Point[];
  labelId: string;
}

export class CanvasSession {
  private vertices: Point[] = [];
  private committed: CommittedPolygon[] = [];
  private zoom = 1;

  constructor(readonly imageWidth: number, readonly imageHeight: number) {}

  setZoom(factor: number): void {
    if (factor > 0) this.zoom = factor;
  }

  /** Screen-space click; stored in image space. Returns "closed" when the
   * click lands within the snap radius of the first vertex. */
  click(screenX: number, screenY: number): "vertex" | "closed" {
    const x = screenX / this.zoom;
    const y = screenY / this.zoom;
    if (this.vertices.length > 0) {
      const [fx, fy] = this.vertices[0];
      const snapImage = SNAP_RADIUS_PX / this.zoom;
      if (Math.hypot(x - fx, y - fy) <= snapImage) {
        this.close();
        return "closed";
      }
    }
    this.vertices.push([
      Math.min(Math.max(x, 0), this.imageWidth),
      Math.min(Math.max(y, 0), this.imageHeight),
    ]);
    return "vertex";
  }

  close(): Point[] {
    if (this.vertices.length < MIN_VERTICES) {
      throw new CloseTooEarly(this.vertices.length);
    }
    const done = this.vertices;
    this.vertices = [];
    this.pending = done;
    return done;
  }

  /** The polygon waiting for a label before commit. */
  pending: Point[] | null = null;

  escape(): void {
    this.vertices = [];
    this.pending = null;
  }

  get inProgress(): readonly Point[] {
    return this.vertices;
  }

  commit(labelId: string): CommittedPolygon {
    if (!this.pending) throw new Error("no closed polygon to commit");
    const entry = { polygon: this.pending, labelId };
    this.committed.push(entry);
    this.pending = null;
    return entry;
  }

  get committedPolygons(): readonly CommittedPolygon[] {
    return this.committed;
  }

  /** Canonical wire form: [[x,y],...] exactly as the server stores it. */
  static serialize(polygon: Point[]): string {
    return JSON.stringify(polygon);
  }
}
