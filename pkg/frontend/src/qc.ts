/** Quality-check queue view model.
 *
 * Human annotations render in orange, machine output in green with an
 * auto-accept badge. Edit mode drags one vertex at a time; saving PATCHes
 * the full new vertex list. Server conflicts (409/422) surface inline.
 */

import { ApiClient, ApiError, AnnotationDoc, Point } from "./api.js";

export const HUMAN_COLOR = "#e8860c";
export const MACHINE_COLOR = "#27a845";

export interface QcItemView {
  annotation: AnnotationDoc;
  color: string;
  autoAcceptBadge: boolean;
}

export class QcQueue {
  items: AnnotationDoc[] = [];
  error: string | null = null;

  constructor(private api: ApiClient, private reviewer: string) {}

  async load(authorKind?: string): Promise<void> {
    this.items = (await this.api.qcQueue(authorKind)) ?? [];
    this.error = null;
  }

  views(): QcItemView[] {
    return this.items.map((annotation) => ({
      annotation,
      color: annotation.machine_authored ? MACHINE_COLOR : HUMAN_COLOR,
      autoAcceptBadge: annotation.status === "auto_accepted",
    }));
  }

  private removeLocal(annotationId: string): void {
    this.items = this.items.filter((a) => a.annotation_id !== annotationId);
  }

  async accept(annotationId: string): Promise<void> {
    try {
      await this.api.qcAccept(annotationId, this.reviewer);
      this.removeLocal(annotationId);
      this.error = null;
    } catch (err) {
      this.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  async reject(annotationId: string, reason: string): Promise<void> {
    try {
      await this.api.qcReject(annotationId, this.reviewer, reason);
      this.removeLocal(annotationId);
      this.error = null;
    } catch (err) {
      this.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }

  /** Begin editing: a mutable copy of the vertex list. */
  startEdit(annotationId: string): VertexEditor {
    const item = this.items.find((a) => a.annotation_id === annotationId);
    if (!item) throw new Error(`no queued annotation ${annotationId}`);
    return new VertexEditor(item);
  }

  async saveEdit(editor: VertexEditor, newLabel?: string): Promise<void> {
    const changes: { polygon?: Point[]; label_id?: string } = {};
    if (editor.dirty) changes.polygon = editor.vertices;
    if (newLabel) changes.label_id = newLabel;
    try {
      const updated = await this.api.qcEdit(
        editor.annotation.annotation_id, this.reviewer, changes);
      if (updated) {
        this.items = this.items.map((a) =>
          a.annotation_id === updated.annotation_id ? updated : a);
      }
      this.error = null;
    } catch (err) {
      this.error = err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  }
}

export class VertexEditor {
  vertices: Point[];
  dirty = false;

  constructor(readonly annotation: AnnotationDoc) {
    this.vertices = annotation.polygon.map(([x, y]) => [x, y]);
  }

  dragVertex(index: number, x: number, y: number): void {
    if (index < 0 || index >= this.vertices.length) {
      throw new Error(`vertex index ${index} out of range`);
    }
    this.vertices[index] = [x, y];
    this.dirty = true;
  }
}
