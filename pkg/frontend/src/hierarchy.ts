/** Cascading dropdown state over the label hierarchy.
 *
 * Each selection narrows one level; the submit control stays disabled until
 * the path reaches a leaf (a label class).
 */

import type { HierarchyNode } from "./api.js";

export interface DropdownLevel {
  options: { nodeId: string; name: string }[];
  selected: string | null;
}

export class HierarchySelection {
  private path: HierarchyNode[] = [];

  constructor(private root: HierarchyNode) {}

  /** One dropdown per traversed level plus the next open level. */
  levels(): DropdownLevel[] {
    const out: DropdownLevel[] = [];
    let node = this.root;
    for (const chosen of this.path) {
      out.push({
        options: node.children.map((c) => ({ nodeId: c.node_id, name: c.name })),
        selected: chosen.node_id,
      });
      node = chosen;
    }
    if (node.children.length > 0) {
      out.push({
        options: node.children.map((c) => ({ nodeId: c.node_id, name: c.name })),
        selected: null,
      });
    }
    return out;
  }

  /** Select an option at a level; deeper selections are discarded. */
  select(level: number, nodeId: string): void {
    const parent = level === 0 ? this.root : this.path[level - 1];
    const node = parent.children.find((c) => c.node_id === nodeId);
    if (!node) throw new Error(`no child ${nodeId} at level ${level}`);
    this.path = this.path.slice(0, level);
    this.path.push(node);
  }

  /** The resolved label id, or null while the path ends on a non-leaf. */
  labelId(): string | null {
    const last = this.path[this.path.length - 1];
    if (!last || last.children.length > 0) return null;
    return last.node_id;
  }

  get submitEnabled(): boolean {
    return this.labelId() !== null;
  }

  reset(): void {
    this.path = [];
  }
}
