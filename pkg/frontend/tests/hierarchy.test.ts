import { describe, expect, it } from "vitest";

import { ApiClient, HierarchyNode } from "../src/api.js";
import { HierarchySelection } from "../src/hierarchy.js";
import { ReplayFetch, loadRecording } from "./helpers.js";

const recording = loadRecording();

async function recordedRoot(): Promise<HierarchyNode> {
  const replay = new ReplayFetch(recording);
  const api = new ApiClient("", replay.fetch);
  const response = await replay.fetch("/api/hierarchy");
  void api;
  return (await response.json()) as HierarchyNode;
}

describe("hierarchy dropdowns", () => {
  it("cascades from root to a leaf label", async () => {
    const selection = new HierarchySelection(await recordedRoot());
    expect(selection.submitEnabled).toBe(false);
    let levels = selection.levels();
    expect(levels.length).toBe(1);
    expect(levels[0].options.map((o) => o.nodeId)).toContain("vehicles");

    selection.select(0, "vehicles");
    levels = selection.levels();
    expect(levels.length).toBe(2);
    expect(levels[1].options.map((o) => o.nodeId)).toEqual(
      ["airborne_vehicles", "ground_vehicles", "rotorcrafts"]);
    expect(selection.submitEnabled).toBe(false); // non-leaf path

    selection.select(1, "ground_vehicles");
    expect(selection.labelId()).toBe("ground_vehicles");
    expect(selection.submitEnabled).toBe(true);
  });

  it("reselecting an ancestor discards the deeper choice", async () => {
    const selection = new HierarchySelection(await recordedRoot());
    selection.select(0, "vehicles");
    selection.select(1, "rotorcrafts");
    expect(selection.labelId()).toBe("rotorcrafts");
    selection.select(0, "infrastructure");
    expect(selection.labelId()).toBeNull();
    expect(selection.levels().length).toBe(2);
  });

  it("reference lookups cover the no-references state", async () => {
    const replay = new ReplayFetch(recording);
    const api = new ApiClient("", replay.fetch);
    const some = (await api.references("ground_vehicles"))!;
    expect(some.length).toBe(2);
    expect(some[0].url).toContain("/files/references/ground_vehicles/");
    const none = (await api.references("buildings"))!;
    expect(none).toEqual([]); // "no references" empty state
  });
});
