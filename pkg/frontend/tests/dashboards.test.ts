import { describe, expect, it } from "vitest";

import { ApiClient, ModelTimeline } from "../src/api.js";
import { renderLineChart, seriesFromTimelines } from "../src/dashboards.js";
import { ReplayFetch, loadRecording } from "./helpers.js";

const recording = loadRecording();

async function recordedTimelines() {
  const replay = new ReplayFetch(recording);
  const api = new ApiClient("", replay.fetch);
  const models = (await api.listModels())!;
  const out = [];
  for (const model of models.filter((m) => m.display_name.startsWith("demo_model"))) {
    const timeline = (await api.modelTimeline(model.model_id))!;
    out.push({ label: model.display_name, timeline });
  }
  return out;
}

describe("dashboards", () => {
  it("renders the recorded 2-model fixture series", async () => {
    const timelines = await recordedTimelines();
    expect(timelines.length).toBe(2);
    const svg = renderLineChart(seriesFromTimelines(timelines));
    expect(svg.match(/<polyline/g)?.length).toBe(2);
    expect(svg).toContain('data-series="demo_model_a"');
    expect(svg).toContain('data-series="demo_model_b"');
    // three instances per model -> three markers each
    expect(svg.match(/<circle/g)?.length).toBe(6);
  });

  it("shows the plateau badge when the server reports it", async () => {
    const timelines = await recordedTimelines();
    const flat = timelines.find((t) => t.label === "demo_model_b")!;
    // recorded series 0.4 -> 0.55 -> 0.555 is not plateaued (first delta 0.15)
    expect(flat.timeline.plateaued).toBe(false);
    const plateaued: ModelTimeline = {
      ...flat.timeline,
      plateaued: true,
    };
    const svg = renderLineChart(
      seriesFromTimelines([{ label: "m", timeline: plateaued }]));
    expect(svg).toContain("training plateaued");
  });

  it("sorts points by training instance", () => {
    const timeline: ModelTimeline = {
      model_id: "m",
      plateaued: false,
      series: [
        { training_instance: 3, mean_iou: 0.7 },
        { training_instance: 1, mean_iou: 0.5 },
        { training_instance: 2, mean_iou: 0.6 },
      ],
    };
    const [series] = seriesFromTimelines([{ label: "m", timeline }]);
    expect(series.points.map((p) => p.training_instance)).toEqual([1, 2, 3]);
  });

  it("renders an empty state without data", () => {
    const svg = renderLineChart([]);
    expect(svg).toContain("no metrics recorded yet");
    expect(svg).not.toContain("<polyline");
  });
});
