/** Reference client for the worker wire protocol.
 *
 * Demonstrates the pull-based lifecycle a real training harness follows:
 * poll for a job, read its exported bundle, post metrics and predictions
 * while running, then complete. Polygon predictions carry [[x,y],...];
 * mask predictions carry {size: [h, w], counts: [...]} with alternating
 * 0/1 run lengths in row-major order, starting with the 0-run.
 */

import type { FetchLike, Point } from "./api.js";

export interface WorkerJob {
  job_id: string;
  model_id: string;
  training_instance: number;
  bundle_dir: string;
  adapter_format: string;
  config: Record<string, unknown>;
  split: { train: string[]; eval: string[]; seed: number; ratio: number };
}

export interface PredictionUpload {
  image_id: string;
  label: string;
  polygon?: Point[];
  mask_rle?: { size: [number, number]; counts: number[] };
  confidence: number;
}

export interface MetricsUpload {
  label_id: string;
  mean_iou: number;
  sample_count: number;
}

export class WorkerClient {
  constructor(
    private baseUrl: string,
    private workerId: string,
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new Error(`${payload.error}: ${payload.message}`);
    }
    return payload as T;
  }

  /** One poll; null when no job is pending. */
  async claimNext(): Promise<WorkerJob | null> {
    const response = await this.fetchFn(
      `${this.baseUrl}/api/worker/jobs/next?worker_id=${this.workerId}`);
    if (response.status === 204) return null;
    const payload = await response.json();
    if (!response.ok) throw new Error(payload.error);
    return payload as WorkerJob;
  }

  postMetrics(jobId: string, records: MetricsUpload[]): Promise<{ accepted: number }> {
    return this.post(`/api/worker/jobs/${jobId}/metrics`, { records });
  }

  postPredictions(jobId: string, predictions: PredictionUpload[]):
      Promise<{ results: Record<string, string>[] }> {
    return this.post(`/api/worker/jobs/${jobId}/predictions`, { predictions });
  }

  complete(jobId: string, outcome: "completed" | "failed", reason?: string):
      Promise<WorkerJob> {
    return this.post(`/api/worker/jobs/${jobId}/complete`, { outcome, reason });
  }
}
