/** Replay fetch: serves responses recorded from the real API server. */

import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import type { FetchLike } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export interface Recorded {
  meta: Record<string, any>;
  responses: Record<string, { status: number; body: unknown }>;
}

export function loadRecording(): Recorded {
  return JSON.parse(
    readFileSync(join(here, "fixtures", "recorded_api.json"), "utf-8"));
}

export class ReplayFetch {
  calls: { method: string; url: string; body?: unknown }[] = [];
  /** Route overrides checked before the recording. */
  overrides = new Map<string, { status: number; body: unknown }>();

  constructor(private recording: Recorded) {}

  fetch: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    this.calls.push({ method, url, body });
    const key = `${method} ${url}`;
    const hit = this.overrides.get(key) ?? this.recording.responses[key];
    if (!hit) {
      return new Response(JSON.stringify({ error: "NotRecorded", message: key }),
        { status: 404, headers: { "Content-Type": "application/json" } });
    }
    if (hit.status === 204) return new Response(null, { status: 204 });
    return new Response(JSON.stringify(hit.body), {
      status: hit.status,
      headers: { "Content-Type": "application/json" },
    });
  };

  callCount(method: string, urlPrefix: string): number {
    return this.calls.filter(
      (c) => c.method === method && c.url.startsWith(urlPrefix)).length;
  }
}
