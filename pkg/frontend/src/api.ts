// Thin fetch client for the linking service.

import type { ComponentListing, KbInfo, RunResponse } from "./types.js";

export class ApiError extends Error {
  status: number;
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.status = status;
    this.detail = detail;
  }
}

async function parseOrThrow(response: Response): Promise<unknown> {
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // error responses may have empty bodies
  }
  if (!response.ok) {
    const detail =
      body && typeof body === "object" && "detail" in (body as Record<string, unknown>)
        ? (body as Record<string, unknown>)["detail"]
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body;
}

export async function getComponents(base = ""): Promise<ComponentListing> {
  return (await parseOrThrow(await fetch(`${base}/api/components`))) as ComponentListing;
}

export async function listKbs(base = ""): Promise<KbInfo[]> {
  return (await parseOrThrow(await fetch(`${base}/api/kb`))) as KbInfo[];
}

export async function uploadKb(name: string, jsonl: string, base = ""): Promise<KbInfo> {
  const response = await fetch(`${base}/api/kb?name=${encodeURIComponent(name)}`, {
    method: "POST",
    headers: { "Content-Type": "text/plain; charset=utf-8" },
    body: jsonl,
  });
  return (await parseOrThrow(response)) as KbInfo;
}

export async function runPipeline(
  kbId: string,
  text: string,
  config: Record<string, unknown>,
  base = "",
): Promise<RunResponse> {
  const response = await fetch(`${base}/api/run`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ kb_id: kbId, text, config }),
  });
  return (await parseOrThrow(response)) as RunResponse;
}
