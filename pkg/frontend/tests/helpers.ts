// Scripted fetch stub: each test declares the exact request sequence it
// expects and the responses to serve. Any out-of-order or extra request
// fails the test immediately.

import { vi } from "vitest";

export interface ScriptedCall {
  method: string;
  // substring the request URL must contain
  path: string;
  status: number;
  body?: unknown;
}

export interface FetchLog {
  url: string;
  method: string;
  body: unknown;
}

export interface ScriptedFetch {
  calls: FetchLog[];
  remaining(): number;
}

export function scriptFetch(script: ScriptedCall[]): ScriptedFetch {
  const queue = [...script];
  const calls: FetchLog[] = [];
  vi.stubGlobal("fetch", async (url: string | URL, init?: RequestInit) => {
    const target = String(url);
    const method = init?.method ?? "GET";
    const next = queue.shift();
    if (!next) {
      throw new Error(`unexpected request ${method} ${target}`);
    }
    if (method !== next.method || !target.includes(next.path)) {
      throw new Error(
        `expected ${next.method} *${next.path}*, got ${method} ${target}`);
    }
    let body: unknown = null;
    if (typeof init?.body === "string") body = JSON.parse(init.body);
    calls.push({ url: target, method, body });
    if (next.body === undefined) {
      return new Response(null, { status: next.status });
    }
    return new Response(JSON.stringify(next.body), {
      status: next.status,
      headers: { "Content-Type": "application/json" },
    });
  });
  return { calls, remaining: () => queue.length };
}
