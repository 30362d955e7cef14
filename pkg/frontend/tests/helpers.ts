/**
 * Shared test plumbing: fixture loading and a recording fetch stub.
 *
 * Fixtures under tests/fixtures/ were captured from a live service run
 * against the bundled demo session, so every expected value in these
 * suites is a real service response, not a hand-written guess.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { vi } from "vitest";

const here = dirname(fileURLToPath(import.meta.url));

export function fixture<T>(name: string): T {
  const text = readFileSync(join(here, "fixtures", `${name}.json`), "utf8");
  return JSON.parse(text) as T;
}

export function demoTrajectoryCsv(): string {
  return readFileSync(join(here, "..", "..", "demo", "trajectory.csv"),
                      "utf8");
}

export interface RecordedCall {
  method: string;
  path: string;
  query: URLSearchParams;
  body: unknown;
}

export interface StubResponse {
  status: number;
  body: unknown;
}

export type Responder = (call: RecordedCall) =>
  StubResponse | Promise<StubResponse> | null;

export interface FetchStub {
  calls: RecordedCall[];
  restore(): void;
}

/** Replace global fetch with a responder; records every call it sees. */
export function installFetch(responder: Responder): FetchStub {
  const calls: RecordedCall[] = [];
  const fake = async (input: RequestInfo | URL,
                      init?: RequestInit): Promise<Response> => {
    const url = new URL(String(input), "http://svc.test");
    const call: RecordedCall = {
      method: init?.method ?? "GET",
      path: url.pathname,
      query: url.searchParams,
      body: init?.body ? JSON.parse(String(init.body)) : null,
    };
    calls.push(call);
    const out = await responder(call);
    if (!out) {
      throw new Error(`unhandled ${call.method} ${call.path}`);
    }
    return new Response(JSON.stringify(out.body), {
      status: out.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  vi.stubGlobal("fetch", fake);
  return { calls, restore: () => vi.unstubAllGlobals() };
}

/**
 * Responder that plays back the recorded demo session: upload, one poll to
 * fitted, raw or filtered signal depending on query params, quantify,
 * annotation.
 */
export function demoResponder(): Responder {
  const created = fixture<{ session_id: string }>("session_created");
  const id = created.session_id;
  return (call) => {
    if (call.method === "POST" && call.path === "/sessions") {
      return { status: 201, body: fixture("session_created") };
    }
    if (call.method === "GET" && call.path === `/sessions/${id}`) {
      return { status: 200, body: fixture("session_fitted") };
    }
    if (call.method === "GET" && call.path === `/sessions/${id}/signal`) {
      const filtered = call.query.has("low") || call.query.has("high");
      return {
        status: 200,
        body: fixture(filtered ? "signal_filtered" : "signal_raw"),
      };
    }
    if (call.method === "POST" && call.path === `/sessions/${id}/quantify`) {
      return { status: 200, body: fixture("report") };
    }
    if (call.method === "GET" && call.path === "/annotation") {
      return { status: 200, body: fixture("annotation") };
    }
    return null;
  };
}

export const instantSleep = async (): Promise<void> => {};
