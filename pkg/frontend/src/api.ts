// Thin fetch wrapper for the /v1 session API.

import type {
  ApiErrorBody, EnabledJson, SessionReply, StateJson, StepReply,
  RecordJson, Value,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string,
              public detail: unknown) {
    super(`${code} (${status})`);
  }
}

async function request<T>(method: string, path: string,
                          body?: unknown): Promise<T> {
  const resp = await fetch(path, {
    method,
    headers: body === undefined ? {} : { "Content-Type": "application/json" },
    body: body === undefined ? undefined : JSON.stringify(body),
  });
  const data = await resp.json();
  if (!resp.ok) {
    const err = data as ApiErrorBody;
    throw new ApiError(resp.status, err.error ?? "unknown", err.detail);
  }
  return data as T;
}

export class Client {
  constructor(private base = "") {}

  createSession(modelText: string, name?: string): Promise<SessionReply> {
    return request("POST", `${this.base}/v1/sessions`,
                   { model: modelText, name });
  }

  examples(): Promise<{ examples: { name: string; text: string }[] }> {
    return request("GET", `${this.base}/v1/examples`);
  }

  state(sid: string): Promise<{ state: StateJson }> {
    return request("GET", `${this.base}/v1/sessions/${sid}/state`);
  }

  enabled(sid: string): Promise<{ enabled: EnabledJson }> {
    return request("GET", `${this.base}/v1/sessions/${sid}/enabled`);
  }

  fire(sid: string, component: string, operation: string,
       binding: Record<string, Value>): Promise<StepReply> {
    return request("POST", `${this.base}/v1/sessions/${sid}/fire`,
                   { component, operation, binding });
  }

  tick(sid: string): Promise<StepReply> {
    return request("POST", `${this.base}/v1/sessions/${sid}/tick`);
  }

  undo(sid: string): Promise<{ state: StateJson; enabled: EnabledJson }> {
    return request("POST", `${this.base}/v1/sessions/${sid}/undo`);
  }

  reset(sid: string): Promise<{ state: StateJson; enabled: EnabledJson }> {
    return request("POST", `${this.base}/v1/sessions/${sid}/reset`);
  }

  trace(sid: string): Promise<{ records: RecordJson[]; text: string }> {
    return request("GET", `${this.base}/v1/sessions/${sid}/trace`);
  }

  golden(sid: string, observe: string[],
         scenario?: string): Promise<{ golden: string }> {
    return request("POST", `${this.base}/v1/sessions/${sid}/golden`,
                   { observe, scenario });
  }

  replay(sid: string, trace: string): Promise<unknown> {
    return request("POST", `${this.base}/v1/sessions/${sid}/replay`,
                   { trace });
  }
}
