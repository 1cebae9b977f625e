/** Thin fetch wrapper: one place for base URL, JSON handling, error
 * surfacing, and a request log the end-to-end tests read to verify what
 * actually went over the wire. API errors are thrown, never swallowed;
 * panels surface them inline. */

export interface WireRecord {
  method: string;
  path: string;
  body: unknown;
  status: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
    path: string,
  ) {
    super(`${status} on ${path}: ${JSON.stringify(detail)}`);
  }
}

export class Transport {
  readonly log: WireRecord[] = [];

  constructor(readonly baseUrl: string) {}

  async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
      (init.headers as Record<string, string>)["content-type"] = "application/json";
    }
    const resp = await fetch(this.baseUrl + path, init);
    let payload: unknown = null;
    const text = await resp.text();
    try {
      payload = text ? JSON.parse(text) : null;
    } catch {
      payload = text;
    }
    this.log.push({ method, path, body: body ?? null, status: resp.status });
    if (!resp.ok) {
      throw new ApiError(resp.status, (payload as { detail?: unknown })?.detail ?? payload, path);
    }
    return payload as T;
  }

  get<T>(path: string): Promise<T> {
    return this.request<T>("GET", path);
  }

  post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("POST", path, body);
  }

  patch<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>("PATCH", path, body);
  }

  assetUrl(hash: string): string {
    return `${this.baseUrl}/api/v1/assets/${hash}`;
  }

  /** Requests whose path matches, newest first. */
  sent(pathPart: string): WireRecord[] {
    return this.log.filter((r) => r.path.includes(pathPart)).reverse();
  }
}
