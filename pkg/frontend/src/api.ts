// Thin HTTP client for the session service control endpoints.

export interface ApiOptions {
  baseUrl: string;
  fetchFn?: typeof fetch;
}

export interface ResolveResult {
  ok: boolean;
  status: number;
  detail: string;
}

function client(opts: ApiOptions) {
  return {
    base: opts.baseUrl.replace(/\/$/, ""),
    fetchFn: opts.fetchFn ?? fetch,
  };
}

export async function health(opts: ApiOptions): Promise<boolean> {
  const { base, fetchFn } = client(opts);
  try {
    const response = await fetchFn(`${base}/v1/health`);
    return response.ok;
  } catch {
    return false;
  }
}

export async function createSession(
  opts: ApiOptions,
  mode: "confirm" | "auto" = "confirm",
): Promise<{ id: string; mode: string }> {
  const { base, fetchFn } = client(opts);
  const response = await fetchFn(`${base}/v1/sessions`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify({ mode }),
  });
  if (!response.ok) {
    throw new Error(`create session failed: HTTP ${response.status}`);
  }
  return response.json();
}

export async function resolveCommand(
  opts: ApiOptions,
  sessionId: string,
  cmdId: string,
  verdict: "confirm" | "override" | "reject",
  command?: Record<string, unknown>,
): Promise<ResolveResult> {
  const { base, fetchFn } = client(opts);
  const body: Record<string, unknown> = { verdict };
  if (command !== undefined) body.command = command;
  try {
    const response = await fetchFn(
      `${base}/v1/sessions/${sessionId}/commands/${cmdId}`,
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    let detail = "";
    if (!response.ok) {
      try {
        const payload = await response.json();
        detail = payload.detail ?? JSON.stringify(payload);
      } catch {
        detail = `HTTP ${response.status}`;
      }
    }
    return { ok: response.ok, status: response.status, detail };
  } catch (err) {
    return { ok: false, status: 0, detail: String(err) };
  }
}
