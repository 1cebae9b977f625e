/** Minimal server-sent-events reader over fetch streaming (works in the
 * browser and in node tests; no EventSource dependency). */

export interface ProgressEvent {
  status: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
}

export function parseSseChunk(buffer: string): { events: string[]; rest: string } {
  const events: string[] = [];
  let rest = buffer;
  for (;;) {
    const cut = rest.indexOf("\n\n");
    if (cut < 0) break;
    const block = rest.slice(0, cut);
    rest = rest.slice(cut + 2);
    const data = block
      .split("\n")
      .filter((l) => l.startsWith("data: "))
      .map((l) => l.slice(6))
      .join("\n");
    if (data) events.push(data);
  }
  return { events, rest };
}

export async function readEventStream(
  url: string,
  onEvent?: (e: ProgressEvent) => void,
): Promise<ProgressEvent[]> {
  const resp = await fetch(url);
  if (!resp.ok || !resp.body) throw new Error(`event stream failed: ${resp.status}`);
  const reader = resp.body.getReader();
  const decoder = new TextDecoder();
  const out: ProgressEvent[] = [];
  let buffer = "";
  for (;;) {
    const { done, value } = await reader.read();
    if (value) buffer += decoder.decode(value, { stream: true });
    const { events, rest } = parseSseChunk(buffer);
    buffer = rest;
    for (const data of events) {
      const event = JSON.parse(data) as ProgressEvent;
      out.push(event);
      onEvent?.(event);
    }
    if (done) break;
  }
  return out;
}
