// Wire schema of the query service: one JSON object per line, the
// request_id echoed verbatim, responses in request order per connection.

export type RequestKind = 'search' | 'suggest' | 'browse' | 'ping';

export interface ServiceRequest {
  kind: RequestKind;
  request_id: number;
  query?: string;
  k?: number;
  limit?: number;
}

export type ResponseStatus = 'ok' | 'no_terms' | 'too_short' | 'error';

export interface ServiceResponse {
  request_id: number | null;
  status: ResponseStatus;
  payload?: unknown;
  error_message?: string;
}

export interface SearchHit {
  researcher: string;
  score: number;
}

export interface Suggestion {
  term: string;
  frequency: number;
}

/** Leaf nodes carry researchers; interior nodes carry children. */
export interface BrowseNode {
  label: string;
  children?: BrowseNode[];
  researchers?: { id: string; score: number }[];
}

export function encodeFrame(request: ServiceRequest): string {
  return JSON.stringify(request) + '\n';
}

export function decodeFrame(line: string): ServiceResponse | null {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    return null;
  }
  if (!isRecord(parsed)) return null;
  const status = parsed['status'];
  if (status !== 'ok' && status !== 'no_terms' && status !== 'too_short' && status !== 'error') {
    return null;
  }
  const id = parsed['request_id'];
  if (typeof id !== 'number' && id !== null) return null;
  return {
    request_id: id,
    status,
    payload: parsed['payload'],
    error_message: typeof parsed['error_message'] === 'string' ? parsed['error_message'] : undefined,
  };
}

export function asSearchHits(payload: unknown): SearchHit[] {
  if (!Array.isArray(payload)) return [];
  const hits: SearchHit[] = [];
  for (const entry of payload) {
    if (isRecord(entry) && typeof entry['researcher'] === 'string' && typeof entry['score'] === 'number') {
      hits.push({ researcher: entry['researcher'], score: entry['score'] });
    }
  }
  return hits;
}

export function asSuggestions(payload: unknown): Suggestion[] {
  if (!Array.isArray(payload)) return [];
  const out: Suggestion[] = [];
  for (const entry of payload) {
    if (isRecord(entry) && typeof entry['term'] === 'string' && typeof entry['frequency'] === 'number') {
      out.push({ term: entry['term'], frequency: entry['frequency'] });
    }
  }
  return out;
}

/** Throws on anything that is not a well-formed browse tree. */
export function asBrowseNode(payload: unknown): BrowseNode {
  if (!isRecord(payload)) throw new Error('browse payload is not an object');
  if (Object.keys(payload).length === 0) return { label: '', children: [] };
  const label = payload['label'];
  if (typeof label !== 'string') throw new Error('browse node has no label');
  const node: BrowseNode = { label };
  if ('children' in payload) {
    const children = payload['children'];
    if (!Array.isArray(children)) throw new Error(`node "${label}" children is not a list`);
    node.children = children.map(asBrowseNode);
  }
  if ('researchers' in payload) {
    const researchers = payload['researchers'];
    if (!Array.isArray(researchers)) throw new Error(`node "${label}" researchers is not a list`);
    node.researchers = researchers.map((entry) => {
      if (!isRecord(entry) || typeof entry['id'] !== 'string' || typeof entry['score'] !== 'number') {
        throw new Error(`node "${label}" has a malformed researcher row`);
      }
      return { id: entry['id'], score: entry['score'] };
    });
  }
  if (node.children === undefined && node.researchers === undefined) {
    throw new Error(`node "${label}" has neither children nor researchers`);
  }
  return node;
}

function isRecord(value: unknown): value is Record<string, unknown> {
  return typeof value === 'object' && value !== null && !Array.isArray(value);
}
