import { ServiceRequest, ServiceResponse, decodeFrame, encodeFrame } from './protocol.js';

/** Anything that moves whole frames: a WebSocket bridge, a test double. */
export interface Wire {
  send(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: () => void): void;
}

export interface Transport {
  request(request: ServiceRequest, timeoutMs?: number): Promise<ServiceResponse>;
}

interface Pending {
  id: number;
  resolve(response: ServiceResponse): void;
  reject(error: Error): void;
  timer: ReturnType<typeof setTimeout> | null;
}

const DEFAULT_TIMEOUT_MS = 10_000;

/**
 * Pairs responses to requests over one long-lived connection.  The server
 * answers in request order, so pairing is FIFO; ids are still checked so a
 * null-id error frame (malformed input) rejects the oldest waiter instead
 * of silently shifting every later pair.
 */
export class LineTransport implements Transport {
  private pending: Pending[] = [];
  private closed = false;

  constructor(private readonly wire: Wire) {
    wire.onLine((line) => this.dispatch(line));
    wire.onClose(() => this.failAll(new Error('connection closed')));
  }

  request(request: ServiceRequest, timeoutMs: number = DEFAULT_TIMEOUT_MS): Promise<ServiceResponse> {
    if (this.closed) return Promise.reject(new Error('connection closed'));
    return new Promise<ServiceResponse>((resolve, reject) => {
      const entry: Pending = { id: request.request_id, resolve, reject, timer: null };
      entry.timer = setTimeout(() => {
        this.drop(entry);
        reject(new Error(`request ${entry.id} timed out`));
      }, timeoutMs);
      this.pending.push(entry);
      try {
        this.wire.send(encodeFrame(request));
      } catch (error) {
        this.drop(entry);
        reject(error instanceof Error ? error : new Error(String(error)));
      }
    });
  }

  private dispatch(line: string): void {
    const response = decodeFrame(line);
    const entry = this.pending.shift();
    if (!entry) return; // unsolicited frame; nothing waits on it
    if (entry.timer !== null) clearTimeout(entry.timer);
    if (!response) {
      entry.reject(new Error('unparseable response frame'));
      return;
    }
    if (response.request_id !== null && response.request_id !== entry.id) {
      entry.reject(new Error(`response id ${response.request_id} does not match request ${entry.id}`));
      return;
    }
    entry.resolve(response);
  }

  private drop(entry: Pending): void {
    if (entry.timer !== null) clearTimeout(entry.timer);
    const at = this.pending.indexOf(entry);
    if (at >= 0) this.pending.splice(at, 1);
  }

  private failAll(error: Error): void {
    this.closed = true;
    const waiting = this.pending;
    this.pending = [];
    for (const entry of waiting) {
      if (entry.timer !== null) clearTimeout(entry.timer);
      entry.reject(error);
    }
  }
}

/** Browser wire: one WebSocket message per frame, bridged 1:1 to TCP. */
export class SocketWire implements Wire {
  private lineHandler: (line: string) => void = () => undefined;
  private closeHandler: () => void = () => undefined;

  constructor(private readonly socket: WebSocket) {
    socket.addEventListener('message', (event) => {
      if (typeof event.data === 'string') this.lineHandler(event.data);
    });
    socket.addEventListener('close', () => this.closeHandler());
    socket.addEventListener('error', () => this.closeHandler());
  }

  send(line: string): void {
    if (this.socket.readyState !== WebSocket.OPEN) throw new Error('socket not open');
    this.socket.send(line);
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: () => void): void {
    this.closeHandler = handler;
  }
}

export function openSocketTransport(url: string): Promise<Transport> {
  return new Promise((resolve, reject) => {
    const socket = new WebSocket(url);
    socket.addEventListener('open', () => resolve(new LineTransport(new SocketWire(socket))));
    socket.addEventListener('error', () => reject(new Error(`cannot reach ${url}`)));
  });
}
