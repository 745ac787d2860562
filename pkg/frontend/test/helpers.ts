import { ServiceRequest, ServiceResponse } from '../src/protocol.js';
import { Transport } from '../src/transport.js';

/** Answers immediately from a lookup function and records every request. */
export class RecordingTransport implements Transport {
  readonly requests: ServiceRequest[] = [];

  constructor(private readonly answer: (request: ServiceRequest) => ServiceResponse) {}

  request(request: ServiceRequest): Promise<ServiceResponse> {
    this.requests.push(request);
    return Promise.resolve(this.answer(request));
  }
}

interface Held {
  request: ServiceRequest;
  resolve(response: ServiceResponse): void;
  reject(error: Error): void;
}

/** Holds every request open so a test can answer them in any order. */
export class ManualTransport implements Transport {
  readonly held: Held[] = [];

  request(request: ServiceRequest): Promise<ServiceResponse> {
    return new Promise((resolve, reject) => {
      this.held.push({ request, resolve, reject });
    });
  }

  respond(index: number, response: Omit<ServiceResponse, 'request_id'>): void {
    const entry = this.held[index];
    if (!entry) throw new Error(`no held request at ${index}`);
    entry.resolve({ request_id: entry.request.request_id, ...response });
  }

  fail(index: number, message: string): void {
    const entry = this.held[index];
    if (!entry) throw new Error(`no held request at ${index}`);
    entry.reject(new Error(message));
  }
}

export function flushMicrotasks(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
