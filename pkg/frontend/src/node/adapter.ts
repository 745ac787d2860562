// Node bridge: serves the static UI and forwards WebSocket messages to the
// TCP query service one-to-one (one message = one newline-delimited frame).
// It adds no protocol semantics; ordering and pairing stay end-to-end.

import * as fs from 'node:fs';
import * as http from 'node:http';
import * as net from 'node:net';
import * as path from 'node:path';
import { fileURLToPath } from 'node:url';
import { WebSocket, WebSocketServer } from 'ws';

export interface AdapterOptions {
  serviceHost: string;
  servicePort: number;
  listenHost?: string;
  listenPort?: number;
  staticRoots?: string[];
}

const CONTENT_TYPES: Record<string, string> = {
  '.html': 'text/html; charset=utf-8',
  '.js': 'text/javascript; charset=utf-8',
  '.map': 'application/json; charset=utf-8',
  '.css': 'text/css; charset=utf-8',
  '.json': 'application/json; charset=utf-8',
};

export function defaultStaticRoots(): string[] {
  const here = path.dirname(fileURLToPath(import.meta.url));
  // dist/node -> package root; serve the page and the compiled modules.
  const root = path.resolve(here, '..', '..');
  return [path.join(root, 'public'), path.join(root, 'dist')];
}

export function startAdapter(options: AdapterOptions): Promise<http.Server> {
  const roots = options.staticRoots ?? defaultStaticRoots();
  const server = http.createServer((request, response) => {
    serveStatic(roots, request.url ?? '/', response);
  });

  const sockets = new WebSocketServer({ server, path: '/ws' });
  sockets.on('connection', (client: WebSocket) => {
    const upstream = net.connect(options.servicePort, options.serviceHost);
    upstream.setNoDelay(true);
    let buffered = '';

    upstream.on('data', (chunk: Buffer) => {
      buffered += chunk.toString('utf-8');
      let newline = buffered.indexOf('\n');
      while (newline >= 0) {
        const line = buffered.slice(0, newline);
        buffered = buffered.slice(newline + 1);
        if (client.readyState === WebSocket.OPEN) client.send(line);
        newline = buffered.indexOf('\n');
      }
    });
    upstream.on('close', () => client.close());
    upstream.on('error', () => client.close());

    client.on('message', (data) => {
      const text = typeof data === 'string' ? data : data.toString();
      upstream.write(text.endsWith('\n') ? text : text + '\n');
    });
    client.on('close', () => upstream.destroy());
  });

  return new Promise((resolve, reject) => {
    server.once('error', reject);
    server.listen(options.listenPort ?? 0, options.listenHost ?? '127.0.0.1', () => resolve(server));
  });
}

function serveStatic(roots: string[], rawUrl: string, response: http.ServerResponse): void {
  const cleaned = rawUrl.split('?')[0] ?? '/';
  const relative = cleaned === '/' ? 'index.html' : cleaned.replace(/^\/+/, '');
  for (const root of roots) {
    const candidate = path.join(root, relative);
    // Containment check: no path may escape its static root.
    if (!candidate.startsWith(root + path.sep) || !fs.existsSync(candidate)) continue;
    if (!fs.statSync(candidate).isFile()) continue;
    response.writeHead(200, {
      'content-type': CONTENT_TYPES[path.extname(candidate)] ?? 'application/octet-stream',
    });
    response.end(fs.readFileSync(candidate));
    return;
  }
  response.writeHead(404, { 'content-type': 'text/plain; charset=utf-8' });
  response.end('not found');
}

function parseAddress(text: string, fallbackHost: string): { host: string; port: number } {
  const colon = text.lastIndexOf(':');
  if (colon < 0) return { host: fallbackHost, port: Number(text) };
  return { host: text.slice(0, colon) || fallbackHost, port: Number(text.slice(colon + 1)) };
}

function isMain(): boolean {
  const entry = process.argv[1];
  return entry !== undefined && fileURLToPath(import.meta.url) === path.resolve(entry);
}

if (isMain()) {
  const args = process.argv.slice(2);
  let service = process.env['EXPERTSEARCH_ADDRESS'] ?? '127.0.0.1:7777';
  let listen = '127.0.0.1:8080';
  for (let i = 0; i < args.length; i += 1) {
    if (args[i] === '--service' && args[i + 1]) service = args[++i]!;
    else if (args[i] === '--listen' && args[i + 1]) listen = args[++i]!;
  }
  const upstream = parseAddress(service, '127.0.0.1');
  const local = parseAddress(listen, '127.0.0.1');
  startAdapter({
    serviceHost: upstream.host,
    servicePort: upstream.port,
    listenHost: local.host,
    listenPort: local.port,
  }).then((server) => {
    const address = server.address();
    if (address && typeof address === 'object') {
      console.log(`webui on http://${address.address}:${address.port} -> service ${service}`);
    }
  }, (error) => {
    console.error(`cannot start adapter: ${error instanceof Error ? error.message : error}`);
    process.exitCode = 1;
  });
}
