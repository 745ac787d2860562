import { SearchController } from './controller.js';
import { renderErrorBadge, renderResults, renderSuggestions } from './render.js';
import { UiState, UiStore } from './state.js';
import { renderTree } from './tree.js';
import { openSocketTransport, Transport } from './transport.js';

function element(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id} in the page`);
  return found;
}

async function start(): Promise<void> {
  const input = element('query') as HTMLInputElement;
  const suggestions = element('suggestions');
  const results = element('results');
  const tree = element('tree');
  const badge = element('transport-badge');

  let transport: Transport;
  try {
    const scheme = location.protocol === 'https:' ? 'wss' : 'ws';
    transport = await openSocketTransport(`${scheme}://${location.host}/ws`);
  } catch (error) {
    badge.textContent = error instanceof Error ? error.message : String(error);
    badge.classList.add('visible');
    return;
  }

  const store = new UiStore();
  const controller = new SearchController(transport, store, (state: UiState) => {
    renderSuggestions(suggestions, state, (term) => controller.suggestionPicked(term));
    renderResults(results, state);
    renderErrorBadge(badge, state);
    input.value = state.query;
    // Deep link: the current search is recoverable from the URL.
    const url = new URL(location.href);
    if (state.resultStatus !== 'idle') url.searchParams.set('q', state.query);
    history.replaceState(null, '', url);
  });

  input.addEventListener('input', () => controller.inputChanged(input.value));
  input.addEventListener('keydown', (event) => {
    if (event.key === 'Enter') controller.submit(input.value);
  });

  const browse = await transport.request({ kind: 'browse', request_id: 0 });
  renderTree(tree, browse.payload, (path, label) => controller.leafClicked(path, label));

  const linked = new URL(location.href).searchParams.get('q');
  if (linked) {
    input.value = linked;
    controller.submit(linked);
  }
}

void start();
