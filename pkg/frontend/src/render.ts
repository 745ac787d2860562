import { UiState } from './state.js';

// Renderers never sort: rendered order is always payload order.

export function renderSuggestions(
  container: HTMLElement,
  state: UiState,
  onPick: (term: string) => void,
): void {
  container.textContent = '';
  container.classList.toggle('open', state.suggestionsVisible);
  if (!state.suggestionsVisible) return;
  const list = container.ownerDocument.createElement('ul');
  for (const suggestion of state.suggestions) {
    const item = container.ownerDocument.createElement('li');
    item.className = 'suggestion';
    item.textContent = suggestion.term;
    item.addEventListener('click', () => onPick(suggestion.term));
    list.appendChild(item);
  }
  container.appendChild(list);
}

export function renderResults(container: HTMLElement, state: UiState): void {
  container.textContent = '';
  const doc = container.ownerDocument;
  if (state.resultStatus === 'idle') return;
  if (state.resultStatus === 'no_terms') {
    const empty = doc.createElement('p');
    empty.className = 'empty-state';
    empty.textContent = 'No recognized terms in that query. Try a different phrasing.';
    container.appendChild(empty);
    return;
  }
  if (state.resultStatus === 'error') {
    const failed = doc.createElement('p');
    failed.className = 'empty-state';
    failed.textContent = 'The search failed. Please retry.';
    container.appendChild(failed);
    return;
  }
  const list = doc.createElement('ol');
  list.className = 'results';
  for (const hit of state.results) {
    const row = doc.createElement('li');
    row.className = 'result-row';
    const name = doc.createElement('span');
    name.className = 'researcher';
    name.textContent = hit.researcher;
    const score = doc.createElement('span');
    score.className = 'score';
    score.textContent = hit.score.toFixed(4);
    row.append(name, score);
    list.appendChild(row);
  }
  container.appendChild(list);
}

export function renderErrorBadge(badge: HTMLElement, state: UiState): void {
  badge.textContent = state.transportError ?? '';
  badge.classList.toggle('visible', state.transportError !== null);
}
