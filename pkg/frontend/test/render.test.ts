// @vitest-environment happy-dom
import { describe, expect, it } from 'vitest';

import { renderErrorBadge, renderResults, renderSuggestions } from '../src/render.js';
import { initialState } from '../src/state.js';

describe('result rendering', () => {
  it('keeps payload order even when scores are not sorted', () => {
    const container = document.createElement('div');
    const state = initialState();
    state.resultStatus = 'ok';
    state.results = [
      { researcher: 'r2', score: 0.1 },
      { researcher: 'r9', score: 0.9 },
      { researcher: 'r5', score: 0.5 },
    ];
    renderResults(container, state);
    const names = [...container.querySelectorAll('.researcher')].map((el) => el.textContent);
    expect(names).toEqual(['r2', 'r9', 'r5']);
  });

  it('idle state renders nothing', () => {
    const container = document.createElement('div');
    renderResults(container, initialState());
    expect(container.childNodes).toHaveLength(0);
  });
});

describe('suggestion rendering', () => {
  it('lists suggestions in payload order and forwards clicks', () => {
    const container = document.createElement('div');
    const state = initialState();
    state.suggestions = [
      { term: 'machine', frequency: 1 },
      { term: 'machine learning', frequency: 999 },
    ];
    state.suggestionsVisible = true;
    const picked: string[] = [];
    renderSuggestions(container, state, (term) => picked.push(term));
    const items = [...container.querySelectorAll<HTMLElement>('.suggestion')];
    expect(items.map((el) => el.textContent)).toEqual(['machine', 'machine learning']);
    items[1]!.click();
    expect(picked).toEqual(['machine learning']);
  });

  it('hidden dropdown renders empty', () => {
    const container = document.createElement('div');
    const state = initialState();
    state.suggestions = [{ term: 'machine', frequency: 1 }];
    state.suggestionsVisible = false;
    renderSuggestions(container, state, () => undefined);
    expect(container.querySelectorAll('.suggestion')).toHaveLength(0);
    expect(container.classList.contains('open')).toBe(false);
  });
});

describe('transport badge', () => {
  it('appears with the message and clears again', () => {
    const badge = document.createElement('span');
    const state = initialState();
    state.transportError = 'connection closed';
    renderErrorBadge(badge, state);
    expect(badge.classList.contains('visible')).toBe(true);
    expect(badge.textContent).toBe('connection closed');

    state.transportError = null;
    renderErrorBadge(badge, state);
    expect(badge.classList.contains('visible')).toBe(false);
    expect(badge.textContent).toBe('');
  });
});
