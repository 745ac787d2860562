import { ResponseStatus, SearchHit, Suggestion } from './protocol.js';

export interface UiState {
  query: string;
  suggestions: Suggestion[];
  suggestionsVisible: boolean;
  results: SearchHit[];
  /** idle until the first search lands; then the last search's status. */
  resultStatus: 'idle' | ResponseStatus;
  selectedPath: string[];
  transportError: string | null;
}

export function initialState(): UiState {
  return {
    query: '',
    suggestions: [],
    suggestionsVisible: false,
    results: [],
    resultStatus: 'idle',
    selectedPath: [],
    transportError: null,
  };
}

/**
 * Holds the rendered state plus the newest request_id issued on each lane.
 * A response may only apply if it IS the newest issued request of its lane,
 * so reordered or superseded responses can never overwrite newer state.
 */
export class UiStore {
  readonly state: UiState = initialState();
  private newestSuggestId = 0;
  private newestSearchId = 0;

  issueSuggest(requestId: number): void {
    this.newestSuggestId = Math.max(this.newestSuggestId, requestId);
  }

  issueSearch(requestId: number): void {
    this.newestSearchId = Math.max(this.newestSearchId, requestId);
  }

  applySuggestions(requestId: number, suggestions: Suggestion[]): boolean {
    if (requestId !== this.newestSuggestId) return false;
    this.state.suggestions = suggestions;
    this.state.suggestionsVisible = suggestions.length > 0;
    this.state.transportError = null;
    return true;
  }

  clearSuggestions(): void {
    // Also retires in-flight suggest requests: their responses are stale.
    this.newestSuggestId += 1;
    this.state.suggestions = [];
    this.state.suggestionsVisible = false;
  }

  applySearch(requestId: number, status: ResponseStatus, results: SearchHit[]): boolean {
    if (requestId !== this.newestSearchId) return false;
    this.state.results = results;
    this.state.resultStatus = status;
    this.state.transportError = null;
    return true;
  }

  noteTransportError(message: string): void {
    this.state.transportError = message;
  }
}
