import { debounce, Debounced } from './debounce.js';
import { asSearchHits, asSuggestions, ServiceResponse } from './protocol.js';
import { UiState, UiStore } from './state.js';
import { Transport } from './transport.js';

export const MIN_PREFIX_CHARS = 3;
export const SUGGEST_DEBOUNCE_MS = 150;

export interface ControllerOptions {
  suggestLimit?: number;
  searchK?: number;
  debounceMs?: number;
}

/**
 * Single-threaded interaction model: at most one suggest and one search
 * matter at any time; anything older is ignored when it arrives.  A browse
 * leaf click is routed through exactly the same path as a typed query, so
 * both render identically.
 */
export class SearchController {
  private nextId = 0;
  private readonly suggestLimit: number;
  private readonly searchK: number;
  private readonly debouncedSuggest: Debounced<[string]>;

  constructor(
    private readonly transport: Transport,
    private readonly store: UiStore,
    private readonly onChange: (state: UiState) => void,
    options: ControllerOptions = {},
  ) {
    this.suggestLimit = options.suggestLimit ?? 10;
    this.searchK = options.searchK ?? 10;
    this.debouncedSuggest = debounce(
      (text: string) => void this.sendSuggest(text),
      options.debounceMs ?? SUGGEST_DEBOUNCE_MS,
    );
  }

  /** Keystroke entry point: gate on length, then debounce the request. */
  inputChanged(text: string): void {
    this.store.state.query = text;
    if (text.trim().length < MIN_PREFIX_CHARS) {
      this.debouncedSuggest.cancel();
      this.store.clearSuggestions();
      this.emit();
      return;
    }
    this.debouncedSuggest(text.trim());
  }

  /** Selecting a suggestion replaces the query text, nothing more. */
  suggestionPicked(term: string): void {
    this.debouncedSuggest.cancel();
    this.store.state.query = term;
    this.store.clearSuggestions();
    this.emit();
  }

  submit(query: string): void {
    this.debouncedSuggest.cancel();
    this.store.state.query = query;
    this.store.clearSuggestions();
    void this.sendSearch(query);
  }

  /** Browse leaves search by their label, via the same path as typing. */
  leafClicked(path: string[], label: string): void {
    this.store.state.selectedPath = path;
    this.submit(label);
  }

  private async sendSuggest(text: string): Promise<void> {
    const requestId = ++this.nextId;
    this.store.issueSuggest(requestId);
    let response: ServiceResponse;
    try {
      response = await this.transport.request({
        kind: 'suggest',
        request_id: requestId,
        query: text,
        limit: this.suggestLimit,
      });
    } catch (error) {
      this.store.noteTransportError(messageOf(error));
      this.emit();
      return;
    }
    if (this.store.applySuggestions(requestId, asSuggestions(response.payload))) {
      this.emit();
    }
  }

  private async sendSearch(query: string): Promise<void> {
    const requestId = ++this.nextId;
    this.store.issueSearch(requestId);
    let response: ServiceResponse;
    try {
      response = await this.transport.request({
        kind: 'search',
        request_id: requestId,
        query,
        k: this.searchK,
      });
    } catch (error) {
      this.store.noteTransportError(messageOf(error));
      this.emit();
      return;
    }
    if (this.store.applySearch(requestId, response.status, asSearchHits(response.payload))) {
      this.emit();
    }
  }

  private emit(): void {
    this.onChange(this.store.state);
  }
}

function messageOf(error: unknown): string {
  return error instanceof Error ? error.message : String(error);
}
