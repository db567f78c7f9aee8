/** Thin typed client for the predictive-editor HTTP service. The fetch
 * implementation is injectable so tests can swap in a fake transport. */

import type {
  LexiconEntry, OptionsResponse, SessionState,
} from "./model.js";

export type FetchFn = (
  input: string, init?: RequestInit) => Promise<Response>;

export interface GrammarInfo {
  id: string;
  start: string;
}

export interface TreeNode {
  label: string;
  children: (TreeNode | string)[];
}

export interface TreeResponse {
  derivations: number;
  tree: TreeNode;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<ApiError> {
  let detail = `${response.status}`;
  try {
    const body = await response.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    /* non-JSON error body; keep the status text */
  }
  return new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchFn = (input, init) => globalThis.fetch(input, init),
  ) {}

  private async request<T>(
    method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) throw await parseError(response);
    return (await response.json()) as T;
  }

  async grammars(): Promise<GrammarInfo[]> {
    const body = await this.request<{ grammars: GrammarInfo[] }>(
      "GET", "/grammars");
    return body.grammars;
  }

  createSession(grammarId: string): Promise<{ sessionId: string } & SessionState> {
    return this.request("POST", "/sessions", { grammarId });
  }

  addToken(sessionId: string, token: string): Promise<SessionState> {
    return this.request("POST", `/sessions/${sessionId}/tokens`, { token });
  }

  deleteLast(sessionId: string): Promise<SessionState> {
    return this.request("DELETE", `/sessions/${sessionId}/tokens/last`);
  }

  options(sessionId: string): Promise<OptionsResponse> {
    return this.request("GET", `/sessions/${sessionId}/options`);
  }

  tree(sessionId: string): Promise<TreeResponse> {
    return this.request("GET", `/sessions/${sessionId}/tree`);
  }

  addLexicon(
    grammarId: string, entry: LexiconEntry): Promise<{ added: boolean }> {
    return this.request("POST", `/grammar/${grammarId}/lexicon`, entry);
  }
}
