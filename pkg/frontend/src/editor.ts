/** Predictive sentence editor: committed tokens on top, menu boxes of
 * possible continuations below, with substring filtering, undo, sentence
 * submission, and an add-word panel driven by the abstract options. */

import type { SessionState } from "./model.js";
import type {
  AbstractOption, LexiconEntry, OptionsResponse, Status,
} from "./model.js";
import {
  addableOptions, blockingException, describeOption, filterGroups,
  groupOptions, instantiateEntry,
} from "./model.js";

/** The slice of the HTTP client the editor uses; tests substitute a fake. */
export interface EditorApi {
  createSession(grammarId: string): Promise<{ sessionId: string } & SessionState>;
  addToken(sessionId: string, token: string): Promise<SessionState>;
  deleteLast(sessionId: string): Promise<SessionState>;
  options(sessionId: string): Promise<OptionsResponse>;
  addLexicon(grammarId: string, entry: LexiconEntry): Promise<{ added: boolean }>;
}

export interface EditorState {
  sessionId: string | null;
  status: Status;
  tokens: string[];
  options: OptionsResponse | null;
  filter: string;
  error: string | null;
  addWordMessage: string | null;
  sentences: string[];
}

const SKELETON = `
  <div class="toolbar">
    <span id="status"></span>
    <button id="undo" type="button">undo</button>
    <button id="submit" type="button" hidden>submit sentence</button>
  </div>
  <div id="tokens"></div>
  <div id="error" hidden>
    <span id="error-text"></span>
    <button id="retry" type="button" hidden>retry</button>
  </div>
  <input id="filter" type="text" placeholder="filter menu items" />
  <div id="menus"></div>
  <div id="add-word" hidden>
    <select id="add-word-category"></select>
    <input id="add-word-surface" type="text" placeholder="new word" />
    <button id="add-word-commit" type="button">add word</button>
    <span id="add-word-message"></span>
  </div>
  <ol id="document"></ol>
`;

export class Editor {
  readonly state: EditorState = {
    sessionId: null, status: "prefix-valid", tokens: [], options: null,
    filter: "", error: null, addWordMessage: null, sentences: [],
  };

  private doc: Document;
  private retryAction: (() => Promise<void>) | null = null;
  /** serializes server traffic: one in-flight request chain */
  private queue: Promise<unknown> = Promise.resolve();
  /** bumped per committed-token-list change; guards stale option sets */
  private version = 0;

  constructor(
    private root: HTMLElement,
    private api: EditorApi,
    private grammarId: string,
  ) {
    this.doc = root.ownerDocument;
    root.innerHTML = SKELETON;
    this.el("filter").addEventListener("input", () => {
      this.state.filter = (this.el("filter") as HTMLInputElement).value;
      this.renderMenus();
    });
    this.el("menus").addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const surface = target.closest?.(".menu-item")
        ?.getAttribute("data-surface");
      if (surface !== null && surface !== undefined) void this.commit(surface);
    });
    this.el("undo").addEventListener("click", () => void this.undo());
    this.el("submit").addEventListener("click", () => void this.submit());
    this.el("retry").addEventListener("click", () => void this.retry());
    this.el("add-word-commit").addEventListener(
      "click", () => void this.addWord());
  }

  private el(id: string): HTMLElement {
    const found = this.root.querySelector(`#${id}`);
    if (!found) throw new Error(`missing editor element #${id}`);
    return found as HTMLElement;
  }

  private enqueue<T>(task: () => Promise<T>): Promise<T> {
    const run = this.queue.then(task, task);
    this.queue = run.then(() => undefined, () => undefined);
    return run;
  }

  /** Surfaces the user may commit right now: the displayed (filtered)
   * menu items. Everything else is refused client-side. */
  visibleSurfaces(): string[] {
    if (!this.state.options) return [];
    const groups = filterGroups(
      groupOptions(this.state.options.concrete), this.state.filter);
    return groups.flatMap((g) => g.items);
  }

  start(): Promise<void> {
    return this.enqueue(async () => {
      try {
        const created = await this.api.createSession(this.grammarId);
        this.state.sessionId = created.sessionId;
        this.applyState(created);
        await this.refreshOptions();
        this.clearError();
      } catch (error) {
        this.fail(error, () => this.start());
      }
      this.render();
    });
  }

  commit(surface: string): Promise<void> {
    return this.enqueue(async () => {
      if (!this.state.sessionId || !this.visibleSurfaces().includes(surface)) {
        return;
      }
      try {
        const after = await this.api.addToken(this.state.sessionId, surface);
        this.applyState(after);
        await this.refreshOptions();
        this.clearError();
        if (after.status === "dead") {
          this.state.error = "the last token led to a dead end; undo it";
        }
      } catch (error) {
        this.fail(error, () => this.commit(surface));
      }
      this.render();
    });
  }

  undo(): Promise<void> {
    return this.enqueue(async () => {
      if (!this.state.sessionId || !this.state.tokens.length) return;
      try {
        const after = await this.api.deleteLast(this.state.sessionId);
        this.applyState(after);
        await this.refreshOptions();
        this.clearError();
      } catch (error) {
        this.fail(error, () => this.undo());
      }
      this.render();
    });
  }

  /** On a complete sentence: append it to the document and start over. */
  submit(): Promise<void> {
    return this.enqueue(async () => {
      if (this.state.status !== "complete") return;
      const sentence = this.state.tokens.join(" ");
      try {
        const created = await this.api.createSession(this.grammarId);
        this.state.sentences.push(sentence);
        this.state.sessionId = created.sessionId;
        this.applyState(created);
        await this.refreshOptions();
        this.clearError();
      } catch (error) {
        this.fail(error, () => this.submit());
      }
      this.render();
    });
  }

  retry(): Promise<void> {
    const action = this.retryAction;
    this.clearError();
    this.render();
    return action ? action() : Promise.resolve();
  }

  addWord(): Promise<void> {
    return this.enqueue(async () => {
      const option = this.selectedAddable();
      const surface =
        (this.el("add-word-surface") as HTMLInputElement).value.trim();
      if (!option || !surface) return;
      const entry = instantiateEntry(option, surface);
      const blocked = blockingException(entry, option);
      if (blocked) {
        const shown = Object.entries(blocked)
          .map(([n, v]) => `${n}:${v}`).join(", ");
        this.state.addWordMessage =
          `refused: ${surface} matches the exception (${shown})`;
        this.render();
        return;
      }
      try {
        await this.api.addLexicon(this.grammarId, entry);
        this.state.addWordMessage = `added ${surface}`;
        (this.el("add-word-surface") as HTMLInputElement).value = "";
        await this.refreshOptions();
      } catch (error) {
        this.state.addWordMessage =
          error instanceof Error ? error.message : String(error);
      }
      this.render();
    });
  }

  private selectedAddable(): AbstractOption | null {
    if (!this.state.options) return null;
    const addable = addableOptions(this.state.options.abstract);
    const select = this.el("add-word-category") as HTMLSelectElement;
    const index = Number(select.value);
    return addable[index] ?? null;
  }

  private applyState(next: SessionState): void {
    this.state.status = next.status;
    this.state.tokens = [...next.tokens, ...next.pending];
    this.state.options = null;
    this.version += 1;
  }

  private async refreshOptions(): Promise<void> {
    if (!this.state.sessionId) return;
    const version = this.version;
    const options = await this.api.options(this.state.sessionId);
    if (version !== this.version) return; // stale: token list moved on
    this.state.options = options;
    this.state.status = options.status;
  }

  private fail(error: unknown, again: () => Promise<void>): void {
    this.state.error = error instanceof Error ? error.message : String(error);
    this.retryAction = again;
  }

  private clearError(): void {
    this.state.error = null;
    this.retryAction = null;
  }

  // -- rendering ------------------------------------------------------------

  render(): void {
    const status = this.el("status");
    status.textContent = this.state.status;
    status.className = `status-${this.state.status}`;

    const tokens = this.el("tokens");
    tokens.textContent = "";
    for (const token of this.state.tokens) {
      const chip = this.doc.createElement("span");
      chip.className = "token";
      chip.textContent = token;
      tokens.appendChild(chip);
    }

    (this.el("submit") as HTMLButtonElement).hidden =
      this.state.status !== "complete";
    (this.el("undo") as HTMLButtonElement).disabled =
      this.state.tokens.length === 0;

    const error = this.el("error");
    error.hidden = this.state.error === null;
    this.el("error-text").textContent = this.state.error ?? "";
    (this.el("retry") as HTMLElement).hidden = this.retryAction === null;

    this.renderMenus();
    this.renderAddWord();

    const sentences = this.el("document");
    sentences.textContent = "";
    for (const sentence of this.state.sentences) {
      const item = this.doc.createElement("li");
      item.className = "sentence";
      item.textContent = sentence;
      sentences.appendChild(item);
    }
  }

  private renderMenus(): void {
    const menus = this.el("menus");
    menus.textContent = "";
    if (!this.state.options) return;
    const groups = filterGroups(
      groupOptions(this.state.options.concrete), this.state.filter);
    for (const group of groups) {
      const box = this.doc.createElement("section");
      box.className = "menu-box";
      box.setAttribute("data-source", group.source ?? "");
      const heading = this.doc.createElement("h3");
      heading.textContent = group.label;
      box.appendChild(heading);
      const list = this.doc.createElement("ul");
      for (const item of group.items) {
        const entry = this.doc.createElement("li");
        entry.className = "menu-item";
        entry.setAttribute("data-surface", item);
        entry.textContent = item;
        list.appendChild(entry);
      }
      box.appendChild(list);
      menus.appendChild(box);
    }
  }

  private renderAddWord(): void {
    const panel = this.el("add-word");
    const addable = this.state.options
      ? addableOptions(this.state.options.abstract) : [];
    panel.hidden = addable.length === 0;
    const select = this.el("add-word-category") as HTMLSelectElement;
    const previous = select.value;
    select.textContent = "";
    addable.forEach((option, index) => {
      const choice = this.doc.createElement("option");
      choice.value = String(index);
      choice.textContent = describeOption(option);
      select.appendChild(choice);
    });
    if (previous && Number(previous) < addable.length) select.value = previous;
    this.el("add-word-message").textContent = this.state.addWordMessage ?? "";
  }
}
