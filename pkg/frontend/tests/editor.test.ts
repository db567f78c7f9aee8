// @vitest-environment happy-dom
import { beforeEach, describe, expect, it } from "vitest";

import { ApiError } from "../src/api";
import { Editor } from "../src/editor";
import type { EditorApi } from "../src/editor";
import type {
  AbstractOption, ConcreteOption, LexiconEntry, OptionsResponse, SessionState,
} from "../src/model";

const NOUN_OPT: AbstractOption = {
  category: "noun", kind: "preterminal",
  features: { text: "N", human: "H", vowel: "-" }, exceptions: [],
};
const VAR_OPT: AbstractOption = {
  category: "var", kind: "preterminal",
  features: { text: "Vr" }, exceptions: [{ text: "'X'" }],
};

interface Row {
  status: SessionState["status"];
  concrete: ConcreteOption[];
  abstract: AbstractOption[];
}

/** Scripted stand-in for the HTTP client over the tiny language
 * "the (bike|person) ." with a poisoned first-position "bike" entry. */
class FakeApi implements EditorApi {
  tokens: string[] = [];
  sessionsCreated = 0;
  addTokenCalls = 0;
  lexiconEntries: LexiconEntry[] = [];
  failNext: string | null = null;
  rejectLexicon: Error | null = null;
  inFlight = 0;
  maxInFlight = 0;

  table = new Map<string, Row>([
    ["", { status: "prefix-valid",
           concrete: [{ surface: "the", source: null },
                      { surface: "a", source: null },
                      { surface: "bike", source: "noun" },
                      { surface: "person", source: "noun" }],
           abstract: [NOUN_OPT, VAR_OPT] }],
    ["the", { status: "prefix-valid",
              concrete: [{ surface: "bike", source: "noun" },
                         { surface: "person", source: "noun" }],
              abstract: [NOUN_OPT] }],
    ["the bike", { status: "prefix-valid",
                   concrete: [{ surface: ".", source: null }],
                   abstract: [] }],
    ["the person", { status: "prefix-valid",
                     concrete: [{ surface: ".", source: null }],
                     abstract: [] }],
    ["the bike .", { status: "complete", concrete: [], abstract: [] }],
    ["the person .", { status: "complete", concrete: [], abstract: [] }],
  ]);

  private row(): Row {
    return this.table.get(this.tokens.join(" "))
      ?? { status: "dead", concrete: [], abstract: [] };
  }

  private state(): SessionState {
    return { status: this.row().status, tokens: [...this.tokens],
             pending: [] };
  }

  private async step<T>(name: string, fn: () => T): Promise<T> {
    this.inFlight += 1;
    this.maxInFlight = Math.max(this.maxInFlight, this.inFlight);
    await Promise.resolve();
    try {
      if (this.failNext === name) {
        this.failNext = null;
        throw new TypeError("network down");
      }
      return fn();
    } finally {
      this.inFlight -= 1;
    }
  }

  createSession(_gid: string): Promise<{ sessionId: string } & SessionState> {
    return this.step("createSession", () => {
      this.sessionsCreated += 1;
      this.tokens = [];
      return { sessionId: `s${this.sessionsCreated}`, ...this.state() };
    });
  }

  addToken(_sid: string, token: string): Promise<SessionState> {
    return this.step("addToken", () => {
      this.addTokenCalls += 1;
      this.tokens.push(token);
      return this.state();
    });
  }

  deleteLast(_sid: string): Promise<SessionState> {
    return this.step("deleteLast", () => {
      this.tokens.pop();
      return this.state();
    });
  }

  options(_sid: string): Promise<OptionsResponse> {
    return this.step("options", () => {
      const row = this.row();
      return { ...this.state(),
               concrete: row.concrete.map((c) => ({ ...c })),
               abstract: row.abstract };
    });
  }

  addLexicon(_gid: string, entry: LexiconEntry): Promise<{ added: boolean }> {
    return this.step("addLexicon", () => {
      if (this.rejectLexicon) throw this.rejectLexicon;
      this.lexiconEntries.push(entry);
      for (const key of ["", "the"]) {
        this.table.get(key)!.concrete.push(
          { surface: entry.surface, source: entry.preterminal });
      }
      return { added: true };
    });
  }
}

function boxes(root: HTMLElement): { label: string; items: string[] }[] {
  return [...root.querySelectorAll(".menu-box")].map((box) => ({
    label: box.querySelector("h3")!.textContent ?? "",
    items: [...box.querySelectorAll(".menu-item")]
      .map((li) => li.textContent ?? ""),
  }));
}

function setFilter(root: HTMLElement, text: string): void {
  const input = root.querySelector("#filter") as HTMLInputElement;
  input.value = text;
  input.dispatchEvent(new Event("input", { bubbles: true }));
}

async function flush(): Promise<void> {
  for (let i = 0; i < 4; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

describe("Editor", () => {
  let root: HTMLElement;
  let api: FakeApi;
  let editor: Editor;

  beforeEach(async () => {
    document.body.innerHTML = "";
    root = document.createElement("div");
    document.body.appendChild(root);
    api = new FakeApi();
    editor = new Editor(root, api, "demo");
    await editor.start();
  });

  it("renders grouped menus after start", () => {
    expect(boxes(root)).toEqual([
      { label: "function words", items: ["a", "the"] },
      { label: "noun", items: ["bike", "person"] },
    ]);
    expect(root.querySelector("#status")!.textContent).toBe("prefix-valid");
    expect((root.querySelector("#add-word") as HTMLElement).hidden).toBe(false);
  });

  it("filters menu items by substring", () => {
    setFilter(root, "bi");
    expect(boxes(root)).toEqual([{ label: "noun", items: ["bike"] }]);
  });

  it("commits a token and refreshes the menus", async () => {
    await editor.commit("the");
    const chips = [...root.querySelectorAll(".token")]
      .map((t) => t.textContent);
    expect(chips).toEqual(["the"]);
    expect(boxes(root)).toEqual([{ label: "noun",
                                   items: ["bike", "person"] }]);
  });

  it("refuses a commit outside the displayed options", async () => {
    setFilter(root, "bi");
    await editor.commit("the");
    expect(api.addTokenCalls).toBe(0);
    expect(editor.state.tokens).toEqual([]);
  });

  it("commits on menu-item click", async () => {
    const item = root.querySelector(
      '.menu-item[data-surface="the"]') as HTMLElement;
    item.click();
    await flush();
    expect(editor.state.tokens).toEqual(["the"]);
  });

  it("offers submit on completion and appends to the document", async () => {
    await editor.commit("the");
    await editor.commit("bike");
    await editor.commit(".");
    expect(editor.state.status).toBe("complete");
    expect((root.querySelector("#submit") as HTMLElement).hidden).toBe(false);
    await editor.submit();
    const written = [...root.querySelectorAll("#document .sentence")]
      .map((li) => li.textContent);
    expect(written).toEqual(["the bike ."]);
    expect(api.sessionsCreated).toBe(2);
    expect(editor.state.tokens).toEqual([]);
    expect(editor.state.status).toBe("prefix-valid");
  });

  it("undo restores the previous menus", async () => {
    await editor.commit("the");
    await editor.undo();
    expect(editor.state.tokens).toEqual([]);
    expect(boxes(root).map((b) => b.label))
      .toEqual(["function words", "noun"]);
  });

  it("shows an error when a committed token kills the prefix", async () => {
    await editor.commit("bike");
    expect(editor.state.status).toBe("dead");
    expect((root.querySelector("#error") as HTMLElement).hidden).toBe(false);
    expect(root.querySelector("#error-text")!.textContent)
      .toContain("dead end");
    await editor.undo();
    expect(editor.state.status).toBe("prefix-valid");
    expect(boxes(root).length).toBe(2);
  });

  it("keeps state on network failure and retries the action", async () => {
    api.failNext = "addToken";
    await editor.commit("the");
    expect(editor.state.tokens).toEqual([]);
    expect(boxes(root).length).toBe(2);
    expect(root.querySelector("#error-text")!.textContent)
      .toContain("network down");
    expect((root.querySelector("#retry") as HTMLElement).hidden).toBe(false);
    await editor.retry();
    expect(editor.state.tokens).toEqual(["the"]);
    expect((root.querySelector("#error") as HTMLElement).hidden).toBe(true);
  });

  it("refuses an add-word that matches an exception", async () => {
    const select = root.querySelector(
      "#add-word-category") as HTMLSelectElement;
    select.value = "1"; // the var option
    (root.querySelector("#add-word-surface") as HTMLInputElement).value = "X";
    await editor.addWord();
    const message = root.querySelector("#add-word-message")!.textContent!;
    expect(message).toContain("refused");
    expect(message).toContain("text:'X'");
    expect(api.lexiconEntries).toEqual([]);
  });

  it("posts a fresh word and shows it without reload", async () => {
    (root.querySelector(
      "#add-word-surface") as HTMLInputElement).value = "gearwheel";
    await editor.addWord();
    expect(api.lexiconEntries).toEqual([{
      preterminal: "noun",
      features: { text: "gearwheel", vowel: "-" },
      surface: "gearwheel",
    }]);
    const noun = boxes(root).find((b) => b.label === "noun")!;
    expect(noun.items).toContain("gearwheel");
  });

  it("surfaces a 422 from the lexicon endpoint inline", async () => {
    api.rejectLexicon = new ApiError(422, "name already used by a phrase rule");
    (root.querySelector(
      "#add-word-surface") as HTMLInputElement).value = "gearwheel";
    await editor.addWord();
    expect(root.querySelector("#add-word-message")!.textContent)
      .toBe("name already used by a phrase rule");
  });

  it("hides the add-word panel without pre-terminal options", async () => {
    await editor.commit("the");
    await editor.commit("bike");
    expect((root.querySelector("#add-word") as HTMLElement).hidden).toBe(true);
  });

  it("serializes rapid commits into one in-flight request", async () => {
    const first = editor.commit("the");
    const second = editor.commit("bike");
    await Promise.all([first, second]);
    expect(api.maxInFlight).toBe(1);
    expect(editor.state.tokens).toEqual(["the", "bike"]);
  });
});
