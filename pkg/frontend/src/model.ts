/** Types mirroring the HTTP API plus the pure logic behind the menus:
 * grouping, filtering, and the client-side add-word gate. Kept DOM-free so
 * it can be unit tested directly. */

export type Status = "prefix-valid" | "complete" | "dead";

export interface ConcreteOption {
  surface: string;
  source: string | null;
}

export interface AbstractOption {
  category: string;
  kind: "terminal" | "preterminal" | "nonterminal";
  features: Record<string, string>;
  exceptions: Record<string, string>[];
}

export interface SessionState {
  status: Status;
  tokens: string[];
  pending: string[];
}

export interface OptionsResponse extends SessionState {
  abstract: AbstractOption[];
  concrete: ConcreteOption[];
}

export interface LexiconEntry {
  preterminal: string;
  features: Record<string, string>;
  surface: string;
}

export interface MenuGroup {
  /** null for words fixed by the rules themselves */
  source: string | null;
  label: string;
  items: string[];
}

export const FUNCTION_WORDS = "function words";

/** Partition concrete options into menu boxes: the function-word box first,
 * then one box per source pre-terminal, alphabetically; items alphabetical.
 * Every option lands in exactly one box. */
export function groupOptions(concrete: ConcreteOption[]): MenuGroup[] {
  const bySource = new Map<string | null, Set<string>>();
  for (const opt of concrete) {
    const key = opt.source;
    if (!bySource.has(key)) bySource.set(key, new Set());
    bySource.get(key)!.add(opt.surface);
  }
  const groups: MenuGroup[] = [];
  if (bySource.has(null)) {
    groups.push({ source: null, label: FUNCTION_WORDS,
                  items: [...bySource.get(null)!].sort() });
  }
  const sources = [...bySource.keys()]
    .filter((s): s is string => s !== null)
    .sort();
  for (const source of sources) {
    groups.push({ source, label: source, items: [...bySource.get(source)!].sort() });
  }
  return groups;
}

/** Case-insensitive substring filter over the items; empty boxes drop out. */
export function filterGroups(groups: MenuGroup[], filter: string): MenuGroup[] {
  const needle = filter.toLowerCase();
  if (!needle) return groups;
  return groups
    .map((g) => ({ ...g, items: g.items.filter(
      (w) => w.toLowerCase().includes(needle)) }))
    .filter((g) => g.items.length > 0);
}

const VARIABLE = /^[A-Z][A-Za-z0-9_]*$/;

/** Feature values in the service JSON use grammar notation: a capitalized
 * identifier is a variable; anything else, including quoted atoms like
 * `'X'`, is a constant. */
export function isVariable(value: string): boolean {
  return VARIABLE.test(value);
}

/** Strip notation quoting off a constant so constants compare by content. */
export function constantName(value: string): string {
  if (value.length >= 2 && value.startsWith("'") && value.endsWith("'")) {
    return value.slice(1, -1);
  }
  return value;
}

function asConstant(text: string): string {
  return VARIABLE.test(text) ? `'${text}'` : text;
}

/** Build the lexical entry a pre-terminal abstract option licenses for a
 * typed surface: constants carry over, unconstrained variables drop out,
 * and the conventional text feature is pinned to the surface (quoted when
 * the spelling would otherwise read as a variable). */
export function instantiateEntry(
  option: AbstractOption, surface: string): LexiconEntry {
  const features: Record<string, string> = {};
  for (const [name, value] of Object.entries(option.features)) {
    if (!isVariable(value)) features[name] = value;
  }
  if ("text" in option.features) features["text"] = asConstant(surface);
  return { preterminal: option.category, features, surface };
}

/** The exception that forbids the entry, if any: an exception applies when
 * every feature it mentions is compatible with the entry (constants equal
 * by content, or either side unconstrained). Mirrors the server's
 * unification on the flat fragment the menus deal in. */
export function blockingException(
  entry: LexiconEntry,
  option: AbstractOption): Record<string, string> | null {
  for (const exception of option.exceptions) {
    let applies = true;
    for (const [name, value] of Object.entries(exception)) {
      if (isVariable(value)) continue;
      const have = entry.features[name];
      if (have !== undefined && !isVariable(have)
          && constantName(have) !== constantName(value)) {
        applies = false;
        break;
      }
    }
    if (applies) return exception;
  }
  return null;
}

/** Pre-terminal abstract options are the ones the add-word flow can
 * instantiate. */
export function addableOptions(abstract: AbstractOption[]): AbstractOption[] {
  return abstract.filter((a) => a.kind === "preterminal");
}

export function describeOption(option: AbstractOption): string {
  const parts = Object.entries(option.features)
    .filter(([, v]) => !isVariable(v))
    .map(([n, v]) => `${n}:${v}`);
  const head = parts.length
    ? `${option.category}(${parts.join(", ")})` : option.category;
  if (!option.exceptions.length) return head;
  const exc = option.exceptions
    .map((e) => Object.entries(e).map(([n, v]) => `${n}:${v}`).join(", "))
    .join("; ");
  return `${head} except ${exc}`;
}
