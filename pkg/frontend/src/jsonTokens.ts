/**
 * Extract the literal source tokens of a JSON document, keyed by path.
 *
 * The console displays numbers exactly as the service sent them, so instead
 * of re-serializing parsed doubles (which can change the digits), every
 * number/boolean/string leaf is sliced verbatim out of the raw response
 * text. Paths use dots for object keys and [i] for array indices, e.g.
 * "result.up" or "function[1]".
 */

export type TokenMap = Map<string, string>;

class Scanner {
  pos = 0;
  constructor(readonly text: string, readonly tokens: TokenMap) {}

  error(message: string): never {
    throw new Error(`JSON scan error at ${this.pos}: ${message}`);
  }

  ws(): void {
    while (this.pos < this.text.length && " \t\n\r".includes(this.text[this.pos])) {
      this.pos++;
    }
  }

  value(path: string): void {
    this.ws();
    const ch = this.text[this.pos];
    if (ch === "{") return this.object(path);
    if (ch === "[") return this.array(path);
    if (ch === '"') {
      const token = this.stringToken();
      this.tokens.set(path, token);
      return;
    }
    const start = this.pos;
    while (this.pos < this.text.length && !",}] \t\n\r".includes(this.text[this.pos])) {
      this.pos++;
    }
    if (this.pos === start) this.error("empty literal");
    this.tokens.set(path, this.text.slice(start, this.pos));
  }

  stringToken(): string {
    const start = this.pos;
    this.pos++; // opening quote
    while (this.pos < this.text.length) {
      const ch = this.text[this.pos];
      if (ch === "\\") this.pos += 2;
      else if (ch === '"') {
        this.pos++;
        return this.text.slice(start + 1, this.pos - 1);
      } else this.pos++;
    }
    this.error("unterminated string");
  }

  object(path: string): void {
    this.pos++; // {
    this.ws();
    if (this.text[this.pos] === "}") {
      this.pos++;
      return;
    }
    for (;;) {
      this.ws();
      if (this.text[this.pos] !== '"') this.error("expected object key");
      const key = this.stringToken();
      this.ws();
      if (this.text[this.pos] !== ":") this.error("expected ':'");
      this.pos++;
      this.value(path ? `${path}.${key}` : key);
      this.ws();
      const ch = this.text[this.pos];
      if (ch === ",") {
        this.pos++;
        continue;
      }
      if (ch === "}") {
        this.pos++;
        return;
      }
      this.error("expected ',' or '}'");
    }
  }

  array(path: string): void {
    this.pos++; // [
    this.ws();
    if (this.text[this.pos] === "]") {
      this.pos++;
      return;
    }
    let index = 0;
    for (;;) {
      this.value(`${path}[${index}]`);
      index++;
      this.ws();
      const ch = this.text[this.pos];
      if (ch === ",") {
        this.pos++;
        continue;
      }
      if (ch === "]") {
        this.pos++;
        return;
      }
      this.error("expected ',' or ']'");
    }
  }
}

/** Scan a raw JSON document into a path -> source-token map. */
export function scanTokens(raw: string): TokenMap {
  const scanner = new Scanner(raw, new Map());
  scanner.value("");
  scanner.ws();
  return scanner.tokens;
}

/** The verbatim source token at a path, or null when absent. */
export function tokenAt(tokens: TokenMap, path: string): string | null {
  return tokens.get(path) ?? null;
}
