import { describe, expect, it } from "vitest";

import { dispatchKey } from "../src/keyboard.js";

describe("dispatchKey", () => {
  it("routes bound keys to their handlers", () => {
    const hits: string[] = [];
    const handlers = {
      nextFlag: () => hits.push("next"),
      prevFlag: () => hits.push("prev"),
      submit: () => hits.push("submit"),
    };
    expect(dispatchKey("n", handlers)).toBe(true);
    expect(dispatchKey("p", handlers)).toBe(true);
    expect(dispatchKey("Enter", handlers)).toBe(true);
    expect(hits).toEqual(["next", "prev", "submit"]);
  });

  it("ignores unbound keys and missing handlers", () => {
    expect(dispatchKey("z", {})).toBe(false);
    expect(dispatchKey("n", {})).toBe(false); // bound key, no handler
  });
});
