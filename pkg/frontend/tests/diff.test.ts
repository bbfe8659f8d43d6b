import { describe, expect, it } from "vitest";

import { highlightUnique } from "../src/diff.js";

describe("highlightUnique", () => {
  it("marks words the other note never uses", () => {
    const segments = highlightUnique("acute sinusitis with fever", "chronic sinusitis");
    const unique = segments.filter((s) => s.unique).map((s) => s.text.trim());
    expect(unique.join(" ")).toContain("acute");
    expect(unique.join(" ")).toContain("fever");
    const shared = segments.filter((s) => !s.unique).map((s) => s.text);
    expect(shared.join("")).toContain("sinusitis");
  });

  it("round-trips the original text", () => {
    const text = "Plan: rest, fluids.\nFollow up in 1 week.";
    const segments = highlightUnique(text, "totally different");
    expect(segments.map((s) => s.text).join("")).toBe(text);
  });

  it("marks nothing when the notes share all words", () => {
    const segments = highlightUnique("same words here", "here same words");
    expect(segments.every((s) => !s.unique)).toBe(true);
  });

  it("is case-insensitive and punctuation-tolerant", () => {
    const segments = highlightUnique("GERD.", "gerd");
    expect(segments.every((s) => !s.unique)).toBe(true);
  });
});
