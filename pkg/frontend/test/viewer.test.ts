import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  attributeSearch,
  countByClass,
  counts,
  currentStep,
  highlightIds,
  jumpTo,
  jumpToEnd,
  loadTrace,
  parseLayoutConfig,
  renderedSignature,
  step,
} from "../src/viewer.js";

const FIXTURE = readFileSync(new URL("./fixtures/tcp_small.trace", import.meta.url), "utf-8");
const SUMMARY = JSON.parse(
  readFileSync(new URL("./fixtures/summary.json", import.meta.url), "utf-8"),
);
const LAYOUT = parseLayoutConfig(
  readFileSync(new URL("./fixtures/layout.json", import.meta.url), "utf-8"),
);

describe("viewer acceptance", () => {
  it("stepping to the end matches the shell's final summary", () => {
    let state = loadTrace(FIXTURE, LAYOUT);
    expect(state.events.length).toBe(SUMMARY.events);
    state = jumpToEnd(state);
    const c = counts(state);
    expect(c.nodes).toBe(SUMMARY.finalNodes);
    expect(c.edges).toBe(SUMMARY.finalEdges);
    const byClass = countByClass(state);
    expect(byClass.get("sm_State") ?? 0).toBe(SUMMARY.states);
    expect(byClass.get("sm_Transition") ?? 0).toBe(SUMMARY.transitions);
  });

  it("forward then back returns to the identical rendered element set", () => {
    let state = loadTrace(FIXTURE, LAYOUT);
    const before = renderedSignature(state);
    state = step(state, 1);
    state = step(state, 1);
    state = step(state, -1);
    state = step(state, -1);
    expect(renderedSignature(state)).toBe(before);
    expect(state.cursor).toBe(0);
  });

  it("jump to end equals stepping forward one by one", () => {
    let stepped = loadTrace(FIXTURE, LAYOUT);
    while (stepped.cursor < stepped.events.length - 1) {
      stepped = step(stepped, 1);
    }
    const jumped = jumpToEnd(loadTrace(FIXTURE, LAYOUT));
    expect(renderedSignature(stepped)).toBe(renderedSignature(jumped));
  });
});

describe("stepping", () => {
  it("cursor starts at the snapshot", () => {
    const state = loadTrace(FIXTURE);
    expect(state.cursor).toBe(0);
    expect(currentStep(state).kind).toBe("snapshot");
  });

  it("out-of-range steps are no-ops with a notice", () => {
    let state = loadTrace(FIXTURE);
    state = step(state, -1);
    expect(state.cursor).toBe(0);
    expect(state.notice).toMatch(/start/);
    state = jumpToEnd(state);
    state = step(state, 1);
    expect(state.notice).toMatch(/end/);
  });

  it("a rule application step highlights exactly its created elements", () => {
    let state = loadTrace(FIXTURE);
    // find the first transition-creating event
    const idx = state.events.findIndex(
      (e) => e.kind === "rule-applied" && e.rule === "createTransitions",
    );
    expect(idx).toBeGreaterThan(0);
    state = jumpTo(state, idx);
    const event = state.events[idx];
    if (event.kind !== "rule-applied") throw new Error("unexpected");
    const highlight = highlightIds(state);
    const created = [
      ...event.delta.createdNodes.map((n) => n.id),
      ...event.delta.createdEdges.map((e) => e.id),
    ];
    expect(highlight).toEqual(new Set(created));
    expect(created.some((id) => state.graph.nodes.get(id)?.cls === "sm_Transition")).toBe(true);
    const info = currentStep(state);
    expect(info.rule).toBe("createTransitions");
    expect(info.bindings.length).toBeGreaterThan(0);
  });
});

describe("attribute search", () => {
  it("finds elements by attribute value at the current cursor", () => {
    const state = jumpToEnd(loadTrace(FIXTURE, LAYOUT));
    const hits = attributeSearch(state, "SynSent");
    expect(hits.some((h) => h.cls === "java_Class")).toBe(true);
    expect(hits.some((h) => h.cls === "sm_State")).toBe(true);
  });
});
