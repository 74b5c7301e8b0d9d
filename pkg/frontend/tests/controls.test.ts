import { describe, expect, it } from "vitest";

import {
  buildConditionToggle, buildRequest, buildStop, conditionLabel,
  INSTRUCTIONS, paintEcdf, parseEcdfCsv, parseMetricsCsv, trialSummaryLine,
} from "../src/controls.js";
import { ViewModel } from "../src/model.js";
import { asCtx, FakeCtx, makeSnapshot } from "./helpers.js";

describe("trial controls", () => {
  it("offers exactly the six task sentences", () => {
    expect(INSTRUCTIONS).toHaveLength(6);
    expect(new Set(INSTRUCTIONS).size).toBe(6);
    for (const text of INSTRUCTIONS) {
      expect(text).toMatch(/^Put the .+ onto the .+ plate$/);
    }
    expect(INSTRUCTIONS).toContain("Put the spray can onto the white plate");
  });

  it("maps a request button to exactly one request command", () => {
    expect(buildRequest("Put the red bottle onto the red plate")).toEqual({
      request: { text: "Put the red bottle onto the red plate" },
    });
  });

  it("stamps STOP with the sim-time on screen when pressed", () => {
    const model = new ViewModel();
    model.applySnapshot(makeSnapshot({ sim_time: 13.52 }), 0);
    expect(buildStop(model)).toEqual({
      stop: { keyword: "stop" }, at: 13.52,
    });
  });

  it("condition toggle resends set_mirror and relabels the header", () => {
    expect(buildConditionToggle(true)).toEqual({ set_mirror: { on: true } });
    expect(buildConditionToggle(false)).toEqual({ set_mirror: { on: false } });
    expect(conditionLabel(true)).toBe("Mirror Eyes");
    expect(conditionLabel(false)).toBe("Eyes Only");
  });

  it("parses the gateway metrics CSV schema", () => {
    const rows = parseMetricsCsv(
      "error_step,condition,n,mean_s,sd_s,min_s,max_s\n" +
      "step1,eyes_only,2,4.660000,0.500000,4.160000,5.160000\n" +
      "step2,mirror_eyes,1,14.580000,0.000000,14.580000,14.580000\n");
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({
      error_step: "step1", condition: "eyes_only", n: 2, mean_s: 4.66,
      sd_s: 0.5, min_s: 4.16, max_s: 5.16,
    });
    expect(rows[1].mean_s).toBeCloseTo(14.58, 9);
  });

  it("returns no rows for a header-only CSV", () => {
    expect(parseMetricsCsv(
      "error_step,condition,n,mean_s,sd_s,min_s,max_s\n")).toEqual([]);
  });

  it("groups ECDF rows into per-series step functions", () => {
    const series = parseEcdfCsv(
      "condition,error_step,t_s,F\n" +
      "eyes_only,step1,4.660000,0.500000\n" +
      "eyes_only,step1,5.160000,1.000000\n" +
      "mirror_eyes,step2,14.580000,1.000000\n");
    expect(series).toHaveLength(2);
    expect(series[0].points).toEqual([[4.66, 0.5], [5.16, 1.0]]);
    expect(series[1].condition).toBe("mirror_eyes");
  });

  it("draws one polyline per ECDF series", () => {
    const fake = new FakeCtx();
    paintEcdf(asCtx(fake), 220, 60, [
      { condition: "eyes_only", error_step: "step1", points: [[4.66, 1]] },
      { condition: "mirror_eyes", error_step: "step2", points: [[14.58, 1]] },
    ]);
    expect(fake.count("stroke")).toBe(2);
  });

  it("summarizes trials with and without a stop", () => {
    expect(trialSummaryLine({
      instruction: "x", condition: "eyes_only", error_class: "step1",
      plan: ["red_bottle", "red_plate"], stop_time: 4.66,
      classification: "error_interrupted",
    })).toBe("step1 · stop 4.66 s · error_interrupted");
    expect(trialSummaryLine({
      instruction: "x", condition: "eyes_only", error_class: "none",
      plan: ["red_bottle", "red_plate"], stop_time: null,
      classification: "correct_uninterrupted",
    })).toContain("—");
  });
});
