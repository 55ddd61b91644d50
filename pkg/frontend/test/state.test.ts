import { describe, expect, it } from "vitest";

import { categoricalIn, numericCompare } from "../src/filters.js";
import { FilterStore, chipsFor, reconcileSelection } from "../src/state.js";
import type { FacetPayload } from "../src/types.js";

const FACETS: FacetPayload[] = [
  { property_id: "method", label: "method", kind: "categorical", degraded: false },
  { property_id: "r0_estimate", label: "R0 estimate", kind: "numeric", degraded: false },
];

describe("chips", () => {
  it("derive from the last applied filters, not the draft state", () => {
    const store = new FilterStore("covid");
    store.setExprs("method", [categoricalIn(["SEIR model"])]);
    expect(chipsFor(store.state.lastApplied, FACETS)).toEqual([]);

    store.applied(store.state.filters, ["c001"], false);
    const chips = chipsFor(store.state.lastApplied, FACETS);
    expect(chips).toHaveLength(1);
    expect(chips[0].facetLabel).toBe("method");
    expect(chips[0].text).toBe("is one of: SEIR model");

    // drafting further filters does not change the chips until applied
    store.setExprs("r0_estimate", [numericCompare(">", "2.5")]);
    expect(chipsFor(store.state.lastApplied, FACETS)).toHaveLength(1);
  });

  it("one chip per expression, sorted by property", () => {
    const store = new FilterStore("covid");
    store.setExprs("r0_estimate", [numericCompare(">", "2"), numericCompare("<", "5")]);
    store.setExprs("method", [categoricalIn(["SIR model"])]);
    store.applied(store.state.filters, [], false);
    const chips = chipsFor(store.state.lastApplied, FACETS);
    expect(chips.map((c) => `${c.propertyId}#${c.exprIndex}`)).toEqual([
      "method#0",
      "r0_estimate#0",
      "r0_estimate#1",
    ]);
  });
});

describe("store edits", () => {
  it("removing the last expression clears the property entirely", () => {
    const store = new FilterStore("covid");
    store.setExprs("method", [categoricalIn(["SEIR model"])]);
    store.removeExpr("method", 0);
    expect(store.state.filters).toEqual({});
  });

  it("clear drops every draft filter", () => {
    const store = new FilterStore("covid");
    store.setExprs("method", [categoricalIn(["SEIR model"])]);
    store.setExprs("r0_estimate", [numericCompare(">", "2.5")]);
    store.clear();
    expect(store.state.filters).toEqual({});
  });

  it("applied state is a snapshot, immune to later draft mutation", () => {
    const store = new FilterStore("covid");
    store.setExprs("method", [categoricalIn(["SEIR model"])]);
    store.applied(store.state.filters, ["c001"], false);
    store.setExprs("method", [categoricalIn(["SIR model"])]);
    expect(chipsFor(store.state.lastApplied, FACETS)[0].text).toBe("is one of: SEIR model");
  });
});

describe("level switching", () => {
  const selected = [
    { external_id: "geo-de", label: "Germany", graph: "geonames" },
    { external_id: "geo-fr", label: "France", graph: "geonames" },
  ];

  it("keeps ancestors that exist at the new level's aggregation", () => {
    const buckets = [
      { label: "Germany", external_id: "geo-de", count: 4 },
      { label: "China", external_id: "geo-cn", count: 8 },
    ];
    const { kept, dropped } = reconcileSelection(selected, buckets);
    expect(kept.map((a) => a.external_id)).toEqual(["geo-de"]);
    expect(dropped.map((a) => a.external_id)).toEqual(["geo-fr"]);
  });

  it("never keeps a selection matching only the unclassified bucket", () => {
    const { kept, dropped } = reconcileSelection(selected, [
      { label: "(unclassified)", external_id: null, count: 2 },
    ]);
    expect(kept).toEqual([]);
    expect(dropped).toHaveLength(2);
  });
});
