import { describe, expect, it } from "vitest";
import { GridModel, actionForKey } from "../src/grid.js";
import { loadBundle } from "./helpers.js";

const bundle = loadBundle();
const domain = bundle.domain;

describe("GridModel", () => {
  it("decodes rows through the legend", () => {
    const model = new GridModel([".r...", ".m..G", "....."], domain, [0, 1]);
    expect(model.width).toBe(5);
    expect(model.height).toBe(3);
    expect(model.kindAt({ x: 1, y: 0 })).toBe("recharge");
    expect(model.kindAt({ x: 1, y: 1 })).toBe("mud");
    expect(model.kindAt({ x: 4, y: 1 })).toBe("goal");
    expect(model.start).toEqual({ x: 0, y: 1 });
  });

  it("rejects characters missing from the legend", () => {
    expect(() => new GridModel(["..x"], domain, [0, 0])).toThrow(/legend/);
  });

  it("moves with up decreasing y and stays inside bounds", () => {
    const model = new GridModel(["...", "...", "..G"], domain, [1, 1]);
    expect(model.step({ x: 1, y: 1 }, "up", false)).toEqual({ x: 1, y: 0 });
    expect(model.step({ x: 1, y: 1 }, "down", false)).toEqual({ x: 1, y: 2 });
    expect(model.step({ x: 1, y: 1 }, "left", false)).toEqual({ x: 0, y: 1 });
    expect(model.step({ x: 1, y: 1 }, "right", false)).toEqual({ x: 2, y: 1 });
    expect(model.step({ x: 0, y: 0 }, "up", false)).toBeNull();
    expect(model.step({ x: 0, y: 0 }, "left", false)).toBeNull();
  });

  it("treats walls as impassable and mud as walkable", () => {
    const model = new GridModel([".#G", "...", "..."], domain, [0, 0]);
    expect(model.step({ x: 0, y: 0 }, "right", false)).toBeNull();
    const muddy = new GridModel([".mG"], domain, [0, 0]);
    expect(muddy.step({ x: 0, y: 0 }, "right", false)).toEqual({ x: 1, y: 0 });
  });

  it("allows no action at the goal", () => {
    const model = new GridModel([".G."], domain, [0, 0]);
    expect(model.step({ x: 1, y: 0 }, "right", false)).toBeNull();
    expect(model.step({ x: 1, y: 0 }, "left", false)).toBeNull();
  });

  it("walks a demonstration from the fixture bundle", () => {
    const step = bundle.teaching[0];
    const model = new GridModel(step.grid, domain, step.start);
    const path = model.walk(step.actions);
    expect(path).not.toBeNull();
    expect(path).toHaveLength(step.actions.length + 1);
    expect(model.isGoal(path![path!.length - 1])).toBe(true);
  });

  it("returns null for a walk that hits an illegal action", () => {
    const model = new GridModel([".#G", "..."], domain, [0, 0]);
    expect(model.walk(["right"])).toBeNull();
    expect(model.walk(["down", "right", "right", "up"])).not.toBeNull();
  });

  it("offers pickup only when the domain has a pickup flag", () => {
    expect(new GridModel(["..G"], domain, [0, 0]).availableActions()).toEqual([
      "up",
      "down",
      "left",
      "right",
    ]);
    const withPickup = {
      ...domain,
      pickup_flag: "carrying",
      features: [
        { name: "board", trigger: { kind: "enter_once" as const, cell: "mud", flag: "carrying" } },
      ],
    };
    const model = new GridModel([".mG"], withPickup, [0, 0]);
    expect(model.availableActions()).toContain("pickup");
    expect(model.step({ x: 0, y: 0 }, "pickup", false)).toBeNull();
    expect(model.step({ x: 1, y: 0 }, "pickup", false)).toEqual({ x: 1, y: 0 });
    expect(model.step({ x: 1, y: 0 }, "pickup", true)).toBeNull();
  });

  it("maps arrow keys to actions", () => {
    expect(actionForKey("ArrowUp")).toBe("up");
    expect(actionForKey("ArrowDown")).toBe("down");
    expect(actionForKey("ArrowLeft")).toBe("left");
    expect(actionForKey("ArrowRight")).toBe("right");
    expect(actionForKey("Enter")).toBeNull();
  });
});
