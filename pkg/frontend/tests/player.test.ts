import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { GridModel } from "../src/grid.js";
import { DemoPlayer } from "../src/player.js";
import { loadBundle } from "./helpers.js";

const bundle = loadBundle();
const step = bundle.teaching[0];

function markerCell(board: HTMLElement): string {
  const marker = board.querySelector(".marker");
  const cell = marker?.closest<HTMLElement>(".cell");
  return `${cell?.dataset.x},${cell?.dataset.y}`;
}

function visitedCells(board: HTMLElement): string[] {
  return [...board.querySelectorAll<HTMLElement>(".cell.visited")].map(
    (cell) => `${cell.dataset.x},${cell.dataset.y}`,
  );
}

describe("DemoPlayer", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  function makePlayer() {
    const host = document.createElement("div");
    document.body.appendChild(host);
    const model = new GridModel(step.grid, bundle.domain, step.start);
    const player = new DemoPlayer(host, model, bundle.domain.legend, step.actions);
    return { player, model };
  }

  it("animates one move per tick and highlights the goal at the end", () => {
    const { player } = makePlayer();
    const finished = vi.fn();
    player.onFinished = finished;
    player.play();
    expect(player.playing).toBe(true);
    expect(markerCell(player.board)).toBe("0,1");

    for (let move = 1; move <= step.actions.length; move += 1) {
      vi.advanceTimersByTime(750);
      expect(visitedCells(player.board)).toHaveLength(move + 1);
    }
    expect(markerCell(player.board)).toBe("4,1");
    expect(player.board.querySelector(".cell.reached")).not.toBeNull();
    expect(player.playing).toBe(false);
    expect(finished).toHaveBeenCalledTimes(1);

    vi.advanceTimersByTime(7500);
    expect(finished).toHaveBeenCalledTimes(1);
  });

  it("replays the identical trajectory from the start", () => {
    const { player } = makePlayer();
    player.play();
    vi.advanceTimersByTime(750 * step.actions.length);
    const firstRun = visitedCells(player.board).sort();

    player.play();
    expect(markerCell(player.board)).toBe("0,1");
    expect(visitedCells(player.board)).toHaveLength(1);
    expect(player.board.querySelector(".cell.reached")).toBeNull();

    vi.advanceTimersByTime(750 * step.actions.length);
    expect(visitedCells(player.board).sort()).toEqual(firstRun);
    expect(markerCell(player.board)).toBe("4,1");
    expect(player.board.querySelector(".cell.reached")).not.toBeNull();
  });

  it("refuses actions that are not walkable on the grid", () => {
    const host = document.createElement("div");
    const model = new GridModel(step.grid, bundle.domain, step.start);
    expect(
      () => new DemoPlayer(host, model, bundle.domain.legend, ["up", "up", "up"]),
    ).toThrow(/not walkable/);
  });
});
