import type { Action, DomainInfo } from "./types.js";

export interface Position {
  x: number;
  y: number;
}

const MOVE_DELTAS: Record<string, [number, number]> = {
  up: [0, -1],
  down: [0, 1],
  left: [-1, 0],
  right: [1, 0],
};

/**
 * Walkable view of one environment: character rows decoded through the
 * domain legend, plus movement rules. The y axis grows downward, so "up"
 * decreases y.
 */
export class GridModel {
  readonly width: number;
  readonly height: number;
  readonly start: Position;
  private readonly cells: string[][];
  private readonly pickupFlag: string | null;
  private readonly pickupCell: string | null;

  constructor(rows: string[], domain: DomainInfo, start: [number, number]) {
    if (rows.length === 0) {
      throw new Error("grid has no rows");
    }
    this.height = rows.length;
    this.width = rows[0].length;
    this.cells = rows.map((row) => {
      if (row.length !== this.width) {
        throw new Error("grid rows have uneven width");
      }
      return Array.from(row, (ch) => {
        const kind = domain.legend[ch];
        if (kind === undefined) {
          throw new Error(`grid character not in legend: ${JSON.stringify(ch)}`);
        }
        return kind;
      });
    });
    this.start = { x: start[0], y: start[1] };
    this.pickupFlag = domain.pickup_flag;
    this.pickupCell = this.pickupFlag === null ? null : pickupCellFor(domain, this.pickupFlag);
  }

  kindAt(pos: Position): string {
    return this.cells[pos.y][pos.x];
  }

  inBounds(pos: Position): boolean {
    return pos.x >= 0 && pos.x < this.width && pos.y >= 0 && pos.y < this.height;
  }

  isGoal(pos: Position): boolean {
    return this.kindAt(pos) === "goal";
  }

  /** Actions the player may choose in this environment. */
  availableActions(): Action[] {
    const actions: Action[] = ["up", "down", "left", "right"];
    if (this.pickupFlag !== null) {
      actions.push("pickup");
    }
    return actions;
  }

  /**
   * Apply one action. Returns the resulting position, or null when the
   * action is illegal there (leaving the grid, entering a wall, a pickup
   * with nothing to pick up, or any action taken at the goal).
   */
  step(pos: Position, action: Action, picked: boolean): Position | null {
    if (this.isGoal(pos)) {
      return null;
    }
    if (action === "pickup") {
      if (this.pickupFlag === null || picked || this.kindAt(pos) !== this.pickupCell) {
        return null;
      }
      return pos;
    }
    const delta = MOVE_DELTAS[action];
    if (delta === undefined) {
      return null;
    }
    const next = { x: pos.x + delta[0], y: pos.y + delta[1] };
    if (!this.inBounds(next) || this.kindAt(next) === "wall") {
      return null;
    }
    return next;
  }

  /**
   * Walk an action list from the start cell. Returns the visited positions
   * (start first) or null as soon as one action is illegal.
   */
  walk(actions: Action[]): Position[] | null {
    const visited: Position[] = [this.start];
    let pos = this.start;
    let picked = false;
    for (const action of actions) {
      const next = this.step(pos, action, picked);
      if (next === null) {
        return null;
      }
      if (action === "pickup") {
        picked = true;
      }
      pos = next;
      visited.push(pos);
    }
    return visited;
  }
}

function pickupCellFor(domain: DomainInfo, flag: string): string | null {
  for (const feature of domain.features) {
    if (feature.trigger.flag === flag && feature.trigger.cell !== undefined) {
      return feature.trigger.cell;
    }
  }
  return null;
}

/** Map an arrow key (or WASD-free keyboard layout) to a movement action. */
export function actionForKey(key: string): Action | null {
  switch (key) {
    case "ArrowUp":
      return "up";
    case "ArrowDown":
      return "down";
    case "ArrowLeft":
      return "left";
    case "ArrowRight":
      return "right";
    case " ":
      return "pickup";
    default:
      return null;
  }
}
