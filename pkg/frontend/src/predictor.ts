import type { Action } from "./types.js";
import { actionForKey } from "./grid.js";
import type { GridModel, Position } from "./grid.js";
import { clearVisited, highlightGoal, markVisited, placeMarker, renderGrid } from "./renderer.js";

/**
 * Interactive trajectory entry for one test environment. The participant
 * extends the path with arrow keys or by clicking a neighbouring cell, and
 * can undo steps. Only legal actions are accepted, so every submitted list
 * is walkable from the start cell by construction.
 */
export class PathBuilder {
  readonly board: HTMLElement;
  onChange: (() => void) | null = null;
  private readonly model: GridModel;
  private actions: Action[] = [];
  private positions: Position[];
  private picked: boolean[] = [false];

  constructor(container: HTMLElement, model: GridModel, legend: Record<string, string>) {
    this.model = model;
    this.positions = [model.start];
    this.board = renderGrid(container, model, legend);
    placeMarker(this.board, model.start);
    markVisited(this.board, model.start);
    this.board.addEventListener("click", (event) => {
      const cell = (event.target as HTMLElement).closest<HTMLElement>(".cell");
      if (cell !== null) {
        this.clickCell(Number(cell.dataset.x), Number(cell.dataset.y));
      }
    });
  }

  get head(): Position {
    return this.positions[this.positions.length - 1];
  }

  get path(): Action[] {
    return [...this.actions];
  }

  get length(): number {
    return this.actions.length;
  }

  reachedGoal(): boolean {
    return this.model.isGoal(this.head);
  }

  /** Append one action if it is legal from the current head. */
  tryAction(action: Action): boolean {
    const wasPicked = this.picked[this.picked.length - 1];
    const next = this.model.step(this.head, action, wasPicked);
    if (next === null) {
      return false;
    }
    this.actions.push(action);
    this.positions.push(next);
    this.picked.push(wasPicked || action === "pickup");
    this.redraw();
    return true;
  }

  undo(): boolean {
    if (this.actions.length === 0) {
      return false;
    }
    this.actions.pop();
    this.positions.pop();
    this.picked.pop();
    this.redraw();
    return true;
  }

  reset(): void {
    this.actions = [];
    this.positions = [this.model.start];
    this.picked = [false];
    this.redraw();
  }

  /** Route keyboard input: arrows extend the path, Backspace undoes. */
  handleKey(event: KeyboardEvent): void {
    if (event.key === "Backspace") {
      event.preventDefault();
      this.undo();
      return;
    }
    const action = actionForKey(event.key);
    if (action !== null && this.model.availableActions().includes(action)) {
      event.preventDefault();
      this.tryAction(action);
    }
  }

  /** Clicking a cell orthogonally adjacent to the head moves there. */
  clickCell(x: number, y: number): boolean {
    const dx = x - this.head.x;
    const dy = y - this.head.y;
    let action: Action | null = null;
    if (dx === 0 && dy === -1) action = "up";
    else if (dx === 0 && dy === 1) action = "down";
    else if (dx === -1 && dy === 0) action = "left";
    else if (dx === 1 && dy === 0) action = "right";
    if (action === null) {
      return false;
    }
    return this.tryAction(action);
  }

  private redraw(): void {
    clearVisited(this.board);
    for (const pos of this.positions) {
      markVisited(this.board, pos);
    }
    placeMarker(this.board, this.head);
    highlightGoal(this.board, this.reachedGoal());
    if (this.onChange !== null) {
      this.onChange();
    }
  }
}
