import type { Action } from "./types.js";
import type { GridModel, Position } from "./grid.js";
import { clearVisited, highlightGoal, markVisited, placeMarker, renderGrid } from "./renderer.js";

const STEP_MS = 750;

/**
 * Animated replay of one demonstration. The same trajectory can be played
 * any number of times; each run starts from the start cell and advances one
 * action per tick until the recorded path is exhausted, then highlights the
 * goal.
 */
export class DemoPlayer {
  readonly board: HTMLElement;
  onFinished: (() => void) | null = null;
  private readonly model: GridModel;
  private readonly path: Position[];
  private timer: ReturnType<typeof setInterval> | null = null;
  private cursor = 0;

  constructor(
    container: HTMLElement,
    model: GridModel,
    legend: Record<string, string>,
    actions: Action[],
  ) {
    this.model = model;
    const path = model.walk(actions);
    if (path === null) {
      throw new Error("demonstration actions are not walkable on this grid");
    }
    this.path = path;
    this.board = renderGrid(container, model, legend);
    placeMarker(this.board, model.start);
  }

  get playing(): boolean {
    return this.timer !== null;
  }

  /** Start (or restart) the animation from the beginning. */
  play(): void {
    this.stop();
    this.cursor = 0;
    clearVisited(this.board);
    highlightGoal(this.board, false);
    placeMarker(this.board, this.model.start);
    markVisited(this.board, this.model.start);
    if (this.path.length > 1) {
      this.timer = setInterval(() => this.tick(), STEP_MS);
    } else {
      highlightGoal(this.board, true);
      if (this.onFinished !== null) {
        this.onFinished();
      }
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  private tick(): void {
    this.cursor += 1;
    const pos = this.path[this.cursor];
    placeMarker(this.board, pos);
    markVisited(this.board, pos);
    if (this.cursor === this.path.length - 1) {
      this.stop();
      highlightGoal(this.board, true);
      if (this.onFinished !== null) {
        this.onFinished();
      }
    }
  }
}
