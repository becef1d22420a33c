import type { GridModel, Position } from "./grid.js";

/**
 * Cell kinds are drawn as abstract shapes and colors rather than pictures
 * of what they mean, so participants learn terrain costs from the demos
 * instead of from iconography. Walls and the goal keep fixed affordances
 * (solid block, ring target); every other kind is assigned a shape and
 * color pair by its alphabetical rank.
 */
const SHAPES = ["circle", "diamond", "triangle", "square", "hex"];
const COLORS = ["#8e6fc1", "#4f9d69", "#c97b4a", "#4a86c9", "#b04a6e"];

export function styleForKind(kind: string, legend: Record<string, string>): {
  shape: string;
  color: string;
} {
  if (kind === "wall") {
    return { shape: "block", color: "#3a3a3a" };
  }
  if (kind === "goal") {
    return { shape: "ring", color: "#d4a017" };
  }
  if (kind === "empty") {
    return { shape: "none", color: "transparent" };
  }
  const others = [...new Set(Object.values(legend))]
    .filter((k) => k !== "wall" && k !== "goal" && k !== "empty")
    .sort();
  const rank = Math.max(0, others.indexOf(kind));
  return {
    shape: SHAPES[rank % SHAPES.length],
    color: COLORS[rank % COLORS.length],
  };
}

/** Draw the grid into `container`, replacing whatever was there. */
export function renderGrid(
  container: HTMLElement,
  model: GridModel,
  legend: Record<string, string>,
): HTMLElement {
  container.textContent = "";
  const board = document.createElement("div");
  board.className = "board";
  board.style.display = "grid";
  board.style.gridTemplateColumns = `repeat(${model.width}, 2.2rem)`;
  for (let y = 0; y < model.height; y += 1) {
    for (let x = 0; x < model.width; x += 1) {
      const kind = model.kindAt({ x, y });
      const cell = document.createElement("div");
      cell.className = "cell";
      cell.dataset.kind = kind;
      cell.dataset.x = String(x);
      cell.dataset.y = String(y);
      const { shape, color } = styleForKind(kind, legend);
      if (shape !== "none") {
        const mark = document.createElement("span");
        mark.className = `shape shape-${shape}`;
        mark.style.background = shape === "ring" ? "transparent" : color;
        if (shape === "ring") {
          mark.style.border = `3px solid ${color}`;
        }
        cell.appendChild(mark);
      }
      board.appendChild(cell);
    }
  }
  container.appendChild(board);
  return board;
}

export function cellElement(board: HTMLElement, pos: Position): HTMLElement {
  const cell = board.querySelector<HTMLElement>(
    `.cell[data-x="${pos.x}"][data-y="${pos.y}"]`,
  );
  if (cell === null) {
    throw new Error(`no cell rendered at ${pos.x},${pos.y}`);
  }
  return cell;
}

/** Move the agent marker to `pos`, creating it on first use. */
export function placeMarker(board: HTMLElement, pos: Position): void {
  let marker = board.querySelector<HTMLElement>(".marker");
  if (marker === null) {
    marker = document.createElement("span");
    marker.className = "marker";
  }
  cellElement(board, pos).appendChild(marker);
}

export function markVisited(board: HTMLElement, pos: Position): void {
  cellElement(board, pos).classList.add("visited");
}

export function clearVisited(board: HTMLElement): void {
  for (const cell of board.querySelectorAll(".visited")) {
    cell.classList.remove("visited");
  }
}

export function highlightGoal(board: HTMLElement, on: boolean): void {
  for (const cell of board.querySelectorAll<HTMLElement>('.cell[data-kind="goal"]')) {
    cell.classList.toggle("reached", on);
  }
}
