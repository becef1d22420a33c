export { SessionClient } from "./api.js";
export { GridModel, actionForKey } from "./grid.js";
export { DemoPlayer } from "./player.js";
export { PathBuilder } from "./predictor.js";
export { renderGrid, styleForKind } from "./renderer.js";
export { SessionController } from "./session.js";
export type {
  Action,
  DomainInfo,
  ResponseRecord,
  Score,
  SessionBundle,
  TeachingStep,
  TestSpec,
} from "./types.js";

import { SessionClient } from "./api.js";
import { SessionController } from "./session.js";

/** Attach a session to `root` and begin with the first demonstration. */
export async function mount(root: HTMLElement, baseUrl = ""): Promise<SessionController> {
  const controller = new SessionController(root, new SessionClient(baseUrl));
  await controller.start();
  return controller;
}
