import type { ResponseRecord, SessionBundle, TestSpec } from "./types.js";
import { GridModel } from "./grid.js";
import { DemoPlayer } from "./player.js";
import { PathBuilder } from "./predictor.js";
import type { SessionClient } from "./api.js";

/**
 * Drives a full participant session: watch every demonstration, then
 * predict the route in each test environment, then review a summary.
 *
 * Participants may step back to rewatch earlier demonstrations, but tests
 * are answered in order and each is graded exactly once.
 */
export class SessionController {
  readonly records: ResponseRecord[] = [];
  private readonly root: HTMLElement;
  private readonly client: SessionClient;
  private bundle: SessionBundle | null = null;
  private watched = new Set<number>();
  private player: DemoPlayer | null = null;
  private testIndex = 0;
  private builder: PathBuilder | null = null;
  private readonly keyListener = (event: KeyboardEvent) => {
    if (this.builder !== null) {
      this.builder.handleKey(event);
    }
  };

  constructor(root: HTMLElement, client: SessionClient) {
    this.root = root;
    this.client = client;
  }

  async start(): Promise<void> {
    this.bundle = await this.client.getSession();
    document.addEventListener("keydown", this.keyListener);
    this.showDemo(0);
  }

  get currentBuilder(): PathBuilder | null {
    return this.builder;
  }

  get currentPlayer(): DemoPlayer | null {
    return this.player;
  }

  // -- teaching phase -------------------------------------------------

  private showDemo(index: number): void {
    const bundle = this.mustBundle();
    this.builder = null;
    const step = bundle.teaching[index];
    this.root.textContent = "";

    const phase = document.createElement("section");
    phase.className = "phase-teaching";
    const title = document.createElement("h2");
    title.className = "demo-title";
    title.textContent = `Demonstration ${index + 1} of ${bundle.teaching.length}`;
    phase.appendChild(title);

    const boardHost = document.createElement("div");
    boardHost.className = "demo-board";
    phase.appendChild(boardHost);

    const model = new GridModel(step.grid, bundle.domain, step.start);
    this.player = new DemoPlayer(boardHost, model, bundle.domain.legend, step.actions);

    const controls = document.createElement("div");
    controls.className = "controls";
    const play = button("play", this.watched.has(index) ? "Replay" : "Play");
    const back = button("back", "Back");
    back.disabled = index === 0;
    const next = button("next", index === bundle.teaching.length - 1 ? "Start tests" : "Next");
    next.disabled = !this.watched.has(index);
    controls.append(play, back, next);
    phase.appendChild(controls);
    this.root.appendChild(phase);

    this.player.onFinished = () => {
      this.watched.add(index);
      next.disabled = false;
      play.textContent = "Replay";
    };
    play.addEventListener("click", () => this.player?.play());
    back.addEventListener("click", () => {
      if (index > 0) {
        this.showDemo(index - 1);
      }
    });
    next.addEventListener("click", () => {
      if (!this.watched.has(index)) {
        return;
      }
      if (index + 1 < bundle.teaching.length) {
        this.showDemo(index + 1);
      } else {
        this.showTest(0);
      }
    });
  }

  // -- testing phase --------------------------------------------------

  private showTest(index: number): void {
    const bundle = this.mustBundle();
    this.player = null;
    this.testIndex = index;
    const spec = bundle.tests[index];
    this.root.textContent = "";

    const phase = document.createElement("section");
    phase.className = "phase-testing";
    const title = document.createElement("h2");
    title.className = "test-title";
    title.textContent = `Test ${index + 1} of ${bundle.tests.length}`;
    phase.appendChild(title);

    const prompt = document.createElement("p");
    prompt.className = "prompt";
    prompt.textContent =
      "Trace the route the agent would take. Use the arrow keys or click a neighbouring cell; Backspace undoes a step.";
    phase.appendChild(prompt);

    const boardHost = document.createElement("div");
    boardHost.className = "test-board";
    phase.appendChild(boardHost);

    const model = new GridModel(spec.grid, bundle.domain, spec.start);
    const builder = new PathBuilder(boardHost, model, bundle.domain.legend);
    this.builder = builder;

    const confidence = document.createElement("select");
    confidence.className = "confidence";
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = "How confident are you?";
    confidence.appendChild(placeholder);
    for (let level = 1; level <= 5; level += 1) {
      const option = document.createElement("option");
      option.value = String(level);
      option.textContent = `${level} of 5`;
      confidence.appendChild(option);
    }

    const undo = button("undo", "Undo");
    const reset = button("reset-path", "Start over");
    const submit = button("submit", "Submit");
    submit.disabled = true;

    const controls = document.createElement("div");
    controls.className = "controls";
    controls.append(undo, reset, confidence, submit);
    phase.appendChild(controls);

    const error = document.createElement("p");
    error.className = "error";
    error.hidden = true;
    phase.appendChild(error);

    const feedback = document.createElement("div");
    feedback.className = "feedback";
    feedback.hidden = true;
    phase.appendChild(feedback);

    this.root.appendChild(phase);

    const refresh = () => {
      submit.disabled = !builder.reachedGoal() || confidence.value === "";
    };
    builder.onChange = refresh;
    confidence.addEventListener("change", refresh);
    undo.addEventListener("click", () => builder.undo());
    reset.addEventListener("click", () => builder.reset());
    submit.addEventListener("click", () => {
      void this.submit(spec, builder, Number(confidence.value), {
        submit,
        undo,
        reset,
        confidence,
        error,
        feedback,
        phase,
      });
    });
  }

  private async submit(
    spec: TestSpec,
    builder: PathBuilder,
    confidence: number,
    ui: {
      submit: HTMLButtonElement;
      undo: HTMLButtonElement;
      reset: HTMLButtonElement;
      confidence: HTMLSelectElement;
      error: HTMLParagraphElement;
      feedback: HTMLDivElement;
      phase: HTMLElement;
    },
  ): Promise<void> {
    ui.submit.disabled = true;
    const result = await this.client.postResponse(spec.test_id, builder.path, confidence);
    if (!result.ok) {
      ui.error.textContent = `The server rejected this route (${result.status}): ${result.detail}`;
      ui.error.hidden = false;
      ui.submit.disabled = false;
      return;
    }
    ui.error.hidden = true;
    this.records.push({ test_id: spec.test_id, tier: spec.tier, score: result.score });
    this.builder = null;
    ui.submit.disabled = true;
    ui.undo.disabled = true;
    ui.reset.disabled = true;
    ui.confidence.disabled = true;

    const verdict = document.createElement("p");
    verdict.className = "verdict";
    verdict.textContent = result.score.optimal
      ? "That matches the agent's route."
      : `Not quite the agent's route (reward gap ${result.score.reward_gap.toFixed(3)}).`;
    ui.feedback.appendChild(verdict);
    const nextLabel =
      this.testIndex + 1 < this.mustBundle().tests.length ? "Next test" : "Finish";
    const next = button("next-test", nextLabel);
    next.addEventListener("click", () => {
      if (this.testIndex + 1 < this.mustBundle().tests.length) {
        this.showTest(this.testIndex + 1);
      } else {
        this.showSummary();
      }
    });
    ui.feedback.appendChild(next);
    ui.feedback.hidden = false;
  }

  // -- summary phase --------------------------------------------------

  private showSummary(): void {
    const bundle = this.mustBundle();
    this.builder = null;
    this.root.textContent = "";
    document.removeEventListener("keydown", this.keyListener);

    const phase = document.createElement("section");
    phase.className = "phase-summary";
    const title = document.createElement("h2");
    title.textContent = "Session complete";
    phase.appendChild(title);

    const tierOrder: string[] = [];
    for (const test of bundle.tests) {
      if (!tierOrder.includes(test.tier)) {
        tierOrder.push(test.tier);
      }
    }
    const list = document.createElement("ul");
    list.className = "tallies";
    for (const tier of tierOrder) {
      const inTier = this.records.filter((r) => r.tier === tier);
      const optimal = inTier.filter((r) => r.score.optimal).length;
      const item = document.createElement("li");
      item.className = "tally";
      item.dataset.tier = tier;
      item.textContent = `${tier}: ${optimal} of ${inTier.length} matched`;
      list.appendChild(item);
    }
    phase.appendChild(list);

    const label = document.createElement("label");
    label.textContent = "Anything you want to tell us about the agent's behaviour?";
    const comments = document.createElement("textarea");
    comments.className = "comments";
    label.appendChild(comments);
    phase.appendChild(label);

    this.root.appendChild(phase);
  }

  private mustBundle(): SessionBundle {
    if (this.bundle === null) {
      throw new Error("session not started");
    }
    return this.bundle;
  }
}

function button(className: string, label: string): HTMLButtonElement {
  const el = document.createElement("button");
  el.type = "button";
  el.className = className;
  el.textContent = label;
  return el;
}
