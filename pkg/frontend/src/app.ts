/** Console wiring: scene picker, query panel, clarification dialog, trace
 * stepper, transcript. All displayed programs, answers, and failure text are
 * taken verbatim from service responses; this module only routes and
 * formats them. State beyond the session id lives in the URL hash so a
 * refresh restores the same visuals from the service. */

import { ApiError, BusyError, ConsoleApi } from "./api.js";
import { SceneView } from "./sceneView.js";
import type { GraspAction, ProgramStep, QueryResponse, TraceDoc } from "./types.js";
import {
  buildStepHighlights,
  clampStep,
  describeObject,
  diffPrograms,
  emptyViewModel,
  formatAnswer,
  formatStep,
  type StepHighlight,
  type ViewModel,
} from "./viewmodel.js";

const LAYOUT = `
  <header class="bar">
    <label>scene
      <select id="scene-select"></select>
    </label>
    <button id="open-session">open session</button>
    <span id="session-label" class="muted"></span>
  </header>
  <main class="columns">
    <section class="scene-panel" id="scene-panel"></section>
    <section class="side-panel">
      <form id="query-form">
        <input id="query-input" placeholder="ask about the scene" autocomplete="off" />
        <button id="query-send" type="submit">ask</button>
      </form>
      <div id="failure-box" class="failure" hidden></div>
      <div id="clarification-box" class="clarification" hidden>
        <p id="clarification-text"></p>
        <form id="feedback-form">
          <input id="feedback-input" placeholder="answer the question" autocomplete="off" />
          <button id="feedback-send" type="submit">send feedback</button>
        </form>
      </div>
      <div class="result-row">
        <span class="muted">answer</span>
        <span id="answer-badge" class="badge" hidden></span>
      </div>
      <ol id="program-list" class="program"></ol>
      <div id="stepper" class="stepper" hidden>
        <input id="trace-slider" type="range" min="0" max="0" value="0" />
        <div id="step-detail" class="muted"></div>
      </div>
      <ul id="transcript" class="transcript"></ul>
    </section>
  </main>
`;

export class Console {
  readonly api: ConsoleApi;
  readonly view: SceneView;
  model: ViewModel = emptyViewModel();
  private pendingProgram: ProgramStep[] | null = null;

  private readonly sceneSelect: HTMLSelectElement;
  private readonly sessionLabel: HTMLElement;
  private readonly queryInput: HTMLInputElement;
  private readonly failureBox: HTMLElement;
  private readonly clarificationBox: HTMLElement;
  private readonly clarificationText: HTMLElement;
  private readonly feedbackInput: HTMLInputElement;
  private readonly answerBadge: HTMLElement;
  private readonly programList: HTMLElement;
  private readonly stepper: HTMLElement;
  private readonly slider: HTMLInputElement;
  private readonly stepDetail: HTMLElement;
  private readonly transcript: HTMLElement;

  constructor(readonly root: HTMLElement, baseUrl: string) {
    this.api = new ConsoleApi(baseUrl);
    root.innerHTML = LAYOUT;
    const get = <T extends HTMLElement>(id: string) =>
      root.querySelector<T>(`#${id}`) as T;
    this.sceneSelect = get<HTMLSelectElement>("scene-select");
    this.sessionLabel = get("session-label");
    this.queryInput = get<HTMLInputElement>("query-input");
    this.failureBox = get("failure-box");
    this.clarificationBox = get("clarification-box");
    this.clarificationText = get("clarification-text");
    this.feedbackInput = get<HTMLInputElement>("feedback-input");
    this.answerBadge = get("answer-badge");
    this.programList = get("program-list");
    this.stepper = get("stepper");
    this.slider = get<HTMLInputElement>("trace-slider");
    this.stepDetail = get("step-detail");
    this.transcript = get("transcript");
    this.view = new SceneView(get("scene-panel"));

    get("open-session").addEventListener("click", () => {
      void this.openSession(this.sceneSelect.value);
    });
    get("query-form").addEventListener("submit", (e) => {
      e.preventDefault();
      void this.submitQuery(this.queryInput.value);
    });
    get("feedback-form").addEventListener("submit", (e) => {
      e.preventDefault();
      void this.submitFeedback(this.feedbackInput.value);
    });
    this.slider.addEventListener("input", () => {
      this.showStep(Number(this.slider.value));
    });
  }

  /** Populate the scene picker and restore any session named in the hash. */
  async start(): Promise<void> {
    const scenes = await this.api.listScenes();
    this.sceneSelect.textContent = "";
    for (const scene of scenes) {
      const opt = document.createElement("option");
      opt.value = scene.scene_id;
      opt.textContent = `${scene.scene_id} (${scene.objects} objects, ${scene.split})`;
      this.sceneSelect.append(opt);
    }
    const params = new URLSearchParams(location.hash.slice(1));
    const sceneId = params.get("scene");
    const sessionId = params.get("session");
    if (sceneId !== null && sessionId !== null) {
      await this.restore(sceneId, sessionId);
    }
  }

  async openSession(sceneId: string): Promise<void> {
    const sessionId = await this.api.openSession(sceneId);
    this.model = emptyViewModel();
    this.model.sessionId = sessionId;
    this.model.scene = await this.api.getScene(sceneId);
    location.hash = `scene=${sceneId}&session=${sessionId}`;
    this.sessionLabel.textContent = `session ${sessionId} on ${sceneId}`;
    this.view.setScene(this.model.scene);
    this.renderResult();
    this.renderTranscript();
  }

  /** Refresh path: scene and last trace come back from the service. */
  private async restore(sceneId: string, sessionId: string): Promise<void> {
    this.model = emptyViewModel();
    this.model.sessionId = sessionId;
    this.model.scene = await this.api.getScene(sceneId);
    this.sceneSelect.value = sceneId;
    this.sessionLabel.textContent = `session ${sessionId} on ${sceneId}`;
    this.view.setScene(this.model.scene);
    try {
      this.applyTrace(await this.api.trace(sessionId));
      // The trace is the executed program; rebuild the program panel from it.
      this.model.program = this.model.trace!.steps.map((s) =>
        s.concept === undefined ? { op: s.op } : { op: s.op, concept: s.concept },
      );
      this.model.programMarks = this.model.program.map((step) => ({
        step,
        inserted: false,
      }));
    } catch (err) {
      if (!(err instanceof ApiError && err.status === 404)) throw err;
    }
    this.renderResult();
  }

  async submitQuery(text: string): Promise<void> {
    if (this.model.sessionId === null || text.trim() === "") return;
    this.pushTranscript("user", text);
    this.pendingProgram = null;
    let response: QueryResponse;
    try {
      response = await this.api.query(this.model.sessionId, text);
    } catch (err) {
      this.handleRequestError(err);
      return;
    }
    await this.applyResponse(response, null);
  }

  async submitFeedback(text: string): Promise<void> {
    if (this.model.sessionId === null || this.pendingProgram === null) return;
    this.pushTranscript("user", text);
    let response: QueryResponse;
    try {
      response = await this.api.feedback(this.model.sessionId, text);
    } catch (err) {
      this.handleRequestError(err);
      return;
    }
    await this.applyResponse(response, this.pendingProgram);
  }

  /** Render one query/feedback response; `before` is the program under
   * repair so inserted nodes can be marked. */
  private async applyResponse(
    response: QueryResponse,
    before: ProgramStep[] | null,
  ): Promise<void> {
    this.model.program = response.program;
    this.model.programMarks =
      before === null
        ? response.program.map((step) => ({ step, inserted: false }))
        : diffPrograms(before, response.program);
    this.model.answer = response.answer ?? null;
    this.model.failure = response.failure ?? null;
    this.model.clarification = response.clarification ?? null;
    if (response.status === "success") {
      this.pendingProgram = null;
      this.pushTranscript("service", formatAnswer(response.answer!));
    } else {
      this.pushTranscript("service", response.failure!.message);
      if (response.clarification !== undefined) {
        this.pendingProgram = response.program;
        this.pushTranscript("service", response.clarification);
      } else {
        this.pendingProgram = null;
      }
    }
    if (this.model.sessionId !== null) {
      this.applyTrace(await this.api.trace(this.model.sessionId));
    }
    this.renderResult();
  }

  private applyTrace(trace: TraceDoc): void {
    this.model.trace = trace;
    this.model.highlights =
      this.model.scene === null ? [] : buildStepHighlights(trace, this.model.scene);
    this.model.step = clampStep(trace.steps.length - 1, trace.steps.length);
    if (trace.answer !== undefined) this.model.answer = trace.answer;
    if (trace.failure !== undefined) this.model.failure = trace.failure;
  }

  private handleRequestError(err: unknown): void {
    if (err instanceof BusyError) {
      this.pushTranscript("service", err.message);
      return;
    }
    if (err instanceof ApiError) {
      this.model.program = [];
      this.model.programMarks = [];
      this.model.answer = null;
      this.model.trace = null;
      this.model.highlights = [];
      this.model.failure = {
        kind: err.envelope.error,
        step_index: -1,
        message: String(err.envelope.detail),
        payload: {},
      };
      this.model.clarification = null;
      this.pendingProgram = null;
      this.pushTranscript("service", String(err.envelope.detail));
      this.renderResult();
      return;
    }
    throw err;
  }

  private pushTranscript(role: "user" | "service", text: string): void {
    this.model.transcript.push({ role, text });
    this.renderTranscript();
  }

  private renderTranscript(): void {
    this.transcript.textContent = "";
    for (const entry of this.model.transcript) {
      const item = document.createElement("li");
      item.className = `say-${entry.role}`;
      item.textContent = entry.text;
      this.transcript.append(item);
    }
  }

  private renderResult(): void {
    this.programList.textContent = "";
    for (const mark of this.model.programMarks) {
      const item = document.createElement("li");
      item.dataset.op = mark.step.op;
      if (mark.step.concept !== undefined) item.dataset.concept = mark.step.concept;
      if (mark.inserted) item.classList.add("inserted");
      item.textContent = formatStep(mark.step);
      this.programList.append(item);
    }

    if (this.model.answer !== null && this.model.failure === null) {
      this.answerBadge.hidden = false;
      this.answerBadge.textContent = formatAnswer(this.model.answer);
      this.answerBadge.className = `badge badge-${this.model.answer.type}`;
    } else {
      this.answerBadge.hidden = true;
      this.answerBadge.textContent = "";
    }

    if (this.model.failure !== null) {
      this.failureBox.hidden = false;
      this.failureBox.textContent = this.model.failure.message;
    } else {
      this.failureBox.hidden = true;
    }

    const candidates = this.model.failure?.payload.candidates ?? [];
    if (this.model.clarification !== null) {
      this.clarificationBox.hidden = false;
      this.clarificationText.textContent = this.model.clarification;
      this.view.setPulse(candidates);
    } else {
      this.clarificationBox.hidden = true;
      this.view.setPulse([]);
    }

    const trace = this.model.trace;
    if (trace !== null && trace.steps.length > 0) {
      this.stepper.hidden = false;
      this.slider.max = String(trace.steps.length - 1);
      this.slider.value = String(this.model.step);
      this.showStep(this.model.step);
    } else {
      this.stepper.hidden = true;
      this.view.setHighlight([]);
      this.view.setMasks([]);
    }

    if (this.model.answer?.type === "action" && this.model.scene !== null) {
      const act = this.model.answer.value as GraspAction;
      this.view.setPose(act.pose);
      this.stepDetail.textContent += ` - grasp ${describeObject(this.model.scene, act.object_id)}`;
    } else {
      this.view.setPose(null);
    }
  }

  /** Move the trace stepper; highlights and masks follow the chosen step. */
  showStep(index: number): void {
    const trace = this.model.trace;
    if (trace === null || trace.steps.length === 0) return;
    this.model.step = clampStep(index, trace.steps.length);
    this.slider.value = String(this.model.step);
    const step = trace.steps[this.model.step];
    const markers: StepHighlight = this.model.highlights[this.model.step] ?? {
      ids: [],
      masks: [],
    };
    this.view.setHighlight(markers.ids);
    this.view.setMasks(markers.masks);
    this.stepDetail.textContent =
      `step ${this.model.step + 1}/${trace.steps.length}: ` +
      `${formatStep({ op: step.op, concept: step.concept })} ` +
      `→ ${JSON.stringify(step.output)}`;
  }
}

export async function initConsole(root: HTMLElement, baseUrl: string): Promise<Console> {
  const console_ = new Console(root, baseUrl);
  await console_.start();
  return console_;
}
