/** Payload shapes of the reasoning service HTTP API, as documented in docs/api.md. */

export interface SceneListing {
  scene_id: string;
  objects: number;
  split: string;
}

export interface Box {
  center: [number, number, number];
  extents: [number, number, number];
}

export interface GraspPose {
  u: number;
  v: number;
  phi: number;
  omega: number;
  q: number;
}

export interface SceneObject {
  id: number;
  category: string;
  color: string;
  material: string;
  supercategory: string;
  instance_name?: string;
  box: Box;
  grasp: GraspPose;
}

export interface Workspace {
  w: number;
  d: number;
  h: number;
}

export interface SceneDoc {
  scene_id: string;
  seed: number;
  split_tag: string;
  workspace: Workspace;
  objects: SceneObject[];
}

export interface ProgramStep {
  op: string;
  concept?: string;
}

export interface AnswerDoc {
  type: string;
  value: unknown;
}

export interface GraspAction {
  kind: string;
  object_id: number;
  pose: GraspPose;
}

export interface FailureDoc {
  kind: string;
  step_index: number;
  message: string;
  payload: { candidates?: number[]; description?: string };
}

export interface QueryResponse {
  session_id: string;
  question: string;
  program: ProgramStep[];
  status: "success" | "failure";
  template_id?: string;
  answer?: AnswerDoc;
  failure?: FailureDoc;
  clarification?: string;
}

export interface StepMask {
  id: number;
  footprint: [number, number, number, number];
}

export interface TraceStep {
  index: number;
  op: string;
  concept?: string;
  inputs: number[];
  output: AnswerDoc;
  masks: StepMask[] | null;
}

export interface TraceDoc {
  session_id: string;
  status: "success" | "failure";
  steps: TraceStep[];
  answer?: AnswerDoc;
  failure?: FailureDoc;
}

export interface ErrorEnvelope {
  error: string;
  detail: unknown;
}
