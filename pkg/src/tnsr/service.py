"""HTTP interface: scene browsing and interactive query/feedback sessions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .concepts import ConceptMemory, load_memory
from .errors import (MalformedSequence, NoNewConcepts, NoTemplateMatch,
                     ProgramSyntaxError, SamplingExhausted, UnknownConcept)
from .executor import (ExecConfig, ExecutionTrace, FailureReport, execute,
                       restructure_with_feedback, trace_to_dict)
from .grounding import OracleGrounder
from .parser import Lexicon, parse_detailed, tag
from .programs import Node, linearize, tokens_to_dicts
from .relations import DATAGEN_THRESHOLDS, RelationThresholds
from .rng import substream
from .scene import SamplerConfig, SceneGraph, parse_scene, sample_scene, scene_to_dict
from .templates import get_grammar

PARSE_ERRORS = (NoTemplateMatch, UnknownConcept, MalformedSequence, ProgramSyntaxError)


@dataclass
class Session:
    session_id: str
    scene_id: str
    pending_program: Node | None = None
    pending_failure: FailureReport | None = None
    last_trace: ExecutionTrace | None = None
    history: list[dict] = field(default_factory=list)


@dataclass
class ServiceState:
    scenes: dict[str, SceneGraph]
    memory: ConceptMemory
    thresholds: RelationThresholds = DATAGEN_THRESHOLDS
    sessions: dict[str, Session] = field(default_factory=dict)
    _ids: itertools.count = field(default_factory=itertools.count)

    def new_session(self, scene_id: str) -> Session:
        sid = f"s{next(self._ids):04d}"
        session = Session(session_id=sid, scene_id=scene_id)
        self.sessions[sid] = session
        return session


def default_scene_bank(count: int = 12, master_seed: int = 0,
                       memory: ConceptMemory | None = None) -> dict[str, SceneGraph]:
    """Deterministic built-in scenes so the service works with no data dir."""
    memory = memory or load_memory()
    scenes: dict[str, SceneGraph] = {}
    index = 0
    while len(scenes) < count and index < count * 10:
        split = "scattered" if index % 2 == 0 else "crowded"
        seed = int(substream(master_seed, 7, index).integers(2 ** 31))
        try:
            scene = sample_scene(SamplerConfig(n_range=(5, 8), split=split), seed, memory)
        except SamplingExhausted:
            index += 1
            continue
        scenes[f"scene_{len(scenes):03d}"] = scene
        index += 1
    return scenes


def load_scene_dir(path: Path, memory: ConceptMemory) -> dict[str, SceneGraph]:
    scenes = {}
    for file in sorted(Path(path).glob("*.json")):
        scenes[file.stem] = parse_scene(file.read_text(), memory)
    return scenes


class SessionBody(BaseModel):
    scene_id: str


class TextBody(BaseModel):
    text: str


def _describe(scene: SceneGraph, object_id: int) -> str:
    obj = scene.object(object_id)
    return f"the {obj.color} {obj.material} {obj.category} (object {object_id})"


def _clarification(failure, scene: SceneGraph) -> str | None:
    cands = failure.payload.get("candidates")
    if not cands:
        return None
    listing = "; ".join(_describe(scene, n) for n in cands)
    return f"Which one do you mean: {listing}?"


def create_app(state: ServiceState | None = None, *, scene_dir: Path | None = None,
               seed: int = 0) -> FastAPI:
    if state is None:
        memory = load_memory()
        if scene_dir is not None:
            scenes = load_scene_dir(scene_dir, memory)
        else:
            scenes = default_scene_bank(master_seed=seed, memory=memory)
        state = ServiceState(scenes=scenes, memory=memory)

    grammar = get_grammar()
    lexicon = Lexicon(state.memory)
    grounder = OracleGrounder(state.memory, state.thresholds)
    config = ExecConfig(thresholds=state.thresholds)
    app = FastAPI(title="tnsr", version="0.1.0")
    app.state.tnsr = state
    # Local single-user tool; the web console may be served from any origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(RequestValidationError)
    async def _bad_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "BadRequest",
                                                      "detail": exc.errors()})

    def _error(status: int, err: Exception) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"error": type(err).__name__, "detail": str(err)})

    def _not_found(what: str, key: str) -> JSONResponse:
        return JSONResponse(status_code=404,
                            content={"error": "NotFound", "detail": f"unknown {what} '{key}'"})

    def _run(session: Session, program: Node, question: str, scene: SceneGraph) -> dict:
        trace = execute(program, scene, grounder, config, state.memory)
        session.last_trace = trace
        body: dict = {
            "session_id": session.session_id,
            "question": question,
            "program": tokens_to_dicts(linearize(program)),
            "status": trace.status,
        }
        if trace.status == "success":
            session.pending_program = None
            session.pending_failure = None
            body["answer"] = trace_to_dict(trace)["answer"]
        else:
            body["failure"] = trace_to_dict(trace)["failure"]
            ask = _clarification(trace.failure, scene)
            if trace.failure.kind == "IllPosed" and ask is not None:
                session.pending_program = program
                session.pending_failure = trace.failure
                body["clarification"] = ask
            else:
                session.pending_program = None
                session.pending_failure = None
        session.history.append({"question": question, "status": trace.status})
        return body

    @app.get("/health")
    def health():
        return {"status": "ok", "scenes": len(state.scenes)}

    @app.get("/scenes")
    def list_scenes():
        items = [{"scene_id": sid, "objects": len(s.objects), "split": s.split_tag}
                 for sid, s in sorted(state.scenes.items())]
        return {"scenes": items}

    @app.get("/scenes/{scene_id}")
    def get_scene(scene_id: str):
        scene = state.scenes.get(scene_id)
        if scene is None:
            return _not_found("scene", scene_id)
        doc = scene_to_dict(scene)
        doc["scene_id"] = scene_id
        return doc

    @app.post("/sessions", status_code=201)
    def open_session(body: SessionBody):
        if body.scene_id not in state.scenes:
            return _not_found("scene", body.scene_id)
        session = state.new_session(body.scene_id)
        return {"session_id": session.session_id, "scene_id": session.scene_id}

    @app.post("/sessions/{session_id}/query")
    def query(session_id: str, body: TextBody):
        session = state.sessions.get(session_id)
        if session is None:
            return _not_found("session", session_id)
        scene = state.scenes[session.scene_id]
        try:
            result = parse_detailed(body.text, lexicon, grammar)
        except PARSE_ERRORS as err:
            return _error(422, err)
        out = _run(session, result.program, body.text, scene)
        out["template_id"] = result.template_id
        return out

    @app.post("/sessions/{session_id}/feedback")
    def feedback(session_id: str, body: TextBody):
        session = state.sessions.get(session_id)
        if session is None:
            return _not_found("session", session_id)
        if session.pending_program is None or session.pending_failure is None:
            return JSONResponse(status_code=409, content={
                "error": "NoPendingClarification",
                "detail": "feedback is only accepted after a clarification request"})
        scene = state.scenes[session.scene_id]

        def tagger(text, _memory):
            return tag(text, lexicon)

        try:
            repaired = restructure_with_feedback(session.pending_program,
                                                 session.pending_failure,
                                                 body.text, state.memory, tagger)
        except NoNewConcepts as err:
            return _error(422, err)
        return _run(session, repaired, body.text, scene)

    @app.get("/sessions/{session_id}/trace")
    def last_trace(session_id: str):
        session = state.sessions.get(session_id)
        if session is None:
            return _not_found("session", session_id)
        if session.last_trace is None:
            return _not_found("trace for session", session_id)
        doc = trace_to_dict(session.last_trace)
        doc["session_id"] = session_id
        return doc

    return app
