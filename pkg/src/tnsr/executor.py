"""Step-by-step program execution with interpretable traces.

Programs run over a scene through a Grounder. Every linear token becomes
one trace step recording typed inputs, output, and (for object outputs) a
footprint mask, so a failed run points at the exact step that went wrong.
Failures carry a kind from the taxonomy {Perception, Reasoning, Grasping,
IllPosed} plus a human-readable message the dialogue layer can surface.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable

from .concepts import ConceptMemory, load_memory
from .errors import NoNewConcepts, UnknownConcept
from .grounding import Grounder, MemoGrounder, OracleGrounder
from .programs import (ACTION_PRIMITIVES, SIGNATURES, Node, describe_chain,
                       linearize, tokens_to_dicts, typecheck)
from .relations import DEFAULT_THRESHOLDS, DIRECTIONAL, RelationThresholds
from .scene import EDGE_PAD, SceneGraph, q9

PLACE_CLEARANCE = 0.02

FAILURE_KINDS = ("Perception", "Reasoning", "Grasping", "IllPosed")

_GROUNDING_OPS = tuple(
    op for op in SIGNATURES
    if op.startswith(("filter_", "query_", "same_")) or op in ("relate", "locate", "hyper_relate")
)


@dataclass(frozen=True)
class ExecValue:
    kind: str  # objects | object | int | bool | concept | action
    value: Any

    def render(self):
        if self.kind == "objects":
            return sorted(self.value)
        return self.value


@dataclass
class TraceStep:
    index: int
    op: str
    concept: str | None
    inputs: list[ExecValue]
    output: ExecValue
    masks: list[dict] | None = None


@dataclass
class FailureReport:
    kind: str
    step_index: int
    message: str
    payload: dict = field(default_factory=dict)


@dataclass
class ExecutionTrace:
    program: list[tuple[str, str | None]]
    steps: list[TraceStep]
    status: str  # success | failure
    answer: ExecValue | None = None
    failure: FailureReport | None = None
    replays: int = 0


@dataclass(frozen=True)
class ExecConfig:
    gamma: float = 0.05          # filter keeps scores within gamma of the max
    score_floor: float = 0.5     # and above this absolute floor
    thresholds: RelationThresholds = DEFAULT_THRESHOLDS
    scene_refresh: Callable[[], SceneGraph] | None = None
    max_replays: int = 3
    batched: bool = False        # memoize grounder scores for the run


DEFAULT_CONFIG = ExecConfig()


class _Halt(Exception):
    def __init__(self, report: FailureReport):
        self.report = report


def _mask(scene: SceneGraph, ids) -> list[dict]:
    out = []
    for i in sorted(ids):
        x0, y0, x1, y1 = scene.object(i).box.footprint()
        out.append({"id": i, "footprint": [q9(x0), q9(y0), q9(x1), q9(y1)]})
    return out


def execute(program: Node, scene: SceneGraph, grounder: Grounder | None = None,
            config: ExecConfig = DEFAULT_CONFIG, memory: ConceptMemory | None = None) -> ExecutionTrace:
    """Run a program over a scene; never raises on well-formed inputs."""
    memory = memory or load_memory()
    grounder = grounder or OracleGrounder(memory, config.thresholds)
    tokens = linearize(program)

    report = typecheck(program, memory)
    if not report.ok:
        failure = FailureReport("Reasoning", 0, "program is not type-correct",
                                {"errors": report.errors})
        return ExecutionTrace(tokens, [], "failure", failure=failure)

    replays = 0
    while True:
        trace, stale = _execute_once(tokens, scene, grounder, config, memory)
        trace.replays = replays
        if stale is None:
            return trace
        replays += 1
        if replays > config.max_replays:
            failure = FailureReport("Grasping", len(trace.steps),
                                    "object state kept changing during grasping", {})
            return ExecutionTrace(tokens, trace.steps, "failure", failure=failure, replays=replays)
        scene = stale


def _execute_once(tokens, scene: SceneGraph, grounder: Grounder, config: ExecConfig,
                  memory: ConceptMemory):
    g = MemoGrounder(grounder) if config.batched else grounder
    steps: list[TraceStep] = []
    stack: list[ExecValue] = []
    cur: ExecValue | None = None
    nodes = _linear_nodes(tokens)

    try:
        for i, (op, concept) in enumerate(tokens):
            if op == "scene":
                if cur is not None:
                    stack.append(cur)
                inputs: list[ExecValue] = []
                out = ExecValue("objects", frozenset(scene.ids()))
            else:
                sig = SIGNATURES[op]
                if sig.arity == 1:
                    inputs = [cur]
                else:
                    inputs = [stack.pop(), cur]
                if op == "grasp" and config.scene_refresh is not None:
                    target = inputs[0].value
                    fresh = config.scene_refresh()
                    if _object_state_changed(scene, fresh, target):
                        return ExecutionTrace(list(tokens), steps, "failure"), fresh
                out = _apply(op, concept, inputs, scene, g, config, memory, i, nodes)
            masks = None
            if out.kind == "objects":
                masks = _mask(scene, out.value)
            elif out.kind == "object":
                masks = _mask(scene, [out.value])
            steps.append(TraceStep(i, op, concept, inputs, out, masks))
            cur = out
        return ExecutionTrace(list(tokens), steps, "success", answer=cur), None
    except _Halt as halt:
        return ExecutionTrace(list(tokens), steps, "failure", failure=halt.report), None
    except UnknownConcept as e:
        failure = FailureReport("Reasoning", len(steps), str(e), {"phrase": e.phrase})
        return ExecutionTrace(list(tokens), steps, "failure", failure=failure), None


def _object_state_changed(scene: SceneGraph, fresh: SceneGraph, target: int) -> bool:
    if target >= len(fresh.objects):
        return True
    return fresh.objects[target] != scene.objects[target]


def _linear_nodes(tokens) -> list[Node]:
    """Rebuild tree nodes aligned with token indices (for chain description)."""
    from .programs import delinearize

    try:
        root = delinearize(tokens)
    except Exception:
        return []
    return list(root.walk())


def _chain_desc(nodes: list[Node], index: int) -> str:
    if 0 <= index < len(nodes):
        return describe_chain(nodes[index])
    return "object"


def _apply(op: str, concept: str | None, inputs: list[ExecValue], scene: SceneGraph,
           g: Grounder, config: ExecConfig, memory: ConceptMemory, index: int,
           nodes: list[Node]) -> ExecValue:
    if op.startswith("filter_"):
        attr = op.removeprefix("filter_")
        return ExecValue("objects", _filter(inputs[0].value, attr, concept, scene, g, config))
    if op.startswith("query_"):
        attr = op.removeprefix("query_")
        return ExecValue("concept", _query(inputs[0].value, attr, scene, g, memory))
    if op.startswith("same_"):
        attr = op.removeprefix("same_")
        anchor = inputs[0].value
        value = _query(anchor, attr, scene, g, memory)
        others = frozenset(n for n in scene.ids() if n != anchor)
        return ExecValue("objects", _filter(others, attr, value, scene, g, config))

    if op == "unique":
        members = sorted(inputs[0].value)
        desc = _chain_desc(nodes, index)
        if len(members) == 1:
            return ExecValue("object", members[0])
        if not members:
            raise _Halt(FailureReport(
                "IllPosed", index, f"There is no {desc} in the scene.",
                {"candidates": [], "description": desc}))
        raise _Halt(FailureReport(
            "IllPosed", index,
            f"There are {len(members)} objects matching '{desc}'. Which one do you mean?",
            {"candidates": members, "description": desc}))

    if op == "relate":
        anchor = inputs[0].value
        hits = frozenset(n for n in scene.ids() if n != anchor
                         and g.rel_score(scene, n, anchor, concept) >= 0.5)
        return ExecValue("objects", hits)

    if op == "locate":
        members = sorted(inputs[0].value)
        if not members:
            desc = _chain_desc(nodes, index)
            raise _Halt(FailureReport(
                "IllPosed", index, f"There is no {desc} in the scene.",
                {"candidates": [], "description": desc}))
        best = max(members, key=lambda n: (sum(g.rel_score(scene, n, m, concept)
                                               for m in members if m != n), -n))
        return ExecValue("object", best)

    if op == "hyper_relate":
        m1, m2 = inputs[0].value, inputs[1].value
        if m1 == m2:
            raise _Halt(FailureReport(
                "IllPosed", index,
                "both comparison anchors resolve to the same object", {"anchor": m1}))
        hits = frozenset(n for n in scene.ids() if n not in (m1, m2)
                         and g.hyper_score(scene, n, m1, m2, concept) >= 0.5)
        return ExecValue("objects", hits)

    if op == "and":
        return ExecValue("objects", inputs[0].value & inputs[1].value)
    if op == "or":
        return ExecValue("objects", inputs[0].value | inputs[1].value)
    if op == "exist":
        return ExecValue("bool", len(inputs[0].value) > 0)
    if op == "count":
        return ExecValue("int", len(inputs[0].value))
    if op == "equal_integer":
        return ExecValue("bool", inputs[0].value == inputs[1].value)
    if op == "greater":
        return ExecValue("bool", inputs[0].value > inputs[1].value)
    if op == "less":
        return ExecValue("bool", inputs[0].value < inputs[1].value)
    if op in ("equal_category", "equal_color", "equal_material"):
        return ExecValue("bool", inputs[0].value == inputs[1].value)

    if op == "grasp":
        target = inputs[0].value
        pose = scene.object(target).grasp
        cmd = {"kind": "grasp", "object_id": target,
               "pose": {"u": q9(pose.u), "v": q9(pose.v), "phi": q9(pose.phi),
                        "omega": q9(pose.omega), "q": q9(pose.q)}}
        return ExecValue("action", cmd)

    if op == "pick_and_place":
        return ExecValue("action", _pick_and_place(inputs[0].value, inputs[1].value,
                                                   concept, scene, index))
    if op == "sort":
        return ExecValue("action", _sort(inputs[0].value, inputs[1].value, scene, index))

    raise _Halt(FailureReport("Reasoning", index, f"unknown primitive {op!r}", {}))


def _filter(members: frozenset, attr: str, concept: str, scene: SceneGraph,
            g: Grounder, config: ExecConfig) -> frozenset:
    if not members:
        return frozenset()
    scores = {n: g.attr_score(scene, n, attr, concept) for n in members}
    mx = max(scores.values())
    return frozenset(n for n, s in scores.items()
                     if s >= mx - config.gamma and s >= config.score_floor)


def _query(n: int, attr: str, scene: SceneGraph, g: Grounder, memory: ConceptMemory) -> str:
    best_value, best_score = None, -1.0
    for value in memory.values[attr]:
        s = g.attr_score(scene, n, attr, value)
        if s > best_score:
            best_value, best_score = value, s
    return best_value


def _pick_and_place(pick: int, ref: int, relation: str, scene: SceneGraph, index: int) -> dict:
    if relation not in DIRECTIONAL:
        raise _Halt(FailureReport(
            "IllPosed", index, f"'{relation}' does not describe a placement direction.", {}))
    if pick == ref:
        raise _Halt(FailureReport(
            "IllPosed", index, "cannot place an object relative to itself.", {}))
    pick_box = scene.object(pick).box
    ref_box = scene.object(ref).box
    axis, sign = DIRECTIONAL[relation]
    signs = (sign, -sign) if relation == "next" else (sign,)
    for s in signs:
        center = list(ref_box.center)
        center[axis] = ref_box.center[axis] + s * (
            ref_box.extents[axis] / 2 + pick_box.extents[axis] / 2 + PLACE_CLEARANCE)
        center[2] = pick_box.extents[2] / 2
        for a in (0, 1):
            lo = pick_box.extents[a] / 2 + EDGE_PAD
            hi = 1.0 - pick_box.extents[a] / 2 - EDGE_PAD
            center[a] = min(max(center[a], lo), hi)
        if _separated(center, pick_box.extents, ref_box):
            return {"kind": "pick_and_place", "pick_id": pick, "ref_id": ref,
                    "relation": relation,
                    "place": {"x": q9(center[0]), "y": q9(center[1]), "z": q9(center[2])}}
    raise _Halt(FailureReport(
        "Grasping", index,
        f"no free space to place the object {relation.replace('_', ' ')} the reference.",
        {"pick_id": pick, "ref_id": ref}))


def _separated(center, extents, other) -> bool:
    for a in (0, 1):
        lo, hi = center[a] - extents[a] / 2, center[a] + extents[a] / 2
        olo, ohi = other.interval(a)
        if hi <= olo + 1e-12 or ohi <= lo + 1e-12:
            return True
    return False


def _sort(members: frozenset, container: int, scene: SceneGraph, index: int) -> dict:
    ids = sorted(n for n in members if n != container)
    if not ids:
        raise _Halt(FailureReport("IllPosed", index, "there is nothing to sort.", {}))
    cbox = scene.object(container).box
    x0, y0, x1, y1 = cbox.footprint()
    cols = math.ceil(math.sqrt(len(ids)))
    rows = math.ceil(len(ids) / cols)
    places = []
    top = cbox.center[2] + cbox.extents[2] / 2
    for i, oid in enumerate(ids):
        r, c = divmod(i, cols)
        x = x0 + (c + 0.5) * (x1 - x0) / cols
        y = y0 + (r + 0.5) * (y1 - y0) / rows
        z = min(top + scene.object(oid).box.extents[2] / 2, 1.0)
        places.append([q9(x), q9(y), q9(z)])
    return {"kind": "sort", "object_ids": ids, "container_id": container, "places": places}


# ---------------------------------------------------------------------------
# action validation (simulated placement check)


def validate_action(command: dict, scene: SceneGraph) -> tuple[bool, str]:
    """Check an emitted action against the scene geometry."""
    kind = command.get("kind")
    if kind == "grasp":
        obj = scene.object(command["object_id"])
        pose = command["pose"]
        if not obj.box.contains_xy(pose["u"], pose["v"]):
            return False, "grasp point lies outside the target footprint"
        if pose["omega"] <= 0:
            return False, "grasp opening must be positive"
        return True, "ok"
    if kind == "pick_and_place":
        pick_box = scene.object(command["pick_id"]).box
        ref_box = scene.object(command["ref_id"]).box
        place = command["place"]
        center = (place["x"], place["y"], place["z"])
        for a in (0, 1):
            if center[a] - pick_box.extents[a] / 2 < -1e-9 or center[a] + pick_box.extents[a] / 2 > 1 + 1e-9:
                return False, "placement leaves the workspace"
        if not _separated(center, pick_box.extents, ref_box):
            return False, "placement collides with the reference object"
        return True, "ok"
    if kind == "sort":
        cbox = scene.object(command["container_id"]).box
        x0, y0, x1, y1 = cbox.footprint()
        for place in command["places"]:
            if not (x0 - 1e-9 <= place[0] <= x1 + 1e-9 and y0 - 1e-9 <= place[1] <= y1 + 1e-9):
                return False, "a sort placement lies outside the container footprint"
        return True, "ok"
    return False, f"unknown action kind {kind!r}"


# ---------------------------------------------------------------------------
# failure taxonomy


@dataclass
class GroundTruth:
    """What a trial was supposed to do, for post-hoc failure diagnosis."""

    program: Node
    scene: SceneGraph
    memory: ConceptMemory | None = None
    config: ExecConfig = DEFAULT_CONFIG


def classify_failure(trace: ExecutionTrace, truth: GroundTruth | None = None) -> str | None:
    """Bucket a finished trace into the failure taxonomy.

    Reasoning: the executed program differs from the annotated one.
    Perception: programs agree but a grounding step's output diverges from
        the oracle's on the same scene.
    Grasping: an action command was emitted (or placement failed) with
        correct program and grounding.
    IllPosed: a unique/locate violation with everything else correct.
    """
    if truth is None:
        return trace.failure.kind if trace.failure else None

    if list(trace.program) != linearize(truth.program):
        return "Reasoning"

    memory = truth.memory or load_memory()
    oracle = OracleGrounder(memory, truth.config.thresholds)
    oracle_trace = execute(truth.program, truth.scene, oracle, truth.config, memory)
    for mine, ref in zip(trace.steps, oracle_trace.steps):
        if mine.op in _GROUNDING_OPS and mine.output != ref.output:
            return "Perception"

    if trace.failure is not None and trace.failure.kind == "Grasping":
        return "Grasping"
    if trace.status == "success" and trace.answer.kind == "action":
        ok, _ = validate_action(trace.answer.value, truth.scene)
        if not ok:
            return "Grasping"
    if trace.failure is not None and trace.failure.kind == "IllPosed":
        return "IllPosed"
    return trace.failure.kind if trace.failure else None


# ---------------------------------------------------------------------------
# dialogue-driven repair


def restructure_with_feedback(program: Node, failure: FailureReport, feedback_text: str,
                              memory: ConceptMemory, tagger) -> Node:
    """Refine a program that died at a unique/locate step using feedback.

    New attribute concepts become filters below the failing step; a location
    word turns the failing unique into a locate; a relation word with a
    resolvable anchor referent intersects the candidates with a relate set.
    Raises NoNewConcepts when the feedback adds nothing usable.
    """
    repaired = program.copy()
    nodes = list(repaired.walk())
    if not 0 <= failure.step_index < len(nodes):
        raise NoNewConcepts(feedback_text)
    failing = nodes[failure.step_index]
    if failing.op not in ("unique", "locate"):
        raise NoNewConcepts(feedback_text)

    tagged = tagger(feedback_text, memory)
    spans = [(s.kind, s.value, s.start) for s in tagged.spans]
    if not spans:
        raise NoNewConcepts(feedback_text)

    present = {(SIGNATURES[n.op].concept_kind, n.concept)
               for n in failing.walk() if n.concept is not None}

    rel_span = next(((v, pos) for k, v, pos in spans if k == "relation"), None)
    attrs = [(k, v, pos) for k, v, pos in spans if k in ("category", "color", "material", "instance")]
    locs = [v for k, v, pos in spans if k == "location"]

    target_attrs, anchor_attrs = [], []
    for k, v, pos in attrs:
        if rel_span is not None and pos > rel_span[1]:
            anchor_attrs.append((k, v))
        else:
            target_attrs.append((k, v))

    changed = False
    child = failing.children[0]
    for kind, value in target_attrs:
        if (kind, value) in present:
            continue
        child = Node(f"filter_{kind}", value, [child])
        changed = True

    if rel_span is not None and anchor_attrs:
        relation = rel_span[0]
        anchor: Node = Node("scene")
        for kind, value in anchor_attrs:
            anchor = Node(f"filter_{kind}", value, [anchor])
        relate_set = Node("relate", relation, [Node("unique", None, [anchor])])
        child = Node("and", None, [child, relate_set])
        changed = True

    failing.children[0] = child
    if locs and failing.op == "unique":
        failing.op = "locate"
        failing.concept = locs[0]
        changed = True
    elif locs and failing.op == "locate" and failing.concept != locs[0]:
        failing.concept = locs[0]
        changed = True

    if not changed:
        raise NoNewConcepts(feedback_text)
    report = typecheck(repaired, memory)
    if not report.ok:
        raise NoNewConcepts(feedback_text)
    return repaired


# ---------------------------------------------------------------------------
# trace serialization (canonical bytes)


def exec_value_to_dict(value: ExecValue) -> dict:
    return {"type": value.kind, "value": value.render()}


def trace_to_dict(trace: ExecutionTrace) -> dict:
    doc: dict[str, Any] = {
        "program": tokens_to_dicts(trace.program),
        "status": trace.status,
        "steps": [],
    }
    for step in trace.steps:
        rec: dict[str, Any] = {"index": step.index, "op": step.op}
        if step.concept is not None:
            rec["concept"] = step.concept
        rec["inputs"] = [exec_value_to_dict(v) for v in step.inputs]
        rec["output"] = exec_value_to_dict(step.output)
        if step.masks is not None:
            rec["masks"] = step.masks
        doc["steps"].append(rec)
    if trace.answer is not None:
        doc["answer"] = exec_value_to_dict(trace.answer)
    if trace.failure is not None:
        doc["failure"] = {
            "kind": trace.failure.kind,
            "step_index": trace.failure.step_index,
            "message": trace.failure.message,
            "payload": trace.failure.payload,
        }
    if trace.replays:
        doc["replays"] = trace.replays
    return doc


def serialize_trace(trace: ExecutionTrace) -> str:
    return json.dumps(trace_to_dict(trace), separators=(",", ":"), sort_keys=False) + "\n"
