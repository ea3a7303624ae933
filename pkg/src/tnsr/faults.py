"""Controlled fault injection for exercising the failure taxonomy.

Three injectors mirror the three failure stages: corrupting the program
(reasoning), randomly flipping grounding scores (perception), and moving
the target object between planning and execution (grasping). Each injector
resamples until the fault actually manifests as an observable difference,
so a classification benchmark never contains silent no-op faults.
"""
from __future__ import annotations

from dataclasses import dataclass

from .concepts import ConceptMemory, load_memory
from .executor import (ExecConfig, ExecutionTrace, GroundTruth, classify_failure,
                       execute)
from .grounding import Grounder, OracleGrounder
from .programs import Node, delinearize, linearize, SIGNATURES
from .relations import DATAGEN_THRESHOLDS, RelationThresholds
from .rng import substream
from .scene import SceneGraph, displace_object

FAULT_KINDS = ("Reasoning", "Perception", "Grasping")


@dataclass
class FaultCase:
    kind: str                  # injected ground-truth label
    scene: SceneGraph
    annotated: Node            # what should have run
    trace: ExecutionTrace      # what actually ran
    truth: GroundTruth
    meta: dict

    @property
    def predicted(self) -> str | None:
        return classify_failure(self.trace, self.truth)


class FlippingGrounder(Grounder):
    """Wraps a grounder and flips each distinct score with fixed probability.

    Decisions are memoized per query key, so one faulty run stays
    self-consistent across steps and replays.
    """

    def __init__(self, base: Grounder, rng, rate: float = 0.1):
        self.base = base
        self.rng = rng
        self.rate = rate
        self._memo: dict = {}
        self.flips = 0

    def _decide(self, key: tuple) -> bool:
        if key not in self._memo:
            flip = bool(self.rng.random() < self.rate)
            self._memo[key] = flip
            if flip:
                self.flips += 1
        return self._memo[key]

    def attr_score(self, scene, n, attr, concept) -> float:
        s = self.base.attr_score(scene, n, attr, concept)
        return 1.0 - s if self._decide(("a", n, attr, concept)) else s

    def rel_score(self, scene, n, m, relation) -> float:
        s = self.base.rel_score(scene, n, m, relation)
        return 1.0 - s if self._decide(("r", n, m, relation)) else s

    def hyper_score(self, scene, n, m1, m2, relation) -> float:
        s = self.base.hyper_score(scene, n, m1, m2, relation)
        return 1.0 - s if self._decide(("h", n, m1, m2, relation)) else s


# ---------------------------------------------------------------------------
# injectors


def _truth(program: Node, scene: SceneGraph, memory: ConceptMemory,
           config: ExecConfig) -> GroundTruth:
    return GroundTruth(program=program, scene=scene, memory=memory, config=config)


def corrupt_program(program: Node, memory: ConceptMemory, rng) -> Node | None:
    """One structural mutation: a different concept value or filter kind."""
    tokens = linearize(program)
    slots = [i for i, (op, c) in enumerate(tokens) if c is not None]
    if not slots:
        return None
    pos = slots[int(rng.integers(len(slots)))]
    op, concept = tokens[pos]
    kind = SIGNATURES[op].concept_kind
    if op.startswith("filter_") and kind in ("category", "color", "material") \
            and rng.random() < 0.3:
        # swap the filter attribute, drawing a value of the new kind
        others = [k for k in ("category", "color", "material") if k != kind]
        new_kind = others[int(rng.integers(len(others)))]
        pool = memory.values[new_kind]
        tokens[pos] = (f"filter_{new_kind}", pool[int(rng.integers(len(pool)))])
    else:
        pool = [v for v in memory.values[kind] if v != concept]
        if not pool:
            return None
        tokens[pos] = (op, pool[int(rng.integers(len(pool)))])
    return delinearize(tokens)


def inject_reasoning(program: Node, scene: SceneGraph, memory: ConceptMemory,
                     config: ExecConfig, rng) -> FaultCase | None:
    for _ in range(10):
        mutated = corrupt_program(program, memory, rng)
        if mutated is None or linearize(mutated) == linearize(program):
            continue
        trace = execute(mutated, scene, OracleGrounder(memory, config.thresholds),
                        config, memory)
        return FaultCase("Reasoning", scene, program, trace,
                         _truth(program, scene, memory, config),
                         {"mutated": linearize(mutated)})
    return None


def inject_perception(program: Node, scene: SceneGraph, memory: ConceptMemory,
                      config: ExecConfig, rng, rate: float = 0.1) -> FaultCase | None:
    oracle = OracleGrounder(memory, config.thresholds)
    reference = execute(program, scene, oracle, config, memory)
    for _ in range(25):
        flipper = FlippingGrounder(oracle, rng, rate)
        trace = execute(program, scene, flipper, config, memory)
        if flipper.flips == 0:
            continue
        if _same_outcome(trace, reference):
            continue  # the flips never manifested; resample
        return FaultCase("Perception", scene, program, trace,
                         _truth(program, scene, memory, config),
                         {"flips": flipper.flips})
    return None


def _same_outcome(a: ExecutionTrace, b: ExecutionTrace) -> bool:
    if a.status != b.status:
        return False
    if a.status == "success":
        return a.answer == b.answer
    return (a.failure.kind, a.failure.step_index) == (b.failure.kind, b.failure.step_index)


def inject_grasping(program: Node, scene: SceneGraph, memory: ConceptMemory,
                    config: ExecConfig, rng, epsilon: float = 0.001) -> FaultCase | None:
    """The grasp target drifts on every scene refresh, starving the replays.

    The drift is tiny so spatial predicates keep their truth values and the
    failure is attributable to acting, not perceiving.
    """
    oracle = OracleGrounder(memory, config.thresholds)
    reference = execute(program, scene, oracle, config, memory)
    if reference.status != "success" or reference.answer.kind != "action" \
            or reference.answer.value.get("kind") != "grasp":
        return None
    target = reference.answer.value["object_id"]

    for _ in range(10):
        state = {"tick": 0}
        sx = float(rng.uniform(-epsilon, epsilon))
        sy = float(rng.uniform(-epsilon, epsilon))

        def refresh():
            state["tick"] += 1
            return displace_object(scene, target,
                                   (sx * state["tick"], sy * state["tick"], 0.0))

        faulty_cfg = ExecConfig(gamma=config.gamma, score_floor=config.score_floor,
                                thresholds=config.thresholds, scene_refresh=refresh,
                                max_replays=config.max_replays, batched=config.batched)
        trace = execute(program, scene, oracle, faulty_cfg, memory)
        if trace.status != "failure" or trace.failure.kind != "Grasping":
            continue
        truth = _truth(program, scene, memory, config)
        if classify_failure(trace, truth) == "Perception":
            continue  # drift flipped a predicate; resample a smaller path
        return FaultCase("Grasping", scene, program, trace, truth,
                         {"target": target, "drift": [sx, sy]})
    return None


# ---------------------------------------------------------------------------
# benchmark assembly


def build_fault_suite(pairs, memory: ConceptMemory | None = None,
                      thresholds: RelationThresholds = DATAGEN_THRESHOLDS,
                      per_kind: int = 100, master_seed: int = 0) -> list[FaultCase]:
    """Interleave the three injectors over (program, scene) pairs.

    `pairs` is a sequence of (Node, SceneGraph); grasp faults are only
    attempted on programs that emit a grasp, so supply a mix.
    """
    memory = memory or load_memory()
    config = ExecConfig(thresholds=thresholds)
    cases: list[FaultCase] = []
    counts = {k: 0 for k in FAULT_KINDS}
    injectors = {"Reasoning": inject_reasoning, "Perception": inject_perception,
                 "Grasping": inject_grasping}
    for kind in FAULT_KINDS:
        rng = substream(master_seed, 5, FAULT_KINDS.index(kind))
        for i, (program, scene) in enumerate(pairs):
            if counts[kind] >= per_kind:
                break
            case = injectors[kind](program, scene, memory, config, rng)
            if case is not None:
                cases.append(case)
                counts[kind] += 1
    return cases


def score_fault_suite(cases) -> dict:
    total = len(cases)
    correct = sum(1 for c in cases if c.predicted == c.kind)
    by_kind: dict[str, dict] = {}
    for kind in FAULT_KINDS:
        sub = [c for c in cases if c.kind == kind]
        if sub:
            by_kind[kind] = {
                "total": len(sub),
                "correct": sum(1 for c in sub if c.predicted == c.kind),
            }
    return {"total": total, "correct": correct,
            "accuracy": correct / total if total else 0.0, "by_kind": by_kind}
