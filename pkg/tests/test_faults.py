"""Fault injection tests: each injector must produce a fault that the
classifier attributes back to the injected stage."""
import pytest

from tnsr.executor import ExecConfig, execute
from tnsr.faults import (FAULT_KINDS, FlippingGrounder, build_fault_suite,
                         corrupt_program, inject_grasping, inject_perception,
                         inject_reasoning, score_fault_suite)
from tnsr.grounding import OracleGrounder
from tnsr.parser import parse
from tnsr.programs import Node, linearize, typecheck
from tnsr.rng import substream


@pytest.fixture()
def config(thresholds):
    return ExecConfig(thresholds=thresholds)


@pytest.fixture()
def oracle(memory, thresholds):
    return OracleGrounder(memory, thresholds)


class TestFlippingGrounder:
    def test_rate_zero_is_transparent(self, hand_scene, oracle):
        flipper = FlippingGrounder(oracle, substream(0, 0), rate=0.0)
        for n in hand_scene.ids():
            assert flipper.attr_score(hand_scene, n, "color", "red") == \
                oracle.attr_score(hand_scene, n, "color", "red")
        assert flipper.flips == 0

    def test_rate_one_inverts_every_score(self, hand_scene, oracle):
        flipper = FlippingGrounder(oracle, substream(0, 1), rate=1.0)
        for n in hand_scene.ids():
            base = oracle.attr_score(hand_scene, n, "category", "mug")
            assert flipper.attr_score(hand_scene, n, "category", "mug") == 1.0 - base
        assert flipper.flips == len(hand_scene.ids())

    def test_decisions_memoized_per_key(self, hand_scene, oracle):
        flipper = FlippingGrounder(oracle, substream(0, 2), rate=0.5)
        first = [flipper.rel_score(hand_scene, 0, 1, "left") for _ in range(5)]
        assert len(set(first)) == 1
        # repeated queries on one key count as a single flip decision
        assert flipper.flips <= 1

    def test_distinct_keys_decided_independently(self, hand_scene, oracle):
        flipper = FlippingGrounder(oracle, substream(0, 3), rate=1.0)
        flipper.attr_score(hand_scene, 0, "color", "red")
        flipper.rel_score(hand_scene, 0, 1, "left")
        flipper.hyper_score(hand_scene, 0, 1, 2, "closer_than")
        assert flipper.flips == 3


class TestCorruptProgram:
    def test_mutation_always_differs(self, memory):
        program = parse("how many red mugs are there?", memory)
        for i in range(20):
            mutated = corrupt_program(program, memory, substream(3, i))
            assert mutated is not None
            assert linearize(mutated) != linearize(program)

    def test_mutation_stays_well_typed(self, memory):
        program = parse("grasp the mug to the left of the bowl.", memory)
        for i in range(20):
            mutated = corrupt_program(program, memory, substream(4, i))
            assert typecheck(mutated, memory).ok

    def test_no_concept_slots_returns_none(self, memory):
        bare = Node("count", None, [Node("scene", None, [])])
        assert corrupt_program(bare, memory, substream(5, 0)) is None


class TestInjectors:
    def test_reasoning_fault_classified_as_reasoning(self, hand_scene, memory,
                                                     config):
        program = parse("how many red mugs are there?", memory)
        case = inject_reasoning(program, hand_scene, memory, config,
                                substream(1, 0))
        assert case is not None
        assert case.kind == "Reasoning"
        assert case.predicted == "Reasoning"
        assert case.meta["mutated"] != linearize(program)

    def test_perception_fault_classified_as_perception(self, hand_scene,
                                                       memory, config):
        program = parse("how many red mugs are there?", memory)
        case = inject_perception(program, hand_scene, memory, config,
                                 substream(1, 1))
        assert case is not None
        assert case.kind == "Perception"
        assert case.predicted == "Perception"
        assert case.meta["flips"] >= 1

    def test_grasping_fault_classified_as_grasping(self, hand_scene, memory,
                                                   config):
        program = parse("grasp the yellow banana.", memory)
        case = inject_grasping(program, hand_scene, memory, config,
                               substream(1, 2))
        assert case is not None
        assert case.kind == "Grasping"
        assert case.predicted == "Grasping"
        assert case.meta["target"] == 3
        assert case.trace.failure.kind == "Grasping"

    def test_grasping_skips_non_action_programs(self, hand_scene, memory,
                                                config):
        program = parse("how many red mugs are there?", memory)
        assert inject_grasping(program, hand_scene, memory, config,
                               substream(1, 3)) is None

    def test_faulty_trace_differs_from_clean_run(self, hand_scene, memory,
                                                 config, oracle):
        program = parse("how many red mugs are there?", memory)
        clean = execute(program, hand_scene, oracle, config, memory)
        case = inject_perception(program, hand_scene, memory, config,
                                 substream(2, 0))
        faulty = case.trace
        if faulty.status == "success":
            assert faulty.answer != clean.answer
        else:
            assert clean.status == "success"


class TestSuite:
    @pytest.fixture()
    def pairs(self, hand_scene, memory):
        programs = [parse("how many red mugs are there?", memory),
                    parse("grasp the yellow banana.", memory),
                    parse("is there any blue mug to the left of the bowl?",
                          memory)]
        return [(p, hand_scene) for p in programs] * 3

    def test_build_respects_per_kind_quota(self, pairs, memory):
        suite = build_fault_suite(pairs, memory, per_kind=3, master_seed=7)
        counts = {k: sum(1 for c in suite if c.kind == k) for k in FAULT_KINDS}
        assert counts == {"Reasoning": 3, "Perception": 3, "Grasping": 3}

    def test_every_case_is_classifiable(self, pairs, memory):
        suite = build_fault_suite(pairs, memory, per_kind=3, master_seed=7)
        for case in suite:
            assert case.predicted in FAULT_KINDS

    def test_score_totals_consistent(self, pairs, memory):
        suite = build_fault_suite(pairs, memory, per_kind=3, master_seed=7)
        score = score_fault_suite(suite)
        assert score["total"] == len(suite)
        assert score["correct"] == sum(1 for c in suite
                                       if c.predicted == c.kind)
        assert score["accuracy"] == pytest.approx(score["correct"] / len(suite))
        assert sum(v["total"] for v in score["by_kind"].values()) == len(suite)

    def test_same_seed_reproduces_suite(self, pairs, memory):
        a = build_fault_suite(pairs, memory, per_kind=3, master_seed=7)
        b = build_fault_suite(pairs, memory, per_kind=3, master_seed=7)
        assert [(c.kind, c.meta) for c in a] == [(c.kind, c.meta) for c in b]

    def test_empty_suite_scores_zero(self):
        assert score_fault_suite([]) == {"total": 0, "correct": 0,
                                         "accuracy": 0.0, "by_kind": {}}
