"""Dataset generation tests: instantiation, quotas, re-execution fidelity,
serialization round trips, grasp splits, and same-seed reproducibility."""
import json

import pytest

from tnsr.datagen import (Dataset, DatasetConfig, GraspConfig, GRASP_SPLITS,
                          Sample, answer_payload, generate_dataset,
                          generate_grasp_splits, instantiate, load_dataset,
                          save_dataset, save_grasp_splits)
from tnsr.executor import ExecConfig, execute
from tnsr.grounding import OracleGrounder
from tnsr.parser import parse
from tnsr.programs import delinearize, linearize, tokens_to_dicts
from tnsr.rng import substream
from tnsr.scene import scene_to_dict
from tnsr.templates import FAMILIES


SMALL = DatasetConfig(master_seed=11, num_scenes=6, per_family=2)
GRASP_SMALL = GraspConfig(master_seed=5, scenes_per_split=2, per_scene=3)


@pytest.fixture(scope="module")
def small_dataset():
    return generate_dataset(SMALL)


@pytest.fixture(scope="module")
def grasp_splits():
    return generate_grasp_splits(GRASP_SMALL)


def reexecute(sample: Sample, scene, memory, thresholds):
    program = delinearize([(d["op"], d.get("concept")) for d in sample.program])
    grounder = OracleGrounder(memory, thresholds)
    trace = execute(program, scene, grounder, ExecConfig(thresholds=thresholds),
                    memory)
    return trace


class TestInstantiate:
    def test_returns_text_program_trace_values(self, hand_scene, memory,
                                               grammar, thresholds):
        template = grammar.template("zero_hop_count")
        rng = substream(42, 0)
        got = instantiate(hand_scene, template, rng, memory=memory,
                          grammar=grammar, thresholds=thresholds)
        assert got is not None
        text, program, trace, values = got
        assert trace.status == "success"
        assert trace.answer.kind == "int"
        # counts in plain families must be informative (nonzero)
        assert trace.answer.value >= 1
        assert linearize(parse(text, memory)) == linearize(program)

    def test_same_rng_stream_is_deterministic(self, hand_scene, memory,
                                              grammar, thresholds):
        template = grammar.template("one_hop_exist_plain")
        a = instantiate(hand_scene, template, substream(9, 1), memory=memory,
                        grammar=grammar, thresholds=thresholds)
        b = instantiate(hand_scene, template, substream(9, 1), memory=memory,
                        grammar=grammar, thresholds=thresholds)
        assert a is not None and b is not None
        assert a[0] == b[0]
        assert linearize(a[1]) == linearize(b[1])

    def test_seen_set_blocks_repeats(self, hand_scene, memory, grammar,
                                     thresholds):
        template = grammar.template("zero_hop_count")
        seen: set = set()
        texts = []
        for i in range(4):
            got = instantiate(hand_scene, template, substream(7, i),
                              memory=memory, grammar=grammar,
                              thresholds=thresholds, seen=seen)
            if got:
                texts.append(got[0])
        assert len(texts) == len(set(texts))


class TestGenerateDataset:
    def test_meets_quota_exactly(self, small_dataset):
        assert len(small_dataset.scenes) == SMALL.num_scenes
        expected = SMALL.num_scenes * SMALL.per_family * len(FAMILIES)
        assert len(small_dataset.samples) == expected

    def test_per_scene_family_quota(self, small_dataset):
        by_scene_family: dict = {}
        for s in small_dataset.samples:
            key = (s.scene_id, s.family)
            by_scene_family[key] = by_scene_family.get(key, 0) + 1
        for scene_id in small_dataset.scenes:
            for family in FAMILIES:
                assert by_scene_family[(scene_id, family)] == SMALL.per_family

    def test_sample_ids_unique_and_scenes_resolve(self, small_dataset):
        ids = [s.sample_id for s in small_dataset.samples]
        assert len(ids) == len(set(ids))
        for s in small_dataset.samples:
            assert s.scene_id in small_dataset.scenes

    def test_questions_parse_to_annotated_program(self, small_dataset, memory):
        for s in small_dataset.samples:
            program = parse(s.question, memory)
            assert tokens_to_dicts(linearize(program)) == s.program, s.question

    def test_answers_reexecute(self, small_dataset, memory, thresholds):
        for s in small_dataset.samples:
            scene = small_dataset.scenes[s.scene_id]
            trace = reexecute(s, scene, memory, thresholds)
            assert trace.status == "success", s.sample_id
            assert answer_payload(trace.answer, scene) == s.answer, s.sample_id

    def test_bool_answers_are_balanced(self, small_dataset):
        balance = small_dataset.stats["bool_balance"]
        assert balance["True"] == balance["False"]

    def test_stats_totals_are_consistent(self, small_dataset):
        stats = small_dataset.stats
        assert stats["samples"] == len(small_dataset.samples)
        assert stats["scenes"] == len(small_dataset.scenes)
        assert sum(stats["per_family"].values()) == stats["samples"]
        assert sum(stats["answer_kinds"].values()) == stats["samples"]
        assert sum(stats["per_template"].values()) == stats["samples"]

    def test_scene_split_alternates(self, small_dataset):
        tags = [small_dataset.scenes[f"scene_{i:05d}"].split_tag
                for i in range(SMALL.num_scenes)]
        assert tags == ["scattered", "crowded"] * (SMALL.num_scenes // 2)


class TestDeterminism:
    def test_same_seed_reproduces_dataset(self, small_dataset):
        again = generate_dataset(SMALL)
        assert [s.to_dict() for s in again.samples] == \
            [s.to_dict() for s in small_dataset.samples]
        assert {k: scene_to_dict(v) for k, v in again.scenes.items()} == \
            {k: scene_to_dict(v) for k, v in small_dataset.scenes.items()}
        assert again.stats == small_dataset.stats

    def test_different_seed_differs(self, small_dataset):
        other = generate_dataset(DatasetConfig(master_seed=12, num_scenes=6,
                                               per_family=2))
        assert [s.question for s in other.samples] != \
            [s.question for s in small_dataset.samples]

    def test_save_is_byte_identical_across_runs(self, small_dataset, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        save_dataset(small_dataset, str(a))
        save_dataset(generate_dataset(SMALL), str(b))
        for rel in ["dataset.jsonl", "stats.json"] + \
                [f"scenes/{sid}.json" for sid in small_dataset.scenes]:
            assert (a / rel).read_bytes() == (b / rel).read_bytes(), rel


class TestSaveLoad:
    def test_round_trip(self, small_dataset, tmp_path):
        out = tmp_path / "ds"
        save_dataset(small_dataset, str(out))
        loaded = load_dataset(str(out))
        assert isinstance(loaded, Dataset)
        assert [s.to_dict() for s in loaded.samples] == \
            [s.to_dict() for s in small_dataset.samples]
        assert {k: scene_to_dict(v) for k, v in loaded.scenes.items()} == \
            {k: scene_to_dict(v) for k, v in small_dataset.scenes.items()}
        assert loaded.stats == small_dataset.stats

    def test_expected_file_layout(self, small_dataset, tmp_path):
        out = tmp_path / "ds"
        save_dataset(small_dataset, str(out))
        scene_files = sorted(p.name for p in (out / "scenes").iterdir())
        assert scene_files == sorted(f"{sid}.json" for sid in small_dataset.scenes)
        lines = (out / "dataset.jsonl").read_text().strip().splitlines()
        assert len(lines) == len(small_dataset.samples)
        assert json.loads((out / "stats.json").read_text()) == small_dataset.stats


class TestAnswerPayload:
    def test_object_answers_carry_box(self, hand_scene, memory, thresholds):
        program = parse("where is the yellow banana?", memory)
        grounder = OracleGrounder(memory, thresholds)
        trace = execute(program, hand_scene, grounder,
                        ExecConfig(thresholds=thresholds), memory)
        payload = answer_payload(trace.answer, hand_scene)
        assert payload["type"] == "object"
        obj = hand_scene.object(payload["value"])
        assert payload["box"] == {"center": list(obj.box.center),
                                  "extents": list(obj.box.extents)}

    def test_scalar_answers_have_no_box(self, hand_scene, memory, thresholds):
        program = parse("how many mugs are there?", memory)
        grounder = OracleGrounder(memory, thresholds)
        trace = execute(program, hand_scene, grounder,
                        ExecConfig(thresholds=thresholds), memory)
        payload = answer_payload(trace.answer, hand_scene)
        assert payload == {"type": "int", "value": 2}


class TestGraspSplits:
    def test_four_named_splits(self, grasp_splits):
        assert sorted(grasp_splits) == sorted(name for name, _, _ in GRASP_SPLITS)

    def test_quota_and_scene_prefixes(self, grasp_splits):
        for name, payload in grasp_splits.items():
            assert len(payload["scenes"]) == GRASP_SMALL.scenes_per_split
            expected = GRASP_SMALL.scenes_per_split * GRASP_SMALL.per_scene
            assert len(payload["instructions"]) == expected
            for scene_id in payload["scenes"]:
                assert scene_id.startswith(name)

    def test_scene_split_tag_matches_split(self, grasp_splits):
        for name, _, _ in GRASP_SPLITS:
            base = name.split("_")[0]
            for scene in grasp_splits[name]["scenes"].values():
                assert scene.split_tag == base

    def test_targets_unique_within_scene(self, grasp_splits):
        for payload in grasp_splits.values():
            per_scene: dict = {}
            for inst in payload["instructions"]:
                per_scene.setdefault(inst.scene_id, []).append(inst.target_id)
            for scene_id, targets in per_scene.items():
                assert len(targets) == len(set(targets)), scene_id

    def test_instructions_reexecute_to_grasp_target(self, grasp_splits, memory,
                                                    thresholds):
        grounder = OracleGrounder(memory, thresholds)
        for payload in grasp_splits.values():
            for inst in payload["instructions"]:
                scene = payload["scenes"][inst.scene_id]
                program = delinearize([(d["op"], d.get("concept"))
                                       for d in inst.program])
                trace = execute(program, scene, grounder,
                                ExecConfig(thresholds=thresholds), memory)
                assert trace.status == "success"
                assert trace.answer.kind == "action"
                assert trace.answer.value["object_id"] == inst.target_id
                assert answer_payload(trace.answer, scene) == inst.answer

    def test_instructions_parse_to_annotated_program(self, grasp_splits, memory):
        for payload in grasp_splits.values():
            for inst in payload["instructions"]:
                program = parse(inst.instruction, memory)
                assert tokens_to_dicts(linearize(program)) == inst.program

    def test_same_seed_reproduces_splits(self, grasp_splits):
        again = generate_grasp_splits(GRASP_SMALL)
        for name in grasp_splits:
            a = [i.to_dict() for i in grasp_splits[name]["instructions"]]
            b = [i.to_dict() for i in again[name]["instructions"]]
            assert a == b

    def test_save_layout(self, grasp_splits, tmp_path):
        save_grasp_splits(grasp_splits, str(tmp_path))
        for name, payload in grasp_splits.items():
            split_dir = tmp_path / name
            lines = (split_dir / "instructions.jsonl").read_text().splitlines()
            assert len(lines) == len(payload["instructions"])
            files = sorted(p.name for p in (split_dir / "scenes").iterdir())
            assert files == sorted(f"{sid}.json" for sid in payload["scenes"])
