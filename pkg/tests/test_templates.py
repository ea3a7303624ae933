"""Template registry: structure, expansion enumeration, skeleton validity."""
import json

import pytest

from tnsr.concepts import CONCEPT_KINDS
from tnsr.programs import delinearize, typecheck
from tnsr.templates import (FAMILIES, GRASP_COMPLEX_FAMILIES,
                            GRASP_SIMPLE_FAMILIES, MANIPULATION_FAMILIES, Opt,
                            Punct, Slot, TaskTemplate, build_grammar,
                            chain_steps, get_grammar, grammar_to_json, marker)

# placeholder concepts (one valid value per kind) for skeleton checking
_DUMMY = {"category": "mug", "color": "red", "material": "ceramic",
          "instance": "coca_cola", "relation": "left", "location": "left",
          "hyper_relation": "closer_than", "supercategory": "kitchenware"}


def test_family_inventory():
    assert len(FAMILIES) == 11
    assert set(GRASP_SIMPLE_FAMILIES) <= set(FAMILIES)
    assert set(GRASP_COMPLEX_FAMILIES) <= set(FAMILIES)
    assert not set(MANIPULATION_FAMILIES) & set(FAMILIES)


def test_registry_size_is_frozen(grammar):
    # regression pin: growing or shrinking the grammar should be deliberate
    assert len(grammar.templates) == 59
    assert len(grammar.expansions) == 810


def test_every_family_has_templates(grammar):
    for family in FAMILIES + MANIPULATION_FAMILIES:
        assert grammar.by_family(family), family


def test_template_lookup(grammar):
    t = grammar.template("zero_hop_count")
    assert t.family == "zero_hop" and t.task == "count"
    with pytest.raises(KeyError):
        grammar.template("labyrinth")


def test_grasp_families_have_grasp_templates(grammar):
    for family in GRASP_SIMPLE_FAMILIES + GRASP_COMPLEX_FAMILIES:
        tasks = {t.task for t in grammar.by_family(family)}
        assert "grasp" in tasks, family


class TestExpansions:
    def test_every_expansion_key_is_its_tokens(self, grammar):
        for key, exp in grammar.expansions.items():
            assert key == exp.tokens

    def test_slot_positions_point_at_markers(self, grammar):
        for exp in grammar.expansions.values():
            for slot, pos in exp.slot_positions.items():
                kind = exp.slot_kinds[slot]
                assert exp.tokens[pos] == marker(kind)

    def test_marker_count_matches_slots(self, grammar):
        for exp in grammar.expansions.values():
            markers = [t for t in exp.tokens if t.startswith("<")]
            assert len(markers) == len(exp.slot_positions)

    def test_slot_kinds_are_known(self, grammar):
        for exp in grammar.expansions.values():
            assert set(exp.slot_kinds.values()) <= set(CONCEPT_KINDS)

    def test_every_skeleton_is_executable_shape(self, grammar, memory):
        for exp in grammar.expansions.values():
            tokens = [(op, _DUMMY[exp.slot_kinds[slot]] if slot else None)
                      for op, slot in exp.steps]
            program = delinearize(tokens)
            report = typecheck(program, memory)
            assert report.ok, (exp.template_id, exp.tokens, report.errors)

    def test_step_slot_refs_cover_all_slots(self, grammar):
        for exp in grammar.expansions.values():
            refs = {slot for _, slot in exp.steps if slot}
            assert refs == set(exp.slot_positions), exp.template_id

    def test_optional_slots_absent_from_some_expansion(self, grammar):
        t = grammar.template("zero_hop_count")
        sizes = {len(e.slot_positions) for e in grammar.by_template[t.template_id]}
        assert len(sizes) > 1


class TestChainSteps:
    def test_full_chain_order(self):
        present = {"c", "i", "y", "m", "l"}
        steps = chain_steps(present, cat="c", inst="i", color="y", mat="m",
                            loc="l", terminal="auto")
        assert steps == [("scene", None), ("filter_category", "c"),
                         ("filter_instance", "i"), ("filter_color", "y"),
                         ("filter_material", "m"), ("locate", "l")]

    def test_absent_slots_skipped_and_unique_terminal(self):
        steps = chain_steps({"c"}, cat="c", color="y", loc="l", terminal="auto")
        assert steps == [("scene", None), ("filter_category", "c"),
                         ("unique", None)]


def test_duplicate_abstract_keys_rejected():
    def skel(present):
        return chain_steps(present, cat="c", terminal=None) + [("count", None)]

    t1 = TaskTemplate("dup_a", "zero_hop", "count",
                      ("how many", Slot("c", "category", plural=True), Punct("?")),
                      skel)
    t2 = TaskTemplate("dup_b", "zero_hop", "count",
                      ("how many", Slot("c", "category", plural=True), Punct("?")),
                      skel)
    with pytest.raises(ValueError, match="ambiguous pattern"):
        build_grammar((t1, t2))


def test_punctuation_is_invisible_to_abstraction(grammar):
    for exp in grammar.expansions.values():
        assert all(tok not in ("?", ".", ";") for tok in exp.tokens)


def test_requires_predicate_prunes_expansions():
    # an expansion whose requires-predicate fails must not be registered
    def skel(present):
        return chain_steps(present, cat="c", color="y", terminal=None) + [("count", None)]

    t = TaskTemplate("gated", "zero_hop", "count",
                     ("how many", Slot("y", "color", optional=True),
                      Slot("c", "category", plural=True), Punct("?")),
                     skel, requires=lambda present: "y" in present)
    grammar = build_grammar((t,))
    assert all("y" in e.present for e in grammar.expansions.values())
    assert len(grammar.expansions) == 1


def test_grammar_to_json_round_trips_tokens(grammar):
    doc = json.loads(grammar_to_json(grammar))
    assert len(doc) == len(grammar.templates)
    by_id = {t["template_id"]: t for t in doc}
    zc = by_id["zero_hop_count"]
    keys = {tuple(e["tokens"]) for e in zc["expansions"]}
    assert keys == {e.tokens for e in grammar.by_template["zero_hop_count"]}


def test_get_grammar_is_cached():
    assert get_grammar() is get_grammar()
