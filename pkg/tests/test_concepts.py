"""Concept catalogue: vocabularies, synonym resolution, plural handling."""
import pytest

from tnsr.concepts import (ATTRIBUTE_TYPES, canonical_key, load_memory,
                           normalize_token, pick_reading, pluralize,
                           resolve_concept, tokenize)
from tnsr.errors import UnknownConcept


class TestNormalization:
    def test_strips_outer_punctuation_keeps_hyphens(self):
        assert normalize_token("Mug?") == "mug"
        assert normalize_token("'coca-cola'") == "coca-cola"
        assert normalize_token("(red)") == "red"

    def test_tokenize(self):
        assert tokenize("Is there a Red mug?") == ["is", "there", "a", "red", "mug"]

    def test_canonical_key_folds_underscores(self):
        assert canonical_key("coca_cola") == "coca cola"
        assert canonical_key("  Juice   Box ") == "juice box"


class TestPluralize:
    @pytest.mark.parametrize("word, plural", [
        ("mug", "mugs"), ("box", "boxes"), ("dish", "dishes"),
        ("bench", "benches"), ("scissors", "scissors"),
        ("knife", "knives"), ("mouse", "mice"),
        ("juice box", "juice boxes"),
    ])
    def test_forms(self, word, plural):
        assert pluralize(word) == plural


class TestMemory:
    def test_vocabularies_are_nonempty_ordered_tuples(self, memory):
        for kind in ATTRIBUTE_TYPES + ("relation", "location", "hyper_relation"):
            vals = memory.values[kind]
            assert isinstance(vals, tuple) and len(vals) > 0
            assert len(set(vals)) == len(vals)

    def test_every_catalogue_label_is_registered(self, memory):
        for cat, spec in memory.objects.items():
            assert cat in memory.values["category"]
            assert spec.supercategory in memory.values["supercategory"]
            assert set(spec.colors) <= set(memory.values["color"])
            assert set(spec.materials) <= set(memory.values["material"])
            assert set(spec.instances) <= set(memory.values["instance"])

    def test_attribute_canonicals_resolve_to_themselves(self, memory):
        for kind in ATTRIBUTE_TYPES:
            for value in memory.values[kind]:
                k, v = resolve_concept(memory, value)
                assert v == value

    def test_every_relational_surface_resolves_to_its_canonical(self, memory):
        for kind in ("relation", "hyper_relation", "location"):
            for value in memory.values[kind]:
                surfaces = memory.surfaces[(kind, value)]
                assert surfaces
                for phrase in surfaces:
                    assert (kind, value) in memory.lexicon[phrase]

    def test_synonyms_resolve(self, memory):
        assert resolve_concept(memory, "crimson" if "crimson" in memory.lexicon else "mug")
        kind, value = resolve_concept(memory, "coca-cola")
        assert (kind, value) == ("instance", "coca_cola")

    def test_plural_surface_resolves(self, memory):
        assert resolve_concept(memory, "mugs") == ("category", "mug")
        assert resolve_concept(memory, "knives") == ("category", "knife")
        assert resolve_concept(memory, "mice") == ("category", "mouse")

    def test_unknown_phrase_raises(self, memory):
        with pytest.raises(UnknownConcept):
            resolve_concept(memory, "ziggurat")

    def test_orange_has_two_readings(self, memory):
        readings = memory.lexicon["orange"]
        kinds = {k for k, _ in readings}
        assert kinds == {"category", "color"}


class TestPickReading:
    def test_color_wins_before_noun(self, memory):
        readings = memory.lexicon["orange"]
        assert pick_reading(readings, "cup", True) == ("color", "orange")
        assert pick_reading(readings, "thing", False) == ("color", "orange")

    def test_category_wins_at_phrase_end(self, memory):
        readings = memory.lexicon["orange"]
        kind, value = pick_reading(readings, None, False)
        assert kind == "category"


class TestExtension:
    def test_with_synonym_is_pure(self, memory):
        extended = memory.with_synonym("color", "red", "vermilion")
        assert resolve_concept(extended, "vermilion") == ("color", "red")
        with pytest.raises(UnknownConcept):
            resolve_concept(memory, "vermilion")

    def test_with_synonym_rejects_unknown_canonical(self, memory):
        with pytest.raises(UnknownConcept):
            memory.with_synonym("color", "blurple", "blurpleish")

    def test_heldout_extension_only_touches_lexicon(self, memory):
        extended = memory.with_heldout_synonyms()
        assert extended.values == memory.values
        assert extended.objects is memory.objects
        new_keys = set(extended.lexicon) - set(memory.lexicon)
        assert new_keys, "held-out vocabulary must add phrases"
        for key in new_keys:
            kind, value = extended.lexicon[key][0]
            assert value in memory.values[kind]

    def test_heldout_never_shadows_base_phrases(self, memory):
        extended = memory.with_heldout_synonyms()
        for phrase, readings in memory.lexicon.items():
            assert extended.lexicon[phrase][0] == readings[0]


def test_load_memory_fresh_instances_equal(memory):
    assert load_memory().values == memory.values
