"""Program representation: typing, linear form, and text form."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tnsr.errors import MalformedSequence, ProgramSyntaxError
from tnsr.programs import (ACTION_PRIMITIVES, SIGNATURES, Node, chain,
                           delinearize, describe_chain, linearize, parse_text,
                           scene_node, to_text, tokens_from_dicts,
                           tokens_to_dicts, typecheck)


def count_program():
    return chain(("filter_color", "red"), "count",
                 base=chain(("filter_category", "mug")))


def test_signature_inventory_is_stable():
    assert len(SIGNATURES) == 28
    assert set(ACTION_PRIMITIVES) == {"grasp", "pick_and_place", "sort"}


class TestChainsAndWalk:
    def test_walk_is_post_order(self):
        prog = count_program()
        ops = [n.op for n in prog.walk()]
        assert ops == ["scene", "filter_category", "filter_color", "count"]

    def test_copy_is_deep(self):
        prog = count_program()
        dup = prog.copy()
        dup.children[0].concept = "blue"
        assert prog.children[0].concept == "red"


class TestTypecheck:
    def test_valid_chain(self, memory):
        report = typecheck(count_program(), memory)
        assert report.ok and report.root_type == "Int" and report.errors == []

    def test_valid_binary(self, memory):
        prog = Node("greater", None, [
            chain(("filter_category", "mug"), "count"),
            chain(("filter_category", "bowl"), "count"),
        ])
        assert typecheck(prog, memory).ok

    def test_unknown_primitive(self, memory):
        report = typecheck(Node("teleport", None, [scene_node()]), memory)
        assert not report.ok and "unknown primitive" in report.errors[0]

    def test_arity_mismatch(self, memory):
        report = typecheck(Node("count", None, []), memory)
        assert not report.ok

    def test_child_type_mismatch(self, memory):
        prog = Node("exist", None, [chain(("filter_category", "mug"), "count")])
        report = typecheck(prog, memory)
        assert not report.ok and "expected ObjSet, got Int" in report.errors[0]

    def test_concept_required(self, memory):
        report = typecheck(chain(("filter_category", None)), memory)
        assert not report.ok and "requires a category concept" in report.errors[0]

    def test_concept_forbidden(self, memory):
        report = typecheck(chain(("count", "red"),
                                 base=chain(("filter_category", "mug"))), memory)
        assert not report.ok and "takes no concept" in report.errors[0]

    def test_concept_vocabulary_checked(self, memory):
        report = typecheck(chain(("filter_color", "plaid"), "count"), memory)
        assert not report.ok and "not a known color" in report.errors[0]
        # without a memory the vocabulary check is skipped
        assert typecheck(chain(("filter_color", "plaid"), "count")).ok

    def test_action_only_at_root(self, memory):
        good = chain(("filter_category", "mug"), "unique", "grasp")
        assert typecheck(good, memory).ok
        bad = Node("count", None, [Node("grasp", None, [
            chain(("filter_category", "mug"), "unique")])])
        report = typecheck(bad, memory)
        assert not report.ok
        assert any("only at the root" in e for e in report.errors)

    def test_int_literal_rejected(self, memory):
        prog = Node("greater", None, [
            chain(("filter_category", "mug"), "count"),
            Node("int_literal", "2"),
        ])
        report = typecheck(prog, memory)
        assert not report.ok
        assert any("not executable" in e for e in report.errors)


class TestLinearForm:
    def test_linearize_order(self):
        tokens = linearize(count_program())
        assert tokens == [("scene", None), ("filter_category", "mug"),
                          ("filter_color", "red"), ("count", None)]

    def test_round_trip_chain(self):
        prog = count_program()
        assert linearize(delinearize(linearize(prog))) == linearize(prog)

    def test_round_trip_binary_and_ternary(self, memory):
        hyper = Node("hyper_relate", "closer_than", [
            chain(("filter_category", "mug"), "unique"),
            chain(("filter_category", "bowl"), "unique"),
        ])
        prog = Node("count", None, [hyper])
        tokens = linearize(prog)
        rebuilt = delinearize(tokens)
        assert linearize(rebuilt) == tokens
        assert typecheck(rebuilt, memory).ok

    @pytest.mark.parametrize("tokens", [
        [],
        [("count", None)],                                # chain without scene
        [("scene", "red")],                               # scene takes no concept
        [("scene", None), ("warp", None)],                # unknown op
        [("scene", None), ("and", None)],                 # binary without operand
        [("scene", None), ("scene", None)],               # unconsumed operand
        [("scene", None), ("scene", None), ("count", None)],
    ])
    def test_malformed_sequences(self, tokens):
        with pytest.raises(MalformedSequence):
            delinearize(tokens)

    def test_bare_op_names_accepted(self):
        prog = delinearize(["scene", ("filter_category", "mug"), "count"])
        assert to_text(prog) == "count(filter_category(scene(),'mug'))"

    def test_dict_round_trip(self):
        tokens = linearize(count_program())
        assert tokens_from_dicts(tokens_to_dicts(tokens)) == tokens
        assert tokens_to_dicts(tokens)[0] == {"op": "scene"}
        assert tokens_to_dicts(tokens)[1] == {"op": "filter_category",
                                              "concept": "mug"}


class TestTextForm:
    def test_to_text(self):
        assert to_text(count_program()) == \
            "count(filter_color(filter_category(scene(),'mug'),'red'))"

    def test_parse_text_round_trip(self):
        text = "exist(and(filter_color(scene(),'red'),relate(unique(filter_category(scene(),'bowl')),'left')))"
        prog = parse_text(text)
        assert to_text(prog) == text

    def test_parse_text_int_literal(self):
        prog = parse_text("greater(count(scene()),2)")
        assert prog.children[1].op == "int_literal"
        assert prog.children[1].concept == "2"
        assert not typecheck(prog).ok

    @pytest.mark.parametrize("bad", [
        "", "count(", "count(scene()", "count(scene())x", "count('a','b')",
        "count('red',scene())", "123abc(scene())", "count(scene()))",
    ])
    def test_syntax_errors(self, bad):
        with pytest.raises(ProgramSyntaxError):
            parse_text(bad)

    def test_syntax_error_carries_position(self):
        with pytest.raises(ProgramSyntaxError) as exc:
            parse_text("count(scene()")
        assert exc.value.line == 1 and exc.value.column >= 13


class TestDescribeChain:
    def test_orders_attributes_naturally(self):
        prog = chain(("filter_category", "soda"), ("filter_color", "red"), "unique")
        assert describe_chain(prog) == "red soda"

    def test_instance_and_default(self):
        prog = chain(("filter_instance", "coca_cola"), "unique")
        assert describe_chain(prog) == "coca cola"
        assert describe_chain(chain("unique")) == "object"


# strategy for random well-typed programs: a unary chain of filters with an
# optional relate branch, topped by a closing op
_concepts = {"category": ("mug", "bowl", "soda"), "color": ("red", "blue"),
             "material": ("ceramic", "plastic")}


@st.composite
def programs(draw):
    def referent():
        steps = []
        for kind in ("category", "color", "material"):
            if draw(st.booleans()):
                steps.append((f"filter_{kind}", draw(st.sampled_from(_concepts[kind]))))
        if not steps:
            steps.append(("filter_category", "mug"))
        return chain(*steps)

    base = referent()
    if draw(st.booleans()):
        rel = draw(st.sampled_from(("left", "right", "behind", "front", "next")))
        base = Node("and", None, [base, Node("relate", rel,
                                             [Node("unique", None, [referent()])])])
    closer = draw(st.sampled_from(("count", "exist")))
    return Node(closer, None, [base])


@given(prog=programs())
@settings(max_examples=80, deadline=None)
def test_random_programs_round_trip_everywhere(prog):
    from tnsr.concepts import load_memory

    memory = load_memory()
    assert typecheck(prog, memory).ok
    tokens = linearize(prog)
    assert linearize(delinearize(tokens)) == tokens
    assert tokens_from_dicts(tokens_to_dicts(tokens)) == tokens
    assert to_text(parse_text(to_text(prog))) == to_text(prog)
