"""Task templates: question surface patterns paired with program skeletons.

One registry serves both directions. The dataset generator renders a
pattern into text and instantiates its skeleton with sampled concepts; the
parser abstracts a tagged query to the same token space and looks the
pattern up again. Each optional element doubles a pattern's expansions;
every expansion knows its literal tokens, slot marker positions, and the
linear program skeleton with slot references, so a slot binds exactly one
program step.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

FAMILIES = (
    "compare_integer", "comparison", "zero_hop", "one_hop", "two_hop",
    "hyper_one_hop", "hyper_two_hop", "single_and", "single_or",
    "same_relate", "return",
)
MANIPULATION_FAMILIES = ("pick_place", "sort_by_reference")

GRASP_SIMPLE_FAMILIES = ("zero_hop", "return")
GRASP_COMPLEX_FAMILIES = ("one_hop", "two_hop", "hyper_one_hop", "hyper_two_hop",
                          "single_and", "same_relate")


@dataclass(frozen=True)
class Slot:
    name: str
    kind: str  # category|color|material|instance|relation|location|hyper_relation
    optional: bool = False
    plural: bool = False
    form: str = "attributive"  # location slots: attributive|postnominal


@dataclass(frozen=True)
class Opt:
    """Optional literal words, e.g. "that is"."""

    words: tuple[str, ...]


@dataclass(frozen=True)
class Punct:
    """Rendered punctuation, invisible to the abstraction."""

    text: str


@dataclass(frozen=True)
class Role:
    """A referent mentioned by a template: which slots describe it."""

    name: str
    cat: str | None = None
    inst: str | None = None
    color: str | None = None
    mat: str | None = None
    loc: str | None = None

    def attr_slots(self) -> tuple[tuple[str, str], ...]:
        out = []
        if self.cat:
            out.append(("category", self.cat))
        if self.inst:
            out.append(("instance", self.inst))
        if self.color:
            out.append(("color", self.color))
        if self.mat:
            out.append(("material", self.mat))
        return tuple(out)


@dataclass(frozen=True)
class TaskTemplate:
    template_id: str
    family: str
    task: str  # count|exist|query_color|query_material|query_category|ref|grasp|compare|pick_place|sort
    pattern: tuple
    skeleton: Callable | None
    roles: tuple[Role, ...] = ()
    rel_slots: tuple[str, ...] = ()
    hyper_slot: str | None = None
    bool_answer: bool = False
    requires: Callable | None = None  # presence-set predicate

    def role(self, name: str) -> Role:
        for r in self.roles:
            if r.name == name:
                return r
        raise KeyError(name)


@dataclass(frozen=True)
class Expansion:
    template_id: str
    family: str
    task: str
    present: frozenset
    tokens: tuple[str, ...]             # abstract tokens (<kind> markers + literals)
    elements: tuple                     # pattern elements actually rendered
    slot_positions: dict[str, int]      # slot name -> abstract token index
    slot_kinds: dict[str, str]
    steps: tuple[tuple[str, str | None], ...]  # linear ops with slot refs

    @property
    def key(self) -> tuple[str, ...]:
        return self.tokens


def marker(kind: str) -> str:
    return f"<{kind}>"


def _expansions(t: TaskTemplate) -> list[Expansion]:
    optional_idx = [i for i, e in enumerate(t.pattern)
                    if (isinstance(e, Slot) and e.optional) or isinstance(e, Opt)]
    out: list[Expansion] = []
    for mask in itertools.product((True, False), repeat=len(optional_idx)):
        chosen = {i for i, keep in zip(optional_idx, mask) if keep}
        present: set[str] = set()
        tokens: list[str] = []
        elements: list = []
        slot_positions: dict[str, int] = {}
        slot_kinds: dict[str, str] = {}
        for i, e in enumerate(t.pattern):
            if isinstance(e, str):
                tokens.extend(e.split())
                elements.append(e)
            elif isinstance(e, Punct):
                elements.append(e)
            elif isinstance(e, Opt):
                if i in chosen:
                    tokens.extend(e.words)
                    elements.append(" ".join(e.words))
            elif isinstance(e, Slot):
                if e.optional and i not in chosen:
                    continue
                present.add(e.name)
                slot_positions[e.name] = len(tokens)
                slot_kinds[e.name] = e.kind
                tokens.append(marker(e.kind))
                elements.append(e)
        frozen = frozenset(present)
        if t.requires is not None and not t.requires(frozen):
            continue
        steps = tuple(t.skeleton(frozen))
        out.append(Expansion(t.template_id, t.family, t.task, frozen, tuple(tokens),
                             tuple(elements), slot_positions, slot_kinds, steps))
    return out


# ---------------------------------------------------------------------------
# authoring helpers


def S(name: str, kind: str, opt: bool = False, plural: bool = False,
      form: str = "attributive") -> Slot:
    return Slot(name, kind, opt, plural, form)


def chain_steps(present, *, cat=None, inst=None, color=None, mat=None, loc=None,
                base: bool = True, terminal: str | None = None) -> list[tuple[str, str | None]]:
    """Linear steps for one referent chain; slot args are slot names."""
    steps: list[tuple[str, str | None]] = [("scene", None)] if base else []
    if cat and cat in present:
        steps.append(("filter_category", cat))
    if inst and inst in present:
        steps.append(("filter_instance", inst))
    if color and color in present:
        steps.append(("filter_color", color))
    if mat and mat in present:
        steps.append(("filter_material", mat))
    if terminal == "auto":
        if loc and loc in present:
            steps.append(("locate", loc))
        else:
            steps.append(("unique", None))
    elif terminal == "unique":
        steps.append(("unique", None))
    return steps


def _role_chain(role: Role, present, base=True, terminal="auto"):
    return chain_steps(present, cat=role.cat, inst=role.inst, color=role.color,
                       mat=role.mat, loc=role.loc, base=base, terminal=terminal)


_T: list[TaskTemplate] = []


def _add(template_id, family, task, pattern, skeleton, roles=(), rel_slots=(),
         hyper_slot=None, bool_answer=False, requires=None):
    _T.append(TaskTemplate(template_id, family, task, tuple(pattern), skeleton,
                           tuple(roles), tuple(rel_slots), hyper_slot, bool_answer, requires))


# --- zero_hop ---------------------------------------------------------------

_ZH = Role("target", cat="Y", color="C", mat="M", loc="L")

_add("zero_hop_count", "zero_hop", "count",
     ["how many", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category", plural=True), "are there", Punct("?")],
     lambda p: chain_steps(p, cat="Y", color="C", mat="M") + [("count", None)],
     roles=[Role("target", cat="Y", color="C", mat="M")])

_add("zero_hop_exist", "zero_hop", "exist",
     ["is there any", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), Punct("?")],
     lambda p: chain_steps(p, cat="Y", color="C", mat="M") + [("exist", None)],
     roles=[Role("target", cat="Y", color="C", mat="M")], bool_answer=True)

_add("zero_hop_query_color", "zero_hop", "query_color",
     ["the", S("L", "location", opt=True), S("M", "material", opt=True),
      S("Y", "category"), "has what color", Punct("?")],
     lambda p: chain_steps(p, cat="Y", mat="M", loc="L", terminal="auto") + [("query_color", None)],
     roles=[Role("target", cat="Y", mat="M", loc="L")])

_add("zero_hop_query_material", "zero_hop", "query_material",
     ["what material is the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("Y", "category"), Punct("?")],
     lambda p: chain_steps(p, cat="Y", color="C", loc="L", terminal="auto") + [("query_material", None)],
     roles=[Role("target", cat="Y", color="C", loc="L")])

_add("zero_hop_query_category", "zero_hop", "query_category",
     ["what category is the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), "object", Punct("?")],
     lambda p: chain_steps(p, color="C", mat="M", loc="L", terminal="auto") + [("query_category", None)],
     roles=[Role("target", color="C", mat="M", loc="L")],
     requires=lambda p: p & {"C", "M", "L"})

_add("zero_hop_ref", "zero_hop", "ref",
     ["where is the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct("?")],
     lambda p: chain_steps(p, cat="Y", color="C", mat="M", loc="L", terminal="auto"),
     roles=[_ZH])

_add("zero_hop_grasp", "zero_hop", "grasp",
     ["grasp the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct(".")],
     lambda p: chain_steps(p, cat="Y", color="C", mat="M", loc="L", terminal="auto") + [("grasp", None)],
     roles=[_ZH])

# --- one_hop ----------------------------------------------------------------

_OH_ANCHOR = Role("anchor", cat="Y", color="C", mat="M", loc="L")


def _oh_base(p):
    return _role_chain(_OH_ANCHOR, p) + [("relate", "R")]


_add("one_hop_count", "one_hop", "count",
     ["how many", S("C2", "color", opt=True), S("M2", "material", opt=True),
      S("Y2", "category", plural=True), "are", S("R", "relation"), "the",
      S("L", "location", opt=True), S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), Punct("?")],
     lambda p: _oh_base(p) + chain_steps(p, cat="Y2", color="C2", mat="M2", base=False) + [("count", None)],
     roles=[Role("target", cat="Y2", color="C2", mat="M2"), _OH_ANCHOR], rel_slots=["R"])

_add("one_hop_exist", "one_hop", "exist",
     ["there is a", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct(";"),
      "is there any", S("X", "instance"), S("R", "relation"), "it", Punct("?")],
     lambda p: _oh_base(p) + [("filter_instance", "X"), ("exist", None)],
     roles=[Role("target", inst="X"), _OH_ANCHOR], rel_slots=["R"], bool_answer=True)

_add("one_hop_exist_plain", "one_hop", "exist",
     ["is there any", S("C2", "color", opt=True), S("M2", "material", opt=True),
      S("Y2", "category"), S("R", "relation"), "the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C", loc="L", terminal="auto") + [("relate", "R")]
                + chain_steps(p, cat="Y2", color="C2", mat="M2", base=False) + [("exist", None)]),
     roles=[Role("target", cat="Y2", color="C2", mat="M2"),
            Role("anchor", cat="Y", color="C", loc="L")], rel_slots=["R"], bool_answer=True)

_add("one_hop_query_color", "one_hop", "query_color",
     ["what color is the", S("M2", "material", opt=True), S("Y2", "category"),
      S("R", "relation"), "the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("Y", "category"), Punct("?")],
     lambda p: _oh_base(p) + chain_steps(p, cat="Y2", mat="M2", base=False)
     + [("unique", None), ("query_color", None)],
     roles=[Role("target", cat="Y2", mat="M2"),
            Role("anchor", cat="Y", color="C", loc="L")], rel_slots=["R"])

_add("one_hop_query_material", "one_hop", "query_material",
     ["what material is the", S("C2", "color", opt=True), S("Y2", "category"),
      S("R", "relation"), "the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("Y", "category"), Punct("?")],
     lambda p: _oh_base(p) + chain_steps(p, cat="Y2", color="C2", base=False)
     + [("unique", None), ("query_material", None)],
     roles=[Role("target", cat="Y2", color="C2"),
            Role("anchor", cat="Y", color="C", loc="L")], rel_slots=["R"])

_add("one_hop_grasp", "one_hop", "grasp",
     ["grasp the", S("C2", "color", opt=True), S("M2", "material", opt=True),
      S("Y2", "category"), Opt(("that", "is")), S("R", "relation"), "the",
      S("L", "location", opt=True), S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), Punct(".")],
     lambda p: _oh_base(p) + chain_steps(p, cat="Y2", color="C2", mat="M2", base=False)
     + [("unique", None), ("grasp", None)],
     roles=[Role("target", cat="Y2", color="C2", mat="M2"), _OH_ANCHOR], rel_slots=["R"])

_add("one_hop_ref", "one_hop", "ref",
     ["where is the", S("C2", "color", opt=True), S("Y2", "category"),
      S("R", "relation"), "the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct("?")],
     lambda p: _oh_base(p) + chain_steps(p, cat="Y2", color="C2", base=False) + [("unique", None)],
     roles=[Role("target", cat="Y2", color="C2"), _OH_ANCHOR], rel_slots=["R"])

# --- two_hop ----------------------------------------------------------------

_TH_A = Role("anchor", cat="Y", color="C", loc="L")
_TH_MID = Role("mid", cat="Y2", color="C2", mat="M2")


def _th_base(p):
    return (_role_chain(_TH_A, p) + [("relate", "R")]
            + _role_chain(_TH_MID, p, base=False, terminal="unique") + [("relate", "R2")])


_add("two_hop_count", "two_hop", "count",
     ["how many", S("C3", "color", opt=True), S("Y3", "category", plural=True), "are",
      S("R2", "relation"), "the", S("C2", "color", opt=True), S("M2", "material", opt=True),
      S("Y2", "category"), Opt(("that", "is")), S("R", "relation"), "the",
      S("L", "location", opt=True), S("C", "color", opt=True), S("Y", "category"), Punct("?")],
     lambda p: _th_base(p) + chain_steps(p, cat="Y3", color="C3", base=False) + [("count", None)],
     roles=[Role("target", cat="Y3", color="C3"), _TH_MID, _TH_A], rel_slots=["R", "R2"])

_add("two_hop_exist", "two_hop", "exist",
     ["is there any", S("X", "instance"), S("R2", "relation"), "the",
      S("C2", "color", opt=True), S("Y2", "category"), Opt(("that", "is")),
      S("R", "relation"), "the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("Y", "category"), Punct("?")],
     lambda p: (_role_chain(_TH_A, p) + [("relate", "R")]
                + chain_steps(p, cat="Y2", color="C2", base=False, terminal="unique")
                + [("relate", "R2"), ("filter_instance", "X"), ("exist", None)]),
     roles=[Role("target", inst="X"), Role("mid", cat="Y2", color="C2"), _TH_A],
     rel_slots=["R", "R2"], bool_answer=True)

_add("two_hop_query_color", "two_hop", "query_color",
     ["what color is the", S("M3", "material", opt=True), S("Y3", "category"),
      S("R2", "relation"), "the", S("C2", "color", opt=True), S("Y2", "category"),
      Opt(("that", "is")), S("R", "relation"), "the", S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C", mat="M", terminal="unique")
                + [("relate", "R")]
                + chain_steps(p, cat="Y2", color="C2", base=False, terminal="unique")
                + [("relate", "R2")]
                + chain_steps(p, cat="Y3", mat="M3", base=False)
                + [("unique", None), ("query_color", None)]),
     roles=[Role("target", cat="Y3", mat="M3"), Role("mid", cat="Y2", color="C2"),
            Role("anchor", cat="Y", color="C", mat="M")], rel_slots=["R", "R2"])

_add("two_hop_grasp", "two_hop", "grasp",
     ["grasp the", S("C3", "color", opt=True), S("M3", "material", opt=True),
      S("Y3", "category"), S("R2", "relation"), "the", S("C2", "color", opt=True),
      S("Y2", "category"), Opt(("that", "is")), S("R", "relation"), "the",
      S("L", "location", opt=True), S("C", "color", opt=True), S("Y", "category"), Punct(".")],
     lambda p: (_role_chain(_TH_A, p) + [("relate", "R")]
                + chain_steps(p, cat="Y2", color="C2", base=False, terminal="unique")
                + [("relate", "R2")]
                + chain_steps(p, cat="Y3", color="C3", mat="M3", base=False)
                + [("unique", None), ("grasp", None)]),
     roles=[Role("target", cat="Y3", color="C3", mat="M3"),
            Role("mid", cat="Y2", color="C2"), _TH_A], rel_slots=["R", "R2"])

_add("two_hop_ref", "two_hop", "ref",
     ["where is the", S("Y3", "category"), S("R2", "relation"), "the",
      S("C2", "color", opt=True), S("M2", "material", opt=True), S("Y2", "category"),
      Opt(("that", "is")), S("R", "relation"), "the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("Y", "category"), Punct("?")],
     lambda p: _th_base(p) + chain_steps(p, cat="Y3", base=False) + [("unique", None)],
     roles=[Role("target", cat="Y3"), _TH_MID, _TH_A], rel_slots=["R", "R2"])

# --- hyper_one_hop ----------------------------------------------------------

_HOH_A = Role("anchor", cat="Y", color="C", mat="M", loc="L")
_HOH_X = Role("anchor2", inst="X")


def _hoh_base(p, second_role: Role):
    return (_role_chain(_HOH_A, p)
            + _role_chain(second_role, p, terminal="auto")
            + [("hyper_relate", "H")])


_add("hyper_one_hop_exist", "hyper_one_hop", "exist",
     ["is there any", S("C2", "color", opt=True), S("M2", "material", opt=True),
      S("Y2", "category"), S("H", "hyper_relation"), "the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("Y", "category"), "than the", S("X", "instance"), Punct("?")],
     lambda p: (_hoh_base(p, _HOH_X)
                + chain_steps(p, cat="Y2", color="C2", mat="M2", base=False) + [("exist", None)]),
     roles=[Role("target", cat="Y2", color="C2", mat="M2"),
            Role("anchor", cat="Y", color="C", loc="L"), _HOH_X],
     hyper_slot="H", bool_answer=True)

_add("hyper_one_hop_count", "hyper_one_hop", "count",
     ["how many", S("C2", "color", opt=True), S("Y2", "category", plural=True), "are",
      S("H", "hyper_relation"), "the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), "than the",
      S("C3", "color", opt=True), S("Y3", "category"), Punct("?")],
     lambda p: (_hoh_base(p, Role("anchor2", cat="Y3", color="C3"))
                + chain_steps(p, cat="Y2", color="C2", base=False) + [("count", None)]),
     roles=[Role("target", cat="Y2", color="C2"), _HOH_A,
            Role("anchor2", cat="Y3", color="C3")], hyper_slot="H")

_add("hyper_one_hop_query_material", "hyper_one_hop", "query_material",
     ["there is a", S("C2", "color", opt=True), S("Y2", "category"),
      S("H", "hyper_relation"), "the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("Y", "category"), "than the", S("X", "instance"), Punct(";"),
      "what material is it", Punct("?")],
     lambda p: (_hoh_base(p, _HOH_X)
                + chain_steps(p, cat="Y2", color="C2", base=False)
                + [("unique", None), ("query_material", None)]),
     roles=[Role("target", cat="Y2", color="C2"),
            Role("anchor", cat="Y", color="C", loc="L"), _HOH_X], hyper_slot="H")

_add("hyper_one_hop_query_color", "hyper_one_hop", "query_color",
     ["there is a", S("M2", "material", opt=True), S("Y2", "category"),
      S("H", "hyper_relation"), "the", S("C", "color", opt=True), S("Y", "category"),
      "than the", S("C3", "color", opt=True), S("Y3", "category"), Punct(";"),
      "what color is it", Punct("?")],
     lambda p: (_hoh_base(p, Role("anchor2", cat="Y3", color="C3"))
                + chain_steps(p, cat="Y2", mat="M2", base=False)
                + [("unique", None), ("query_color", None)]),
     roles=[Role("target", cat="Y2", mat="M2"), Role("anchor", cat="Y", color="C"),
            Role("anchor2", cat="Y3", color="C3")], hyper_slot="H")

_add("hyper_one_hop_grasp", "hyper_one_hop", "grasp",
     ["grasp the", S("C2", "color", opt=True), S("M2", "material", opt=True),
      S("Y2", "category"), S("H", "hyper_relation"), "the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("Y", "category"), "than the", S("X", "instance"), Punct(".")],
     lambda p: (_hoh_base(p, _HOH_X)
                + chain_steps(p, cat="Y2", color="C2", mat="M2", base=False)
                + [("unique", None), ("grasp", None)]),
     roles=[Role("target", cat="Y2", color="C2", mat="M2"),
            Role("anchor", cat="Y", color="C", loc="L"), _HOH_X], hyper_slot="H")

# --- hyper_two_hop ----------------------------------------------------------

_HTH_A = Role("anchor", cat="Y", color="C", mat="M")
_HTH_A2_ANCHOR = Role("anchor2_base", cat="Y2", color="C2")
_HTH_A2_MID = Role("anchor2", cat="Y3", color="C3")


def _hth_base(p):
    return (_role_chain(_HTH_A, p, terminal="unique")
            + _role_chain(_HTH_A2_ANCHOR, p, terminal="unique") + [("relate", "R")]
            + _role_chain(_HTH_A2_MID, p, base=False, terminal="unique")
            + [("hyper_relate", "H")])


_add("hyper_two_hop_count", "hyper_two_hop", "count",
     ["how many", S("C4", "color", opt=True), S("Y4", "category", plural=True), "are",
      S("H", "hyper_relation"), "the", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), "than the", S("C3", "color", opt=True), S("Y3", "category"),
      S("R", "relation"), "the", S("C2", "color", opt=True), S("Y2", "category"), Punct("?")],
     lambda p: _hth_base(p) + chain_steps(p, cat="Y4", color="C4", base=False) + [("count", None)],
     roles=[Role("target", cat="Y4", color="C4"), _HTH_A, _HTH_A2_MID, _HTH_A2_ANCHOR],
     rel_slots=["R"], hyper_slot="H")

_add("hyper_two_hop_exist", "hyper_two_hop", "exist",
     ["is there any", S("C4", "color", opt=True), S("M4", "material", opt=True),
      S("Y4", "category"), S("H", "hyper_relation"), "the", S("C", "color", opt=True),
      S("Y", "category"), "than the", S("Y3", "category"), S("R", "relation"), "the",
      S("C2", "color", opt=True), S("Y2", "category"), Punct("?")],
     lambda p: ((chain_steps(p, cat="Y", color="C", terminal="unique")
                 + chain_steps(p, cat="Y2", color="C2", terminal="unique") + [("relate", "R")]
                 + chain_steps(p, cat="Y3", base=False, terminal="unique")
                 + [("hyper_relate", "H")])
                + chain_steps(p, cat="Y4", color="C4", mat="M4", base=False) + [("exist", None)]),
     roles=[Role("target", cat="Y4", color="C4", mat="M4"), Role("anchor", cat="Y", color="C"),
            Role("anchor2", cat="Y3"), Role("anchor2_base", cat="Y2", color="C2")],
     rel_slots=["R"], hyper_slot="H", bool_answer=True)

_add("hyper_two_hop_query_color", "hyper_two_hop", "query_color",
     ["what color is the", S("M4", "material", opt=True), S("Y4", "category"),
      S("H", "hyper_relation"), "the", S("C", "color", opt=True), S("Y", "category"),
      "than the", S("Y3", "category"), S("R", "relation"), "the",
      S("C2", "color", opt=True), S("Y2", "category"), Punct("?")],
     lambda p: ((chain_steps(p, cat="Y", color="C", terminal="unique")
                 + chain_steps(p, cat="Y2", color="C2", terminal="unique") + [("relate", "R")]
                 + chain_steps(p, cat="Y3", base=False, terminal="unique")
                 + [("hyper_relate", "H")])
                + chain_steps(p, cat="Y4", mat="M4", base=False)
                + [("unique", None), ("query_color", None)]),
     roles=[Role("target", cat="Y4", mat="M4"), Role("anchor", cat="Y", color="C"),
            Role("anchor2", cat="Y3"), Role("anchor2_base", cat="Y2", color="C2")],
     rel_slots=["R"], hyper_slot="H")

_add("hyper_two_hop_grasp", "hyper_two_hop", "grasp",
     ["grasp the", S("C4", "color", opt=True), S("Y4", "category"),
      S("H", "hyper_relation"), "the", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), "than the", S("Y3", "category"), S("R", "relation"), "the",
      S("C2", "color", opt=True), S("Y2", "category"), Punct(".")],
     lambda p: (_hth_base(p)
                + chain_steps(p, cat="Y4", color="C4", base=False)
                + [("unique", None), ("grasp", None)]),
     roles=[Role("target", cat="Y4", color="C4"), _HTH_A, _HTH_A2_MID, _HTH_A2_ANCHOR],
     rel_slots=["R"], hyper_slot="H")

# --- single_and -------------------------------------------------------------

_SA_A1 = Role("anchor", cat="Y", color="C", mat="M", loc="L")
_SA_A2 = Role("anchor2", cat="Y2", color="C2")


def _sa_base(p, a2: Role = _SA_A2):
    return (_role_chain(_SA_A1, p) + [("relate", "R")]
            + _role_chain(a2, p, terminal="auto") + [("relate", "R2"), ("and", None)])


_add("single_and_ref", "single_and", "ref",
     ["where is the", S("C3", "color", opt=True), S("M3", "material", opt=True),
      S("Y3", "category"), "that is", S("R", "relation"), "the",
      S("L", "location", opt=True), S("C", "color", opt=True), S("Y", "category"),
      "and", S("R2", "relation"), "the", S("C2", "color", opt=True), S("Y2", "category"), Punct("?")],
     lambda p: (_sa_base(p) + chain_steps(p, cat="Y3", color="C3", mat="M3", base=False)
                + [("unique", None)]),
     roles=[Role("target", cat="Y3", color="C3", mat="M3"), _SA_A1, _SA_A2],
     rel_slots=["R", "R2"])

_add("single_and_grasp", "single_and", "grasp",
     ["grasp the", S("C3", "color", opt=True), S("Y3", "category"), "that is",
      S("R", "relation"), "the", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), "and", S("R2", "relation"), "the", S("X", "instance"), Punct(".")],
     lambda p: (_sa_base(p, Role("anchor2", inst="X"))
                + chain_steps(p, cat="Y3", color="C3", base=False)
                + [("unique", None), ("grasp", None)]),
     roles=[Role("target", cat="Y3", color="C3"),
            Role("anchor", cat="Y", color="C", mat="M"), Role("anchor2", inst="X")],
     rel_slots=["R", "R2"])

_add("single_and_count", "single_and", "count",
     ["how many", S("C3", "color", opt=True), S("Y3", "category", plural=True), "are",
      Opt(("both",)), S("R", "relation"), "the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("Y", "category"), "and", S("R2", "relation"), "the",
      S("C2", "color", opt=True), S("Y2", "category"), Punct("?")],
     lambda p: _sa_base(p) + chain_steps(p, cat="Y3", color="C3", base=False) + [("count", None)],
     roles=[Role("target", cat="Y3", color="C3"), _SA_A1, _SA_A2], rel_slots=["R", "R2"])

_add("single_and_exist", "single_and", "exist",
     ["is there any", S("C3", "color", opt=True), S("M3", "material", opt=True),
      S("Y3", "category"), S("R", "relation"), "the", S("C", "color", opt=True),
      S("Y", "category"), "and", S("R2", "relation"), "the", S("C2", "color", opt=True),
      S("Y2", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C", terminal="unique") + [("relate", "R")]
                + chain_steps(p, cat="Y2", color="C2", terminal="unique")
                + [("relate", "R2"), ("and", None)]
                + chain_steps(p, cat="Y3", color="C3", mat="M3", base=False) + [("exist", None)]),
     roles=[Role("target", cat="Y3", color="C3", mat="M3"), Role("anchor", cat="Y", color="C"),
            Role("anchor2", cat="Y2", color="C2")], rel_slots=["R", "R2"], bool_answer=True)

# --- single_or --------------------------------------------------------------

_add("single_or_count", "single_or", "count",
     ["how many things are", S("C", "color"), S("M", "material", opt=True), "or",
      S("C2", "color"), S("M2", "material", opt=True), Punct("?")],
     lambda p: (chain_steps(p, color="C", mat="M")
                + chain_steps(p, color="C2", mat="M2")
                + [("or", None), ("count", None)]),
     roles=[Role("branch1", color="C", mat="M"), Role("branch2", color="C2", mat="M2")])

_add("single_or_exist", "single_or", "exist",
     ["is there any object that is", S("C", "color"), S("M", "material", opt=True),
      "or", S("C2", "color"), S("M2", "material", opt=True), Punct("?")],
     lambda p: (chain_steps(p, color="C", mat="M")
                + chain_steps(p, color="C2", mat="M2")
                + [("or", None), ("exist", None)]),
     roles=[Role("branch1", color="C", mat="M"), Role("branch2", color="C2", mat="M2")],
     bool_answer=True)

_add("single_or_ref", "single_or", "ref",
     ["where is the", S("Y", "category"), "that is", S("C", "color"), "or",
      S("C2", "color"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y")
                + chain_steps(p, color="C") + chain_steps(p, color="C2")
                + [("or", None), ("and", None), ("unique", None)]),
     roles=[Role("target", cat="Y"), Role("branch1", color="C"), Role("branch2", color="C2")])

_add("single_or_count_rel", "single_or", "count",
     ["how many", S("C", "color"), S("M", "material", opt=True), "or", S("C2", "color"),
      S("M2", "material", opt=True), "things are", S("R", "relation"), "the",
      S("L", "location", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", loc="L", terminal="auto") + [("relate", "R")]
                + chain_steps(p, color="C", mat="M")
                + chain_steps(p, color="C2", mat="M2")
                + [("or", None), ("and", None), ("count", None)]),
     roles=[Role("anchor", cat="Y", loc="L"), Role("branch1", color="C", mat="M"),
            Role("branch2", color="C2", mat="M2")], rel_slots=["R"])

# --- same_relate ------------------------------------------------------------

_add("same_relate_count", "same_relate", "count",
     ["how many other objects have the same color as the", S("L", "location", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", mat="M", loc="L", terminal="auto")
                + [("same_color", None), ("count", None)]),
     roles=[Role("anchor", cat="Y", mat="M", loc="L")])

_add("same_relate_exist", "same_relate", "exist",
     ["is there another object of the same category as the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("M", "material", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C", mat="M", loc="L", terminal="auto")
                + [("same_category", None), ("exist", None)]),
     roles=[Role("anchor", cat="Y", color="C", mat="M", loc="L")], bool_answer=True)

_add("same_relate_grasp", "same_relate", "grasp",
     ["grasp the", S("L2", "location", opt=True), S("M2", "material", opt=True),
      "object that has the same color as the", S("X", "instance"), Punct(".")],
     lambda p: (chain_steps(p, inst="X", terminal="unique")
                + [("same_color", None)]
                + chain_steps(p, mat="M2", base=False, loc="L2", terminal="auto")
                + [("grasp", None)]),
     roles=[Role("target", mat="M2", loc="L2"), Role("anchor", inst="X")])

_add("same_relate_query_material", "same_relate", "query_material",
     ["what material is the", S("Y2", "category"), "that has the same color as the",
      S("L", "location", opt=True), S("C", "color", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C", loc="L", terminal="auto")
                + [("same_color", None)]
                + chain_steps(p, cat="Y2", base=False, terminal="unique")
                + [("query_material", None)]),
     roles=[Role("target", cat="Y2"), Role("anchor", cat="Y", color="C", loc="L")])

_add("same_relate_ref", "same_relate", "ref",
     ["where is the object with the same material as the", S("L", "location", opt=True),
      S("C", "color", opt=True), S("Y", "category"), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C", loc="L", terminal="auto")
                + [("same_material", None), ("unique", None)]),
     roles=[Role("anchor", cat="Y", color="C", loc="L")])

# --- compare_integer --------------------------------------------------------


def _ci(p, op):
    return (chain_steps(p, cat="Y", color="C", mat="M") + [("count", None)]
            + chain_steps(p, cat="Y2", color="C2", mat="M2") + [("count", None), (op, None)])


_add("compare_integer_more", "compare_integer", "compare",
     ["are there more", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category", plural=True), "than", S("C2", "color", opt=True),
      S("M2", "material", opt=True), S("Y2", "category", plural=True), Punct("?")],
     lambda p: _ci(p, "greater"),
     roles=[Role("branch1", cat="Y", color="C", mat="M"),
            Role("branch2", cat="Y2", color="C2", mat="M2")], bool_answer=True)

_add("compare_integer_fewer", "compare_integer", "compare",
     ["are there fewer", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category", plural=True), "than", S("C2", "color", opt=True),
      S("M2", "material", opt=True), S("Y2", "category", plural=True), Punct("?")],
     lambda p: _ci(p, "less"),
     roles=[Role("branch1", cat="Y", color="C", mat="M"),
            Role("branch2", cat="Y2", color="C2", mat="M2")], bool_answer=True)

_add("compare_integer_equal", "compare_integer", "compare",
     ["is the number of", S("C", "color", opt=True), S("Y", "category", plural=True),
      "the same as the number of", S("C2", "color", opt=True),
      S("Y2", "category", plural=True), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C") + [("count", None)]
                + chain_steps(p, cat="Y2", color="C2") + [("count", None), ("equal_integer", None)]),
     roles=[Role("branch1", cat="Y", color="C"), Role("branch2", cat="Y2", color="C2")],
     bool_answer=True)

_add("compare_integer_equal2", "compare_integer", "compare",
     ["are there an equal number of", S("C", "color", opt=True),
      S("Y", "category", plural=True), "and", S("C2", "color", opt=True),
      S("Y2", "category", plural=True), Punct("?")],
     lambda p: (chain_steps(p, cat="Y", color="C") + [("count", None)]
                + chain_steps(p, cat="Y2", color="C2") + [("count", None), ("equal_integer", None)]),
     roles=[Role("branch1", cat="Y", color="C"), Role("branch2", cat="Y2", color="C2")],
     bool_answer=True)

# --- comparison -------------------------------------------------------------


def _cp(p, a: Role, b: Role, query: str, equal: str):
    return (_role_chain(a, p) + [(query, None)]
            + _role_chain(b, p, terminal="auto") + [(query, None), (equal, None)])


_add("comparison_color", "comparison", "compare",
     ["do the", S("L", "location", opt=True), S("M", "material", opt=True), S("Y", "category"),
      "and the", S("M2", "material", opt=True), S("Y2", "category"),
      "have the same color", Punct("?")],
     lambda p: _cp(p, Role("a", cat="Y", mat="M", loc="L"), Role("b", cat="Y2", mat="M2"),
                   "query_color", "equal_color"),
     roles=[Role("a", cat="Y", mat="M", loc="L"), Role("b", cat="Y2", mat="M2")],
     bool_answer=True)

_add("comparison_material", "comparison", "compare",
     ["do the", S("L", "location", opt=True), S("C", "color", opt=True), S("Y", "category"),
      "and the", S("C2", "color", opt=True), S("Y2", "category"),
      "have the same material", Punct("?")],
     lambda p: _cp(p, Role("a", cat="Y", color="C", loc="L"), Role("b", cat="Y2", color="C2"),
                   "query_material", "equal_material"),
     roles=[Role("a", cat="Y", color="C", loc="L"), Role("b", cat="Y2", color="C2")],
     bool_answer=True)

_add("comparison_category", "comparison", "compare",
     ["are the", S("L", "location", opt=True), S("C", "color"), S("M", "material", opt=True),
      "thing and the", S("C2", "color"), S("M2", "material", opt=True),
      "thing the same category", Punct("?")],
     lambda p: _cp(p, Role("a", color="C", mat="M", loc="L"), Role("b", color="C2", mat="M2"),
                   "query_category", "equal_category"),
     roles=[Role("a", color="C", mat="M", loc="L"), Role("b", color="C2", mat="M2")],
     bool_answer=True)

_add("comparison_color2", "comparison", "compare",
     ["is the", S("L", "location", opt=True), S("M", "material", opt=True), S("Y", "category"),
      "the same color as the", S("M2", "material", opt=True), S("Y2", "category"), Punct("?")],
     lambda p: _cp(p, Role("a", cat="Y", mat="M", loc="L"), Role("b", cat="Y2", mat="M2"),
                   "query_color", "equal_color"),
     roles=[Role("a", cat="Y", mat="M", loc="L"), Role("b", cat="Y2", mat="M2")],
     bool_answer=True)

# --- return -----------------------------------------------------------------

_RT = Role("target", cat="Y", color="C", mat="M", loc="L")


def _rt_skel(p):
    return chain_steps(p, cat="Y", color="C", mat="M", loc="L", terminal="auto") + [("grasp", None)]


_add("return_grab", "return", "grasp",
     ["grab the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("M", "material", opt=True), S("Y", "category"), Punct(".")],
     _rt_skel, roles=[_RT])

_add("return_pick_up", "return", "grasp",
     ["pick up the", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), S("L", "location", opt=True, form="postnominal"), Punct(".")],
     _rt_skel, roles=[_RT])

_add("return_give", "return", "grasp",
     ["give me the", S("L", "location", opt=True), S("C", "color", opt=True),
      S("Y", "category"), Punct(".")],
     lambda p: chain_steps(p, cat="Y", color="C", loc="L", terminal="auto") + [("grasp", None)],
     roles=[Role("target", cat="Y", color="C", loc="L")])

_add("return_fetch", "return", "grasp",
     ["fetch the", S("C", "color", opt=True), S("M", "material", opt=True),
      S("Y", "category"), Punct(".")],
     lambda p: chain_steps(p, cat="Y", color="C", mat="M", terminal="unique") + [("grasp", None)],
     roles=[Role("target", cat="Y", color="C", mat="M")])

# --- pick_place -------------------------------------------------------------

_PP_PICK = Role("pick", cat="Y", color="C", mat="M", loc="L")
_PP_REF = Role("ref", cat="Y2", color="C2", mat="M2")


def _pp_skel(p, pick: Role = _PP_PICK, ref: Role = _PP_REF):
    return (_role_chain(pick, p) + _role_chain(ref, p, terminal="auto")
            + [("pick_and_place", "R")])


_add("pick_place_pick", "pick_place", "pick_place",
     ["pick the", S("C", "color", opt=True), S("M", "material", opt=True), S("Y", "category"),
      "and place it", S("R", "relation"), "the", S("C2", "color", opt=True),
      S("M2", "material", opt=True), S("Y2", "category"), Punct(".")],
     lambda p: _pp_skel(p, Role("pick", cat="Y", color="C", mat="M"),
                        Role("ref", cat="Y2", color="C2", mat="M2")),
     roles=[Role("pick", cat="Y", color="C", mat="M"), Role("ref", cat="Y2", color="C2", mat="M2")],
     rel_slots=["R"])

_add("pick_place_put", "pick_place", "pick_place",
     ["put the", S("L", "location", opt=True), S("C", "color", opt=True), S("Y", "category"),
      S("R", "relation"), "the", S("C2", "color", opt=True), S("Y2", "category"), Punct(".")],
     lambda p: _pp_skel(p, Role("pick", cat="Y", color="C", loc="L"),
                        Role("ref", cat="Y2", color="C2")),
     roles=[Role("pick", cat="Y", color="C", loc="L"), Role("ref", cat="Y2", color="C2")],
     rel_slots=["R"])

_add("pick_place_move", "pick_place", "pick_place",
     ["move the", S("C", "color", opt=True), S("Y", "category"), S("R", "relation"),
      "the", S("X", "instance"), Punct(".")],
     lambda p: _pp_skel(p, Role("pick", cat="Y", color="C"), Role("ref", inst="X")),
     roles=[Role("pick", cat="Y", color="C"), Role("ref", inst="X")], rel_slots=["R"])

# --- sort_by_reference ------------------------------------------------------


def _sb_skel(p, group: Role, container: Role):
    return (_role_chain(group, p, terminal=None)
            + _role_chain(container, p, terminal="auto") + [("sort", None)])


_add("sort_by_reference_all", "sort_by_reference", "sort",
     ["sort all", S("C", "color", opt=True), S("Y", "category", plural=True), "into the",
      S("C2", "color", opt=True), S("Y2", "category"), Punct(".")],
     lambda p: _sb_skel(p, Role("group", cat="Y", color="C"), Role("container", cat="Y2", color="C2")),
     roles=[Role("group", cat="Y", color="C"), Role("container", cat="Y2", color="C2")])

_add("sort_by_reference_color", "sort_by_reference", "sort",
     ["put all the", S("C", "color"), S("M", "material", opt=True), "things in the",
      S("Y2", "category"), Punct(".")],
     lambda p: _sb_skel(p, Role("group", color="C", mat="M"), Role("container", cat="Y2")),
     roles=[Role("group", color="C", mat="M"), Role("container", cat="Y2")])

_add("sort_by_reference_material", "sort_by_reference", "sort",
     ["place every", S("M", "material"), "object into the", S("C2", "color", opt=True),
      S("Y2", "category"), Punct(".")],
     lambda p: _sb_skel(p, Role("group", mat="M"), Role("container", cat="Y2", color="C2")),
     roles=[Role("group", mat="M"), Role("container", cat="Y2", color="C2")])


TEMPLATES: tuple[TaskTemplate, ...] = tuple(_T)


# ---------------------------------------------------------------------------
# compiled grammar


@dataclass
class Grammar:
    templates: tuple[TaskTemplate, ...]
    expansions: dict[tuple[str, ...], Expansion]
    by_template: dict[str, list[Expansion]]

    def by_family(self, family: str) -> list[TaskTemplate]:
        return [t for t in self.templates if t.family == family]

    def template(self, template_id: str) -> TaskTemplate:
        for t in self.templates:
            if t.template_id == template_id:
                return t
        raise KeyError(template_id)


def build_grammar(templates: tuple[TaskTemplate, ...] = TEMPLATES) -> Grammar:
    expansions: dict[tuple[str, ...], Expansion] = {}
    by_template: dict[str, list[Expansion]] = {}
    for t in templates:
        exps = _expansions(t)
        by_template[t.template_id] = exps
        for e in exps:
            if e.key in expansions:
                other = expansions[e.key]
                raise ValueError(
                    f"ambiguous pattern {' '.join(e.key)!r}: "
                    f"{other.template_id} vs {e.template_id}")
            expansions[e.key] = e
    return Grammar(templates, expansions, by_template)


_GRAMMAR: Grammar | None = None


def get_grammar() -> Grammar:
    global _GRAMMAR
    if _GRAMMAR is None:
        _GRAMMAR = build_grammar()
    return _GRAMMAR


def grammar_to_json(grammar: Grammar) -> str:
    """Serializable view of the compiled grammar (for interchange/debugging)."""
    doc = []
    for t in grammar.templates:
        doc.append({
            "template_id": t.template_id,
            "family": t.family,
            "task": t.task,
            "bool_answer": t.bool_answer,
            "expansions": [
                {
                    "tokens": list(e.tokens),
                    "slot_positions": e.slot_positions,
                    "slot_kinds": e.slot_kinds,
                    "steps": [{"op": op, "slot": slot} for op, slot in e.steps],
                }
                for e in grammar.by_template[t.template_id]
            ],
        })
    return json.dumps(doc, indent=1)
