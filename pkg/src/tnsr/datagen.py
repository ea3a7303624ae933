"""Dataset synthesis: scenes, questions, annotated programs, answers.

Generation is scene driven. A filler picks concrete objects first and
derives slot values from their labels, so referents are guaranteed to
exist; uniqueness is established by widening a designator (more
attributes, or a location) until exactly one object survives. Every
candidate question is then executed against the scene and kept only if the
run succeeds and the answer is informative (non-zero counts, balanced
booleans, distinct comparisons).
"""
from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass

from .concepts import ConceptMemory, load_memory, pluralize
from .errors import QuotaUnmet, SamplingExhausted
from .executor import ExecConfig, ExecutionTrace, exec_value_to_dict, execute
from .grounding import OracleGrounder
from .programs import Node, delinearize, linearize, tokens_to_dicts
from .relations import (DATAGEN_THRESHOLDS, DIRECTIONAL, HYPER_RELATIONS, RELATIONS,
                        RelationThresholds, hyper_zeta, location_score, zeta)
from .rng import substream
from .scene import SamplerConfig, SceneGraph, scene_to_dict, parse_scene, sample_scene
from .templates import (FAMILIES, GRASP_COMPLEX_FAMILIES, GRASP_SIMPLE_FAMILIES,
                        Expansion, Grammar, Role, Slot, TaskTemplate, get_grammar)

FILL_ATTEMPTS = 50  # per (scene, sub-template) instantiation budget


# ---------------------------------------------------------------------------
# surface rendering


def _choice(rng, items):
    return items[int(rng.integers(len(items)))]


def _surface(memory: ConceptMemory, slot: Slot, value: str, rng) -> str:
    if slot.kind == "location":
        forms = memory.location_forms[value][slot.form]
        if not forms:
            forms = memory.location_forms[value]["attributive"]
        return _choice(rng, forms)
    pool = list(memory.surfaces[(slot.kind, value)])
    if slot.kind == "relation":
        pool = [s for s in pool if s not in ("left", "right")] or pool
    return _choice(rng, pool)


def render(expansion: Expansion, values: dict[str, str], memory: ConceptMemory, rng) -> str:
    """Render an expansion with bound slot values into a natural question."""
    words: list[str] = []
    for el in expansion.elements:
        if isinstance(el, str):
            words.extend(el.split())
        elif isinstance(el, Slot):
            surface = _surface(memory, el, values[el.name], rng)
            if el.plural:
                surface = pluralize(surface)
            words.extend(surface.split())
        else:  # Punct
            if words:
                words[-1] += el.text
    text = " ".join(words)
    return text[0].upper() + text[1:] if text else text


def build_program(expansion: Expansion, values: dict[str, str]) -> Node:
    tokens = [(op, values[slot] if slot else None) for op, slot in expansion.steps]
    return delinearize(tokens)


# ---------------------------------------------------------------------------
# scene inspection for fillers


class SceneIndex:
    """Cached label/relation lookups over one scene."""

    def __init__(self, scene: SceneGraph, memory: ConceptMemory,
                 thresholds: RelationThresholds):
        self.scene = scene
        self.memory = memory
        self.thresholds = thresholds
        self.ids = list(scene.ids())
        self._relate: dict[tuple[int, str], frozenset] = {}
        self._hyper: dict[tuple[str, int, int], frozenset] = {}

    def label(self, n: int, kind: str) -> str | None:
        return self.scene.object(n).label(kind)

    def match(self, attrs: dict[str, str], base=None) -> frozenset:
        pool = self.ids if base is None else base
        out = set()
        for n in pool:
            if all(self.label(n, k) == v for k, v in attrs.items()):
                out.add(n)
        return frozenset(out)

    def relate_set(self, anchor: int, rel: str) -> frozenset:
        key = (anchor, rel)
        if key not in self._relate:
            self._relate[key] = frozenset(
                n for n in self.ids if n != anchor
                and zeta(self.scene, rel, n, anchor, self.thresholds))
        return self._relate[key]

    def hyper_set(self, rel: str, m1: int, m2: int) -> frozenset:
        key = (rel, m1, m2)
        if key not in self._hyper:
            self._hyper[key] = frozenset(
                n for n in self.ids if n not in (m1, m2)
                and hyper_zeta(self.scene, rel, n, m1, m2))
        return self._hyper[key]

    def locate_winner(self, cands: frozenset, loc: str) -> int | None:
        if not cands:
            return None
        return max(sorted(cands),
                   key=lambda n: (location_score(self.scene, loc, n, cands,
                                                 self.thresholds), -n))

    def shuffled(self, rng, items=None) -> list[int]:
        # sort first so set inputs can't leak iteration-order nondeterminism
        pool = sorted(self.ids if items is None else items)
        rng.shuffle(pool)
        return pool


def _attr_values(idx: SceneIndex, n: int, role: Role, present) -> dict[str, str] | None:
    """Slot values taken from an object's labels; None if a label is missing."""
    out: dict[str, str] = {}
    for kind, slot in role.attr_slots():
        if slot in present:
            label = idx.label(n, kind)
            if label is None:
                return None
            out[slot] = label
    return out


def _attrs_of(values: dict[str, str], role: Role, present) -> dict[str, str]:
    return {kind: values[slot] for kind, slot in role.attr_slots() if slot in present}


def _loc_values(memory: ConceptMemory, form: str) -> list[str]:
    return [rel for rel, forms in memory.location_forms.items() if forms.get(form)]


def _slot_form(expansion: Expansion, name: str) -> str:
    for el in expansion.elements:
        if isinstance(el, Slot) and el.name == name:
            return el.form
    return "attributive"


def unique_designator(idx: SceneIndex, n: int, role: Role, present, rng,
                      expansion: Expansion, base=None) -> dict[str, str] | None:
    """Slot values under which the role's chain resolves to exactly object n."""
    values = _attr_values(idx, n, role, present)
    if values is None:
        return None
    cands = idx.match(_attrs_of(values, role, present), base=base)
    if n not in cands:
        return None
    if role.loc and role.loc in present:
        form = _slot_form(expansion, role.loc)
        for loc in idx.shuffled(rng, _loc_values(idx.memory, form)):
            if idx.locate_winner(cands, loc) == n:
                values[role.loc] = loc
                return values
        return None
    return values if cands == frozenset({n}) else None


def pick_unique(idx: SceneIndex, role: Role, present, rng, expansion: Expansion,
                exclude=(), base=None):
    """Pick an object the role can designate uniquely; (id, values) or None."""
    pool = idx.shuffled(rng) if base is None else idx.shuffled(rng, base)
    for n in pool:
        if n in exclude:
            continue
        values = unique_designator(idx, n, role, present, rng, expansion, base=base)
        if values is not None:
            return n, values
    return None


def resolve_in(idx: SceneIndex, role: Role, present, rng, expansion: Expansion,
               base, exclude=()):
    """Like pick_unique but candidates restricted to an upstream result set."""
    for n in idx.shuffled(rng, base):
        if n in exclude:
            continue
        values = unique_designator(idx, n, role, present, rng, expansion, base=base)
        if values is not None:
            return n, values
    return None


def _absent_combo(idx: SceneIndex, role: Role, present, rng) -> dict[str, str] | None:
    """Slot values matching no object at all (for negative existence)."""
    memory = idx.memory
    for _ in range(30):
        values: dict[str, str] = {}
        for kind, slot in role.attr_slots():
            if slot in present:
                values[slot] = _choice(rng, memory.values[kind])
        if not values:
            return None
        if not idx.match(_attrs_of(values, role, present)):
            return values
    return None


def _combo_counts(idx: SceneIndex, role: Role, present) -> Counter:
    counts: Counter = Counter()
    for n in idx.ids:
        values = _attr_values(idx, n, role, present)
        if values is not None:
            counts[tuple(sorted(values.items()))] += 1
    return counts


def _rels(rng) -> list[str]:
    rels = list(RELATIONS)
    rng.shuffle(rels)
    return rels


def _want_order(want: bool | None, rng) -> list[bool]:
    """Truth values to try: pinned if requested, else random order."""
    if want is not None:
        return [want]
    first = bool(rng.integers(2))
    return [first, not first]


def _hypers(rng) -> list[str]:
    h = list(HYPER_RELATIONS)
    rng.shuffle(h)
    return h


# ---------------------------------------------------------------------------
# target completion over a candidate set (shared by the hop families)


def _fill_target(idx: SceneIndex, t: TaskTemplate, expansion: Expansion, rng,
                 cands: frozenset, want: bool | None) -> dict[str, str] | None:
    """Choose target-role values over a precomputed candidate set."""
    role = t.role("target")
    present = expansion.present
    if not cands and t.task not in ("exist",):
        return None
    if t.task == "count":
        for n in idx.shuffled(rng, cands):
            values = _attr_values(idx, n, role, present)
            if values is not None:
                return values
        return None
    if t.task == "exist":
        for attempt_want in _want_order(want, rng):
            if attempt_want:
                for n in idx.shuffled(rng, cands):
                    values = _attr_values(idx, n, role, present)
                    if values is not None:
                        return values
            else:
                values = _negative_target(idx, role, present, rng, cands)
                if values is not None:
                    return values
        return None
    # query/ref/grasp: designator must resolve uniquely inside the set
    hit = resolve_in(idx, role, present, rng, expansion, cands)
    return hit[1] if hit else None


def _negative_target(idx: SceneIndex, role: Role, present, rng,
                     cands: frozenset) -> dict[str, str] | None:
    """Values that match nothing inside cands (but ideally exist elsewhere)."""
    outside = [n for n in idx.ids if n not in cands]
    picks = idx.shuffled(rng, outside)
    for n in picks:
        values = _attr_values(idx, n, role, present)
        if values is None:
            continue
        if not (idx.match(_attrs_of(values, role, present)) & cands):
            return values
    for _ in range(20):
        values = {}
        for kind, slot in role.attr_slots():
            if slot in present:
                values[slot] = _choice(rng, idx.memory.values[kind])
        if values and not (idx.match(_attrs_of(values, role, present)) & cands):
            return values
    return None


# ---------------------------------------------------------------------------
# per-family fillers: (template, expansion, index, rng, want) -> values | None


def fill_zero_hop(t, expansion, idx, rng, want):
    role = t.role("target")
    present = expansion.present
    if t.task == "count":
        for n in idx.shuffled(rng):
            values = _attr_values(idx, n, role, present)
            if values is not None:
                return values
        return None
    if t.task == "exist":
        for attempt_want in _want_order(want, rng):
            if attempt_want:
                for n in idx.shuffled(rng):
                    values = _attr_values(idx, n, role, present)
                    if values is not None:
                        return values
            else:
                values = _absent_combo(idx, role, present, rng)
                if values is not None:
                    return values
        return None
    hit = pick_unique(idx, role, present, rng, expansion)
    return hit[1] if hit else None


def fill_one_hop(t, expansion, idx, rng, want):
    present = expansion.present
    anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
    if anchor is None:
        return None
    a, avals = anchor
    for rel in _rels(rng):
        cands = idx.relate_set(a, rel)
        if not cands and t.task != "exist":
            continue
        tvals = _fill_target(idx, t, expansion, rng, cands, want)
        if tvals is not None:
            return {**avals, **tvals, "R": rel}
    return None


def fill_two_hop(t, expansion, idx, rng, want):
    present = expansion.present
    anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
    if anchor is None:
        return None
    a, avals = anchor
    mid_role = t.role("mid")
    for rel in _rels(rng):
        s1 = idx.relate_set(a, rel)
        if not s1:
            continue
        mid = resolve_in(idx, mid_role, present, rng, expansion, s1)
        if mid is None:
            continue
        m, mvals = mid
        for rel2 in _rels(rng):
            cands = idx.relate_set(m, rel2)
            if not cands and t.task != "exist":
                continue
            tvals = _fill_target(idx, t, expansion, rng, cands, want)
            if tvals is not None:
                return {**avals, **mvals, **tvals, "R": rel, "R2": rel2}
    return None


def fill_hyper_one_hop(t, expansion, idx, rng, want):
    present = expansion.present
    anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
    if anchor is None:
        return None
    a, avals = anchor
    second = pick_unique(idx, t.role("anchor2"), present, rng, expansion, exclude={a})
    if second is None:
        return None
    b, bvals = second
    for h in _hypers(rng):
        cands = idx.hyper_set(h, a, b)
        if not cands and t.task != "exist":
            continue
        tvals = _fill_target(idx, t, expansion, rng, cands, want)
        if tvals is not None:
            return {**avals, **bvals, **tvals, "H": h}
    return None


def fill_hyper_two_hop(t, expansion, idx, rng, want):
    present = expansion.present
    anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
    if anchor is None:
        return None
    a, avals = anchor
    base2 = pick_unique(idx, t.role("anchor2_base"), present, rng, expansion, exclude={a})
    if base2 is None:
        return None
    b0, b0vals = base2
    for rel in _rels(rng):
        s1 = idx.relate_set(b0, rel)
        if not s1:
            continue
        mid = resolve_in(idx, t.role("anchor2"), present, rng, expansion, s1, exclude={a})
        if mid is None:
            continue
        m, mvals = mid
        for h in _hypers(rng):
            cands = idx.hyper_set(h, a, m)
            if not cands and t.task != "exist":
                continue
            tvals = _fill_target(idx, t, expansion, rng, cands, want)
            if tvals is not None:
                return {**avals, **b0vals, **mvals, **tvals, "R": rel, "H": h}
    return None


def fill_single_and(t, expansion, idx, rng, want):
    present = expansion.present
    anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
    if anchor is None:
        return None
    a1, v1 = anchor
    second = pick_unique(idx, t.role("anchor2"), present, rng, expansion, exclude={a1})
    if second is None:
        return None
    a2, v2 = second
    combos = [(r1, r2) for r1 in RELATIONS for r2 in RELATIONS]
    rng.shuffle(combos)
    for r1, r2 in combos[:40]:
        cands = idx.relate_set(a1, r1) & idx.relate_set(a2, r2)
        cands = cands - {a1, a2}
        if not cands and t.task != "exist":
            continue
        tvals = _fill_target(idx, t, expansion, rng, cands, want)
        if tvals is not None:
            return {**v1, **v2, **tvals, "R": r1, "R2": r2}
    return None


def _branch_values(idx, role, present, n):
    return _attr_values(idx, n, role, present)


def fill_single_or(t, expansion, idx, rng, want):
    present = expansion.present
    b1 = t.role("branch1") if any(r.name == "branch1" for r in t.roles) else None
    if t.template_id == "single_or_ref":
        target = t.role("target")
        for n in idx.shuffled(rng):
            cat = idx.label(n, "category")
            color = idx.label(n, "color")
            peers = idx.match({"category": cat})
            colors = list(idx.memory.values["color"])
            rng.shuffle(colors)
            for c2 in colors:
                if c2 == color:
                    continue
                hits = {m for m in peers if idx.label(m, "color") in (color, c2)}
                if hits == {n}:
                    return {"Y": cat, "C": color, "C2": c2}
        return None
    if t.template_id == "single_or_count_rel":
        anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
        if anchor is None:
            return None
        a, avals = anchor
        for rel in _rels(rng):
            cands = idx.relate_set(a, rel)
            if len(cands) < 1:
                continue
            vals = _or_branches(idx, t, present, rng, cands)
            if vals is not None:
                return {**avals, **vals, "R": rel}
        return None
    # plain or-count / or-exist over the whole scene
    if t.task == "exist":
        for attempt_want in _want_order(want, rng):
            if attempt_want:
                vals = _or_branches(idx, t, present, rng, frozenset(idx.ids))
            else:
                vals = _or_absent(idx, t, present, rng)
            if vals is not None:
                return vals
        return None
    return _or_branches(idx, t, present, rng, frozenset(idx.ids))


def _or_absent(idx, t, present, rng):
    for _ in range(30):
        vals: dict[str, str] = {}
        ok = True
        for role_name in ("branch1", "branch2"):
            combo = _absent_combo(idx, t.role(role_name), present, rng)
            if combo is None:
                ok = False
                break
            vals.update(combo)
        if ok and vals.get("C") != vals.get("C2"):
            return vals
    return None


def _or_branches(idx, t, present, rng, pool):
    """Distinct color branches drawn from objects inside pool."""
    picks = idx.shuffled(rng, pool)
    for i, n1 in enumerate(picks):
        v1 = _branch_values(idx, t.role("branch1"), present, n1)
        if v1 is None:
            continue
        for n2 in picks[i + 1:]:
            if idx.label(n2, "color") == idx.label(n1, "color"):
                continue
            v2raw = _branch_values(idx, t.role("branch2"), present, n2)
            if v2raw is None:
                continue
            return {**v1, **v2raw}
    return None


def fill_same_relate(t, expansion, idx, rng, want):
    present = expansion.present
    if t.template_id == "same_relate_grasp":
        anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
        if anchor is None:
            return None
        a, avals = anchor
        peers = frozenset(n for n in idx.ids if n != a
                          and idx.label(n, "color") == idx.label(a, "color"))
        if not peers:
            return None
        hit = resolve_in(idx, t.role("target"), present, rng, expansion, peers)
        if hit is None:
            return None
        return {**avals, **hit[1]}
    if t.template_id == "same_relate_query_material":
        anchor = pick_unique(idx, t.role("anchor"), present, rng, expansion)
        if anchor is None:
            return None
        a, avals = anchor
        peers = frozenset(n for n in idx.ids if n != a
                          and idx.label(n, "color") == idx.label(a, "color"))
        hit = resolve_in(idx, t.role("target"), present, rng, expansion, peers)
        if hit is None:
            return None
        return {**avals, **hit[1]}
    if t.template_id == "same_relate_ref":
        for n in idx.shuffled(rng):
            peers = [m for m in idx.ids if m != n
                     and idx.label(m, "material") == idx.label(n, "material")]
            if len(peers) != 1:
                continue
            values = unique_designator(idx, n, t.role("anchor"), present, rng, expansion)
            if values is not None:
                return values
        return None
    if t.template_id == "same_relate_exist":
        for attempt_want in _want_order(want, rng):
            for n in idx.shuffled(rng):
                dup = any(m != n and idx.label(m, "category") == idx.label(n, "category")
                          for m in idx.ids)
                if dup != attempt_want:
                    continue
                values = unique_designator(idx, n, t.role("anchor"), present, rng, expansion)
                if values is not None:
                    return values
        return None
    # same_relate_count
    hit = pick_unique(idx, t.role("anchor"), present, rng, expansion)
    return hit[1] if hit else None


def fill_compare_integer(t, expansion, idx, rng, want):
    present = expansion.present
    r1, r2 = t.role("branch1"), t.role("branch2")
    c1 = _combo_counts(idx, r1, present)
    c2 = _combo_counts(idx, r2, present)
    op = {"compare_integer_more": "gt", "compare_integer_fewer": "lt"}.get(t.template_id, "eq")
    pairs = [(k1, k2) for k1 in c1 for k2 in c2]
    rng.shuffle(pairs)
    for attempt_want in _want_order(want, rng):
        for k1, k2 in pairs:
            v1 = {slot: val for slot, val in k1}
            v2 = {slot: val for slot, val in k2}
            if _attrs_same(v1, v2, r1, r2, present):
                continue
            n1, n2 = c1[k1], c2[k2]
            truth = {"gt": n1 > n2, "lt": n1 < n2, "eq": n1 == n2}[op]
            if truth != attempt_want:
                continue
            return {**v1, **v2}
    return None


def _attrs_same(v1, v2, r1: Role, r2: Role, present) -> bool:
    a1 = {k: v1[s] for k, s in r1.attr_slots() if s in present}
    a2 = {k: v2[s] for k, s in r2.attr_slots() if s in present}
    return a1 == a2


def fill_comparison(t, expansion, idx, rng, want):
    present = expansion.present
    attr = next(op.removeprefix("query_") for op, _ in expansion.steps
                if op.startswith("query_"))
    ra = t.role("a")
    rb = t.role("b")
    objs = idx.shuffled(rng)
    for attempt_want in _want_order(want, rng):
        for o1 in objs:
            for o2 in objs:
                if o1 == o2:
                    continue
                truth = idx.label(o1, attr) == idx.label(o2, attr)
                if truth != attempt_want:
                    continue
                v1 = unique_designator(idx, o1, ra, present, rng, expansion)
                if v1 is None:
                    continue
                v2 = unique_designator(idx, o2, rb, present, rng, expansion)
                if v2 is None:
                    continue
                return {**v1, **v2}
    return None


def fill_return(t, expansion, idx, rng, want):
    hit = pick_unique(idx, t.role("target"), expansion.present, rng, expansion)
    return hit[1] if hit else None


def fill_pick_place(t, expansion, idx, rng, want):
    present = expansion.present
    picked = pick_unique(idx, t.role("pick"), present, rng, expansion)
    if picked is None:
        return None
    po, pvals = picked
    ref = pick_unique(idx, t.role("ref"), present, rng, expansion, exclude={po})
    if ref is None:
        return None
    _, rvals = ref
    rels = [r for r in DIRECTIONAL]
    rng.shuffle(rels)
    return {**pvals, **rvals, "R": rels[0]}


def fill_sort(t, expansion, idx, rng, want):
    present = expansion.present
    containers = [n for n in idx.ids
                  if idx.memory.objects[idx.label(n, "category")].container]
    if not containers:
        return None
    cont = resolve_in(idx, t.role("container"), present, rng, expansion,
                      frozenset(idx.ids), exclude=set(idx.ids) - set(containers))
    if cont is None:
        return None
    co, cvals = cont
    group = t.role("group")
    for n in idx.shuffled(rng):
        if n == co:
            continue
        gvals = _attr_values(idx, n, group, present)
        if gvals is None:
            continue
        members = idx.match(_attrs_of(gvals, group, present)) - {co}
        if members:
            return {**cvals, **gvals}
    return None


FILLERS = {
    "zero_hop": fill_zero_hop,
    "one_hop": fill_one_hop,
    "two_hop": fill_two_hop,
    "hyper_one_hop": fill_hyper_one_hop,
    "hyper_two_hop": fill_hyper_two_hop,
    "single_and": fill_single_and,
    "single_or": fill_single_or,
    "same_relate": fill_same_relate,
    "compare_integer": fill_compare_integer,
    "comparison": fill_comparison,
    "return": fill_return,
    "pick_place": fill_pick_place,
    "sort_by_reference": fill_sort,
}


# ---------------------------------------------------------------------------
# instantiation with execution-backed validation


@dataclass
class Sample:
    sample_id: str
    scene_id: str
    family: str
    template_id: str
    question: str
    program: list[dict]
    answer: dict
    seed: int

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id, "scene_id": self.scene_id,
            "family": self.family, "template_id": self.template_id,
            "question": self.question, "program": self.program,
            "answer": self.answer, "seed": self.seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "Sample":
        return Sample(d["sample_id"], d["scene_id"], d["family"], d["template_id"],
                      d["question"], d["program"], d["answer"], d["seed"])


def answer_payload(value, scene: SceneGraph) -> dict:
    d = exec_value_to_dict(value)
    if value.kind == "object":
        obj = scene.object(value.value)
        d["box"] = {"center": list(obj.box.center), "extents": list(obj.box.extents)}
    return d


def instantiate(scene: SceneGraph, template: TaskTemplate, rng, *,
                memory: ConceptMemory | None = None, grammar: Grammar | None = None,
                thresholds: RelationThresholds = DATAGEN_THRESHOLDS,
                want: bool | None = None, seen: set | None = None,
                attempts: int = FILL_ATTEMPTS, lexicon=None):
    """Try to realize one template on a scene; (text, program, trace, values) or None."""
    from .parser import Lexicon, tag

    memory = memory or load_memory()
    grammar = grammar or get_grammar()
    lexicon = lexicon or Lexicon(memory)
    idx = SceneIndex(scene, memory, thresholds)
    expansions = grammar.by_template[template.template_id]
    config = ExecConfig(thresholds=thresholds)
    grounder = OracleGrounder(memory, thresholds)
    filler = FILLERS[template.family]
    for _ in range(attempts):
        expansion = expansions[int(rng.integers(len(expansions)))]
        values = filler(template, expansion, idx, rng, want)
        if values is None:
            continue
        text = render(expansion, values, memory, rng)
        if seen is not None and text in seen:
            continue
        # reject renders whose surface form would not abstract back to this
        # very pattern (e.g. an ambiguous word read as another concept kind)
        if tag(text, lexicon).abstract() != expansion.key:
            continue
        program = build_program(expansion, values)
        trace = execute(program, scene, grounder, config, memory)
        if trace.status != "success":
            continue
        if not _informative(template, trace, want):
            continue
        if seen is not None:
            seen.add(text)
        return text, program, trace, values
    return None


_NONZERO_COUNT_FAMILIES = {"zero_hop", "one_hop", "two_hop", "hyper_one_hop",
                           "hyper_two_hop", "single_and", "single_or"}


def _informative(template: TaskTemplate, trace: ExecutionTrace,
                 want: bool | None) -> bool:
    answer = trace.answer
    if template.task == "count" and template.family in _NONZERO_COUNT_FAMILIES:
        return answer.value >= 1
    if template.bool_answer and want is not None:
        return answer.value is want
    return True


# ---------------------------------------------------------------------------
# dataset assembly


@dataclass(frozen=True)
class DatasetConfig:
    master_seed: int = 0
    num_scenes: int = 100
    per_family: int = 6
    families: tuple[str, ...] = FAMILIES
    n_range: tuple[int, int] = (5, 8)
    thresholds: RelationThresholds = DATAGEN_THRESHOLDS
    strict: bool = True        # raise QuotaUnmet instead of under-filling
    scene_attempts: int = 8    # resample budget when a scene starves a family


@dataclass
class Dataset:
    scenes: dict[str, SceneGraph]
    samples: list[Sample]
    stats: dict


def _scene_seed(master_seed: int, index: int, retry: int) -> int:
    return int(substream(master_seed, 1, index, retry).integers(2 ** 31))


def _sample_one_scene(cfg: DatasetConfig, index: int, retry: int,
                      memory: ConceptMemory) -> SceneGraph:
    split = "scattered" if index % 2 == 0 else "crowded"
    sampler = SamplerConfig(n_range=cfg.n_range, split=split)
    return sample_scene(sampler, _scene_seed(cfg.master_seed, index, retry), memory)


class _Balance:
    """Per-scene boolean answer balance across families."""

    def __init__(self):
        self.true_n = 0
        self.false_n = 0

    def want(self, rng) -> bool:
        if self.true_n < self.false_n:
            return True
        if self.false_n < self.true_n:
            return False
        return bool(rng.integers(2))

    def record(self, value: bool):
        if value:
            self.true_n += 1
        else:
            self.false_n += 1


def generate_scene_batch(cfg: DatasetConfig, index: int, memory: ConceptMemory,
                         grammar: Grammar, lexicon=None) -> tuple[SceneGraph, list[Sample]] | None:
    """All family quotas for one scene, or None if the scene can't support them."""
    from .parser import Lexicon

    lexicon = lexicon or Lexicon(memory)
    for retry in range(cfg.scene_attempts):
        try:
            scene = _sample_one_scene(cfg, index, retry, memory)
        except SamplingExhausted:
            continue
        scene_id = f"scene_{index:05d}"
        rng = substream(cfg.master_seed, 2, index, retry)
        balance = _Balance()
        seen: set[str] = set()
        samples: list[Sample] = []
        ok = True
        for family in cfg.families:
            got = _fill_family(cfg, scene, scene_id, family, rng, memory, grammar,
                               balance, seen, samples, lexicon)
            if not got:
                ok = False
                break
        if ok:
            return scene, samples
    return None


def _fill_family(cfg: DatasetConfig, scene, scene_id, family, rng, memory, grammar,
                 balance: _Balance, seen: set, samples: list[Sample], lexicon) -> bool:
    templates = grammar.by_family(family)
    made = 0
    stall = 0
    k = 0
    while made < cfg.per_family and stall < 3 * len(templates):
        template = templates[k % len(templates)]
        k += 1
        # pin the desired truth value for balance, but stop insisting once
        # the scene has stalled a full rotation: coverage beats balance
        want = None
        if template.bool_answer and stall <= len(templates):
            want = balance.want(rng)
        hit = instantiate(scene, template, rng, memory=memory, grammar=grammar,
                          thresholds=cfg.thresholds, want=want, seen=seen,
                          lexicon=lexicon)
        if hit is None:
            stall += 1
            continue
        text, program, trace, _ = hit
        if template.bool_answer:
            balance.record(trace.answer.value)
        samples.append(Sample(
            sample_id=f"{scene_id}-{family}-{made}",
            scene_id=scene_id, family=family, template_id=template.template_id,
            question=text, program=tokens_to_dicts(linearize(program)),
            answer=answer_payload(trace.answer, scene), seed=cfg.master_seed))
        made += 1
        stall = 0
    return made >= cfg.per_family


def generate_dataset(cfg: DatasetConfig = DatasetConfig(),
                     memory: ConceptMemory | None = None) -> Dataset:
    from .parser import Lexicon

    memory = memory or load_memory()
    grammar = get_grammar()
    lexicon = Lexicon(memory)
    scenes: dict[str, SceneGraph] = {}
    samples: list[Sample] = []
    missing: list[tuple[str, str]] = []
    for index in range(cfg.num_scenes):
        got = generate_scene_batch(cfg, index, memory, grammar, lexicon)
        scene_id = f"scene_{index:05d}"
        if got is None:
            missing.append((scene_id, "all-families"))
            continue
        scene, batch = got
        scenes[scene_id] = scene
        samples.extend(batch)
    if missing and cfg.strict:
        raise QuotaUnmet(missing)
    stats = _dataset_stats(cfg, scenes, samples)
    return Dataset(scenes, samples, stats)


def _dataset_stats(cfg: DatasetConfig, scenes, samples) -> dict:
    by_family = Counter(s.family for s in samples)
    by_template = Counter(s.template_id for s in samples)
    answers = Counter(s.answer["type"] for s in samples)
    bools = Counter(str(s.answer["value"]) for s in samples if s.answer["type"] == "bool")
    return {
        "master_seed": cfg.master_seed,
        "scenes": len(scenes),
        "samples": len(samples),
        "per_family": dict(sorted(by_family.items())),
        "per_template": dict(sorted(by_template.items())),
        "answer_kinds": dict(sorted(answers.items())),
        "bool_balance": dict(sorted(bools.items())),
    }


# ---------------------------------------------------------------------------
# grasping splits


GRASP_SPLITS = (
    ("scattered_simple", "scattered", GRASP_SIMPLE_FAMILIES),
    ("crowded_simple", "crowded", GRASP_SIMPLE_FAMILIES),
    ("scattered_complex", "scattered", GRASP_COMPLEX_FAMILIES),
    ("crowded_complex", "crowded", GRASP_COMPLEX_FAMILIES),
)


@dataclass(frozen=True)
class GraspConfig:
    master_seed: int = 0
    scenes_per_split: int = 10
    per_scene: int = 5
    n_range: tuple[int, int] = (6, 8)
    thresholds: RelationThresholds = DATAGEN_THRESHOLDS
    scene_attempts: int = 40


@dataclass
class GraspInstruction:
    split: str
    scene_id: str
    instruction: str
    template_id: str
    program: list[dict]
    target_id: int
    answer: dict

    def to_dict(self) -> dict:
        return {"split": self.split, "scene_id": self.scene_id,
                "instruction": self.instruction, "template_id": self.template_id,
                "program": self.program, "target_id": self.target_id,
                "answer": self.answer}


def _grasp_templates(grammar: Grammar, families) -> list[TaskTemplate]:
    return [t for f in families for t in grammar.by_family(f) if t.task == "grasp"]


def generate_grasp_splits(cfg: GraspConfig = GraspConfig(),
                          memory: ConceptMemory | None = None) -> dict[str, dict]:
    """Four splits of scenes x grasp instructions with distinct targets."""
    from .parser import Lexicon

    memory = memory or load_memory()
    grammar = get_grammar()
    lexicon = Lexicon(memory)
    out: dict[str, dict] = {}
    for si, (name, split, families) in enumerate(GRASP_SPLITS):
        templates = _grasp_templates(grammar, families)
        scenes: dict[str, SceneGraph] = {}
        instructions: list[GraspInstruction] = []
        made = 0
        attempt = 0
        while made < cfg.scenes_per_split:
            if attempt >= cfg.scene_attempts + cfg.scenes_per_split:
                raise QuotaUnmet([(name, f"scene {made}")])
            sampler = SamplerConfig(n_range=cfg.n_range, split=split,
                                    require_distractor=True)
            seed = int(substream(cfg.master_seed, 3, si, attempt).integers(2 ** 31))
            attempt += 1
            try:
                scene = sample_scene(sampler, seed, memory)
            except SamplingExhausted:
                continue
            rng = substream(cfg.master_seed, 4, si, attempt)
            batch = _grasp_scene_batch(cfg, scene, templates, rng, memory, grammar,
                                       lexicon)
            if batch is None:
                continue
            scene_id = f"{name}_{made:03d}"
            scenes[scene_id] = scene
            for inst in batch:
                inst.split = name
                inst.scene_id = scene_id
                instructions.append(inst)
            made += 1
        out[name] = {"scenes": scenes, "instructions": instructions}
    return out


def _grasp_scene_batch(cfg: GraspConfig, scene, templates, rng, memory,
                       grammar, lexicon) -> list[GraspInstruction] | None:
    used_targets: set[int] = set()
    seen: set[str] = set()
    batch: list[GraspInstruction] = []
    order = list(templates)
    rng.shuffle(order)
    stall = 0
    while len(batch) < cfg.per_scene and stall < 4 * len(order):
        template = order[(len(batch) + stall) % len(order)]
        hit = instantiate(scene, template, rng, memory=memory, grammar=grammar,
                          thresholds=cfg.thresholds, seen=seen, lexicon=lexicon)
        if hit is None:
            stall += 1
            continue
        text, program, trace, _ = hit
        target = trace.answer.value["object_id"]
        if target in used_targets:
            stall += 1
            continue
        used_targets.add(target)
        batch.append(GraspInstruction(
            split="", scene_id="", instruction=text, template_id=template.template_id,
            program=tokens_to_dicts(linearize(program)), target_id=target,
            answer=answer_payload(trace.answer, scene)))
        stall = 0
    return batch if len(batch) == cfg.per_scene else None


# ---------------------------------------------------------------------------
# persistence


def save_dataset(ds: Dataset, out_dir: str) -> None:
    os.makedirs(os.path.join(out_dir, "scenes"), exist_ok=True)
    for scene_id, scene in sorted(ds.scenes.items()):
        path = os.path.join(out_dir, "scenes", f"{scene_id}.json")
        with open(path, "w") as fh:
            json.dump(scene_to_dict(scene), fh, separators=(",", ":"), sort_keys=False)
            fh.write("\n")
    with open(os.path.join(out_dir, "dataset.jsonl"), "w") as fh:
        for s in ds.samples:
            fh.write(json.dumps(s.to_dict(), separators=(",", ":")) + "\n")
    with open(os.path.join(out_dir, "stats.json"), "w") as fh:
        json.dump(ds.stats, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_dataset(out_dir: str) -> Dataset:
    scenes: dict[str, SceneGraph] = {}
    scene_dir = os.path.join(out_dir, "scenes")
    for name in sorted(os.listdir(scene_dir)):
        if name.endswith(".json"):
            with open(os.path.join(scene_dir, name)) as fh:
                scenes[name[:-5]] = parse_scene(fh.read())
    samples = []
    with open(os.path.join(out_dir, "dataset.jsonl")) as fh:
        for line in fh:
            if line.strip():
                samples.append(Sample.from_dict(json.loads(line)))
    stats_path = os.path.join(out_dir, "stats.json")
    stats = {}
    if os.path.exists(stats_path):
        with open(stats_path) as fh:
            stats = json.load(fh)
    return Dataset(scenes, samples, stats)


def save_grasp_splits(splits: dict[str, dict], out_dir: str) -> None:
    for name, payload in sorted(splits.items()):
        split_dir = os.path.join(out_dir, name)
        os.makedirs(os.path.join(split_dir, "scenes"), exist_ok=True)
        for scene_id, scene in sorted(payload["scenes"].items()):
            with open(os.path.join(split_dir, "scenes", f"{scene_id}.json"), "w") as fh:
                json.dump(scene_to_dict(scene), fh, separators=(",", ":"))
                fh.write("\n")
        with open(os.path.join(split_dir, "instructions.jsonl"), "w") as fh:
            for inst in payload["instructions"]:
                fh.write(json.dumps(inst.to_dict(), separators=(",", ":")) + "\n")
