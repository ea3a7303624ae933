"""Instruction parsing: tagging, abstraction, template match, slot binding.

The pipeline is deliberately staged so each piece can be inspected:

1. ``tag`` scans the text with greedy longest-phrase matching over the
   concept lexicon and emits IOB tags plus typed spans.
2. ``match_template`` collapses each span to a type marker and looks the
   abstract token sequence up in the compiled grammar.
3. ``bind`` scores every (program step, span) pair by surface proximity and
   solves the assignment problem, then instantiates the skeleton.

Binding is global: a greedy per-step choice can grab a span needed by a
later step, the assignment solve cannot.
"""
from __future__ import annotations

from dataclasses import dataclass

from .assignment import Assignment, hungarian
from .concepts import IRREGULAR_SINGULARS, ConceptMemory, pick_reading, tokenize
from .errors import NoTemplateMatch
from .programs import Node, delinearize, typecheck
from .templates import Expansion, Grammar, get_grammar, marker

# span/tag type names by concept kind
TAG_NAMES = {
    "category": "Category",
    "color": "Color",
    "material": "Material",
    "relation": "Relation",
    "location": "Location",
    "hyper_relation": "HyperRelation",
    "instance": "Open",
}
# kinds hidden from the tagger (resolvable, but no program step consumes them)
UNTAGGED_KINDS = frozenset({"supercategory"})


@dataclass(frozen=True)
class Span:
    kind: str          # concept kind (category/.../instance)
    value: str         # canonical concept
    start: int         # token index, inclusive
    end: int           # token index, exclusive
    surface: str       # matched text, normalized

    @property
    def tag(self) -> str:
        return TAG_NAMES[self.kind]


@dataclass
class TaggedQuery:
    text: str
    tokens: list[str]
    tags: list[str]
    spans: list[Span]

    def abstract(self) -> tuple[str, ...]:
        out: list[str] = []
        by_start = {s.start: s for s in self.spans}
        i = 0
        while i < len(self.tokens):
            span = by_start.get(i)
            if span is not None:
                out.append(marker(span.kind))
                i = span.end
            else:
                out.append(self.tokens[i])
                i += 1
        return tuple(out)


class Lexicon:
    """Phrase tables derived from a concept memory, cached for scanning."""

    def __init__(self, memory: ConceptMemory):
        self.memory = memory
        self.phrases: dict[str, list[tuple[str, str]]] = {}
        for phrase, readings in memory.lexicon.items():
            kept = [r for r in readings if r[0] not in UNTAGGED_KINDS]
            if kept:
                self.phrases[phrase] = kept
        self.max_len = max(len(p.split()) for p in self.phrases)
        self.vocab = memory.vocab_words()
        self._singulars = {w for p in self.phrases for w in p.split()}

    def depluralize(self, word: str) -> str:
        if word in self._singulars:
            return word
        irregular = IRREGULAR_SINGULARS.get(word)
        if irregular is not None and irregular in self._singulars:
            return irregular
        if word.endswith("es") and word[:-2] in self._singulars:
            return word[:-2]
        if word.endswith("s") and word[:-1] in self._singulars:
            return word[:-1]
        return word

    def lookup(self, words: list[str]) -> tuple[str, list[tuple[str, str]]] | None:
        """Match a token window against the table, tolerating a plural tail."""
        phrase = " ".join(words)
        readings = self.phrases.get(phrase)
        if readings is None and words:
            singular = " ".join(words[:-1] + [self.depluralize(words[-1])])
            if singular != phrase:
                phrase, readings = singular, self.phrases.get(singular)
        if readings is None:
            return None
        return phrase, readings


def _as_lexicon(lex: Lexicon | ConceptMemory) -> Lexicon:
    return lex if isinstance(lex, Lexicon) else Lexicon(lex)


def tag(text: str, lexicon: Lexicon | ConceptMemory) -> TaggedQuery:
    """Greedy longest-match IOB tagging over the concept lexicon."""
    lex = _as_lexicon(lexicon)
    tokens = tokenize(text)
    tags = ["O"] * len(tokens)
    spans: list[Span] = []
    i = 0
    while i < len(tokens):
        hit = None
        for length in range(min(lex.max_len, len(tokens) - i), 0, -1):
            found = lex.lookup(tokens[i:i + length])
            if found is not None:
                hit = (length, *found)
                break
        if hit is None:
            i += 1
            continue
        length, phrase, readings = hit
        reading = _disambiguate(readings, tokens, i + length, lex)
        kind, value = reading
        name = TAG_NAMES[kind]
        tags[i] = f"B-{name}"
        for j in range(i + 1, i + length):
            tags[j] = f"I-{name}"
        spans.append(Span(kind, value, i, i + length, phrase))
        i += length
    return TaggedQuery(text, tokens, tags, spans)


_NOUN_CONTEXT_KINDS = ("category", "instance", "material")


def _disambiguate(readings, tokens, after, lex: Lexicon):
    if len(readings) == 1:
        return readings[0]
    next_token = tokens[after] if after < len(tokens) else None
    next_is_concept = False
    if next_token is not None:
        for length in range(min(lex.max_len, len(tokens) - after), 0, -1):
            found = lex.lookup(tokens[after:after + length])
            if found and any(k in _NOUN_CONTEXT_KINDS for k, _ in found[1]):
                next_is_concept = True
                break
    return pick_reading(readings, next_token=next_token, next_is_concept=next_is_concept)


@dataclass
class ScoreMatrix:
    """Step-to-span affinities; None marks a type-incompatible pair."""

    rows: list[int]                     # indices into expansion.steps
    cols: list[int]                     # indices into tagged.spans
    entries: list[list[float | None]]

    def solve(self) -> Assignment:
        return hungarian(self.entries)


_SLOT_TO_SPAN_KIND = {
    "category": "category",
    "color": "color",
    "material": "material",
    "instance": "instance",
    "relation": "relation",
    "location": "location",
    "hyper_relation": "hyper_relation",
}


def match_template(tagged: TaggedQuery, grammar: Grammar | None = None) -> Expansion:
    grammar = grammar or get_grammar()
    key = tagged.abstract()
    exp = grammar.expansions.get(key)
    if exp is None:
        raise NoTemplateMatch(key)
    return exp


def score_matrix(tagged: TaggedQuery, expansion: Expansion) -> ScoreMatrix:
    """Proximity scores between concept-bearing steps and tagged spans.

    Span positions are measured in the abstract token space so they line up
    with the slot positions recorded at grammar compile time.
    """
    abstract_pos: dict[int, int] = {}
    by_start = {s.start: idx for idx, s in enumerate(tagged.spans)}
    i = 0
    a = 0
    while i < len(tagged.tokens):
        if i in by_start:
            abstract_pos[by_start[i]] = a
            i = tagged.spans[by_start[i]].end
        else:
            i += 1
        a += 1
    rows = [idx for idx, (_, slot) in enumerate(expansion.steps) if slot is not None]
    cols = list(range(len(tagged.spans)))
    entries: list[list[float | None]] = []
    for r in rows:
        _, slot = expansion.steps[r]
        slot_kind = expansion.slot_kinds[slot]
        slot_pos = expansion.slot_positions[slot]
        row: list[float | None] = []
        for c in cols:
            span = tagged.spans[c]
            if _SLOT_TO_SPAN_KIND[slot_kind] != span.kind:
                row.append(None)
            else:
                row.append(1.0 / (1.0 + abs(slot_pos - abstract_pos[c])))
        entries.append(row)
    return ScoreMatrix(rows, cols, entries)


def bind(tagged: TaggedQuery, expansion: Expansion,
         memory: ConceptMemory) -> tuple[Node, ScoreMatrix, Assignment]:
    matrix = score_matrix(tagged, expansion)
    assignment = matrix.solve()
    concepts: dict[int, str] = {}
    for row, col in assignment.pairs:
        concepts[matrix.rows[row]] = tagged.spans[matrix.cols[col]].value
    tokens = [(op, concepts.get(idx)) for idx, (op, _) in enumerate(expansion.steps)]
    program = delinearize(tokens)
    report = typecheck(program, memory)
    if not report.ok:
        raise ValueError("bound program failed validation: " + "; ".join(report.errors))
    return program, matrix, assignment


@dataclass
class ParseResult:
    tagged: TaggedQuery
    expansion: Expansion
    matrix: ScoreMatrix
    assignment: Assignment
    program: Node

    @property
    def template_id(self) -> str:
        return self.expansion.template_id


def parse(text: str, lexicon: Lexicon | ConceptMemory,
          grammar: Grammar | None = None) -> Node:
    return parse_detailed(text, lexicon, grammar).program


def parse_detailed(text: str, lexicon: Lexicon | ConceptMemory,
                   grammar: Grammar | None = None) -> ParseResult:
    lex = _as_lexicon(lexicon)
    tagged = tag(text, lex)
    expansion = match_template(tagged, grammar)
    program, matrix, assignment = bind(tagged, expansion, lex.memory)
    return ParseResult(tagged, expansion, matrix, assignment, program)
