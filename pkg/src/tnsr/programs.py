"""Typed reasoning programs: signatures, trees, linear form, text form.

A program is a tree of primitive calls. The linear form used in dataset
files and by the template grammar is a depth-first, left-to-right token
sequence where each chain starts with its own `scene` token; replaying the
sequence with a stack reconstructs the tree (binary primitives pop their
left operand, a non-initial `scene` pushes the current chain).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from .errors import MalformedSequence, ProgramSyntaxError

OBJ_SET = "ObjSet"
OBJ = "Obj"
INT = "Int"
BOOL = "Bool"
ACTION = "Action"


def concept_type(attr: str) -> str:
    return f"Concept:{attr}"


@dataclass(frozen=True)
class Signature:
    params: tuple[str, ...]
    returns: str
    concept_kind: str | None = None  # tag type admissible for the concept slot

    @property
    def arity(self) -> int:
        return len(self.params)


SIGNATURES: dict[str, Signature] = {
    "scene": Signature((), OBJ_SET),
    "unique": Signature((OBJ_SET,), OBJ),
    "filter_category": Signature((OBJ_SET,), OBJ_SET, "category"),
    "filter_color": Signature((OBJ_SET,), OBJ_SET, "color"),
    "filter_material": Signature((OBJ_SET,), OBJ_SET, "material"),
    "filter_instance": Signature((OBJ_SET,), OBJ_SET, "instance"),
    "query_category": Signature((OBJ,), concept_type("category")),
    "query_color": Signature((OBJ,), concept_type("color")),
    "query_material": Signature((OBJ,), concept_type("material")),
    "same_category": Signature((OBJ,), OBJ_SET),
    "same_color": Signature((OBJ,), OBJ_SET),
    "same_material": Signature((OBJ,), OBJ_SET),
    "relate": Signature((OBJ,), OBJ_SET, "relation"),
    "locate": Signature((OBJ_SET,), OBJ, "location"),
    "hyper_relate": Signature((OBJ, OBJ), OBJ_SET, "hyper_relation"),
    "and": Signature((OBJ_SET, OBJ_SET), OBJ_SET),
    "or": Signature((OBJ_SET, OBJ_SET), OBJ_SET),
    "exist": Signature((OBJ_SET,), BOOL),
    "count": Signature((OBJ_SET,), INT),
    "equal_integer": Signature((INT, INT), BOOL),
    "greater": Signature((INT, INT), BOOL),
    "less": Signature((INT, INT), BOOL),
    "equal_category": Signature((concept_type("category"), concept_type("category")), BOOL),
    "equal_color": Signature((concept_type("color"), concept_type("color")), BOOL),
    "equal_material": Signature((concept_type("material"), concept_type("material")), BOOL),
    "grasp": Signature((OBJ,), ACTION),
    "pick_and_place": Signature((OBJ, OBJ), ACTION, "relation"),
    "sort": Signature((OBJ_SET, OBJ), ACTION),
}

ACTION_PRIMITIVES = tuple(name for name, sig in SIGNATURES.items() if sig.returns == ACTION)

_INT_LITERAL = "int_literal"  # produced by the text grammar, rejected by typecheck


@dataclass
class Node:
    op: str
    concept: str | None = None
    children: list["Node"] = field(default_factory=list)

    def walk(self) -> Iterator["Node"]:
        for child in self.children:
            yield from child.walk()
        yield self

    def copy(self) -> "Node":
        return Node(self.op, self.concept, [c.copy() for c in self.children])


def scene_node() -> Node:
    return Node("scene")


def chain(*steps: tuple[str, str | None] | str, base: Node | None = None) -> Node:
    """Build a unary chain bottom-up from (op, concept) steps on a base."""
    cur = base or scene_node()
    for step in steps:
        op, concept = step if isinstance(step, tuple) else (step, None)
        cur = Node(op, concept, [cur])
    return cur


# ---------------------------------------------------------------------------
# type checking


@dataclass
class TypeReport:
    ok: bool
    root_type: str | None
    errors: list[str]


def infer_type(node: Node) -> str | None:
    sig = SIGNATURES.get(node.op)
    return sig.returns if sig else None


def typecheck(program: Node, memory=None) -> TypeReport:
    """Validate ops, arities, child types, concept slots, and the rule that
    action primitives appear only at the root."""
    errors: list[str] = []

    def visit(node: Node, path: str, is_root: bool) -> str | None:
        if node.op == _INT_LITERAL:
            errors.append(f"{path}: integer literals are not executable subprograms")
            return INT
        sig = SIGNATURES.get(node.op)
        if sig is None:
            errors.append(f"{path}: unknown primitive {node.op!r}")
            return None
        if not is_root and sig.returns == ACTION:
            errors.append(f"{path}: action primitive {node.op!r} allowed only at the root")
        if len(node.children) != sig.arity:
            errors.append(f"{path}: {node.op} expects {sig.arity} arguments, got {len(node.children)}")
        if sig.concept_kind is None and node.concept is not None:
            errors.append(f"{path}: {node.op} takes no concept argument")
        if sig.concept_kind is not None:
            if node.concept is None:
                errors.append(f"{path}: {node.op} requires a {sig.concept_kind} concept")
            elif memory is not None and node.concept not in memory.values.get(sig.concept_kind, ()):
                errors.append(f"{path}: {node.concept!r} is not a known {sig.concept_kind}")
        for i, child in enumerate(node.children[: sig.arity]):
            got = visit(child, f"{path}.{node.op}[{i}]", False)
            want = sig.params[i]
            if got is not None and got != want:
                errors.append(f"{path}.{node.op}[{i}]: expected {want}, got {got}")
        return sig.returns

    root_type = visit(program, "$", True)
    return TypeReport(ok=not errors, root_type=root_type, errors=errors)


# ---------------------------------------------------------------------------
# linear form


def linearize(program: Node) -> list[tuple[str, str | None]]:
    tokens: list[tuple[str, str | None]] = []

    def emit(node: Node) -> None:
        for child in node.children:
            emit(child)
        tokens.append((node.op, node.concept))

    emit(program)
    return tokens


def delinearize(tokens) -> Node:
    """Replay a linear token sequence into a tree; raises MalformedSequence."""
    stack: list[Node] = []
    cur: Node | None = None
    toks = [t if isinstance(t, tuple) else (t, None) for t in tokens]
    if not toks:
        raise MalformedSequence(0, "empty sequence")
    for i, (op, concept) in enumerate(toks):
        if op == "scene":
            if concept is not None:
                raise MalformedSequence(i, "scene takes no concept")
            if cur is not None:
                stack.append(cur)
            cur = scene_node()
            continue
        sig = SIGNATURES.get(op)
        if sig is None:
            raise MalformedSequence(i, f"unknown primitive {op!r}")
        if sig.arity == 0:
            raise MalformedSequence(i, f"{op} cannot continue a chain")
        if cur is None:
            raise MalformedSequence(i, "chain must start with scene")
        if sig.arity == 1:
            cur = Node(op, concept, [cur])
        else:
            if not stack:
                raise MalformedSequence(i, f"{op} needs a second operand on the stack")
            left = stack.pop()
            cur = Node(op, concept, [left, cur])
    if stack:
        raise MalformedSequence(len(toks), f"{len(stack)} unconsumed operand(s) left on the stack")
    return cur


def tokens_to_dicts(tokens) -> list[dict]:
    out = []
    for op, concept in tokens:
        rec = {"op": op}
        if concept is not None:
            rec["concept"] = concept
        out.append(rec)
    return out


def tokens_from_dicts(records) -> list[tuple[str, str | None]]:
    return [(r["op"], r.get("concept")) for r in records]


# ---------------------------------------------------------------------------
# text form


def to_text(program: Node) -> str:
    parts = [to_text(c) for c in program.children]
    if program.op == _INT_LITERAL:
        return program.concept or "0"
    if program.concept is not None:
        parts.append(f"'{program.concept}'")
    return f"{program.op}({','.join(parts)})"


_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*|-?\d+|'[^']*'|\"[^\"]*\"|[(),]|\S")


def parse_text(text: str) -> Node:
    """Parse program text; raises ProgramSyntaxError with line/column."""
    tokens: list[tuple[str, int, int]] = []
    for ln, line in enumerate(text.splitlines() or [""], start=1):
        for m in _TOKEN_RE.finditer(line):
            tokens.append((m.group(), ln, m.start() + 1))
    pos = 0

    def here() -> tuple[int, int]:
        if pos < len(tokens):
            return tokens[pos][1], tokens[pos][2]
        if tokens:
            t, ln, col = tokens[-1]
            return ln, col + len(t)
        return 1, 1

    def fail(msg: str):
        ln, col = here()
        raise ProgramSyntaxError(ln, col, msg)

    def peek() -> str | None:
        return tokens[pos][0] if pos < len(tokens) else None

    def take(expected: str | None = None) -> str:
        nonlocal pos
        if pos >= len(tokens):
            fail(f"unexpected end of input" + (f", expected {expected!r}" if expected else ""))
        tok = tokens[pos][0]
        if expected is not None and tok != expected:
            fail(f"expected {expected!r}, got {tok!r}")
        pos += 1
        return tok

    def call() -> Node:
        tok = peek()
        if tok is None:
            fail("expected a primitive call")
        if re.fullmatch(r"-?\d+", tok):
            take()
            return Node(_INT_LITERAL, tok)
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            fail(f"expected a primitive name, got {tok!r}")
        name = take()
        take("(")
        children: list[Node] = []
        concept: str | None = None
        if peek() != ")":
            while True:
                tok = peek()
                if tok is not None and tok[0] in "'\"":
                    if concept is not None:
                        fail("at most one concept argument per call")
                    concept = take()[1:-1]
                else:
                    if concept is not None:
                        fail("concept argument must come last")
                    children.append(call())
                if peek() == ",":
                    take(",")
                    continue
                break
        take(")")
        return Node(name, concept, children)

    node = call()
    if pos != len(tokens):
        fail("trailing input after program")
    return node


def describe_chain(node: Node) -> str:
    """Short human phrase for a referent chain, e.g. "red soda"."""
    by_kind: dict[str, str] = {}
    cur: Node | None = node
    while cur is not None:
        sig = SIGNATURES.get(cur.op)
        if cur.op.startswith("filter_") and cur.concept and sig and sig.concept_kind:
            by_kind.setdefault(sig.concept_kind, cur.concept.replace("_", " "))
        cur = cur.children[0] if cur.children else None
    words = [by_kind[k] for k in ("color", "material", "category", "instance") if k in by_kind]
    return " ".join(words) if words else "object"
