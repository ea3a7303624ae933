"""Exception types shared across the package."""
from __future__ import annotations


class TnsrError(Exception):
    """Base class for all library errors."""


class SamplingExhausted(TnsrError):
    """Scene sampler ran out of rejection attempts."""

    def __init__(self, attempts: int, message: str = ""):
        self.attempts = attempts
        super().__init__(message or f"gave up after {attempts} attempts")


class SchemaError(TnsrError):
    """A serialized document failed validation; carries the field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class InvalidObjectId(TnsrError):
    def __init__(self, object_id, scene_size: int):
        self.object_id = object_id
        super().__init__(f"object id {object_id!r} not in scene of {scene_size} objects")


class SelfRelation(TnsrError):
    def __init__(self, object_id: int):
        self.object_id = object_id
        super().__init__(f"relation arguments must be distinct, got {object_id} twice")


class DegenerateTriple(TnsrError):
    def __init__(self, ids):
        self.ids = tuple(ids)
        super().__init__(f"hyper-relation arguments must be pairwise distinct, got {self.ids}")


class UnknownConcept(TnsrError):
    def __init__(self, phrase: str, detail: str = ""):
        self.phrase = phrase
        super().__init__(f"unknown concept {phrase!r}" + (f" ({detail})" if detail else ""))


class MalformedSequence(TnsrError):
    """A linear token sequence cannot be replayed into a program tree."""

    def __init__(self, position: int, message: str):
        self.position = position
        super().__init__(f"at index {position}: {message}")


class ProgramSyntaxError(TnsrError):
    """Program text failed to parse; carries line and column (both 1-based)."""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class NoTemplateMatch(TnsrError):
    """No grammar template matches the abstracted query."""

    def __init__(self, abstracted):
        self.abstracted = tuple(abstracted)
        super().__init__("no template matches: " + " ".join(self.abstracted))


class Infeasible(TnsrError):
    """Assignment problem admits no complete matching of rows to columns."""

    def __init__(self, starved_rows):
        self.starved_rows = tuple(starved_rows)
        super().__init__(f"no admissible assignment for rows {list(self.starved_rows)}")


class NoNewConcepts(TnsrError):
    """Feedback text contained nothing resolvable that is new to the program."""

    def __init__(self, feedback: str):
        self.feedback = feedback
        super().__init__(f"no usable new concepts in feedback {feedback!r}")


class QuotaUnmet(TnsrError):
    """Dataset generation could not fill the per-scene family quotas."""

    def __init__(self, pairs):
        self.pairs = tuple(pairs)
        super().__init__("quota unmet for: " + ", ".join(f"scene {s} / {f}" for s, f in self.pairs))
