"""Grounding scores: how well an object matches a concept.

A Grounder returns scores in [0, 1]; the executor treats >= 0.5 as a hit
for relational predicates and applies a within-margin-of-max rule for
attribute filters. The oracle grounder reads ground-truth labels and the
geometric predicates directly, which keeps every downstream behavior exact
and makes perception faults injectable by wrapping it.
"""
from __future__ import annotations

from .concepts import ATTRIBUTE_TYPES, ConceptMemory, canonical_key, load_memory
from .errors import UnknownConcept
from .relations import (DEFAULT_THRESHOLDS, HYPER_RELATIONS, RELATIONS,
                        RelationThresholds, hyper_zeta, zeta)
from .scene import SceneGraph


class Grounder:
    """Interface; implementations may be learned, oracle, or perturbed."""

    def attr_score(self, scene: SceneGraph, n: int, attr_type: str, concept: str) -> float:
        raise NotImplementedError

    def rel_score(self, scene: SceneGraph, n: int, m: int, relation: str) -> float:
        raise NotImplementedError

    def hyper_score(self, scene: SceneGraph, n: int, m: int, k: int, relation: str) -> float:
        raise NotImplementedError


class OracleGrounder(Grounder):
    def __init__(self, memory: ConceptMemory | None = None,
                 thresholds: RelationThresholds = DEFAULT_THRESHOLDS):
        self.memory = memory or load_memory()
        self.thresholds = thresholds

    def _canonical(self, attr_type: str, concept: str) -> str:
        if attr_type not in ATTRIBUTE_TYPES:
            raise UnknownConcept(concept, f"unknown attribute type {attr_type!r}")
        if concept in self.memory.values[attr_type]:
            return concept
        # accept any synonym whose reading matches the requested type
        key = canonical_key(concept)
        for kind, value in self.memory.lexicon.get(key, ()):
            if kind == attr_type:
                return value
        raise UnknownConcept(concept, f"not a {attr_type}")

    def attr_score(self, scene: SceneGraph, n: int, attr_type: str, concept: str) -> float:
        value = self._canonical(attr_type, concept)
        label = scene.object(n).label(attr_type)
        return 1.0 if label == value else 0.0

    def rel_score(self, scene: SceneGraph, n: int, m: int, relation: str) -> float:
        if relation not in RELATIONS:
            raise UnknownConcept(relation, "not a relation")
        return 1.0 if zeta(scene, relation, n, m, self.thresholds) else 0.0

    def hyper_score(self, scene: SceneGraph, n: int, m: int, k: int, relation: str) -> float:
        if relation not in HYPER_RELATIONS:
            raise UnknownConcept(relation, "not a hyper relation")
        return 1.0 if hyper_zeta(scene, relation, n, m, k) else 0.0


class MemoGrounder(Grounder):
    """Caches every score for one execution; with a stochastic wrapper this
    also pins each queried score to a single consistent value."""

    def __init__(self, base: Grounder):
        self.base = base
        self._cache: dict[tuple, float] = {}

    def _get(self, key: tuple, compute) -> float:
        if key not in self._cache:
            self._cache[key] = compute()
        return self._cache[key]

    def attr_score(self, scene, n, attr_type, concept):
        return self._get(("a", n, attr_type, concept),
                         lambda: self.base.attr_score(scene, n, attr_type, concept))

    def rel_score(self, scene, n, m, relation):
        return self._get(("r", n, m, relation),
                         lambda: self.base.rel_score(scene, n, m, relation))

    def hyper_score(self, scene, n, m, k, relation):
        return self._get(("h", n, m, k, relation),
                         lambda: self.base.hyper_score(scene, n, m, k, relation))
