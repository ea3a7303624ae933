"""Shared fixtures: concept memory, grammar, and a hand-built scene whose
geometry makes every spatial predicate decidable by inspection."""
import pytest

from tnsr.concepts import load_memory
from tnsr.parser import Lexicon
from tnsr.relations import DATAGEN_THRESHOLDS
from tnsr.scene import (ObjectNode, SceneGraph, Workspace, make_box,
                        synthesize_grasp)
from tnsr.templates import get_grammar


def _obj(oid, category, color, material, supercategory, center, extents,
         instance=None):
    box = make_box(center, extents)
    return ObjectNode(id=oid, category=category, color=color, material=material,
                      supercategory=supercategory, instance_name=instance,
                      box=box, grasp=synthesize_grasp(box))


def build_hand_scene() -> SceneGraph:
    """Seven objects on a straight grid:

        y=0.70            laptop(4)
        y=0.40  mug(0)    mug(1)     bowl(2)
        y=0.20  sponge(5)
        y=0.10            banana(3)  soda(6 @ y=0.12)
                x=0.15    x=0.50     x=0.85
    """
    objects = (
        _obj(0, "mug", "red", "ceramic", "kitchenware", (0.15, 0.40, 0.05), (0.10, 0.10, 0.10)),
        _obj(1, "mug", "blue", "ceramic", "kitchenware", (0.50, 0.40, 0.05), (0.10, 0.10, 0.10)),
        _obj(2, "bowl", "green", "plastic", "kitchenware", (0.85, 0.40, 0.04), (0.16, 0.16, 0.08)),
        _obj(3, "banana", "yellow", "organic", "fruits", (0.50, 0.10, 0.02), (0.20, 0.04, 0.04)),
        _obj(4, "laptop", "black", "metal", "electronics", (0.50, 0.70, 0.015), (0.34, 0.24, 0.03)),
        _obj(5, "sponge", "white", "synthetic", "kitchenware", (0.15, 0.20, 0.005), (0.12, 0.12, 0.01)),
        _obj(6, "soda", "red", "aluminium", "edibles", (0.85, 0.12, 0.06), (0.06, 0.06, 0.12),
             instance="coca_cola"),
    )
    return SceneGraph(objects=objects, workspace=Workspace(), seed=777,
                      split_tag="scattered")


@pytest.fixture(scope="session")
def memory():
    return load_memory()


@pytest.fixture(scope="session")
def grammar():
    return get_grammar()


@pytest.fixture(scope="session")
def lexicon(memory):
    return Lexicon(memory)


@pytest.fixture(scope="session")
def thresholds():
    return DATAGEN_THRESHOLDS


@pytest.fixture()
def hand_scene():
    return build_hand_scene()
