"""Tabletop scene graphs, typed reasoning programs, and grasping dialogue."""
from .concepts import ConceptMemory, load_memory
from .errors import (DegenerateTriple, Infeasible, InvalidObjectId,
                     MalformedSequence, NoNewConcepts, NoTemplateMatch,
                     ProgramSyntaxError, QuotaUnmet, SamplingExhausted,
                     SchemaError, SelfRelation, TnsrError, UnknownConcept)
from .executor import (ExecConfig, ExecutionTrace, classify_failure, execute,
                       restructure_with_feedback, trace_to_dict)
from .grounding import Grounder, OracleGrounder
from .parser import Lexicon, ParseResult, parse, parse_detailed, tag
from .programs import (Node, delinearize, linearize, parse_text, to_text,
                       typecheck)
from .relations import (DATAGEN_THRESHOLDS, DEFAULT_THRESHOLDS,
                        RelationThresholds)
from .scene import (SamplerConfig, SceneGraph, parse_scene, sample_scene,
                    scene_to_dict)
from .templates import Grammar, build_grammar, get_grammar

__version__ = "0.1.0"

__all__ = [
    "ConceptMemory", "load_memory",
    "TnsrError", "SamplingExhausted", "SchemaError", "InvalidObjectId",
    "SelfRelation", "DegenerateTriple", "UnknownConcept", "MalformedSequence",
    "ProgramSyntaxError", "NoTemplateMatch", "Infeasible", "NoNewConcepts",
    "QuotaUnmet",
    "ExecConfig", "ExecutionTrace", "execute", "classify_failure",
    "restructure_with_feedback", "trace_to_dict",
    "Grounder", "OracleGrounder",
    "Lexicon", "ParseResult", "parse", "parse_detailed", "tag",
    "Node", "linearize", "delinearize", "parse_text", "to_text", "typecheck",
    "RelationThresholds", "DEFAULT_THRESHOLDS", "DATAGEN_THRESHOLDS",
    "SamplerConfig", "SceneGraph", "sample_scene", "parse_scene", "scene_to_dict",
    "Grammar", "build_grammar", "get_grammar",
    "__version__",
]
