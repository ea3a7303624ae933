"""Dataset evaluation: parse fidelity and answer accuracy per task column."""
from __future__ import annotations

from dataclasses import dataclass, field

from .concepts import ConceptMemory, load_memory
from .datagen import Dataset, Sample, answer_payload
from .errors import TnsrError
from .executor import ExecConfig, execute
from .grounding import Grounder, OracleGrounder
from .parser import Lexicon, parse
from .programs import linearize, tokens_to_dicts
from .relations import DATAGEN_THRESHOLDS, RelationThresholds
from .templates import get_grammar

COLUMNS = ("Count", "Exist", "Compare Number", "Compare Attribute", "Query", "REF")


def column_for(sample: Sample) -> str:
    if sample.family == "compare_integer":
        return "Compare Number"
    if sample.family == "comparison":
        return "Compare Attribute"
    kind = sample.answer["type"]
    if kind == "int":
        return "Count"
    if kind == "bool":
        return "Exist"
    if kind == "concept":
        return "Query"
    return "REF"  # object references and actions


@dataclass
class ColumnStat:
    total: int = 0
    parsed: int = 0
    answered: int = 0

    def parse_rate(self) -> float:
        return self.parsed / self.total if self.total else 0.0

    def answer_rate(self) -> float:
        return self.answered / self.total if self.total else 0.0


@dataclass
class EvalReport:
    columns: dict[str, ColumnStat] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)

    def stat(self, name: str) -> ColumnStat:
        return self.columns.setdefault(name, ColumnStat())

    @property
    def overall(self) -> ColumnStat:
        agg = ColumnStat()
        for st in self.columns.values():
            agg.total += st.total
            agg.parsed += st.parsed
            agg.answered += st.answered
        return agg

    def table(self) -> str:
        names = [c for c in COLUMNS if c in self.columns] + ["Overall"]
        rows = [("column", "n", "parse", "answer")]
        for name in names:
            st = self.overall if name == "Overall" else self.columns[name]
            rows.append((name, str(st.total), f"{st.parse_rate():.3f}",
                         f"{st.answer_rate():.3f}"))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
                 for row in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        out = {}
        for name, st in sorted(self.columns.items()):
            out[name] = {"total": st.total, "parse": st.parse_rate(),
                         "answer": st.answer_rate()}
        agg = self.overall
        out["Overall"] = {"total": agg.total, "parse": agg.parse_rate(),
                          "answer": agg.answer_rate()}
        return out


def _answers_match(expected: dict, actual: dict) -> bool:
    return expected["type"] == actual["type"] and expected["value"] == actual["value"]


def evaluate_dataset(ds: Dataset, memory: ConceptMemory | None = None,
                     grounder: Grounder | None = None,
                     thresholds: RelationThresholds = DATAGEN_THRESHOLDS) -> EvalReport:
    """Re-parse and re-execute every sample; score per column."""
    memory = memory or load_memory()
    grammar = get_grammar()
    lexicon = Lexicon(memory)
    grounder = grounder or OracleGrounder(memory, thresholds)
    config = ExecConfig(thresholds=thresholds)
    report = EvalReport()
    for sample in ds.samples:
        st = report.stat(column_for(sample))
        st.total += 1
        scene = ds.scenes[sample.scene_id]
        try:
            program = parse(sample.question, lexicon, grammar)
        except TnsrError as err:
            report.failures.append({"sample_id": sample.sample_id, "stage": "parse",
                                    "error": type(err).__name__})
            continue
        parsed_ok = tokens_to_dicts(linearize(program)) == sample.program
        if parsed_ok:
            st.parsed += 1
        trace = execute(program, scene, grounder, config, memory)
        if trace.status != "success":
            report.failures.append({"sample_id": sample.sample_id, "stage": "execute",
                                    "error": trace.failure.kind})
            continue
        if _answers_match(sample.answer, answer_payload(trace.answer, scene)):
            st.answered += 1
        else:
            report.failures.append({"sample_id": sample.sample_id, "stage": "answer",
                                    "error": "mismatch"})
    return report
