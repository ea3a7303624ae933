"""Command line interface."""
from __future__ import annotations

import json
import os
import sys

import click

from .concepts import load_memory
from .datagen import (DatasetConfig, GraspConfig, generate_dataset,
                      generate_grasp_splits, load_dataset, save_dataset,
                      save_grasp_splits)
from .errors import TnsrError
from .eval import evaluate_dataset
from .executor import ExecConfig, execute, restructure_with_feedback, trace_to_dict
from .grounding import OracleGrounder
from .parser import Lexicon, parse_detailed, tag
from .programs import linearize, to_text, tokens_to_dicts
from .relations import DATAGEN_THRESHOLDS
from .rng import substream
from .scene import SamplerConfig, parse_scene, sample_scene, scene_to_dict
from .templates import get_grammar


def _data_dir(given: str | None) -> str:
    return given or os.environ.get("TNSR_DATA_DIR", "data")


def _dump(doc: dict) -> None:
    click.echo(json.dumps(doc, indent=1, sort_keys=False))


@click.group()
def main() -> None:
    """Tabletop scenes, reasoning programs, datasets, and a query service."""


@main.command("gen-scenes")
@click.option("--count", default=10, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--split", default="alternate",
              type=click.Choice(["alternate", "scattered", "crowded"]), show_default=True)
@click.option("--n-min", default=5, show_default=True)
@click.option("--n-max", default=8, show_default=True)
@click.option("--out", default=None, help="Output directory [default: $TNSR_DATA_DIR/scenes].")
def gen_scenes(count: int, seed: int, split: str, n_min: int, n_max: int, out: str | None):
    """Sample scene graphs and write one JSON file per scene."""
    memory = load_memory()
    out_dir = out or os.path.join(_data_dir(None), "scenes")
    os.makedirs(out_dir, exist_ok=True)
    made = 0
    index = 0
    while made < count and index < count * 20:
        tag_ = split if split != "alternate" else ("scattered" if index % 2 == 0 else "crowded")
        scene_seed = int(substream(seed, 7, index).integers(2 ** 31))
        index += 1
        try:
            scene = sample_scene(SamplerConfig(n_range=(n_min, n_max), split=tag_),
                                 scene_seed, memory)
        except TnsrError:
            continue
        path = os.path.join(out_dir, f"scene_{made:03d}.json")
        with open(path, "w") as fh:
            json.dump(scene_to_dict(scene), fh, separators=(",", ":"))
            fh.write("\n")
        made += 1
    if made < count:
        raise click.ClickException(f"sampled only {made}/{count} scenes")
    click.echo(f"wrote {made} scenes to {out_dir}")


@main.command("gen-dataset")
@click.option("--scenes", default=100, show_default=True)
@click.option("--per-family", default=6, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default=None, help="Output directory [default: $TNSR_DATA_DIR/dataset].")
def gen_dataset(scenes: int, per_family: int, seed: int, out: str | None):
    """Generate the question dataset with annotated programs and answers."""
    out_dir = out or os.path.join(_data_dir(None), "dataset")
    cfg = DatasetConfig(master_seed=seed, num_scenes=scenes, per_family=per_family)
    ds = generate_dataset(cfg)
    save_dataset(ds, out_dir)
    click.echo(f"wrote {len(ds.samples)} samples over {len(ds.scenes)} scenes to {out_dir}")


@main.command("gen-grasp-splits")
@click.option("--seed", default=0, show_default=True)
@click.option("--scenes-per-split", default=10, show_default=True)
@click.option("--per-scene", default=5, show_default=True)
@click.option("--out", default=None, help="Output directory [default: $TNSR_DATA_DIR/grasp].")
def gen_grasp_splits(seed: int, scenes_per_split: int, per_scene: int, out: str | None):
    """Generate the four grasp instruction splits."""
    out_dir = out or os.path.join(_data_dir(None), "grasp")
    cfg = GraspConfig(master_seed=seed, scenes_per_split=scenes_per_split,
                      per_scene=per_scene)
    splits = generate_grasp_splits(cfg)
    save_grasp_splits(splits, out_dir)
    total = sum(len(p["instructions"]) for p in splits.values())
    click.echo(f"wrote {total} instructions across {len(splits)} splits to {out_dir}")


@main.command("parse")
@click.argument("text")
@click.option("--explain", is_flag=True, help="Show tags, template, and slot assignment.")
@click.option("--json", "as_json", is_flag=True)
def parse_cmd(text: str, explain: bool, as_json: bool):
    """Parse a question into a reasoning program."""
    memory = load_memory()
    lexicon = Lexicon(memory)
    try:
        result = parse_detailed(text, lexicon, get_grammar())
    except TnsrError as err:
        raise click.ClickException(f"{type(err).__name__}: {err}")
    tokens = linearize(result.program)
    if as_json:
        doc = {"text": text, "template_id": result.template_id,
               "program": tokens_to_dicts(tokens)}
        if explain:
            doc["spans"] = [{"kind": s.kind, "value": s.value, "surface": s.surface}
                            for s in result.tagged.spans]
            doc["assignment"] = [
                {"step": result.matrix.rows[row],
                 "span": result.matrix.cols[col]}
                for row, col in result.assignment.pairs]
        _dump(doc)
        return
    if explain:
        click.echo("tokens: " + " ".join(result.tagged.tokens))
        click.echo("tags:   " + " ".join(result.tagged.tags))
        for span in result.tagged.spans:
            click.echo(f"  span {span.kind}={span.value!r} at {span.start}..{span.end}")
        click.echo(f"template: {result.template_id}")
        for row, col in result.assignment.pairs:
            step = result.matrix.rows[row]
            span = result.tagged.spans[result.matrix.cols[col]]
            click.echo(f"  step {step} <- {span.kind} {span.value!r}")
    click.echo(to_text(result.program))


@main.command("exec")
@click.argument("text")
@click.option("--scene", "scene_path", required=True, type=click.Path(exists=True))
@click.option("--trace", "show_trace", is_flag=True, help="Print every step.")
@click.option("--json", "as_json", is_flag=True)
def exec_cmd(text: str, scene_path: str, show_trace: bool, as_json: bool):
    """Parse a question and execute it against a scene file."""
    memory = load_memory()
    lexicon = Lexicon(memory)
    with open(scene_path) as fh:
        scene = parse_scene(fh.read(), memory)
    try:
        result = parse_detailed(text, lexicon, get_grammar())
    except TnsrError as err:
        raise click.ClickException(f"{type(err).__name__}: {err}")
    grounder = OracleGrounder(memory, DATAGEN_THRESHOLDS)
    trace = execute(result.program, scene, grounder,
                    ExecConfig(thresholds=DATAGEN_THRESHOLDS), memory)
    doc = trace_to_dict(trace)
    if as_json:
        _dump(doc)
        return
    if show_trace:
        for step in doc["steps"]:
            concept = f" {step['concept']!r}" if "concept" in step else ""
            click.echo(f"  [{step['index']}] {step['op']}{concept} -> {step['output']}")
    if trace.status == "success":
        click.echo(f"answer: {json.dumps(doc['answer'])}")
    else:
        click.echo(f"failure: {json.dumps(doc['failure'])}")
        sys.exit(1)


@main.command("eval")
@click.option("--data", "data_dir", default=None,
              help="Dataset directory [default: $TNSR_DATA_DIR/dataset].")
@click.option("--flip-rate", default=0.0, show_default=True,
              help="Evaluate under a noisy grounder that flips predicates.")
@click.option("--flip-seed", default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def eval_cmd(data_dir: str | None, flip_rate: float, flip_seed: int, as_json: bool):
    """Score parse fidelity and answer accuracy over a saved dataset."""
    from numpy.random import default_rng

    from .faults import FlippingGrounder

    memory = load_memory()
    ds = load_dataset(data_dir or os.path.join(_data_dir(None), "dataset"))
    grounder = None
    if flip_rate > 0:
        grounder = FlippingGrounder(OracleGrounder(memory, DATAGEN_THRESHOLDS),
                                    default_rng(flip_seed), rate=flip_rate)
    report = evaluate_dataset(ds, memory, grounder=grounder)
    if as_json:
        _dump(report.to_dict())
    else:
        click.echo(report.table())


@main.command("repl")
@click.option("--scene", "scene_path", default=None, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True,
              help="Sample a fresh scene when no file is given.")
def repl(scene_path: str | None, seed: int):
    """Interactive loop: ask questions, give feedback after clarifications."""
    memory = load_memory()
    lexicon = Lexicon(memory)
    grammar = get_grammar()
    grounder = OracleGrounder(memory, DATAGEN_THRESHOLDS)
    config = ExecConfig(thresholds=DATAGEN_THRESHOLDS)
    if scene_path:
        with open(scene_path) as fh:
            scene = parse_scene(fh.read(), memory)
    else:
        scene = sample_scene(SamplerConfig(), seed, memory)
    for obj in scene.objects:
        click.echo(f"  {obj.id}: {obj.color} {obj.material} {obj.category}")
    pending = None

    def tagger(text, _memory):
        return tag(text, lexicon)

    while True:
        try:
            line = click.prompt("tnsr", prompt_suffix="> ")
        except (EOFError, click.Abort):
            break
        line = line.strip()
        if not line:
            continue
        if line in (":q", ":quit", ":exit"):
            break
        try:
            if pending is not None:
                program = restructure_with_feedback(pending[0], pending[1], line,
                                                    memory, tagger)
                pending = None
            else:
                program = parse_detailed(line, lexicon, grammar).program
        except TnsrError as err:
            click.echo(f"  !{type(err).__name__}: {err}")
            pending = None
            continue
        trace = execute(program, scene, grounder, config, memory)
        doc = trace_to_dict(trace)
        if trace.status == "success":
            pending = None
            click.echo(f"  = {json.dumps(doc['answer'])}")
            continue
        click.echo(f"  !{doc['failure']['kind']}: {doc['failure']['message']}")
        cands = doc["failure"].get("payload", {}).get("candidates")
        if trace.failure.kind == "IllPosed" and cands:
            pending = (program, trace.failure)
            names = "; ".join(
                f"{scene.object(n).color} {scene.object(n).category} ({n})" for n in cands)
            click.echo(f"  which one: {names}?")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--scene-dir", default=None, type=click.Path(exists=True),
              help="Serve scenes from *.json files instead of a sampled bank.")
@click.option("--seed", default=0, show_default=True)
def serve(host: str, port: int, scene_dir: str | None, seed: int):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    app = create_app(scene_dir=scene_dir, seed=seed)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
