"""Command line front end.

Subcommands mirror the library stages: seed synthesis, record verification,
rendering, dataset evaluation, the full pipeline, and transcript tooling
for the model gateway.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

import click

from .chaining import ChainBudget, extract_subgoals, filter_trivial, forward_chain, sample_subgoals, select_seeds
from .gateway import Gateway, GatewayConfig, MockMiss, load_transcript, prompt_hash, render_prompt, save_transcript
from .metrics import BinningError, annotation_match, bin_by_score, parse_rate, segment_f1
from .pipeline import PipelineConfig
from .pipeline import run as run_pipeline
from .plotcode import PlotCode, SchemaError, parse_plotcode
from .predicates import parse_fact
from .render import quality_check, render_png, render_svg
from .rules import load_rule_library
from .scenes import SamplingFailed, sample_scene
from .verify import DEFAULT_TOL, RecordCandidate, ToleranceConfig, verify_record


@click.group()
def main() -> None:
    """Synthesize, verify and evaluate plane-geometry problem records."""


@main.command()
@click.option("--rng-seed", type=int, required=True, help="Master seed for scene sampling.")
@click.option("--rho", type=float, default=0.2, show_default=True, help="Top-percentile fraction kept by seed selection.")
@click.option("--count", type=int, default=1, show_default=True, help="Number of scenes to draw.")
@click.option("--m-subgoals", type=int, default=8, show_default=True, help="Subgoal sample size per scene.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output JSONL path.")
def seed(rng_seed: int, rho: float, count: int, m_subgoals: int, out: str) -> None:
    """Sample scenes, run deduction, and write the selected seeds."""
    rules = load_rule_library()
    rng = random.Random(rng_seed)
    written = 0
    with open(out, "w", encoding="utf-8") as fh:
        for _ in range(count):
            scene_seed = rng.randrange(1 << 32)
            try:
                scene = sample_scene(scene_seed)
            except SamplingFailed as e:
                click.echo(f"scene {scene_seed}: {e}", err=True)
                continue
            graph = forward_chain(scene.facts, scene.witness, rules, ChainBudget())
            subgoals = filter_trivial(extract_subgoals(graph))
            subgoals = sample_subgoals(subgoals, m_subgoals, rng)
            for s in select_seeds(subgoals, rho, scene.witness):
                fh.write(json.dumps(s.to_dict(), ensure_ascii=False) + "\n")
                written += 1
    click.echo(f"wrote {written} seeds to {out}")


def _load_record(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _record_candidate(row: dict) -> RecordCandidate:
    if "plot_code" not in row:
        raise click.ClickException("input must be a record object with a plot_code field")
    pc = parse_plotcode(row["plot_code"])
    if "predicates" in row:
        texts = row["predicates"]
    elif "seed" in row:
        texts = list(row["seed"].get("premises", [])) + list(row["seed"].get("targets", []))
    else:
        texts = []
    return RecordCandidate(
        plot_code=pc,
        predicates=[parse_fact(t) for t in texts],
        kind=row.get("kind", "proof"),
        answer=row.get("answer"),
    )


@main.command()
@click.option("--in", "path", type=click.Path(exists=True, dir_okay=False), required=True, help="Record JSON file.")
@click.option("--tol", type=float, default=DEFAULT_TOL.eps_abs, show_default=True, help="Absolute tolerance.")
def verify(path: str, tol: float) -> None:
    """Re-run numeric verification on one record; exit 1 when it fails."""
    config = ToleranceConfig(eps_abs=tol, eps_angle_deg=tol, eps_rel=DEFAULT_TOL.eps_rel)
    row = _load_record(path)
    candidate = _record_candidate(row)
    report = verify_record(candidate, config)
    click.echo(report.to_json())
    sys.exit(0 if report.overall else 1)


@main.command()
@click.option("--in", "path", type=click.Path(exists=True, dir_okay=False), required=True, help="Record or plot-code JSON file.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Output image path.")
@click.option("--png", "as_png", is_flag=True, help="Rasterize instead of writing SVG.")
def render(path: str, out: str, as_png: bool) -> None:
    """Draw a record's diagram deterministically."""
    row = _load_record(path)
    pc = parse_plotcode(row["plot_code"] if "plot_code" in row else row)
    if as_png:
        render_png(pc, out)
    else:
        Path(out).write_text(render_svg(pc), encoding="utf-8")
    quality = quality_check(pc)
    click.echo(json.dumps({"written": out, "quality": quality.to_dict()}, ensure_ascii=False))


def _iter_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _plotcode_of(row: dict) -> PlotCode:
    return parse_plotcode(row["plot_code"] if "plot_code" in row else row)


@main.command(name="eval")
@click.option("--pred", type=click.Path(exists=True, dir_okay=False), required=True, help="Predicted plot codes, JSONL.")
@click.option("--truth", type=click.Path(exists=True, dir_okay=False), required=True, help="Reference plot codes, JSONL.")
@click.option("--bins", type=int, default=4, show_default=True, help="Score bins for the accuracy table.")
def eval_cmd(pred: str, truth: str, bins: int) -> None:
    """Score predictions against references; emits a JSON report."""
    pred_rows = _iter_jsonl(pred)
    truth_rows = _iter_jsonl(truth)
    if len(pred_rows) != len(truth_rows):
        raise click.ClickException(
            f"prediction and reference counts differ: {len(pred_rows)} vs {len(truth_rows)}"
        )
    by_id = all("id" in r for r in pred_rows) and all("id" in r for r in truth_rows)
    if by_id:
        truth_map = {r["id"]: r for r in truth_rows}
        missing = [r["id"] for r in pred_rows if r["id"] not in truth_map]
        if missing:
            raise click.ClickException(f"ids missing from reference: {missing[:5]}")
        pairs = [(r, truth_map[r["id"]]) for r in pred_rows]
    else:
        pairs = list(zip(pred_rows, truth_rows))

    samples = []
    parsed_flags = []
    ann_full = 0
    for i, (p, t) in enumerate(pairs):
        truth_pc = _plotcode_of(t)
        entry: dict = {"id": p.get("id", i)}
        try:
            pred_pc = _plotcode_of(p)
        except (SchemaError, KeyError, TypeError, ValueError) as e:
            parsed_flags.append(False)
            entry |= {"parsed": False, "error": str(e), "f1": 0.0}
            samples.append(entry)
            continue
        parsed_flags.append(True)
        f1 = segment_f1(pred_pc, truth_pc)
        ann = annotation_match(pred_pc.annotations, truth_pc.annotations)
        ann_full += ann.fully_correct
        entry |= {
            "parsed": True,
            "f1": f1.f1,
            "precision": f1.precision,
            "recall": f1.recall,
            "annotations_fully_correct": ann.fully_correct,
        }
        samples.append(entry)

    scored = [(s["f1"], bool(p.get("solved", False))) for s, (p, _) in zip(samples, pairs)]
    base, rem = divmod(len(scored), bins) if bins else (0, 0)
    sizes = [base] * (bins - rem) + [base + 1] * rem
    try:
        table = [
            {"bin": b, "size": sizes[b], "accuracy": acc}
            for b, acc in bin_by_score(scored, bins)
        ]
    except BinningError as e:
        raise click.ClickException(str(e)) from e

    report = {
        "samples": samples,
        "parse_rate": parse_rate(parsed_flags),
        "bins": table,
        "annotation_fully_correct": ann_full / len(pairs) if pairs else 0.0,
    }
    click.echo(json.dumps(report, ensure_ascii=False, indent=2))


@main.group()
def pipeline() -> None:
    """Dataset construction runs."""


@pipeline.command(name="run")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Pipeline config JSON.")
def pipeline_run(config_path: str) -> None:
    """Run the full synthesis pipeline from a config file."""
    with open(config_path, encoding="utf-8") as fh:
        cfg = PipelineConfig.from_dict(json.load(fh))
    records, stats = run_pipeline(cfg)
    click.echo(json.dumps({"stats": stats.to_dict(), "out_dir": cfg.out_dir}, ensure_ascii=False))


@main.group()
def gateway() -> None:
    """Transcript recording and replay for the model gateway."""


@gateway.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), required=True, help="Pipeline config JSON.")
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Transcript JSONL to write.")
def record(config_path: str, out: str) -> None:
    """Run the pipeline and capture every gateway exchange."""
    with open(config_path, encoding="utf-8") as fh:
        cfg = PipelineConfig.from_dict(json.load(fh))
    recorder: list[dict[str, str]] = []
    gw = Gateway(cfg.gateway, recorder=recorder)
    _, stats = run_pipeline(cfg, gateway=gw)
    rows = {r["prompt_hash"]: r for r in recorder}
    save_transcript(sorted(rows.values(), key=lambda r: r["prompt_hash"]), out)
    click.echo(json.dumps({"stats": stats.to_dict(), "transcript": out, "rows": len(rows)}))


@gateway.command()
@click.option("--transcript", type=click.Path(exists=True, dir_okay=False), required=True, help="Transcript JSONL.")
@click.option("--role", type=str, required=True, help="Prompt role name.")
@click.option("--vars", "vars_path", type=click.Path(exists=True, dir_okay=False), required=True, help="JSON file with template variables.")
def replay(transcript: str, role: str, vars_path: str) -> None:
    """Look up the recorded response for a rendered prompt."""
    with open(vars_path, encoding="utf-8") as fh:
        variables = json.load(fh)
    table = load_transcript(transcript)
    key = prompt_hash(role, render_prompt(role, variables))
    if key not in table:
        raise click.ClickException(f"no transcript entry for role {role!r} ({key[:12]}…)")
    click.echo(table[key])


if __name__ == "__main__":
    main()
