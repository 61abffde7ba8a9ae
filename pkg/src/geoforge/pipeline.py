"""End-to-end dataset construction.

One run walks a fixed sequence of gates for every candidate record:

    sample scene -> deduce -> pick seeds -> instructor -> judge
    -> coder -> parse plot code -> numeric verification
    -> render + image quality -> debias -> persist

Each gate that rejects a candidate increments exactly one stage counter,
so the counters always partition the attempts. Per-record failures are
logged and skipped; they never abort the run.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

from .chaining import (
    ChainBudget,
    SeedData,
    extract_subgoals,
    filter_trivial,
    forward_chain,
    sample_subgoals,
    select_seeds,
)
from .gateway import ExtractionError, Gateway, GatewayConfig, GatewayUnavailable, MockMiss, extract_json
from .plotcode import DegenerateCircle, PlotCode, SchemaError, canonical_serialize, parse_plotcode
from .predicates import Fact, parse_fact
from .render import QualityConfig, quality_check, render_svg
from .rules import Rule, load_rule_library
from .scenes import SamplingFailed, sample_scene
from .translate import translate_seed
from .verify import DEFAULT_TOL, ConfigError, RecordCandidate, ToleranceConfig, VerificationReport, verify_record

log = logging.getLogger(__name__)

# target kinds that pin down a number once the premises carry measurements
METRIC_TARGET_KINDS = frozenset({"rconst", "cong", "midp"})

STAGES = ("semantic", "geometric", "plotting", "image")


class PipelineError(RuntimeError):
    pass


@dataclass
class PipelineConfig:
    rng_seed: int = 0
    n_scenes: int = 4
    m_subgoals: int = 8
    rho: float = 0.2
    tolerance: ToleranceConfig = DEFAULT_TOL
    style: str = "textbook"
    gateway: GatewayConfig = field(default_factory=GatewayConfig)
    out_dir: str | None = None
    strict_schema: bool = False
    budget: ChainBudget = field(default_factory=ChainBudget)
    quality: QualityConfig = field(default_factory=QualityConfig)
    # gates can be switched off one by one; earlier counters must not move
    judge_gate: bool = True
    geometry_gate: bool = True
    plotting_gate: bool = True
    image_gate: bool = True
    debias: bool = True

    def validate(self) -> None:
        if self.n_scenes < 1:
            raise PipelineError("n_scenes must be positive")
        if self.m_subgoals < 1:
            raise PipelineError("m_subgoals must be positive")
        if not 0.0 < self.rho <= 1.0:
            raise PipelineError("rho must lie in (0, 1]")
        if self.style != "textbook":
            raise PipelineError(f"unknown style {self.style!r}")
        self.gateway.validate()
        self.budget.validate()

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = dict(raw)
        kwargs: dict = {}
        if "tolerance" in known:
            kwargs["tolerance"] = ToleranceConfig(**known.pop("tolerance"))
        if "gateway" in known:
            kwargs["gateway"] = GatewayConfig.from_dict(known.pop("gateway"))
        if "budget" in known:
            kwargs["budget"] = ChainBudget(**known.pop("budget"))
        if "quality" in known:
            kwargs["quality"] = QualityConfig(**known.pop("quality"))
        for key in (
            "rng_seed", "n_scenes", "m_subgoals", "rho", "style", "out_dir",
            "strict_schema", "judge_gate", "geometry_gate", "plotting_gate",
            "image_gate", "debias",
        ):
            if key in known:
                kwargs[key] = known.pop(key)
        if known:
            raise PipelineError(f"unknown config keys: {sorted(known)}")
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg


@dataclass
class StageStats:
    sampled: int = 0
    seed_selected: int = 0
    semantic_rejected: int = 0
    geometric_rejected: int = 0
    plotting_rejected: int = 0
    image_rejected: int = 0
    retained: int = 0

    def reject(self, stage: str) -> None:
        if stage not in STAGES:
            raise PipelineError(f"unknown stage {stage!r}")
        setattr(self, f"{stage}_rejected", getattr(self, f"{stage}_rejected") + 1)

    def assert_identity(self) -> None:
        spent = (
            self.semantic_rejected
            + self.geometric_rejected
            + self.plotting_rejected
            + self.image_rejected
            + self.retained
        )
        if spent != self.seed_selected:
            raise PipelineError(
                f"stage accounting broken: {spent} outcomes for {self.seed_selected} attempts"
            )

    def to_dict(self) -> dict:
        return {
            "sampled": self.sampled,
            "seed_selected": self.seed_selected,
            "semantic_rejected": self.semantic_rejected,
            "geometric_rejected": self.geometric_rejected,
            "plotting_rejected": self.plotting_rejected,
            "image_rejected": self.image_rejected,
            "retained": self.retained,
        }


@dataclass
class DatasetRecord:
    id: str
    kind: str
    question: str
    question_debiased: str
    cot: str
    cot_debiased: str
    answer: str | None
    plot_code: PlotCode
    diagram_path: str
    premises: list[str]
    steps: list[dict]
    targets: list[str]
    verification: VerificationReport
    flags: list[str]
    raw: dict[str, str]
    svg: str = ""

    def to_json_dict(self) -> dict:
        # field order is part of the on-disk contract; keep it stable
        return {
            "id": self.id,
            "kind": self.kind,
            "question": self.question,
            "question_debiased": self.question_debiased,
            "cot": self.cot,
            "cot_debiased": self.cot_debiased,
            "answer": self.answer,
            "plot_code": self.plot_code.to_dict(),
            "diagram": self.diagram_path,
            "seed": {
                "premises": self.premises,
                "steps": self.steps,
                "targets": self.targets,
            },
            "verification": self.verification.to_dict(),
            "flags": self.flags,
            "raw": self.raw,
        }


class _Reject(Exception):
    def __init__(self, stage: str, reason: str):
        super().__init__(reason)
        self.stage = stage
        self.reason = reason


def _route(seed: SeedData) -> str:
    if any(t.kind in METRIC_TARGET_KINDS for t in seed.targets):
        return "computation"
    return "proof"


def render_annotations_nl(pc: PlotCode) -> str:
    """Flatten diagram annotations into one plain-language line."""
    ann = pc.annotations
    parts = []
    if ann.right_angles:
        body = ", ".join(f"angle{a}{b}{c} = 90degrees" for a, b, c in ann.right_angles)
        parts.append(f"Right angle annotation: {body}")
    if ann.length_of_line:
        body = ", ".join(f"{a}{b} = {v}" for (a, b), v in ann.length_of_line)
        parts.append(f"Length annotations: {body}")
    if ann.measure_of_angle:
        body = ", ".join(f"angle{a}{b}{c} = {v}degrees" for (a, b, c), v in ann.measure_of_angle)
        parts.append(f"Angle annotations: {body}")
    return "; ".join(parts)


def leaked_annotation_values(pc: PlotCode, text: str) -> list[str]:
    """Annotated values that still appear verbatim in the text.

    Advisory only: callers flag the record, they never edit it.
    """
    values = [v for _, v in pc.annotations.length_of_line]
    values += [v for _, v in pc.annotations.measure_of_angle]
    if pc.annotations.right_angles:
        values.append("90")
    leaks = []
    for v in dict.fromkeys(values):
        if re.search(rf"(?<![\w.]){re.escape(v)}(?![\w.])", text):
            leaks.append(v)
    return leaks


def _json_field(obj: dict, key: str, stage: str) -> str:
    if key not in obj or not isinstance(obj[key], str):
        raise _Reject(stage, f"response lacks a {key!r} string")
    return obj[key]


def _ask_json(gw: Gateway, role: str, variables: dict[str, str], stage: str, raw: dict[str, str]) -> dict:
    try:
        text = gw.complete(role, variables)
    except (MockMiss, GatewayUnavailable) as e:
        raise _Reject(stage, f"{role}: {e}") from e
    raw[role] = text
    try:
        obj = extract_json(text)
    except ExtractionError as e:
        raise _Reject(stage, f"{role}: {e}") from e
    if not isinstance(obj, dict):
        raise _Reject(stage, f"{role}: response is not an object")
    return obj


def debias_record(
    gw: Gateway, question: str, cot: str, pc: PlotCode, raw: dict[str, str]
) -> tuple[str, str, list[str]]:
    """Two-pass question rewrite plus a chain-of-thought rewrite.

    Returns (question_debiased, cot_debiased, flags). Every annotated value
    must disappear from the question; survivors are flagged, never edited.
    """
    obj = _ask_json(gw, "debias_step1", {"question": question}, "semantic", raw)
    q1 = _json_field(obj, "question_sanitized", "semantic")

    annotations = render_annotations_nl(pc)
    if annotations:
        obj = _ask_json(
            gw,
            "debias_step2",
            {"question_simplified": q1, "annotations": annotations},
            "semantic",
            raw,
        )
        q2 = _json_field(obj, "question_sanitized", "semantic")
    else:
        q2 = q1

    code_str = canonical_serialize(pc).decode("utf-8")
    obj = _ask_json(gw, "cot_rewrite", {"cot": cot, "plotting_code": code_str}, "semantic", raw)
    cot2 = _json_field(obj, "cot", "semantic")

    flags = [f"annotation value {v!r} survives the debiased question" for v in leaked_annotation_values(pc, q2)]
    return q2, cot2, flags


def _process_seed(
    cfg: PipelineConfig, gw: Gateway, rules: list[Rule], rec_id: str, seed: SeedData
) -> DatasetRecord:
    raw: dict[str, str] = {}
    kind = _route(seed)
    translated = translate_seed(seed, rules)
    variables = {
        "premises": translated.premise_text,
        "steps": "\n".join(translated.step_texts),
        "target": translated.target_text,
    }
    role = "instructor_computation" if kind == "computation" else "instructor_proof"
    obj = _ask_json(gw, role, variables, "semantic", raw)
    question = _json_field(obj, "question", "semantic")
    cot = _json_field(obj, "cot", "semantic")
    answer: str | None = None
    if kind == "computation":
        answer = _json_field(obj, "answer", "semantic")
        if not answer.strip():
            raise _Reject("semantic", "empty answer for a computation problem")

    if cfg.judge_gate:
        try:
            verdict = gw.judge(question, cot, answer or "")
        except (MockMiss, GatewayUnavailable) as e:
            raise _Reject("semantic", f"judge: {e}") from e
        if not verdict.passed:
            raise _Reject("semantic", f"judge: {verdict.reason or 'rejected'}")

    obj = _ask_json(gw, "coder_plotcode", {"question": question}, "plotting", raw)
    try:
        pc = parse_plotcode(obj, strict=cfg.strict_schema)
        if cfg.plotting_gate:
            pc.resolved_circles()
    except (SchemaError, DegenerateCircle) as e:
        raise _Reject("plotting", str(e)) from e

    predicates: list[Fact] = list(seed.premises) + list(seed.targets)
    candidate = RecordCandidate(plot_code=pc, predicates=predicates, kind=kind, answer=answer)
    try:
        report = verify_record(candidate, cfg.tolerance)
    except (ConfigError, DegenerateCircle) as e:
        raise _Reject("geometric", str(e)) from e
    if cfg.geometry_gate and not report.overall:
        failed = next(c for c in report.checks if not c.passed)
        raise _Reject("geometric", f"{failed.subject}: residual {failed.residual:.3g}")

    svg = render_svg(pc)
    if cfg.image_gate:
        quality = quality_check(pc, cfg.quality)
        if not quality.passed:
            raise _Reject("image", "; ".join(quality.reasons))

    if cfg.debias:
        question_debiased, cot_debiased, flags = debias_record(gw, question, cot, pc, raw)
    else:
        question_debiased, cot_debiased, flags = question, cot, []

    seed_dict = seed.to_dict()
    return DatasetRecord(
        id=rec_id,
        kind=kind,
        question=question,
        question_debiased=question_debiased,
        cot=cot,
        cot_debiased=cot_debiased,
        answer=answer,
        plot_code=pc,
        diagram_path=f"{rec_id}.svg",
        premises=seed_dict["premises"],
        steps=seed_dict["steps"],
        targets=seed_dict["targets"],
        verification=report,
        flags=flags,
        raw=raw,
        svg=svg,
    )


def run(cfg: PipelineConfig, gateway: Gateway | None = None) -> tuple[list[DatasetRecord], StageStats]:
    """Produce a dataset under the config; persists when out_dir is set."""
    cfg.validate()
    gw = gateway if gateway is not None else Gateway(cfg.gateway)
    rules = load_rule_library()
    rng = random.Random(cfg.rng_seed)
    stats = StageStats()
    records: list[DatasetRecord] = []

    for index in range(cfg.n_scenes):
        scene_seed = rng.randrange(1 << 32)
        try:
            scene = sample_scene(scene_seed)
        except SamplingFailed as e:
            log.info("scene %d (seed %d) unsat: %s", index, scene_seed, e)
            continue
        stats.sampled += 1
        graph = forward_chain(scene.facts, scene.witness, rules, cfg.budget, cfg.tolerance)
        subgoals = filter_trivial(extract_subgoals(graph))
        subgoals = sample_subgoals(subgoals, cfg.m_subgoals, rng)
        seeds = select_seeds(subgoals, cfg.rho, scene.witness)
        stats.seed_selected += len(seeds)

        for k, seed in enumerate(seeds):
            rec_id = f"{scene_seed:08x}-{k:02d}"
            try:
                record = _process_seed(cfg, gw, rules, rec_id, seed)
            except _Reject as r:
                stats.reject(r.stage)
                log.info("record %s rejected at %s: %s", rec_id, r.stage, r.reason)
                continue
            except Exception as e:  # noqa: BLE001 - one record must never sink the run
                stats.reject("semantic")
                log.warning("record %s failed unexpectedly: %s", rec_id, e)
                continue
            records.append(record)
            stats.retained += 1

    stats.assert_identity()
    if cfg.out_dir is not None:
        persist(records, stats, cfg.out_dir)
    return records, stats


def persist(records: list[DatasetRecord], stats: StageStats, out_dir: str) -> dict:
    """Write records.jsonl, one SVG per record, stats.json and manifest.json.

    Any IO failure removes everything written so far and re-raises.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def emit(name: str, data: bytes) -> None:
        path = out / name
        written.append(path)
        path.write_bytes(data)

    try:
        lines = "".join(
            json.dumps(r.to_json_dict(), ensure_ascii=False) + "\n" for r in records
        )
        emit("records.jsonl", lines.encode("utf-8"))
        for r in records:
            emit(r.diagram_path, r.svg.encode("utf-8"))
        emit("stats.json", (json.dumps(stats.to_dict(), indent=2) + "\n").encode("utf-8"))
        artifacts = {
            p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in written
        }
        manifest = {
            "artifacts": dict(sorted(artifacts.items())),
            "record_count": len(records),
        }
        emit("manifest.json", (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8"))
    except OSError:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return manifest


def reverify_persisted(out_dir: str, tol: ToleranceConfig = DEFAULT_TOL) -> list[str]:
    """Re-run verification from the persisted bytes alone.

    Returns the ids whose stored plot code no longer passes; a healthy
    dataset returns an empty list.
    """
    bad = []
    with open(Path(out_dir) / "records.jsonl", encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            pc = parse_plotcode(row["plot_code"])
            predicates = [parse_fact(s) for s in row["seed"]["premises"] + row["seed"]["targets"]]
            cand = RecordCandidate(plot_code=pc, predicates=predicates, kind=row["kind"], answer=row["answer"])
            if not verify_record(cand, tol).overall:
                bad.append(row["id"])
    return bad
