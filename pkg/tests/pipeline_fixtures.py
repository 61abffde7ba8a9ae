"""Mock corpora for pipeline tests.

The builder walks the exact deterministic traversal the pipeline performs
(same master RNG draws, same seed selection), synthesizes a coherent model
response for every gateway call, and returns the transcript that replays
it. Selected records can be corrupted in one of five ways, each chosen to
fail at a known gate:

    judge     judge answers {"passed": false}            -> semantic
    geometry  one load-bearing point is displaced        -> geometric
    schema    coder output misses a required key         -> plotting
    circle    coder adds a circle through collinear pts  -> plotting
    image     coder adds two coincident stray points     -> image
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from geoforge.chaining import SeedData, extract_subgoals, filter_trivial, forward_chain, sample_subgoals, select_seeds
from geoforge.gateway import prompt_hash, render_prompt
from geoforge.pipeline import METRIC_TARGET_KINDS, PipelineConfig, _route
from geoforge.predicates import Fact
from geoforge.rules import load_rule_library
from geoforge.scenes import SamplingFailed, sample_scene
from geoforge.translate import translate_seed

CORRUPTION_STAGE = {
    "judge": "semantic",
    "geometry": "geometric",
    "schema": "plotting",
    "circle": "plotting",
    "image": "image",
}


def zero_expression(f: Fact) -> str:
    """A quantity that evaluates to zero exactly when the relation holds."""
    a = f.args
    if f.kind == "coll":
        return f"area({a[0]}, {a[1]}, {a[2]})"
    if f.kind == "para":
        return f"sin_between_lines({a[0]}, {a[1]}, {a[2]}, {a[3]})"
    if f.kind == "perp":
        return f"cos_between_lines({a[0]}, {a[1]}, {a[2]}, {a[3]})"
    if f.kind == "cong":
        return f"length({a[0]}, {a[1]}) - length({a[2]}, {a[3]})"
    if f.kind == "midp":
        return f"length({a[0]}, {a[1]}) - length({a[0]}, {a[2]}) + area({a[0]}, {a[1]}, {a[2]})"
    if f.kind == "circle":
        o, p, q, r = a
        return f"length({o}, {p}) - length({o}, {q}) + (length({o}, {p}) - length({o}, {r}))"
    if f.kind == "cyclic":
        p, q, r, s = a[:4]
        return (
            f"angle_between_lines({p}, {r}, {p}, {s})"
            f" - angle_between_lines({q}, {r}, {q}, {s})"
        )
    if f.kind == "eqangle":
        return (
            f"angle_between_lines({a[0]}, {a[1]}, {a[2]}, {a[3]})"
            f" - angle_between_lines({a[4]}, {a[5]}, {a[6]}, {a[7]})"
        )
    if f.kind == "eqratio":
        return (
            f"length({a[0]}, {a[1]}) / length({a[2]}, {a[3]})"
            f" - length({a[4]}, {a[5]}) / length({a[6]}, {a[7]})"
        )
    if f.kind == "eqratio3":
        p, q, r, s, m, n = a
        return f"length({m}, {p}) / length({m}, {r}) - length({n}, {q}) / length({n}, {s})"
    if f.kind == "rconst":
        v: Fraction = f.value
        return f"length({a[0]}, {a[1]}) / length({a[2]}, {a[3]}) - {v.numerator} / {v.denominator}"
    if f.kind in ("simtri", "simtrir"):
        p, q, r, x, y, z = a
        return (
            f"length({p}, {q}) / length({x}, {y}) - length({q}, {r}) / length({y}, {z})"
            f" + (length({p}, {q}) / length({x}, {y}) - length({p}, {r}) / length({x}, {z}))"
        )
    if f.kind in ("contri", "contrir"):
        p, q, r, x, y, z = a
        return (
            f"length({p}, {q}) - length({x}, {y})"
            f" + (length({q}, {r}) - length({y}, {z}))"
            f" + (length({p}, {r}) - length({x}, {z}))"
        )
    raise ValueError(f"no zero expression for kind {f.kind!r}")


def metric_parts(f: Fact, coords: dict[str, tuple[float, float]]) -> tuple[str, str]:
    """(quantity expression, decimal answer) for a measurable target."""

    def dist(p: str, q: str) -> float:
        (px, py), (qx, qy) = coords[p], coords[q]
        return ((px - qx) ** 2 + (py - qy) ** 2) ** 0.5

    a = f.args
    if f.kind == "rconst":
        return f"length({a[0]}, {a[1]}) / length({a[2]}, {a[3]})", f"{float(f.value):.10f}"
    if f.kind == "cong":
        return f"length({a[0]}, {a[1]})", f"{dist(a[0], a[1]):.10f}"
    if f.kind == "midp":
        return f"length({a[1]}, {a[2]}) / length({a[0]}, {a[1]})", "2"
    raise ValueError(f"kind {f.kind!r} is not measurable")


def fence(obj: dict) -> str:
    return "```json\n" + json.dumps(obj, ensure_ascii=False) + "\n```"


@dataclass
class PlannedRecord:
    rec_id: str
    seed: SeedData
    kind: str
    scene_index: int
    corruption: str | None = None
    # gate outcome for the honest payload; random layouts sometimes fail
    # quality or verification on their own, and the plan must predict that
    organic: str = "retained"

    @property
    def expected_stage(self) -> str:
        return CORRUPTION_STAGE[self.corruption] if self.corruption else self.organic


@dataclass
class Corpus:
    cfg: PipelineConfig
    plan: list[PlannedRecord]
    rows: list[dict[str, str]] = field(default_factory=list)

    def expected_stats(self) -> dict[str, int]:
        out = {
            "sampled": self.cfg.n_scenes,
            "seed_selected": len(self.plan),
            "semantic_rejected": 0,
            "geometric_rejected": 0,
            "plotting_rejected": 0,
            "image_rejected": 0,
            "retained": 0,
        }
        for p in self.plan:
            key = "retained" if p.expected_stage == "retained" else f"{p.expected_stage}_rejected"
            out[key] += 1
        return out


def enumerate_plan(cfg: PipelineConfig) -> tuple[list[PlannedRecord], int]:
    """Replay the pipeline's RNG traversal; returns (plan, scenes sampled)."""
    rules = load_rule_library()
    rng = random.Random(cfg.rng_seed)
    plan: list[PlannedRecord] = []
    sampled = 0
    for index in range(cfg.n_scenes):
        scene_seed = rng.randrange(1 << 32)
        try:
            scene = sample_scene(scene_seed)
        except SamplingFailed:
            continue
        sampled += 1
        graph = forward_chain(scene.facts, scene.witness, rules, cfg.budget, cfg.tolerance)
        subgoals = filter_trivial(extract_subgoals(graph))
        subgoals = sample_subgoals(subgoals, cfg.m_subgoals, rng)
        for k, seed in enumerate(select_seeds(subgoals, cfg.rho, scene.witness)):
            plan.append(PlannedRecord(f"{scene_seed:08x}-{k:02d}", seed, _route(seed), index))
    return plan, sampled


def base_plotcode(seed: SeedData) -> dict:
    """Honest plot code straight from the witness coordinates."""
    coords = seed.witness.coords
    used = sorted({lab for f in list(seed.premises) + list(seed.targets) for lab in f.args})
    points = {lab: list(coords[lab]) for lab in sorted(coords)}
    segments = sorted({tuple(sorted((p, q))) for f in seed.premises for p, q in _fact_segments(f)})
    segments += sorted({tuple(sorted((p, q))) for f in seed.targets for p, q in _fact_segments(f)})
    seen: set = set()
    seg_list = []
    for s in segments:
        if s not in seen and s[0] != s[1]:
            seen.add(s)
            seg_list.append(list(s))
    if not seg_list and len(used) >= 2:
        seg_list = [[used[0], used[1]]]
    circles = []
    cid = 1
    for f in list(seed.premises) + list(seed.targets):
        if f.kind == "cyclic":
            circles.append([f"C{cid}", f.args[0], f.args[1], f.args[2]])
            cid += 1
        elif f.kind == "circle":
            circles.append([f"C{cid}", f.args[0], f.args[1]])
            cid += 1
    return {
        "points": points,
        "segments": seg_list,
        "circles": circles,
        "quantities": [],
        "annotations": {"right_angles": [], "length_of_line": [], "measure_of_angle": []},
    }


def _fact_segments(f: Fact) -> list[tuple[str, str]]:
    a = f.args
    if f.kind in ("coll", "midp"):
        return [(a[0], a[1]), (a[1], a[2])]
    if f.kind in ("para", "perp", "npara", "cong", "rconst"):
        return [(a[0], a[1]), (a[2], a[3])]
    if f.kind in ("eqangle", "eqratio"):
        return [(a[0], a[1]), (a[2], a[3]), (a[4], a[5]), (a[6], a[7])]
    if f.kind in ("simtri", "simtrir", "contri", "contrir"):
        p, q, r, x, y, z = a
        return [(p, q), (q, r), (p, r), (x, y), (y, z), (x, z)]
    if f.kind == "eqratio3":
        p, q, r, s, m, n = a
        return [(m, p), (m, r), (n, q), (n, s)]
    if f.kind == "cyclic":
        return [(a[i], a[i + 1]) for i in range(len(a) - 1)]
    if f.kind == "circle":
        return [(a[0], a[i]) for i in range(1, 4)]
    return []


def build_record_payloads(rec: PlannedRecord, rules, annotate: bool = False) -> dict:
    """Every mock response this record can trigger, keyed by role."""
    t = translate_seed(rec.seed, rules)
    coords = rec.seed.witness.coords
    pc = base_plotcode(rec.seed)

    if annotate and rec.kind == "proof":
        noted = pc["segments"][0]
        dist = (
            (coords[noted[0]][0] - coords[noted[1]][0]) ** 2
            + (coords[noted[0]][1] - coords[noted[1]][1]) ** 2
        ) ** 0.5
        pc["annotations"]["length_of_line"] = [[list(noted), f"{dist:.10f}"]]

    if rec.kind == "computation":
        target = next(f for f in rec.seed.targets if f.kind in METRIC_TARGET_KINDS)
        expr, answer = metric_parts(target, coords)
        pc["quantities"] = [expr]
        noted = pc["segments"][0]
        dist = (
            (coords[noted[0]][0] - coords[noted[1]][0]) ** 2
            + (coords[noted[0]][1] - coords[noted[1]][1]) ** 2
        ) ** 0.5
        pc["annotations"]["length_of_line"] = [[list(noted), f"{dist:.10f}"]]
        question = f"In the figure, {t.premise_text}. Determine the value of {t.target_text}."
    else:
        answer = None
        pc["quantities"] = [zero_expression(f) for f in rec.seed.targets]
        question = f"In the figure, {t.premise_text}. Prove that {t.target_text}."
    cot = "  ".join(t.step_texts) or "Immediate from the given configuration."

    if rec.corruption == "geometry":
        moved = rec.seed.targets[0].args[0]
        x, y = pc["points"][moved]
        pc["points"][moved] = [x + 0.37, y + 0.19]
    elif rec.corruption == "schema":
        pc.pop("annotations")
    elif rec.corruption == "circle":
        anchor = pc["segments"][0][0]
        ax, ay = pc["points"][anchor]
        pc["points"]["Y8"] = [ax + 1.0, ay + 0.5]
        pc["points"]["Z8"] = [ax + 2.0, ay + 1.0]
        pc["circles"] = pc["circles"] + [["C9", anchor, "Y8", "Z8"]]
    elif rec.corruption == "image":
        xs = [x for x, _ in pc["points"].values()]
        ys = [y for _, y in pc["points"].values()]
        mid = [sum(xs) / len(xs), sum(ys) / len(ys)]
        pc["points"]["Y9"] = list(mid)
        pc["points"]["Z9"] = list(mid)

    verdict = (
        {"passed": False, "reason": "the conclusion does not follow"}
        if rec.corruption == "judge"
        else {"passed": True, "reason": "steps are sound"}
    )

    payload = {
        "instructor_vars": {
            "premises": t.premise_text,
            "steps": "\n".join(t.step_texts),
            "target": t.target_text,
        },
        "instructor_role": "instructor_computation" if rec.kind == "computation" else "instructor_proof",
        "instructor": {"question": question, "cot": cot}
        | ({"answer": answer} if answer is not None else {}),
        "judge_vars": {"question": question, "cot": cot, "answer": answer or ""},
        "judge": verdict,
        "coder_vars": {"question": question},
        "coder": pc,
        "question": question,
        "cot": cot,
    }
    return payload


def transcript_rows_for(rec: PlannedRecord, rules, annotate: bool = False) -> list[dict[str, str]]:
    from geoforge.pipeline import render_annotations_nl
    from geoforge.plotcode import canonical_serialize, parse_plotcode

    p = build_record_payloads(rec, rules, annotate=annotate)
    rows = []

    def put(role: str, variables: dict[str, str], response: str) -> None:
        h = prompt_hash(role, render_prompt(role, variables))
        rows.append({"role": role, "prompt_hash": h, "response": response})

    put(p["instructor_role"], p["instructor_vars"], fence(p["instructor"]))
    put("judge", p["judge_vars"], fence(p["judge"]))
    put("coder_plotcode", p["coder_vars"], fence(p["coder"]))

    # debias entries only make sense for plot code the pipeline can parse
    if rec.corruption in (None, "image", "geometry", "circle"):
        try:
            parsed = parse_plotcode(p["coder"])
        except Exception:
            return rows
        q1 = f"{p['question']} [simplified]"
        put("debias_step1", {"question": p["question"]}, fence({"question_sanitized": q1}))
        annotations = render_annotations_nl(parsed)
        q2 = q1
        if annotations:
            q2 = "Using the diagram, determine the requested quantity."
            put(
                "debias_step2",
                {"question_simplified": q1, "annotations": annotations},
                fence({"question_sanitized": q2}),
            )
        put(
            "cot_rewrite",
            {"cot": p["cot"], "plotting_code": canonical_serialize(parsed).decode("utf-8")},
            fence({"cot": "Step 1: read the marked data.\nStep 2: apply the cited facts."}),
        )
    return rows


def organic_outcome(rec: PlannedRecord, rules, annotate: bool) -> str:
    """Predicted gate for the honest payload, mirroring pipeline gate order."""
    from geoforge.plotcode import parse_plotcode
    from geoforge.render import quality_check
    from geoforge.verify import RecordCandidate, verify_record

    pay = build_record_payloads(rec, rules, annotate=annotate)
    try:
        pc = parse_plotcode(pay["coder"])
        pc.resolved_circles()
    except Exception:
        return "plotting"
    cand = RecordCandidate(
        plot_code=pc,
        predicates=list(rec.seed.premises) + list(rec.seed.targets),
        kind=rec.kind,
        answer=pay["instructor"].get("answer"),
    )
    if not verify_record(cand).overall:
        return "geometric"
    if not quality_check(pc).passed:
        return "image"
    return "retained"


def _annotate(index: int) -> bool:
    return index % 6 == 3


def instructor_keys(plan: list[PlannedRecord], rules) -> list[str]:
    """Prompt identity per record; twins share every downstream prompt.

    Two seeds from different scenes occasionally translate to the same
    premise/step/target text. The mock transcript keeps one row per prompt,
    so such twins are served the first twin's responses.
    """
    keys = []
    for rec in plan:
        t = translate_seed(rec.seed, rules)
        role = "instructor_computation" if rec.kind == "computation" else "instructor_proof"
        prompt = render_prompt(
            role,
            {"premises": t.premise_text, "steps": "\n".join(t.step_texts), "target": t.target_text},
        )
        keys.append(prompt_hash(role, prompt))
    return keys


def assign_organic(plan: list[PlannedRecord], rules) -> None:
    keys = instructor_keys(plan, rules)
    outcome: dict[str, str] = {}
    for i, rec in enumerate(plan):
        if keys[i] not in outcome:
            outcome[keys[i]] = organic_outcome(rec, rules, annotate=_annotate(i))
        rec.organic = outcome[keys[i]]


def build_corpus(
    cfg: PipelineConfig,
    corruptions: dict[int, str] | None = None,
    plan: list[PlannedRecord] | None = None,
) -> Corpus:
    """Corpus for cfg; corruptions maps plan indices to corruption names."""
    corruptions = corruptions or {}
    rules = load_rule_library()
    if plan is None:
        plan, _ = enumerate_plan(cfg)
        assign_organic(plan, rules)
    for i, kind in corruptions.items():
        if plan[i].organic != "retained":
            raise ValueError(f"plan index {i} already fails at {plan[i].organic}")
        plan[i].corruption = kind
    rows: list[dict[str, str]] = []
    seen: set[str] = set()
    for i, rec in enumerate(plan):
        for row in transcript_rows_for(rec, rules, annotate=_annotate(i)):
            if row["prompt_hash"] not in seen:
                seen.add(row["prompt_hash"])
                rows.append(row)
    rows.sort(key=lambda r: r["prompt_hash"])
    return Corpus(cfg=cfg, plan=plan, rows=rows)


def spread_corruptions(plan: list[PlannedRecord], kinds: list[str], rules) -> dict[int, str]:
    """Assign corruption kinds to evenly spread organically-clean records.

    Measurable targets are left alone so the corpus keeps one retained
    computation record, and prompt twins are skipped because corrupting
    one twin would leak into the other's responses.
    """
    keys = instructor_keys(plan, rules)
    clean = [
        i
        for i, p in enumerate(plan)
        if p.organic == "retained" and p.kind != "computation" and keys.count(keys[i]) == 1
    ]
    if len(clean) < len(kinds):
        raise ValueError(f"only {len(clean)} clean records for {len(kinds)} corruptions")
    picks = [clean[round(j * (len(clean) - 1) / max(1, len(kinds) - 1))] for j in range(len(kinds))]
    if len(set(picks)) != len(kinds):
        picks = clean[: len(kinds)]
    return dict(zip(picks, kinds))


# 25 scenes under this master seed select exactly the fifty seeds the
# acceptance corpus wants, including one measurable target
CORPUS_SEED = 3
CORPUS_SCENES = 25

# ten corruptions, one designated gate each
DEFAULT_CORRUPTION_KINDS = [
    "judge", "judge", "judge",
    "geometry", "geometry", "geometry",
    "schema", "circle",
    "image", "image",
]


def corpus_fifty(out_dir: str | None, transcript_path: str) -> Corpus:
    """The standard 50-record corpus with ten planted corruptions."""
    cfg = standard_corpus_config(CORPUS_SCENES, out_dir, transcript_path)
    rules = load_rule_library()
    plan, _ = enumerate_plan(cfg)
    if len(plan) != 50:
        raise AssertionError(f"corpus config drifted: {len(plan)} records")
    assign_organic(plan, rules)
    return build_corpus(cfg, spread_corruptions(plan, DEFAULT_CORRUPTION_KINDS, rules), plan=plan)


def standard_corpus_config(n_scenes: int, out_dir: str | None, transcript_path: str) -> PipelineConfig:
    from geoforge.gateway import GatewayConfig

    return PipelineConfig(
        rng_seed=CORPUS_SEED,
        n_scenes=n_scenes,
        m_subgoals=2,
        rho=1.0,
        out_dir=out_dir,
        gateway=GatewayConfig(backend="mock", transcript_path=transcript_path),
    )


DEBIAS_QUESTION = (
    "In triangle $ABC$ the angle at $A$ is a right angle, $AB=3$, $AC=6$, $D$ is "
    "the midpoint of $AB$ and $G$ lies on $AC$ with $AG=4$. Find the length of $GD$."
)
DEBIAS_COT = (
    "Place $A$ at the origin. Then $D=(1.5,0)$ and $G=(0,4)$, so "
    "$GD=\\sqrt{1.5^2+4^2}$."
)
DEBIAS_EXPECTED = "Given $D$ is the midpoint of $AB$. Find the length of $GD$."
DEBIAS_ANNOTATIONS = "Right angle annotation: angleBAC = 90degrees; Length annotations: AB = 3, AC = 6"


def debias_showcase() -> tuple[dict, str, str, list[dict[str, str]]]:
    """Hand-built record exercising the two-pass question rewrite.

    Returns (plot code dict, question, cot, transcript rows). The step-2
    response is the exact sentence tests expect back.
    """
    pc = {
        "points": {"A": [0.0, 0.0], "B": [3.0, 0.0], "C": [0.0, 6.0], "D": [1.5, 0.0], "G": [0.0, 4.0]},
        "segments": [["A", "B"], ["A", "C"], ["B", "C"], ["D", "G"]],
        "circles": [],
        "quantities": ["length(G, D)"],
        "annotations": {
            "right_angles": [["B", "A", "C"]],
            "length_of_line": [[["A", "B"], "3"], [["A", "C"], "6"]],
            "measure_of_angle": [],
        },
    }
    q1 = "Right triangle $ABC$ with legs $AB=3$, $AC=6$; $D$ and $G$ as marked. Find $GD$."
    rows = []

    def put(role: str, variables: dict[str, str], response: dict) -> None:
        h = prompt_hash(role, render_prompt(role, variables))
        rows.append({"role": role, "prompt_hash": h, "response": fence(response)})

    put("debias_step1", {"question": DEBIAS_QUESTION}, {"question_sanitized": q1})
    put(
        "debias_step2",
        {"question_simplified": q1, "annotations": DEBIAS_ANNOTATIONS},
        {"question_sanitized": DEBIAS_EXPECTED},
    )
    from geoforge.plotcode import canonical_serialize, parse_plotcode

    put(
        "cot_rewrite",
        {"cot": DEBIAS_COT, "plotting_code": canonical_serialize(parse_plotcode(pc)).decode("utf-8")},
        {"cot": "Step 1: place the right angle at the origin.\nStep 2: apply the distance formula."},
    )
    return pc, DEBIAS_QUESTION, DEBIAS_COT, rows
