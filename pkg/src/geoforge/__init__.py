"""Synthesis and verification of multimodal plane-geometry problems.

The package covers the full path from random constructive scenes to
persisted dataset records: symbolic deduction over a rule library, subgoal
selection, template-based problem wording, a JSON plot-code data model with
a quantity expression language, numeric verification, deterministic SVG
rendering with quality gating, alignment metrics, and a pluggable model
gateway with transcript replay.
"""

from .chaining import (
    Application,
    ChainBudget,
    DeductionGraph,
    ProofTrace,
    SeedData,
    build_trace,
    extract_subgoals,
    filter_trivial,
    forward_chain,
    sample_subgoals,
    select_seeds,
)
from .factstore import FactStore
from .gateway import (
    ExtractionError,
    Gateway,
    GatewayConfig,
    GatewayUnavailable,
    JudgeVerdict,
    MockMiss,
    TemplateError,
    extract_json,
    load_template,
    load_transcript,
    prompt_hash,
    render_prompt,
    save_transcript,
)
from .metrics import (
    AnnotationReport,
    BinningError,
    F1Report,
    annotation_match,
    bin_by_score,
    parse_rate,
    segment_f1,
)
from .pipeline import (
    DatasetRecord,
    PipelineConfig,
    PipelineError,
    StageStats,
    debias_record,
    persist,
    render_annotations_nl,
    reverify_persisted,
    run,
)
from .plotcode import (
    Annotations,
    CircleSpec,
    DegenerateCircle,
    PlotCode,
    SchemaError,
    bounding_box,
    canonical_serialize,
    parse_plotcode,
    plotcode_equal,
    resolve_circle,
    simplify_for_training,
)
from .predicates import (
    Fact,
    InvalidPredicate,
    Witness,
    canonical_args,
    canonicalize,
    check_nondegenerate,
    parse_fact,
    symmetry_variants,
)
from .quantities import (
    DslError,
    eval_quantity,
    parse_quantity,
    parse_value_literal,
)
from .render import (
    QualityConfig,
    QualityReport,
    RenderUnavailable,
    quality_check,
    render_png,
    render_svg,
)
from .rules import Rule, load_rule_library
from .scenes import SamplingFailed, SceneBudget, SceneSample, sample_scene
from .translate import TranslatedSeed, render_fact, render_step, translate_seed
from .verify import (
    Check,
    ConfigError,
    RecordCandidate,
    ToleranceConfig,
    VerificationReport,
    check_annotations,
    check_relation,
    verify_answer,
    verify_record,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
