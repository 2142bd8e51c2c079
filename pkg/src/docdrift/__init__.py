"""Detect function-level code-documentation inconsistencies with an LLM.

The pipeline: extract documented functions from a source tree, prompt a
chat-completion model once per pair, parse the structured response into
findings, drop under-promise findings for the variants that filter after
parsing, then render reports or score against human labels.
"""

from .analysis import (
    Category,
    DetectionResult,
    Finding,
    apply_external_filter,
    parse_output,
)
from .errors import (
    ConfigError,
    CorpusError,
    DocdriftError,
    FixtureConflictError,
    FixtureError,
    FixtureMissError,
    LabelError,
    ReportError,
    TransportError,
)
from .evaluation import (
    AblationReport,
    FindingLabel,
    GroundTruthLabel,
    InconsistencyMetrics,
    MetricsSummary,
    ablate,
    cohens_kappa,
    compute_function_metrics,
    compute_inconsistency_metrics,
)
from .extraction import (
    CodeDocPair,
    FilterConfig,
    ScanDiagnostics,
    SourceLanguage,
    apply_filters,
    count_tokens,
    extract_pairs_from_source,
    scan_corpus,
)
from .llm_client import (
    ChatRequest,
    ChatResponse,
    FixtureStore,
    TransportMode,
    complete,
    configure_concurrency,
    fixture_key,
)
from .pipeline import run_detection
from .prompting import (
    ProjectMeta,
    PromptVariant,
    build_system_prompt,
    build_user_prompt,
    schema_for_variant,
    variant_filters_externally,
)
from .reporting import SnippetLocation, locate_snippet, render_report, write_summary

__version__ = "0.1.0"

__all__ = [
    "AblationReport",
    "Category",
    "ChatRequest",
    "ChatResponse",
    "CodeDocPair",
    "ConfigError",
    "CorpusError",
    "DetectionResult",
    "DocdriftError",
    "FilterConfig",
    "Finding",
    "FindingLabel",
    "FixtureConflictError",
    "FixtureError",
    "FixtureMissError",
    "FixtureStore",
    "GroundTruthLabel",
    "InconsistencyMetrics",
    "LabelError",
    "MetricsSummary",
    "ProjectMeta",
    "PromptVariant",
    "ReportError",
    "ScanDiagnostics",
    "SnippetLocation",
    "SourceLanguage",
    "TransportError",
    "TransportMode",
    "ablate",
    "apply_external_filter",
    "apply_filters",
    "build_system_prompt",
    "build_user_prompt",
    "cohens_kappa",
    "complete",
    "compute_function_metrics",
    "compute_inconsistency_metrics",
    "configure_concurrency",
    "count_tokens",
    "extract_pairs_from_source",
    "fixture_key",
    "locate_snippet",
    "parse_output",
    "render_report",
    "run_detection",
    "scan_corpus",
    "schema_for_variant",
    "variant_filters_externally",
    "write_summary",
]
