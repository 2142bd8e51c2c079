"""Prompt variants and their response schemas.

Each variant is a fixed composition of building blocks: a shared role prefix,
optional prose describing the three inconsistency categories, optional prose
telling the model not to report the third category, and a JSON response
skeleton. The DP variant encodes the categories directly in the schema key
names (a yes/no check-in plus a follow-up list per category) and relies on
post-hoc filtering instead of prose instructions, so its prompt never names
the categories at all.

The skeleton shown to the model is rendered from the same `SchemaSpec` the
parser consumes, so the two cannot drift apart.

Category strings used here ("over_promise", "direct_mismatch",
"under_promise") match `analysis.Category` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

from .errors import ConfigError

PREFIX_TEMPLATE = (
    "You are a code review expert for the {name} {kind}, working on identifying any "
    "inconsistencies between function-level code and its documentation. Given the code "
    "(enclosed within [CODE] [/CODE]) and its accompanying documentation (enclosed within "
    "[DOCUMENTATION][/DOCUMENTATION]), please identify any inconsistencies or information "
    "mismatches between them."
)

INSTRUCTED_CATEGORIZATION = (
    "You should focus on identifying three types of inconsistencies.\n"
    "1. Over-promise: Some core parts of the documentation are not implemented in the code.\n"
    "2. Direct mismatch: The code does not correctly implement what is mentioned in the "
    "documentation.\n"
    "3. Under-promise: Some code is not documented or mentioned in the documentation."
)

INSTRUCTED_FILTER = (
    "Do not report inconsistencies in the third category, under-promise, in the final output."
)

SCHEMA_PROSE = "Respond only with a JSON object in exactly the following format:"

OVER_CHECK_KEY = "Is_any_core_part_of_the_documentation_not_implemented_in_the_code?"
MISMATCH_CHECK_KEY = "Does_the_code_correctly_implement_what_is_mentioned_in_the_documentation?"
UNDER_CHECK_KEY = "Is_some_code_not_documented_or_mentioned_in_the_documentation?"

OVER_FOLLOWUP_KEY = "If_yes_to_" + OVER_CHECK_KEY[:-1]
MISMATCH_FOLLOWUP_KEY = "If_no_to_" + MISMATCH_CHECK_KEY[:-1]
UNDER_FOLLOWUP_KEY = "If_yes_to_" + UNDER_CHECK_KEY[:-1]

OVER_DOC_SNIPPET_FIELD = "original_documentation_snippet_that_is_not_implemented_in_the_code"
MISMATCH_DOC_SNIPPET_FIELD = (
    "original_documentation_snippet_that_has_conflicting_information_with_some_code_snippet"
)
MISMATCH_CODE_SNIPPET_FIELD = (
    "original_code_snippet_that_has_conflicting_information_with_the_identified_documentation_snippet"
)
UNDER_CODE_SNIPPET_FIELD = (
    "original_code_snippet_that_is_not_documented_or_mentioned_in_the_documentation"
)

COT_DOC_SNIPPET_FIELD = "original_documentation_snippet_that_has_conflicting_information_with_code"
COT_CODE_SNIPPET_FIELD = "original_code_snippet_that_has_conflicting_information_with_documentation"
EXPLANATION_FIELD = "explanation"

PLAIN_ANSWER_KEY = "identified_inconsistency"
FINDINGS_KEY = "identified_inconsistencies"
TYPE_LABEL_FIELD = "inconsistency_type"
DOC_SUMMARY_KEY = "Documentation_Summary"
CODE_SUMMARY_KEY = "Code_Summary"


class PromptVariant(str, Enum):
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    V4 = "V4"
    V6 = "V6"
    V7 = "V7"
    DP = "DP"

    @classmethod
    def parse(cls, value: str) -> "PromptVariant":
        try:
            return cls(value.strip().upper())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown variant {value!r}; expected one of: {valid}") from None


@dataclass(frozen=True)
class ProjectMeta:
    """What the prompt prefix says the code belongs to."""

    name: str
    kind: str = "library"


@dataclass(frozen=True)
class KeySpec:
    """One top-level response key.

    kind is one of:
      "summary":      free-text scalar, never a finding source
      "text":         free-text scalar; non-empty non-"none" text is a finding
      "yes_no":       category check-in; `finding_answer` says which answer
                      indicates findings
      "finding_list": list of finding objects with `item_fields` fields
    """

    name: str
    kind: str
    category: str | None = None
    finding_answer: str | None = None
    item_fields: tuple[str, ...] = ()


@dataclass(frozen=True)
class SchemaSpec:
    """Ordered top-level keys of one variant's response format."""

    variant: PromptVariant
    keys: tuple[KeySpec, ...]

    def key_names(self) -> tuple[str, ...]:
        return tuple(k.name for k in self.keys)


_SUMMARY_KEYS = (
    KeySpec(DOC_SUMMARY_KEY, "summary"),
    KeySpec(CODE_SUMMARY_KEY, "summary"),
)

_COT_KEYS = (
    KeySpec(COT_DOC_SNIPPET_FIELD, "text"),
    KeySpec(COT_CODE_SNIPPET_FIELD, "text"),
    KeySpec(EXPLANATION_FIELD, "text"),
)

_LABELED_FINDINGS_KEY = KeySpec(
    FINDINGS_KEY,
    "finding_list",
    item_fields=(
        TYPE_LABEL_FIELD,
        COT_DOC_SNIPPET_FIELD,
        COT_CODE_SNIPPET_FIELD,
        EXPLANATION_FIELD,
    ),
)

_CHECKIN_KEYS = (
    KeySpec(OVER_CHECK_KEY, "yes_no", category="over_promise", finding_answer="yes"),
    KeySpec(
        OVER_FOLLOWUP_KEY,
        "finding_list",
        category="over_promise",
        item_fields=(OVER_DOC_SNIPPET_FIELD, EXPLANATION_FIELD),
    ),
    KeySpec(MISMATCH_CHECK_KEY, "yes_no", category="direct_mismatch", finding_answer="no"),
    KeySpec(
        MISMATCH_FOLLOWUP_KEY,
        "finding_list",
        category="direct_mismatch",
        item_fields=(MISMATCH_DOC_SNIPPET_FIELD, MISMATCH_CODE_SNIPPET_FIELD, EXPLANATION_FIELD),
    ),
    KeySpec(UNDER_CHECK_KEY, "yes_no", category="under_promise", finding_answer="yes"),
    KeySpec(
        UNDER_FOLLOWUP_KEY,
        "finding_list",
        category="under_promise",
        item_fields=(UNDER_CODE_SNIPPET_FIELD, EXPLANATION_FIELD),
    ),
)


@lru_cache(maxsize=None)
def schema_for_variant(variant: PromptVariant) -> SchemaSpec:
    if variant in (PromptVariant.V1, PromptVariant.V3):
        keys = (KeySpec(PLAIN_ANSWER_KEY, "text"),)
    elif variant in (PromptVariant.V2, PromptVariant.V4):
        keys = _COT_KEYS
    elif variant is PromptVariant.V6:
        keys = (_LABELED_FINDINGS_KEY,)
    elif variant is PromptVariant.V7:
        keys = _SUMMARY_KEYS + (_LABELED_FINDINGS_KEY,)
    else:  # DP
        keys = _SUMMARY_KEYS + _CHECKIN_KEYS
    return SchemaSpec(variant=variant, keys=keys)


def variant_filters_externally(variant: PromptVariant) -> bool:
    """True for variants whose under-promise findings are dropped after parsing."""
    return variant in (PromptVariant.V6, PromptVariant.V7, PromptVariant.DP)


def _render_value(key: KeySpec) -> str:
    if key.kind == "yes_no":
        return '"Yes" or "No"'
    if key.kind == "finding_list":
        fields = ", ".join(f'"{f}": "..."' for f in key.item_fields)
        return "[{" + fields + "}]"
    return '"..."'


def render_schema_skeleton(schema: SchemaSpec) -> str:
    """The JSON-shaped skeleton appended to the system prompt.

    One key per line; single-key schemas render on one line. The rendered key
    set is exactly `schema.key_names()` by construction.
    """
    entries = [f'"{key.name}": {_render_value(key)}' for key in schema.keys]
    if len(entries) == 1:
        return "{" + entries[0] + "}"
    lines = ["{" + entries[0] + ","]
    for entry in entries[1:-1]:
        lines.append(" " + entry + ",")
    lines.append(" " + entries[-1])
    lines.append("}")
    return "\n".join(lines)


def build_system_prompt(variant: PromptVariant, meta: ProjectMeta) -> str:
    """Assemble the full system prompt for one variant and project."""
    parts = [PREFIX_TEMPLATE.format(name=meta.name, kind=meta.kind)]
    if variant in (PromptVariant.V3, PromptVariant.V4, PromptVariant.V6, PromptVariant.V7):
        parts.append(INSTRUCTED_CATEGORIZATION)
    if variant in (PromptVariant.V3, PromptVariant.V4):
        parts.append(INSTRUCTED_FILTER)
    skeleton = render_schema_skeleton(schema_for_variant(variant))
    parts.append(SCHEMA_PROSE + "\n" + skeleton)
    return "\n\n".join(parts)


def build_user_prompt(doc_text: str, code_text: str) -> str:
    """Wrap the pair in the delimiters named by the system prompt. No escaping."""
    return (
        "[DOCUMENTATION]" + doc_text + "[/DOCUMENTATION]\n"
        "[CODE]" + code_text + "[/CODE]"
    )
