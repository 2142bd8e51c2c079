"""Parse raw model output into findings and verdicts.

Parsing is total: any output the parser cannot interpret produces a result
with parse_status "malformed", a "consistent" verdict, and zero findings,
never an exception. Key matching is tolerant of case, whitespace, hyphen/
underscore choice, and a trailing question mark, since models habitually
reshape schema keys. For the variants that defer category handling to the
harness (V6, V7, DP), under-promise findings are dropped deterministically
after parsing; `apply_external_filter` is that rule.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum

from .prompting import PromptVariant, schema_for_variant, variant_filters_externally

PARSE_OK = "ok"
PARSE_MALFORMED = "malformed"
VERDICT_INCONSISTENT = "inconsistent"
VERDICT_CONSISTENT = "consistent"

_EMPTY_TEXTS = {"", "none"}


class Category(str, Enum):
    OVER_PROMISE = "over_promise"
    DIRECT_MISMATCH = "direct_mismatch"
    UNDER_PROMISE = "under_promise"
    UNCATEGORIZED = "uncategorized"


@dataclass
class Finding:
    """One reported inconsistency inside a detection result."""

    finding_id: str
    pair_id: str
    category: Category
    doc_snippet: str = ""
    code_snippet: str = ""
    explanation: str = ""
    source_key: str = ""
    category_note: str = ""

    def to_dict(self) -> dict:
        return {
            "finding_id": self.finding_id,
            "pair_id": self.pair_id,
            "category": self.category.value,
            "doc_snippet": self.doc_snippet,
            "code_snippet": self.code_snippet,
            "explanation": self.explanation,
            "source_key": self.source_key,
            "category_note": self.category_note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Finding":
        return cls(
            finding_id=data["finding_id"],
            pair_id=data["pair_id"],
            category=Category(data["category"]),
            doc_snippet=data.get("doc_snippet", ""),
            code_snippet=data.get("code_snippet", ""),
            explanation=data.get("explanation", ""),
            source_key=data.get("source_key", ""),
            category_note=data.get("category_note", ""),
        )


@dataclass
class DetectionResult:
    """Parsed outcome for one pair under one variant."""

    pair_id: str
    variant: PromptVariant
    verdict: str
    parse_status: str
    findings: list[Finding] = field(default_factory=list)
    filtered_out: int = 0
    fixture_key: str = ""

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "variant": self.variant.value,
            "verdict": self.verdict,
            "parse_status": self.parse_status,
            "findings": [f.to_dict() for f in self.findings],
            "filtered_out": self.filtered_out,
            "fixture_key": self.fixture_key,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DetectionResult":
        return cls(
            pair_id=data["pair_id"],
            variant=PromptVariant(data["variant"]),
            verdict=data["verdict"],
            parse_status=data["parse_status"],
            findings=[Finding.from_dict(f) for f in data.get("findings", [])],
            filtered_out=data.get("filtered_out", 0),
            fixture_key=data.get("fixture_key", ""),
        )


def normalize_key(key: str) -> str:
    """Canonical form for matching response keys against schema keys."""
    s = key.strip().lower()
    s = re.sub(r"[\s_\-]+", "_", s)
    s = s.rstrip("?")
    return s.strip("_")


def extract_json_block(text: str) -> dict | None:
    """First parseable JSON object in `text`, or None.

    Code-fence lines are dropped, then decoding is attempted at each '{' in
    order; the first decode that yields an object wins.
    """
    cleaned = "\n".join(ln for ln in text.splitlines() if not ln.lstrip().startswith("```"))
    decoder = json.JSONDecoder()
    for m in re.finditer(r"\{", cleaned):
        try:
            value, _ = decoder.raw_decode(cleaned, m.start())
        except ValueError:
            continue
        if isinstance(value, dict):
            return value
    return None


def _clean_text(value) -> str:
    """Coerce a field value to text; placeholder texts count as empty."""
    if value is None:
        return ""
    s = value if isinstance(value, str) else str(value)
    s = s.strip()
    if s.lower() in _EMPTY_TEXTS:
        return ""
    return s


def _category_from_note(note: str) -> Category:
    low = note.lower()
    if "over" in low:
        return Category.OVER_PROMISE
    if "mismatch" in low or "direct" in low:
        return Category.DIRECT_MISMATCH
    if "under" in low:
        return Category.UNDER_PROMISE
    return Category.UNCATEGORIZED


@dataclass
class _Draft:
    category: Category
    doc_snippet: str = ""
    code_snippet: str = ""
    explanation: str = ""
    source_key: str = ""
    category_note: str = ""

    def empty(self) -> bool:
        return not (self.doc_snippet or self.code_snippet or self.explanation
                    or self.category_note)


def _fill_from_item(draft: _Draft, item: dict):
    """Map one finding object's fields onto a draft by key content."""
    for raw_key, value in item.items():
        nk = normalize_key(str(raw_key))
        text = _clean_text(value)
        if "type" in nk:
            draft.category_note = text
        elif "explanation" in nk:
            draft.explanation = text
        elif "snippet" in nk:
            doc_at = nk.find("documentation")
            code_at = nk.find("code")
            if doc_at != -1 and (code_at == -1 or doc_at < code_at):
                draft.doc_snippet = text
            elif code_at != -1:
                draft.code_snippet = text


def _drafts_from_payload(payload, category: Category, source_key: str) -> list[_Draft]:
    """Interpret a follow-up or findings-list value of whatever shape the model chose."""
    if payload is None:
        return []
    if isinstance(payload, dict):
        items = [payload]
    elif isinstance(payload, list):
        items = payload
    else:
        text = _clean_text(payload)
        if not text:
            return []
        return [_Draft(category=category, explanation=text, source_key=source_key)]

    drafts = []
    for item in items:
        if isinstance(item, dict):
            draft = _Draft(category=category, source_key=source_key)
            _fill_from_item(draft, item)
        else:
            draft = _Draft(category=category, explanation=_clean_text(item),
                           source_key=source_key)
        if not draft.empty():
            drafts.append(draft)
    return drafts


def _normalized_block(block: dict) -> dict:
    out = {}
    for key, value in block.items():
        nk = normalize_key(str(key))
        if nk not in out:
            out[nk] = value
    return out


def _yes_no(value) -> str:
    """Reduce a check-in answer to 'yes', 'no', or '' for anything else."""
    if not isinstance(value, (str, bool)):
        return ""
    if isinstance(value, bool):
        return "yes" if value else "no"
    letters = re.sub(r"[^a-z]", "", value.lower())
    return letters if letters in ("yes", "no") else ""


def is_under_promise(finding: Finding) -> bool:
    """True when the parser's category or the model's own label says under-promise."""
    return (finding.category is Category.UNDER_PROMISE
            or "under" in finding.category_note.lower())


def apply_external_filter(findings: list[Finding]) -> list[Finding]:
    """Drop under-promise findings; order preserved, idempotent."""
    return [f for f in findings if not is_under_promise(f)]


def _malformed(pair_id: str, variant: PromptVariant) -> DetectionResult:
    return DetectionResult(
        pair_id=pair_id,
        variant=variant,
        verdict=VERDICT_CONSISTENT,
        parse_status=PARSE_MALFORMED,
        findings=[],
    )


def parse_output(raw_text: str, variant: PromptVariant, pair_id: str) -> DetectionResult:
    """Parse one raw completion. Total: never raises on model output."""
    schema = schema_for_variant(variant)
    block = extract_json_block(raw_text or "")
    if block is None:
        return _malformed(pair_id, variant)
    values = _normalized_block(block)
    if not any(normalize_key(key.name) in values for key in schema.keys):
        return _malformed(pair_id, variant)

    drafts: list[_Draft] = []
    if variant in (PromptVariant.V1, PromptVariant.V3):
        value = values.get(normalize_key(schema.keys[0].name))
        text = _clean_text(value) if isinstance(value, str) else ""
        if text:
            drafts.append(_Draft(category=Category.UNCATEGORIZED, explanation=text,
                                 source_key=schema.keys[0].name))
    elif variant in (PromptVariant.V2, PromptVariant.V4):
        draft = _Draft(category=Category.UNCATEGORIZED, source_key=schema.keys[0].name)
        for key in schema.keys:
            value = values.get(normalize_key(key.name))
            text = _clean_text(value) if isinstance(value, str) else ""
            if key.name.startswith("original_documentation"):
                draft.doc_snippet = text
            elif key.name.startswith("original_code"):
                draft.code_snippet = text
            else:
                draft.explanation = text
        if not draft.empty():
            drafts.append(draft)
    else:
        for key in schema.keys:
            if key.kind in ("summary", "yes_no"):
                continue  # check-ins are read alongside their follow-up below
            payload = values.get(normalize_key(key.name))
            if key.category:
                category = Category(key.category)
                checkin = next(
                    k for k in schema.keys if k.kind == "yes_no" and k.category == key.category
                )
                answer = _yes_no(values.get(normalize_key(checkin.name)))
                if answer != checkin.finding_answer:
                    continue  # the check-in governs, even over a populated follow-up
                found = _drafts_from_payload(payload, category, key.name)
                if not found:
                    # an affirmative check-in flags the pair even without detail
                    found = [_Draft(category=category, source_key=key.name)]
            else:
                found = _drafts_from_payload(payload, Category.UNCATEGORIZED, key.name)
                for draft in found:
                    if draft.category_note:
                        draft.category = _category_from_note(draft.category_note)
            drafts.extend(found)

    findings = [
        Finding(
            finding_id="",
            pair_id=pair_id,
            category=d.category,
            doc_snippet=d.doc_snippet,
            code_snippet=d.code_snippet,
            explanation=d.explanation,
            source_key=d.source_key,
            category_note=d.category_note,
        )
        for d in drafts
    ]
    filtered_out = 0
    if variant_filters_externally(variant):
        kept = apply_external_filter(findings)
        filtered_out = len(findings) - len(kept)
        findings = kept
    for k, finding in enumerate(findings, start=1):
        finding.finding_id = f"{pair_id}/{k}"

    verdict = VERDICT_INCONSISTENT if findings else VERDICT_CONSISTENT
    return DetectionResult(
        pair_id=pair_id,
        variant=variant,
        verdict=verdict,
        parse_status=PARSE_OK,
        findings=findings,
        filtered_out=filtered_out,
    )
