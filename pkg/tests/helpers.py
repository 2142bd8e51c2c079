"""Shared builders for tests: crafted model outputs, fixtures, fake transport."""

from __future__ import annotations

import json
from pathlib import Path

from docdrift.analysis import Category, DetectionResult, Finding
from docdrift.extraction import CodeDocPair, SourceLanguage
from docdrift.llm_client import ChatRequest, FixtureStore, request_key
from docdrift.prompting import (
    CODE_SUMMARY_KEY,
    COT_CODE_SNIPPET_FIELD,
    COT_DOC_SNIPPET_FIELD,
    DOC_SUMMARY_KEY,
    EXPLANATION_FIELD,
    FINDINGS_KEY,
    MISMATCH_CHECK_KEY,
    MISMATCH_CODE_SNIPPET_FIELD,
    MISMATCH_DOC_SNIPPET_FIELD,
    MISMATCH_FOLLOWUP_KEY,
    OVER_CHECK_KEY,
    OVER_DOC_SNIPPET_FIELD,
    OVER_FOLLOWUP_KEY,
    PLAIN_ANSWER_KEY,
    TYPE_LABEL_FIELD,
    UNDER_CHECK_KEY,
    UNDER_CODE_SNIPPET_FIELD,
    UNDER_FOLLOWUP_KEY,
    ProjectMeta,
    PromptVariant,
    build_system_prompt,
    build_user_prompt,
)

TEST_MODEL = "test-model"
TEST_META = ProjectMeta(name="minicorpus", kind="library")


def dp_output(
    over=(),
    mismatch=(),
    under=(),
    over_answer=None,
    mismatch_answer=None,
    under_answer=None,
    doc_summary="The documentation describes the function.",
    code_summary="The code implements the function.",
) -> str:
    """Well-formed DP response. over/under items: (snippet, explanation);
    mismatch items: (doc_snippet, code_snippet, explanation)."""
    block = {
        DOC_SUMMARY_KEY: doc_summary,
        CODE_SUMMARY_KEY: code_summary,
        OVER_CHECK_KEY: over_answer if over_answer is not None else ("Yes" if over else "No"),
        OVER_FOLLOWUP_KEY: [
            {OVER_DOC_SNIPPET_FIELD: snip, EXPLANATION_FIELD: expl}
            for snip, expl in over
        ],
        MISMATCH_CHECK_KEY: mismatch_answer if mismatch_answer is not None
        else ("No" if mismatch else "Yes"),
        MISMATCH_FOLLOWUP_KEY: [
            {
                MISMATCH_DOC_SNIPPET_FIELD: doc,
                MISMATCH_CODE_SNIPPET_FIELD: code,
                EXPLANATION_FIELD: expl,
            }
            for doc, code, expl in mismatch
        ],
        UNDER_CHECK_KEY: under_answer if under_answer is not None else ("Yes" if under else "No"),
        UNDER_FOLLOWUP_KEY: [
            {UNDER_CODE_SNIPPET_FIELD: snip, EXPLANATION_FIELD: expl}
            for snip, expl in under
        ],
    }
    return json.dumps(block, indent=1)


def v1_output(text: str) -> str:
    return json.dumps({PLAIN_ANSWER_KEY: text})


def v2_output(doc="None", code="None", explanation="None") -> str:
    return json.dumps({
        COT_DOC_SNIPPET_FIELD: doc,
        COT_CODE_SNIPPET_FIELD: code,
        EXPLANATION_FIELD: explanation,
    })


def v6_output(items) -> str:
    """items: (type_label, doc_snippet, code_snippet, explanation) tuples."""
    return json.dumps({
        FINDINGS_KEY: [
            {
                TYPE_LABEL_FIELD: label,
                COT_DOC_SNIPPET_FIELD: doc,
                COT_CODE_SNIPPET_FIELD: code,
                EXPLANATION_FIELD: expl,
            }
            for label, doc, code, expl in items
        ]
    })


def v7_output(items, doc_summary="Doc summary.", code_summary="Code summary.") -> str:
    block = json.loads(v6_output(items))
    return json.dumps({
        DOC_SUMMARY_KEY: doc_summary,
        CODE_SUMMARY_KEY: code_summary,
        **block,
    })


def malformed_outputs() -> list[str]:
    """At least 50 outputs the parser must classify as malformed."""
    bases = [
        "",
        "I could not find any issues with this function.",
        "{",
        '{"foo": "bar"}',
        "[1, 2, 3]",
        '{"identified_inconsistency"',
        "null",
        "Yes",
        '{"Documentation_Summary": }',
        "<html>internal error</html>",
    ]
    wrappers = [
        lambda s: s,
        lambda s: f"```json\n{s}\n```",
        lambda s: f"```\n{s}\n```",
        lambda s: f"Sure, here is my analysis:\n{s}",
        lambda s: s + "\nLet me know if you need anything else.",
    ]
    return [wrap(base) for base in bases for wrap in wrappers]


def seed_fixture(
    fixture_dir: str | Path,
    variant: PromptVariant,
    pair: CodeDocPair,
    raw_text: str,
    model: str = TEST_MODEL,
    meta: ProjectMeta = TEST_META,
) -> str:
    """Record `raw_text` as the response this pair would get; returns the key."""
    request = ChatRequest(
        model=model,
        system_text=build_system_prompt(variant, meta),
        user_text=build_user_prompt(pair.doc_text, pair.code_text),
    )
    key = request_key(request)
    FixtureStore(fixture_dir).record(key, request, raw_text)
    return key


def make_pair(pair_id: str, doc: str, code: str, project="demo",
              language=SourceLanguage.PYTHON, name="fn") -> CodeDocPair:
    return CodeDocPair(
        pair_id=pair_id,
        project=project,
        language=language,
        file_path="demo.py",
        function_name=name,
        doc_text=doc,
        code_text=code,
        doc_span=(0, len(doc.encode("utf-8"))),
        code_span=(0, len(code.encode("utf-8"))),
    )


def make_result(pair_id: str, verdict: str, variant=PromptVariant.DP,
                findings=None, parse_status="ok") -> DetectionResult:
    return DetectionResult(
        pair_id=pair_id,
        variant=variant,
        verdict=verdict,
        parse_status=parse_status,
        findings=findings or [],
    )


def make_finding(pair_id: str, k: int, category=Category.UNCATEGORIZED,
                 note="", doc="", code="", explanation="reported issue") -> Finding:
    return Finding(
        finding_id=f"{pair_id}/{k}",
        pair_id=pair_id,
        category=category,
        doc_snippet=doc,
        code_snippet=code,
        explanation=explanation,
        category_note=note,
    )


class FakeHTTPResponse:
    """Stands in for a requests.Response in transport tests."""

    def __init__(self, payload=None, status=200, text_override=None):
        self._payload = payload
        self.status_code = status
        self._text_override = text_override

    def raise_for_status(self):
        if self.status_code >= 400:
            import requests
            raise requests.HTTPError(f"status {self.status_code}")

    def json(self):
        if self._text_override is not None:
            raise ValueError("not json")
        return self._payload


def chat_payload(content: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": content}}]}
