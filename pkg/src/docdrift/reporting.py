"""Render detection results as a self-contained HTML report plus a JSON summary.

Reported snippets are located back in the pair texts: exact match first, then
a whitespace-tolerant match; snippets that cannot be located are shown with a
badge instead of a highlight. Output contains no timestamps or other run
state, so identical inputs render byte-identical documents.
"""

from __future__ import annotations

import html
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .analysis import (
    PARSE_MALFORMED,
    VERDICT_INCONSISTENT,
    Category,
    DetectionResult,
    is_under_promise,
)
from .errors import ReportError
from .extraction import CodeDocPair

MATCH_EXACT = "exact"
MATCH_WHITESPACE = "whitespace_normalized"
MATCH_UNLOCATED = "unlocated"

SUMMARY_VERSION = 1


@dataclass(frozen=True)
class SnippetLocation:
    """Byte span of a snippet inside a target text, or an unlocated marker."""

    start: int
    end: int
    match_kind: str


def _locate_chars(snippet: str, target: str) -> tuple[int, int, str] | None:
    """Char-offset location used internally by the renderer."""
    if not snippet.strip():
        return None
    at = target.find(snippet)
    if at != -1:
        return at, at + len(snippet), MATCH_EXACT
    pattern = r"\s+".join(re.escape(tok) for tok in snippet.split())
    m = re.search(pattern, target)
    if m:
        return m.start(), m.end(), MATCH_WHITESPACE
    return None


def locate_snippet(snippet: str, target: str) -> SnippetLocation:
    """Find `snippet` in `target`; spans are byte offsets into UTF-8 `target`."""
    located = _locate_chars(snippet, target)
    if located is None:
        return SnippetLocation(0, 0, MATCH_UNLOCATED)
    start, end, kind = located
    byte_start = len(target[:start].encode("utf-8"))
    byte_end = byte_start + len(target[start:end].encode("utf-8"))
    return SnippetLocation(byte_start, byte_end, kind)


def _merge_spans(spans: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for start, end in sorted(spans):
        if merged and start <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], end))
        else:
            merged.append((start, end))
    return merged


def _highlight(text: str, spans: list[tuple[int, int]]) -> str:
    """Escape `text`, wrapping the merged char spans in <mark>."""
    parts = []
    cursor = 0
    for start, end in _merge_spans(spans):
        parts.append(html.escape(text[cursor:start]))
        parts.append("<mark>" + html.escape(text[start:end]) + "</mark>")
        cursor = end
    parts.append(html.escape(text[cursor:]))
    return "".join(parts)


def _pair_sort_key(pair: CodeDocPair) -> tuple:
    m = re.search(r"(\d+)$", pair.pair_id)
    return (pair.project, int(m.group(1)) if m else 0, pair.pair_id)


_STYLE = """
body { font-family: system-ui, sans-serif; margin: 2em auto; max-width: 72em;
       color: #1a1a1a; background: #fff; }
h1 { font-size: 1.5em; } h2 { font-size: 1.1em; margin-bottom: 0.2em; }
h3 { font-size: 0.9em; text-transform: uppercase; color: #666; margin: 0.4em 0; }
.meta { color: #555; }
section.pair { border: 1px solid #ddd; border-radius: 6px; padding: 1em;
               margin: 1.2em 0; }
p.path { color: #777; font-size: 0.85em; margin-top: 0; }
.cols { display: flex; gap: 1em; flex-wrap: wrap; }
.cols > div { flex: 1 1 20em; min-width: 0; }
pre { background: #f6f6f6; padding: 0.7em; border-radius: 4px; overflow-x: auto;
      font-size: 0.85em; white-space: pre-wrap; word-break: break-word; }
mark { background: #ffe08a; }
ol.findings li { margin: 0.4em 0; }
.cat { font-size: 0.75em; padding: 0.15em 0.5em; border-radius: 3px;
       background: #eee; margin-right: 0.5em; white-space: nowrap; }
.cat-over_promise { background: #fcd9d9; }
.cat-direct_mismatch { background: #f9e2bb; }
.cat-under_promise { background: #d9e7fc; }
.badge { font-size: 0.75em; color: #a33; border: 1px solid #a33;
         border-radius: 3px; padding: 0.1em 0.4em; margin-left: 0.5em; }
.footer { color: #555; margin-top: 2em; }
"""


def render_report(
    results: list[DetectionResult],
    pairs: list[CodeDocPair],
    model: str = "",
) -> str:
    """Build the report document. Every result must reference a known pair."""
    by_id = {p.pair_id: p for p in pairs}
    for result in results:
        if result.pair_id not in by_id:
            raise ReportError(f"result references unknown pair {result.pair_id}")

    flagged = [r for r in results if r.verdict == VERDICT_INCONSISTENT]
    flagged.sort(key=lambda r: _pair_sort_key(by_id[r.pair_id]))
    malformed = sum(1 for r in results if r.parse_status == PARSE_MALFORMED)
    consistent = len(results) - len(flagged)
    variants = ", ".join(sorted({r.variant.value for r in results}))

    meta_bits = []
    if model:
        meta_bits.append(f"model {html.escape(model)}")
    if variants:
        meta_bits.append(f"variant {html.escape(variants)}")
    meta_bits.append(f"{len(results)} pairs checked")
    meta_bits.append(f"{len(flagged)} flagged")

    out = [
        "<!DOCTYPE html>",
        '<html lang="en"><head><meta charset="utf-8">',
        "<title>Code-documentation inconsistency report</title>",
        f"<style>{_STYLE}</style></head><body>",
        "<h1>Code-documentation inconsistency report</h1>",
        f'<p class="meta">{" &middot; ".join(meta_bits)}</p>',
    ]

    for result in flagged:
        pair = by_id[result.pair_id]
        doc_spans: list[tuple[int, int]] = []
        code_spans: list[tuple[int, int]] = []
        items = []
        for finding in result.findings:
            unlocated = False
            for snippet, target, spans in (
                (finding.doc_snippet, pair.doc_text, doc_spans),
                (finding.code_snippet, pair.code_text, code_spans),
            ):
                if not snippet.strip():
                    continue
                located = _locate_chars(snippet, target)
                if located is None:
                    unlocated = True
                else:
                    spans.append((located[0], located[1]))
            cat = finding.category.value
            text = finding.explanation or finding.doc_snippet or finding.code_snippet
            item = (
                f'<li><span class="cat cat-{html.escape(cat)}">{html.escape(cat)}</span>'
                f"{html.escape(text)}"
            )
            if unlocated:
                item += '<span class="badge">snippet not located</span>'
            items.append(item + "</li>")

        name = pair.function_name or "(unnamed)"
        out.append('<section class="pair">')
        out.append(f"<h2>{html.escape(pair.pair_id)} &middot; {html.escape(name)}</h2>")
        out.append(
            f'<p class="path">{html.escape(pair.file_path)} '
            f"({html.escape(pair.language.value)})</p>"
        )
        out.append('<div class="cols">')
        out.append(
            "<div><h3>Documentation</h3><pre>"
            + _highlight(pair.doc_text, doc_spans) + "</pre></div>"
        )
        out.append(
            "<div><h3>Code</h3><pre>"
            + _highlight(pair.code_text, code_spans) + "</pre></div>"
        )
        out.append("</div>")
        out.append('<ol class="findings">' + "".join(items) + "</ol>")
        out.append("</section>")

    out.append(
        f'<p class="footer">{consistent} pairs had no reported inconsistencies; '
        f"{malformed} outputs could not be parsed and were treated as consistent.</p>"
    )
    out.append("</body></html>")
    return "\n".join(out)


def summarize(
    results: list[DetectionResult],
    pairs: list[CodeDocPair],
    model: str = "",
) -> dict:
    """Machine-readable run summary. Undefined rates are None, never NaN."""
    by_id = {p.pair_id: p for p in pairs}
    ordered = sorted(results, key=lambda r: _pair_sort_key(by_id[r.pair_id])
                     if r.pair_id in by_id else ("", 0, r.pair_id))
    flagged = sum(1 for r in ordered if r.verdict == VERDICT_INCONSISTENT)
    malformed = sum(1 for r in ordered if r.parse_status == PARSE_MALFORMED)
    findings = [f for r in ordered for f in r.findings]
    by_category = {c.value: 0 for c in Category}
    for f in findings:
        by_category[f.category.value] += 1
    under = sum(1 for f in findings if is_under_promise(f))
    variants = sorted({r.variant.value for r in ordered})

    def ratio(num: int, den: int):
        return round(num / den, 4) if den else None

    return {
        "version": SUMMARY_VERSION,
        "model": model,
        "variants": variants,
        "totals": {
            "pairs": len(ordered),
            "flagged": flagged,
            "consistent": len(ordered) - flagged,
            "malformed": malformed,
            "findings": len(findings),
            "findings_filtered_out": sum(r.filtered_out for r in ordered),
            "findings_by_category": by_category,
        },
        "flag_rate": ratio(flagged, len(ordered)),
        "under_promise_rate": ratio(under, len(findings)),
        "verdicts": {r.pair_id: r.verdict for r in ordered},
    }


def write_summary(
    path: str | Path,
    results: list[DetectionResult],
    pairs: list[CodeDocPair],
    model: str = "",
) -> dict:
    """Write the summary JSON to `path` and return the summary dict."""
    summary = summarize(results, pairs, model=model)
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(summary, indent=2, ensure_ascii=False) + "\n",
                      encoding="utf-8")
    return summary
