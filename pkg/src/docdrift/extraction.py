"""Extract (function, documentation) pairs from source trees.

Supported inputs: Python docstrings, and `/** ... */` doc blocks immediately
preceding a function for TypeScript, Java, and C++ (C++ additionally accepts
contiguous `///` line runs). Extraction is heuristic for the C-family
languages: a string/comment-aware scanner finds doc blocks, associates each
with the function that follows it, and brace-matches the body. Spans are byte
offsets into the original file so callers can re-derive every extracted text
from the file itself.
"""

from __future__ import annotations

import ast
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ConfigError, CorpusError


class SourceLanguage(str, Enum):
    PYTHON = "python"
    TYPESCRIPT = "typescript"
    CPP = "cpp"
    JAVA = "java"

    @classmethod
    def parse(cls, value: str) -> "SourceLanguage":
        try:
            return cls(value.strip().lower())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ConfigError(f"unknown language {value!r}; expected one of: {valid}") from None


LANGUAGE_EXTENSIONS: dict[SourceLanguage, tuple[str, ...]] = {
    SourceLanguage.PYTHON: (".py",),
    SourceLanguage.TYPESCRIPT: (".ts", ".tsx"),
    SourceLanguage.CPP: (".cpp", ".cc", ".cxx", ".hpp", ".hh", ".hxx", ".h"),
    SourceLanguage.JAVA: (".java",),
}


@dataclass
class CodeDocPair:
    """One function plus its method-level documentation.

    `doc_span` and `code_span` are (start, end) byte offsets into the original
    file. For the C-family languages the doc block precedes the function and
    `code_text` is exactly the `code_span` slice; for Python the docstring sits
    inside the function, so `code_text` is the `code_span` slice with the
    docstring statement removed.
    """

    pair_id: str
    project: str
    language: SourceLanguage
    file_path: str
    function_name: str
    doc_text: str
    code_text: str
    doc_span: tuple[int, int]
    code_span: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "project": self.project,
            "language": self.language.value,
            "file_path": self.file_path,
            "function_name": self.function_name,
            "doc_text": self.doc_text,
            "code_text": self.code_text,
            "doc_span": list(self.doc_span),
            "code_span": list(self.code_span),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CodeDocPair":
        return cls(
            pair_id=data["pair_id"],
            project=data["project"],
            language=SourceLanguage(data["language"]),
            file_path=data["file_path"],
            function_name=data.get("function_name", ""),
            doc_text=data["doc_text"],
            code_text=data["code_text"],
            doc_span=tuple(data["doc_span"]),
            code_span=tuple(data["code_span"]),
        )


@dataclass
class FilterConfig:
    """Corpus filters: token minimum, exact-duplicate removal, seeded sampling."""

    min_tokens: int = 7
    dedupe: bool = True
    sample_size: int | None = None
    sample_seed: int | None = None

    def __post_init__(self):
        if self.min_tokens < 0:
            raise CorpusError("min_tokens must be >= 0")
        if self.sample_size is not None and self.sample_size < 1:
            raise CorpusError("sample_size must be >= 1 when set")


@dataclass
class ScanDiagnostics:
    """Per-run tally of what the corpus scan saw and skipped."""

    files_scanned: int = 0
    files_skipped: int = 0
    skipped_files: list[tuple[str, str]] = field(default_factory=list)
    functions_extracted: int = 0
    pairs_after_filters: int = 0
    pairs_sampled: int = 0

    def skip(self, path: str, reason: str):
        self.files_skipped += 1
        self.skipped_files.append((path, reason))


def count_tokens(text: str) -> int:
    """Number of maximal whitespace-delimited runs in `text`."""
    return len(text.split())


def apply_filters(pairs: list[CodeDocPair], filters: FilterConfig) -> list[CodeDocPair]:
    """Keep pairs whose doc and code both exceed the token minimum; drop exact duplicates.

    The token rule is strictly-greater: a doc of exactly `min_tokens` tokens is
    dropped. Duplicates are later pairs whose (doc_text, code_text) exactly
    equal an earlier pair's. Order is otherwise preserved.
    """
    kept = []
    seen: set[tuple[str, str]] = set()
    for pair in pairs:
        if count_tokens(pair.doc_text) <= filters.min_tokens:
            continue
        if count_tokens(pair.code_text) <= filters.min_tokens:
            continue
        if filters.dedupe:
            key = (pair.doc_text, pair.code_text)
            if key in seen:
                continue
            seen.add(key)
        kept.append(pair)
    return kept


# ---------------------------------------------------------------------------
# Documentation text cleaning


def _normalize_doc_body(text: str) -> str:
    """Strip leading/trailing blank lines and remove common leading indentation.

    The first line's own indentation is dropped outright (it usually starts
    right after the delimiter); the common indent is computed over the
    remaining non-blank lines.
    """
    lines = text.splitlines()
    if not lines:
        return ""
    first = lines[0].strip()
    rest = lines[1:]
    indents = [len(ln) - len(ln.lstrip()) for ln in rest if ln.strip()]
    margin = min(indents) if indents else 0
    out = [first] + [ln[margin:].rstrip() for ln in rest]
    while out and not out[0].strip():
        out.pop(0)
    while out and not out[-1].strip():
        out.pop()
    return "\n".join(out)


def clean_python_doc_slice(doc_slice: str) -> str:
    """Turn a docstring literal (as sliced from the file) into cleaned doc text."""
    try:
        value = ast.literal_eval(doc_slice)
    except (ValueError, SyntaxError):
        value = doc_slice.strip("\"'")
    if not isinstance(value, str):
        value = str(value)
    return _normalize_doc_body(value)


def clean_comment_doc_slice(doc_slice: str) -> str:
    """Turn a `/** ... */` block or `///` run (as sliced) into cleaned doc text."""
    text = doc_slice.strip()
    if text.startswith("/**"):
        inner = text[3:]
        if inner.endswith("*/"):
            inner = inner[:-2]
        lines = []
        for ln in inner.splitlines():
            stripped = ln.lstrip()
            if stripped.startswith("*"):
                stripped = stripped[1:]
                if stripped.startswith(" "):
                    stripped = stripped[1:]
                lines.append(stripped.rstrip())
            else:
                lines.append(ln.rstrip())
        return _normalize_doc_body("\n".join(lines))
    # /// run
    lines = []
    for ln in text.splitlines():
        stripped = ln.lstrip()
        if stripped.startswith("///"):
            stripped = stripped[3:]
            if stripped.startswith(" "):
                stripped = stripped[1:]
            lines.append(stripped.rstrip())
        else:
            lines.append(ln.rstrip())
    return _normalize_doc_body("\n".join(lines))


def _widen_to_whole_lines(data: bytes, start: int, end: int) -> tuple[int, int]:
    """Expand [start, end) to full lines when only blank padding surrounds it."""
    line_start = data.rfind(b"\n", 0, start) + 1
    if not data[line_start:start].strip():
        start = line_start
    line_end = data.find(b"\n", end)
    if line_end == -1:
        if not data[end:].strip():
            end = len(data)
    elif not data[end:line_end].strip():
        end = line_end + 1
    return start, end


def pair_doc_from_source(source_text: str, pair: CodeDocPair) -> str:
    """Re-derive `doc_text` from the original file and the pair's doc span."""
    data = source_text.encode("utf-8")
    doc_slice = data[pair.doc_span[0]:pair.doc_span[1]].decode("utf-8")
    if pair.language is SourceLanguage.PYTHON:
        return clean_python_doc_slice(doc_slice)
    return clean_comment_doc_slice(doc_slice)


def pair_code_from_source(source_text: str, pair: CodeDocPair) -> str:
    """Re-derive `code_text` from the original file and the pair's spans."""
    data = source_text.encode("utf-8")
    c0, c1 = pair.code_span
    if pair.language is not SourceLanguage.PYTHON:
        return data[c0:c1].decode("utf-8")
    d0, d1 = _widen_to_whole_lines(data, *pair.doc_span)
    d0, d1 = max(d0, c0), min(d1, c1)
    return (data[c0:d0] + data[d1:c1]).decode("utf-8")


# ---------------------------------------------------------------------------
# Python extraction


def _line_start_offsets(data: bytes) -> list[int]:
    starts = [0]
    for i, b in enumerate(data):
        if b == 0x0A:
            starts.append(i + 1)
    return starts


def _extract_python(source_text: str, file_path: str) -> list[tuple[int, int, int, int, str]]:
    """Return (doc_start, doc_end, code_start, code_end, name) byte tuples."""
    data = source_text.encode("utf-8")
    line_starts = _line_start_offsets(data)

    def offset(lineno: int, col: int) -> int:
        return line_starts[lineno - 1] + col

    tree = ast.parse(source_text)
    found = []
    for node in ast.walk(tree):
        if not isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
            continue
        if not node.body:
            continue
        stmt = node.body[0]
        if not (isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Constant)
                and isinstance(stmt.value.value, str)):
            continue
        doc_start = offset(stmt.value.lineno, stmt.value.col_offset)
        doc_end = offset(stmt.value.end_lineno, stmt.value.end_col_offset)
        code_start = offset(node.lineno, node.col_offset)
        code_end = offset(node.end_lineno, node.end_col_offset)
        found.append((doc_start, doc_end, code_start, code_end, node.name))
    found.sort(key=lambda t: (t[2], t[0]))
    return found


# ---------------------------------------------------------------------------
# C-family extraction (TypeScript, Java, C++)

_CONTROL_KEYWORDS = {
    "if", "for", "while", "switch", "catch", "return", "else", "do", "new",
    "throw", "synchronized", "assert", "delete", "sizeof", "typeof", "using",
}

_NON_NAME_TOKENS = {
    "async", "function", "static", "public", "private", "protected", "final",
    "override", "constexpr", "inline", "virtual", "explicit", "export",
    "default", "abstract", "=", "=>",
}


class _Scanner:
    """Single-pass scanner that steps over strings and comments."""

    def __init__(self, text: str, language: SourceLanguage):
        self.text = text
        self.language = language
        self.n = len(text)

    def skip_string(self, i: int) -> int:
        """Skip a quoted literal starting at i; returns index past its end."""
        quote = self.text[i]
        i += 1
        while i < self.n:
            c = self.text[i]
            if c == "\\":
                i += 2
                continue
            if c == quote:
                return i + 1
            if quote != "`" and c == "\n":
                return i + 1  # unterminated line string: bail at EOL
            i += 1
        return self.n

    def skip_comment(self, i: int) -> int:
        """Skip a comment starting at i ('//' or '/*'); returns index past it."""
        if self.text.startswith("//", i):
            end = self.text.find("\n", i)
            return self.n if end == -1 else end
        end = self.text.find("*/", i + 2)
        return self.n if end == -1 else end + 2

    def collect_comments(self) -> list[tuple[int, int, str]]:
        """All comments outside strings as (start, end, kind); kind is 'line' or 'block'."""
        out = []
        i = 0
        while i < self.n:
            c = self.text[i]
            if c in "\"'`":
                if c == "`" and self.language is not SourceLanguage.TYPESCRIPT:
                    i += 1
                    continue
                i = self.skip_string(i)
            elif c == "/" and self.text.startswith("//", i):
                end = self.skip_comment(i)
                out.append((i, end, "line"))
                i = end
            elif c == "/" and self.text.startswith("/*", i):
                end = self.skip_comment(i)
                out.append((i, end, "block"))
                i = end
            else:
                i += 1
        return out


def _doc_blocks(text: str, language: SourceLanguage) -> list[tuple[int, int]]:
    """Spans of doc blocks: `/** */` comments, plus `///` runs for C++."""
    comments = _Scanner(text, language).collect_comments()
    blocks = []
    run_start = None
    run_end = None
    for start, end, kind in comments:
        if kind == "line" and language is SourceLanguage.CPP and text.startswith("///", start):
            if run_start is not None and text[run_end:start].strip() == "" \
                    and text.count("\n", run_end, start) == 1:
                run_end = end
            else:
                if run_start is not None:
                    blocks.append((run_start, run_end))
                run_start, run_end = start, end
            continue
        if run_start is not None:
            blocks.append((run_start, run_end))
            run_start = run_end = None
        if kind == "block" and text.startswith("/**", start):
            blocks.append((start, end))
    if run_start is not None:
        blocks.append((run_start, run_end))
    blocks.sort()
    return blocks


def _skip_annotations(text: str, i: int, language: SourceLanguage, scanner: _Scanner) -> int | None:
    """Skip whitespace and annotation/attribute/decorator lines after a doc block.

    Returns the function-start candidate index, or None when something other
    than whitespace or annotations intervenes (which breaks the association).
    """
    n = len(text)
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            return None
        if text.startswith("//", i) or text.startswith("/*", i):
            return None  # another comment breaks the association
        if text[i] == "@" and language in (SourceLanguage.JAVA, SourceLanguage.TYPESCRIPT):
            i += 1
            while i < n and (text[i].isalnum() or text[i] in "_.$"):
                i += 1
            while i < n and text[i] in " \t":
                i += 1
            if i < n and text[i] == "(":
                i = _skip_balanced(text, i, scanner)
                if i is None:
                    return None
            continue
        if text.startswith("[[", i) and language is SourceLanguage.CPP:
            end = text.find("]]", i)
            if end == -1:
                return None
            i = end + 2
            continue
        return i


def _skip_balanced(text: str, i: int, scanner: _Scanner) -> int | None:
    """From an opening '(' at i, return the index just past its matching ')'."""
    depth = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in "\"'`":
            i = scanner.skip_string(i)
            continue
        if text.startswith("//", i) or text.startswith("/*", i):
            i = scanner.skip_comment(i)
            continue
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
            if depth == 0:
                return i + 1
        i += 1
    return None


_SIGNATURE_WINDOW = 4000


def _find_function(text: str, start: int, scanner: _Scanner) -> tuple[int, int, int] | None:
    """Check whether a function definition begins at `start`.

    Returns (params_open, body_open, body_close) indices on success. A
    candidate qualifies when a parenthesized parameter list appears before the
    first top-level '{', with no top-level ';' in between; the body is then
    brace-matched.
    """
    n = len(text)
    i = start
    paren_depth = 0
    params_open = None
    body_open = None
    limit = min(n, start + _SIGNATURE_WINDOW)
    while i < n:
        if params_open is None and i > limit:
            return None
        c = text[i]
        if c in "\"'`":
            i = scanner.skip_string(i)
            continue
        if text.startswith("//", i) or text.startswith("/*", i):
            i = scanner.skip_comment(i)
            continue
        if c == "(":
            if paren_depth == 0 and params_open is None:
                params_open = i
            paren_depth += 1
        elif c == ")":
            paren_depth -= 1
        elif paren_depth == 0:
            if c == ";":
                return None
            if c == "{":
                if params_open is None:
                    return None
                body_open = i
                break
        i += 1
    if body_open is None:
        return None
    if _identifier_before(text, params_open) in _CONTROL_KEYWORDS:
        return None
    body_close = _match_brace(text, body_open, scanner)
    if body_close is None:
        return None
    return params_open, body_open, body_close


def _match_brace(text: str, open_idx: int, scanner: _Scanner) -> int | None:
    depth = 0
    i = open_idx
    n = len(text)
    while i < n:
        c = text[i]
        if c in "\"'`":
            i = scanner.skip_string(i)
            continue
        if text.startswith("//", i) or text.startswith("/*", i):
            i = scanner.skip_comment(i)
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    return None


def _identifier_before(text: str, idx: int) -> str:
    i = idx
    while i > 0 and text[i - 1] in " \t\n\r":
        i -= 1
    j = i
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] in "_$"):
        j -= 1
    return text[j:i]


def _function_name(sig: str) -> str:
    """Best-effort function name from the signature text before the parameter list."""
    m = re.search(r"(\S+)\s*$", sig)
    if not m:
        return ""
    token = m.group(1).lstrip("*&")
    if token in ("[]", "()") and "operator" in sig:
        qual = re.search(r"([\w:~]*operator)\s*$", sig[: m.start(1)])
        if qual:
            token = qual.group(1) + token
    if token in _NON_NAME_TOKENS or not token:
        named = re.search(r"\bfunction\s*\*?\s*([A-Za-z_$][\w$]*)", sig)
        if named:
            return named.group(1)
        assigned = re.search(r"\b(?:const|let|var)\s+([A-Za-z_$][\w$]*)", sig)
        if assigned:
            return assigned.group(1)
        return ""
    if "<" in token and not token.startswith("operator"):
        token = token.split("<", 1)[0]
    return token


class _ByteMap:
    """Maps character offsets of a str to byte offsets of its UTF-8 encoding."""

    def __init__(self, text: str):
        data = text.encode("utf-8")
        if len(data) == len(text):
            self._prefix = None
        else:
            prefix = [0]
            total = 0
            for ch in text:
                total += len(ch.encode("utf-8"))
                prefix.append(total)
            self._prefix = prefix

    def to_byte(self, char_idx: int) -> int:
        if self._prefix is None:
            return char_idx
        return self._prefix[char_idx]


def _extract_c_family(
    source_text: str, language: SourceLanguage, file_path: str
) -> list[tuple[int, int, int, int, str]]:
    """Return (doc_start, doc_end, code_start, code_end, name) byte tuples."""
    scanner = _Scanner(source_text, language)
    bmap = _ByteMap(source_text)
    found = []
    for doc_start, doc_end in _doc_blocks(source_text, language):
        try:
            func_start = _skip_annotations(source_text, doc_end, language, scanner)
            if func_start is None:
                continue
            located = _find_function(source_text, func_start, scanner)
            if located is None:
                continue
            params_open, _body_open, body_close = located
            name = _function_name(source_text[func_start:params_open])
            found.append((
                bmap.to_byte(doc_start),
                bmap.to_byte(doc_end),
                bmap.to_byte(func_start),
                bmap.to_byte(body_close + 1),
                name,
            ))
        except Exception:
            continue  # one broken construct never kills the file
    return found


# ---------------------------------------------------------------------------
# Public extraction entry points


def extract_pairs_from_source(
    source_text: str,
    language: SourceLanguage,
    file_path: str,
    project: str | None = None,
    start_index: int = 1,
    diagnostics: ScanDiagnostics | None = None,
) -> list[CodeDocPair]:
    """Extract one pair per documented function-like construct in `source_text`.

    Nested documented functions are extracted independently. A syntactically
    unparseable file yields an empty list plus a diagnostic. `start_index`
    seeds the 1-based running number used in pair ids, so corpus scans can
    number across files.
    """
    if project is None:
        project = Path(file_path).stem or "corpus"
    if language is SourceLanguage.PYTHON:
        try:
            raw = _extract_python(source_text, file_path)
        except SyntaxError:
            if diagnostics is not None:
                diagnostics.skip(file_path, "SyntaxError")
            return []
    else:
        raw = _extract_c_family(source_text, language, file_path)

    pairs = []
    n = start_index
    for doc_start, doc_end, code_start, code_end, name in raw:
        proto = CodeDocPair(
            pair_id=f"{project}-{n}",
            project=project,
            language=language,
            file_path=file_path,
            function_name=name,
            doc_text="",
            code_text="",
            doc_span=(doc_start, doc_end),
            code_span=(code_start, code_end),
        )
        try:
            proto.doc_text = pair_doc_from_source(source_text, proto)
            proto.code_text = pair_code_from_source(source_text, proto)
        except Exception:
            continue
        if not proto.doc_text.strip() or not proto.code_text.strip():
            continue
        pairs.append(proto)
        n += 1
    return pairs


def _corpus_files(root: Path, language: SourceLanguage) -> list[Path]:
    extensions = LANGUAGE_EXTENSIONS[language]
    files = [
        p for p in root.rglob("*")
        if p.is_file() and p.suffix in extensions
        and not any(part.startswith(".") for part in p.relative_to(root).parts)
    ]
    files.sort(key=lambda p: p.relative_to(root).as_posix())
    return files


def scan_corpus(
    root_path: str | Path,
    language: SourceLanguage,
    filters: FilterConfig,
    project: str | None = None,
    diagnostics: ScanDiagnostics | None = None,
) -> list[CodeDocPair]:
    """Scan a source tree and return filtered, optionally sampled pairs.

    Files are visited in deterministic path order; unreadable or undecodable
    files are skipped and tallied in `diagnostics`, never fatal. Sampling is
    uniform and deterministic under `filters.sample_seed`.
    """
    root = Path(root_path)
    if not root.is_dir():
        raise CorpusError(f"corpus root is not a readable directory: {root}")
    if project is None:
        project = root.resolve().name or "corpus"
    diag = diagnostics if diagnostics is not None else ScanDiagnostics()

    pairs: list[CodeDocPair] = []
    next_index = 1
    for path in _corpus_files(root, language):
        rel = path.relative_to(root).as_posix()
        try:
            source_text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            diag.skip(rel, type(exc).__name__)
            continue
        diag.files_scanned += 1
        try:
            file_pairs = extract_pairs_from_source(
                source_text, language, rel, project=project,
                start_index=next_index, diagnostics=diag,
            )
        except Exception as exc:  # extraction must never kill the scan
            diag.skip(rel, f"extraction failed: {type(exc).__name__}")
            continue
        next_index += len(file_pairs)
        pairs.extend(file_pairs)

    diag.functions_extracted = len(pairs)
    pairs = apply_filters(pairs, filters)
    diag.pairs_after_filters = len(pairs)

    if filters.sample_size is not None and filters.sample_size < len(pairs):
        rng = random.Random(filters.sample_seed)
        chosen = sorted(rng.sample(range(len(pairs)), filters.sample_size))
        pairs = [pairs[i] for i in chosen]
    diag.pairs_sampled = len(pairs)
    return pairs
