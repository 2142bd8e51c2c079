"""Run the detect loop: prompt each pair, collect parsed results."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

from .analysis import DetectionResult, parse_output
from .errors import FixtureError, FixtureMissError
from .extraction import CodeDocPair
from .llm_client import (
    ChatRequest,
    DEFAULT_CONCURRENCY,
    DEFAULT_TEMPERATURE,
    TransportMode,
    complete,
    configure_concurrency,
)
from .prompting import ProjectMeta, PromptVariant, build_system_prompt, build_user_prompt


def run_detection(
    pairs: list[CodeDocPair],
    variant: PromptVariant,
    meta: ProjectMeta,
    model: str,
    mode: TransportMode,
    fixture_dir: str | Path | None = None,
    concurrency: int = DEFAULT_CONCURRENCY,
    temperature: float = DEFAULT_TEMPERATURE,
    on_progress: Callable[[int, int, str], None] | None = None,
) -> list[DetectionResult]:
    """Detect inconsistencies for every pair; results come back in pair order.

    In replay mode, missing fixtures are collected across the whole run and
    reported together rather than failing on the first one.
    """
    system_text = build_system_prompt(variant, meta)
    requests = [
        ChatRequest(
            model=model,
            system_text=system_text,
            user_text=build_user_prompt(pair.doc_text, pair.code_text),
            temperature=temperature,
        )
        for pair in pairs
    ]

    results: list[DetectionResult | None] = [None] * len(pairs)
    misses: list[tuple[str, str]] = []

    def run_one(index: int):
        pair = pairs[index]
        try:
            response = complete(requests[index], mode, fixture_dir=fixture_dir)
        except FixtureMissError as exc:
            misses.append((pair.pair_id, exc.key))
            return
        result = parse_output(response.raw_text, variant, pair.pair_id)
        result.fixture_key = response.fixture_key
        results[index] = result
        if on_progress is not None:
            done = sum(1 for r in results if r is not None)
            on_progress(done, len(pairs), pair.pair_id)

    if mode is TransportMode.REPLAY:
        for i in range(len(pairs)):
            run_one(i)
    else:
        configure_concurrency(concurrency)
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            for future in [pool.submit(run_one, i) for i in range(len(pairs))]:
                future.result()

    if misses:
        misses.sort()
        shown = ", ".join(f"{pid} ({key[:12]})" for pid, key in misses[:10])
        if len(misses) > 10:
            shown += f", and {len(misses) - 10} more"
        raise FixtureError(
            f"{len(misses)} fixture(s) missing for replay: {shown}"
        )
    return [r for r in results if r is not None]
