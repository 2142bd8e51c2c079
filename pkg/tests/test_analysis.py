import json

from hypothesis import given, settings
from hypothesis import strategies as st

from docdrift.analysis import (
    PARSE_MALFORMED,
    PARSE_OK,
    VERDICT_CONSISTENT,
    VERDICT_INCONSISTENT,
    Category,
    DetectionResult,
    apply_external_filter,
    extract_json_block,
    is_under_promise,
    normalize_key,
    parse_output,
)
from docdrift.prompting import PromptVariant

from helpers import (
    dp_output,
    make_finding,
    malformed_outputs,
    v1_output,
    v2_output,
    v6_output,
    v7_output,
)

ALL_VARIANTS = list(PromptVariant)


class TestNormalizeKey:
    def test_equivalence_classes(self):
        canonical = "is_any_core_part_of_the_documentation_not_implemented_in_the_code"
        variants = [
            "Is_any_core_part_of_the_documentation_not_implemented_in_the_code?",
            "is any core part of the documentation not implemented in the code",
            "IS-ANY-CORE-PART-OF-THE-DOCUMENTATION-NOT-IMPLEMENTED-IN-THE-CODE?",
            "  Is_any_core_part_of_the_documentation_not_implemented_in_the_code  ",
            "Is any__core  part-of-the_documentation_not_implemented_in_the_code??",
        ]
        for text in variants:
            assert normalize_key(text) == canonical

    def test_distinct_keys_stay_distinct(self):
        a = normalize_key("If_yes_to_Is_some_code_not_documented_or_mentioned_in_the_documentation")
        b = normalize_key("Is_some_code_not_documented_or_mentioned_in_the_documentation?")
        assert a != b


class TestExtractJsonBlock:
    def test_plain_object(self):
        assert extract_json_block('{"a": 1}') == {"a": 1}

    def test_fenced_block(self):
        text = 'Here you go:\n```json\n{"a": 1}\n```\nthanks'
        assert extract_json_block(text) == {"a": 1}

    def test_prose_around_object(self):
        text = 'I think the answer is {"a": [1, 2]} based on the code.'
        assert extract_json_block(text) == {"a": [1, 2]}

    def test_first_object_wins(self):
        assert extract_json_block('{"first": 1} {"second": 2}') == {"first": 1}

    def test_braces_inside_strings_do_not_confuse(self):
        assert extract_json_block('{"a": "curly } brace {"}') == {"a": "curly } brace {"}

    def test_array_is_not_an_object(self):
        assert extract_json_block("[1, 2, 3]") is None

    def test_garbage_is_none(self):
        assert extract_json_block("no json here at all") is None
        assert extract_json_block("") is None

    def test_skips_broken_object_for_later_valid_one(self):
        assert extract_json_block('{oops {"a": 1}') == {"a": 1}


class TestDPParsing:
    def test_categories_and_filtering(self):
        raw = dp_output(
            over=[("promised caching", "no cache exists")],
            under=[("helper()", "not documented")],
        )
        result = parse_output(raw, PromptVariant.DP, "p-1")
        assert result.parse_status == PARSE_OK
        assert result.verdict == VERDICT_INCONSISTENT
        assert [f.category for f in result.findings] == [Category.OVER_PROMISE]
        assert result.findings[0].doc_snippet == "promised caching"
        assert result.findings[0].explanation == "no cache exists"
        assert result.filtered_out == 1

    def test_finding_ids_are_sequential_post_filter(self):
        raw = dp_output(
            over=[("a", "x"), ("b", "y")],
            mismatch=[("d", "c", "z")],
            under=[("u", "w")],
        )
        result = parse_output(raw, PromptVariant.DP, "p-9")
        assert [f.finding_id for f in result.findings] == ["p-9/1", "p-9/2", "p-9/3"]
        assert [f.category for f in result.findings] == [
            Category.OVER_PROMISE, Category.OVER_PROMISE, Category.DIRECT_MISMATCH,
        ]

    def test_mismatch_maps_both_snippets(self):
        raw = dp_output(mismatch=[("says int", "returns str(x)", "type conflict")])
        result = parse_output(raw, PromptVariant.DP, "p-1")
        f = result.findings[0]
        assert f.doc_snippet == "says int"
        assert f.code_snippet == "returns str(x)"
        assert f.explanation == "type conflict"

    def test_negative_checkin_governs_populated_followup(self):
        raw = dp_output(over=[("ghost", "stale detail")], over_answer="No")
        result = parse_output(raw, PromptVariant.DP, "p-1")
        assert result.verdict == VERDICT_CONSISTENT
        assert result.findings == []

    def test_affirmative_checkin_with_empty_followup_still_flags(self):
        raw = dp_output(over_answer="Yes")
        result = parse_output(raw, PromptVariant.DP, "p-1")
        assert result.verdict == VERDICT_INCONSISTENT
        assert len(result.findings) == 1
        assert result.findings[0].category is Category.OVER_PROMISE

    def test_under_only_answer_is_filtered_to_consistent(self):
        raw = dp_output(under_answer="Yes")
        result = parse_output(raw, PromptVariant.DP, "p-1")
        assert result.verdict == VERDICT_CONSISTENT
        assert result.findings == []
        assert result.filtered_out == 1

    def test_answer_tolerance(self):
        for answer in ("yes", " YES ", "Yes.", "Yes!"):
            raw = dp_output(over=[("d", "e")], over_answer=answer)
            assert parse_output(raw, PromptVariant.DP, "p").verdict == VERDICT_INCONSISTENT
        for answer in ("probably", "", "unsure", "yes and no"):
            raw = dp_output(over=[("d", "e")], over_answer=answer)
            assert parse_output(raw, PromptVariant.DP, "p").verdict == VERDICT_CONSISTENT

    def test_boolean_answers_accepted(self):
        raw = dp_output(over=[("d", "e")])
        block = json.loads(raw)
        block["Is_any_core_part_of_the_documentation_not_implemented_in_the_code?"] = True
        result = parse_output(json.dumps(block), PromptVariant.DP, "p")
        assert result.verdict == VERDICT_INCONSISTENT

    def test_followup_as_single_object(self):
        block = json.loads(dp_output(over_answer="Yes"))
        block["If_yes_to_Is_any_core_part_of_the_documentation_not_implemented_in_the_code"] = {
            "original_documentation_snippet_that_is_not_implemented_in_the_code": "thing",
            "explanation": "missing",
        }
        result = parse_output(json.dumps(block), PromptVariant.DP, "p")
        assert len(result.findings) == 1
        assert result.findings[0].doc_snippet == "thing"

    def test_followup_as_bare_string(self):
        block = json.loads(dp_output(over_answer="Yes"))
        block["If_yes_to_Is_any_core_part_of_the_documentation_not_implemented_in_the_code"] = \
            "the whole caching promise"
        result = parse_output(json.dumps(block), PromptVariant.DP, "p")
        assert result.findings[0].explanation == "the whole caching promise"

    def test_followup_none_string_is_empty(self):
        block = json.loads(dp_output(over_answer="Yes"))
        block["If_yes_to_Is_any_core_part_of_the_documentation_not_implemented_in_the_code"] = \
            "None"
        result = parse_output(json.dumps(block), PromptVariant.DP, "p")
        # the affirmative check-in still flags, with no detail
        assert len(result.findings) == 1
        assert result.findings[0].explanation == ""

    def test_reshaped_keys_still_parse(self):
        raw = dp_output(over=[("promised", "absent")])
        reshaped = {}
        for key, value in json.loads(raw).items():
            reshaped[key.lower().replace("_", " ").rstrip("?")] = value
        result = parse_output(json.dumps(reshaped), PromptVariant.DP, "p")
        assert result.verdict == VERDICT_INCONSISTENT
        assert result.findings[0].doc_snippet == "promised"

    def test_summaries_alone_parse_ok_and_consistent(self):
        raw = json.dumps({"Documentation_Summary": "a", "Code_Summary": "b"})
        result = parse_output(raw, PromptVariant.DP, "p")
        assert result.parse_status == PARSE_OK
        assert result.verdict == VERDICT_CONSISTENT


class TestPlainParsing:
    def test_v1_text_answer_is_one_finding(self):
        result = parse_output(v1_output("doc promises sorting, code does not sort"),
                              PromptVariant.V1, "p-1")
        assert result.verdict == VERDICT_INCONSISTENT
        assert len(result.findings) == 1
        f = result.findings[0]
        assert f.category is Category.UNCATEGORIZED
        assert f.explanation == "doc promises sorting, code does not sort"
        assert f.finding_id == "p-1/1"

    def test_v1_none_means_consistent(self):
        for text in ("None", "none", "NONE ", ""):
            result = parse_output(v1_output(text), PromptVariant.V1, "p")
            assert result.verdict == VERDICT_CONSISTENT
            assert result.parse_status == PARSE_OK

    def test_v1_non_string_value_is_consistent_not_malformed(self):
        raw = json.dumps({"identified_inconsistency": ["a", "b"]})
        result = parse_output(raw, PromptVariant.V1, "p")
        assert result.parse_status == PARSE_OK
        assert result.verdict == VERDICT_CONSISTENT

    def test_v3_shares_v1_schema(self):
        result = parse_output(v1_output("an issue"), PromptVariant.V3, "p")
        assert result.verdict == VERDICT_INCONSISTENT


class TestCotParsing:
    def test_all_none_is_consistent(self):
        result = parse_output(v2_output(), PromptVariant.V2, "p")
        assert result.verdict == VERDICT_CONSISTENT
        assert result.parse_status == PARSE_OK

    def test_snippets_map_to_the_right_sides(self):
        result = parse_output(
            v2_output(doc="returns a copy", code="return self", explanation="mutates"),
            PromptVariant.V2, "p",
        )
        assert len(result.findings) == 1
        f = result.findings[0]
        assert f.doc_snippet == "returns a copy"
        assert f.code_snippet == "return self"
        assert f.explanation == "mutates"

    def test_explanation_only_still_counts(self):
        result = parse_output(v2_output(explanation="subtle drift"), PromptVariant.V4, "p")
        assert result.verdict == VERDICT_INCONSISTENT
        assert result.findings[0].explanation == "subtle drift"

    def test_at_most_one_finding(self):
        result = parse_output(
            v2_output(doc="a", code="b", explanation="c"), PromptVariant.V2, "p"
        )
        assert len(result.findings) == 1


class TestLabeledListParsing:
    def test_type_labels_map_to_categories(self):
        raw = v6_output([
            ("Over-promise", "d1", "", "e1"),
            ("direct mismatch", "d2", "c2", "e2"),
            ("weird label", "d3", "", "e3"),
        ])
        result = parse_output(raw, PromptVariant.V6, "p")
        assert [f.category for f in result.findings] == [
            Category.OVER_PROMISE, Category.DIRECT_MISMATCH, Category.UNCATEGORIZED,
        ]
        assert result.findings[1].code_snippet == "c2"

    def test_under_labeled_findings_are_filtered(self):
        raw = v6_output([
            ("Under-promise", "", "private helper", "no docs"),
            ("Over-promise", "promised", "", "missing"),
        ])
        result = parse_output(raw, PromptVariant.V6, "p")
        assert len(result.findings) == 1
        assert result.findings[0].category is Category.OVER_PROMISE
        assert result.findings[0].finding_id == "p/1"
        assert result.filtered_out == 1

    def test_empty_list_is_consistent(self):
        result = parse_output(v6_output([]), PromptVariant.V6, "p")
        assert result.verdict == VERDICT_CONSISTENT

    def test_v7_summaries_do_not_become_findings(self):
        raw = v7_output([("Over-promise", "d", "", "e")])
        result = parse_output(raw, PromptVariant.V7, "p")
        assert len(result.findings) == 1
        raw = v7_output([])
        result = parse_output(raw, PromptVariant.V7, "p")
        assert result.verdict == VERDICT_CONSISTENT
        assert result.parse_status == PARSE_OK

    def test_list_of_bare_strings(self):
        raw = json.dumps({"identified_inconsistencies": ["first issue", "second issue"]})
        result = parse_output(raw, PromptVariant.V6, "p")
        assert [f.explanation for f in result.findings] == ["first issue", "second issue"]


class TestMalformedPolicy:
    def test_catalogue_is_malformed_for_every_variant(self):
        outputs = malformed_outputs()
        assert len(outputs) >= 50
        for variant in ALL_VARIANTS:
            for raw in outputs:
                result = parse_output(raw, variant, "p-1")
                assert result.parse_status == PARSE_MALFORMED, (variant, raw)
                assert result.verdict == VERDICT_CONSISTENT
                assert result.findings == []

    def test_wrong_variants_schema_is_malformed(self):
        # a V1-shaped reply handed to the DP parser shares no schema key
        result = parse_output(v1_output("an issue"), PromptVariant.DP, "p")
        assert result.parse_status == PARSE_MALFORMED
        result = parse_output(dp_output(), PromptVariant.V1, "p")
        assert result.parse_status == PARSE_MALFORMED


class TestExternalFilter:
    def test_matches_brute_force_reference(self):
        findings = [
            make_finding("p", 1, Category.OVER_PROMISE),
            make_finding("p", 2, Category.UNDER_PROMISE),
            make_finding("p", 3, Category.UNCATEGORIZED, note="Under-promise"),
            make_finding("p", 4, Category.DIRECT_MISMATCH),
            make_finding("p", 5, Category.UNCATEGORIZED),
        ]
        kept = apply_external_filter(findings)
        reference = [f for f in findings if not is_under_promise(f)]
        assert kept == reference
        assert [f.finding_id for f in kept] == ["p/1", "p/4", "p/5"]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(
        st.sampled_from(list(Category)),
        st.sampled_from(["", "Over-promise", "Under-promise", "direct", "unknown"]),
    )))
    def test_filter_properties(self, specs):
        findings = [
            make_finding("p", k, category, note=note)
            for k, (category, note) in enumerate(specs, start=1)
        ]
        once = apply_external_filter(findings)
        assert apply_external_filter(once) == once
        assert all(not is_under_promise(f) for f in once)
        assert once == [f for f in findings if not is_under_promise(f)]
        # order of survivors is preserved
        ids = [f.finding_id for f in findings]
        assert [ids.index(f.finding_id) for f in once] == sorted(
            ids.index(f.finding_id) for f in once
        )


class TestTotality:
    @settings(max_examples=150, deadline=None)
    @given(st.text(max_size=400), st.sampled_from(ALL_VARIANTS))
    def test_parse_output_never_raises(self, text, variant):
        result = parse_output(text, variant, "p-1")
        assert result.parse_status in (PARSE_OK, PARSE_MALFORMED)
        if result.parse_status == PARSE_MALFORMED:
            assert result.verdict == VERDICT_CONSISTENT
            assert result.findings == []
        if result.findings:
            assert result.verdict == VERDICT_INCONSISTENT
        else:
            assert result.verdict == VERDICT_CONSISTENT

    @settings(max_examples=100, deadline=None)
    @given(
        st.recursive(
            st.one_of(st.none(), st.booleans(), st.integers(), st.text(max_size=20)),
            lambda children: st.one_of(
                st.lists(children, max_size=4),
                st.dictionaries(st.text(max_size=25), children, max_size=5),
            ),
            max_leaves=12,
        ),
        st.sampled_from(ALL_VARIANTS),
    )
    def test_arbitrary_json_never_raises(self, value, variant):
        result = parse_output(json.dumps(value), variant, "p-1")
        assert result.parse_status in (PARSE_OK, PARSE_MALFORMED)


def test_result_round_trips_through_dict():
    raw = dp_output(over=[("a", "b")], mismatch=[("c", "d", "e")])
    result = parse_output(raw, PromptVariant.DP, "p-3")
    result.fixture_key = "abc123"
    again = DetectionResult.from_dict(json.loads(json.dumps(result.to_dict())))
    assert again == result
