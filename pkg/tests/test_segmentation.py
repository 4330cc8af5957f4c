from __future__ import annotations

from hypothesis import given, strategies as st

from evrel.segmentation import segment_sentences


def test_empty_text():
    assert segment_sentences("") == []


def test_single_terminal_split():
    spans = segment_sentences("A. B.")
    assert [s.text for s in spans] == ["A.", "B."]


def test_header_line_is_its_own_segment():
    spans = segment_sentences("ASSESSMENT AND PLAN:\nLupron is given.")
    assert [s.text for s in spans] == ["ASSESSMENT AND PLAN:", "Lupron is given."]


def test_blank_line_splits():
    spans = segment_sentences("no punctuation here\n\nsecond block")
    assert [s.text for s in spans] == ["no punctuation here", "second block"]


def test_decimal_numbers_do_not_split():
    spans = segment_sentences("PSA rose to 9.2 today. Recheck soon.")
    assert [s.text for s in spans] == ["PSA rose to 9.2 today.", "Recheck soon."]


def test_mid_line_colon_does_not_split():
    spans = segment_sentences("AKI: Cr peaked overnight.")
    assert len(spans) == 1


def test_punctuation_run_is_a_single_boundary():
    spans = segment_sentences("He waited... then left. Done.")
    assert [s.text for s in spans] == ["He waited...", "then left.", "Done."]


def test_wrapped_line_without_punctuation_continues():
    spans = segment_sentences("a line that wraps\nonto the next line.")
    assert len(spans) == 1


@given(
    st.text(
        alphabet=st.sampled_from(list("ab .!?\n:X")),
        max_size=200,
    )
)
def test_spans_sorted_disjoint_and_cover_non_whitespace(text):
    spans = segment_sentences(text)
    prev_end = -1
    for span in spans:
        assert span.start >= prev_end
        assert span.text == text[span.start : span.end]
        assert span.text == span.text.strip()
        prev_end = span.end
    covered = set()
    for span in spans:
        covered.update(range(span.start, span.end))
    for i, ch in enumerate(text):
        if not ch.isspace():
            assert i in covered, f"non-whitespace char {ch!r} at {i} uncovered"
