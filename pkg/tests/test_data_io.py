import logging
import random
from pathlib import Path

import pytest

from mqmgen.core import ErrorCategory, Severity, Side
from mqmgen.data_io import (
    collapse_category,
    export_qe_csv,
    load_gold_tsv,
    read_annotations_jsonl,
    read_qe_csv,
    read_segments_jsonl,
    segment_quality,
    strip_markup,
    write_annotations_jsonl,
    write_segments_jsonl,
)
from mqmgen.errors import ConfigError, ContractError, DataError

from genutil import make_segment, random_annotation

FIXTURE = Path(__file__).parent / "fixtures" / "gold_zh_en_10rows.tsv"


class TestStripMarkup:
    def test_single_span(self):
        clean, spans, ok = strip_markup("I <v>tried to</v> use it")
        assert clean == "I tried to use it"
        assert spans == [(2, 10)]
        assert ok

    def test_multiple_spans(self):
        clean, spans, ok = strip_markup("a <v>b</v> c <v>d</v>")
        assert clean == "a b c d"
        assert spans == [(2, 3), (6, 7)]
        assert ok

    def test_no_markup(self):
        assert strip_markup("plain text") == ("plain text", [], True)

    def test_unbalanced(self):
        assert strip_markup("a <v>b c")[2] is False
        assert strip_markup("a b</v> c")[2] is False
        assert strip_markup("<v>a<v>b</v>")[2] is False


class TestCollapseCategory:
    @pytest.mark.parametrize("raw,expected", [
        ("fluency/punctuation", ErrorCategory.FLUENCY),
        ("accuracy/omission", ErrorCategory.OMISSION),
        ("Accuracy/Omission/severe", ErrorCategory.OMISSION),
        ("accuracy/mistranslation", ErrorCategory.ACCURACY),
        ("style/awkward", ErrorCategory.STYLE),
        ("terminology/inappropriate for context", ErrorCategory.TERMINOLOGY),
        ("locale convention/date format", ErrorCategory.LOCALE_CONVENTION),
        ("Non-translation!", ErrorCategory.OTHER),
        ("source error", ErrorCategory.OTHER),
        ("other", ErrorCategory.OTHER),
    ])
    def test_collapse(self, raw, expected):
        assert collapse_category(raw) is expected

    def test_stability(self):
        for raw in ("fluency/punctuation", "accuracy/omission", "whatever/else"):
            assert collapse_category(raw) is collapse_category(raw)


class TestLoadGoldTsv:
    def test_fixture_loads_without_drops(self, caplog):
        with caplog.at_level(logging.WARNING, logger="mqmgen.data_io"):
            pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        assert not caplog.records  # every fixture row ingests cleanly
        # (segment, rater) keys: sysA#1/r1, sysA#2/r1, sysA#2/r2, sysA#3/r1,
        # sysB#1/r1, sysA#4/r1, sysA#5/r1, sysA#5/r2, sysA#6/r1
        assert len(pairs) == 9

    def test_omission_row_marks_source_side(self):
        pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        ann = next(a for s, a in pairs if s.id == "sysA#docN#1" and a.annotator == "rater1")
        omissions = [e for e in ann.errors if e.category is ErrorCategory.OMISSION]
        assert len(omissions) == 1
        assert omissions[0].side is Side.SOURCE
        assert omissions[0].marked_text == "低音出不来"
        assert omissions[0].span == (7, 11)  # 用0 了1 很2 久3 ,4 除5 了6 低7 音8 出9 不10 来11

    def test_same_rater_rows_merge_into_one_annotation(self):
        pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        ann = next(a for s, a in pairs if s.id == "sysA#docN#1" and a.annotator == "rater1")
        assert len(ann.errors) == 2  # omission + mistranslation
        assert ann.penalty == 10.0

    def test_no_error_row_yields_zero_error_annotation(self):
        pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        ann = next(a for s, a in pairs if s.id == "sysA#docN#3")
        assert ann.errors == ()
        assert ann.penalty == 0.0 and ann.quality == 1.0

    def test_multi_span_row_yields_one_error_per_span(self):
        pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        ann = next(a for s, a in pairs if s.id == "sysA#docN#2" and a.annotator == "rater2")
        assert len(ann.errors) == 2
        assert [e.marked_text for e in ann.errors] == ["when", "very good"]
        assert all(e.category is ErrorCategory.STYLE for e in ann.errors)

    def test_neutral_severity_kept_with_zero_weight(self):
        pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        ann = next(a for s, a in pairs if s.id == "sysA#docN#5" and a.annotator == "rater2")
        assert ann.errors[0].severity is Severity.NEUTRAL
        assert ann.errors[0].category is ErrorCategory.OTHER
        assert ann.penalty == 0.0

    def test_segment_text_has_markup_stripped(self):
        pairs = load_gold_tsv(FIXTURE, ("zh", "en"))
        seg = next(s for s, _ in pairs if s.id == "sysA#docN#1")
        assert "<v>" not in seg.source and "<v>" not in seg.target
        assert seg.source == "用了很久,除了低音出不来,总体还不错。"

    def test_diagnostics_for_bad_rows(self, tmp_path, caplog):
        tsv = tmp_path / "bad.tsv"
        tsv.write_text(
            "system\tdoc\tdoc_id\tseg_id\trater\tsource\ttarget\tcategory\tseverity\n"
            "s\td\t1\t1\tr1\t源句子。\tBroken <v>markup here.\tfluency\tminor\n"
            "s\td\t1\t2\tr1\t源句子。\tGood <v>text</v>.\tfluency\tcatastrophic\n"
            "s\td\t1\t3\tr1\t源句子。\tNo markup at all.\tfluency\tminor\n"
            "s\td\t1\t4\tr1\t源句子。\tOmission <v>without</v> source markup.\taccuracy/omission\tmajor\n",
            encoding="utf-8",
        )
        with caplog.at_level(logging.WARNING, logger="mqmgen.data_io"):
            pairs = load_gold_tsv(tsv, ("zh", "en"))
        messages = [r.getMessage() for r in caplog.records]
        assert sum("unbalanced" in m for m in messages) == 1
        assert sum("severity" in m for m in messages) == 1
        assert sum("without target-side markup" in m for m in messages) == 1
        assert sum("omission row without source-side markup" in m for m in messages) == 1
        # rows that failed still created their segments, with zero-error annotations
        assert all(a.errors == () for _, a in pairs)

    def test_missing_columns_raise(self, tmp_path):
        tsv = tmp_path / "short.tsv"
        tsv.write_text("system\tdoc\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_gold_tsv(tsv, ("zh", "en"))


class TestAnnotationJsonl:
    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        assert read_annotations_jsonl(path) == []

    def test_round_trip_random(self, tmp_path):
        rng = random.Random(404)
        segs = [make_segment(rng, f"s{i}", rng.randint(1, 8), rng.randint(1, 8)) for i in range(100)]
        anns = [random_annotation(rng, s) for s in segs]
        path = tmp_path / "anns.jsonl"
        write_annotations_jsonl(path, anns)
        assert read_annotations_jsonl(path) == anns

    def test_truncated_line_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"segment_id": "x", "annot\n', encoding="utf-8")
        with pytest.raises(DataError) as err:
            read_annotations_jsonl(path)
        assert ":1:" in str(err.value)

    def test_segments_round_trip(self, tmp_path):
        rng = random.Random(405)
        segs = [make_segment(rng, f"s{i}", 3, 5) for i in range(20)]
        path = tmp_path / "segs.jsonl"
        write_segments_jsonl(path, segs)
        assert read_segments_jsonl(path) == segs

    def test_duplicate_segment_ids_rejected(self, tmp_path):
        rng = random.Random(406)
        seg = make_segment(rng, "dup", 3, 5)
        path = tmp_path / "segs.jsonl"
        write_segments_jsonl(path, [seg, seg])
        with pytest.raises(DataError) as err:
            read_segments_jsonl(path)
        assert "duplicate segment id" in str(err.value)


class TestExportQeCsv:
    def _setup(self, rng):
        segs = [make_segment(rng, f"s{i}", 4, 6) for i in range(3)]
        anns = [random_annotation(rng, s) for s in segs]
        return segs, anns

    def test_row_count_and_header(self, tmp_path):
        rng = random.Random(1)
        segs, anns = self._setup(rng)
        path = tmp_path / "train.csv"
        assert export_qe_csv(anns, segs, path) == 3
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "src,mt,score"
        assert len(lines) == 4

    def test_zero_penalty_scores_one(self, tmp_path):
        rng = random.Random(2)
        seg = make_segment(rng, "s0", 4, 4)
        from mqmgen.core import Annotation, SeverityScheme

        ann = Annotation("s0", "m", (), SeverityScheme.BINARY_LABELS, 0.0, 1.0)
        path = tmp_path / "train.csv"
        export_qe_csv([ann], [seg], path)
        rows = read_qe_csv(path)
        assert rows[0].score == 1.0

    def test_round_trip_exact(self, tmp_path):
        rng = random.Random(3)
        segs, anns = self._setup(rng)
        path = tmp_path / "train.csv"
        export_qe_csv(anns, segs, path)
        rows = read_qe_csv(path)
        by_id = {s.id: s for s in segs}
        expected = segment_quality(anns, "average")
        for row, seg_id in zip(rows, sorted(expected)):
            assert row.src == by_id[seg_id].source
            assert row.mt == by_id[seg_id].target
            assert row.score == expected[seg_id]

    def test_missing_segment_named_in_error(self, tmp_path):
        rng = random.Random(4)
        segs, anns = self._setup(rng)
        with pytest.raises(ContractError) as err:
            export_qe_csv(anns, segs[:2], tmp_path / "x.csv")
        assert "s2" in str(err.value)

    def test_byte_identical_across_runs(self, tmp_path):
        rng = random.Random(5)
        segs, anns = self._setup(rng)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_qe_csv(anns, segs, p1)
        export_qe_csv(list(reversed(anns)), list(reversed(segs)), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestSegmentQuality:
    def test_average_and_first(self):
        from mqmgen.core import Annotation, SeverityScheme

        def ann(rater, q):
            return Annotation("s", rater, (), SeverityScheme.BINARY_LABELS, 0.0, q)

        anns = [ann("r2", 0.4), ann("r1", 0.8)]
        assert segment_quality(anns, "average")["s"] == pytest.approx(0.6)
        assert segment_quality(anns, "first")["s"] == 0.8  # r1 sorts first

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            segment_quality([], "median")
