import math
import random

import pytest

from mqmgen.core import ErrorCategory, ErrorSpan, Severity, SeverityScheme
from mqmgen.errors import ConfigError, ContractError
from mqmgen.scoring import (
    MappingResult,
    error_stats,
    map_severity,
    penalty,
    quality,
)

from genutil import make_segment


def err(severity, category=ErrorCategory.ACCURACY):
    return ErrorSpan(category, severity, "x", (0, 0))


class TestMapSeverity:
    # the full mapping table: lenient keeps 1-3 as minor, strict drops 1-2
    @pytest.mark.parametrize("raw,scheme,expected", [
        (1, SeverityScheme.SCALE_M13, MappingResult.MINOR),
        (2, SeverityScheme.SCALE_M13, MappingResult.MINOR),
        (3, SeverityScheme.SCALE_M13, MappingResult.MINOR),
        (4, SeverityScheme.SCALE_M13, MappingResult.MAJOR),
        (5, SeverityScheme.SCALE_M13, MappingResult.MAJOR),
        (1, SeverityScheme.SCALE_M3, MappingResult.DISCARD),
        (2, SeverityScheme.SCALE_M3, MappingResult.DISCARD),
        (3, SeverityScheme.SCALE_M3, MappingResult.MINOR),
        (4, SeverityScheme.SCALE_M3, MappingResult.MAJOR),
        (5, SeverityScheme.SCALE_M3, MappingResult.MAJOR),
    ])
    def test_mapping_table(self, raw, scheme, expected):
        assert map_severity(raw, scheme) is expected

    def test_binary_scheme_rejected(self):
        with pytest.raises(ConfigError):
            map_severity(3, SeverityScheme.BINARY_LABELS)

    def test_out_of_range_scale(self):
        with pytest.raises(ValueError):
            map_severity(0, SeverityScheme.SCALE_M3)
        with pytest.raises(ValueError):
            map_severity(6, SeverityScheme.SCALE_M13)


class TestPenalty:
    def test_empty(self):
        assert penalty([]) == 0.0

    def test_single_major(self):
        assert penalty([err(Severity.MAJOR)]) == 5.0

    def test_major_two_minors(self):
        assert penalty([err(Severity.MAJOR), err(Severity.MINOR), err(Severity.MINOR)]) == 7.0

    def test_neutral_weighs_zero(self):
        assert penalty([err(Severity.NEUTRAL), err(Severity.MINOR)]) == 1.0

    def test_permutation_invariant(self):
        rng = random.Random(3)
        sev = list(Severity)
        for _ in range(100):
            errors = [err(rng.choice(sev)) for _ in range(rng.randint(0, 6))]
            shuffled = errors[:]
            rng.shuffle(shuffled)
            assert penalty(errors) == penalty(shuffled)


class TestQuality:
    def test_error_free(self):
        assert quality(0) == 1.0

    def test_mid_range(self):
        assert quality(7) == 0.72

    def test_clamped_at_cap(self):
        assert quality(30) == 0.0
        assert quality(25) == 0.0

    def test_negative_penalty(self):
        with pytest.raises(ContractError):
            quality(-1)

    def test_custom_divisor(self):
        assert quality(5, divisor=10) == 0.5

    def test_bounds_and_monotonicity(self):
        rng = random.Random(11)
        for _ in range(500):
            p = rng.uniform(0, 60)
            q = quality(p)
            assert 0.0 <= q <= 1.0
            added = rng.choice([1.0, 5.0])
            assert quality(p + added) <= q


class TestSchemeDominance:
    def test_strict_mapping_never_scores_worse(self):
        rng = random.Random(17)
        for _ in range(300):
            scales = [rng.randint(1, 5) for _ in range(rng.randint(0, 5))]
            kept = {}
            for scheme in (SeverityScheme.SCALE_M13, SeverityScheme.SCALE_M3):
                kept[scheme] = [
                    (i, map_severity(s, scheme))
                    for i, s in enumerate(scales)
                    if map_severity(s, scheme) is not MappingResult.DISCARD
                ]
            m13_ids = {i for i, _ in kept[SeverityScheme.SCALE_M13]}
            m3_ids = {i for i, _ in kept[SeverityScheme.SCALE_M3]}
            assert m3_ids <= m13_ids
            pen = {
                scheme: penalty([
                    err(Severity.MAJOR if m is MappingResult.MAJOR else Severity.MINOR)
                    for _, m in kept[scheme]
                ])
                for scheme in kept
            }
            assert pen[SeverityScheme.SCALE_M3] <= pen[SeverityScheme.SCALE_M13]
            assert quality(pen[SeverityScheme.SCALE_M3]) >= quality(pen[SeverityScheme.SCALE_M13])


class TestErrorStats:
    def test_average_includes_zero_error_segments(self):
        rng = random.Random(5)
        seg1 = make_segment(rng, "a", 4, 6)
        seg2 = make_segment(rng, "b", 4, 6)
        from mqmgen.core import Annotation

        def ann(seg, n_errors):
            errors = tuple(
                ErrorSpan(ErrorCategory.ACCURACY, Severity.MINOR, "w", (0, 0))
                for _ in range(n_errors)
            )
            return Annotation(seg.id, "r1", errors, SeverityScheme.BINARY_LABELS,
                              penalty(errors), quality(penalty(errors)))

        stats = error_stats([ann(seg1, 2), ann(seg2, 1)])
        assert len(stats) == 1
        assert stats[0].avg_errors == 1.5

    def test_major_minor_ratio(self):
        from mqmgen.core import Annotation

        errors = (err(Severity.MAJOR), err(Severity.MINOR), err(Severity.MINOR))
        a = Annotation("s", "r1", errors, SeverityScheme.BINARY_LABELS,
                       penalty(errors), quality(penalty(errors)))
        stats = error_stats([a])
        assert stats[0].major_minor_ratio == 0.5

    def test_zero_error_segments_report_infinite_ratio(self):
        from mqmgen.core import Annotation

        a = Annotation("s", "r1", (), SeverityScheme.BINARY_LABELS, 0.0, 1.0)
        stats = error_stats([a, a])
        assert stats[0].avg_errors == 0.0
        assert math.isinf(stats[0].major_minor_ratio)

    def test_category_counts(self):
        from mqmgen.core import Annotation

        errors = (err(Severity.MAJOR, ErrorCategory.STYLE), err(Severity.MINOR, ErrorCategory.STYLE))
        a = Annotation("s", "m", errors, SeverityScheme.BINARY_LABELS,
                       penalty(errors), quality(penalty(errors)))
        stats = error_stats([a])
        assert stats[0].category_counts[ErrorCategory.STYLE] == 2
        assert stats[0].category_counts[ErrorCategory.ACCURACY] == 0
