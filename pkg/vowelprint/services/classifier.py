"""Rule-based vowel classification.

Each Russian stressed vowel is a template of frequency ranges plus an order
relation between the two dominant lower-band harmonics. A frame scores the
fraction of template criteria it satisfies; segments vote over frames.

Lower-band dominance is read like the upper band: the two strongest
lower-band peaks are ordered by frequency. "First over second" means the
lower-frequency one is the more intense (low1 lies below low2), "second over
first" that the higher-frequency one is (low1 lies above low2).
"""

from __future__ import annotations

import csv
from collections import Counter
from collections.abc import Sequence
from functools import lru_cache
from importlib.resources import files
from pathlib import Path
from typing import Optional, Union

import structlog

from vowelprint.exceptions import (
    NoVoicedFrames,
    TemplateFileError,
    TrendUnavailable,
    UnknownSound,
    UnvoicedFrame,
)
from vowelprint.models.schemas import (
    BandTrack,
    ClassificationResult,
    ClassifierConfig,
    ComparisonReport,
    Context,
    CorrespondenceRow,
    CriterionResult,
    Dominance,
    ExpectedTrend,
    FrameHarmonics,
    FrequencyRange,
    PositionPattern,
    SegmentationConfig,
    Trend,
    TrendConfig,
    UpShape,
    Verdict,
    VowelTemplate,
)
from vowelprint.services.harmonics import band_track, dynamics_boundaries

logger = structlog.get_logger()

UNKNOWN = "unknown"

TEMPLATES_FILE = "vowel_templates.tsv"
CORRESPONDENCE_FILE = "correspondence.tsv"

# Cyrillic letters that look like the Latin ones used in template labels.
_LOOKALIKES = str.maketrans({"а": "a", "о": "o", "у": "y"})

PathLike = Union[str, Path]


# ============================================================================
# Tables
# ============================================================================


def normalize_label(label: str) -> str:
    """'a', '[a]' and ' [а] ' all become '[a]'."""
    text = label.strip()
    if not text.startswith("["):
        text = f"[{text}]"
    return text


def normalize_vowel(label: str) -> str:
    return normalize_label(label).translate(_LOOKALIKES)


def _rows(text: str, source: str) -> list[tuple[int, list[str]]]:
    rows = []
    reader = csv.reader(text.splitlines(), delimiter="\t", quoting=csv.QUOTE_NONE)
    for line_no, fields in enumerate(reader, start=1):
        if not fields or not fields[0].strip() or fields[0].startswith("#"):
            continue
        rows.append((line_no, [f.strip() for f in fields]))
    if not rows:
        raise TemplateFileError(source, 0, "no rows")
    return rows


def _range(lo: str, hi: str) -> Optional[FrequencyRange]:
    if lo == "-" and hi == "-":
        return None
    return FrequencyRange(lo=float(lo), hi=float(hi))


def parse_templates(text: str, source: str = "<string>") -> list[VowelTemplate]:
    templates: list[VowelTemplate] = []
    for line_no, fields in _rows(text, source):
        if len(fields) != 9:
            raise TemplateFileError(source, line_no, f"expected 9 fields, got {len(fields)}")
        label, low_lo, low_hi, dominance, up1_lo, up1_hi, up2_lo, up2_hi, shape = fields
        try:
            templates.append(
                VowelTemplate(
                    label=normalize_vowel(label),
                    low_range=FrequencyRange(lo=float(low_lo), hi=float(low_hi)),
                    low_dominance=Dominance(dominance),
                    up1_range=_range(up1_lo, up1_hi),
                    up2_range=_range(up2_lo, up2_hi),
                    up_shape=UpShape(shape),
                )
            )
        except ValueError as exc:
            raise TemplateFileError(source, line_no, str(exc).splitlines()[0]) from exc

    labels = [t.label for t in templates]
    if len(set(labels)) != len(labels):
        raise TemplateFileError(source, 0, "duplicate template labels")
    return templates


def parse_correspondence(text: str, source: str = "<string>") -> list[CorrespondenceRow]:
    rows: list[CorrespondenceRow] = []
    for line_no, fields in _rows(text, source):
        if len(fields) != 4:
            raise TemplateFileError(source, line_no, f"expected 4 fields, got {len(fields)}")
        english, expected, verdict, note = fields
        parts = [[normalize_vowel(alt) for alt in part.split("|")] for part in expected.split("+")]
        try:
            rows.append(
                CorrespondenceRow(
                    english=normalize_label(english),
                    expected_russian=parts,
                    verdict=Verdict(verdict),
                    note=note,
                )
            )
        except ValueError as exc:
            raise TemplateFileError(source, line_no, str(exc).splitlines()[0]) from exc
    return rows


def _read(path: PathLike) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise TemplateFileError(str(path), 0, exc.strerror or str(exc)) from exc


def load_templates(path: PathLike) -> list[VowelTemplate]:
    templates = parse_templates(_read(path), str(path))
    logger.info("Loaded templates", path=str(path), count=len(templates))
    return templates


def load_correspondence(path: PathLike) -> list[CorrespondenceRow]:
    rows = parse_correspondence(_read(path), str(path))
    logger.info("Loaded correspondence", path=str(path), count=len(rows))
    return rows


@lru_cache(maxsize=1)
def _builtin_templates() -> tuple[VowelTemplate, ...]:
    text = (files("vowelprint") / "data" / TEMPLATES_FILE).read_text(encoding="utf-8")
    return tuple(parse_templates(text, TEMPLATES_FILE))


@lru_cache(maxsize=1)
def _builtin_correspondence() -> tuple[CorrespondenceRow, ...]:
    text = (files("vowelprint") / "data" / CORRESPONDENCE_FILE).read_text(encoding="utf-8")
    return tuple(parse_correspondence(text, CORRESPONDENCE_FILE))


def builtin_templates() -> list[VowelTemplate]:
    """Templates for [a], [o], [и], [ы], [y], [э] in tie-break order."""
    return list(_builtin_templates())


def correspondence_table() -> list[CorrespondenceRow]:
    return list(_builtin_correspondence())


def correspondence(
    english_label: str, rows: Optional[Sequence[CorrespondenceRow]] = None
) -> CorrespondenceRow:
    """Row for one English sound, from rows or the built-in table.

    Raises:
        UnknownSound: the sound has no row (including [eə], [au], [ei]).
    """
    wanted = normalize_label(english_label)
    for row in rows if rows is not None else _builtin_correspondence():
        if row.english == wanted:
            return row
    raise UnknownSound(wanted)


def describe_expected(row: CorrespondenceRow) -> str:
    """'[и]+([э] or [a])' style rendering of the expected composition."""
    rendered = []
    for part in row.expected_russian:
        text = " or ".join(part)
        if len(part) > 1 and row.is_diphthong:
            text = f"({text})"
        rendered.append(text)
    return "+".join(rendered)


_PATTERNS = (
    PositionPattern(context=Context.HARD_HARD, expected_trend=ExpectedTrend.REDUCED),
    PositionPattern(context=Context.HARD_SOFT, expected_trend=ExpectedTrend.RISING),
    PositionPattern(context=Context.SOFT_HARD, expected_trend=ExpectedTrend.FALLING),
    PositionPattern(context=Context.SOFT_SOFT, expected_trend=ExpectedTrend.ELEVATED),
)


def position_patterns() -> list[PositionPattern]:
    """Consonant context to expected upper-band behaviour, one row per context."""
    return list(_PATTERNS)


def _pattern(context: Context) -> PositionPattern:
    return next(p for p in _PATTERNS if p.context == context)


# ============================================================================
# Frame scoring
# ============================================================================


def _in_range(
    name: str, peak_frequency: Optional[float], rng: FrequencyRange, tolerance: float
) -> CriterionResult:
    passed = peak_frequency is not None and rng.contains(peak_frequency, tolerance)
    return CriterionResult(name=name, passed=passed)


def evaluate_template(
    template: VowelTemplate,
    fh: FrameHarmonics,
    config: ClassifierConfig,
    trend: Optional[Trend] = None,
) -> list[CriterionResult]:
    """Criterion outcomes of one template; the convex criterion needs a trend."""
    tol = config.range_tolerance_hz
    low1 = fh.low1.frequency if fh.low1 else None
    up1 = fh.up1.frequency if fh.up1 else None
    up2 = fh.up2.frequency if fh.up2 else None

    results = [_in_range("low_range", low1, template.low_range, tol)]

    dominance = False
    if fh.low1 is not None and fh.low2 is not None:
        if template.low_dominance == Dominance.FIRST_OVER_SECOND:
            dominance = fh.low1.frequency < fh.low2.frequency
        else:
            dominance = fh.low1.frequency > fh.low2.frequency
    results.append(CriterionResult(name="low_dominance", passed=dominance))

    if template.up1_range is not None:
        results.append(_in_range("up1_range", up1, template.up1_range, tol))

    if template.up_shape == UpShape.TWO_BANDS and template.up2_range is not None:
        results.append(_in_range("up2_range", up2, template.up2_range, tol))
    elif template.up_shape == UpShape.SECOND_OVER_FIRST:
        passed = False
        if fh.up1 is not None and fh.up2 is not None:
            lower, higher = sorted((fh.up1, fh.up2), key=lambda p: p.frequency)
            passed = higher.intensity > lower.intensity
        results.append(
            CriterionResult(
                name="up_second_over_first",
                passed=passed,
                note="upper peaks re-ordered by frequency; the higher one must dominate",
            )
        )
    elif template.up_shape == UpShape.CONVEX_UP and trend is not None:
        results.append(CriterionResult(name="up_convex", passed=trend == Trend.CONVEX_UP))

    return results


def classify_frame(
    fh: FrameHarmonics,
    templates: Optional[Sequence[VowelTemplate]] = None,
    config: Optional[ClassifierConfig] = None,
    trend: Optional[Trend] = None,
) -> ClassificationResult:
    """Best template for one voiced frame.

    Ties go to more satisfied criteria, then to template order.

    Raises:
        UnvoicedFrame: fh is not voiced.
    """
    if not fh.voiced:
        raise UnvoicedFrame()
    templates = list(templates) if templates is not None else builtin_templates()
    config = config or ClassifierConfig()

    best: Optional[tuple[float, int, VowelTemplate, list[CriterionResult]]] = None
    scores: dict[str, float] = {}
    for template in templates:
        criteria = evaluate_template(template, fh, config, trend)
        passed = sum(c.passed for c in criteria)
        score = passed / len(criteria)
        scores[template.label] = score
        if best is None or (score, passed) > (best[0], best[1]):
            best = (score, passed, template, criteria)

    if best is None:
        raise ValueError("classify_frame needs at least one template")
    score, passed, template, criteria = best
    return ClassificationResult(
        label=template.label if score >= config.accept_threshold else UNKNOWN,
        score=score,
        candidate=template.label,
        passed=passed,
        total=len(criteria),
        per_criterion=criteria,
        scores=scores,
    )


# ============================================================================
# Segment level
# ============================================================================


def classify_segment(
    track: BandTrack,
    templates: Optional[Sequence[VowelTemplate]] = None,
    config: Optional[ClassifierConfig] = None,
) -> ClassificationResult:
    """Majority vote of the voiced frames, scored by the winners' mean.

    Raises:
        NoVoicedFrames: the track has no voiced frame.
    """
    voiced = track.voiced_frames
    if not voiced:
        raise NoVoicedFrames()
    templates = list(templates) if templates is not None else builtin_templates()
    config = config or ClassifierConfig()
    order = {t.label: i for i, t in enumerate(templates)}

    results = [classify_frame(fh, templates, config, track.trend_up1) for fh in voiced]
    votes = Counter(r.candidate for r in results)
    winner = min(votes, key=lambda label: (-votes[label], order[label]))
    winning = [r for r in results if r.candidate == winner]
    score = sum(r.score for r in winning) / len(winning)

    per_criterion = []
    for position, criterion in enumerate(winning[0].per_criterion):
        hits = sum(r.per_criterion[position].passed for r in winning)
        note = f"{hits}/{len(winning)} frames"
        if criterion.note:
            note = f"{note}; {criterion.note}"
        per_criterion.append(
            CriterionResult(name=criterion.name, passed=2 * hits > len(winning), note=note)
        )

    mean_scores = {
        t.label: sum(r.scores[t.label] for r in results) / len(results) for t in templates
    }
    logger.debug("Classified segment", winner=winner, votes=dict(votes), score=score)
    return ClassificationResult(
        label=winner if score >= config.accept_threshold else UNKNOWN,
        score=score,
        candidate=winner,
        passed=sum(c.passed for c in per_criterion),
        total=len(per_criterion),
        per_criterion=per_criterion,
        scores=mean_scores,
    )


def position_pattern(
    track: BandTrack,
    templates: Optional[Sequence[VowelTemplate]] = None,
    config: Optional[ClassifierConfig] = None,
) -> PositionPattern:
    """Guess the consonant context from the up1 trend.

    Flat (and convex) tracks are "elevated" when the mean up1 lies above the
    midpoint of the winning template's first upper range, otherwise "reduced".

    Raises:
        TrendUnavailable: the track has no trend.
    """
    if track.trend_up1 is None:
        raise TrendUnavailable()
    if track.trend_up1 == Trend.RISING:
        return _pattern(Context.HARD_SOFT)
    if track.trend_up1 == Trend.FALLING:
        return _pattern(Context.SOFT_HARD)

    templates = list(templates) if templates is not None else builtin_templates()
    result = classify_segment(track, templates, config)
    template = next(t for t in templates if t.label == result.candidate)
    up1_values = [fh.up1.frequency for fh in track.voiced_frames if fh.up1 is not None]
    mean_up1 = sum(up1_values) / len(up1_values)

    midpoint = template.up1_range.midpoint if template.up1_range else mean_up1
    if mean_up1 > midpoint:
        return _pattern(Context.SOFT_SOFT)
    return _pattern(Context.HARD_HARD)


def compare_analysis(
    track: BandTrack,
    english_label: str,
    templates: Optional[Sequence[VowelTemplate]] = None,
    config: Optional[ClassifierConfig] = None,
    segmentation: Optional[SegmentationConfig] = None,
    trend: Optional[TrendConfig] = None,
    rows: Optional[Sequence[CorrespondenceRow]] = None,
) -> ComparisonReport:
    """Classify the track and check it against the expected Russian counterpart.

    Diphthongs are split at the first formant jump of the voiced frames (or
    in half when there is none) and each part is classified on its own. The
    jump threshold follows the track F0 the same way segmentation does.

    Raises:
        UnknownSound: no row for english_label.
        NoVoicedFrames: the track (or one diphthong half) has no voiced frame.
    """
    row = correspondence(english_label, rows)
    voiced = track.voiced_frames
    if not voiced:
        raise NoVoicedFrames()

    if row.is_diphthong:
        f0s = track.voiced_f0s
        boundaries = dynamics_boundaries(voiced, f0s, segmentation or SegmentationConfig())
        split = boundaries[0] if boundaries else len(voiced) // 2
        parts = [(voiced[:split], f0s[:split]), (voiced[split:], f0s[split:])]
        if not all(part for part, _ in parts):
            raise NoVoicedFrames()
        results = [
            classify_segment(
                band_track(part, track.hop_seconds, trend, part_f0s), templates, config
            )
            for part, part_f0s in parts
        ]
    else:
        results = [classify_segment(track, templates, config)]

    achieved = [r.label for r in results]
    match = len(achieved) == len(row.expected_russian) and all(
        label in options for label, options in zip(achieved, row.expected_russian)
    )
    logger.info("Compared analysis", english=row.english, achieved=achieved, match=match)
    return ComparisonReport(
        english=row.english,
        row=row,
        achieved=achieved,
        results=results,
        match=match,
        verdict=row.verdict,
    )
