"""Serialization of reports to JSON, CSV and plain-text tables."""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Sequence
from typing import Optional

from vowelprint.models.schemas import (
    AnalysisReport,
    CorrespondenceRow,
    FrameHarmonics,
    FrequencyRange,
    PositionPattern,
    SpectralPeak,
    VowelTemplate,
)
from vowelprint.services.classifier import describe_expected
from vowelprint.services.pipeline import TrackRow

TRACK_COLUMNS = (
    "time",
    "f0",
    "f0_intensity",
    "low1_hz",
    "low1_int",
    "low2_hz",
    "low2_int",
    "up1_hz",
    "up1_int",
    "up2_hz",
    "up2_int",
)

FRAME_COLUMNS = (
    "segment",
    "frame",
    "time",
    "voiced",
    "voicing_ratio",
    "f0",
    "f0_intensity",
    "low1_hz",
    "low1_int",
    "low2_hz",
    "low2_int",
    "up1_hz",
    "up1_int",
    "up2_hz",
    "up2_int",
    "h2_ratio",
    "h3_ratio",
    "h4_ratio",
    "label",
)


def _num(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.6g}"


def _peak_cells(peak: Optional[SpectralPeak]) -> list[str]:
    if peak is None:
        return ["", ""]
    return [_num(peak.frequency), _num(peak.intensity)]


def _harmonic_cells(fh: FrameHarmonics) -> list[str]:
    cells: list[str] = []
    for peak in (fh.low1, fh.low2, fh.up1, fh.up2):
        cells += _peak_cells(peak)
    return cells


def _write_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def report_json(report: AnalysisReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def report_csv(report: AnalysisReport) -> str:
    """Per-frame flat table; `label` repeats the segment classification."""
    rows = []
    for number, seg in enumerate(report.segments):
        label = seg.classification.label if seg.classification else ""
        for record in seg.frames:
            ratios: list[Optional[float]] = [*record.harmonic_ratios, None, None, None][:3]
            rows.append(
                [
                    str(number),
                    str(record.index),
                    _num(record.time),
                    "1" if record.pitch.voiced else "0",
                    _num(record.pitch.voicing_ratio),
                    _num(record.pitch.f0),
                    _num(record.pitch.intensity) if record.pitch.voiced else "",
                    *_harmonic_cells(record.harmonics),
                    *(_num(r) for r in ratios),
                    label,
                ]
            )
    return _write_csv(FRAME_COLUMNS, rows)


def tracks_csv(rows: Sequence[TrackRow]) -> str:
    return _write_csv(
        TRACK_COLUMNS,
        (
            [
                _num(row.time),
                _num(row.pitch.f0),
                _num(row.pitch.intensity) if row.pitch.voiced else "",
                *_harmonic_cells(row.harmonics),
            ]
            for row in rows
        ),
    )


def report_schema() -> str:
    return json.dumps(AnalysisReport.model_json_schema(), indent=2, ensure_ascii=False) + "\n"


# ============================================================================
# Constant tables
# ============================================================================


def _rng(value: Optional[FrequencyRange]) -> str:
    return "-" if value is None else f"{value.lo:g}-{value.hi:g}"


def templates_table(templates: Sequence[VowelTemplate]) -> str:
    header = ("vowel", "low", "dominance", "up1", "up2", "shape")
    rows = [
        (
            t.label,
            _rng(t.low_range),
            t.low_dominance.value,
            _rng(t.up1_range),
            _rng(t.up2_range),
            t.up_shape.value,
        )
        for t in templates
    ]
    return _align(header, rows)


def correspondence_text(rows: Sequence[CorrespondenceRow]) -> str:
    header = ("english", "expected", "verdict", "note")
    body = [(r.english, describe_expected(r), r.verdict.value, r.note) for r in rows]
    return _align(header, body)


def patterns_table(patterns: Sequence[PositionPattern]) -> str:
    header = ("context", "expected_trend")
    return _align(header, [(p.context.value, p.expected_trend.value) for p in patterns])


def _align(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(row[i])) for row in [header, *rows]) for i in range(len(header))]
    lines = [
        "  ".join(str(cell).ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in [header, *rows]
    ]
    return "\n".join(lines) + "\n"
