"""Command-line front end.

    vowelprint analyze INPUT.wav [--format json|csv] [-o OUT]
    vowelprint classify INPUT.wav [--expect LABEL] [--english LABEL] [--correspondence FILE]
    vowelprint tracks INPUT.wav [-o OUT]
    vowelprint synth OUTPUT.wav [--vowel V | --formant c,bw,gain[,target[,linear|arc]] ...]
    vowelprint table [--which templates|correspondence|patterns|all] [--correspondence FILE]
    vowelprint schema

Exit status: 0 on success or match, 1 on a classification mismatch, 2 on any
input, configuration or synthesis error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

import structlog
from pydantic import ValidationError

from vowelprint import __version__
from vowelprint.config.observability import configure_logging
from vowelprint.config.settings import load_settings
from vowelprint.exceptions import InvalidSpec, IoFailure, VowelprintError
from vowelprint.models.schemas import BandConfig, CorrespondenceRow, VowelTemplate, WindowKind
from vowelprint.services import classifier, reporting, signal_io, synth
from vowelprint.services.pipeline import AnalysisService

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_ERROR = 2

BAND_PRESETS = {
    "default": (60.0, 750.0, 750.0, 2500.0),
    "narrow": (60.0, 800.0, 800.0, 2400.0),
}

VERBOSITY = {0: None, 1: "INFO"}


# ============================================================================
# Argument parsing
# ============================================================================


def _floats(text: str, count: int, flag: str) -> list[float]:
    problem = f"{flag} expects {count} comma-separated numbers"
    try:
        values = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(problem) from None
    if len(values) != count:
        raise argparse.ArgumentTypeError(problem)
    return values


def _bands(text: str) -> tuple[float, ...]:
    if text in BAND_PRESETS:
        return BAND_PRESETS[text]
    return tuple(_floats(text, 4, "--bands"))


def _f0_range(text: str) -> tuple[float, ...]:
    return tuple(_floats(text, 2, "--f0-range"))


def _logging_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs"
    )
    parent.add_argument("--log-format", choices=["json", "console"], default=None)
    return parent


def _analysis_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("analysis")
    group.add_argument(
        "--bands",
        type=_bands,
        default=None,
        help="lo1,hi1,lo2,hi2 in Hz or a preset (default, narrow)",
    )
    group.add_argument("--frame", type=int, default=None, help="Frame length in samples")
    group.add_argument("--hop", type=int, default=None, help="Hop length in samples")
    group.add_argument("--window", choices=[w.value for w in WindowKind], default=None)
    group.add_argument("--f0-range", type=_f0_range, default=None, help="lo,hi F0 search range")
    group.add_argument("--voicing-threshold", type=float, default=None)
    group.add_argument("--slope-threshold", type=float, default=None, help="Hz/s")
    group.add_argument("--jump-threshold", type=float, default=None, help="Hz")
    group.add_argument("--accept-threshold", type=float, default=None)
    group.add_argument("--templates", type=Path, default=None, help="Template TSV file")
    return parent


def _parser() -> argparse.ArgumentParser:
    logging_flags = _logging_parent()
    analysis_flags = _analysis_parent()

    parser = argparse.ArgumentParser(
        prog="vowelprint",
        description="Harmonic-pattern analysis of stressed vowels",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser(
        "analyze", parents=[logging_flags, analysis_flags], help="Full analysis report"
    )
    analyze.add_argument("input", type=Path)
    analyze.add_argument("--format", choices=["json", "csv"], default="json")
    analyze.add_argument("-o", "--output", type=Path, default=None)

    classify = commands.add_parser(
        "classify", parents=[logging_flags, analysis_flags], help="Classify the voiced region"
    )
    classify.add_argument("input", type=Path)
    classify.add_argument("--expect", default=None, help="Expected Russian vowel")
    classify.add_argument("--english", default=None, help="English sound to compare against")
    classify.add_argument(
        "--correspondence", type=Path, default=None, help="Correspondence TSV file"
    )

    tracks = commands.add_parser(
        "tracks", parents=[logging_flags, analysis_flags], help="Per-frame harmonic tracks (CSV)"
    )
    tracks.add_argument("input", type=Path)
    tracks.add_argument("-o", "--output", type=Path, default=None)

    synth_cmd = commands.add_parser("synth", parents=[logging_flags], help="Render a test signal")
    synth_cmd.add_argument("output", type=Path)
    synth_cmd.add_argument("--vowel", default=None, help="Render a template vowel")
    synth_cmd.add_argument("--f0", type=float, default=150.0)
    synth_cmd.add_argument("--f0-end", type=float, default=None, help="Glide target (Hz)")
    synth_cmd.add_argument("--dur", type=float, default=0.5, help="Duration in seconds")
    synth_cmd.add_argument("--sample-rate", type=int, default=16000)
    synth_cmd.add_argument(
        "--formant",
        action="append",
        default=[],
        metavar="C,BW,GAIN[,TARGET[,linear|arc]]",
        help="Formant bump; repeatable",
    )
    synth_cmd.add_argument("--noise", type=float, default=0.0)
    synth_cmd.add_argument("--seed", type=int, default=0)

    table = commands.add_parser("table", parents=[logging_flags], help="Print constant tables")
    table.add_argument(
        "--which",
        choices=["templates", "correspondence", "patterns", "all"],
        default="all",
    )
    table.add_argument(
        "--correspondence", type=Path, default=None, help="Correspondence TSV file"
    )

    commands.add_parser("schema", parents=[logging_flags], help="Print the report JSON schema")
    return parser


def _parse_args(argv: Optional[Sequence[str]]) -> argparse.Namespace:
    return _parser().parse_args(argv)


# ============================================================================
# Settings
# ============================================================================


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    """Nested settings dict holding only the flags the user actually passed."""
    overrides: dict[str, Any] = {}

    def put(section: str, key: str, value: Any) -> None:
        if value is not None:
            overrides.setdefault(section, {})[key] = value

    if getattr(args, "bands", None) is not None:
        bands = BandConfig.from_edges(*args.bands)
        put("bands", "lower", bands.lower.model_dump())
        put("bands", "upper", bands.upper.model_dump())
    put("frame", "frame_length", getattr(args, "frame", None))
    put("frame", "hop_length", getattr(args, "hop", None))
    put("frame", "window", getattr(args, "window", None))
    if getattr(args, "f0_range", None) is not None:
        put("pitch", "f0_min", args.f0_range[0])
        put("pitch", "f0_max", args.f0_range[1])
    put("pitch", "voicing_threshold", getattr(args, "voicing_threshold", None))
    put("trend", "slope_threshold", getattr(args, "slope_threshold", None))
    put("segmentation", "jump_threshold", getattr(args, "jump_threshold", None))
    put("classifier", "accept_threshold", getattr(args, "accept_threshold", None))
    return overrides


def _templates(args: argparse.Namespace) -> list[VowelTemplate]:
    path = getattr(args, "templates", None)
    if path is None:
        return classifier.builtin_templates()
    return classifier.load_templates(path)


def _correspondence(args: argparse.Namespace) -> list[CorrespondenceRow]:
    path = getattr(args, "correspondence", None)
    if path is None:
        return classifier.correspondence_table()
    return classifier.load_correspondence(path)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    try:
        output.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(output), exc.strerror or str(exc)) from exc
    logger.info("Wrote report", path=str(output), bytes=len(text.encode("utf-8")))


# ============================================================================
# Commands
# ============================================================================


def cmd_analyze(args: argparse.Namespace, service: AnalysisService) -> int:
    report = service.analyze(signal_io.load_wav(args.input))
    text = reporting.report_csv(report) if args.format == "csv" else reporting.report_json(report)
    _emit(text, args.output)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace, service: AnalysisService) -> int:
    buffer = signal_io.load_wav(args.input)
    result = service.classify(buffer)
    print(f"label={result.label} score={result.score:.3f} candidate={result.candidate}")

    status = EXIT_OK
    if args.expect is not None:
        expected = classifier.normalize_vowel(args.expect)
        verdict = "match" if result.label == expected else "mismatch"
        print(f"expect {expected}; {verdict}")
        if result.label != expected:
            status = EXIT_MISMATCH

    if args.english is not None:
        comparison = service.compare(buffer, args.english)
        row = comparison.row
        print(f"{row.english}: {row.note}")
        if row.is_diphthong:
            print(f"achieved {'+'.join(comparison.achieved)}")
        outcome = "match" if comparison.match else "mismatch"
        expected_text = classifier.describe_expected(row)
        print(f"expected {expected_text}; verdict {row.verdict.value}; {outcome}")
        if not comparison.match:
            status = EXIT_MISMATCH
    return status


def cmd_tracks(args: argparse.Namespace, service: AnalysisService) -> int:
    rows = service.tracks(signal_io.load_wav(args.input))
    _emit(reporting.tracks_csv(rows), args.output)
    return EXIT_OK


def _formant(text: str) -> synth.FormantPeak:
    parts = [p.strip() for p in text.split(",")]
    if not 3 <= len(parts) <= 5:
        raise InvalidSpec(f"--formant expects center,bandwidth,gain[,target[,sweep]]: {text!r}")
    try:
        center, bandwidth, gain = (float(p) for p in parts[:3])
        target = float(parts[3]) if len(parts) > 3 else None
        sweep = synth.Sweep(parts[4]) if len(parts) > 4 else synth.Sweep.LINEAR
    except ValueError as exc:
        raise InvalidSpec(f"bad --formant {text!r}: {exc}") from exc
    return synth.FormantPeak(
        center=center, bandwidth=bandwidth, gain=gain, target=target, sweep=sweep
    )


def cmd_synth(args: argparse.Namespace) -> int:
    if args.vowel is not None:
        spec = synth.vowel_spec(args.vowel, args.f0, args.dur, args.sample_rate)
        if args.f0_end is not None:
            raise InvalidSpec("--f0-end cannot be combined with --vowel")
        extra = tuple(_formant(text) for text in args.formant)
        spec = synth.SynthSpec(
            f0_start=spec.f0_start,
            f0_end=spec.f0_end,
            duration=spec.duration,
            sample_rate=spec.sample_rate,
            formant_peaks=spec.formant_peaks + extra,
        )
    else:
        spec = synth.SynthSpec(
            f0_start=args.f0,
            f0_end=args.f0_end if args.f0_end is not None else args.f0,
            duration=args.dur,
            sample_rate=args.sample_rate,
            formant_peaks=tuple(_formant(text) for text in args.formant),
        )
    spec = synth.with_noise(spec, args.noise, args.seed)
    synth.write_wav(synth.render(spec), args.output)
    return EXIT_OK


def cmd_table(args: argparse.Namespace) -> int:
    sections = []
    if args.which in ("templates", "all"):
        sections.append(reporting.templates_table(classifier.builtin_templates()))
    if args.which in ("correspondence", "all"):
        sections.append(reporting.correspondence_text(_correspondence(args)))
    if args.which in ("patterns", "all"):
        sections.append(reporting.patterns_table(classifier.position_patterns()))
    sys.stdout.write("\n".join(sections))
    return EXIT_OK


def cmd_schema(args: argparse.Namespace) -> int:
    sys.stdout.write(reporting.report_schema())
    return EXIT_OK


# ============================================================================
# Entry point
# ============================================================================


def _run(args: argparse.Namespace) -> int:
    settings = load_settings(_overrides(args))
    level = VERBOSITY.get(args.verbose, "DEBUG") or settings.log_level
    configure_logging(level, args.log_format or settings.log_format)

    if args.command == "synth":
        return cmd_synth(args)
    if args.command == "table":
        return cmd_table(args)
    if args.command == "schema":
        return cmd_schema(args)

    service = AnalysisService(
        settings.analysis_config(), _templates(args), _correspondence(args)
    )
    handlers = {"analyze": cmd_analyze, "classify": cmd_classify, "tracks": cmd_tracks}
    return handlers[args.command](args, service)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parse_args(argv)
    configure_logging("WARNING", args.log_format or "console")
    try:
        status = _run(args)
    except ValidationError as exc:
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or exc.title
        message = f"invalid value: {where}: {first['msg']}"
    except VowelprintError as exc:
        message = str(exc)
    else:
        return status
    logger.debug("Command failed", command=args.command, error=message)
    print(f"error: {message}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
