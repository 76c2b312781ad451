"""Tests for the vowelprint command line."""

import json
from pathlib import Path

import jsonschema
import pytest

from vowelprint.cli import EXIT_ERROR, EXIT_MISMATCH, EXIT_OK, main
from vowelprint.services.reporting import FRAME_COLUMNS, TRACK_COLUMNS

SCHEMA_DOC = Path(__file__).resolve().parents[2] / "docs" / "report_schema.json"


class TestAnalyze:
    def test_json_report(self, vowel_wav, capsys):
        assert main(["analyze", str(vowel_wav)]) == EXIT_OK

        report = json.loads(capsys.readouterr().out)
        assert report["frame_count"] == 12
        assert [s["classification"]["label"] for s in report["segments"] if s["voiced"]] == [
            "[a]"
        ]

    def test_csv_to_file(self, vowel_wav, tmp_path):
        out = tmp_path / "report.csv"

        assert main(["analyze", str(vowel_wav), "--format", "csv", "-o", str(out)]) == EXIT_OK

        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(FRAME_COLUMNS)
        assert len(lines) == 13
        assert all(line.endswith(",[a]") for line in lines[1:])

    def test_output_is_stable(self, vowel_wav, capsys):
        main(["analyze", str(vowel_wav)])
        first = capsys.readouterr().out
        main(["analyze", str(vowel_wav), "-vv"])
        second = capsys.readouterr().out

        assert first == second

    def test_report_follows_documented_schema(self, vowel_wav, capsys):
        main(["analyze", str(vowel_wav)])
        report = json.loads(capsys.readouterr().out)
        schema = json.loads(SCHEMA_DOC.read_text(encoding="utf-8"))

        jsonschema.validate(instance=report, schema=schema)

    def test_schema_rejects_a_broken_report(self, vowel_wav, capsys):
        main(["analyze", str(vowel_wav)])
        report = json.loads(capsys.readouterr().out)
        schema = json.loads(SCHEMA_DOC.read_text(encoding="utf-8"))
        report["segments"][0]["frames"][0]["harmonics"]["low1"]["bin"] = -1

        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(instance=report, schema=schema)

    def test_band_preset(self, vowel_wav, capsys):
        assert main(["analyze", str(vowel_wav), "--bands", "narrow"]) == EXIT_OK

        config = json.loads(capsys.readouterr().out)["config"]
        assert config["bands"]["lower"] == {"lo": 60.0, "hi": 800.0}

    def test_malformed_wav(self, tmp_path, capsys):
        path = tmp_path / "junk.wav"
        path.write_bytes(b"this is not a wav file at all")

        assert main(["analyze", str(path)]) == EXIT_ERROR
        assert capsys.readouterr().err.startswith("error: malformed wav")

    def test_missing_input(self, tmp_path, capsys):
        assert main(["analyze", str(tmp_path / "absent.wav")]) == EXIT_ERROR
        assert "io failure" in capsys.readouterr().err

    def test_inconsistent_flags(self, vowel_wav, capsys):
        assert main(["analyze", str(vowel_wav), "--frame", "512"]) == EXIT_ERROR
        assert capsys.readouterr().err.startswith("error: config error")

    def test_malformed_flag(self, vowel_wav):
        with pytest.raises(SystemExit) as excinfo:
            main(["analyze", str(vowel_wav), "--bands", "1,2,3"])

        assert excinfo.value.code == 2

    def test_overlapping_bands(self, vowel_wav, capsys):
        assert main(["analyze", str(vowel_wav), "--bands", "60,900,750,2500"]) == EXIT_ERROR
        assert "lower band must end" in capsys.readouterr().err

    def test_templates_outside_bands(self, vowel_wav, capsys):
        assert main(["analyze", str(vowel_wav), "--bands", "60,700,700,2500"]) == EXIT_ERROR
        assert capsys.readouterr().err.startswith("error: config error: template [a]")

    def test_missing_config_file(self, vowel_wav, monkeypatch, tmp_path, capsys):
        monkeypatch.setenv("VOWELPRINT_CONFIG", str(tmp_path / "absent.toml"))

        assert main(["analyze", str(vowel_wav)]) == EXIT_ERROR
        assert "missing file" in capsys.readouterr().err


class TestClassify:
    def test_label(self, vowel_wav, capsys):
        assert main(["classify", str(vowel_wav)]) == EXIT_OK

        out = capsys.readouterr().out
        assert out.startswith("label=[a] score=")
        assert out.rstrip().endswith("candidate=[a]")

    def test_expected_label(self, vowel_wav, capsys):
        assert main(["classify", str(vowel_wav), "--expect", "а"]) == EXIT_OK
        assert "expect [a]; match" in capsys.readouterr().out

    def test_mismatch(self, vowel_wav, capsys):
        assert main(["classify", str(vowel_wav), "--expect", "o"]) == EXIT_MISMATCH
        assert "expect [o]; mismatch" in capsys.readouterr().out

    def test_english_match(self, vowel_wav, capsys):
        assert main(["classify", str(vowel_wav), "--english", "a:"]) == EXIT_OK

        out = capsys.readouterr().out
        assert "[a:]: Clear resemblance." in out
        assert "expected [a]; verdict clear; match" in out

    def test_english_mismatch(self, vowel_wav, capsys):
        assert main(["classify", str(vowel_wav), "--english", "[i:]"]) == EXIT_MISMATCH
        assert "expected [и]; verdict clear; mismatch" in capsys.readouterr().out

    def test_unsupported_english_sound(self, vowel_wav, capsys):
        assert main(["classify", str(vowel_wav), "--english", "ei"]) == EXIT_ERROR
        assert capsys.readouterr().err.startswith("error: unknown sound")

    def test_custom_templates(self, vowel_wav, tmp_path, capsys):
        path = tmp_path / "only_a.tsv"
        path.write_text(
            "[a]\t200\t750\tfirst_over_second\t800\t900\t1000\t1200\ttwo_bands\n", encoding="utf-8"
        )

        assert main(["classify", str(vowel_wav), "--templates", str(path)]) == EXIT_OK
        assert "label=[a]" in capsys.readouterr().out

    def test_broken_templates(self, vowel_wav, tmp_path, capsys):
        path = tmp_path / "broken.tsv"
        path.write_text("[a]\t200\n", encoding="utf-8")

        assert main(["classify", str(vowel_wav), "--templates", str(path)]) == EXIT_ERROR
        assert "template file error" in capsys.readouterr().err

    def test_template_range_outside_upper_band(self, vowel_wav, tmp_path, capsys):
        path = tmp_path / "high.tsv"
        path.write_text(
            "[a]\t200\t750\tfirst_over_second\t3000\t3200\t1000\t1200\ttwo_bands\n",
            encoding="utf-8",
        )

        assert main(["classify", str(vowel_wav), "--templates", str(path)]) == EXIT_ERROR
        assert "up1 range 3000-3200 Hz" in capsys.readouterr().err

    def test_custom_correspondence(self, vowel_wav, tmp_path, capsys):
        path = tmp_path / "corr.tsv"
        path.write_text("[a:]\t[o]\tclear\tCustom note.\n", encoding="utf-8")
        args = ["classify", str(vowel_wav), "--english", "a:", "--correspondence", str(path)]

        assert main(args) == EXIT_MISMATCH
        out = capsys.readouterr().out
        assert "[a:]: Custom note." in out
        assert "expected [o]; verdict clear; mismatch" in out

    def test_broken_correspondence(self, vowel_wav, tmp_path, capsys):
        path = tmp_path / "corr.tsv"
        path.write_text("[a:]\t[o]\n", encoding="utf-8")
        args = ["classify", str(vowel_wav), "--english", "a:", "--correspondence", str(path)]

        assert main(args) == EXIT_ERROR
        assert "template file error" in capsys.readouterr().err


class TestTracks:
    def test_rows(self, vowel_wav, capsys):
        assert main(["tracks", str(vowel_wav)]) == EXIT_OK

        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == ",".join(TRACK_COLUMNS)
        assert len(lines) == 13
        assert lines[1].startswith("0.128,")


class TestSynth:
    def test_same_arguments_same_bytes(self, tmp_path):
        args = ["--f0", "120", "--f0-end", "160", "--formant", "500,120,1", "--noise", "0.05"]
        first, second = tmp_path / "1.wav", tmp_path / "2.wav"

        assert main(["synth", str(first), *args, "--seed", "3"]) == EXIT_OK
        assert main(["synth", str(second), *args, "--seed", "3"]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_vowel_round_trip(self, tmp_path, capsys):
        path = tmp_path / "bi.wav"

        assert main(["synth", str(path), "--vowel", "ы", "--f0", "200", "--dur", "1.0"]) == EXIT_OK
        assert main(["classify", str(path), "--expect", "ы"]) == EXIT_OK
        assert "expect [ы]; match" in capsys.readouterr().out

    def test_swept_formant(self, tmp_path):
        path = tmp_path / "sweep.wav"

        assert main(["synth", str(path), "--formant", "800,100,1,1300,arc"]) == EXIT_OK
        assert len(path.read_bytes()) == 44 + 16000

    @pytest.mark.parametrize(
        "args",
        [
            ["--f0", "0"],
            ["--vowel", "a", "--f0", "0"],
            ["--vowel", "x"],
            ["--vowel", "a", "--f0-end", "200"],
            ["--formant", "500,100"],
            ["--formant", "500,100,1,900,zigzag"],
            ["--dur", "0"],
        ],
    )
    def test_invalid_requests(self, tmp_path, capsys, args):
        path = tmp_path / "out.wav"

        assert main(["synth", str(path), *args]) == EXIT_ERROR
        assert capsys.readouterr().err.startswith("error: ")
        assert not path.exists()


class TestTables:
    def test_templates(self, capsys):
        assert main(["table", "--which", "templates"]) == EXIT_OK

        lines = capsys.readouterr().out.splitlines()
        assert lines[0].split() == ["vowel", "low", "dominance", "up1", "up2", "shape"]
        assert [line.split()[0] for line in lines[1:]] == [
            "[a]",
            "[o]",
            "[и]",
            "[ы]",
            "[y]",
            "[э]",
        ]

    def test_all_tables(self, capsys):
        assert main(["table"]) == EXIT_OK

        out = capsys.readouterr().out
        assert "[и]+([э] or [a])" in out
        assert "hard_soft" in out

    def test_correspondence_table_from_file(self, tmp_path, capsys):
        path = tmp_path / "corr.tsv"
        path.write_text("[a:]\t[o]\tclear\tCustom note.\n", encoding="utf-8")

        argv = ["table", "--which", "correspondence", "--correspondence", str(path)]
        assert main(argv) == EXIT_OK
        out = capsys.readouterr().out
        assert "Custom note." in out
        assert "[ai]" not in out

    def test_schema_matches_docs(self, capsys):
        assert main(["schema"]) == EXIT_OK

        generated = json.loads(capsys.readouterr().out)
        documented = json.loads(SCHEMA_DOC.read_text(encoding="utf-8"))
        assert generated == documented
