import json

from conftest import DATA
from mea.cli import main


def run_args(out_dir, classifier="replay"):
    args = [
        "run",
        "--reviews", str(DATA / "corpus" / "reviews.csv"),
        "--format", "csv",
        "--parses", str(DATA / "corpus" / "parses"),
        "--lexicon", str(DATA / "lexicon.tsv"),
        "--classifier", classifier,
        "--out", str(out_dir),
    ]
    if classifier == "replay":
        args += ["--replay-fixture", str(DATA / "replay_classifier.jsonl")]
    return args


def test_run_sample_report_chain(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(run_args(out)) == 0

    manifest_path = tmp_path / "manifest.json"
    assert main(["sample", "--index", str(out), "--n", "5", "--seed", "3", "--out", str(manifest_path)]) == 0
    manifest = json.loads(manifest_path.read_text())
    assert len(manifest["entries"]) == 5
    manifest["entries"][0]["annotations"].append({"error_type": "NegationLoss", "note": "missed cue"})
    manifest_path.write_text(json.dumps(manifest))

    report_path = tmp_path / "report.json"
    assert main(["report", "--manifest", str(manifest_path), "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["samples"]["total"]["incorrect"] == 1
    rendered = capsys.readouterr().out
    assert "Negation Loss" in rendered


def test_run_with_dot_and_workers(tmp_path):
    out = tmp_path / "out"
    assert main(run_args(out) + ["--dot", "--workers", "3"]) == 0
    assert (out / "1.dot").exists()


def test_run_heuristic_mode_needs_no_fixture(tmp_path):
    assert main(run_args(tmp_path / "out", classifier="heuristic")) == 0


def test_missing_reviews_file_is_fatal(tmp_path):
    assert (
        main(
            [
                "run",
                "--reviews", str(tmp_path / "missing.csv"),
                "--format", "csv",
                "--parses", str(DATA / "corpus" / "parses"),
                "--lexicon", str(DATA / "lexicon.tsv"),
                "--classifier", "heuristic",
                "--out", str(tmp_path / "out"),
            ]
        )
        == 1
    )


def test_replay_without_fixture_is_fatal(tmp_path):
    args = run_args(tmp_path / "out")
    args.remove("--replay-fixture")
    args.remove(str(DATA / "replay_classifier.jsonl"))
    assert main(args) == 1


def test_sample_too_large_is_fatal(tmp_path):
    out = tmp_path / "out"
    assert main(run_args(out)) == 0
    code = main(["sample", "--index", str(out), "--n", "100", "--seed", "1", "--out", str(tmp_path / "m.json")])
    assert code == 1


def test_compile_lexicon_with_replay_filter(tmp_path):
    out = tmp_path / "lexicon.tsv"
    code = main(
        [
            "compile-lexicon",
            "--wordnet", str(DATA / "wordnet_dump.tsv"),
            "--sentiwordnet", str(DATA / "senti_dump.tsv"),
            "--emotions", str(DATA / "emotions.tsv"),
            "--exclusions", str(DATA / "food_exclusions.txt"),
            "--llm-filter",
            "--classifier", "replay",
            "--replay-fixture", str(DATA / "replay_filters.jsonl"),
            "--out", str(out),
        ]
    )
    assert code == 0
    text = out.read_text()
    words = {line.split("\t")[0] for line in text.splitlines()[1:]}
    assert "gleeful" not in words  # dropped by the emotion filter verdict
    assert {"meatball", "bitter", "cheerful", "adore"} <= words
    assert "mess" not in words


def test_compile_lexicon_without_filter(tmp_path):
    out = tmp_path / "lexicon.tsv"
    code = main(
        [
            "compile-lexicon",
            "--wordnet", str(DATA / "wordnet_dump.tsv"),
            "--sentiwordnet", str(DATA / "senti_dump.tsv"),
            "--emotions", str(DATA / "emotions.tsv"),
            "--out", str(out),
        ]
    )
    assert code == 0
    words = {line.split("\t")[0] for line in out.read_text().splitlines()[1:]}
    assert "gleeful" in words and "mess" in words
