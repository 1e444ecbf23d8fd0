import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from polarity.bundle import load_bundle, read_bundle
from polarity.cli import main
from polarity.config import CONFIG_ENV, load_config
from polarity.corpus import load_dataset
from polarity.embeddings import load_embeddings
from polarity.exceptions import ConfigError


@pytest.fixture
def workdir(tmp_path, data_dir):
    for name in ("tweets.tsv", "embeddings10.txt", "tiny.toml"):
        shutil.copy(data_dir / name, tmp_path / name)
    return tmp_path


@pytest.fixture
def trained(workdir):
    assert main(["train", "--config", str(workdir / "tiny.toml")]) == 0
    return workdir


def test_train_writes_reloadable_bundle(capsys, trained):
    out = capsys.readouterr().out
    assert "ensemble: training accuracy" in out
    bundle = trained / "tiny.bundle"
    model = load_bundle(bundle, load_embeddings(trained / "embeddings10.txt"))
    docs = [r.doc for r in load_dataset(trained / "tweets.tsv")]
    assert model.predict_proba(docs).shape == (30, 3)


def test_rerun_is_byte_identical(trained):
    first = (trained / "tiny.bundle").read_bytes()
    assert main(["train", "--config", str(trained / "tiny.toml"), "--model", str(trained / "b.bundle")]) == 0
    meta_a, arrays_a = read_bundle(trained / "tiny.bundle")
    meta_b, arrays_b = read_bundle(trained / "b.bundle")
    meta_a["config"].pop("model"), meta_b["config"].pop("model")
    assert meta_a == meta_b
    assert all(np.array_equal(arrays_a[k], arrays_b[k]) for k in arrays_a)
    assert main(["train", "--config", str(trained / "tiny.toml")]) == 0
    assert (trained / "tiny.bundle").read_bytes() == first


def test_missing_embeddings_is_config_error(workdir, capsys):
    code = main(["train", "--config", str(workdir / "tiny.toml"), "--embeddings", "none"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_bad_config_values(workdir):
    assert main(["train", "--config", str(workdir / "tiny.toml"), "--tfidf-mode", "bogus"]) == 2
    assert main(["train", "--config", str(workdir / "nope.toml")]) == 2
    (workdir / "bad.toml").write_text("[section]\nx = 1\n")
    assert main(["train", "--config", str(workdir / "bad.toml")]) == 2


def test_predict_empty_and_three_lines(trained):
    cfg = str(trained / "tiny.toml")
    (trained / "empty.tsv").write_text("")
    assert main(["predict", "--config", cfg, str(trained / "empty.tsv"), str(trained / "out0.tsv")]) == 0
    assert (trained / "out0.tsv").read_text() == "id\tlabel\tp_pos\tp_neg\tp_neu\n"
    (trained / "three.tsv").write_text("z9\tgreat stuff :)\na1\tawful\nm5\tthe bus\n")
    assert main(["predict", "--config", cfg, str(trained / "three.tsv"), str(trained / "out3.tsv")]) == 0
    lines = (trained / "out3.tsv").read_text().splitlines()
    assert len(lines) == 4 and [line.split("\t")[0] for line in lines[1:]] == ["z9", "a1", "m5"]
    for line in lines[1:]:
        _, label, *probs = line.split("\t")
        assert label in ("positive", "negative", "neutral")
        assert abs(sum(map(float, probs)) - 1) < 1e-5


def test_predict_with_wrong_embeddings(trained):
    other = trained / "other.txt"
    other.write_text((trained / "embeddings10.txt").read_text().replace(" 0.", " 0.1", 1))
    code = main(["predict", "--config", str(trained / "tiny.toml"), "--embeddings", str(other),
                 str(trained / "tweets.tsv"), str(trained / "out.tsv"), "--labeled"])
    assert code == 3


def test_evaluate_memorized_fixture(trained, capsys):
    assert main(["evaluate", "--config", str(trained / "tiny.toml")]) == 0
    out = capsys.readouterr().out
    acc = float(next(line.split()[1] for line in out.splitlines() if line.startswith("accuracy")))
    assert acc >= 0.95
    report = json.loads((trained / "tiny.bundle.report.json").read_text())
    assert {"accuracy", "avg_recall", "f1_pn", "macro_f1", "confusion_positive_positive"} <= report.keys()


def test_evaluate_unknown_label(trained):
    (trained / "gold.tsv").write_text("1\tpositive\tok\n2\tobjective\thmm\n")
    assert main(["evaluate", "--config", str(trained / "tiny.toml"), str(trained / "gold.tsv")]) == 2


def test_inspect(trained, capsys):
    capsys.readouterr()
    assert main(["inspect", str(trained / "tiny.bundle")]) == 0
    out = capsys.readouterr().out
    meta, _ = read_bundle(trained / "tiny.bundle")
    line = next(line for line in out.splitlines() if line.startswith("vocabulary_size"))
    assert int(line.split()[1]) == len(meta["tfidf"]["terms"])


def test_inspect_corrupted_and_future(trained):
    bundle = trained / "tiny.bundle"
    raw = bytearray(bundle.read_bytes())
    raw[2] ^= 0x01
    bundle.write_bytes(bytes(raw))
    assert main(["inspect", str(bundle)]) == 3
    raw[2] ^= 0x01
    raw[8] = 99
    bundle.write_bytes(bytes(raw))
    assert main(["inspect", str(bundle)]) == 3


def test_config_from_environment(workdir, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV, str(workdir / "tiny.toml"))
    cfg = load_config(overrides={"C": "2.5", "views": "bow+svm_ovo"})
    assert cfg.train == [str(workdir / "tweets.tsv")]
    assert cfg.C == 2.5 and cfg.views == ["bow+svm_ovo"] and not cfg.needs_embeddings
    with pytest.raises(ConfigError):
        load_config(overrides={"weights": "1,2"})
    with pytest.raises(ConfigError):
        load_config(overrides={"unknown_key": "1"})


def test_console_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "polarity.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("polarity ")
