from pathlib import Path

import pytest

from polarity.corpus import load_dataset
from polarity.embeddings import load_word2vec_text

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def tiny_corpus():
    return load_dataset(DATA / "tweets.tsv")


@pytest.fixture(scope="session")
def tiny_embeddings():
    return load_word2vec_text(DATA / "embeddings10.txt")


@pytest.fixture
def write_tsv(tmp_path):
    def _write(lines, name="data.tsv", newline="\n"):
        path = tmp_path / name
        path.write_bytes(newline.join(lines).encode("utf-8") + newline.encode())
        return path
    return _write


# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
        _CRITERIA[name] = status


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _CRITERIA.items():
        terminalreporter.write_line(f"{status:<4}  {name}")
