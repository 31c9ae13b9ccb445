import os

import hypothesis
import numpy as np
import pytest

from utils.rng import make_generator

np.seterr(all="warn")

hypothesis.settings.register_profile("dev", max_examples=15, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=100, deadline=None, print_blob=True)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def rng():
    return make_generator(20240601)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Run folder with logs and the SQLite ledger kept inside tmp_path."""
    out = tmp_path / "output"
    monkeypatch.setenv("PINLAB_OUTPUT_DIR", str(out))
    monkeypatch.setenv("PINLAB_LOGS_DIR", str(tmp_path / "logs"))
    monkeypatch.setenv("PINLAB_WORKERS", "1")
    monkeypatch.delenv("PINLAB_DATABASE_URL", raising=False)
    out.mkdir()
    return out
