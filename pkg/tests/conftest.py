import numpy as np
import pytest

from mlcbox.dataset import Dataset, write_svmlight_multilabel
from mlcbox.synthetic import make_hyperplane_dataset


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory):
    """Directory holding the seed-0 hyperplane dataset as ``syn.svm``."""
    d = tmp_path_factory.mktemp("syn")
    ds, _, _ = make_hyperplane_dataset(seed=0)
    write_svmlight_multilabel(ds, d / "syn.svm")
    return d


@pytest.fixture
def small_dataset(tmp_path):
    """n=100, d=6, L=3 random dataset; returns its path."""
    rng = np.random.default_rng(0)
    X = rng.standard_normal((100, 6))
    Y = (X[:, :3] + 0.5 * rng.standard_normal((100, 3)) > 0).astype(np.uint8)
    p = tmp_path / "small.svm"
    write_svmlight_multilabel(Dataset(X, Y, "small"), p)
    return p


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
