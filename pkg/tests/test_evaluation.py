import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlcbox.evaluation import CONVENTIONS, evaluate, example_metrics, label_metrics, ranking_metrics


def ranking_oracle(Y, S):
    """Pair enumeration with the documented conventions, in plain Python."""
    rl, oe, cov, ap = [], [], [], []
    for y, s in zip(Y.tolist(), S.tolist()):
        L = len(y)
        rel = [j for j in range(L) if y[j]]
        irr = [j for j in range(L) if not y[j]]
        if not rel:
            cov.append(0)
            continue
        rank = {j: sum(1 for i in range(L) if s[i] >= s[j]) for j in range(L)}
        cov.append(max(rank[j] for j in rel) - 1)
        top = max(range(L), key=lambda j: (s[j], -j))
        oe.append(0 if y[top] else 1)
        ap.append(sum(sum(1 for i in rel if s[i] >= s[j]) / rank[j] for j in rel) / len(rel))
        if irr:
            bad = 0.0
            for a in rel:
                for b in irr:
                    bad += 1.0 if s[a] < s[b] else 0.5 if s[a] == s[b] else 0.0
            rl.append(bad / (len(rel) * len(irr)))
    mean = lambda v, empty: sum(v) / len(v) if v else empty  # noqa: E731
    return {"ranking_loss": mean(rl, 0.0), "one_error": mean(oe, 0.0),
            "coverage": mean(cov, 0.0), "average_precision": mean(ap, 1.0)}


def random_case(rng, ties=True):
    n, L = int(rng.integers(1, 21)), int(rng.integers(1, 7))
    Y = (rng.random((n, L)) < 0.4).astype(np.uint8)
    S = rng.integers(0, 5, (n, L)) / 4.0 if ties else rng.random((n, L))
    return Y, S


def test_identity_example_metrics():
    Y = np.array([[1, 0, 1], [0, 0, 0]])
    assert example_metrics(Y, Y) == {"hamming_loss": 0.0, "subset_accuracy": 1.0, "example_f1": 1.0}


def test_example_metrics_small_case():
    m = example_metrics([[1, 0], [0, 1]], [[1, 1], [0, 1]])
    assert m["hamming_loss"] == 0.25 and m["subset_accuracy"] == 0.5


def test_empty_rows_f1_convention():
    assert example_metrics([[0, 0]], [[0, 0]])["example_f1"] == 1.0
    assert CONVENTIONS["example_f1_empty_row"] == 1.0


def test_label_metrics_examples():
    Y = np.array([[1, 0], [0, 1], [1, 1]])
    assert label_metrics(Y, Y) == {"macro_f1": 1.0, "micro_f1": 1.0}
    P = np.column_stack([Y[:, 0], 1 - Y[:, 1]])
    assert label_metrics(Y, P)["macro_f1"] == pytest.approx(0.5)
    assert label_metrics([[0, 0]], [[0, 0]])["macro_f1"] == 1.0


@pytest.mark.parametrize("seed", range(20))
def test_micro_f1_counting_oracle(seed):
    rng = np.random.default_rng(seed)
    Y = (rng.random((15, 4)) < 0.4).astype(int)
    P = (rng.random((15, 4)) < 0.4).astype(int)
    tp = fp = fn = 0
    for y_row, p_row in zip(Y.tolist(), P.tolist()):
        for y, p in zip(y_row, p_row):
            tp += y and p
            fp += (not y) and p
            fn += y and not p
    assert label_metrics(Y, P)["micro_f1"] == pytest.approx(2 * tp / (2 * tp + fp + fn), abs=1e-15)


def test_ranking_examples():
    assert ranking_metrics([[1, 0]], [[0.9, 0.1]]) == {
        "ranking_loss": 0.0, "one_error": 0.0, "coverage": 0.0, "average_precision": 1.0}
    m = ranking_metrics([[1, 0]], [[0.1, 0.9]])
    assert (m["ranking_loss"], m["one_error"], m["coverage"]) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("seed", range(50))
def test_ranking_matches_enumeration(seed):
    Y, S = random_case(np.random.default_rng(seed), ties=seed % 2 == 0)
    got = ranking_metrics(Y, S)
    want = ranking_oracle(Y, S)
    for k in want:
        assert got[k] == pytest.approx(want[k], abs=1e-12), k


def test_shape_mismatch():
    for f in (example_metrics, label_metrics, ranking_metrics):
        with pytest.raises(ValueError):
            f(np.zeros((2, 2)), np.zeros((2, 3)))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_hamming_complement(seed):
    rng = np.random.default_rng(seed)
    Y = (rng.random((7, 5)) < 0.5).astype(np.uint8)
    P = (rng.random((7, 5)) < 0.5).astype(np.uint8)
    assert example_metrics(Y, P)["hamming_loss"] == pytest.approx(
        1 - example_metrics(Y, 1 - P)["hamming_loss"], abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_ranking_invariant_under_cube(seed):
    rng = np.random.default_rng(seed)
    Y = (rng.random((9, 5)) < 0.4).astype(np.uint8)
    S = rng.standard_normal((9, 5))
    assert ranking_metrics(Y, S) == ranking_metrics(Y, S ** 3)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_row_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    Y = (rng.random((10, 4)) < 0.4).astype(np.uint8)
    P = (rng.random((10, 4)) < 0.4).astype(np.uint8)
    S = rng.random((10, 4))
    perm = rng.permutation(10)
    a, b = evaluate(Y, P, S), evaluate(Y[perm], P[perm], S[perm])
    for k in a:
        assert a[k] == pytest.approx(b[k], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_metric_ranges(seed):
    rng = np.random.default_rng(seed)
    Y, S = random_case(rng)
    P = (S >= 0.5).astype(np.uint8)
    m = evaluate(Y, P, S)
    assert all(np.isfinite(v) for v in m.values())
    assert 0 <= m["coverage"] <= Y.shape[1]
    assert all(0 <= v <= 1 for k, v in m.items() if k != "coverage")
