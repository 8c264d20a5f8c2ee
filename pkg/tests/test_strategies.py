import itertools
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mlcbox.learners import CONSTANT_HIGH, BinaryLearnerSpec
from mlcbox.strategies import (
    BinaryRelevance,
    ClassifierChain,
    LabelPowerset,
    PairwiseRanking,
    RAkEL,
    RankingSingleLabel,
    br_fit,
    cc_fit,
    draw_labelsets,
    lp_fit,
    rakel_fit,
    rpc_fit,
    rsl_fit,
)

SVM = BinaryLearnerSpec("linear_svm")
RIDGE = BinaryLearnerSpec("ridge")
KNN = BinaryLearnerSpec("knn", {"k": 5})


def make_data(seed, n=60, d=4, L=3, p=0.4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    W = rng.standard_normal((L, d))
    Y = (X @ W.T + rng.normal(0, 0.5, (n, L)) > np.quantile(X @ W.T, 1 - p)).astype(np.uint8)
    return X, Y


ALL = [
    lambda base, seed: BinaryRelevance(base, seed),
    lambda base, seed: ClassifierChain(base, seed),
    lambda base, seed: ClassifierChain(base, seed, random_order=True),
    lambda base, seed: LabelPowerset(base, seed),
    lambda base, seed: RAkEL(base, seed, k=2),
    lambda base, seed: PairwiseRanking(base, seed),
    lambda base, seed: RankingSingleLabel(base, seed),
]


@pytest.mark.parametrize("make", ALL)
@pytest.mark.parametrize("base", [SVM, RIDGE, KNN], ids=["svm", "ridge", "knn"])
def test_shape_range_determinism(make, base):
    X, Y = make_data(0)
    T = np.random.default_rng(1).standard_normal((17, 4)) * 2
    a = make(base, 5).fit(X, Y).predict(T)
    b = make(base, 5).fit(X, Y).predict(T)
    assert a.shape == (17, 3)
    assert np.all((a >= 0) & (a <= 1)) and np.all(np.isfinite(a))
    assert np.array_equal(a, b)


@pytest.mark.parametrize("make", ALL)
def test_zero_label_rows_tolerated(make):
    X, Y = make_data(2)
    Y[:10] = 0
    S = make(SVM, 0).fit(X, Y).predict(X)
    assert S.shape == Y.shape


def test_br_single_label_is_binary_classifier():
    from mlcbox.learners import fit_binary
    from mlcbox._util import derive_seed

    X, Y = make_data(3, L=1)
    direct = fit_binary(SVM, X, Y[:, 0], derive_seed(4, 0))
    assert np.array_equal(br_fit(X, Y, SVM, seed=4).predict(X)[:, 0], direct.scores(X))


def test_br_separable_training_hamming_zero():
    rng = np.random.default_rng(0)
    W = rng.standard_normal((3, 5))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    X = rng.uniform(-1, 1, (400, 5))
    X = X[np.all(np.abs(X @ W.T) >= 0.1, axis=1)][:120]
    Y = (X @ W.T > 0).astype(np.uint8)
    base = BinaryLearnerSpec("linear_svm", {"C": 100.0})
    P = (br_fit(X, Y, base).predict(X) >= 0.5).astype(np.uint8)
    assert np.array_equal(P, Y)


def test_br_constant_column():
    X, Y = make_data(4)
    Y[:, 1] = 1
    S = br_fit(X, Y, SVM).predict(X)
    assert np.all(S[:, 1] == CONSTANT_HIGH)


def test_br_regression_mode_is_multi_target_ridge():
    X, _ = make_data(5)
    Z = np.random.default_rng(0).standard_normal((60, 2)) * 3
    out = BinaryRelevance(RIDGE, regression=True).fit(X, Z).predict(X)
    assert out.shape == (60, 2)
    assert out.max() > 1 or out.min() < 0  # raw predictions, not clamped
    with pytest.raises(ValueError):
        BinaryRelevance(SVM, regression=True).fit(X, Z)


@pytest.mark.parametrize("base", [SVM, RIDGE, KNN], ids=["svm", "ridge", "knn"])
def test_cc_single_label_equals_br(base):
    X, Y = make_data(6, L=1)
    T = np.random.default_rng(2).standard_normal((9, 4))
    assert np.array_equal(cc_fit(X, Y, base, seed=3).predict(T), br_fit(X, Y, base, seed=3).predict(T))


def test_cc_link_dimensions_and_order():
    X, Y = make_data(7, L=4)
    model = cc_fit(X, Y, RIDGE, order=[2, 0, 3, 1])
    assert [m.weights.shape[0] for m in model.models] == [4, 5, 6, 7]
    assert model.order_.tolist() == [2, 0, 3, 1]
    with pytest.raises(ValueError):
        cc_fit(X, Y, RIDGE, order=[0, 0, 1, 2])


def test_rcc_order_is_seeded():
    X, Y = make_data(8, L=5)
    a = cc_fit(X, Y, SVM, seed=11, random_order=True)
    b = cc_fit(X, Y, SVM, seed=11, random_order=True)
    assert np.array_equal(a.order_, b.order_)
    assert np.array_equal(a.predict(X), b.predict(X))
    orders = {tuple(cc_fit(X, Y, RIDGE, seed=s, random_order=True).order_) for s in range(10)}
    assert len(orders) > 1


def test_cc_uses_hard_predictions_at_test_time():
    X, Y = make_data(9, L=2)
    model = cc_fit(X, Y, RIDGE)
    s0 = model.models[0].scores(X)
    aug = np.hstack([X, (s0 >= 0.5).astype(float)[:, None]])
    assert np.array_equal(model.predict(X)[:, 1], model.models[1].scores(aug))


def test_lp_class_count():
    X = np.random.default_rng(0).standard_normal((4, 2))
    Y = np.array([[1, 0], [0, 1], [1, 0], [0, 1]])
    assert len(lp_fit(X, Y, SVM).classes) == 2


def test_lp_single_labelset():
    X = np.random.default_rng(0).standard_normal((5, 2))
    Y = np.tile([1, 0, 1], (5, 1))
    S = lp_fit(X, Y, SVM).predict(np.random.default_rng(1).standard_normal((3, 2)))
    assert np.array_equal(S, np.tile([1.0, 0.0, 1.0], (3, 1)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), L=st.integers(1, 4))
def test_lp_label_scores_match_enumeration(seed, L):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, 3))
    Y = (rng.random((30, L)) < 0.5).astype(np.uint8)
    model = lp_fit(X, Y, RIDGE, seed=seed)
    T = rng.standard_normal((6, 3))
    cs = model.class_scores(T)
    expected = np.zeros((6, L))
    for i in range(6):
        for j in range(L):
            expected[i, j] = sum(cs[i, c] for c in range(len(model.classes)) if model.classes[c, j])
    assert len(model.classes) <= 2 ** L
    assert np.allclose(model.predict(T), expected, atol=1e-12)


def test_lp_argmax_labelset_seen_in_training():
    X, Y = make_data(10, L=4)
    model = lp_fit(X, Y, SVM)
    seen = {tuple(r) for r in Y}
    T = np.random.default_rng(3).standard_normal((50, 4)) * 3
    assert all(tuple(r) in seen for r in model.predict_labelsets(T))


@pytest.mark.parametrize("base", [SVM, KNN], ids=["svm", "knn"])
def test_rakel_full_labelset_equals_lp(base):
    X, Y = make_data(11, L=4)
    T = np.random.default_rng(4).standard_normal((10, 4))
    assert np.array_equal(rakel_fit(X, Y, base, k=4, m=1, seed=2).predict(T),
                          lp_fit(X, Y, base, seed=2).predict(T))


def test_rakel_repeated_subsets_same_as_single():
    X, Y = make_data(12, L=3)
    T = np.random.default_rng(5).standard_normal((8, 4))
    one = rakel_fit(X, Y, SVM, k=3, m=1, seed=1)
    two = rakel_fit(X, Y, SVM, k=3, m=2, seed=1)
    assert two.subsets == [(0, 1, 2), (0, 1, 2)]
    assert np.array_equal(one.predict(T), two.predict(T))


def test_rakel_coverage_over_seeded_draws():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        L = int(rng.integers(2, 12))
        k = int(rng.integers(1, L + 1))
        m = int(rng.integers(-(-L // k), 2 * L + 1))
        subsets = draw_labelsets(L, k, m, seed)
        assert len(subsets) == m and all(len(set(s)) == k for s in subsets)
        assert set(itertools.chain.from_iterable(subsets)) == set(range(L))


def test_rakel_uncovered_labels_get_prior():
    X, Y = make_data(13, L=6)
    model = rakel_fit(X, Y, SVM, k=1, m=2, seed=0)
    covered = set(itertools.chain.from_iterable(model.subsets))
    S = model.predict(X[:5])
    for j in set(range(6)) - covered:
        assert np.all(S[:, j] == Y[:, j].mean())


def test_rakel_k_too_large():
    X, Y = make_data(14, L=3)
    with pytest.raises(ValueError):
        rakel_fit(X, Y, SVM, k=4)


def test_rpc_two_labels_trains_on_all_rows():
    X = np.random.default_rng(0).standard_normal((6, 2))
    Y = np.array([[1, 0], [0, 1]] * 3)
    model = rpc_fit(X, Y, RIDGE)
    assert list(model.pairs) == [(0, 1)]
    from mlcbox.learners import ridge_fit

    direct = ridge_fit(X, Y[:, 0].astype(float), 1.0)
    assert np.allclose(model.pairs[(0, 1)].weights, direct.weights)


def test_rpc_identical_labelsets_give_half():
    X = np.random.default_rng(0).standard_normal((6, 2))
    Y = np.tile([1, 0, 1], (6, 1))
    S = rpc_fit(X, Y, SVM).predict(X)
    assert np.all(S == 0.5)


def test_rpc_confidences_complementary():
    X, Y = make_data(15, L=4)
    model = rpc_fit(X, Y, SVM)
    S = model.predict(X)
    conf = model.pairwise_confidences(X)
    for (i, j), p in conf.items():
        assert np.allclose(p + (1.0 - p), 1.0, atol=1e-15)
    votes = np.zeros_like(S)
    for (i, j), p in conf.items():
        votes[:, i] += p
        votes[:, j] += 1 - p
    assert np.allclose(S, votes / 3)


def test_rpc_needs_two_labels():
    with pytest.raises(ValueError):
        rpc_fit(np.zeros((3, 1)), np.ones((3, 1)), SVM)


def test_rsl_single_label_rows_reduce_to_multiclass():
    from mlcbox.learners import fit_ovr
    from mlcbox._util import derive_seed

    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 3))
    cls = rng.integers(0, 3, 30)
    Y = np.eye(3, dtype=np.uint8)[cls]
    ovr = fit_ovr(SVM, X, cls, 3, seeds=[derive_seed(7, "class", c) for c in range(3)])
    assert np.array_equal(rsl_fit(X, Y, SVM, seed=7).predict(X), ovr.scores(X))


def test_rsl_duplicates_multi_label_rows():
    X = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]])
    Y = np.array([[1, 1], [0, 1], [0, 0]])
    model = rsl_fit(X, Y, KNN)
    inner = model.model.models  # native kNN keeps the expanded training rows
    assert inner.X.tolist() == [[0.0, 1.0], [0.0, 1.0], [1.0, 0.0]]
    assert inner.y.tolist() == [0, 1, 1]


def test_rsl_scores_bounded_and_constant_fallback():
    X, Y = make_data(16, L=4)
    S = rsl_fit(X, Y, SVM).predict(X)
    assert np.all(S.sum(axis=1) <= 4) and np.all((S >= 0) & (S <= 1))
    S0 = rsl_fit(X, np.zeros_like(Y), SVM).predict(X)
    assert S0.shape == Y.shape and np.all(S0 == S0[0, 0])
