import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nsireg.core import (CoefficientEstimate, Dataset, InputError, TrueModel, UndefinedMetricError,
                         evaluate, fpr, l1_error, l2_error, mse, nz, tpr)


def est(beta, gamma):
    return CoefficientEstimate(np.asarray(beta, float), np.asarray(gamma, float))


def truth(beta, gamma):
    return TrueModel(np.asarray(beta, float), np.asarray(gamma, float))


class TestDataset:
    def test_dims(self):
        d = Dataset(np.zeros(4), np.zeros((4, 2)), np.zeros((4, 3)))
        assert (d.n, d.p, d.q) == (4, 2, 3)

    def test_empty_block_allowed(self):
        d = Dataset(np.zeros(4), np.zeros((4, 0)), np.ones((4, 1)))
        assert d.p == 0

    @pytest.mark.parametrize("Z,W", [
        (np.zeros((3, 2)), np.zeros((4, 1))),
        (np.zeros((4, 0)), np.zeros((4, 0))),
    ])
    def test_rejects_bad_shapes(self, Z, W):
        with pytest.raises(InputError):
            Dataset(np.zeros(4), Z, W)

    def test_rejects_nan(self):
        with pytest.raises(InputError):
            Dataset(np.array([1.0, np.nan]), np.ones((2, 1)), np.ones((2, 1)))


def test_l1_identity():
    assert l1_error(est([4, 0], [6]), truth([4, 0], [6])) == 0


def test_l1_hand_sum():
    assert l1_error(est([3, 1], [6]), truth([4, 0], [6])) == 2


def test_l2_hand():
    assert l2_error(est([0, 0], []), truth([3, 4], [])) == 5
    assert l2_error(est([4, 0], [6]), truth([4, 0], [6])) == 0


def test_norms_against_direct_sum():
    rng = np.random.default_rng(3)
    b, bh, g, gh = (rng.normal(size=s) for s in (6, 6, 4, 4))
    e, t = est(bh, gh), truth(b, g)
    diffs = [bh[i] - b[i] for i in range(6)] + [gh[i] - g[i] for i in range(4)]
    assert l1_error(e, t) == pytest.approx(sum(abs(x) for x in diffs), rel=1e-14)
    assert l2_error(e, t) == pytest.approx(sum(x * x for x in diffs) ** 0.5, rel=1e-14)


def test_dimension_mismatch():
    with pytest.raises(InputError):
        l1_error(est([1, 2], [3]), truth([1], [3]))
    with pytest.raises(InputError):
        l2_error(est([1], [3, 3]), truth([1], [3]))


def test_fpr_one_of_two():
    assert fpr(est([4, 1, 0], [6]), truth([4, 0, 0], [6])) == 0.5


def test_rates_exact_support():
    t = truth([4, 0, 0], [6])
    assert fpr(est([3, 0, 0], [5]), t) == 0
    assert tpr(est([3, 0, 0], [5]), t) == 1


def test_tpr_eighty_of_ninety():
    beta = np.r_[np.full(10, 4.0), np.zeros(10)]
    gamma = np.full(80, 6.0)
    t = truth(beta, gamma)
    e = est(np.zeros(20), gamma)  # every sparse signal missed
    assert round(tpr(e, t), 3) == 0.889
    assert fpr(e, t) == 0
    assert nz(e) == 80


def test_nz_counts_both_blocks():
    e = est(np.r_[np.ones(11), np.zeros(39)], np.full(50, 0.3))
    assert nz(e) == 61
    assert nz(est(np.zeros(5), np.zeros(2))) == 0


def test_zero_tol():
    e = est([1e-9, 0.5], [])
    assert nz(e) == 2
    assert nz(e, zero_tol=1e-6) == 1


def test_rates_brute_force_count():
    rng = np.random.default_rng(11)
    b = rng.choice([0.0, 2.0], size=12)
    g = rng.choice([0.0, -1.0], size=8)
    bh = rng.choice([0.0, 0.7], size=12)
    gh = rng.choice([0.0, 0.1], size=8)
    e, t = est(bh, gh), truth(b, g)
    tv, ev = np.r_[b, g], np.r_[bh, gh]
    fp = sum(1 for i in range(20) if tv[i] == 0 and ev[i] != 0)
    tp = sum(1 for i in range(20) if tv[i] != 0 and ev[i] != 0)
    assert fpr(e, t) == fp / sum(1 for v in tv if v == 0)
    assert tpr(e, t) == tp / sum(1 for v in tv if v != 0)
    assert nz(e) == sum(1 for v in ev if v != 0)


def test_undefined_rates():
    with pytest.raises(UndefinedMetricError):
        fpr(est([1], [1]), truth([4], [6]))
    with pytest.raises(UndefinedMetricError):
        tpr(est([1], [1]), truth([0], [0]))
    rep = evaluate(est([1], [1]), truth([4], [6]))
    assert rep.fpr is None and rep.tpr == 1


def test_mse():
    assert mse([1, 2], [1, 2]) == 0
    assert mse([1, 1], [0, 0]) == 1
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=7), rng.normal(size=7)
    assert mse(a, b) == pytest.approx(sum((a[i] - b[i]) ** 2 for i in range(7)) / 7, rel=1e-14)
    with pytest.raises(InputError):
        mse([1, 2], [1])
    with pytest.raises(InputError):
        mse([], [])


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_metric_properties(data):
    p = data.draw(st.integers(0, 8))
    q = data.draw(st.integers(1, 8))
    coef = st.sampled_from([0.0, 0.0, 1.5, -2.0, 4.0])
    b = np.array(data.draw(st.lists(coef, min_size=p, max_size=p)), dtype=float)
    g = np.array(data.draw(st.lists(coef, min_size=q, max_size=q)), dtype=float)
    bh = np.array(data.draw(st.lists(coef, min_size=p, max_size=p)), dtype=float)
    gh = np.array(data.draw(st.lists(coef, min_size=q, max_size=q)), dtype=float)
    e, t = est(bh, gh), truth(b, g)
    assert l1_error(e, t) >= l2_error(e, t) - 1e-12 >= -1e-12
    assert 0 <= nz(e) <= p + q
    rep = evaluate(e, t)
    for rate in (rep.fpr, rep.tpr):
        assert rate is None or 0 <= rate <= 1
    assert (rep.fpr is None) == bool(np.all(np.r_[b, g] != 0))
    assert (rep.tpr is None) == bool(np.all(np.r_[b, g] == 0))

    # self-estimate
    self_rep = evaluate(est(b, g), t)
    assert self_rep.fpr in (None, 0.0) and self_rep.tpr in (None, 1.0)
    assert self_rep.nz == np.count_nonzero(np.r_[b, g])

    # permutation equivariance within each block
    pb = data.draw(st.permutations(range(p)))
    pg = data.draw(st.permutations(range(q)))
    rep2 = evaluate(est(bh[list(pb)], gh[list(pg)]), truth(b[list(pb)], g[list(pg)]))
    assert rep2.l1 == pytest.approx(rep.l1) and rep2.l2 == pytest.approx(rep.l2)
    assert (rep2.fpr, rep2.tpr, rep2.nz) == (rep.fpr, rep.tpr, rep.nz)
