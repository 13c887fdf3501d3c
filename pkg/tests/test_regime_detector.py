import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kasner_lab.exact_solutions import FamilySpec, generate
from kasner_lab.flow_core import FlowError, hubble_reindex, rescale_flow
from kasner_lab.regime_detector import (
    DetectorConfig,
    EpochSet,
    InsufficientDataError,
    Model,
    classify,
    detect,
    epoch_set,
    fn_table,
    interval_statistic,
    model_closeness,
    pointwise_scores,
    volume_exponent,
    windowed_scores,
)


def family(name, params=None, lo=1e-4, hi=1.0, samples=401):
    return generate(FamilySpec(name, params or {}), np.geomspace(lo, hi, samples))


def kantowski_sachs(samples=2001):
    return hubble_reindex(generate(FamilySpec("kantowski_sachs"), 0.7 * np.exp(-np.linspace(0, 20, samples))))


# --- scores -----------------------------------------------------------------


def test_scores_on_model_flows():
    milne, kasner = pointwise_scores(family("kasner"))
    assert np.all(kasner < 1e-14) and np.all(milne > 0.5)
    milne, kasner = pointwise_scores(family("cone"))
    assert np.all(milne < 1e-14) and np.all(kasner > 0.5)


def test_kantowski_sachs_scores():
    tr = kantowski_sachs()
    _, kasner = pointwise_scores(tr)
    # approaches Kasner toward the singularity, far from it near the horizon
    assert kasner[0] < 1e-6 and kasner[-1] > 0.1
    near = [model_closeness(tr, u, 0.05, "kasner") for u in (1e-3, 1e-5, 1e-7)]
    assert near[0] > near[1] > near[2] and near[2] < 1e-4
    assert model_closeness(tr, 1e-6, 0.05, Model.MILNE) > 0.1


def test_model_closeness_requires_coverage():
    tr = family("kasner", lo=1e-2)
    with pytest.raises(InsufficientDataError):
        model_closeness(tr, 1e-2, 0.1, "kasner")
    with pytest.raises(ValueError):
        model_closeness(tr, 0.1, 1.5, "kasner")
    with pytest.raises(ValueError):
        model_closeness(tr, 0.1, 0.5, "bianchi")


def test_windowed_score_is_sliding_max():
    tr = kantowski_sachs(801)
    eps = 0.2
    _, k = pointwise_scores(tr)
    _, w = windowed_scores(tr, eps)
    logt = np.log(tr.times)
    for i in (0, 100, 400, 800):
        m = np.abs(logt - logt[i]) <= math.log(1 / eps) * (1 + 1e-14)
        assert w[i] == k[m].max()


def test_scores_need_hubble_gauge():
    with pytest.raises(FlowError):
        pointwise_scores(generate(FamilySpec("kantowski_sachs"), [0.1, 0.2]))


@pytest.mark.parametrize("name", ["kasner", "cone"])
def test_scores_are_scale_equivariant(name):
    tr = family(name)
    a = pointwise_scores(tr)
    b = pointwise_scores(rescale_flow(tr, 0.01))
    assert np.allclose(a[0], b[0], atol=1e-12) and np.allclose(a[1], b[1], atol=1e-12)


# --- epoch set and F(N) -------------------------------------------------------


def test_epoch_set_kasner_is_empty():
    S = epoch_set(family("kasner"))
    assert not S and S.tau_max == pytest.approx(math.log(1e4))
    assert interval_statistic(S, 4) == (0, 0.0)


def test_epoch_set_kantowski_sachs():
    S = epoch_set(kantowski_sachs(), eps=0.05)
    assert len(S.intervals) == 1 and S.intervals[0][0] == 0.0
    # the non-Kasner set sits at the horizon end and is bounded
    assert S.intervals[0][1] < S.tau_max


def test_interval_statistic_examples():
    S = EpochSet(((0.5, 0.7), (2.0, 2.0), (3.2, 5.9)), 10.0, 0.05)
    # [0,1] meets (0.5,0.7); [1,2] and [2,3] meet 2.0; [3,4],[4,5],[5,6] meet (3.2,5.9)
    assert interval_statistic(S, 10) == (6, 0.6)
    assert interval_statistic(S, 1) == (1, 1.0)
    assert interval_statistic(S, 2) == (2, 1.0)
    with pytest.raises(InsufficientDataError):
        interval_statistic(S, 11)
    with pytest.raises(ValueError):
        interval_statistic(S, 0)
    assert [r[0] for r in fn_table(S)] == [1, 2, 4, 8]


intervals = st.lists(st.tuples(st.floats(0, 40), st.floats(0, 3)), max_size=6).map(
    lambda xs: tuple(sorted((a, min(a + w, 40.0)) for a, w in xs)))


@given(intervals, st.integers(1, 20), st.integers(1, 20))
def test_interval_statistic_properties(ivs, N, M):
    S = EpochSet(ivs, 40.0, 0.05)
    F = lambda k: interval_statistic(S, k)[0]  # noqa: E731
    assert 0 <= F(N) <= N
    # monotone, and growing by at most one per added unit interval
    assert F(N) <= F(N + M) <= F(N) + M


# --- volume exponent and classification ---------------------------------------


@pytest.mark.parametrize("name,slope", [("kasner", 1.0), ("cone", 3.0), ("cone_times_torus", 2.0)])
def test_volume_slopes(name, slope):
    _, s = volume_exponent(family(name))
    assert np.allclose(s, slope, atol=1e-10)


def test_volume_exponent_errors():
    with pytest.raises(ValueError):
        volume_exponent(family("kasner"), 0.0)


def test_classify_rules():
    cfg = DetectorConfig()
    empty = EpochSet((), 50.0, 0.05)
    bouncy = EpochSet(((0.0, 1.0), (5.0, 6.0), (20.0, 22.0)), 50.0, 0.05)
    assert classify(3, np.array([3.02]), empty, cfg) == "milne"
    assert classify(3, np.array([1.01]), empty, cfg) == "kasner"
    assert classify(3, np.array([1.2]), bouncy, cfg) == "mixmaster"
    assert classify(3, np.array([2.0]), bouncy, cfg) == "undetermined"
    assert classify(3, np.array([]), empty, cfg) == "undetermined"


def test_detect_report():
    rep = detect(family("kasner"), DetectorConfig(Ns=(1, 2, 3)))
    assert rep.classification == "kasner"
    assert [r[0] for r in rep.fn_table] == [1, 2, 3]
    d = rep.to_dict()
    assert d["classification"] == "kasner" and len(d["scores"]["tau"]) == 401
    assert rep.fn_csv().splitlines()[0] == "N,F,F_over_N"
    assert rep.to_json() == detect(family("kasner"), DetectorConfig(Ns=(1, 2, 3))).to_json()
    assert detect(family("cone")).classification == "milne"
