import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kasner_lab import io as kio
from kasner_lab.exact_solutions import FamilySpec, generate
from kasner_lab.flow_core import FlowError, FlowSample, FrameMetric, Gauge, SecondForm, Trajectory

finite = st.floats(min_value=-1e300, max_value=1e300, allow_nan=False, allow_infinity=False)
positive = st.floats(min_value=1e-300, max_value=1e300, allow_nan=False, allow_infinity=False)


def same_bits(a: Trajectory, b: Trajectory) -> bool:
    return kio.dumps_trajectory(a) == kio.dumps_trajectory(b) and all(
        x.t == y.t and x.L == y.L and x.metric == y.metric and x.second_form == y.second_form and x.gauge == y.gauge
        for x, y in zip(a, b))


@settings(max_examples=50)
@given(st.tuples(positive, positive, positive), st.tuples(finite, finite, finite), positive, positive,
       st.sampled_from([(1, 1, 1), (-1, 1, 1), (0, 0, 0), None]))
def test_round_trip_is_bit_exact(h, k, L, t, structure):
    sec = None if structure is not None else ((0.0, -1.5, 0.25), (-1.5, 0.0, 3e-7), (0.25, 3e-7, 0.0))
    s = FlowSample(L, FrameMetric(h, structure, sec), SecondForm(k), t, Gauge.PROPER)
    tr = Trajectory((s,))
    back = kio.loads_trajectory(kio.dumps_trajectory(tr))
    assert same_bits(tr, back)


@pytest.mark.parametrize("name", ["cone", "kantowski_sachs", "kasner"])
def test_file_round_trip(tmp_path, name):
    tr = generate(FamilySpec(name), np.geomspace(1e-3, 0.9, 17))
    path = tmp_path / "traj.jsonl"
    kio.write_trajectory(tr, path)
    back = kio.read_trajectory(path)
    assert same_bits(tr, back)
    assert len(path.read_text().splitlines()) == 17


def test_bad_lines():
    with pytest.raises(FlowError, match="line 1"):
        kio.loads_trajectory('{"t": 1.0}\n')
    with pytest.raises(FlowError, match="line 2"):
        good = kio.dumps_trajectory(generate(FamilySpec("kasner"), [1.0]))
        kio.loads_trajectory(good + "not json\n")
