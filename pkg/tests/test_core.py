import numpy as np
import pytest

from scalevo.core import (
    IntervalSet,
    Scale,
    ScaleValidationError,
    DataFormatError,
    degrees_from_steps,
    filter_intervals,
    interval_set,
    read_scales,
    write_scales,
)


def test_degrees_from_steps_examples():
    assert degrees_from_steps([200]) == (0.0, 200.0)
    assert degrees_from_steps([200, 200, 100]) == (0.0, 200.0, 400.0, 500.0)
    assert degrees_from_steps([500, 200, 500]) == (0.0, 500.0, 700.0, 1200.0)


def test_degrees_reject_nonpositive_steps():
    with pytest.raises(ScaleValidationError):
        degrees_from_steps([200, 0.0])
    with pytest.raises(ScaleValidationError):
        degrees_from_steps([200, -5.0])
    with pytest.raises(ScaleValidationError):
        degrees_from_steps([])


def test_scale_invariants():
    s = Scale((200, 200, 100), scale_type="Vocal", region="Africa")
    assert s.n_steps == 3
    assert s.range_cents == 500.0
    assert not s.octave
    with pytest.raises(ScaleValidationError):
        Scale((), scale_type="Vocal")
    with pytest.raises(ScaleValidationError):
        Scale((100, -1), scale_type="Vocal")
    with pytest.raises(ScaleValidationError):
        Scale((100, 100), scale_type="Vocal", region="Atlantis")
    with pytest.raises(ScaleValidationError):
        Scale((500, 500), scale_type="Theory")  # does not sum to 1200
    with pytest.raises(ScaleValidationError):
        Scale((600, 600), scale_type="Theory", octave=False)


def test_theory_defaults_to_octave():
    s = Scale((500, 700), scale_type="Theory")
    assert s.octave


def test_interval_set_examples():
    assert sorted(interval_set(Scale((500, 700))).intervals) == [500, 700, 1200]
    assert sorted(interval_set(Scale((500, 700), scale_type="Theory")).intervals) == [500, 700]
    # ordered pitch-class pairs of {0, 400, 700} mod 1200
    got = sorted(interval_set(Scale((400, 300, 500), scale_type="Theory")).intervals)
    assert got == [300, 400, 500, 700, 800, 900]


def test_interval_set_counts_and_max():
    for steps in [(170, 230), (100, 200, 300, 150), (90, 110, 130, 170, 210)]:
        s = Scale(steps)
        iset = interval_set(s)
        n = len(steps)
        assert len(iset) == n * (n + 1) // 2
        assert max(iset.intervals) == pytest.approx(sum(steps))


def test_octave_interval_multiset_rotation_invariant():
    steps = (100, 250, 150, 300, 400)
    base = sorted(interval_set(Scale(steps, scale_type="Theory")).intervals)
    for r in range(1, len(steps)):
        rotated = steps[r:] + steps[:r]
        got = sorted(interval_set(Scale(rotated, scale_type="Theory")).intervals)
        assert np.allclose(got, base)


def test_octave_interval_count():
    for n in (2, 3, 5, 7):
        steps = tuple(1200.0 / n for _ in range(n))
        iset = interval_set(Scale(steps, scale_type="Theory"))
        assert len(iset) == n * (n - 1)


def test_filter_intervals():
    iset = IntervalSet((500.0, 1300.0), "non_octave")
    assert filter_intervals(iset, 1250).intervals == (500.0,)
    both = IntervalSet((500.0, 700.0), "non_octave")
    assert filter_intervals(both, 1250).intervals == (500.0, 700.0)
    empty = IntervalSet((), "non_octave")
    assert filter_intervals(empty, 1250).intervals == ()


def test_filter_preserves_multiplicity():
    iset = IntervalSet((200.0, 200.0, 900.0), "non_octave")
    assert filter_intervals(iset, 800).intervals == (200.0, 200.0)


def test_scale_csv_round_trip(tmp_path):
    scales = [
        Scale((200, 200, 100, 200, 200, 200, 100), scale_type="Theory",
              region="Europe", id="major"),
        Scale((171.3, 228.9, 305.5), scale_type="Vocal", region="Africa", id="v1"),
        Scale((240, 240, 240, 240, 240), scale_type="Instrumental",
              region="Southeast Asia", octave=False, id="slendroish"),
    ]
    path = tmp_path / "scales.csv"
    write_scales(path, scales)
    back = read_scales(path)
    assert len(back) == 3
    for a, b in zip(scales, back):
        assert a.steps == b.steps
        assert a.scale_type == b.scale_type
        assert a.region == b.region
        assert a.octave == b.octave
        assert a.id == b.id


def test_read_scales_reports_bad_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("id,scale_type,region,octave,steps_cents\nx,Vocal,Africa,false,200;-3\n")
    with pytest.raises(DataFormatError, match="bad.csv:2"):
        read_scales(path)
    path.write_text("wrong,header\n")
    with pytest.raises(DataFormatError, match="header"):
        read_scales(path)
