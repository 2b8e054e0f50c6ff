import numpy as np
import pytest

from crowtune.errors import OffGridError
from crowtune.space import (ParameterSpace, ParameterSpec, grid_index, preset_space,
                            snap, snap_index)

# (name, lo, hi, step, count) straight from the shipped grids
ASD_POCS_ROWS = [
    ("max_iter", 5, 50, 1, 46),
    ("tv_iter", 5, 50, 1, 46),
    ("epsilon", 50, 1500, 10, 146),
    ("alpha", 0.0001, 0.1, 0.0001, 1000),
    ("alpha_red", 0.9, 0.99, 0.01, 10),
    ("lambda", 0.9, 0.99, 0.01, 10),
    ("lambda_red", 0.9, 0.99, 0.01, 10),
    ("r_max", 0.9, 0.99, 0.01, 10),
]
AWPCSD_ROWS = [
    ("max_iter", 5, 50, 1, 46),
    ("tv_iter", 5, 50, 1, 46),
    ("epsilon", 50, 1500, 10, 146),
    ("lambda", 0.9, 0.99, 0.01, 10),
    ("lambda_red", 0.9, 0.99, 0.01, 10),
    ("delta", 0.005, 2, 0.005, 400),
]


@pytest.mark.parametrize("algorithm,rows", [
    ("asd-pocs", ASD_POCS_ROWS),
    ("piccs", ASD_POCS_ROWS),
    ("awpcsd", AWPCSD_ROWS),
])
def test_preset_grids(algorithm, rows):
    space = preset_space(algorithm)
    assert space.dimension == len(rows)
    for spec, (name, lo, hi, step, count) in zip(space.specs, rows):
        assert spec.name == name
        assert (spec.lo, spec.hi, spec.step) == (lo, hi, step)
        assert spec.count == count


def test_preset_dimensions():
    assert preset_space("asd-pocs").dimension == 8
    assert preset_space("piccs").dimension == 8
    assert preset_space("awpcsd").dimension == 6
    with pytest.raises(ValueError):
        preset_space("fdk")


def test_snap_examples():
    space = preset_space("asd-pocs")
    by_name = {s.name: s for s in space.specs}
    assert by_name["alpha"].value(snap_index(by_name["alpha"], 0.00014)) == pytest.approx(0.0001)
    assert by_name["epsilon"].value(snap_index(by_name["epsilon"], 2000.0)) == 1500.0
    # |0.934 - 0.93| = 0.004 < |0.934 - 0.94| = 0.006
    assert by_name["lambda"].value(snap_index(by_name["lambda"], 0.934)) == pytest.approx(0.93)


def test_snap_halfway_goes_toward_min():
    spec = ParameterSpec("epsilon", 50, 1500, 10)
    assert spec.value(snap_index(spec, 775.0)) == 770.0
    assert spec.value(snap_index(spec, 775.0001)) == 780.0


def test_snap_vector_and_dimension_check():
    space = preset_space("awpcsd")
    pos = snap(space, [5.4, 49.6, 2000.0, 0.934, 0.0, 0.005])
    values = space.values(pos)
    assert values[0] == 5 and values[1] == 50 and values[2] == 1500
    assert values[3] == pytest.approx(0.93) and values[4] == 0.9
    with pytest.raises(ValueError):
        snap(space, [1.0, 2.0])


def test_grid_index_examples():
    assert grid_index(ParameterSpec("it", 5, 50, 1), 5) == 0
    assert grid_index(ParameterSpec("eps", 50, 1500, 10), 1500) == 145  # (1500-50)/10
    assert grid_index(ParameterSpec("lam", 0.9, 0.99, 0.01), 0.95) == 5  # round((0.95-0.9)/0.01)


def test_grid_index_rejects_off_grid():
    spec = ParameterSpec("eps", 50, 1500, 10)
    with pytest.raises(OffGridError):
        grid_index(spec, 698.0)
    with pytest.raises(OffGridError):
        grid_index(spec, 1510.0)


def test_grid_index_round_trip_every_preset_point():
    for algorithm in ("asd-pocs", "awpcsd"):
        for spec in preset_space(algorithm).specs:
            for k in range(spec.count):
                assert grid_index(spec, spec.value(k)) == k


def test_snap_idempotent_and_bounded():
    space = preset_space("asd-pocs")
    rng = np.random.default_rng(7)
    lows = np.array([s.lo for s in space.specs])
    highs = np.array([s.hi for s in space.specs])
    for _ in range(200):
        raw = lows + (highs - lows) * rng.uniform(-0.5, 1.5, size=space.dimension)
        pos = snap(space, raw)
        values = space.values(pos)
        assert np.all(values >= lows) and np.all(values <= highs)
        assert snap(space, values) == pos


def test_position_helpers():
    space = preset_space("awpcsd")
    pos = space.position([0, 1, 2, 3, 4, 5])
    assert space.from_values(space.values(pos)) == pos
    assert space.value_map(pos)["delta"] == pytest.approx(0.005 + 5 * 0.005)
    with pytest.raises(IndexError):
        space.position([0, 0, 0, 0, 0, 400])


def test_spec_validation():
    with pytest.raises(ValueError):
        ParameterSpec("bad", 1.0, 0.0, 0.1)
    with pytest.raises(ValueError):
        ParameterSpec("bad", 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ParameterSpace((ParameterSpec("a", 0, 1, 1), ParameterSpec("a", 0, 1, 1)))
