import math

import numpy as np
import pytest

from crowtune.initpop import (ChaosStream, chaos_next, init_cdlu, init_dlu, init_lhs,
                              init_random, initialize)
from crowtune.space import ParameterSpace, ParameterSpec, preset_space


def test_chaos_first_values_match_direct_iteration():
    stream = ChaosStream()
    first = chaos_next(stream)
    assert first == pytest.approx(math.sin(0.7 * math.pi), abs=1e-12)
    assert first == pytest.approx(0.8090169943749475, abs=1e-9)
    second = chaos_next(stream)
    assert second == pytest.approx(math.sin(math.pi * 0.8090169943749475), abs=1e-12)


def test_chaos_range_and_determinism():
    a = ChaosStream().take(1000)
    b = ChaosStream().take(1000)
    assert np.array_equal(a, b)
    assert np.all(a > 0.0) and np.all(a <= 1.0)


def test_chaos_no_repeats_in_first_draws():
    # N=25, D=8 worth of draws
    values = ChaosStream().take(200)
    assert len(set(values.tolist())) == 200


def test_chaos_seed_validation():
    with pytest.raises(ValueError):
        ChaosStream(0.0)
    with pytest.raises(ValueError):
        ChaosStream(1.0)


@pytest.fixture
def small_space():
    return ParameterSpace((
        ParameterSpec("a", 0.0, 9.0, 1.0),      # count 10
        ParameterSpec("b", 50.0, 1500.0, 10.0),  # count 146
    ))


def test_init_random_seeded_and_on_grid(small_space):
    pop1 = init_random(small_space, 50, rng_seed=3)
    pop2 = init_random(small_space, 50, rng_seed=3)
    assert pop1 == pop2
    assert init_random(small_space, 50, rng_seed=4) != pop1
    for pos in pop1:
        for spec, k in zip(small_space.specs, pos.indices):
            assert 0 <= k < spec.count


def test_init_random_uniform_marginals():
    space = ParameterSpace((ParameterSpec("a", 0.0, 9.0, 1.0),))
    n = 1000
    pop = init_random(space, n, rng_seed=12)
    counts = np.bincount([p.indices[0] for p in pop], minlength=10)
    # binomial: p=0.1, 4 sigma band
    sigma = math.sqrt(n * 0.1 * 0.9)
    assert np.all(np.abs(counts - n * 0.1) <= 4 * sigma)


def test_init_lhs_one_sample_per_stratum():
    space = ParameterSpace((
        ParameterSpec("fine", 0.0, 999.0, 1.0),   # count 1000
        ParameterSpec("mid", 0.0, 99.0, 1.0),     # count 100
    ))
    n = 25
    pop = init_lhs(space, n, rng_seed=5)
    assert pop == init_lhs(space, n, rng_seed=5)
    for d, spec in enumerate(space.specs):
        width = spec.count // n
        strata = sorted(pos.indices[d] // width for pos in pop)
        assert strata == list(range(n))  # exactly one sample per stratum


def test_init_lhs_handles_grids_smaller_than_population(small_space):
    pop = init_lhs(small_space, 25, rng_seed=1)
    assert len(pop) == 25
    for pos in pop:
        assert 0 <= pos.indices[0] < 10


def test_init_dlu_endpoints_and_determinism():
    space = preset_space("asd-pocs")
    pop = init_dlu(space, 25)
    assert pop == init_dlu(space, 25)
    assert list(space.values(pop[0])) == [s.lo for s in space.specs]
    assert list(space.values(pop[24])) == [s.hi for s in space.specs]


def test_init_dlu_snaps_progression_onto_grid():
    # individual 12 of 25 on [50, 1500]: 50 + 12*(1450/24) = 775, halfway -> 770
    space = ParameterSpace((ParameterSpec("epsilon", 50.0, 1500.0, 10.0),))
    pop = init_dlu(space, 25)
    assert space.values(pop[12])[0] == 770.0


def test_init_cdlu_deterministic_and_multiset_preserving():
    space = preset_space("asd-pocs")
    pop = init_cdlu(space, 25)
    assert pop == init_cdlu(space, 25)
    dlu = init_dlu(space, 25)
    for d in range(space.dimension):
        assert sorted(p.indices[d] for p in pop) == sorted(p.indices[d] for p in dlu)


def test_init_cdlu_permutation_matches_chaos_ranks():
    # D=2, N=3: ranks of the first two chaos triples decide the reordering
    space = ParameterSpace((
        ParameterSpec("a", 0.0, 2.0, 1.0),
        ParameterSpec("b", 0.0, 2.0, 1.0),
    ))
    chaos = ChaosStream().take(6)
    pop = init_cdlu(space, 3)
    for d in range(2):
        block = chaos[3 * d:3 * (d + 1)]
        order = np.argsort(block, kind="stable")
        ranks = np.empty(3, dtype=int)
        ranks[order] = np.arange(3)
        assert [pos.indices[d] for pos in pop] == list(ranks)
    # dim 0 chaos (0.809, 0.565, 0.979) ranks to (1, 0, 2); dim 1 is ascending
    assert [pos.indices[0] for pos in pop] == [1, 0, 2]
    assert [pos.indices[1] for pos in pop] == [0, 1, 2]


def test_init_cdlu_shuffles_every_dimension_at_25():
    # regression guard: the chaos shuffle must not leave any dimension ordered
    space = preset_space("asd-pocs")
    pop = init_cdlu(space, 25)
    dlu = init_dlu(space, 25)
    for d in range(space.dimension):
        assert [p.indices[d] for p in pop] != [p.indices[d] for p in dlu]


def test_initialize_dispatch(small_space):
    assert initialize(small_space, 4, "dlu") == init_dlu(small_space, 4)
    assert initialize(small_space, 4, "cdlu") == init_cdlu(small_space, 4)
    assert initialize(small_space, 4, "random", 9) == init_random(small_space, 4, 9)
    assert initialize(small_space, 4, "lhs", 9) == init_lhs(small_space, 4, 9)
    with pytest.raises(ValueError):
        initialize(small_space, 4, "sobol")
    with pytest.raises(ValueError):
        initialize(small_space, 1, "random")
