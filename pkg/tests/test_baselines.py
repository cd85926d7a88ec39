"""Penalty fitness and the centralized baseline solvers."""

import numpy as np
import pytest

from v2gdispatch.baselines import (
    PenaltyConfig,
    consensus_spread,
    cwoa_solve,
    gwo_solve,
    make_penalized_fitness,
    penalized_fitness,
)
from v2gdispatch.config import ScenarioConfig, build_instance
from v2gdispatch.costs import consensus_objective, grid_search_rate
from v2gdispatch.fleet import available_ids

PEN = PenaltyConfig(cap=10.0, tolerance_kw=1e-6)


@pytest.fixture(scope="module")
def small():
    instance = build_instance(ScenarioConfig(n_evs=8, seed=21))
    avail = available_ids(instance.fleet)
    return instance.costs.restrict(avail)


def test_penalty_config_validation():
    with pytest.raises(ValueError):
        PenaltyConfig(cap=0.0)
    with pytest.raises(ValueError):
        PenaltyConfig(tolerance_kw=-1.0)


def test_consensus_vector_gets_no_penalty(small):
    vec = np.full(8, 3.7)
    fitness = penalized_fitness(vec, small, PEN, 0.0, 6.6)
    true_obj = float(consensus_objective(3.7, small.ev, small.agg))
    assert fitness == pytest.approx(true_obj, rel=1e-12)


def test_maximal_spread_adds_full_cap(small):
    vec = np.array([0.0, 6.6] * 4)
    lenient = PenaltyConfig(cap=10.0, tolerance_kw=1e9)  # never triggers
    without = penalized_fitness(vec, small, lenient, 0.0, 6.6)
    with_pen = penalized_fitness(vec, small, PEN, 0.0, 6.6)
    assert with_pen - without == 10.0


def test_fitness_never_below_true_objective(small):
    rng = np.random.default_rng(3)
    lenient = PenaltyConfig(cap=10.0, tolerance_kw=1e9)
    for _ in range(1000):
        vec = rng.uniform(0.0, 6.6, 8)
        assert penalized_fitness(vec, small, PEN, 0.0, 6.6) >= penalized_fitness(
            vec, small, lenient, 0.0, 6.6
        )


def test_penalty_grades_with_spread(small):
    fitness = make_penalized_fitness(small.ev, small.agg, PEN, 0.0, 6.6)
    lenient = make_penalized_fitness(
        small.ev, small.agg, PenaltyConfig(cap=10.0, tolerance_kw=1e9), 0.0, 6.6
    )
    base = np.full(8, 3.0)
    narrow, wide = base.copy(), base.copy()
    narrow[0] += 0.5
    wide[0] += 3.0
    pen_narrow = fitness(narrow) - lenient(narrow)
    pen_wide = fitness(wide) - lenient(wide)
    assert 0.0 < pen_narrow < pen_wide <= 10.0
    assert pen_narrow == pytest.approx(10.0 * 0.5 / 6.6)


def test_consensus_spread():
    assert consensus_spread([2.0, 2.0, 2.0]) == 0.0
    assert consensus_spread([1.0, 4.0, 2.5]) == 3.0


def test_vector_length_checked(small):
    with pytest.raises(ValueError):
        penalized_fitness(np.ones(5), small, PEN, 0.0, 6.6)


def test_batch_matches_single_rows(small):
    fitness = make_penalized_fitness(small.ev, small.agg, PEN, 0.0, 6.6)
    rng = np.random.default_rng(8)
    pop = rng.uniform(0.0, 6.6, (6, 8))
    batch = fitness(pop)
    for row, value in zip(pop, batch):
        assert fitness(row) == value


@pytest.fixture(scope="module")
def one_dim():
    instance = build_instance(ScenarioConfig(n_evs=1, seed=33))
    costs = instance.costs
    oracle_rate, _ = grid_search_rate(costs.ev, costs.agg, 0.0, 6.6)
    fitness = make_penalized_fitness(costs.ev, costs.agg, PEN, 0.0, 6.6)
    return fitness, oracle_rate


def test_cwoa_dim1_matches_grid_oracle(one_dim):
    fitness, oracle_rate = one_dim
    best, trace = cwoa_solve(1, fitness, m=20, k_max=150, seed=2)
    assert abs(float(best[0]) - oracle_rate) <= 1e-2
    assert len(trace) == 150


def test_gwo_dim1_matches_grid_oracle(one_dim):
    fitness, oracle_rate = one_dim
    best, trace = gwo_solve(1, fitness, pack_size=20, k_max=150, seed=2)
    assert abs(float(best[0]) - oracle_rate) <= 1e-2
    assert len(trace) == 150


def test_traces_reproducible_and_non_increasing(one_dim):
    fitness, _ = one_dim
    _, t1 = cwoa_solve(1, fitness, m=10, k_max=60, seed=5)
    _, t2 = cwoa_solve(1, fitness, m=10, k_max=60, seed=5)
    assert t1 == t2
    assert all(a >= b for a, b in zip(t1, t1[1:]))
    _, g1 = gwo_solve(1, fitness, pack_size=10, k_max=60, seed=5)
    _, g2 = gwo_solve(1, fitness, pack_size=10, k_max=60, seed=5)
    assert g1 == g2
    assert all(a >= b for a, b in zip(g1, g1[1:]))


def test_solver_argument_validation(one_dim):
    fitness, _ = one_dim
    with pytest.raises(ValueError):
        cwoa_solve(0, fitness)
    with pytest.raises(ValueError):
        gwo_solve(0, fitness)
    with pytest.raises(ValueError):
        gwo_solve(1, fitness, pack_size=2)


def test_solutions_respect_bounds(small):
    fitness = make_penalized_fitness(small.ev, small.agg, PEN, 0.0, 6.6)
    best_c, _ = cwoa_solve(8, fitness, m=10, k_max=40, seed=3)
    best_g, _ = gwo_solve(8, fitness, pack_size=10, k_max=40, seed=3)
    for vec in (best_c, best_g):
        assert np.all(vec >= 0.0) and np.all(vec <= 6.6)
