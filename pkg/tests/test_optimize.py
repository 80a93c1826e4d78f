import itertools
import math

import numpy as np
import pytest

from bacon_shor_ft.bounds import GadgetConfig, Locality, cnot_bound
from bacon_shor_ft.noise import InvalidConfigError, NoiseParams
from bacon_shor_ft.optimize import (
    SWEEP_COLUMNS,
    NotAchievableError,
    Objective,
    SearchSpace,
    cnot_cz_count,
    count_resources,
    optimize,
    pareto_front,
    sweep,
)

SMALL_SPACE = dict(n=(1, 3), m=(1, 3, 5), r=(1, 3), r_prime=(1, 2, 3), r_plus=(1, 2))


def small_space(**overrides):
    return SearchSpace(**{**SMALL_SPACE, **overrides})


def brute_force(space, noise):
    """(bound, cz, cfg) for every grid point."""
    rows = []
    for n, m, r, rp, rq in itertools.product(space.n, space.m, space.r, space.r_prime, space.r_plus):
        for p in space.p_candidates(m):
            cfg = space.config(n, m, p, r, rp, rq)
            cz = int(cnot_cz_count(n, m, p, r, rp, rq, local=space.is_local))
            rows.append((cnot_bound(cfg, noise).total, cz, cfg))
    return rows


def test_p_candidates():
    space = small_space()
    assert space.p_candidates(9) == [1, 2, 3, 5, 9]
    assert space.p_candidates(1) == [1]
    assert small_space(p=(2, 40)).p_candidates(9) == [2]
    assert small_space(locality="local").p_candidates(9) == [27]


def test_space_size_counts_every_point():
    space = small_space()
    assert space.size() == len(brute_force(space, NoiseParams.zero()))


def test_space_rejects_empty_ranges():
    with pytest.raises(InvalidConfigError):
        small_space(n=(2, 4))
    with pytest.raises(InvalidConfigError):
        small_space(m=(1,), p=(5,))


def test_space_dict_round_trip():
    space = small_space(p=(1, 3), locality="local")
    assert SearchSpace.from_dict(space.to_dict()) == space


def test_zero_noise_picks_the_cheapest_gadget():
    result = optimize(NoiseParams.zero(), small_space())
    assert result.best_cfg.key() == (1, 1, 1, 1, 1, 1)
    assert result.bound.total == -math.inf
    assert result.resources.cz_gates == 5


@pytest.mark.parametrize("locality", ["nonlocal", "local"])
def test_min_bound_matches_brute_force(locality, biased_noise):
    space = small_space(locality=locality)
    result = optimize(biased_noise, space)
    best = min(row[0] for row in brute_force(space, biased_noise))
    assert result.bound.total == pytest.approx(best, rel=1e-9)
    assert result.evaluated + result.pruned == space.size()
    assert result.best_cfg.locality is Locality(locality)


def test_min_cost_matches_brute_force(biased_noise):
    space = small_space()
    target = 1e-4
    result = optimize(biased_noise, space, Objective.MIN_COST, target=target)
    assert result.bound.total <= math.log(target) + 1e-9
    feasible = [row[1] for row in brute_force(space, biased_noise) if row[0] <= math.log(target) - 1e-9]
    assert result.resources.cz_gates <= min(feasible)
    assert result.evaluated + result.pruned == space.size()


def test_min_cost_needs_a_target(biased_noise):
    with pytest.raises(InvalidConfigError):
        optimize(biased_noise, small_space(), "min_cost")
    with pytest.raises(InvalidConfigError):
        optimize(biased_noise, small_space(), "min_cost", target=2.0)


def test_unreachable_target(biased_noise):
    with pytest.raises(NotAchievableError):
        optimize(biased_noise, small_space(), Objective.MIN_COST, target=1e-300)


def test_single_point_space(biased_noise):
    cfg = GadgetConfig(n=3, m=9, p=4, r=3, r_prime=3, r_plus=2)
    result = optimize(biased_noise, SearchSpace.single(cfg))
    assert result.best_cfg == cfg
    assert result.evaluated == 1
    assert result.pruned == 0
    assert result.bound == cnot_bound(cfg, biased_noise)
    assert result.resources == count_resources(cfg)


def test_sharding_does_not_change_the_answer(biased_noise):
    space = small_space()
    serial = optimize(biased_noise, space, workers=1)
    pooled = optimize(biased_noise, space, workers=3)
    assert serial.best_cfg == pooled.best_cfg
    assert serial.bound == pooled.bound
    assert pooled.evaluated + pooled.pruned == space.size()


def test_result_to_dict(biased_noise):
    out = optimize(biased_noise, small_space()).to_dict()
    assert out["objective"] == "min_bound"
    assert set(out["best_cfg"]) >= {"n", "m", "p", "r", "r_prime", "r_plus", "locality"}
    assert "log10_total" in out["bound"]
    assert out["resources"]["cz_gates"] > 0


def test_pareto_front_is_non_dominated(biased_noise):
    space = small_space()
    front = pareto_front(biased_noise, space)
    costs = [point.cz_gates for point in front]
    bounds = [point.bound for point in front]
    assert costs == sorted(set(costs))
    assert all(a > b for a, b in zip(bounds, bounds[1:]))

    rows = brute_force(space, biased_noise)
    assert costs[0] == min(row[1] for row in rows)
    assert bounds[-1] == pytest.approx(min(row[0] for row in rows), rel=1e-9)
    for point in front:
        assert not any(cz < point.cz_gates and bound < point.bound - 1e-9 for bound, cz, _ in rows)


def test_pareto_front_does_not_depend_on_workers(biased_noise):
    space = small_space(m=(3, 5))
    serial = pareto_front(biased_noise, space)
    pooled = pareto_front(biased_noise, space, workers=2)
    assert [(p.cz_gates, p.cfg) for p in serial] == [(p.cz_gates, p.cfg) for p in pooled]


def test_cz_count_broadcasts():
    rp, rq = np.meshgrid([1, 2, 3], [1, 4], indexing="ij")
    counts = cnot_cz_count(3, 9, 4, 3, rp, rq)
    assert counts.shape == (3, 2)
    assert (np.diff(counts, axis=0) > 0).all()
    assert (np.diff(counts, axis=1) > 0).all()


def test_sweep_rows(biased_noise):
    frame = sweep(biased_noise, [1e-4, 1e-3], [1e4], small_space(), eps_meas_ratios=(1.0, 2.0))
    assert list(frame.columns) == SWEEP_COLUMNS
    assert len(frame) == 4
    assert frame["eps_meas"].tolist() == pytest.approx([1e-4, 2e-4, 1e-3, 2e-3])
    low, high = frame[frame["eps_meas"] == frame["eps"]]["log10_bound"].tolist()
    assert low < high


def test_sweep_rejects_empty_grid(biased_noise):
    with pytest.raises(InvalidConfigError):
        sweep(biased_noise, [], [1e4], small_space())


def test_sweep_locality_override(biased_noise):
    frame = sweep(biased_noise, [1e-4], [1e4], small_space(), locality="local")
    assert frame["locality"].tolist() == ["local"]
    assert frame["p"].iloc[0] == 3 * frame["m"].iloc[0]


@pytest.mark.slow
def test_default_space_beats_a_hand_picked_gadget(biased_noise):
    space = SearchSpace()
    result = optimize(biased_noise, space, workers=4)
    hand_picked = cnot_bound(GadgetConfig(n=3, m=9, p=9, r=3, r_prime=3, r_plus=3), biased_noise).total
    assert result.bound.total <= hand_picked + 1e-9
    assert result.evaluated + result.pruned == space.size()
