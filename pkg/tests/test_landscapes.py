import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mutantucb.core import RngStreams
from mutantucb.errors import CrossoverUnsupported, CurveExhausted, MutationImpossible, OracleUnavailable
from mutantucb.landscapes import (
    TabularLandscape,
    VectorLandscape,
    hamming,
    landscape_from_dict,
    one_point_crossover,
    oracle_best,
)


def flat(asym=0.8, rho=0.5, **kw):
    # dims=1 with slope 0 makes every config's asymptote a_max.
    return VectorLandscape(dims=1, alphabet=2, optimum=(0,), slope=0.0, a_max=asym, curve_rate=rho, **kw)


def test_vector_sub_train_first_epoch():
    assert flat().sub_train((0,), 0, RngStreams(0)["train"]) == pytest.approx(0.4, abs=1e-15)


def test_vector_sub_train_approaches_asymptote():
    r = flat().sub_train((0,), 20, RngStreams(0)["train"])
    assert r == pytest.approx(0.8 * (1 - 0.5**21), abs=1e-15)
    assert r == pytest.approx(0.7999996185302734, abs=1e-12)
    assert flat().sub_train((0,), 200, None) == pytest.approx(0.8, abs=1e-12)


def test_vector_sub_train_overfit():
    space = flat(asym=1.0, rho=1e-12, overfit_peak=3, overfit_decay=0.1)
    assert space.sub_train((1,), 4, None) == pytest.approx(0.8, abs=1e-9)
    assert space.sub_train((1,), 2, None) == pytest.approx(1.0, abs=1e-9)


def test_vector_rewards_clamped_under_heavy_noise():
    space = VectorLandscape.generate(6, 3, seed=1, noise_sd=2.0, curve_rate=0.3)
    rng = RngStreams(5)["train"]
    cfg = space.sample(RngStreams(5)["sample"])
    rewards = [space.sub_train(cfg, e % 30, rng) for e in range(2000)]
    assert min(rewards) >= 0.0 and max(rewards) <= 1.0
    assert 0.0 in rewards and 1.0 in rewards


@given(seed=st.integers(0, 2**32), epoch=st.integers(0, 400))
@settings(max_examples=200)
def test_vector_rewards_in_unit_interval(seed, epoch):
    space = VectorLandscape.generate(5, 4, seed=3, noise_sd=0.3, overfit_peak=5, overfit_decay=0.2)
    streams = RngStreams(seed)
    cfg = space.sample(streams["sample"])
    assert 0.0 <= space.sub_train(cfg, epoch, streams["train"]) <= 1.0


def test_vector_monotone_learning_without_noise():
    space = VectorLandscape.generate(8, 3, seed=2, curve_rate=0.6)
    cfg = space.sample(RngStreams(0)["sample"])
    assert space.asymptote(cfg) > 0
    curve = [space.sub_train(cfg, e, None) for e in range(40)]
    assert all(b > a for a, b in zip(curve, curve[1:]))


def test_asymptote_linear_in_hamming_and_clamped():
    space = VectorLandscape(dims=4, alphabet=3, optimum=(0, 1, 2, 0), slope=0.3, a_max=0.9, a_min=0.1)
    assert space.asymptote((0, 1, 2, 0)) == 0.9
    assert space.asymptote((1, 1, 2, 0)) == pytest.approx(0.6)
    assert space.asymptote((1, 0, 0, 1)) == 0.1


def test_vector_mutate_only_neighbor():
    space = VectorLandscape(dims=1, alphabet=2, optimum=(0,))
    assert space.mutate((0,), 0, RngStreams(0)["mutate"]) == (1,)


def test_vector_mutate_changes_exactly_one_coordinate():
    space = VectorLandscape.generate(12, 3, seed=0)
    streams = RngStreams(99)
    cfg = space.sample(streams["sample"])
    for _ in range(10_000):
        child = space.mutate(cfg, 0, streams["mutate"])
        assert hamming(cfg, child) == 1
        assert len(child) == 12 and all(0 <= v < 3 for v in child)
        cfg = child


def test_vector_mutate_impossible_with_unit_alphabet():
    space = VectorLandscape(dims=3, alphabet=1, optimum=(0, 0, 0))
    with pytest.raises(MutationImpossible):
        space.mutate((0, 0, 0), 0, RngStreams(0)["mutate"])


def test_crossover_examples():
    space = VectorLandscape.generate(4, 2, seed=0)
    rng = RngStreams(0)["mutate"]
    assert space.crossover((1, 0, 1, 1), (1, 0, 1, 1), rng) == (1, 0, 1, 1)
    assert one_point_crossover([0, 0, 0, 0], [1, 1, 1, 1], 2) == (0, 0, 1, 1)
    single = VectorLandscape(dims=1, alphabet=3, optimum=(0,))
    assert single.crossover((2,), (1,), rng) == (2,)


@given(seed=st.integers(0, 2**32))
def test_crossover_positions_come_from_matching_parent(seed):
    space = VectorLandscape.generate(9, 4, seed=0)
    streams = RngStreams(seed)
    a, b = space.sample(streams["sample"]), space.sample(streams["sample"])
    child = space.crossover(a, b, streams["mutate"])
    assert all(c in (x, y) for c, x, y in zip(child, a, b))
    assert any(child == a[:u] + b[u:] for u in range(1, 9))


def test_locality_of_mutation():
    space = VectorLandscape.generate(12, 3, seed=4, slope=0.07)
    streams = RngStreams(3)
    cfg = space.sample(streams["sample"])
    for _ in range(10_000):
        child = space.mutate(cfg, 0, streams["mutate"])
        assert abs(space.asymptote(child) - space.asymptote(cfg)) <= space.slope + 1e-15
        cfg = child


TABLE = {
    "n_max": 3,
    "deterministic": True,
    "arms": [
        {"config_id": 0, "curve": [0.2, 0.4, 0.6], "neighbors": [1], "asymptote": 0.3},
        {"config_id": 1, "curve": [0.3, 0.5, 0.9], "neighbors": [0, 2], "asymptote": 0.9},
        {"config_id": 2, "curve": [0.1, 0.2, 0.5], "neighbors": [], "asymptote": 0.5},
    ],
}


def test_tabular_lookup_and_exhaustion():
    space = TabularLandscape.from_dict(TABLE)
    assert space.sub_train(0, 0, None) == 0.2
    with pytest.raises(CurveExhausted):
        space.sub_train(0, 3, None)


def test_tabular_deterministic_ignores_seed():
    space = TabularLandscape.from_dict(TABLE)
    values = {space.sub_train(1, 2, RngStreams(s)["train"]) for s in range(20)}
    assert values == {0.9}


def test_tabular_noise_is_clamped():
    space = TabularLandscape.from_dict({**TABLE, "deterministic": False, "noise_sd": 1.0})
    rng = RngStreams(1)["train"]
    vals = [space.sub_train(1, 2, rng) for _ in range(500)]
    assert all(0 <= v <= 1 for v in vals) and len(set(vals)) > 10


def test_tabular_mutation_and_crossover():
    space = TabularLandscape.from_dict(TABLE)
    rng = RngStreams(0)["mutate"]
    assert space.mutate(0, 0, rng) == 1
    assert {space.mutate(1, 0, rng) for _ in range(200)} == {0, 2}
    with pytest.raises(MutationImpossible):
        space.mutate(2, 0, rng)
    with pytest.raises(CrossoverUnsupported):
        space.crossover(0, 1, rng)


@pytest.mark.parametrize(
    "patch, match",
    [
        ({"colour": 1}, "unknown"),
        ({"n_max": 4}, "shorter"),
        ({"arms": [{"config_id": 0, "curve": [1.5], "neighbors": []}], "n_max": 1}, r"\[0, 1\]"),
        ({"arms": [{"config_id": 0, "curve": [0.5], "neighbors": [7]}], "n_max": 1}, "neighbors"),
    ],
)
def test_tabular_schema_validation(patch, match):
    with pytest.raises(ValueError, match=match):
        TabularLandscape.from_dict({**TABLE, **patch})


def test_tabular_load_from_file(tmp_path):
    path = tmp_path / "space.json"
    path.write_text(json.dumps(TABLE))
    space = landscape_from_dict({"kind": "tabular", "path": "space.json"}, base_dir=tmp_path)
    assert space == TabularLandscape.from_dict(TABLE)


def test_oracle_tabular():
    assert oracle_best(TabularLandscape.from_dict(TABLE)) == (1, 0.9)


def test_oracle_flat_vector_returns_lexicographic_smallest():
    space = VectorLandscape(dims=3, alphabet=4, optimum=(3, 2, 1), slope=0.0, a_max=0.6)
    assert oracle_best(space) == ((0, 0, 0), 0.6)


def test_oracle_matches_brute_force():
    space = VectorLandscape.generate(4, 3, seed=11, slope=0.2, a_max=0.9, a_min=0.1)
    configs = list(itertools.product(range(3), repeat=4))
    assert len(configs) == 81
    best_value = max(space.asymptote(c) for c in configs)
    best_config = min(c for c in configs if space.asymptote(c) == best_value)
    assert oracle_best(space) == (best_config, best_value)
    assert best_config == space.optimum


def test_oracle_refuses_huge_space():
    with pytest.raises(OracleUnavailable):
        oracle_best(VectorLandscape.generate(30, 3, seed=0))


def test_landscape_config_rejects_unknown_keys():
    with pytest.raises(ValueError, match="unknown landscape keys"):
        landscape_from_dict({"kind": "vector", "dims": 3, "alphabet": 2, "bogus": 1})


def test_generate_is_deterministic():
    assert VectorLandscape.generate(10, 3, seed=5) == VectorLandscape.generate(10, 3, seed=5)
    assert VectorLandscape.generate(10, 3, seed=5).optimum != VectorLandscape.generate(10, 3, seed=6).optimum


def test_closed_form_curve_to_1e12():
    space = VectorLandscape.generate(6, 3, seed=0, curve_rate=0.83)
    cfg = space.sample(np.random.default_rng(0))
    A = space.asymptote(cfg)
    for n in range(1, 101):
        assert abs(space.sub_train(cfg, n - 1, None) - A * (1 - 0.83**n)) <= 1e-12
