import json

import numpy as np
import pytest

from subsampling.constraints import Matchoid, measure_extendibility
from subsampling.instances import (
    GENERATORS,
    generate_instance,
    load_instance,
    load_permutation,
    parse_generate_spec,
    save_instance,
    save_matrix_csv,
    seeded_permutation,
)


@pytest.mark.parametrize("kind", sorted(GENERATORS))
def test_generators_are_deterministic(kind):
    a = generate_instance(kind, 8, seed=3)
    b = generate_instance(kind, 8, seed=3)
    assert a.to_dict() == b.to_dict()
    assert a.n == 8 and a.constraint.n == 8


def test_empty_instance():
    inst = generate_instance("coverage+uniform", 0, seed=1)
    assert inst.n == 0


def test_unknown_kind():
    with pytest.raises(ValueError):
        generate_instance("nothing", 4)
    with pytest.raises(ValueError):
        parse_generate_spec("cut+uniform:n=5,bogus=1")


def test_parse_generate_spec():
    inst = parse_generate_spec("coverage+uniform:n=7,seed=2,k=4")
    assert inst.n == 7 and inst.constraint.k == 4
    assert inst.name == "coverage+uniform:n=7,seed=2,k=4"


def test_genre_limit_extendibility_small():
    for seed in range(4):
        inst = generate_instance("cut+genre-limits", 7, seed=seed, genres=3)
        assert inst.p <= 4
        assert measure_extendibility(inst.constraint) <= 4


def test_logdet_regions_p_is_max_multiplicity():
    inst = generate_instance("logdet+matchoid", 30, seed=5, regions=4, radius=0.6)
    g = inst.constraint
    counts = np.zeros(inst.n, dtype=int)
    for ground, _ in g.members:
        for x in ground:
            counts[x] += 1
    assert g.p == counts.max()
    assert counts.min() >= 1


def test_copies_matchoid():
    inst = generate_instance("modular+copies", 20, seed=0, k=3, p=4)
    assert isinstance(inst.constraint, Matchoid)
    assert inst.p == 4 and inst.constraint.m == 4


def test_json_round_trip(tmp_path):
    inst = generate_instance("cut+matchoid", 6, seed=9)
    path = tmp_path / "inst.json"
    save_instance(path, inst)
    back = load_instance(str(path))
    assert back.p == inst.p
    for S in [(), (0,), (1, 3, 5)]:
        assert back.objective.value(S) == pytest.approx(inst.objective.value(S))


def test_csv_and_declared_p(tmp_path):
    X = np.random.default_rng(0).random((4, 2))
    save_matrix_csv(tmp_path / "sim.csv", X @ X.T)
    doc = {
        "ground_size": 4,
        "declared_p": 3,
        "objective": {"kind": "cut", "similarity_csv": "sim.csv", "lambda": 0.5},
        "constraint": {"kind": "genre-limits", "genres": [[0, 1], [1, 2]], "genre_caps": 1, "k": 2},
    }
    (tmp_path / "a.json").write_text(json.dumps(doc))
    inst = load_instance(str(tmp_path / "a.json"))
    assert inst.p == 3
    # element 1 lies in both genres and under the global cap; understating is refused
    doc["declared_p"] = 2
    (tmp_path / "b.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_instance(str(tmp_path / "b.json"))


def test_declared_p_checked_by_measurement(tmp_path):
    doc = {
        "ground_size": 4,
        "declared_p": 1,
        "objective": {"kind": "modular", "weights": [1, 1, 1, 1]},
        "constraint": {"kind": "knapsack", "sizes": [1, 1, 2, 2], "capacity": 2},
    }
    (tmp_path / "k.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="measured"):
        load_instance(str(tmp_path / "k.json"))


def test_ground_size_mismatch(tmp_path):
    doc = {"ground_size": 3, "objective": {"kind": "modular", "weights": [1, 2]},
           "constraint": {"kind": "uniform", "k": 1}}
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_instance(str(tmp_path / "m.json"))


def test_permutations(tmp_path):
    perm = seeded_permutation(10, 4)
    assert sorted(perm) == list(range(10))
    assert perm == seeded_permutation(10, 4)
    assert perm != seeded_permutation(10, 5)
    (tmp_path / "p.txt").write_text("\n".join(map(str, perm)))
    assert load_permutation(str(tmp_path / "p.txt"), 10) == perm
    (tmp_path / "bad.txt").write_text("0\n0\n")
    with pytest.raises(ValueError):
        load_permutation(str(tmp_path / "bad.txt"), 2)
