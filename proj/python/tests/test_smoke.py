import math

import pytest

import hilo_sg


def small_dataset(**overrides):
    cfg = {"num_scenes": 4, "grid_size": 6, "num_object_classes": 3, "num_relation_classes": 4}
    cfg.update(overrides)
    return hilo_sg.synthesize(cfg)


def test_hungarian_hand_case():
    pairs, unmatched = hilo_sg.hungarian([[4, 1], [2, 0]])
    assert pairs == [(0, 1), (1, 0)]
    assert unmatched == []


def test_hungarian_rejects_too_few_queries():
    with pytest.raises(ValueError):
        hilo_sg.hungarian([[1.0, 2.0]])


def test_rie_and_distance():
    assert hilo_sg.rie([0.1, 0.3, 0.5, 0.1], [(0, 2)]) == [0.5, 0.3, 0.1, 0.1]
    a = [math.log(2.0), 0.0]
    b = [0.0, math.log(2.0)]
    value, g_hl, g_lh = hilo_sg.hilo_distance(a, b, [])
    assert value == pytest.approx(4.0 / 9.0, abs=1e-15)
    assert len(g_hl) == len(g_lh) == 2
    assert hilo_sg.hilo_distance(a, b, [(0, 1)])[0] == pytest.approx(0.0, abs=1e-15)
    assert hilo_sg.relation_consistency(a, b, [], margin=0.5)[0] == 0.0


def test_swap_and_augment_preserve_structure():
    data = small_dataset(multi_relation_fraction=1.0)
    swapped = hilo_sg.swap(data, "hl", "extreme")
    for before, after in zip(data["scenes"], swapped["scenes"]):
        assert len(before["triplets"]) == len(after["triplets"])
    augmented = hilo_sg.augment(data, hilo_sg.pair_scores(data, seed=1))
    for before, after in zip(data["scenes"], augmented["scenes"]):
        assert after["triplets"][: len(before["triplets"])] == before["triplets"]
    with pytest.raises(ValueError):
        hilo_sg.swap(data, "up", "adjacent")


def test_train_predict_fuse_evaluate():
    data = small_dataset()
    model, trace = hilo_sg.train(data, {"steps": 3, "num_queries": 8, "hidden_dim": 8})
    assert [row["step"] for row in trace] == [0, 1, 2, 3]
    hl = hilo_sg.predict(model, data, "hl")
    lh = hilo_sg.predict(model, data, "lh")
    fused = hilo_sg.fuse(hl, lh)
    assert [s["scene_id"] for s in fused] == [s["scene_id"] for s in data["scenes"]]
    report = hilo_sg.evaluate(data, fused, ks=(20, hilo_sg.ALL))
    assert len(report["recall"]) == 2
    assert all(0.0 <= r <= 1.0 for r in report["recall"])


def test_gradcheck_small():
    results = hilo_sg.gradcheck(instances=5, seed=0)
    assert results and all(r["passed"] for r in results)
