import numpy as np
import pytest

import hgnids

PAIR = ("172.16.0.1", "192.168.10.50")


def test_flow_record_fields():
    rec = hgnids.FlowRecord()
    rec.src_ip, rec.dst_ip, rec.dst_port = "10.0.0.1", "10.0.0.2", 80
    rec.label = "PortScan"
    assert rec.is_attack
    rec.label = "BENIGN"
    assert not rec.is_attack


def test_hypergraph_from_edges():
    h = hgnids.Hypergraph.from_edges([("a", [1, 2, 3]), ("b", [2, 3]), ("c", [3, 4])])
    assert (h.edge_count, h.vertex_count, h.max_edge_size) == (3, 4, 3)
    assert h.s_distance("a", "c", 1) == 1
    assert h.s_distance("a", "c", 2) is None
    assert sorted(map(sorted, h.s_components(2))) == [["a", "b"], ["c"]]
    # a reaches b and c at distance 1 each
    assert h.s_closeness("a", 1) == pytest.approx(1.0)


def test_schedules():
    assert list(hgnids.s_schedule(2)) == [3, 5, 7, 9, 11, 13, 15, 17, 19, 21, 23]
    assert hgnids.feature_skip_interval(1000) == 70
    assert hgnids.detector_skip_interval(1000) == 99


def test_matrix_shapes():
    recs = hgnids.synth_traffic("mixed", 400, [PAIR], seed=5)
    for mode, width in (("nrf", 9), ("hgi", 21), ("hga", 14)):
        X, y, names = hgnids.build_matrix(recs, mode)
        assert X.shape == (400, width)
        assert len(names) == width
        assert set(np.unique(y)) <= {0, 1}


def test_train_predict_roundtrip(tmp_path):
    recs = hgnids.synth_traffic("mixed", 600, [PAIR], seed=9)
    X, y, _ = hgnids.build_matrix(recs, "nrf")
    model = hgnids.train(X, y, kind="rf", mode="nrf", seed=1, n_trees=15)
    proba = np.asarray(model.predict_proba(X))
    assert ((proba >= 0.5) == y).mean() > 0.95
    path = tmp_path / "model.txt"
    model.save(path)
    again = hgnids.TreeModel.load(path)
    assert again == model
    assert np.array_equal(np.asarray(again.predict_proba(X)), proba)


def test_train_rejects_width_mismatch():
    with pytest.raises(hgnids.UsageError):
        hgnids.train(np.zeros((4, 3)), np.array([0, 1, 0, 1]), mode="nrf")


def test_evaluate_labels():
    r = hgnids.evaluate_labels([1, 1, 0, 0], [1, 0, 0, 1])
    assert (r["tp"], r["fn"], r["tn"], r["fp"]) == (1, 1, 1, 1)
    assert r["fnp"] == pytest.approx(0.5)


def test_detector_flags_scanner():
    recs = hgnids.synth_traffic("mixed", 2000, [PAIR], seed=3)
    flags = hgnids.detect_window(recs)
    assert [(s, d) for s, d, _ in flags] == [PAIR]


def test_csv_roundtrip(tmp_path):
    recs = hgnids.synth_traffic("mixed", 50, [PAIR], seed=2)
    path = tmp_path / "flows.csv"
    hgnids.write_csv(recs, path)
    back, report = hgnids.ingest_csv(path)
    assert report["kept"] == 50
    assert [r.dst_port for r in back] == [r.dst_port for r in recs]


def test_simulate_static_case():
    rows = hgnids.simulate(1, epochs=2, computers=2, records=2000)
    assert len(rows) == 4
    assert all(r["ensemble_versions"] == "1;1;1" for r in rows)


def test_cli_in_process(tmp_path):
    code, _, _ = hgnids.cli(["not-a-command"])
    assert code == 1
    out = tmp_path / "synth"
    code, _, err = hgnids.cli(["synth", "--profile", "scan", "--count", "20", "--out-dir", str(out)])
    assert code == 0, err
    assert (out / "manifest.json").exists()
