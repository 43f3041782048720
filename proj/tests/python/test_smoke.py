import math

import numpy as np
import pytest

import lorentz_lab as ll


def test_geometry():
    assert ll.reflect((1, 0, 0), (-1, 0, 0)) == pytest.approx((-1, 0, 0))
    t, n = ll.first_sphere_hit((0, 0, 0), (1, 0, 0), (5, 0, 0), 1.0, 10.0)
    assert t == pytest.approx(4.0)
    assert n == pytest.approx((-1, 0, 0))
    assert ll.first_sphere_hit((0, 0, 0), (1, 0, 0), (5, 3, 0), 1.0, 10.0) is None
    assert ll.angle((1, 0, 0), (0, 1, 0)) == pytest.approx(math.pi / 2)


def test_trajectories_share_the_stream():
    tr = ll.trajectories(0.02, 20.0, seed=7, stream=3)
    for key in ("Y", "Z", "X"):
        assert tr[key]["x"].shape[1] == 3
        assert tr[key]["t"][0] == 0.0
        assert np.all(np.diff(tr[key]["t"]) >= 0)
    # X follows Y until its first mismatch
    y, x = tr["Y"], tr["X"]
    stop = tr["first_mismatch"] if tr["first_mismatch"] is not None else 20.0
    grid = np.linspace(0.0, stop, 50, endpoint=False)
    py = np.stack([np.interp(grid, y["t"], y["x"][:, i]) for i in range(3)], axis=1)
    px = np.stack([np.interp(grid, x["t"], x["x"][:, i]) for i in range(3)], axis=1)
    assert np.max(np.abs(py - px)) < 1e-9
    again = ll.trajectories(0.02, 20.0, seed=7, stream=3)
    assert np.array_equal(again["X"]["x"], x["x"])


def test_event_probability():
    e = ll.event_probability("eta", 0.02, 20000, seed=1)
    assert 0.0 < e["estimate"] < 0.2
    assert e["lo"] <= e["estimate"] <= e["hi"]
    with pytest.raises(ValueError):
        ll.event_probability("nonsense", 0.02, 100)


def test_middle_samples():
    m = ll.middle_samples(0.05, 20000, seed=3)
    assert m["tilde"] == len(m["beta_over_r"])
    assert m["hat"] > 0


def test_smoke_suite(tmp_path):
    assert "smoke" in ll.suite_names()
    res = ll.run_suite({"experiment": "smoke", "r": 0.05, "trials": 50, "out": str(tmp_path)})
    assert res["pass"]
    assert "exploration_trace" in res["tables"]
    ll.write_table(res["tables"]["eta"], tmp_path / "eta.csv")
    assert (tmp_path / "eta.csv").read_text().startswith("# schema=1\n")
    with pytest.raises(ValueError):
        ll.run_suite({"experiment": "smoke", "r": 0.7})
    with pytest.raises(ValueError):
        ll.run_suite({"bogus": 1})
