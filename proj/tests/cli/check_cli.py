"""Reproducibility and configuration checks for the lorentz_lab executable."""

import filecmp
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(exe, *args):
    return subprocess.run([exe, *args], capture_output=True, text=True)


def csvs(d):
    return sorted(p.name for p in Path(d).glob("*.csv"))


def same_outputs(a, b):
    names = csvs(a)
    assert names and names == csvs(b), (names, csvs(b))
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert not mismatch and not errors, (mismatch, errors)


def main(exe):
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        base = ["--experiment", "smoke", "--r", "0.05", "--trials", "100", "--seed", "99"]

        assert run(exe, *base, "--out", str(tmp / "a")).returncode == 0
        assert run(exe, *base, "--out", str(tmp / "b")).returncode == 0
        same_outputs(tmp / "a", tmp / "b")

        assert run(exe, *base, "--workers", "4", "--out", str(tmp / "w4")).returncode == 0
        same_outputs(tmp / "a", tmp / "w4")

        manifest = tmp / "a" / "manifest.json"
        m = json.loads(manifest.read_text())
        assert m["seed"] == 99 and m["experiment"] == "smoke" and m["seeds"]
        assert run(exe, "--config", str(manifest), "--out", str(tmp / "c")).returncode == 0
        same_outputs(tmp / "a", tmp / "c")

        summary = json.loads((tmp / "a" / "summary.json").read_text())
        assert summary["pass"] and summary["gates"]

        cfg = tmp / "cfg.json"
        cfg.write_text(json.dumps({"experiment": "smoke", "r": 0.05, "trials": 20}))
        assert run(exe, "--config", str(cfg), "--out", str(tmp / "d")).returncode == 0

        for bad in (["--r", "0.7"], ["--trials", "0"], ["--experiment", "nope"], ["--config", str(tmp / "missing.json")]):
            assert run(exe, *bad, "--out", str(tmp / "x")).returncode == 2, bad
        cfg.write_text(json.dumps({"experiment": "smoke", "radius": 0.05}))
        assert run(exe, "--config", str(cfg)).returncode == 2

        assert "slope-eta" in run(exe, "--help").stdout
    print("cli checks passed")


if __name__ == "__main__":
    main(sys.argv[1])
