"""Smoke test for the keypoly extension module.

Build first with `cargo build -p keypoly-python` (or `--release`), then run
`python3 python/smoke_test.py`. Set KEYPOLY_LIB to point at a specific build.
"""

import importlib.machinery
import importlib.util
import os
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SPECS = ROOT / "crates" / "core" / "specs"


def load_module():
    candidates = [os.environ.get("KEYPOLY_LIB")] if os.environ.get("KEYPOLY_LIB") else [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libkeypoly.so", "libkeypoly.dylib", "keypoly.dll")
    ]
    for path in map(Path, candidates):
        if path.is_file():
            loader = importlib.machinery.ExtensionFileLoader("keypoly", str(path))
            spec = importlib.util.spec_from_file_location("keypoly", path, loader=loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("keypoly extension not found; run `cargo build -p keypoly-python` first")


def main():
    kp = load_module()

    t = kp.Problem.load(str(SPECS / "ex46.toml")).run()
    assert t.verdict == "terminated", t.verdict
    assert t.exit_code == 0
    assert len(t.keys) == 6 and t.keys[0] == "z"
    mu1 = kp.Value("1 + 1/2*sqrt37", group="sqrt37")
    assert t.values[0] == mu1
    assert not t.values[-1].is_finite()
    assert t.orders == [2, 1, 2, 1, 1]
    assert t.invariants["delta"] == "1"
    assert '"steps"' in t.to_json()
    assert t.svg().lstrip().startswith("<")

    t = kp.Problem.load(str(SPECS / "sec9_p2.toml")).run(max_iter=3)
    assert t.exit_code == 3
    assert [str(v) for v in t.values] == ["1/2", "17/32", "273/512"], [str(v) for v in t.values]

    t = kp.Problem.load(str(SPECS / "ex72.toml")).run()
    assert t.exit_code == 4
    leaves = t.leaves()
    assert len(leaves) == 2
    assert sorted(l.invariants["s_tot"] for l in leaves) == ["3", "3/2"]

    t = kp.Problem.load(str(SPECS / "ex52.toml")).run()
    assert len(t.relations()) == 1

    try:
        kp.Problem.load(str(SPECS / "ex72.toml")).run(branch="first")
    except RuntimeError as e:
        assert "unique" in str(e).lower() or "segment" in str(e).lower(), e
    else:
        raise AssertionError("branch='first' should refuse a choice")

    vals = [kp.Value(s) for s in ("0", "inf", "1", "3")]
    segs = kp.newton_polygon(vals)
    assert [(a, b, str(s)) for a, b, s in segs] == [(0, 1, "-2"), (1, 3, "-1/2")], segs
    assert kp.Value("1/2") + kp.Value("1/3") == kp.Value("5/6")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
