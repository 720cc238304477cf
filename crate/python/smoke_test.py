#!/usr/bin/env python3
"""Smoke test for the tropbundle_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/, stages
it under the importable name, and drives the bindings through the worked
examples (tangent bundle on the plane, the three tropicalizations with
h0 = 11, and the Vamos Harder-Narasimhan chain).

Run after `cargo build -p tropbundle-py --release`:

    python3 python/smoke_test.py
"""

import json
import pathlib
import shutil
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def stage_module() -> pathlib.Path:
    candidates = [
        ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libtropbundle_py.so", "libtropbundle_py.dylib", "tropbundle_py.dll")
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        sys.exit("build the extension first: cargo build -p tropbundle-py --release")
    stage = pathlib.Path(tempfile.mkdtemp(prefix="tropbundle-py-"))
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(built, stage / f"tropbundle_py{suffix}")
    # abi3 builds also import fine under the bare suffix
    shutil.copy2(built, stage / "tropbundle_py.so")
    return stage


sys.path.insert(0, str(stage_module()))

import tropbundle_py as tb  # noqa: E402

FIXTURES = ROOT / "crates" / "core" / "tests" / "fixtures"


def load(name: str) -> "tb.Bundle":
    return tb.Bundle.from_json((FIXTURES / f"{name}.json").read_text())


def check(label: str, got, want) -> None:
    if got != want:
        sys.exit(f"FAIL {label}: got {got!r}, want {want!r}")
    print(f"ok {label}: {got!r}")


# Matroid basics.
m = tb.Matroid.from_columns(
    ["e1", "e2", "e1+e3", "e3"],
    [["1", "0", "0"], ["0", "1", "0"], ["1", "0", "1"], ["0", "0", "1"]],
)
check("matroid rank", m.rank_total(), 3)
check("closure", m.closure(["e1", "e3"]), ["e1", "e1+e3", "e3"])
check("components", m.connected_components(), [["e1", "e1+e3", "e3"], ["e2"]])

# Tangent bundle on the plane.
tangent = load("tangent_p2")
check("tangent slope", tangent.slope(), "3/2")
check("tangent stable", tangent.is_stable(), True)
check("tangent certifies", tangent.certify(), True)
check("tangent chern", tangent.chern(), [1, 1, 1])
check(
    "tangent fiber circuit at (0, inf, 1)",
    tangent.fiber_circuits(["0", "inf", "1"]),
    [["0", "inf", "1"]],
)

# The three tropicalizations agree on h0 = 11.
for name in ("m1_p2", "m2_p2", "m3_p2"):
    check(f"h0 of {name}", load(name).h0(), 11)

# Stability depends on the tropicalization.
check("m1 stable", load("m1_p2").is_stable(), True)
check("m2 semistable", load("m2_p2").is_semistable(), False)

# Vamos: slope 1, Harder-Narasimhan flats and slopes.
vamos = load("vamos_a2")
check("vamos slope", vamos.slope(), "1")
hn = vamos.harder_narasimhan()
check("vamos hn flats", [flat for flat, _ in hn],
      [["1", "2", "3", "4"], ["1", "2", "3", "4", "5", "6", "7", "8"]])
check("vamos hn slopes", [s for _, s in hn], ["4/3", "0"])

# Splitting on the line.
split = load("split_p1")
check("split decomposes", len(split.decompose()), 3)
check("split partially modular", split.is_partially_modular(), True)
check("split minimal", split.is_tropically_minimal(), True)

# The singular-surface sheaf is not a vector bundle.
check("singular sheaf certifies", load("singular_surface").certify(), False)

# Lattice embedding of the running subspace example gives U(3,4).
report = json.loads(tb.embed_lattice((FIXTURES / "tricky_subspaces.json").read_text()))
check("embedded rank", report["rank"], 3)
check("embedded bases", len(report["bases"]), 4)

# Valuated axiom checker on a document.
ok, failures = tb.check_valuated_axioms(json.dumps({
    "ground": ["1", "2", "3"],
    "rank": 2,
    "nu": [{"set": ["1", "2"], "value": "0"},
           {"set": ["1", "3"], "value": "0"},
           {"set": ["2", "3"], "value": "1/2"}],
}))
check("axiom check", ok, True)

print("smoke test passed")
