#!/usr/bin/env python3
"""Smoke test for the double_trine_py extension module.

Build the extension first (`cargo build -p double-trine-py`, or `--release`),
then run `python3 python/smoke_test.py`.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def load_module():
    root = Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        built = root / "target" / profile / "libdouble_trine_py.so"
        if built.exists():
            stage = Path(tempfile.mkdtemp(prefix="double_trine_py_"))
            shutil.copy(built, stage / "double_trine_py.so")
            sys.path.insert(0, str(stage))
            import double_trine_py

            return double_trine_py
    sys.exit("extension not built; run `cargo build -p double-trine-py` first")


def approx(a, b, tol=1e-12):
    assert abs(a - b) < tol, f"{a} vs {b}"


def main():
    dt = load_module()

    ensemble = dt.Ensemble.double_trine()
    assert ensemble.dim == 4 and len(ensemble) == 3
    approx(sum(ensemble.priors()), 1.0)

    # the entangled basis and the six-outcome unentangled POVM extract the
    # same information, and it matches the closed form
    entangled = dt.Povm.entangled_basis()
    six = dt.Povm.six_outcome()
    optimum = dt.optimum_mi()
    approx(dt.mutual_information_bits(ensemble, entangled), optimum)
    approx(dt.mutual_information_bits(ensemble, six), optimum)
    assert abs(optimum - 1.369) < 5e-4
    assert six.classification() == "unentangled"
    assert entangled.classification() == "entangled"

    # product and local baselines
    nine = dt.Povm.nine_outcome_product()
    approx(dt.mutual_information_bits(ensemble, nine), math.log2(3) - 0.5)
    trine = dt.Ensemble.trine()
    local = dt.Povm.single_qubit_trine()
    approx(dt.mutual_information_bits(trine, local), math.log2(3) - 1.0)

    # conditionals for the entangled basis: hit 0.971..., misses equal
    rows = dt.conditional_probabilities(ensemble, entangled)
    approx(rows[0][0], 0.5 + math.sqrt(2) / 3)
    approx(rows[0][1], rows[0][2])

    # the six-outcome family is only complete at alpha = 2/3, cos 2θ = 0
    try:
        dt.Povm.six_outcome_family(math.radians(60), 4 / 9)
    except ValueError as e:
        assert "defect" in str(e) or "complete" in str(e).lower(), e
    else:
        sys.exit("incomplete family unexpectedly accepted")

    # JSON round-trip is byte-identical on re-emit
    text = six.to_json()
    assert dt.Povm.from_json(text).to_json() == text

    # concurrence: singlet maximal, product state zero
    s = 1 / math.sqrt(2)
    approx(dt.concurrence([0, s, -s, 0]), 1.0, 1e-9)
    approx(dt.concurrence([1, 0, 0, 0]), 0.0, 1e-9)

    # protocol evaluation is exact
    joint, labels, mi = dt.Protocol.trine_both().run(ensemble)
    approx(mi, math.log2(3) - 0.5)
    assert len(labels) == 9
    approx(sum(sum(row) for row in joint), 1.0, 1e-10)

    # small deterministic optimizer run stays within the information bound
    mi, povm, classification = dt.optimize_povm(
        ensemble, "global", 4, restarts=2, iters=100, seed=3
    )
    assert 0.0 <= mi <= math.log2(3) + 1e-9
    assert dt.Povm.from_json(povm.to_json()).dim == 4
    assert classification in ("unentangled", "entangled", "indeterminate")

    protocol, mi = dt.optimize_one_way(ensemble, budget=40, seed=3)
    assert 0.0 <= mi < optimum
    assert dt.Protocol.from_json(protocol.to_json()).run(ensemble)[2] == mi

    print("smoke test passed")


if __name__ == "__main__":
    main()
