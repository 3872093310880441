"""Smoke test for the diophant_py extension.

Build and run from the repository root:

    cargo build --release -p diophant-python --features extension-module
    cp target/release/libdiophant_py.so python/diophant_py.so
    python3 python/smoke_test.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import diophant_py as dp  # noqa: E402


def main():
    assert "cbrt2" in dp.gallery_names()

    seq = dp.enumerate("cbrt:2", 10_000, workers=2)
    assert len(seq) > 10 and seq.t_reached == 10_000
    first = seq.records()[0]
    assert first.nu == 1
    hat, lp = seq.exponents()
    assert 1.5 < hat < 2.5, hat
    verdict = json.loads(seq.verdict_json())
    assert verdict["consistent_with_theorem"]
    report = json.loads(seq.analyze_json())
    assert report["independent_after_burn_in"] >= 2

    recs = dp.quadratic_approximants("cbrt:2", 100)
    assert recs[-1].gamma >= 2.0
    assert all(a.dist > b.dist for a, b in zip(recs, recs[1:]))
    try:
        dp.quadratic_approximants("poly:[-2,0,1]@1", 10)
    except dp.HypothesisViolated as e:
        assert "hypothesis violated" in str(e)
    else:
        raise AssertionError("sqrt(2) accepted")

    trace = json.loads(dp.ledger_trace_json("5/2", "9/2", "6"))
    assert trace["fixed_point"] == "3" and trace["contradiction_at"] == 3
    assert dp.lp_floor("2") == "3"

    try:
        dp.enumerate("nonsense", 10)
    except ValueError:
        pass
    else:
        raise AssertionError("bad theta accepted")

    print(f"ok: {len(seq)} minimal points, omega_hat ~ {hat:.3f}, omega_lp ~ {lp:.3f}, "
          f"{len(recs)} quadratic records")


if __name__ == "__main__":
    main()
