"""Smoke test for the superstable_py extension module.

Build the module first, e.g.

    cargo build --release -p superstable-py
    cp target/release/libsuperstable_py.so python/superstable_py.so

then run ``python3 python/smoke_test.py``.
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import superstable_py as ss  # noqa: E402

IDEAL_PLAN = """
name = "ideal"
seed = 11
[potential]
kind = "ideal"
[omega]
rho = 1.0
[box]
sizes = [2.0, 4.0, 8.0]
[gcmc]
moves = 4000
anchor_samples = 1000
[bounds]
field_samples = 50
c_delta_cubes = 20
samples_per_cube = 2
grid_resolution = 2
audit_trials = 20
"""

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def check(label, ok):
    print(f"{label}: {'ok' if ok else 'FAILED'}")
    if not ok:
        sys.exit(1)


def main():
    pot = ss.Potential.default(1)
    env = ss.Envelope.default(1)
    check("potential kind", pot.kind == "core-plus-tail")
    plus, minus = pot.split_signs(2.0)
    check("split signs", plus - minus == pot.evaluate(2.0))

    unit = ss.Envelope.power_law(1, 1.0, 1.0, 1.0, 1.0)
    check("V(2) = 1", abs(unit.big_v(2.0) - 1.0) < 1e-12)
    check("W(1) = 8/3", abs(unit.big_w(1.0, 0.25) - 8.0 / 3.0) < 1e-12)

    xi, beta_p = ss.tonks_reference(4.0, 1.0, 0.5)
    check("tonks oracle", abs(xi - 4.2943) < 5e-5 and abs(beta_p - math.log(xi) / 4.0) < 1e-12)

    rods = ss.Potential.hard_rod(1, 1.0)
    s = ss.xi_truncated(rods, ss.Envelope.compact_rod(1), 2.0, 0.5, mc_samples=100000, seed=3)
    check("series vs oracle", abs(s.log_xi - math.log(xi)) < 3 * s.stat_error + 1e-12)

    ideal = ss.Potential.ideal(1)
    run = ss.gcmc(ideal, ss.Envelope.compact_rod(1), 2.0, 0.5, moves=200000, seed=5)
    check("ideal <N>", abs(run.mean_n - 2.0) < 4 * run.mean_n_error)

    check("gate", ss.gate(1.0, 0.25) and not ss.gate(1.0, 0.5))
    check("probe g=0", all(v == "tending-to-zero" for _, _, _, v in ss.probe(env, 0.0)))

    ok, checks = ss.audit(pot, env, 200, 1)
    check("audit", ok and len(checks) > 0)

    plan = ss.Plan.load(os.path.join(ROOT, "crates", "core", "plans", "tonks.toml"))
    check("plan round trip", ss.Plan.parse(plan.to_toml()).to_toml() == plan.to_toml())

    ideal_plan = ss.Plan.parse(IDEAL_PLAN)
    with tempfile.TemporaryDirectory() as out:
        summary = ideal_plan.run(out=out)
        check("ideal sweep", summary.verdict == "converging" and all(r[5] == 0.0 for r in summary.rows))
        check("sweep artifacts", os.path.exists(os.path.join(out, "ideal", "table.csv")))
    print("smoke test passed")


if __name__ == "__main__":
    main()
