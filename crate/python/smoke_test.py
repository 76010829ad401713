"""Smoke test for the radial_conformal extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
then run:
    python3 python/smoke_test.py
"""

import json
import math
import os
import tempfile

import radial_conformal as rc


def close(a, b, rel):
    return abs(a / b - 1.0) < rel


def main():
    grid = rc.Grid(points=2000, r_max=1e4, stretch=1.01)
    assert len(grid) == 2000 and grid.nodes[0] == 0.0

    sch = rc.smooth_schwarzschild(1.0, n=3, grid=grid)
    mass = sch.mass()
    assert close(mass["mass_standard"], -1.0, 1e-2), mass["mass_standard"]
    decay = sch.decay()
    assert abs(decay["tau_exponent"] - 1.5) < 0.05, decay["tau_exponent"]
    check = sch.check()
    assert not check["failures"], check["failures"]
    assert min(sch.monotonicity()) >= 0.0
    tail = sch.tail_limit(3.0 / math.sqrt(2.0), 1.5)
    assert close(tail["measured"], 0.5, 1e-2), tail

    sol, trace = rc.free_tau(1.0, 1.5, grid=grid)
    assert trace["converged"], trace
    assert close(sol.mass()["mass_standard"], -2.0 / 9.0, 2e-2)
    diverging, _ = rc.free_tau(1.0, 1.3, grid=grid)
    assert diverging.mass()["mass_standard"] is None

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "s.csv")
        sch.write_csv(path)
        back = rc.Solution.read_csv(path, n=3)
        assert max(abs(a - b) for a, b in zip(back.phi, sch.phi)) == 0.0
        code, report = rc.scenario("verify", profiles=path)
        assert code == 0, report
        assert json.loads(report)["checks"]["passed"]

    try:
        rc.smooth_schwarzschild(0.0)
    except ValueError:
        pass
    else:
        raise AssertionError("m = 0 must be rejected")

    print("smoke test ok")


if __name__ == "__main__":
    main()
