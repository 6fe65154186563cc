"""Acceptance suite: one PASS/FAIL line per criterion.

Each criterion runs its checks with a fixed seed, compares every measured
residual with its own tolerance and also enforces the runtime budget.
Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output capture is on).
"""

import time

import numpy as np
import pytest

from kahlerjet import suites


def _battery(rng):
    return suites.coefficient_battery(rng) + suites.model_battery(rng)


# criterion -> (title, runner, runtime budget in seconds)
CRITERIA = {
    1: ("printed coefficient battery", _battery, 60),
    2: ("Lie-group transport closed form", suites.lie_checks, 5),
    3: ("symmetric closed forms and matrix oracles", suites.symmetric_closed_form_checks, 120),
    4: ("model-zoo oracle coherence", suites.coherence_checks, 60),
    5: ("operator algebra and resolution", suites.operator_checks, 30),
    6: ("curvature-linear congruences", suites.congruence_checks, 60),
    7: ("Jacobi commutator and directional-derivative identities", suites.suite_symmetric, 30),
    8: ("extended fields and Spencer splitting", suites.suite_spencer, 30),
    9: ("curvature reconstruction round-trips", suites.reconstruction_checks, 10),
}


@pytest.mark.parametrize("criterion", sorted(CRITERIA))
def test_criterion(criterion, capsys):
    title, runner, budget = CRITERIA[criterion]
    t0 = time.perf_counter()
    checks = runner(np.random.default_rng([0, criterion]))
    elapsed = time.perf_counter() - t0
    assert checks, "criterion produced no checks"
    assert {c["criterion"] for c in checks} == {criterion}
    failed = [c for c in checks if not c["passed"]]
    # exact rank checks carry tol 0
    worst = max(checks, key=lambda c: c["measured"] / c["tol"] if c["tol"] else c["measured"])
    ok = not failed and elapsed <= budget
    line = (
        f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {title}: "
        f"{len(checks) - len(failed)}/{len(checks)} checks, "
        f"worst {worst['measured']:.2e} (tol {worst['tol']:.0e}, {worst['id']}), "
        f"{elapsed:.1f}s of {budget}s"
    )
    with capsys.disabled():
        print("\n" + line)
    for c in failed:
        print(f"  failed {c['id']}: {c['measured']:.3e} > {c['tol']:.1e}")
    assert not failed, line
    assert elapsed <= budget, line
