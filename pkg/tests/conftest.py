"""Per-criterion PASS/FAIL summary for the acceptance suite.

Acceptance tests carry ``@pytest.mark.criterion(n)``. A criterion passes when
every test tagged with it passed (an expected failure counts as FAIL) and the
summed setup and call time stays inside its budget.
"""

from collections import defaultdict

import pytest

# number -> (description, runtime budget in seconds)
CRITERIA = {
    1: ("balanced decision table reproduces exactly", 1),
    2: ("imbalanced decision table reproduces exactly", 1),
    3: ("metric/EC identities on 1000 random confusions", 5),
    4: ("PSR minimization on a K=3 simplex grid", 30),
    5: ("calibration gradient and local optimality", 10),
    6: ("mc2 recovery and temperature-only gaps, K=10", 120),
    7: ("ECE misses a prior-mismatch calibration problem", 60),
    8: ("abstention monotonicity on the binary suite", 60),
    9: ("threshold-sweep calibration gap", 30),
    10: ("Bayes EC bounded by min(EER, P1, P2)", 60),
    11: ("AUC equals the pairwise rank statistic", 10),
    12: ("CLI golden files and byte stability", 5),
}

_outcomes = defaultdict(list)
_durations = defaultdict(float)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def _criterion(item):
    m = item.get_closest_marker("criterion")
    return m.args[0] if m else None


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    n = _criterion(item)
    if n is None:
        return
    if rep.when in ("setup", "call"):
        _durations[n] += rep.duration
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        ok = rep.passed and not hasattr(rep, "wasxfail")
        _outcomes[n].append((item.name, ok))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, (desc, budget) in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            tr.write_line(f"SKIP criterion {n:2d}: {desc} (not run)")
            continue
        secs = _durations[n]
        ok = all(r for _, r in results) and secs <= budget
        failed = [name for name, r in results if not r]
        extra = f"; failing: {', '.join(failed)}" if failed else ""
        if secs > budget:
            extra += "; over budget"
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {desc} "
                      f"({secs:.2f} s of {budget} s{extra})")
