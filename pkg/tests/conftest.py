import re
from collections import defaultdict

ACCEPTANCE_FILE = "test_acceptance.py"
CRITERIA = {
    1: "closed-form MI values",
    2: "published BNP averages and MSEs",
    3: "midhinge of MI_pos+ has the smallest MSE",
    4: "prior robustness at a=0.05, drift at a=10",
    5: "k=3 beats k=15 and k=20",
    6: "BNP MSE below plain kNN MSE at d=4",
    7: "estimator-core properties",
    8: "CCPP real-data estimates",
    9: "jitter-scale insensitivity",
}

_outcomes = defaultdict(list)


def pytest_runtest_logreport(report):
    if ACCEPTANCE_FILE not in report.nodeid:
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        details = [v for k, v in report.user_properties if k == "measured"]
        _outcomes[int(m.group(1))].append((report.outcome, details))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num, title in CRITERIA.items():
        results = _outcomes.get(num)
        if not results:
            continue
        states = {outcome for outcome, _ in results}
        if "failed" in states:
            verdict = "FAIL"
        elif states == {"skipped"}:
            verdict = "SKIP"
        else:
            verdict = "PASS"
        tr.write_line(f"criterion {num}: {verdict}  {title}")
        for _, details in results:
            for line in details:
                tr.write_line(f"    {line}")
