import pytest

from chronovec.corpus import NgramRecord, PeriodizedCorpus, PeriodSpec

# criterion number -> (title, [outcomes], [details])
_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, (title, [], []))
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry[1].append(rep.passed)
        entry[2].extend(str(v) for k, v in rep.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, results, details = _CRITERIA[number]
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}: {status}  {title} ({sum(results)}/{len(results)} checks)")
        for d in details:
            terminalreporter.write_line(f"      {d}")


@pytest.fixture
def tiny_corpus():
    """Two periods of hand-written 5-grams."""
    recs = [
        NgramRecord(("the", "cat", "sat", "on", "mat"), 2000, 3),
        NgramRecord(("a", "dog", "sat", "on", "rug"), 2000, 2),
        NgramRecord(("the", "cat", "ran", "to", "dog"), 2000, 1),
        NgramRecord(("the", "dog", "sat", "on", "mat"), 2001, 4),
        NgramRecord(("a", "cat", "ran", "on", "rug"), 2001, 1),
        NgramRecord(("the", "cat", "sat", None, "mat"), 2001, 2),
    ]
    return PeriodizedCorpus.from_records(recs, PeriodSpec(2000, 2002))
