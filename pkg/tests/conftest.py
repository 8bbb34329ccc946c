import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion tracked in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not rep.failed:
        return
    num, title = mark.args
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    prev = _OUTCOMES.get(num)
    ok = rep.passed and (prev is None or prev[1])
    if rep.failed and not detail:
        detail = str(rep.longrepr).strip().splitlines()[-1][:160]
    _OUTCOMES[num] = (title, ok, detail if not ok or prev is None else prev[2] or detail)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_OUTCOMES):
        title, ok, detail = _OUTCOMES[num]
        line = f"{'PASS' if ok else 'FAIL'} criterion {num:>2}: {title}"
        if detail:
            line += f" [{detail}]"
        terminalreporter.write_line(line)
