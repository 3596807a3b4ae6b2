import functools

import pytest

from spreadforge.classify import characteristic_census, classify_spreads
from spreadforge.exactcover import enumerate_special_spreads
from spreadforge.spreads import SpecialSpread, construct_special_spread


@functools.lru_cache(maxsize=None)
def all_spreads(q: int) -> tuple:
    return tuple(enumerate_special_spreads(q, "full"))


@functools.lru_cache(maxsize=None)
def spread_classes(q: int) -> tuple:
    return tuple(classify_spreads(q, all_spreads(q)))


@functools.lru_cache(maxsize=None)
def constructed(q: int):
    return construct_special_spread(q)


@functools.lru_cache(maxsize=None)
def census(q: int) -> dict:
    return characteristic_census(q)


def class_spread(q: int, stabilizer_order: int) -> SpecialSpread:
    for c in spread_classes(q):
        if c["stabilizer_order"] == stabilizer_order:
            return SpecialSpread.from_pairs(q, c["representative"])
    raise LookupError(stabilizer_order)


# -- per-criterion summary for the acceptance suite --------------------------------

_criteria: dict[int, list] = {}
_titles: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            n = m.args[0]
            _titles.setdefault(n, m.args[1] if len(m.args) > 1 else "")
            _criteria.setdefault(n, [])
            item.user_properties.append(("criterion", n))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _criteria[crit].append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not any(_criteria.values()):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        results = _criteria[n]
        if not results:
            continue
        ok = all(outcome == "passed" for _, outcome in results)
        failed = [name for name, outcome in results if outcome != "passed"]
        line = f"criterion {n:>2} {'PASS' if ok else 'FAIL'}: {_titles[n]}"
        if failed:
            line += f"  (failing: {', '.join(failed)})"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(20240607)
