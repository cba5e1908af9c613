import logging

import numpy as np
import pytest

from netcontagion.graph import Cohort, Nomination, Participant, build_network


def person(pid, **kw):
    kw.setdefault("sex", "female")
    kw.setdefault("carriage_direct", "negative")
    kw.setdefault("carriage_enrichment", kw["carriage_direct"])
    return Participant(id=pid, **kw)


def cohort_of(n=None, ids=None, **columns):
    """Cohort with ``columns`` given as equal-length lists."""
    ids = ids or [f"p{k}" for k in range(n)]
    people = []
    for k, pid in enumerate(ids):
        people.append(person(pid, **{c: v[k] for c, v in columns.items()}))
    return Cohort(people)


def network_of(cohort, pairs, contexts=("physical",), layer="overall"):
    noms = [Nomination(a, b, frozenset(contexts)) for a, b in pairs]
    return build_network(cohort, noms, layer), noms


@pytest.fixture
def triangle():
    co = cohort_of(ids=["a", "b", "c"], spa_type=["t1", "t1", "t1"],
                   carriage_direct=["positive", "positive", "negative"])
    net, noms = network_of(co, [("a", "b"), ("b", "c"), ("c", "a")])
    return co, net, noms


@pytest.fixture(autouse=True)
def _quiet_logs(caplog):
    caplog.set_level(logging.ERROR, logger="netcontagion")


@pytest.fixture
def rs():
    return np.random.default_rng(20240601)


_VERDICTS = []


@pytest.fixture
def verdict(capsys):
    """Print one PASS/FAIL line past output capture, then assert."""
    def report(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        _VERDICTS.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
