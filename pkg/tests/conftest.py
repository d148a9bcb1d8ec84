import numpy as np
import pytest

from haydys import lattice as lat
from haydys.linops import LinearizedOperator
from haydys.monopole import bps_seed


@pytest.fixture(scope="session")
def small_grid():
    return lat.Grid.from_radius(11, 3.0)


@pytest.fixture(scope="session")
def small_seed(small_grid):
    return bps_seed(small_grid)


@pytest.fixture(scope="session")
def small_op(small_seed):
    return LinearizedOperator(small_seed)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# criterion number -> list of (label, passed, detail) recorded by test_acceptance
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}
ACCEPTANCE_TITLES = {
    1: "algebraic identities",
    2: "discretisation convergence",
    3: "charge-1 spectrum",
    4: "non-Bogomolny solutions",
    5: "field moment maps",
    6: "asymptotics",
}


@pytest.fixture
def record():
    def _record(criterion: int, label: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k, title in ACCEPTANCE_TITLES.items():
        rows = ACCEPTANCE.get(k)
        if not rows:
            tr.write_line(f"CRITERION {k} NOT RUN  {title}")
            continue
        ok = all(p for _, p, _ in rows)
        detail = "; ".join(f"{label}: {d}{'' if p else ' [fail]'}" for label, p, d in rows)
        tr.write_line(f"CRITERION {k} {'PASS' if ok else 'FAIL'}  {title}  |  {detail}")
