import numpy as np
import pytest

from conseqopt.core import ActionLibrary, Dataset, Environment, ObjectiveSpec


def make_env(costs=None, success=None, features=(0.0,), env_id="e"):
    return Environment(env_id, np.asarray(features, dtype=float), costs, success)


def make_dataset(cost_rows=None, success_rows=None, features=None, objective=None):
    rows = cost_rows if cost_rows is not None else success_rows
    n, V = len(rows), len(rows[0])
    if features is None:
        features = np.eye(n)
    envs = tuple(
        Environment(
            f"e{i}",
            features[i],
            None if cost_rows is None else cost_rows[i],
            None if success_rows is None else success_rows[i],
        )
        for i in range(n)
    )
    return Dataset(envs, ActionLibrary(V), objective)


@pytest.fixture
def bac10():
    return ObjectiveSpec.best_action_cost(10.0)


@pytest.fixture
def sat():
    return ObjectiveSpec.satisficing()


# acceptance criteria append (name, passed, detail) here; reported after the run
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
