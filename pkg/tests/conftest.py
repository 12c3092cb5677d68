import pytest

from rewarddesign.environments import chain, russell_norvig_grid

GAMMA = 0.95


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """Record one pass/fail line per acceptance criterion."""
    lines = request.config._acceptance_lines

    def _report(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {label}" + (f" -- {detail}" if detail else "")
        lines.append(line)
        print(line)
        return ok

    return _report


@pytest.fixture(scope="session")
def chain60():
    return chain(60, "two_feature")


@pytest.fixture(scope="session")
def grid():
    return russell_norvig_grid()


@pytest.fixture(scope="session")
def subgoal_const():
    return chain(60, "subgoals", constant=True)


@pytest.fixture(scope="session")
def subgoal_profile():
    return chain(60, "subgoals", constant=False)


@pytest.fixture(scope="session")
def dense60():
    return chain(60, "dense")


@pytest.fixture(scope="session")
def suite_envs(chain60, grid, subgoal_const, subgoal_profile, dense60):
    return {"chain60": chain60, "rn_grid": grid, "subgoal_const": subgoal_const,
            "subgoal_profile": subgoal_profile, "dense60": dense60}
