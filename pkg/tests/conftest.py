import pytest

from rcpsp_2pga.psplib_io import load_instance, shipped_instances
from rcpsp_2pga.scheduling import ProjectInstance


def make_t1() -> ProjectInstance:
    # N=3, one resource of capacity 2; activity 3 follows activity 1
    return ProjectInstance.from_real_activities(
        durations=[2, 3, 2],
        requirements=[[1], [1], [2]],
        capacities=[2],
        predecessors={3: [1]},
        name="T1",
    )


def make_chain(durations, capacity=10) -> ProjectInstance:
    n = len(durations)
    return ProjectInstance.from_real_activities(
        durations=durations,
        requirements=[[1]] * n,
        capacities=[capacity],
        predecessors={j: [j - 1] for j in range(2, n + 1)},
        name="chain",
    )


def make_independent(n, duration=1, requirement=1, capacity=1) -> ProjectInstance:
    return ProjectInstance.from_real_activities(
        durations=[duration] * n,
        requirements=[[requirement]] * n,
        capacities=[capacity],
        name="independent",
    )


@pytest.fixture
def t1() -> ProjectInstance:
    return make_t1()


@pytest.fixture(scope="session")
def j30() -> list[ProjectInstance]:
    return [load_instance(p) for p in shipped_instances("j30")]


@pytest.fixture(scope="session")
def all_shipped() -> list[ProjectInstance]:
    return [load_instance(p) for ds in ("j30", "j60", "j120") for p in shipped_instances(ds)]
