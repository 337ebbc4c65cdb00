import pytest

from tdsched.model import Activity, Problem, tighten_windows
from tdsched.pwl import PwlFunction


def make_e1(capacity=4):
    """Two activities; the first has a consumption spike early in its window.

    A1: window [0,4], duration 2, consumption 5 on [0,2) and 1 on [2,4].
    A2: window [2,6], duration 1, consumption 1.
    """
    a1 = Activity(
        earliest=0, latest=4,
        duration=PwlFunction.constant(2),
        consumption=PwlFunction.from_steps([(0, 5), (2, 1)], end=4),
    )
    a2 = Activity(
        earliest=2, latest=6,
        duration=PwlFunction.constant(1),
        consumption=PwlFunction.constant(1),
    )
    return tighten_windows(Problem((a1, a2), capacity=capacity, eps=1))


def make_e2(capacity=4, delta=2, mode1=None):
    """Two constant-consumption activities where a replenishment pays off.

    A1: window [0,4], duration 2, consumption 3. A2: window [2,8],
    duration 1, consumption 3. Replenishing costs `delta` time units.
    """
    d = PwlFunction.constant(delta)
    a1 = Activity(
        earliest=0, latest=4,
        duration=PwlFunction.constant(2),
        consumption=PwlFunction.constant(3),
        replenish_duration=d,
        mode=mode1,
    )
    a2 = Activity(
        earliest=2, latest=8,
        duration=PwlFunction.constant(1),
        consumption=PwlFunction.constant(3),
        replenish_duration=d,
    )
    return tighten_windows(Problem((a1, a2), capacity=capacity, eps=1))


@pytest.fixture
def e1():
    return make_e1()


@pytest.fixture
def e2():
    return make_e2()
