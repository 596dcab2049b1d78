import pytest

from katomic import History, read, write

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make(*ops, key=""):
    return History(tuple(ops), key)


@pytest.fixture
def HA():
    return make(write("w", "a", 0, 2), read("r", "a", 4, 6))


@pytest.fixture
def HB():
    return make(write("w1", "a", 0, 2), write("w2", "b", 4, 6), read("r1", "a", 8, 10))


@pytest.fixture
def HC():
    return make(
        write("w1", "a", 0, 2),
        write("w2", "b", 4, 6),
        write("w3", "c", 8, 10),
        read("r1", "a", 12, 14),
    )


def fig3_history() -> History:
    """Zone layout with three chunks and three dangling backward clusters.

    Chunk 1: FZ1 [10,20] holding BZ1. Chunk 2: chain FZ2 [40,60], FZ3 [50,70],
    FZ4 [65,80] holding BZ3 and BZ4. Chunk 3: FZ5 [100,130] containing the low
    ends of FZ6 [105,120] and FZ7 [125,140], then FZ8 [135,150], holding BZ6.
    BZ2 and BZ7 sit between chunks; BZ5 straddles chunk 2's right edge.
    """
    return make(
        write("fz1", "F1", 1, 10), read("fz1r", "F1", 20, 22),
        write("bz1", "B1", 12, 18),
        write("bz2", "B2", 24, 30),
        write("fz2", "F2", 35, 40), read("fz2r", "F2", 60, 61),
        write("fz3", "F3", 45, 50), read("fz3r", "F3", 70, 71),
        write("fz4", "F4", 63, 65), read("fz4r", "F4", 80, 81),
        write("bz3", "B3", 42, 44),
        write("bz4", "B4", 72, 76),
        write("bz5", "B5", 78, 90),
        write("fz5", "F5", 95, 100), read("fz5r", "F5", 130, 131),
        write("fz6", "F6", 102, 105), read("fz6r", "F6", 120, 121),
        write("fz7", "F7", 110, 125), read("fz7r", "F7", 140, 141),
        write("fz8", "F8", 132, 135), read("fz8r", "F8", 150, 151),
        write("bz6", "B6", 142, 146),
        write("bz7", "B7", 160, 170),
        key="fig3",
    )


@pytest.fixture
def fig3():
    return fig3_history()
