import pytest

from completable import Slmf, parse_pattern

# 6x5 mask, 18 observed entries, generically finitely completable at rank 2
GRID_6X5 = """\
10011
10110
10001
11110
11011
01010
"""

# 6x6 extension, 24 entries, generically uniquely completable at rank 2
GRID_6X6 = """\
101111
101101
101010
111100
110111
010101
"""

# (2,6) linkage supports used throughout the tests (0-based rows)
PHI_A = Slmf(m=6, r=2, columns=((0, 1, 2), (0, 1, 3), (0, 1, 4), (3, 4, 5)))
PHI_B = Slmf(m=6, r=2, columns=((1, 3, 5), (0, 1, 3), (0, 1, 4), (0, 2, 4)))
PHI_C = Slmf(m=6, r=2, columns=((0, 1, 2), (0, 1, 3), (0, 1, 4), (0, 1, 5)))

REPEATED_COLUMNS = Slmf(
    m=6, r=2, columns=((0, 1, 2), (0, 1, 2), (0, 1, 2), (0, 1, 2))
)


@pytest.fixture
def pattern_6x5():
    return parse_pattern(GRID_6X5)


@pytest.fixture
def pattern_6x6():
    return parse_pattern(GRID_6X6)
