import numpy as np
import pytest
from hypothesis import strategies as st

from pcgrl.levels import Level, binary_alphabet, sokoban_alphabet, zelda_alphabet

ALPHAS = {"binary": binary_alphabet(), "zelda": zelda_alphabet(), "sokoban": sokoban_alphabet()}


def level_grids(n_tiles: int, min_side: int = 1, max_side: int = 6):
    """Hypothesis strategy for (h, w) int grids with tiles in [0, n_tiles)."""
    return st.tuples(
        st.integers(min_side, max_side), st.integers(min_side, max_side)
    ).flatmap(
        lambda hw: st.lists(
            st.integers(0, n_tiles - 1),
            min_size=hw[0] * hw[1],
            max_size=hw[0] * hw[1],
        ).map(lambda cells: np.asarray(cells, dtype=np.int16).reshape(hw))
    )


def levels_strategy(n_tiles: int, min_side: int = 1, max_side: int = 6):
    return level_grids(n_tiles, min_side, max_side).map(Level)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
