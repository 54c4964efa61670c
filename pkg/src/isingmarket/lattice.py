"""Spin storage on a periodic square lattice with O(1) magnetization bookkeeping."""

import numpy as np

PER_SITE = "per_site"
TOTAL = "total"
NORMALIZATION_MODES = (PER_SITE, TOTAL)


def neighbor_indices(site: int, side: int) -> tuple[int, int, int, int]:
    """Return the (up, down, left, right) torus neighbors of a flat site index.

    Sites are row-major on a side x side lattice with periodic boundaries.
    On side=2 the wrap makes opposite directions coincide; duplicates are
    kept so every site has coordination number 4.
    """
    n = side * side
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for side {side}")
    r, c = divmod(site, side)
    return (
        ((r - 1) % side) * side + c,
        ((r + 1) % side) * side + c,
        r * side + (c - 1) % side,
        r * side + (c + 1) % side,
    )


def neighbor_table(side: int) -> np.ndarray:
    """(N, 4) int32 table of torus neighbors for every site, row-major."""
    n = side * side
    table = np.empty((n, 4), dtype=np.int32)
    for i in range(n):
        table[i] = neighbor_indices(i, side)
    return table


class SpinGrid:
    """One stock's side x side lattice of +-1 spins.

    The running total of all spins is maintained incrementally so the
    magnetization is O(1) to read; it always equals a full recount.
    """

    def __init__(self, spins, side: int):
        spins = np.asarray(spins, dtype=np.int8)
        if side < 2:
            raise ValueError(f"side must be >= 2, got {side}")
        if spins.shape != (side * side,):
            raise ValueError(f"expected {side * side} spins, got shape {spins.shape}")
        if not np.all(np.abs(spins) == 1):
            raise ValueError("spins must all be -1 or +1")
        self.side = side
        self.spins = spins
        self._sum = int(spins.sum())

    @classmethod
    def from_random(cls, side: int, rng: np.random.Generator) -> "SpinGrid":
        """i.i.d. uniform +-1 spins; consumes side*side int draws from rng."""
        spins = rng.integers(0, 2, size=side * side, dtype=np.int64) * 2 - 1
        return cls(spins.astype(np.int8), side)

    @classmethod
    def filled(cls, side: int, value: int) -> "SpinGrid":
        if value not in (-1, 1):
            raise ValueError("fill value must be -1 or +1")
        return cls(np.full(side * side, value, dtype=np.int8), side)

    @property
    def n_sites(self) -> int:
        return self.side * self.side

    @property
    def sum_spins(self) -> int:
        return self._sum

    def spin(self, site: int) -> int:
        return int(self.spins[site])

    def set_spin(self, site: int, value: int) -> None:
        """Set one spin, adjusting the running sum by (value - old)."""
        if not 0 <= site < self.n_sites:
            raise ValueError(f"site {site} out of range")
        if value not in (-1, 1):
            raise ValueError("spin value must be -1 or +1")
        old = int(self.spins[site])
        if value != old:
            self.spins[site] = value
            self._sum += value - old

    def magnetization(self, mode: str = PER_SITE) -> float:
        """Buy/sell imbalance: the spin sum, divided by N in per-site mode."""
        if mode == PER_SITE:
            return self._sum / self.n_sites
        if mode == TOTAL:
            return float(self._sum)
        raise ValueError(f"unknown normalization mode {mode!r}")

    def recount(self) -> int:
        """Full O(N) recount of the spin sum (oracle for the running total)."""
        return int(self.spins.sum())

    def copy(self) -> "SpinGrid":
        return SpinGrid(self.spins.copy(), self.side)
