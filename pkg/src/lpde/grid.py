"""Regular periodic grids."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridSizeError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [0, length) with a power-of-two point count."""

    n_points: int
    length: float = 2.0 * np.pi

    def __post_init__(self):
        if self.n_points < 2 or not _is_power_of_two(self.n_points):
            raise GridSizeError(
                f"n_points must be a power of two >= 2, got {self.n_points}"
            )
        if not self.length > 0.0:
            raise GridSizeError(f"length must be positive, got {self.length}")

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """k_j = 2 pi j / length for the half-spectrum modes j = 0..n/2."""
        return 2.0 * np.pi * np.arange(self.n_points // 2 + 1) / self.length


@dataclass(frozen=True)
class Grid2D:
    """Square-capable doubly periodic grid; used for the 2D flow fields."""

    n_x: int
    n_y: int
    length_x: float = 2.0 * np.pi
    length_y: float = 2.0 * np.pi

    def __post_init__(self):
        for n in (self.n_x, self.n_y):
            if n < 2 or not _is_power_of_two(n):
                raise GridSizeError(f"grid sizes must be powers of two, got {n}")
        if not (self.length_x > 0.0 and self.length_y > 0.0):
            raise GridSizeError("domain lengths must be positive")

    @property
    def x_grid(self) -> Grid1D:
        return Grid1D(self.n_x, self.length_x)

    @property
    def y_grid(self) -> Grid1D:
        return Grid1D(self.n_y, self.length_y)
