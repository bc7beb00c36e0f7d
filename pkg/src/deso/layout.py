"""Block layouts of the stacked data matrix and the observer gain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from deso.errors import DimensionError


@dataclass(frozen=True)
class StackLayout:
    """Row layout of [Xp; Up; Yp; Yf], which is also the column layout of the gain."""

    states: int
    inputs: int
    outputs: int

    def __post_init__(self) -> None:
        if self.states < 1:
            raise DimensionError("layout needs at least one state")
        if self.inputs < 0 or self.outputs < 0:
            raise DimensionError("input and output counts cannot be negative")

    @property
    def height(self) -> int:
        return self.states + self.inputs + 2 * self.outputs

    @property
    def xp(self) -> slice:
        return slice(0, self.states)

    @property
    def up(self) -> slice:
        return slice(self.states, self.states + self.inputs)

    @property
    def yp(self) -> slice:
        start = self.states + self.inputs
        return slice(start, start + self.outputs)

    @property
    def yf(self) -> slice:
        start = self.states + self.inputs + self.outputs
        return slice(start, start + self.outputs)

    def split_columns(self, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Partition a gain row block into its (n, m, p, p) column blocks."""

        if sigma.shape != (self.states, self.height):
            raise DimensionError(
                f"gain must have shape {(self.states, self.height)}, got {sigma.shape}"
            )
        return sigma[:, self.xp], sigma[:, self.up], sigma[:, self.yp], sigma[:, self.yf]

    def stack(self, xp: np.ndarray, up: np.ndarray, yp: np.ndarray, yf: np.ndarray) -> np.ndarray:
        """Stack row blocks in canonical order after checking their heights."""

        expected = (self.states, self.inputs, self.outputs, self.outputs)
        blocks = (xp, up, yp, yf)
        for label, block, rows in zip(("Xp", "Up", "Yp", "Yf"), blocks, expected):
            if block.shape[0] != rows:
                raise DimensionError(f"{label} must have {rows} rows, got {block.shape[0]}")
        return np.vstack(blocks)


def split_state(vector: np.ndarray, first: int) -> tuple[np.ndarray, np.ndarray]:
    """Split a state vector (or row-stacked trajectory) after `first` coordinates."""

    return vector[..., :first], vector[..., first:]


__all__ = ["StackLayout", "split_state"]
