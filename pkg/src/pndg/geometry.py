"""Uniform periodic Cartesian meshes of the unit square / unit interval."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InputError

# Local face numbering: face 2*a is the low side (normal -e_a), 2*a+1 the high side (+e_a).


@dataclass(frozen=True)
class PeriodicCartesianMesh:
    """Axis-aligned uniform partition of ``(0,1)^d`` with periodic wrap.

    Elements are numbered lexicographically with the *first* axis varying
    slowest, i.e. ``element = i0 * n1 + i1`` in 2D. Faces are numbered
    axis-major: all faces normal to axis 0 first, each identified with the
    element on its low side, then axis 1.
    """

    d: int
    cells_per_axis: tuple[int, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells_per_axis

    @property
    def h(self) -> np.ndarray:
        return 1.0 / np.asarray(self.cells_per_axis, dtype=float)

    @property
    def hmax(self) -> float:
        return float(np.max(self.h))

    @property
    def n_elements(self) -> int:
        return int(np.prod(self.cells_per_axis))

    @property
    def n_faces(self) -> int:
        return self.d * self.n_elements

    @property
    def element_volume(self) -> float:
        return float(np.prod(self.h))

    def face_measure(self, axis: int) -> float:
        """Length (2D) or unit point measure (1D) of a face normal to ``axis``."""
        return float(np.prod(np.delete(self.h, axis)))

    @cached_property
    def cell_index(self) -> np.ndarray:
        """Integer cell coordinates of every element, shape ``(n_elements, d)``."""
        grids = np.meshgrid(*[np.arange(n) for n in self.cells_per_axis], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    @cached_property
    def lower_corners(self) -> np.ndarray:
        return self.cell_index * self.h

    def element_of(self, index) -> int:
        index = tuple(int(i) for i in np.atleast_1d(index))
        if len(index) != self.d or any(not 0 <= i < n for i, n in zip(index, self.cells_per_axis)):
            raise InputError(f"cell index {index} outside mesh {self.cells_per_axis}")
        return int(np.ravel_multi_index(index, self.cells_per_axis))

    def shift(self, axis: int, step: int = 1) -> np.ndarray:
        """Element reached from each element by ``step`` cells along ``axis`` (periodic)."""
        idx = self.cell_index.copy()
        idx[:, axis] = (idx[:, axis] + step) % self.cells_per_axis[axis]
        return np.ravel_multi_index(tuple(idx.T), self.cells_per_axis)

    @cached_property
    def faces(self) -> np.ndarray:
        """Face table with columns ``(low element, high element, axis)``."""
        rows = []
        for a in range(self.d):
            low = np.arange(self.n_elements)
            rows.append(np.stack([low, self.shift(a, +1), np.full_like(low, a)], axis=1))
        return np.concatenate(rows, axis=0)

    def neighbor(self, element: int, local_face: int) -> tuple[int, int]:
        """Element across ``local_face`` and the matching local face seen from there."""
        if not 0 <= element < self.n_elements:
            raise InputError(f"element {element} outside [0, {self.n_elements})")
        if not 0 <= local_face < 2 * self.d:
            raise InputError(f"local face {local_face} outside [0, {2 * self.d})")
        axis, high = divmod(local_face, 2)
        other = int(self.shift(axis, +1 if high else -1)[element])
        return other, 2 * axis + (1 - high)

    def normal(self, local_face: int) -> np.ndarray:
        axis, high = divmod(local_face, 2)
        n = np.zeros(self.d)
        n[axis] = 1.0 if high else -1.0
        return n

    def to_reference(self, element: int, x) -> np.ndarray:
        """Map physical points in ``element`` to ``[-1, 1]^d``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return 2.0 * (x - self.lower_corners[element]) / self.h - 1.0

    def locate(self, x) -> np.ndarray:
        """Element containing each point of ``x`` (shape ``(n, d)``), wrapping into the torus."""
        x = np.atleast_2d(np.asarray(x, dtype=float)) % 1.0
        idx = np.minimum((x / self.h).astype(int), np.asarray(self.cells_per_axis) - 1)
        return np.ravel_multi_index(tuple(idx.T), self.cells_per_axis)


def build_mesh(d: int, cells_per_axis) -> PeriodicCartesianMesh:
    """Uniform periodic mesh; ``cells_per_axis`` is an int (all axes) or a sequence."""
    if d not in (1, 2):
        raise InputError(f"only d in {{1, 2}} is supported, got d={d}")
    cells = np.atleast_1d(np.asarray(cells_per_axis))
    if cells.size == 1:
        cells = np.repeat(cells, d)
    if cells.size != d:
        raise InputError(f"need {d} cell counts, got {cells.tolist()}")
    if np.any(cells != np.round(cells)) or np.any(cells < 1):
        raise InputError(f"cell counts must be positive integers, got {cells.tolist()}")
    return PeriodicCartesianMesh(d, tuple(int(c) for c in cells))
