"""Finite-horizon masks for the half-cylinder-confined sets and their height profiles.

A lower mask marks the cells whose centre keeps its forward orbit in
``y <= 0`` for ``horizon`` steps (and, if two-sided, its backward orbit too);
an upper mask uses ``y >= 0``. These are cell-centre diagnostics, not
rigorous enclosures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import ConfigError, EmptyMaskError
from .mapmodel import MapSpec, run_chunks

Sign = Literal["lower", "upper"]


@dataclass
class BasinMask:
    spec_digest: str
    sign: str
    y_min: float
    y_max: float
    nx: int
    ny: int
    horizon: int
    two_sided: bool
    escape: np.ndarray  # (ny, nx) int: first exit step (forward/backward min), horizon+1 = never
    offset: int = 0
    heuristic: bool = False

    @property
    def cells(self) -> np.ndarray:
        return self.escape > self.horizon

    @property
    def cell_width(self) -> float:
        return 1.0 / self.nx

    @property
    def cell_height(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.nx) + 0.5) / self.nx

    @property
    def y_centers(self) -> np.ndarray:
        return self.y_min + self.offset + (np.arange(self.ny) + 0.5) * self.cell_height

    def at_horizon(self, horizon: int) -> "BasinMask":
        """The same mask truncated to a shorter horizon (no re-iteration)."""
        if not 0 <= horizon <= self.horizon:
            raise ConfigError(f"horizon must lie in [0, {self.horizon}]")
        return replace(self, horizon=horizon, escape=np.minimum(self.escape, horizon + 1))

    def shifted(self, n: int) -> "BasinMask":
        """Vertical integer translate of the mask (translates of invariant sets are invariant)."""
        return replace(self, offset=self.offset + int(n))

    def locate(self, x, y):
        """Cell indices (row, col) of cylinder points; -1 rows when outside the window."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        col = np.floor((x - np.floor(x)) * self.nx).astype(np.int64) % self.nx
        row = np.floor((y - self.y_min - self.offset) / self.cell_height).astype(np.int64)
        row = np.where((row >= 0) & (row < self.ny), row, -1)
        return row, col

    def write_pgm(self, path) -> None:
        """Binary PGM (P5), 255 = true cell, top image row = highest y."""
        img = np.where(self.cells[::-1], 255, 0).astype(np.uint8)
        with open(path, "wb") as fh:
            fh.write(f"P5\n{self.nx} {self.ny}\n255\n".encode())
            fh.write(img.tobytes())


def compute_basin_mask(spec: MapSpec, sign: Sign = "lower", horizon: int = 1000,
                       window: tuple[float, float] = (-2.0, 0.5),
                       resolution: tuple[int, int] = (256, 256), two_sided: bool = False,
                       workers: int = 1) -> BasinMask:
    if horizon < 0:
        raise ConfigError("horizon must be >= 0")
    y_min, y_max = map(float, window)
    if not y_min < y_max:
        raise ConfigError("window must satisfy y_min < y_max")
    if sign == "lower" and y_max < 0:
        raise ConfigError("lower window must reach y = 0 (top < 0)")
    if sign == "upper" and y_min > 0:
        raise ConfigError("upper window must reach y = 0 (bottom > 0)")
    if sign not in ("lower", "upper"):
        raise ConfigError(f"sign must be 'lower' or 'upper', got {sign!r}")
    nx, ny = map(int, resolution)
    if nx < 1 or ny < 1:
        raise ConfigError("resolution must be positive")
    xc = (np.arange(nx) + 0.5) / nx
    yc = y_min + (np.arange(ny) + 0.5) * (y_max - y_min) / ny
    yy, xx = np.meshgrid(yc, xc, indexing="ij")
    xs = xx.ravel().copy()
    ys = yy.ravel().copy()
    code = _kernels.LOWER if sign == "lower" else _kernels.UPPER
    escape = np.empty(xs.size, dtype=np.int64)
    args = spec.kernel_args

    def work(sl: slice) -> None:
        _kernels.escape_times(*args, xs[sl], ys[sl], horizon, code, False, escape[sl])

    run_chunks(work, xs.size, workers)
    if two_sided:
        back = np.empty_like(escape)

        def work_back(sl: slice) -> None:
            _kernels.escape_times(*args, xs[sl], ys[sl], horizon, code, True, back[sl])

        run_chunks(work_back, xs.size, workers)
        escape = np.minimum(escape, back)
    return BasinMask(spec.digest(), sign, y_min, y_max, nx, ny, horizon, two_sided,
                     escape.reshape(ny, nx))


def unbounded_components(mask: BasinMask) -> BasinMask:
    """Keep the connected components touching the far window edge (heuristic).

    Components are 4-connected and wrap around in x. For a lower mask the far
    edge is the bottom row; for an upper mask the top row.
    """
    cells = mask.cells
    labels, n = ndimage.label(cells)
    if n == 0:
        return replace(mask, heuristic=True)
    parent = np.arange(n + 1)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for left, right in zip(labels[:, 0], labels[:, -1]):
        if left and right:
            ra, rb = find(left), find(right)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n + 1)])
    merged = roots[labels]
    edge = merged[0] if mask.sign == "lower" else merged[-1]
    keep = np.setdiff1d(np.unique(edge), [0])
    kept = np.isin(merged, keep) & cells
    escape = np.where(kept, mask.escape, 0)
    return replace(mask, escape=escape, heuristic=True)


@dataclass
class HeightProfile:
    """Per-column top (lower sign) or bottom (upper sign) of the true cells."""

    sign: str
    x: np.ndarray
    values: np.ndarray  # nan where the column is empty
    oscillation: float
    defined_everywhere: bool
    cell_height: float
    bound: float | None = None

    @property
    def within_bound(self) -> bool | None:
        if self.bound is None:
            return None
        return self.oscillation <= self.bound + 2 * self.cell_height

    def translation_offset(self, M_f: float, M_Dehn: float) -> int:
        """Smallest integer lift pushing the whole profile above M_Dehn.

        For a lower profile this is floor(-max values + M_f + M_Dehn) + 1.
        """
        top = float(np.nanmax(self.values))
        return int(np.floor(-top + M_f + M_Dehn)) + 1

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["column", "x", "value"])
            for i, (x, v) in enumerate(zip(self.x, self.values)):
                w.writerow([i, repr(float(x)), "" if np.isnan(v) else repr(float(v))])


def compute_height_profile(mask: BasinMask, M_f: float | None = None) -> HeightProfile:
    cells = mask.cells
    if not cells.any():
        raise EmptyMaskError("mask has no true cell")
    yc = mask.y_centers[:, None]
    if mask.sign == "lower":
        values = np.where(cells, yc, -np.inf).max(axis=0)
        values[np.isneginf(values)] = np.nan
    else:
        values = np.where(cells, yc, np.inf).min(axis=0)
        values[np.isposinf(values)] = np.nan
    defined = bool(np.all(np.isfinite(values)))
    osc = float(np.nanmax(values) - np.nanmin(values))
    return HeightProfile(mask.sign, mask.x_centers, values, osc, defined, mask.cell_height, M_f)
