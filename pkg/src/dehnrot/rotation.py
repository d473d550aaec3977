"""Empirical vertical rotation interval and Lebesgue rotation number."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _kernels
from .errors import ConfigError, NumericalError
from .mapmodel import MapSpec, displacement, run_chunks, seed_grid
from .rng import make_rng


@dataclass
class RotationEstimate:
    """Min/max of per-seed Birkhoff averages; endpoints are empirical.

    ``averages[i, s]`` is the average displacement of seed ``s`` after
    ``checkpoints[i]`` iterations; ``diagnostic`` lists (n, min, max) per
    checkpoint.
    """

    lower: float
    upper: float
    n_iter: int
    n_seeds: int
    seeds_x: np.ndarray
    seeds_y: np.ndarray
    checkpoints: np.ndarray
    averages: np.ndarray
    power: int = 1
    shift: int = 0
    label: str = "empirical"

    @property
    def final_averages(self) -> np.ndarray:
        return self.averages[-1]

    @property
    def diagnostic(self) -> list[tuple[int, float, float]]:
        return [(int(n), float(row.min()), float(row.max()))
                for n, row in zip(self.checkpoints, self.averages)]

    @property
    def widths(self) -> np.ndarray:
        return self.averages.max(axis=1) - self.averages.min(axis=1)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["seed", "x", "y", "average"])
            for i, (x, y, a) in enumerate(zip(self.seeds_x, self.seeds_y, self.final_averages)):
                w.writerow([i, repr(float(x)), repr(float(y)), repr(float(a))])

    def summary(self) -> str:
        return f"rho_lower {self.lower:.12g} rho_upper {self.upper:.12g}"


def checkpoint_schedule(n_iter: int) -> np.ndarray:
    """Powers of ten from 100 up to n_iter, always ending at n_iter."""
    cps = []
    n = 100
    while n < n_iter:
        cps.append(n)
        n *= 10
    cps.append(n_iter)
    return np.array(cps, dtype=np.int64)


def estimate_rotation_interval(spec: MapSpec, n_seeds: int, n_iter: int, *, power: int = 1,
                               shift: int = 0, workers: int = 1) -> RotationEstimate:
    """Estimate the vertical rotation interval of F^power + (0, shift).

    Seeds sit on a uniform grid of the unit square; the displacement is
    periodic in y, so that square represents every cylinder point.
    """
    if n_seeds < 1 or n_iter < 1:
        raise ConfigError("n_seeds and n_iter must be >= 1")
    if power < 1:
        raise ConfigError("power must be >= 1")
    xs, ys = seed_grid(n_seeds)
    cps = checkpoint_schedule(n_iter)
    out = np.zeros((cps.size, n_seeds))
    bad = np.full(n_seeds, -1, dtype=np.int64)
    args = spec.kernel_args

    def work(sl: slice) -> None:
        _kernels.displacements(*args, xs[sl], ys[sl], cps, power, float(shift), out[:, sl], bad[sl])

    run_chunks(work, n_seeds, workers)
    failed = np.flatnonzero(bad >= 0)
    if failed.size:
        s = int(failed[0])
        raise NumericalError(f"non-finite coordinate for seed {s} at step {bad[s]}",
                             step=int(bad[s]), seed=s)
    averages = out / cps[:, None]
    final = averages[-1]
    return RotationEstimate(float(final.min()), float(final.max()), n_iter, n_seeds, xs, ys,
                            cps, averages, power, shift)


@dataclass
class MeasureRotation:
    value: float
    method: str
    n_samples: int
    std_error: float = 0.0
    discretization_bound: float | None = None
    reference: float | None = None

    @property
    def error(self) -> float:
        if self.discretization_bound is not None:
            return self.discretization_bound
        return self.std_error


def lebesgue_rotation_number(spec: MapSpec, method: Literal["quadrature", "monte_carlo"] = "quadrature",
                             n: int = 1024, rng_seed: int = 0) -> MeasureRotation:
    """Integral of the one-step vertical displacement over the torus.

    ``quadrature``: midpoint rule on an n x n grid; the reported bound is the
    Lipschitz estimate L * dx / 2. ``monte_carlo``: ``n`` uniform samples
    (pass n = 10**6 for a million draws) with the standard error of the mean.
    For the shear family the exact value is ``v_const``, reported as
    ``reference``.
    """
    if n < 16:
        raise ConfigError(f"n must be >= 16, got {n}")
    if method == "quadrature":
        g = (np.arange(n) + 0.5) / n
        total = 0.0
        for row in np.array_split(np.arange(n), max(1, n // 256)):
            x, y = np.meshgrid(g[row], g, indexing="ij")
            total += float(np.sum(displacement(spec, x, y)))
        value = total / (n * n)
        lip = spec.v_lipschitz * (1 + spec.k_dehn + spec.h_lipschitz)
        return MeasureRotation(value, method, n * n, discretization_bound=lip / (2 * n),
                               reference=spec.v_const)
    if method == "monte_carlo":
        rng = make_rng(rng_seed, "lebesgue")
        x = rng.random(n)
        y = rng.random(n)
        phi = displacement(spec, x, y)
        return MeasureRotation(float(phi.mean()), method, n,
                               std_error=float(phi.std(ddof=1) / np.sqrt(n)),
                               reference=spec.v_const)
    raise ConfigError(f"unknown method {method!r}")
