"""Displacement-defect bounds A_f, B_f and every constant derived from them.

For a lift F homotopic to the Dehn twist of degree k the defects

    |p2 F(x, y) - y|          <= A_f
    |p1 F(x, y) - x - k y|    <= B_f

control all the thresholds used downstream: the oscillation bound of the
omega-limit height profiles, the band half-width for brick decompositions,
the bounded-displacement pass line and the entropy threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ConfigError
from .mapmodel import MapSpec, amplitude_bound, forward, lipschitz_bound, trig_eval

SAMPLES_PER_HARMONIC = 4096

PROVENANCE = {
    "A_f": "sup |p2 F(x,y) - y| (vertical displacement defect)",
    "B_f": "sup |p1 F(x,y) - x - k y| (horizontal displacement defect)",
    "V_f": "(3 + 2 B_f) / k; vertical extent forcing |p1 F(G)| > 2 for |p1 G| < 1",
    "M_f": "V_f + A_f; oscillation bound for the omega-limit height profiles",
    "M_Dehn": "(2 + B_f) / k; above it points move right by > 2, below -M_Dehn left by > 2",
    "M_prime": "M_f + M_Dehn + 2 = (5 + 3 B_f) / k + A_f + 2",
    "m_D": "(10 + B_f) / k; above it points move right by >= 10",
    "M0": "(20 + 2 B_f) / k + 10 = 2 m_D + 10",
    "M1": "2 M_prime + 8 = (10 + 6 B_f) / k + 2 A_f + 12",
    "bound_displacement": "2 M_prime + 8; pass line for bounded vertical displacement",
    "bound_band": "4 M_prime + 20; height bound of the invariant essential continuum",
    "M_thm3": "max(M0, M1) <= (20 + 6 B_f) / k + 2 A_f + 12; entropy witness threshold",
}


@dataclass(frozen=True)
class ConstantsReport:
    k: int
    A_f: float
    B_f: float
    V_f: float
    M_f: float
    M_Dehn: float
    M_prime: float
    m_D: float
    M0: float
    M1: float
    M_thm3: float
    bound_displacement: float
    bound_band: float
    mode: str = "closed_form"
    notes: tuple[str, ...] = ()
    provenance: dict = field(default_factory=lambda: dict(PROVENANCE), compare=False)

    @classmethod
    def from_bounds(cls, A_f: float, B_f: float, k: int, mode: str = "closed_form",
                    notes: tuple[str, ...] = ()) -> "ConstantsReport":
        if A_f < 0 or B_f < 0:
            raise ValueError("defect bounds must be non-negative")
        if k <= 0:
            raise ValueError("k must be positive")
        V_f = (3 + 2 * B_f) / k
        M_f = V_f + A_f
        M_Dehn = (2 + B_f) / k
        M_prime = M_f + M_Dehn + 2
        m_D = (10 + B_f) / k
        M0 = (20 + 2 * B_f) / k + 10
        M1 = 2 * M_prime + 8
        if A_f == 0 or B_f == 0:
            notes = notes + ("a zero defect bound is admitted; every derived formula stays valid",)
        return cls(k=k, A_f=A_f, B_f=B_f, V_f=V_f, M_f=M_f, M_Dehn=M_Dehn, M_prime=M_prime,
                   m_D=m_D, M0=M0, M1=M1, M_thm3=max(M0, M1),
                   bound_displacement=2 * M_prime + 8, bound_band=4 * M_prime + 20,
                   mode=mode, notes=notes)

    def rows(self) -> list[tuple[str, float]]:
        names = ["A_f", "B_f", "V_f", "M_f", "M_Dehn", "M_prime", "m_D", "M0", "M1",
                 "bound_displacement", "bound_band", "M_thm3"]
        return [(name, getattr(self, name)) for name in names]

    def as_table(self) -> str:
        lines = [f"# mode: {self.mode}; k = {self.k}"]
        lines += [f"# {name}: {self.provenance[name]}" for name, _ in self.rows()]
        lines += [f"# note: {note}" for note in self.notes]
        lines += [f"{name} {value:.12g}" for name, value in self.rows()]
        return "\n".join(lines) + "\n"


def trig_sup_bound(table: np.ndarray, const: float = 0.0,
                   samples_per_harmonic: int = SAMPLES_PER_HARMONIC) -> float:
    """Certified upper bound on sup_t |const + p(t)| for a trig polynomial p.

    Dense sampling plus Lipschitz padding L * dt / 2, capped by the triangle
    bound |const| + sum_j sqrt(a_j^2 + b_j^2) (exact for a single harmonic).
    """
    triangle = abs(const) + amplitude_bound(table)
    if table.size == 0:
        return triangle
    n = samples_per_harmonic * int(table[:, 0].max())
    t = np.arange(n) / n
    sampled = float(np.max(np.abs(const + trig_eval(table, t))))
    padded = sampled + lipschitz_bound(table) / (2 * n)
    return min(padded, triangle)


def _grid(resolution: int):
    if resolution < 2:
        raise ConfigError(f"grid resolution must be >= 2, got {resolution}")
    g = np.arange(resolution) / resolution
    return np.meshgrid(g, g, indexing="ij")


def _lift_norm(spec: MapSpec) -> float:
    # infinity-norm Lipschitz bound of F: product of the three shear norms
    return (1 + spec.k_dehn) * (1 + spec.h_lipschitz) * (1 + spec.v_lipschitz)


def compute_constants(spec: MapSpec, mode: Literal["closed_form", "grid"] = "closed_form",
                      resolution: int = 256) -> ConstantsReport:
    """Defect bounds for ``spec`` and the derived constants.

    ``closed_form`` uses the exact shear structure (the vertical defect is
    v, the horizontal one is h). ``grid`` samples both defects on a
    resolution x resolution grid of the fundamental domain and pads by the
    defects' Lipschitz bounds.
    """
    if mode == "closed_form":
        A = trig_sup_bound(spec.v_table, spec.v_const)
        B = trig_sup_bound(spec.h_table)
    elif mode == "grid":
        x, y = _grid(resolution)
        fx, fy = forward(spec, x, y)
        pad = 0.5 / resolution
        lip_y = spec.v_lipschitz * (1 + spec.k_dehn + spec.h_lipschitz)
        A = float(np.max(np.abs(fy - y))) + lip_y * pad
        B = float(np.max(np.abs(fx - x - spec.k_dehn * y))) + spec.h_lipschitz * pad
    else:
        raise ConfigError(f"unknown constants mode {mode!r}")
    return ConstantsReport.from_bounds(A, B, spec.k_dehn, mode=mode)


def power_map_bounds(spec: MapSpec, q: int, p: int = 0, resolution: int = 128) -> tuple[float, float, int]:
    """Defect bounds (A, B, k_q) for the lift g = F^q - (0, p).

    ``g`` is homotopic to the Dehn twist of degree k q. The bounds are the
    smaller of a padded grid supremum and the analytic estimates
    ``|q c - p| + q sup|v - c|`` and ``q B_f + k A_f q (q - 1) / 2``.
    """
    if q < 1:
        raise ConfigError(f"q must be >= 1, got {q}")
    k = spec.k_dehn
    kq = k * q
    c = spec.v_const
    A_f = trig_sup_bound(spec.v_table, c)
    B_f = trig_sup_bound(spec.h_table)
    osc = trig_sup_bound(spec.v_table)
    A_an = min(q * A_f + abs(p), abs(q * c - p) + q * osc)
    B_an = q * B_f + k * A_f * q * (q - 1) / 2
    if q == 1:
        return min(A_an, trig_sup_bound(spec.v_table, c - p)), B_an, kq
    x, y = _grid(resolution)
    gx, gy = x, y
    for _ in range(q):
        gx, gy = forward(spec, gx, gy)
    gy = gy - p
    lip = _lift_norm(spec) ** q
    pad = 0.5 / resolution
    A_grid = float(np.max(np.abs(gy - y))) + (lip + 1) * pad
    B_grid = float(np.max(np.abs(gx - x - kq * y))) + (lip + 1 + kq) * pad
    return min(A_grid, A_an), min(B_grid, B_an), kq


def constants_for_power(spec: MapSpec, q: int, p: int = 0) -> ConstantsReport:
    if q == 1 and p == 0:
        return compute_constants(spec)
    A, B, kq = power_map_bounds(spec, q, p)
    return ConstantsReport.from_bounds(A, B, kq, mode=f"power q={q} p={p}")


def closure_residual(report: ConstantsReport) -> float:
    """Largest deviation between the report and its formulas recomputed from A_f, B_f, k."""
    again = ConstantsReport.from_bounds(report.A_f, report.B_f, report.k)
    return max(abs(a - b) for (_, a), (_, b) in zip(report.rows(), again.rows()))
