"""Torus maps homotopic to a Dehn twist, built as shear compositions.

The plane lift is ``F = V o H o T_k`` with

    T_k(x, y) = (x + k y, y)
    H(x, y)   = (x + h(y), y)
    V(x, y)   = (x, y + v(x))

where ``h`` and ``v`` are 1-periodic trigonometric polynomials (``v`` carries
an extra constant ``v_const``). Each factor is a unit-Jacobian shear, so the
lift is an area-preserving homeomorphism satisfying the deck identities
``F(x + 1, y) = F(x, y) + (1, 0)`` and ``F(x, y + 1) = F(x, y) + (k, 1)``.
"""

from __future__ import annotations

import csv
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Iterable, Literal, NamedTuple

import numpy as np

from . import _kernels
from .errors import NumericalError, SpecError

TWO_PI = 2.0 * math.pi

Harmonic = tuple[int, float, float]


class PlanePoint(NamedTuple):
    x: float
    y: float

    def to_cylinder(self) -> "CylinderPoint":
        return CylinderPoint(self.x - math.floor(self.x), self.y)

    def to_torus(self) -> "TorusPoint":
        return self.to_cylinder().to_torus()


class CylinderPoint(NamedTuple):
    x: float
    y: float

    def lift(self, n: int = 0) -> PlanePoint:
        return PlanePoint(self.x + n, self.y)

    def to_torus(self) -> "TorusPoint":
        return TorusPoint(self.x - math.floor(self.x), self.y - math.floor(self.y))


class TorusPoint(NamedTuple):
    x: float
    y: float


def _normalize_coeffs(coeffs: Iterable) -> tuple[Harmonic, ...]:
    merged: dict[int, list[float]] = {}
    for row in coeffs:
        j, a, b = row
        if int(j) != j or j < 1:
            raise SpecError(f"harmonic frequency must be an integer >= 1, got {j!r}")
        a, b = float(a), float(b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise SpecError(f"non-finite amplitude for harmonic {j}")
        acc = merged.setdefault(int(j), [0.0, 0.0])
        acc[0] += a
        acc[1] += b
    return tuple((j, a, b) for j, (a, b) in sorted(merged.items()) if a != 0.0 or b != 0.0)


def _coeff_table(coeffs: tuple[Harmonic, ...]) -> np.ndarray:
    table = np.array(coeffs, dtype=np.float64).reshape(-1, 3)
    table.setflags(write=False)
    return table


def trig_eval(table: np.ndarray, t):
    """Evaluate sum_j a_j sin(2 pi j t) + b_j cos(2 pi j t) elementwise."""
    t = np.asarray(t, dtype=np.float64)
    acc = np.zeros_like(t)
    for j, a, b in table:
        arg = TWO_PI * j * t
        if a != 0.0:
            acc = acc + a * np.sin(arg)
        if b != 0.0:
            acc = acc + b * np.cos(arg)
    return acc


def trig_deriv(table: np.ndarray, t):
    t = np.asarray(t, dtype=np.float64)
    acc = np.zeros_like(t)
    for j, a, b in table:
        w = TWO_PI * j
        acc = acc + w * (a * np.cos(w * t) - b * np.sin(w * t))
    return acc


def lipschitz_bound(table: np.ndarray) -> float:
    """Bound on |d/dt| of a trigonometric polynomial: sum 2 pi j (|a_j| + |b_j|)."""
    if table.size == 0:
        return 0.0
    return float(np.sum(TWO_PI * table[:, 0] * (np.abs(table[:, 1]) + np.abs(table[:, 2]))))


def amplitude_bound(table: np.ndarray) -> float:
    """Triangle-inequality bound on sup |p|: sum_j sqrt(a_j^2 + b_j^2)."""
    if table.size == 0:
        return 0.0
    return float(np.sum(np.hypot(table[:, 1], table[:, 2])))


@dataclass(frozen=True)
class MapSpec:
    """Parameters of one member of the shear-composition family.

    ``h_coeffs`` and ``v_coeffs`` are tuples of ``(j, sin_amp, cos_amp)``;
    ``v_const`` is the mean vertical drift added to ``v``.
    """

    k_dehn: int
    h_coeffs: tuple[Harmonic, ...] = ()
    v_coeffs: tuple[Harmonic, ...] = ()
    v_const: float = 0.0

    def __post_init__(self):
        k = self.k_dehn
        if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
            if isinstance(k, float) and k.is_integer():
                k = int(k)
            else:
                raise SpecError(f"k_dehn must be an integer, got {self.k_dehn!r}")
        if k <= 0:
            raise SpecError(f"k_dehn must be positive, got {k}")
        if not math.isfinite(float(self.v_const)):
            raise SpecError("v_const must be finite")
        object.__setattr__(self, "k_dehn", int(k))
        object.__setattr__(self, "v_const", float(self.v_const))
        object.__setattr__(self, "h_coeffs", _normalize_coeffs(self.h_coeffs))
        object.__setattr__(self, "v_coeffs", _normalize_coeffs(self.v_coeffs))

    @classmethod
    def chirikov(cls, K: float, k_dehn: int = 1, v_const: float = 0.0) -> "MapSpec":
        """Standard-map member: h = 0, v(x) = (K / 2 pi) sin(2 pi x) + v_const."""
        return cls(k_dehn, (), ((1, K / TWO_PI, 0.0),), v_const)

    @cached_property
    def h_table(self) -> np.ndarray:
        return _coeff_table(self.h_coeffs)

    @cached_property
    def v_table(self) -> np.ndarray:
        return _coeff_table(self.v_coeffs)

    @property
    def kernel_args(self) -> tuple:
        return float(self.k_dehn), self.h_table, self.v_table, self.v_const

    def h(self, y):
        return trig_eval(self.h_table, y)

    def v(self, x):
        return self.v_const + trig_eval(self.v_table, x)

    @property
    def h_lipschitz(self) -> float:
        return lipschitz_bound(self.h_table)

    @property
    def v_lipschitz(self) -> float:
        return lipschitz_bound(self.v_table)

    @property
    def is_pure_twist(self) -> bool:
        return not self.h_coeffs and not self.v_coeffs and self.v_const == 0.0

    def to_text(self) -> str:
        """Canonical map-spec document (round-trips through parse_map_spec)."""
        lines = [f"k_dehn = {self.k_dehn}"]
        for name, coeffs in (("h", self.h_coeffs), ("v", self.v_coeffs)):
            for j, a, b in coeffs:
                if a != 0.0:
                    lines.append(f"{name}.sin.{j} = {a!r}")
                if b != 0.0:
                    lines.append(f"{name}.cos.{j} = {b!r}")
        if self.v_const != 0.0:
            lines.append(f"v.const = {self.v_const!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


_COEFF_KEYS = {"h.sin", "h.cos", "v.sin", "v.cos"}


def parse_map_spec(text: str) -> MapSpec:
    """Parse a flat ``key = value`` document into a MapSpec.

    Recognised keys: ``k_dehn`` (required), ``h.sin.J``, ``h.cos.J``,
    ``v.sin.J``, ``v.cos.J`` for integer ``J >= 1``, and ``v.const``.
    ``#`` starts a comment. Unknown or repeated keys are errors.
    """
    seen: dict[str, int] = {}
    k_dehn = None
    coeffs: dict[str, dict[int, list[float]]] = {"h": {}, "v": {}}
    v_const = 0.0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key in seen:
            raise SpecError(f"duplicate key {key!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        if key == "k_dehn":
            try:
                num = float(value)
            except ValueError:
                raise SpecError(f"malformed number {value!r} for k_dehn", lineno) from None
            if not (math.isfinite(num) and num.is_integer()):
                raise SpecError(f"k_dehn must be an integer, got {value!r}", lineno)
            if num <= 0:
                raise SpecError(f"k_dehn must be positive, got {value!r}", lineno)
            k_dehn = int(num)
            continue
        num = _parse_real(value, key, lineno)
        if key == "v.const":
            v_const = num
            continue
        head, _, freq = key.rpartition(".")
        if head not in _COEFF_KEYS or not freq.isdigit() or int(freq) < 1:
            raise SpecError(f"unknown key {key!r}", lineno)
        func, kind = head.split(".")
        slot = coeffs[func].setdefault(int(freq), [0.0, 0.0])
        slot[0 if kind == "sin" else 1] = num
    if k_dehn is None:
        raise SpecError("missing required key 'k_dehn'")
    return MapSpec(
        k_dehn,
        tuple((j, a, b) for j, (a, b) in coeffs["h"].items()),
        tuple((j, a, b) for j, (a, b) in coeffs["v"].items()),
        v_const,
    )


def _parse_real(value: str, key: str, lineno: int) -> float:
    try:
        num = float(value)
    except ValueError:
        raise SpecError(f"malformed number {value!r} for {key}", lineno) from None
    if not math.isfinite(num):
        raise SpecError(f"non-finite value {value!r} for {key}", lineno)
    return num


def load_map_spec(path) -> MapSpec:
    return parse_map_spec(Path(path).read_text(encoding="utf-8"))


def forward(spec: MapSpec, x, y):
    """Plane lift F(x, y), elementwise over arrays."""
    x1 = x + spec.k_dehn * y + spec.h(y)
    return x1, y + spec.v(x1)


def inverse(spec: MapSpec, x, y):
    """Exact inverse T_k^-1 o H^-1 o V^-1 of the plane lift."""
    y0 = y - spec.v(x)
    return x - spec.h(y0) - spec.k_dehn * y0, y0


def jacobian(spec: MapSpec, x, y) -> np.ndarray:
    """Jacobian of the plane lift at (x, y); shape (..., 2, 2)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x1 = x + spec.k_dehn * y + spec.h(y)
    hp = trig_deriv(spec.h_table, y)
    vp = trig_deriv(spec.v_table, x1)
    dx1_dy = spec.k_dehn + hp
    jac = np.empty(np.broadcast(x, y).shape + (2, 2))
    jac[..., 0, 0] = 1.0
    jac[..., 0, 1] = dx1_dy
    jac[..., 1, 0] = vp
    jac[..., 1, 1] = 1.0 + vp * dx1_dy
    return jac


def eval_lift(spec: MapSpec, pt: PlanePoint, direction: Literal["forward", "inverse"] = "forward") -> PlanePoint:
    if direction == "forward":
        x, y = forward(spec, float(pt[0]), float(pt[1]))
    elif direction == "inverse":
        x, y = inverse(spec, float(pt[0]), float(pt[1]))
    else:
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    return PlanePoint(float(x), float(y))


def displacement(spec: MapSpec, x, y):
    """One-step vertical displacement; a function on the torus."""
    return forward(spec, x, y)[1] - y


@dataclass
class Orbit:
    seed: CylinderPoint
    n_steps: int
    steps: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def displacement(self) -> np.ndarray:
        return self.y - self.seed.y

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "x", "y", "displacement"])
            for row in zip(self.steps, self.x, self.y, self.displacement):
                w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2])), repr(float(row[3]))])


def iterate_orbit(spec: MapSpec, seed, n: int, record_every: int = 1) -> Orbit:
    """Iterate the cylinder lift from ``seed``; x is reduced mod 1 each step."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    x0 = float(seed[0])
    x0 -= math.floor(x0)
    y0 = float(seed[1])
    count = n // record_every + 1
    xs = np.empty(count)
    ys = np.empty(count)
    bad = _kernels.orbit(*spec.kernel_args, x0, y0, n, record_every, xs, ys)
    if bad >= 0:
        raise NumericalError(f"non-finite coordinate at step {bad}", step=int(bad))
    steps = np.arange(count, dtype=np.int64) * record_every
    return Orbit(CylinderPoint(x0, y0), n, steps, xs, ys)


def seed_grid(n_seeds: int) -> tuple[np.ndarray, np.ndarray]:
    """First ``n_seeds`` points of the m x m grid {(i/m, j/m)}, m = ceil(sqrt n).

    Grids for powers of four are nested, so enlarging a square budget never
    drops a seed.
    """
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    m = math.isqrt(n_seeds)
    if m * m < n_seeds:
        m += 1
    idx = np.arange(n_seeds)
    return (idx // m) / m, (idx % m) / m


def run_chunks(fn: Callable[[slice], None], n: int, workers: int = 1) -> None:
    """Call ``fn`` on contiguous slices covering range(n).

    Kernels write into preallocated arrays by slice, so the result does not
    depend on ``workers``.
    """
    workers = max(1, int(workers))
    if workers == 1 or n < 2 * workers:
        fn(slice(0, n))
        return
    bounds = np.linspace(0, n, workers + 1).astype(int)
    slices = [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fn, s) for s in slices]:
            fut.result()
