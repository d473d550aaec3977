"""Free brick decompositions, shift-labelled transition graphs and closed chains.

Everything is built for a lift ``g = F^n0 - (0, m0)`` and is invariant under
``(x, y) -> (x + 1, y)``: bricks live in the quotient ``[0, 1) x R`` and a
plane brick is an integer x-translate of a quotient brick. An edge
``(i -> j, s)`` records ``g(D_i) meets D_j + (s, 0)``.

Labels use three-valued logic. ``certified_*`` labels come from interval
enclosures or interior witnesses with an explicit evaluation margin;
``sampled_*`` labels come from point clouds and carry no guarantee. Only
certified edges between certified-free bricks enter the chain search.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal

import networkx as nx
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .constants import compute_constants
from .errors import ConfigError, FixedPointSuspected, InconclusiveError
from .mapmodel import MapSpec, amplitude_bound, forward, jacobian, lipschitz_bound, trig_eval

CERTIFIED_FREE = "certified_free"
FREE_SAMPLED = "free_sampled"
NOT_FREE = "not_free"

CERTIFIED_PRESENT = "certified_present"
SAMPLED_PRESENT = "sampled_present"
CERTIFIED_ABSENT = "certified_absent"
SAMPLED_ABSENT = "sampled_absent"

FINE = "fine"
UPPER_STRIP = "upper_strip"
LOWER_STRIP = "lower_strip"


def eval_margin(x, y):
    """Conservative floating-point error bound for a lift evaluation at (x, y)."""
    return 1e-9 * (1.0 + np.maximum(np.abs(x), np.abs(y)))


def _trig_range(table, const, lo, hi):
    # enclosure of const + p(t) over [lo, hi] from the midpoint value and the
    # Lipschitz bound, clipped to the global amplitude bound
    if table.size == 0:
        return np.full_like(lo, const), np.full_like(hi, const)
    mid = 0.5 * (lo + hi)
    rad = lipschitz_bound(table) * 0.5 * (hi - lo)
    val = trig_eval(table, mid)
    amp = amplitude_bound(table)
    return const + np.maximum(val - rad, -amp), const + np.minimum(val + rad, amp)


@dataclass(frozen=True)
class PowerLift:
    """The plane map g = F^n0 - (0, m0)."""

    spec: MapSpec
    n0: int = 1
    m0: int = 0

    def __post_init__(self):
        if self.n0 < 1:
            raise ConfigError(f"n0 must be >= 1, got {self.n0}")

    def __call__(self, x, y):
        for _ in range(self.n0):
            x, y = forward(self.spec, x, y)
        return x, y - self.m0

    def enclosure(self, x0, y0, x1, y1):
        """Axis-aligned boxes containing g of each input box (vectorised)."""
        spec = self.spec
        k = spec.k_dehn
        x0, y0, x1, y1 = (np.asarray(a, dtype=np.float64) for a in (x0, y0, x1, y1))
        for _ in range(self.n0):
            hlo, hhi = _trig_range(spec.h_table, 0.0, y0, y1)
            x0, x1 = x0 + k * y0 + hlo, x1 + k * y1 + hhi
            vlo, vhi = _trig_range(spec.v_table, spec.v_const, x0, x1)
            y0, y1 = y0 + vlo, y1 + vhi
        y0 = y0 - self.m0
        y1 = y1 - self.m0
        pad = eval_margin(np.maximum(np.abs(x0), np.abs(x1)), np.maximum(np.abs(y0), np.abs(y1)))
        return x0 - pad, y0 - pad, x1 + pad, y1 + pad

    def jacobian(self, x, y) -> np.ndarray:
        jac = np.eye(2)
        for _ in range(self.n0):
            jac = jacobian(self.spec, x, y) @ jac
            x, y = forward(self.spec, x, y)
        return jac


@dataclass
class Brick:
    id: int
    x0: float
    y0: float
    x1: float
    y1: float
    kind: str
    status: str
    index: int | None = None

    @property
    def diameter(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)


@dataclass
class SuspectedFixedPoint:
    location: tuple[float, float]
    residual: float
    brick_ids: list[int]
    refined: bool


@dataclass
class BrickDecomposition:
    lift: PowerLift
    Y: float
    depth: float
    N: int
    target_diameter: float
    min_diameter: float
    x0: np.ndarray
    y0: np.ndarray
    x1: np.ndarray
    y1: np.ndarray
    kind: np.ndarray
    status: np.ndarray
    strip_index: np.ndarray  # -1 for fine bricks
    suspects: list[SuspectedFixedPoint] = field(default_factory=list)

    def __len__(self) -> int:
        return self.x0.size

    @property
    def bricks(self) -> list[Brick]:
        return [Brick(i, float(self.x0[i]), float(self.y0[i]), float(self.x1[i]), float(self.y1[i]),
                      str(self.kind[i]), str(self.status[i]),
                      None if self.strip_index[i] < 0 else int(self.strip_index[i]))
                for i in range(len(self))]

    @property
    def all_certified_free(self) -> bool:
        return bool(np.all(self.status == CERTIFIED_FREE))

    @property
    def has_not_free(self) -> bool:
        return bool(np.any(self.status == NOT_FREE))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["id", "x0", "y0", "x1", "y1", "status"])
            for i in range(len(self)):
                w.writerow([i, repr(float(self.x0[i])), repr(float(self.y0[i])),
                            repr(float(self.x1[i])), repr(float(self.y1[i])), self.status[i]])


def _free_mask(lift: PowerLift, x0, y0, x1, y1) -> np.ndarray:
    # certified: the enclosure of g(D) misses D itself (plane, no translates)
    X0, Y0, X1, Y1 = lift.enclosure(x0, y0, x1, y1)
    return (X0 > x1) | (X1 < x0) | (Y0 > y1) | (Y1 < y0)


def _sampled_hits(lift: PowerLift, x0, y0, x1, y1, n: int = 1000, seed: int = 0) -> bool:
    rng = np.random.default_rng(seed)
    px = x0 + (x1 - x0) * rng.random(n)
    py = y0 + (y1 - y0) * rng.random(n)
    gx, gy = lift(px, py)
    return bool(np.any((gx >= x0) & (gx <= x1) & (gy >= y0) & (gy <= y1)))


def build_free_decomposition(spec: MapSpec, n0: int = 1, m0: int = 0, target_diameter: float = 0.25,
                             min_diameter: float = 1e-3, max_strip_count: int = 4096,
                             warn: bool = True) -> BrickDecomposition:
    """Decompose the band [0,1) x [-Y, Y] (Y = M' + 2) and the two half-strips.

    Fine bricks start on a grid of diameter <= target_diameter and are halved
    until certified free; a brick still failing below ``min_diameter`` is
    ``not_free`` and feeds a FixedPointSuspected warning. The strip count N
    starts at the fine-grid column count and doubles until every strip is
    certified free.
    """
    if target_diameter <= 0 or min_diameter <= 0:
        raise ConfigError("diameters must be positive")
    lift = PowerLift(spec, n0, m0)
    consts = compute_constants(spec)
    Y = consts.M_prime + 2
    depth = Y + 10 * (consts.A_f * n0 + abs(m0) + 1)

    nx = max(1, math.ceil(math.sqrt(2) / target_diameter))
    ny = max(1, math.ceil(2 * Y * math.sqrt(2) / target_diameter))
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    h = 2 * Y / ny
    qx0, qx1 = ix / nx, (ix + 1) / nx
    qy0, qy1 = -Y + iy * h, -Y + (iy + 1) * h

    done: list[tuple[np.ndarray, ...]] = []
    while qx0.size:
        free = _free_mask(lift, qx0, qy0, qx1, qy1)
        diam = np.hypot(qx1 - qx0, qy1 - qy0)
        stuck = ~free & (diam < min_diameter)
        for sel, st in ((free, CERTIFIED_FREE), (stuck, NOT_FREE)):
            if sel.any():
                done.append((qx0[sel], qy0[sel], qx1[sel], qy1[sel], np.full(sel.sum(), st, dtype=object)))
        split = ~free & ~stuck
        sx0, sy0, sx1, sy1 = qx0[split], qy0[split], qx1[split], qy1[split]
        mx, my = 0.5 * (sx0 + sx1), 0.5 * (sy0 + sy1)
        qx0 = np.concatenate([sx0, mx, sx0, mx])
        qx1 = np.concatenate([mx, sx1, mx, sx1])
        qy0 = np.concatenate([sy0, sy0, my, my])
        qy1 = np.concatenate([my, my, sy1, sy1])

    N = nx
    while True:
        n = np.arange(N)
        sx0 = np.concatenate([n / N, n / N])
        sx1 = np.concatenate([(n + 1) / N, (n + 1) / N])
        sy0 = np.concatenate([np.full(N, Y), np.full(N, -depth)])
        sy1 = np.concatenate([np.full(N, depth), np.full(N, -Y)])
        sfree = _free_mask(lift, sx0, sy0, sx1, sy1)
        if sfree.all() or 2 * N > max_strip_count:
            break
        N *= 2
    sstatus = np.full(2 * N, CERTIFIED_FREE, dtype=object)
    for i in np.flatnonzero(~sfree):
        sstatus[i] = NOT_FREE if _sampled_hits(lift, sx0[i], sy0[i], sx1[i], sy1[i], seed=i) else FREE_SAMPLED

    parts = list(zip(*done)) if done else [[np.empty(0)]] * 4 + [[np.empty(0, dtype=object)]]
    fx0, fy0, fx1, fy1 = (np.concatenate(p) for p in parts[:4])
    fstat = np.concatenate(parts[4])
    order = np.lexsort((fx0, fy0))
    fx0, fy0, fx1, fy1, fstat = fx0[order], fy0[order], fx1[order], fy1[order], fstat[order]
    nf = fx0.size
    dec = BrickDecomposition(
        lift=lift, Y=Y, depth=depth, N=N, target_diameter=target_diameter, min_diameter=min_diameter,
        x0=np.concatenate([fx0, sx0]), y0=np.concatenate([fy0, sy0]),
        x1=np.concatenate([fx1, sx1]), y1=np.concatenate([fy1, sy1]),
        kind=np.array([FINE] * nf + [UPPER_STRIP] * N + [LOWER_STRIP] * N, dtype=object),
        status=np.concatenate([fstat, sstatus]),
        strip_index=np.concatenate([np.full(nf, -1), np.arange(N), np.arange(N)]).astype(np.int64),
    )
    dec.suspects = _locate_suspects(dec)
    if dec.suspects and warn:
        locs = ", ".join(f"({p.location[0]:.6g}, {p.location[1]:.6g})" for p in dec.suspects)
        warnings.warn(FixedPointSuspected(
            f"{int(np.sum(dec.status == NOT_FREE))} bricks not certified free; "
            f"approximate fixed points of g near {locs}", [p.location for p in dec.suspects]),
            stacklevel=2)
    return dec


def _locate_suspects(dec: BrickDecomposition) -> list[SuspectedFixedPoint]:
    bad = np.flatnonzero((dec.status == NOT_FREE) & (dec.kind == FINE))
    if bad.size == 0:
        return []
    x0, y0, x1, y1 = dec.x0[bad], dec.y0[bad], dec.x1[bad], dec.y1[bad]
    tol = 1e-12
    touch = np.zeros((bad.size, bad.size), dtype=bool)
    for off in (-1.0, 0.0, 1.0):
        touch |= ((x0[:, None] <= x1[None, :] + off + tol) & (x1[:, None] + tol >= x0[None, :] + off)
                  & (y0[:, None] <= y1[None, :] + tol) & (y1[:, None] + tol >= y0[None, :]))
    n_comp, labels = connected_components(coo_matrix(touch), directed=False)
    lift = dec.lift
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    gx, gy = lift(cx, cy)
    res = np.hypot(gx - cx, gy - cy)
    out = []
    for c in range(n_comp):
        members = np.flatnonzero(labels == c)
        best = members[np.argmin(res[members])]
        z = np.array([cx[best], cy[best]])
        refined = False
        for _ in range(50):
            g = np.array(lift(z[0], z[1]))
            r = g - z
            if np.hypot(*r) < 1e-13:
                refined = True
                break
            try:
                z = z - np.linalg.solve(lift.jacobian(z[0], z[1]) - np.eye(2), r)
            except np.linalg.LinAlgError:
                break
        near = refined and abs(z[1] - cy[best]) <= 2 * dec.target_diameter
        if near:
            loc = (float(z[0] - math.floor(z[0])), float(z[1]))
            resid = float(np.hypot(*(np.array(lift(z[0], z[1])) - z)))
        else:
            loc, resid = (float(cx[best]), float(cy[best])), float(res[best])
        out.append(SuspectedFixedPoint(loc, resid, [int(i) for i in bad[members]], bool(near)))
    return out


@dataclass
class Edge:
    src: int
    dst: int
    shift: int
    label: str
    witness: tuple[float, float] | None = None


@dataclass
class TransitionGraph:
    n_nodes: int
    node_status: list[str]
    edges: list[Edge]
    mode: str = "certified"
    k_crit_estimate: int | None = None
    suppressed: bool = False
    decomposition: BrickDecomposition | None = None

    def certified_edges(self) -> list[Edge]:
        return [e for e in self.edges
                if e.label == CERTIFIED_PRESENT
                and self.node_status[e.src] == CERTIFIED_FREE
                and self.node_status[e.dst] == CERTIFIED_FREE]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["src", "dst", "shift", "label"])
            for e in self.edges:
                w.writerow([e.src, e.dst, e.shift, e.label])


def _source_samples(x0, y0, x1, y1, nx, ny):
    # interior points: centres of an nx x ny sub-grid
    u = (np.arange(nx) + 0.5) / nx
    v = (np.arange(ny) + 0.5) / ny
    px, py = np.meshgrid(x0 + (x1 - x0) * u, y0 + (y1 - y0) * v, indexing="ij")
    return px.ravel(), py.ravel()


def build_transition_graph(dec: BrickDecomposition, mode: Literal["certified", "sampled"] = "certified",
                           fine_samples: int = 8) -> TransitionGraph:
    """Shift-labelled edges between quotient bricks.

    Candidate pairs (j, s) are those whose translate D_j + (s, 0) meets the
    enclosure of g(D_i). Each source is cut into sub-boxes; candidates
    missed by every sub-box enclosure are ``certified_absent``. A candidate
    is ``certified_present`` when an interior sample point of D_i maps into
    the interior of D_j + (s, 0) with margin larger than the evaluation
    error; otherwise a sample landing in the closed target gives
    ``sampled_present`` and the rest stay ``sampled_absent``.
    """
    if mode not in ("certified", "sampled"):
        raise ConfigError(f"mode must be 'certified' or 'sampled', got {mode!r}")
    lift = dec.lift
    k_eff = lift.spec.k_dehn * lift.n0
    bx0, by0, bx1, by1 = dec.x0, dec.y0, dec.x1, dec.y1
    order = np.argsort(by0, kind="stable")
    sorted_y0 = by0[order]
    max_h = float(np.max(by1 - by0))
    edges: list[Edge] = []

    for i in range(len(dec)):
        x0, y0, x1, y1 = bx0[i], by0[i], bx1[i], by1[i]
        if dec.kind[i] == FINE:
            sx, sy = 4, 4
            px, py = _source_samples(x0, y0, x1, y1, fine_samples, fine_samples)
        else:
            sx = 4
            sy = int(min(8192, max(4, math.ceil(4 * (y1 - y0) * dec.N * k_eff))))
            px, py = _source_samples(x0, y0, x1, y1, 8, 2 * sy)
        E0, E1, E2, E3 = lift.enclosure(x0, y0, x1, y1)
        lo = np.searchsorted(sorted_y0, E1 - max_h, side="left")
        hi = np.searchsorted(sorted_y0, E3, side="right")
        cand = order[lo:hi]
        cand = cand[(by1[cand] >= E1) & (by0[cand] <= E3)]
        if cand.size == 0:
            continue
        s_lo = np.ceil(E0 - bx1[cand]).astype(np.int64)
        s_hi = np.floor(E2 - bx0[cand]).astype(np.int64)
        keep = s_lo <= s_hi
        cand, s_lo, s_hi = cand[keep], s_lo[keep], s_hi[keep]
        if cand.size == 0:
            continue
        reps = s_hi - s_lo + 1
        cj = np.repeat(cand, reps)
        cs = np.repeat(s_lo, reps) + (np.arange(reps.sum()) - np.repeat(np.cumsum(reps) - reps, reps))

        ux = x0 + (x1 - x0) * np.arange(sx + 1) / sx
        uy = y0 + (y1 - y0) * np.arange(sy + 1) / sy
        gx0, gy0 = np.meshgrid(ux[:-1], uy[:-1], indexing="ij")
        gx1, gy1 = np.meshgrid(ux[1:], uy[1:], indexing="ij")
        e0, e1, e2, e3 = lift.enclosure(gx0.ravel(), gy0.ravel(), gx1.ravel(), gy1.ravel())

        tx0, ty0 = bx0[cj] + cs, by0[cj]
        tx1, ty1 = bx1[cj] + cs, by1[cj]
        gx, gy = lift(px, py)
        margin = eval_margin(gx, gy)
        for c in range(cj.size):
            j, s = int(cj[c]), int(cs[c])
            meets = np.any((e0 <= tx1[c]) & (e2 >= tx0[c]) & (e1 <= ty1[c]) & (e3 >= ty0[c]))
            if mode == "certified" and not meets:
                edges.append(Edge(i, j, s, CERTIFIED_ABSENT))
                continue
            if mode == "certified":
                inside = ((gx > tx0[c] + margin) & (gx < tx1[c] - margin)
                          & (gy > ty0[c] + margin) & (gy < ty1[c] - margin))
                hit = np.flatnonzero(inside)
                if hit.size:
                    w = int(hit[0])
                    edges.append(Edge(i, j, s, CERTIFIED_PRESENT, (float(px[w]), float(py[w]))))
                    continue
            closed = (gx >= tx0[c]) & (gx <= tx1[c]) & (gy >= ty0[c]) & (gy <= ty1[c])
            hit = np.flatnonzero(closed)
            if hit.size:
                w = int(hit[0])
                edges.append(Edge(i, j, s, SAMPLED_PRESENT, (float(px[w]), float(py[w]))))
            elif mode == "certified":
                edges.append(Edge(i, j, s, SAMPLED_ABSENT))

    graph = TransitionGraph(len(dec), [str(s) for s in dec.status], edges, mode,
                            suppressed=dec.has_not_free, decomposition=dec)
    graph.k_crit_estimate = estimate_k_crit(graph)
    return graph


def _final_run_start(present: set[int]) -> int | None:
    # lower end of the last run of consecutive integers in ``present``
    if not present:
        return None
    d = max(present)
    while d - 1 in present:
        d -= 1
    return d


def estimate_k_crit(graph: TransitionGraph) -> int | None:
    """Smallest K with strip-to-strip certified edges for every offset in the final run.

    For upper strips the offsets are m - n (images drift right), for lower
    strips n - m. Truncating the strips at a finite depth bounds the
    offsets from above, so K is read off the last contiguous run of present
    offsets; None when some strip has no such edge.
    """
    dec = graph.decomposition
    if dec is None or graph.mode != "certified":
        return None
    N = dec.N
    offsets: dict[tuple[str, int], set[int]] = {}
    for kind in (UPPER_STRIP, LOWER_STRIP):
        for n in range(N):
            offsets[(kind, n)] = set()
    for e in graph.edges:
        if e.label != CERTIFIED_PRESENT:
            continue
        ks, kd = dec.kind[e.src], dec.kind[e.dst]
        if ks != kd or ks == FINE:
            continue
        n = int(dec.strip_index[e.src])
        m = int(dec.strip_index[e.dst]) + e.shift * N
        offsets[(ks, n)].add(m - n if ks == UPPER_STRIP else n - m)
    starts = [_final_run_start(p) for p in offsets.values()]
    if any(s is None for s in starts):
        return None
    return max(starts)


@dataclass
class ChainCertificate:
    nodes: list[int]
    shifts: list[int]
    witnesses: list[tuple[float, float] | None]
    conclusion: str

    @property
    def total_shift(self) -> int:
        return int(sum(self.shifts))

    def __len__(self) -> int:
        return len(self.nodes)

    def as_text(self) -> str:
        lines = ["closed chain of certified-free bricks",
                 f"length {len(self)}", f"total_shift {self.total_shift}"]
        for a, s, w in zip(self.nodes, self.shifts, self.witnesses):
            wt = "-" if w is None else f"{w[0]!r} {w[1]!r}"
            lines.append(f"brick {a} shift {s:+d} witness {wt}")
        lines.append(f"conclusion: {self.conclusion}")
        return "\n".join(lines) + "\n"


def _best_edges(edges: list[Edge]):
    best_max: dict[tuple[int, int], Edge] = {}
    best_min: dict[tuple[int, int], Edge] = {}
    for e in edges:
        key = (e.src, e.dst)
        if key not in best_max or e.shift > best_max[key].shift:
            best_max[key] = e
        if key not in best_min or e.shift < best_min[key].shift:
            best_min[key] = e
    return best_max, best_min


def _signed_cycle(nodes, table, sign: int) -> list[Edge] | None:
    # a simple cycle whose shift sum has the given sign (>= 0 for +1, <= 0 for -1):
    # with w = sign' * (L+1) * s - 1 a negative cycle forces that sign
    L = len(nodes)
    G = nx.DiGraph()
    G.add_nodes_from(nodes)
    for (u, v), e in table.items():
        G.add_edge(u, v, w=-sign * (L + 1) * e.shift - 1)
    try:
        cyc = nx.find_negative_cycle(G, next(iter(nodes)), weight="w")
    except nx.NetworkXError:
        return None
    path = [table[(u, v)] for u, v in zip(cyc[:-1], cyc[1:])]
    total = sum(e.shift for e in path)
    if sign * total < 0:
        raise InconclusiveError("cycle search returned a cycle of the wrong sign")
    return path


def _rotate_to(cycle: list[Edge], node: int) -> list[Edge]:
    i = next(i for i, e in enumerate(cycle) if e.src == node)
    return cycle[i:] + cycle[:i]


def find_closed_chain(graph: TransitionGraph, max_length: int = 1_000_000) -> ChainCertificate | None:
    """Search for a closed chain with zero total shift over certified edges.

    Inside a strongly connected component a zero-shift closed walk exists
    exactly when the component has a cycle with shift sum >= 0 and one with
    shift sum <= 0 (combine q copies of a +p cycle with p copies of a -q
    cycle). Both conditions are decided by negative-cycle detection, so the
    answer is exact for the finite graph. InconclusiveError is raised when
    the combined walk would exceed ``max_length``.
    """
    if graph.mode != "certified":
        warnings.warn("closed-chain certificates require a certified-mode graph", stacklevel=2)
        return None
    if graph.suppressed:
        warnings.warn("decomposition has bricks that are not free; chain conclusions suppressed",
                      stacklevel=2)
        return None
    edges = graph.certified_edges()
    G = nx.DiGraph()
    G.add_nodes_from(range(graph.n_nodes))
    G.add_edges_from((e.src, e.dst) for e in edges)
    for comp in sorted(nx.strongly_connected_components(G), key=min):
        if len(comp) == 1:
            (u,) = comp
            if not G.has_edge(u, u):
                continue
        inner = [e for e in edges if e.src in comp and e.dst in comp]
        best_max, best_min = _best_edges(inner)
        pos = _signed_cycle(comp, best_max, +1)
        if pos is None:
            continue
        neg = _signed_cycle(comp, best_min, -1)
        if neg is None:
            continue
        walk = _zero_walk(comp, inner, pos, neg, max_length)
        return ChainCertificate(
            nodes=[e.src for e in walk], shifts=[e.shift for e in walk],
            witnesses=[e.witness for e in walk],
            conclusion=_conclusion(graph),
        )
    return None


def _zero_walk(comp, inner: list[Edge], pos: list[Edge], neg: list[Edge], max_length: int) -> list[Edge]:
    P = sum(e.shift for e in pos)
    Q = -sum(e.shift for e in neg)
    if P == 0:
        return pos
    if Q == 0:
        return neg
    G = nx.DiGraph()
    first: dict[tuple[int, int], Edge] = {}
    for e in inner:
        first.setdefault((e.src, e.dst), e)
        G.add_edge(e.src, e.dst)
    a, b = pos[0].src, neg[0].src
    to_b = [first[(u, v)] for u, v in zip(*(lambda p: (p[:-1], p[1:]))(nx.shortest_path(G, a, b)))]
    to_a = [first[(u, v)] for u, v in zip(*(lambda p: (p[:-1], p[1:]))(nx.shortest_path(G, b, a)))]
    s = sum(e.shift for e in to_b) + sum(e.shift for e in to_a)
    r = max(1, s // Q + 1)
    minus = to_b + _rotate_to(neg, b) * r + to_a
    Qm = -sum(e.shift for e in minus)
    g = math.gcd(P, Qm)
    reps_pos, reps_neg = Qm // g, P // g
    length = reps_pos * len(pos) + reps_neg * len(minus)
    if length > max_length:
        raise InconclusiveError(f"zero-shift closed walk needs {length} steps (> {max_length})")
    walk = pos * reps_pos + minus * reps_neg
    assert sum(e.shift for e in walk) == 0
    return walk


def _conclusion(graph: TransitionGraph) -> str:
    dec = graph.decomposition
    if dec is None:
        return "g has a fixed point"
    n0, m0 = dec.lift.n0, dec.lift.m0
    return (f"g = F^{n0} - (0, {m0}) has a fixed point, hence {m0}/{n0} lies in the "
            "vertical rotation set")


def verify_witnesses(graph: TransitionGraph, cert: ChainCertificate | None = None) -> bool:
    """Re-evaluate stored witnesses of certified edges (or of one certificate)."""
    dec = graph.decomposition
    if dec is None:
        return True
    items = graph.certified_edges() if cert is None else [
        Edge(a, b, s, CERTIFIED_PRESENT, w)
        for a, b, s, w in zip(cert.nodes, cert.nodes[1:] + cert.nodes[:1], cert.shifts, cert.witnesses)]
    for e in items:
        wx, wy = e.witness
        if not (dec.x0[e.src] < wx < dec.x1[e.src] and dec.y0[e.src] < wy < dec.y1[e.src]):
            return False
        gx, gy = dec.lift(wx, wy)
        m = eval_margin(gx, gy)
        if not (dec.x0[e.dst] + e.shift + m < gx < dec.x1[e.dst] + e.shift - m
                and dec.y0[e.dst] + m < gy < dec.y1[e.dst] - m):
            return False
    return True
