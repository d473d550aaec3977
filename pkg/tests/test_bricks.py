import math
import warnings
from collections import defaultdict

import numpy as np
import pytest
from shapely.geometry import box

from dehnrot import FixedPointSuspected, InconclusiveError, MapSpec
from dehnrot.bricks import (CERTIFIED_ABSENT, CERTIFIED_FREE, CERTIFIED_PRESENT, FINE, LOWER_STRIP,
                            SAMPLED_PRESENT, UPPER_STRIP, Edge, PowerLift, TransitionGraph,
                            build_free_decomposition, build_transition_graph, eval_margin,
                            find_closed_chain, verify_witnesses)

from oracles import strip_oracle

_CACHE = {}


def rigid(k):
    """Decomposition and graph for g(x, y) = (x + k y, y - 1)."""
    if k not in _CACHE:
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            dec = build_free_decomposition(MapSpec(k), n0=1, m0=1)
        _CACHE[k] = (dec, build_transition_graph(dec))
    return _CACHE[k]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rigid_decomposition_all_free(k):
    dec, _ = rigid(k)
    assert dec.all_certified_free
    assert not dec.suspects
    fine = dec.kind == FINE
    assert np.all(dec.y1[fine] - dec.y0[fine] < 1)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_decomposition_tiles_band(k):
    dec, _ = rigid(k)
    fine = dec.kind == FINE
    area = np.sum((dec.x1[fine] - dec.x0[fine]) * (dec.y1[fine] - dec.y0[fine]))
    assert area == pytest.approx(2 * dec.Y, rel=1e-12)
    polys = [box(a, b, c, d) for a, b, c, d in zip(dec.x0[fine], dec.y0[fine], dec.x1[fine], dec.y1[fine])]
    rng = np.random.default_rng(0)
    for i in rng.choice(len(polys), 40, replace=False):
        for j in range(len(polys)):
            if i != j:
                assert polys[i].intersection(polys[j]).area <= 1e-12
    for kind in (UPPER_STRIP, LOWER_STRIP):
        sel = dec.kind == kind
        assert np.sum(dec.x1[sel] - dec.x0[sel]) == pytest.approx(1.0)


def test_strip_zero_is_free():
    # exact image of F_0^+ under (x + y, y - 1) is a parallelogram lying at
    # heights [Y - 1, D - 1] shifted right by at least Y; its bounding box misses F_0^+
    dec, _ = rigid(1)
    i = np.flatnonzero((dec.kind == UPPER_STRIP) & (dec.strip_index == 0))[0]
    x0, y0, x1 = dec.x0[i], dec.y0[i], dec.x1[i]
    assert x0 + y0 > x1  # image left edge already right of the strip
    assert dec.status[i] == CERTIFIED_FREE


@pytest.mark.parametrize("spec,n0,m0", [
    (MapSpec(1), 1, 1),
    (MapSpec(2, ((1, 0.3, 0.0),), ((1, 0.2, 0.0),)), 1, 1),
    (MapSpec(1, (), ((1, 0.1, 0.05),), 0.5), 2, 0),
])
def test_freeness_soundness(spec, n0, m0):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FixedPointSuspected)
        dec = build_free_decomposition(spec, n0, m0)
    lift = dec.lift
    rng = np.random.default_rng(1)
    free = np.flatnonzero(dec.status == CERTIFIED_FREE)
    assert free.size > 0
    for i in free:
        px = dec.x0[i] + (dec.x1[i] - dec.x0[i]) * rng.random(1000)
        py = dec.y0[i] + (dec.y1[i] - dec.y0[i]) * rng.random(1000)
        gx, gy = lift(px, py)
        inside = (gx >= dec.x0[i]) & (gx <= dec.x1[i]) & (gy >= dec.y0[i]) & (gy <= dec.y1[i])
        assert not inside.any()


@pytest.mark.parametrize("k", [1, 2, 3])
def test_certified_witnesses_replay(k):
    _, graph = rigid(k)
    assert graph.certified_edges()
    assert verify_witnesses(graph)


def test_witnesses_replay_on_perturbed_map():
    dec = build_free_decomposition(MapSpec(2, ((1, 0.3, 0.0),), ((1, 0.2, 0.0),)), 1, 1)
    graph = build_transition_graph(dec)
    assert verify_witnesses(graph)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_label_exclusivity(k):
    _, graph = rigid(k)
    labels = defaultdict(set)
    for e in graph.edges:
        labels[(e.src, e.dst, e.shift)].add(e.label)
    assert all(len(v) == 1 for v in labels.values())


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rigid_edges_go_down(k):
    dec, graph = rigid(k)
    for e in graph.edges:
        if e.label not in (CERTIFIED_PRESENT, SAMPLED_PRESENT):
            continue
        if dec.kind[e.src] == FINE:
            assert dec.y0[e.dst] < dec.y0[e.src]
        else:
            assert dec.y0[e.dst] <= dec.y0[e.src]


@pytest.mark.parametrize("k", [1, 2])
def test_translation_invariance_spot_check(k):
    dec, graph = rigid(k)
    rng = np.random.default_rng(k)
    edges = graph.certified_edges()
    for idx in rng.choice(len(edges), 50, replace=False):
        e = edges[idx]
        for shift in (-2, 1, 3):
            gx, gy = dec.lift(e.witness[0] + shift, e.witness[1])
            m = eval_margin(gx, gy)
            assert dec.x0[e.dst] + e.shift + shift + m < gx < dec.x1[e.dst] + e.shift + shift - m
            assert dec.y0[e.dst] + m < gy < dec.y1[e.dst] - m


@pytest.mark.parametrize("k", [1, 2, 3])
def test_k_crit_matches_strip_oracle(k):
    dec, graph = rigid(k)
    assert graph.k_crit_estimate is not None
    assert graph.k_crit_estimate == strip_oracle(dec)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rigid_maps_have_no_closed_chain(k):
    _, graph = rigid(k)
    assert find_closed_chain(graph) is None


def _fixture(edges, n=2, status=CERTIFIED_FREE, mode="certified"):
    return TransitionGraph(n, [status] * n, edges, mode)


def test_fixture_two_cycle():
    graph = _fixture([Edge(0, 1, 1, CERTIFIED_PRESENT), Edge(1, 0, -1, CERTIFIED_PRESENT)])
    cert = find_closed_chain(graph)
    assert cert is not None
    assert cert.nodes == [0, 1] and cert.shifts == [1, -1] and cert.total_shift == 0
    assert "fixed point" in cert.conclusion
    assert "total_shift 0" in cert.as_text()


def test_fixture_combined_cycles():
    # only +2 (self-loop at A) and -3 (A -> B -> A) cycles: three of one, two of the other
    edges = [Edge(0, 0, 2, CERTIFIED_PRESENT), Edge(0, 1, 0, CERTIFIED_PRESENT),
             Edge(1, 0, -3, CERTIFIED_PRESENT), Edge(1, 1, 5, CERTIFIED_ABSENT)]
    cert = find_closed_chain(_fixture(edges))
    assert cert is not None and cert.total_shift == 0
    allowed = {(e.src, e.dst, e.shift) for e in edges if e.label == CERTIFIED_PRESENT}
    nxt = cert.nodes[1:] + cert.nodes[:1]
    assert all((a, b, s) in allowed for a, b, s in zip(cert.nodes, nxt, cert.shifts))


def test_fixture_one_signed_cycles_only():
    edges = [Edge(0, 1, 1, CERTIFIED_PRESENT), Edge(1, 0, 0, CERTIFIED_PRESENT),
             Edge(1, 1, 2, CERTIFIED_PRESENT)]
    assert find_closed_chain(_fixture(edges)) is None


def test_fixture_ignores_uncertified_labels_and_bricks():
    edges = [Edge(0, 1, 1, SAMPLED_PRESENT), Edge(1, 0, -1, CERTIFIED_PRESENT)]
    assert find_closed_chain(_fixture(edges)) is None
    edges = [Edge(0, 1, 1, CERTIFIED_PRESENT), Edge(1, 0, -1, CERTIFIED_PRESENT)]
    assert find_closed_chain(_fixture(edges, status="free_sampled")) is None


def test_fixture_walk_length_limit():
    edges = [Edge(0, 0, 97, CERTIFIED_PRESENT), Edge(0, 1, 0, CERTIFIED_PRESENT),
             Edge(1, 0, -89, CERTIFIED_PRESENT)]
    with pytest.raises(InconclusiveError):
        find_closed_chain(_fixture(edges), max_length=50)
    cert = find_closed_chain(_fixture(edges))
    assert cert.total_shift == 0


def test_sampled_mode_gate():
    dec, _ = rigid(1)
    graph = build_transition_graph(dec, "sampled")
    assert {e.label for e in graph.edges} == {SAMPLED_PRESENT}
    assert graph.k_crit_estimate is None
    with pytest.warns(UserWarning, match="certified"):
        assert find_closed_chain(graph) is None
    with pytest.warns(UserWarning):
        assert find_closed_chain(_fixture([Edge(0, 0, 0, CERTIFIED_PRESENT)], 1, mode="sampled")) is None


def test_fixed_point_suspected_near_origin():
    spec = MapSpec(1, (), ((1, 0.5, 0.0),))
    with pytest.warns(FixedPointSuspected) as record:
        dec = build_free_decomposition(spec, 1, 0, min_diameter=1e-3)
    locs = record[0].message.locations
    dist = [math.hypot(min(x % 1, 1 - x % 1), y) for x, y in locs]
    assert min(dist) <= dec.min_diameter
    graph = build_transition_graph(dec)
    assert graph.suppressed
    with pytest.warns(UserWarning, match="suppressed"):
        assert find_closed_chain(graph) is None


def test_power_lift_enclosure_contains_samples():
    spec = MapSpec(2, ((1, 0.3, 0.1),), ((1, 0.5, 0.0), (2, 0.1, 0.2)), 0.3)
    lift = PowerLift(spec, 3, 1)
    rng = np.random.default_rng(4)
    for _ in range(50):
        x0, y0 = rng.uniform(-1, 1), rng.uniform(-5, 5)
        w, h = rng.uniform(0, 0.1, 2)
        X0, Y0, X1, Y1 = lift.enclosure(np.array([x0]), np.array([y0]), np.array([x0 + w]), np.array([y0 + h]))
        px = x0 + w * rng.random(500)
        py = y0 + h * rng.random(500)
        gx, gy = lift(px, py)
        assert np.all((gx >= X0) & (gx <= X1) & (gy >= Y0) & (gy <= Y1))


def test_power_lift_jacobian():
    spec = MapSpec(1, (), ((1, 0.5, 0.0),))
    lift = PowerLift(spec, 2, 0)
    z = np.array([0.3, 0.2])
    h = 1e-6
    fd = np.column_stack([(np.array(lift(*(z + h * e))) - np.array(lift(*(z - h * e)))) / (2 * h)
                          for e in np.eye(2)])
    assert np.allclose(lift.jacobian(*z), fd, atol=1e-6)


def test_csv_outputs(tmp_path):
    dec, graph = rigid(1)
    dec.write_csv(tmp_path / "b.csv")
    graph.write_csv(tmp_path / "e.csv")
    rows = (tmp_path / "b.csv").read_text().splitlines()
    assert rows[0] == "id,x0,y0,x1,y1,status" and len(rows) == len(dec) + 1
    assert (tmp_path / "e.csv").read_text().splitlines()[0] == "src,dst,shift,label"
    assert CERTIFIED_ABSENT in {e.label for e in graph.edges}
