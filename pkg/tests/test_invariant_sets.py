import numpy as np
import pytest
from scipy import ndimage

from dehnrot import ConfigError, EmptyMaskError, MapSpec
from dehnrot.invariant_sets import (BasinMask, compute_basin_mask, compute_height_profile,
                                    unbounded_components)
from dehnrot.mapmodel import forward

from conftest import chirikov


def test_pure_twist_lower_mask_is_half_plane():
    mask = compute_basin_mask(MapSpec(1), "lower", 50, (-2.0, 0.5), (32, 250))
    expected = mask.y_centers <= 0
    assert np.array_equal(mask.cells, np.broadcast_to(expected[:, None], mask.cells.shape))


def test_pure_twist_profiles():
    lower = compute_basin_mask(MapSpec(1), "lower", 50, (-2.0, 0.5), (32, 250))
    prof = compute_height_profile(lower, 3.0)
    assert prof.defined_everywhere and prof.oscillation == 0
    assert np.all(np.abs(prof.values) <= prof.cell_height)
    assert np.all(prof.values <= 0)
    assert prof.within_bound
    upper = compute_basin_mask(MapSpec(1), "upper", 50, (-0.5, 2.0), (32, 250))
    nu = compute_height_profile(upper)
    assert nu.oscillation == 0 and np.all(np.abs(nu.values) <= nu.cell_height)
    assert np.all(nu.values >= 0)


def test_drift_empties_lower_mask():
    ny, y_min = 64, -2.0
    mask = compute_basin_mask(MapSpec(1, v_const=0.25), "lower", int(4 * ny * abs(y_min)),
                              (y_min, 0.5), (16, ny))
    assert not mask.cells.any()
    with pytest.raises(EmptyMaskError):
        compute_height_profile(mask)


def test_subcritical_chirikov_mask_spans_columns():
    mask = compute_basin_mask(chirikov(0.5), "lower", 2000, (-2.0, 0.5), (128, 128))
    assert mask.cells.any(axis=0).all()
    prof = compute_height_profile(mask, 3.0)
    assert prof.defined_everywhere
    assert np.all(prof.values <= 0)


def test_horizon_monotonicity():
    spec = chirikov(1.5)
    masks = [compute_basin_mask(spec, "lower", h, (-2.0, 0.5), (64, 64)) for h in (10, 100, 1000)]
    for a, b in zip(masks, masks[1:]):
        assert not np.any(b.cells & ~a.cells)
    # truncating a long run reproduces the short run exactly
    assert np.array_equal(masks[2].at_horizon(100).cells, masks[1].cells)
    assert np.array_equal(masks[2].at_horizon(10).cells, masks[0].cells)


def test_positive_invariance_proxy():
    # cell-centre masks only approximate the confined set; the image of a true
    # centre must land in a true cell of the shorter-horizon mask or next to one
    spec = chirikov(0.5)
    h = 200
    mask = compute_basin_mask(spec, "lower", h, (-3.0, 0.5), (128, 128))
    prev = np.pad(mask.at_horizon(h - 1).cells, ((0, 0), (1, 1)), mode="wrap")
    grown = ndimage.binary_dilation(prev, np.ones((3, 3), bool))[:, 1:-1]
    rows, cols = np.nonzero(mask.cells)
    fx, fy = forward(spec, mask.x_centers[cols], mask.y_centers[rows])
    r, c = mask.locate(fx, fy)
    inside = r >= 0
    assert inside.sum() > 0.5 * r.size
    assert np.all(grown[r[inside], c[inside]])


def test_two_sided_subset_of_one_sided():
    spec = chirikov(0.9)
    one = compute_basin_mask(spec, "lower", 300, (-2.0, 0.5), (64, 64))
    two = compute_basin_mask(spec, "lower", 300, (-2.0, 0.5), (64, 64), two_sided=True)
    assert not np.any(two.cells & ~one.cells)
    assert two.two_sided


def test_workers_do_not_change_mask():
    spec = chirikov(1.2)
    a = compute_basin_mask(spec, "upper", 200, (-0.5, 2.0), (48, 48), workers=1)
    b = compute_basin_mask(spec, "upper", 200, (-0.5, 2.0), (48, 48), workers=3)
    assert np.array_equal(a.escape, b.escape)


def test_config_errors():
    with pytest.raises(ConfigError):
        compute_basin_mask(MapSpec(1), "lower", 10, (-2.0, -0.5))
    with pytest.raises(ConfigError):
        compute_basin_mask(MapSpec(1), "upper", 10, (0.5, 2.0))
    with pytest.raises(ConfigError):
        compute_basin_mask(MapSpec(1), "lower", -1)
    with pytest.raises(ConfigError):
        compute_basin_mask(MapSpec(1), "sideways", 10, (-1.0, 1.0))


def _mask_from(cells: np.ndarray, sign: str) -> BasinMask:
    escape = np.where(cells, 11, 0)
    return BasinMask("x", sign, -1.0, 0.0, cells.shape[1], cells.shape[0], 10, False, escape)


def test_unbounded_components_keeps_bottom_connected():
    cells = np.zeros((6, 5), bool)
    cells[0:2, :] = True          # touches the bottom row
    cells[4, 1:3] = True          # island
    cells[3:5, 4] = True          # wraps to column 0 of the island? no: separate
    cells[4, 0] = True            # wraps across x = 0 to the column-4 block
    kept = unbounded_components(_mask_from(cells, "lower"))
    assert kept.heuristic
    assert kept.cells[0:2].all()
    assert not kept.cells[3:].any()
    cells[2, 4] = True            # connect the wrapped block to the bottom band
    kept = unbounded_components(_mask_from(cells, "lower"))
    assert kept.cells[4, 0] and kept.cells[4, 1] and kept.cells[3, 4]


def test_unbounded_components_upper_uses_top_row():
    cells = np.zeros((4, 4), bool)
    cells[-1, :] = True
    cells[0, 0] = True
    kept = unbounded_components(_mask_from(cells, "upper"))
    assert kept.cells[-1].all() and not kept.cells[0].any()


def test_profile_partial_columns_and_offset():
    cells = np.zeros((4, 4), bool)
    cells[0, 0] = cells[2, 1] = cells[1, 2] = True
    mask = _mask_from(cells, "lower")
    prof = compute_height_profile(mask, 1.0)
    assert not prof.defined_everywhere
    assert np.isnan(prof.values[3])
    assert prof.oscillation == pytest.approx(0.5)
    top = np.nanmax(prof.values)
    n = prof.translation_offset(3.0, 2.0)
    assert top + n > 3.0 + 2.0 - 1 and np.floor(-top + 5.0) + 1 == n
    shifted = compute_height_profile(mask.shifted(n))
    assert np.nanmax(shifted.values) == pytest.approx(top + n)


def test_pgm_and_csv(tmp_path):
    cells = np.zeros((3, 2), bool)
    cells[0, :] = True
    mask = _mask_from(cells, "lower")
    mask.write_pgm(tmp_path / "m.pgm")
    data = (tmp_path / "m.pgm").read_bytes()
    assert data.startswith(b"P5\n2 3\n255\n")
    assert list(data[-6:]) == [0, 0, 0, 0, 255, 255]  # bottom image row is lowest y
    compute_height_profile(mask).write_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "column,x,value"
