import numpy as np
import pytest

from perc3d import (
    GENERATOR_ID,
    make_block_geometry,
    make_box,
    make_rect_geometry,
    sample_block,
    sample_box,
    sample_rect,
)
from perc3d.errors import ContractError, DomainError, InvalidGeometryError


def test_box_basics():
    b = make_box(3, 4, 5, "bond")
    assert b.n_vertices == 60
    assert b.n_slots == 180
    assert make_box(3, 4, 5, "site").n_slots == 60


def test_vertex_index_round_trip():
    b = make_box(3, 4, 5, "site")
    for v in range(b.n_vertices):
        assert b.vertex_index(*b.vertex_coords(v)) == v
    x, y, z = b.coord_arrays()
    assert b.vertex_index(x[17], y[17], z[17]) == 17


def test_box_validation():
    with pytest.raises(InvalidGeometryError):
        make_box(0, 4, 5, "bond")
    with pytest.raises(InvalidGeometryError):
        make_box(3, 4.5, 5, "bond")
    with pytest.raises(DomainError):
        make_box(3, 4, 5, "edge")


def test_valid_slot_mask_counts():
    b = make_box(3, 4, 5, "bond")
    mask = b.valid_slot_mask()
    # bonds leaving the box in +x, +y, +z are padding
    expected_open = 2 * 4 * 5 + 3 * 3 * 5 + 3 * 4 * 4
    assert mask.sum() == expected_open
    assert make_box(3, 4, 5, "site").valid_slot_mask().all()


def test_block_geometry_counts():
    g = make_block_geometry(8, "bond")
    assert g.n_vertices == 512
    assert g.centre_count == 4 ** 3
    assert g.surface_count == 8 ** 3 - 6 ** 3
    assert g.centre_mask().sum() == g.centre_count
    assert g.surface_mask().sum() == g.surface_count
    # centre and surface never touch for valid L
    assert not (g.centre_mask() & g.surface_mask()).any()


def test_block_geometry_validation():
    for bad in (7, 10, 4, -8, 8.0):
        with pytest.raises(InvalidGeometryError):
            make_block_geometry(bad, "bond")
    with pytest.raises(DomainError):
        make_block_geometry(8, "both")


def test_rect_halves_partition():
    r = make_rect_geometry(4, "site")
    u = r.half_mask("u")
    v = r.half_mask("v")
    assert u.sum() == v.sum() == 4 ** 3
    assert (u ^ v).all()
    with pytest.raises(DomainError):
        r.half_mask("w")
    with pytest.raises(InvalidGeometryError):
        make_rect_geometry(1, "site")


def test_sampling_deterministic():
    g = make_block_geometry(8, "bond")
    a = sample_block(g, 0.3, 42)
    b = sample_block(g, 0.3, 42)
    c = sample_block(g, 0.3, 43)
    assert np.array_equal(a.open_slots(), b.open_slots())
    assert not np.array_equal(a.open_slots(), c.open_slots())
    assert a.seed == 42 and a.p == 0.3


def test_sampling_extremes():
    g = make_block_geometry(8, "site")
    assert sample_block(g, 0, 7).open_count() == 0
    assert sample_block(g, 1, 7).open_count() == g.n_vertices
    b = make_box(4, 4, 4, "bond")
    full = sample_box(b, 1, 7)
    # p=1 opens exactly the in-range bonds
    assert full.open_count() == b.valid_slot_mask().sum()


def test_threshold_coupling_inclusion():
    g = make_block_geometry(8, "bond")
    for seed in range(25):
        lo = sample_block(g, 0.2, seed).open_slots()
        hi = sample_block(g, 0.45, seed).open_slots()
        assert not (lo & ~hi).any()


def test_sampling_mean_tracks_p():
    r = make_rect_geometry(8, "site")
    counts = [sample_rect(r, 0.3, s).open_count() for s in range(30)]
    n = r.n_vertices
    mean = np.mean(counts) / n
    sigma = np.sqrt(0.3 * 0.7 / (n * len(counts)))
    assert abs(mean - 0.3) < 5 * sigma


def test_sampling_validation():
    g = make_block_geometry(8, "bond")
    with pytest.raises(DomainError):
        sample_block(g, 1.2, 0)
    with pytest.raises(DomainError):
        sample_block(g, 0.3, -1)
    with pytest.raises(DomainError):
        sample_block(g, 0.3, 2 ** 64)
    with pytest.raises(ContractError):
        sample_block(make_box(4, 4, 4, "bond"), 0.3, 0)


def test_generator_identity():
    assert GENERATOR_ID == "numpy-pcg64"
