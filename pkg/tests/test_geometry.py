import numpy as np
import pytest

from qms.errors import InvalidArgument
from qms.geometry import LatticeGeometry, apply_defects, build_square_lattice, defect_count


def test_square_lattice_is_centered_with_spacing():
    g = build_square_lattice(5, 3, 0.2)
    assert g.n_sites == 15 and g.n_active == 15
    np.testing.assert_allclose(g.positions.mean(axis=0), 0, atol=1e-15)
    xs = np.unique(np.round(g.positions[:, 0], 12))
    np.testing.assert_allclose(np.diff(xs), 0.2)
    assert g.extent == pytest.approx((0.8, 0.4))
    np.testing.assert_array_equal(g.positions[:, 2], 0)


def test_positions_are_read_only():
    g = build_square_lattice(3, 3, 0.2)
    with pytest.raises(ValueError):
        g.positions[0, 0] = 1.0


@pytest.mark.parametrize("bad", [(0, 3, 0.2), (3, 3, 0.0), (3, 3, -1.0)])
def test_invalid_lattice(bad):
    with pytest.raises(InvalidArgument):
        build_square_lattice(*bad)


def test_dipole_axis_must_be_in_plane():
    with pytest.raises(InvalidArgument):
        build_square_lattice(3, 3, 0.2, dipole_axis=(0, 0, 1))


def test_defect_count_rounds_half_to_even():
    assert defect_count(529, 0.02) == 11
    assert defect_count(10, 0.25) == 2
    assert defect_count(10, 0.35) == 4


def test_apply_defects_is_deterministic_and_exact():
    g = build_square_lattice(23, 23, 0.2)
    a = apply_defects(g, 0.1, seed=42)
    b = apply_defects(g, 0.1, seed=42)
    c = apply_defects(g, 0.1, seed=43)
    assert g.n_sites - a.n_active == defect_count(529, 0.1)
    np.testing.assert_array_equal(a.active, b.active)
    assert not np.array_equal(a.active, c.active)
    assert a.defect_seed == 42 and a.defect_fraction == 0.1


def test_apply_defects_limits():
    g = build_square_lattice(4, 4, 0.2)
    assert apply_defects(g, 0.0, 1).n_active == 16
    assert apply_defects(g, 1.0, 1).n_active == 0
    with pytest.raises(InvalidArgument):
        apply_defects(g, 1.5, 1)


def test_record_round_trip():
    g = apply_defects(build_square_lattice(6, 4, 0.25), 0.2, seed=5)
    rec = g.to_record(include_positions=True)
    back = LatticeGeometry.from_record(rec)
    np.testing.assert_array_equal(back.active, g.active)
    np.testing.assert_allclose(back.positions, g.positions)
    assert back.spacing == g.spacing and back.defect_seed == 5
