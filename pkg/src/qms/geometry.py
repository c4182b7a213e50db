"""Finite square atom arrays in units of the wavelength."""
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidArgument


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticeGeometry:
    """Atom positions (in λ) of an ``nx`` × ``ny`` square array in the xy plane.

    ``positions`` holds every lattice site, ``active`` marks the occupied ones.
    Site ``(i, j)`` is stored at flat index ``i * ny + j``.
    """

    positions: np.ndarray
    spacing: float
    nx: int
    ny: int
    active: np.ndarray
    dipole_axis: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    defect_seed: int | None = None
    defect_fraction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "positions", _frozen(self.positions, float))
        object.__setattr__(self, "active", _frozen(self.active, bool))
        axis = np.asarray(self.dipole_axis, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0 or abs(axis[2]) > 1e-12:
            raise InvalidArgument("dipole_axis must be a non-zero in-plane vector")
        object.__setattr__(self, "dipole_axis", _frozen(axis / norm, float))

    @property
    def n_sites(self):
        return self.nx * self.ny

    @property
    def n_active(self):
        return int(self.active.sum())

    @property
    def active_positions(self):
        return self.positions[self.active]

    @property
    def extent(self):
        """Side lengths (x, y) of the occupied bounding box of the full lattice."""
        return ((self.nx - 1) * self.spacing, (self.ny - 1) * self.spacing)

    def grid_index(self):
        """Integer (i, j) lattice coordinates for every site."""
        i, j = np.divmod(np.arange(self.n_sites), self.ny)
        return i, j

    def to_record(self, include_positions=False):
        rec = {
            "nx": self.nx,
            "ny": self.ny,
            "spacing": self.spacing,
            "defect_seed": self.defect_seed,
            "defect_fraction": self.defect_fraction,
            "dipole_axis": self.dipole_axis.tolist(),
            "missing": np.flatnonzero(~self.active).tolist(),
        }
        if include_positions:
            rec["positions"] = self.active_positions.tolist()
        return rec

    @classmethod
    def from_record(cls, rec):
        geom = build_square_lattice(rec["nx"], rec["ny"], rec["spacing"],
                                    dipole_axis=rec.get("dipole_axis", (1.0, 0.0, 0.0)))
        active = np.ones(geom.n_sites, dtype=bool)
        active[np.asarray(rec.get("missing", []), dtype=int)] = False
        return replace(geom, active=active, defect_seed=rec.get("defect_seed"),
                       defect_fraction=rec.get("defect_fraction", 0.0))


def build_square_lattice(nx, ny, spacing, dipole_axis=(1.0, 0.0, 0.0)):
    """Centered ``nx`` × ``ny`` square lattice with lattice constant ``spacing`` (a/λ)."""
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise InvalidArgument(f"atom counts must be positive integers, got ({nx}, {ny})")
    if not 0.0 < spacing < 1.0:
        raise InvalidArgument(f"spacing must lie in (0, 1) wavelengths, got {spacing}")
    nx, ny = int(nx), int(ny)
    x = (np.arange(nx) - (nx - 1) / 2.0) * spacing
    y = (np.arange(ny) - (ny - 1) / 2.0) * spacing
    X, Y = np.meshgrid(x, y, indexing="ij")
    positions = np.stack([X.ravel(), Y.ravel(), np.zeros(nx * ny)], axis=1)
    return LatticeGeometry(positions=positions, spacing=float(spacing), nx=nx, ny=ny,
                           active=np.ones(nx * ny, dtype=bool), dipole_axis=dipole_axis)


def defect_count(n_sites, fraction):
    # Python's round() is round-half-to-even
    return int(round(fraction * n_sites))


def apply_defects(geom, fraction, seed):
    """Remove ``round(fraction * N)`` atoms chosen uniformly from the occupied sites.

    The choice is a deterministic function of ``seed``; all sites, including
    the array center, are eligible.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidArgument(f"defect fraction must lie in [0, 1], got {fraction}")
    n_remove = defect_count(geom.n_sites, fraction)
    occupied = np.flatnonzero(geom.active)
    if n_remove > len(occupied):
        raise InvalidArgument("cannot remove more atoms than are present")
    active = geom.active.copy()
    if n_remove:
        rng = np.random.Generator(np.random.PCG64(seed))
        active[rng.choice(occupied, size=n_remove, replace=False)] = False
    return replace(geom, active=active, defect_seed=seed, defect_fraction=float(fraction))
