"""Block/rectangle geometry and seeded occupancy sampling.

Vertices of an nx * ny * nz grid are indexed v = x + nx*y + nx*ny*z
(x fastest, then y, then z).  Bond occupancy assigns every vertex three
slots, one per positive axis direction, at slot index 3*v + axis with
axis 0 = +x, 1 = +y, 2 = +z.  Slots whose far endpoint would leave the
grid are padding: a uniform variate is still drawn for them, in slot
order, but they can never be open.  Site occupancy has one slot per
vertex.  This fixed traversal makes samples reproducible and makes the
threshold coupling exact: the same seed compares the same variate
against every p, so the open set at p1 is a subset of the open set at
p2 whenever p1 <= p2.

Randomness comes from numpy's PCG64 seeded through SeedSequence, one
independent stream per trial seed.  Occupancy is stored bit-packed
(little bit order), one bit per slot.
"""

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ContractError, DomainError, InvalidGeometryError

GENERATOR_ID = "numpy-pcg64"
GENERATOR_VERSION = np.__version__

BOND = "bond"
SITE = "site"
_KINDS = (BOND, SITE)


def _check_kind(kind):
    if kind not in _KINDS:
        raise DomainError(f"kind must be 'bond' or 'site', got {kind!r}")


@dataclass(frozen=True)
class Box:
    """A generic nx * ny * nz grid region carrying occupancy of one kind."""

    nx: int
    ny: int
    nz: int
    kind: str

    @property
    def dims(self):
        return (self.nx, self.ny, self.nz)

    @property
    def n_vertices(self) -> int:
        return self.nx * self.ny * self.nz

    @property
    def n_slots(self) -> int:
        if self.kind == BOND:
            return 3 * self.n_vertices
        return self.n_vertices

    @property
    def strides(self):
        # linear index deltas for a +x, +y, +z step
        return (1, self.nx, self.nx * self.ny)

    def vertex_index(self, x: int, y: int, z: int) -> int:
        return x + self.nx * y + self.nx * self.ny * z

    def vertex_coords(self, v: int):
        x = v % self.nx
        y = (v // self.nx) % self.ny
        z = v // (self.nx * self.ny)
        return (x, y, z)

    def coord_arrays(self):
        """Per-vertex coordinate arrays (x, y, z), each of length n_vertices."""
        v = np.arange(self.n_vertices)
        return v % self.nx, (v // self.nx) % self.ny, v // (self.nx * self.ny)

    def valid_slot_mask(self) -> np.ndarray:
        """Boolean mask over slots; padding slots (bond leaving the grid) are False."""
        x, y, z = self.coord_arrays()
        if self.kind == SITE:
            return np.ones(self.n_vertices, dtype=bool)
        mask = np.empty((self.n_vertices, 3), dtype=bool)
        mask[:, 0] = x < self.nx - 1
        mask[:, 1] = y < self.ny - 1
        mask[:, 2] = z < self.nz - 1
        return mask.ravel()


def _check_box(nx, ny, nz, kind):
    _check_kind(kind)
    for n in (nx, ny, nz):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise InvalidGeometryError(f"box dimensions must be positive integers, got {(nx, ny, nz)}")


def make_box(nx: int, ny: int, nz: int, kind: str) -> Box:
    _check_box(nx, ny, nz, kind)
    return Box(int(nx), int(ny), int(nz), kind)


@dataclass(frozen=True)
class BlockGeometry:
    """Cubic simulation block: L vertices per side, centre sub-cube, surface shell.

    The centre region is the axis range [centre_lo, centre_hi) on every
    axis; the surface is every vertex with some coordinate equal to 0 or
    L - 1.  Construction allocates nothing proportional to L, so very
    large blocks are cheap to describe.
    """

    L: int
    kind: str
    centre_lo: int
    centre_hi: int

    @property
    def box(self) -> Box:
        return Box(self.L, self.L, self.L, self.kind)

    @property
    def n_vertices(self) -> int:
        return self.L ** 3

    @property
    def centre_count(self) -> int:
        return (self.centre_hi - self.centre_lo) ** 3

    @property
    def surface_count(self) -> int:
        return self.L ** 3 - (self.L - 2) ** 3

    def centre_mask(self) -> np.ndarray:
        x, y, z = self.box.coord_arrays()
        lo, hi = self.centre_lo, self.centre_hi
        return (x >= lo) & (x < hi) & (y >= lo) & (y < hi) & (z >= lo) & (z < hi)

    def surface_mask(self) -> np.ndarray:
        x, y, z = self.box.coord_arrays()
        e = self.L - 1
        return (x == 0) | (x == e) | (y == 0) | (y == e) | (z == 0) | (z == e)


def make_block_geometry(L: int, kind: str) -> BlockGeometry:
    """Block with centre = middle (L/2)^3 sub-cube and surface = outer shell."""
    _check_kind(kind)
    if not isinstance(L, (int, np.integer)) or L < 8 or L % 4 != 0:
        raise InvalidGeometryError(f"L must be an integer >= 8 divisible by 4, got {L!r}")
    L = int(L)
    return BlockGeometry(L=L, kind=kind, centre_lo=L // 4, centre_hi=3 * L // 4)


@dataclass(frozen=True)
class RectGeometry:
    """s x s x 2s double cube; halves split along z at z = s."""

    s: int
    kind: str

    @property
    def box(self) -> Box:
        return Box(self.s, self.s, 2 * self.s, self.kind)

    @property
    def n_vertices(self) -> int:
        return 2 * self.s ** 3

    def half_box(self) -> Box:
        return Box(self.s, self.s, self.s, self.kind)

    def half_mask(self, which: str) -> np.ndarray:
        _, _, z = self.box.coord_arrays()
        if which == "u":
            return z < self.s
        if which == "v":
            return z >= self.s
        raise DomainError(f"half must be 'u' or 'v', got {which!r}")


def make_rect_geometry(s: int, kind: str) -> RectGeometry:
    _check_kind(kind)
    if not isinstance(s, (int, np.integer)) or s < 2:
        raise InvalidGeometryError(f"s must be an integer >= 2, got {s!r}")
    return RectGeometry(s=int(s), kind=kind)


Geometry = Union[Box, BlockGeometry, RectGeometry]


def region_box(geometry: Geometry) -> Box:
    if isinstance(geometry, Box):
        return geometry
    if isinstance(geometry, (BlockGeometry, RectGeometry)):
        return geometry.box
    raise ContractError(f"not a geometry: {geometry!r}")


@dataclass(frozen=True)
class OccupancySample:
    """Bit-packed open/closed states for every slot of a region.

    Regenerating with the same (geometry, p, seed) yields identical bits.
    """

    geometry: Geometry
    p: float
    seed: int
    packed: np.ndarray
    n_slots: int

    def open_slots(self) -> np.ndarray:
        """Unpacked boolean slot array (padding slots are always False)."""
        bits = np.unpackbits(self.packed, count=self.n_slots, bitorder="little")
        return bits.view(bool)

    def open_count(self) -> int:
        return int(self.open_slots().sum())

    def box(self) -> Box:
        return region_box(self.geometry)


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or seed < 0 or seed >= 2 ** 64:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed!r}")


def _sample(geometry: Geometry, p, seed) -> OccupancySample:
    pf = float(p)
    if not 0.0 <= pf <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p!r}")
    _check_seed(seed)
    box = region_box(geometry)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    u = rng.random(box.n_slots)
    open_ = u < pf
    open_ &= box.valid_slot_mask()
    packed = np.packbits(open_, bitorder="little")
    return OccupancySample(geometry=geometry, p=pf, seed=int(seed),
                           packed=packed, n_slots=box.n_slots)


def sample_box(box: Box, p, seed) -> OccupancySample:
    if not isinstance(box, Box):
        raise ContractError(f"expected Box, got {type(box).__name__}")
    return _sample(box, p, seed)


def sample_block(g: BlockGeometry, p, seed) -> OccupancySample:
    """One independent percolation sample of the block at probability p."""
    if not isinstance(g, BlockGeometry):
        raise ContractError(f"expected BlockGeometry, got {type(g).__name__}")
    return _sample(g, p, seed)


def sample_rect(r: RectGeometry, p, seed) -> OccupancySample:
    """One independent percolation sample of the double cube at probability p."""
    if not isinstance(r, RectGeometry):
        raise ContractError(f"expected RectGeometry, got {type(r).__name__}")
    return _sample(r, p, seed)
