"""Connected-component labeling of occupancy samples.

Labels are canonical: every cluster is identified by the smallest vertex
index it contains, so labelings are deterministic and identical across
backends and parallel schedules.  In bond kind every vertex is labeled
(closed-off vertices are singleton clusters); in site kind closed vertices
carry the reserved label -1 and never match any region query.

Two routes produce the same result: a union-find kernel (numba backend)
and a scipy.sparse.csgraph pass (numpy backend).
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._backend import active_backend, hot_kernel
from .errors import ContractError, DomainError
from .lattice import BOND, Geometry, OccupancySample, region_box


@hot_kernel
def _uf_label_kernel(nx, ny, nz, slots, is_bond):
    """Union-find over open elements; returns canonical min-index labels."""
    V = nx * ny * nz
    parent = np.arange(V, dtype=np.int64)
    size = np.ones(V, dtype=np.int64)
    sy = nx
    sz = nx * ny
    for v in range(V):
        if is_bond:
            if slots[3 * v] == 0 and slots[3 * v + 1] == 0 and slots[3 * v + 2] == 0:
                continue
        elif slots[v] == 0:
            continue
        x = v % nx
        y = (v // nx) % ny
        z = v // sz
        for a in range(3):
            if a == 0:
                if x == nx - 1:
                    continue
                w = v + 1
            elif a == 1:
                if y == ny - 1:
                    continue
                w = v + sy
            else:
                if z == nz - 1:
                    continue
                w = v + sz
            if is_bond:
                if slots[3 * v + a] == 0:
                    continue
            elif slots[w] == 0:
                continue
            rv = v
            while parent[rv] != rv:
                parent[rv] = parent[parent[rv]]
                rv = parent[rv]
            rw = w
            while parent[rw] != rw:
                parent[rw] = parent[parent[rw]]
                rw = parent[rw]
            if rv != rw:
                if size[rv] < size[rw]:
                    rv, rw = rw, rv
                parent[rw] = rv
                size[rv] += size[rw]
    labels = np.full(V, -1, dtype=np.int64)
    canon = np.full(V, -1, dtype=np.int64)
    for v in range(V):
        if not is_bond and slots[v] == 0:
            continue
        r = v
        while parent[r] != r:
            r = parent[r]
        if canon[r] == -1:
            canon[r] = v
        labels[v] = canon[r]
    return labels


def _label_scipy(box, slots):
    """Vectorized labeling via sparse connected components; canonicalized."""
    V = box.n_vertices
    strides = np.array(box.strides, dtype=np.int64)
    if box.kind == BOND:
        open_slots = slots.reshape(V, 3).astype(bool)
        v_idx, a_idx = np.nonzero(open_slots)
        w_idx = v_idx + strides[a_idx]
        open_vertex = np.ones(V, dtype=bool)
    else:
        open_vertex = slots.astype(bool)
        x, y, z = box.coord_arrays()
        inside = (x < box.nx - 1, y < box.ny - 1, z < box.nz - 1)
        v_parts = []
        w_parts = []
        for a in range(3):
            ok = open_vertex & inside[a]
            w = np.where(ok)[0] + strides[a]
            keep = open_vertex[w]
            v_parts.append(np.where(ok)[0][keep])
            w_parts.append(w[keep])
        v_idx = np.concatenate(v_parts)
        w_idx = np.concatenate(w_parts)
    graph = csr_matrix(
        (np.ones(len(v_idx), dtype=np.int8), (v_idx, w_idx)), shape=(V, V)
    )
    n_comp, comp = connected_components(graph, directed=False)
    canon = np.full(n_comp, V, dtype=np.int64)
    verts = np.arange(V, dtype=np.int64)
    np.minimum.at(canon, comp[open_vertex], verts[open_vertex])
    labels = np.full(V, -1, dtype=np.int64)
    labels[open_vertex] = canon[comp[open_vertex]]
    return labels


@dataclass(frozen=True)
class ClusterLabeling:
    """Per-vertex canonical cluster labels plus cluster sizes."""

    region: Geometry
    labels: np.ndarray
    _unique: np.ndarray = field(repr=False)
    _counts: np.ndarray = field(repr=False)

    @property
    def n_clusters(self) -> int:
        return len(self._unique)

    @property
    def labeled_count(self) -> int:
        return int(self._counts.sum())

    @property
    def sizes(self) -> dict:
        return {int(l): int(c) for l, c in zip(self._unique, self._counts)}

    def size_of(self, label: int) -> int:
        i = np.searchsorted(self._unique, label)
        if i < len(self._unique) and self._unique[i] == label:
            return int(self._counts[i])
        raise DomainError(f"no cluster labeled {label}")


def label_clusters_grid(box, slots_bool) -> np.ndarray:
    """Labels for an explicit slot array on a box (internal entry point)."""
    if active_backend() == "numba":
        return _uf_label_kernel(
            box.nx, box.ny, box.nz, slots_bool.view(np.uint8), box.kind == BOND
        )
    return _label_scipy(box, slots_bool)


def label_clusters(sample: OccupancySample) -> ClusterLabeling:
    """Label open clusters of a sample; labels are min vertex index per cluster."""
    box = sample.box()
    labels = label_clusters_grid(box, sample.open_slots())
    labeled = labels[labels >= 0]
    uniq, counts = np.unique(labeled, return_counts=True)
    return ClusterLabeling(region=sample.geometry, labels=labels,
                           _unique=uniq, _counts=counts)


@dataclass(frozen=True)
class RegionLargest:
    """Largest-cluster query result; label is None when nothing is labeled."""

    label: Optional[int]
    size: int
    unique: bool


def largest_in_region(lab: ClusterLabeling, region) -> RegionLargest:
    """Largest cluster by vertex count inside a region mask.

    Size is the number of region vertices carrying the label.  unique is
    True only when strictly larger than the runner-up; exact ties report
    the smallest tied label with unique=False.  A region with no labeled
    vertex gives the none-found result (label None, size 0, not unique).
    """
    box = region_box(lab.region)
    if callable(region):
        x, y, z = box.coord_arrays()
        region = np.asarray(region(x, y, z), dtype=bool)
    region = np.asarray(region, dtype=bool)
    if region.shape != (box.n_vertices,):
        raise ContractError(
            f"region mask has shape {region.shape}, expected ({box.n_vertices},)"
        )
    if not region.any():
        raise DomainError("region is empty")
    sel = lab.labels[region]
    sel = sel[sel >= 0]
    if len(sel) == 0:
        return RegionLargest(label=None, size=0, unique=False)
    uniq, counts = np.unique(sel, return_counts=True)
    top = counts.max()
    tied = uniq[counts == top]
    if len(counts) == 1:
        second = 0
    else:
        second = np.partition(counts, -2)[-2]
    return RegionLargest(
        label=int(tied.min()), size=int(top), unique=bool(top > second)
    )
