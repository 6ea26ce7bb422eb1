"""The two block events driving the confidence bounds.

Lower event: some centre vertex has two open arms to two distinct surface
vertices, vertex- and edge-disjoint except at that vertex.  Detection
augments the open subgraph with a super-node T adjacent to every surface
vertex; by Menger's theorem the event holds iff some centre vertex has two
internally-vertex-disjoint paths to T, i.e. no single cut vertex separates
it from T.  One depth-first pass computes discovery/low values and
propagates, down the DFS tree rooted at T, whether each vertex still has
two disjoint routes to T.

Upper event: each half of the s x s x 2s double cube has a strictly unique
largest open cluster (clusters computed from elements interior to the
half), and the two largest clusters lie in one cluster of the full region.
Ties for largest are event failure: a false positive would inflate the
upper-bound evidence, so ambiguity must resolve conservatively.
"""

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from ._backend import hot_kernel
from .clusters import label_clusters_grid
from .errors import ContractError
from .lattice import (
    BOND,
    BlockGeometry,
    OccupancySample,
    RectGeometry,
)


@dataclass(frozen=True)
class LowerWitness:
    centre_vertex: int
    surface_a: int
    surface_b: int

    def summary(self) -> str:
        return f"v={self.centre_vertex};s1={self.surface_a};s2={self.surface_b}"


@dataclass(frozen=True)
class UpperWitness:
    largest_u: int
    largest_v: int
    joined: int

    def summary(self) -> str:
        return f"u={self.largest_u};v={self.largest_v};join={self.joined}"


@dataclass(frozen=True)
class EventResult:
    holds: bool
    witness: Optional[Union[LowerWitness, UpperWitness]] = None


@hot_kernel
def _lower_event_kernel(nx, ny, nz, slots, is_bond, centre, surface):
    """Smallest centre vertex biconnected with the surface super-node, or -1."""
    V = nx * ny * nz
    T = V
    sy = nx
    sz = nx * ny
    deg = np.zeros(V + 1, dtype=np.int64)
    if is_bond:
        for v in range(V):
            for a in range(3):
                if slots[3 * v + a] != 0:
                    if a == 0:
                        w = v + 1
                    elif a == 1:
                        w = v + sy
                    else:
                        w = v + sz
                    deg[v] += 1
                    deg[w] += 1
    else:
        for v in range(V):
            if slots[v] == 0:
                continue
            x = v % nx
            y = (v // nx) % ny
            z = v // sz
            if x < nx - 1 and slots[v + 1] != 0:
                deg[v] += 1
                deg[v + 1] += 1
            if y < ny - 1 and slots[v + sy] != 0:
                deg[v] += 1
                deg[v + sy] += 1
            if z < nz - 1 and slots[v + sz] != 0:
                deg[v] += 1
                deg[v + sz] += 1
    for v in range(V):
        if surface[v] != 0 and (is_bond or slots[v] != 0):
            deg[v] += 1
            deg[T] += 1
    off = np.zeros(V + 2, dtype=np.int64)
    for i in range(V + 1):
        off[i + 1] = off[i] + deg[i]
    adj = np.empty(off[V + 1], dtype=np.int64)
    cur = off[: V + 1].copy()
    if is_bond:
        for v in range(V):
            for a in range(3):
                if slots[3 * v + a] != 0:
                    if a == 0:
                        w = v + 1
                    elif a == 1:
                        w = v + sy
                    else:
                        w = v + sz
                    adj[cur[v]] = w
                    cur[v] += 1
                    adj[cur[w]] = v
                    cur[w] += 1
    else:
        for v in range(V):
            if slots[v] == 0:
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
                if slots[w] != 0:
                    adj[cur[v]] = w
                    cur[v] += 1
                    adj[cur[w]] = v
                    cur[w] += 1
    for v in range(V):
        if surface[v] != 0 and (is_bond or slots[v] != 0):
            adj[cur[v]] = T
            cur[v] += 1
            adj[cur[T]] = v
            cur[T] += 1

    NIL = np.int64(-1)
    disc = np.full(V + 1, NIL, dtype=np.int64)
    low = np.zeros(V + 1, dtype=np.int64)
    parent = np.full(V + 1, NIL, dtype=np.int64)
    order = np.empty(V + 1, dtype=np.int64)
    ok = np.zeros(V + 1, dtype=np.uint8)
    stack_v = np.empty(V + 2, dtype=np.int64)
    stack_e = np.empty(V + 2, dtype=np.int64)
    disc[T] = 0
    order[0] = T
    time = 1
    stack_v[0] = T
    stack_e[0] = off[T]
    sp = 1
    while sp > 0:
        v = stack_v[sp - 1]
        ei = stack_e[sp - 1]
        if ei < off[v + 1]:
            stack_e[sp - 1] = ei + 1
            w = adj[ei]
            if disc[w] == NIL:
                parent[w] = v
                disc[w] = time
                low[w] = time
                order[time] = w
                time += 1
                stack_v[sp] = w
                stack_e[sp] = off[w]
                sp += 1
            elif w != parent[v]:
                if disc[w] < low[v]:
                    low[v] = disc[w]
        else:
            sp -= 1
            if sp > 0:
                u = stack_v[sp - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
    # ok(w): every ancestor strictly between T and w is bypassed by a back
    # edge from w's side, so no single cut vertex separates w from T.
    best = np.int64(-1)
    for t in range(1, time):
        v = order[t]
        pv = parent[v]
        if pv == T:
            ok[v] = 1
        elif ok[pv] == 1 and low[v] < disc[pv]:
            ok[v] = 1
        if ok[v] == 1 and centre[v] != 0:
            if best == -1 or v < best:
                best = v
    return best


def _open_edge_arrays(box, slots):
    """Endpoint arrays (u, w) of all open edges of the sample's graph."""
    V = box.n_vertices
    strides = np.array(box.strides, dtype=np.int64)
    if box.kind == BOND:
        v_idx, a_idx = np.nonzero(slots.reshape(V, 3))
        return v_idx.astype(np.int64), v_idx + strides[a_idx]
    open_vertex = slots.astype(bool)
    x, y, z = box.coord_arrays()
    inside = (x < box.nx - 1, y < box.ny - 1, z < box.nz - 1)
    v_parts = []
    w_parts = []
    for a in range(3):
        ok = open_vertex & inside[a]
        v = np.where(ok)[0]
        w = v + strides[a]
        keep = open_vertex[w]
        v_parts.append(v[keep])
        w_parts.append(w[keep])
    return (
        np.concatenate(v_parts).astype(np.int64),
        np.concatenate(w_parts).astype(np.int64),
    )


def _two_arm_endpoints(box, slots, surface, v0):
    """Surface endpoints of two disjoint arms from v0, via BFS augmentation.

    Vertex-split flow network: in(v) = 2v, out(v) = 2v + 1, sink = 2V.
    Interior vertices have capacity 1, v0 has 2, each surface vertex feeds
    the sink with capacity 1.  The detector guarantees a flow of 2 exists.
    """
    V = box.n_vertices
    sink = 2 * V
    res = {}

    def add(a, b, c):
        res.setdefault(a, {})[b] = res.get(a, {}).get(b, 0) + c
        res.setdefault(b, {}).setdefault(a, 0)

    if box.kind == BOND:
        open_vertex = np.ones(V, dtype=bool)
    else:
        open_vertex = slots.astype(bool)
    for v in np.nonzero(open_vertex)[0]:
        add(2 * v, 2 * v + 1, 2 if v == v0 else 1)
    eu, ew = _open_edge_arrays(box, slots)
    for u, w in zip(eu.tolist(), ew.tolist()):
        add(2 * u + 1, 2 * w, 1)
        add(2 * w + 1, 2 * u, 1)
    for s in np.nonzero(surface & open_vertex)[0]:
        add(2 * s + 1, sink, 1)

    endpoints = []
    for _ in range(2):
        prev = {2 * v0: None}
        queue = [2 * v0]
        qi = 0
        while qi < len(queue) and sink not in prev:
            a = queue[qi]
            qi += 1
            for b, cap in res[a].items():
                if cap > 0 and b not in prev:
                    prev[b] = a
                    queue.append(b)
        if sink not in prev:
            raise ContractError("witness extraction found no second arm")
        node = sink
        while prev[node] is not None:
            a = prev[node]
            res[a][node] -= 1
            res[node][a] += 1
            if node == sink:
                endpoints.append((a - 1) // 2)
            node = a
    return endpoints[0], endpoints[1]


def lower_event(sample: OccupancySample, g: BlockGeometry) -> EventResult:
    """Two disjoint open arms from one centre vertex to two surface vertices."""
    if not isinstance(g, BlockGeometry):
        raise ContractError(f"expected BlockGeometry, got {type(g).__name__}")
    if sample.geometry != g:
        raise ContractError("sample was not generated on this geometry")
    box = g.box
    slots = sample.open_slots().view(np.uint8)
    centre = g.centre_mask()
    surface = g.surface_mask()
    v0 = int(
        _lower_event_kernel(
            box.nx,
            box.ny,
            box.nz,
            slots,
            g.kind == BOND,
            centre.view(np.uint8),
            surface.view(np.uint8),
        )
    )
    if v0 < 0:
        return EventResult(holds=False)
    s1, s2 = _two_arm_endpoints(box, slots, surface, v0)
    return EventResult(
        holds=True,
        witness=LowerWitness(centre_vertex=v0, surface_a=int(s1), surface_b=int(s2)),
    )


def _largest_label(labels):
    """(label, size, unique) over a whole label array; same tie rules as
    largest_in_region."""
    sel = labels[labels >= 0]
    if len(sel) == 0:
        return None, 0, False
    uniq, counts = np.unique(sel, return_counts=True)
    top = counts.max()
    if len(counts) == 1:
        second = 0
    else:
        second = np.partition(counts, -2)[-2]
    tied = uniq[counts == top]
    return int(tied.min()), int(top), bool(top > second)


def _half_slots(r: RectGeometry, slots, which: str):
    """Slot array of one half's induced subgraph, in half-local indexing."""
    v_half = r.s ** 3
    if r.kind == BOND:
        if which == "u":
            part = slots[: 3 * v_half].copy()
            # z bonds of the top layer cross the interface; cut them
            top = np.arange(r.s ** 2 * (r.s - 1), v_half)
            part[3 * top + 2] = 0
        else:
            part = slots[3 * v_half :].copy()
        return part
    return slots[:v_half] if which == "u" else slots[v_half:]


def upper_event(sample: OccupancySample, r: RectGeometry) -> EventResult:
    """Strictly unique largest clusters in both halves, joined in the union."""
    if not isinstance(r, RectGeometry):
        raise ContractError(f"expected RectGeometry, got {type(r).__name__}")
    if sample.geometry != r:
        raise ContractError("sample was not generated on this geometry")
    slots = sample.open_slots().view(np.uint8)
    half = r.half_box()
    v_half = r.s ** 3
    labels_u = label_clusters_grid(half, _half_slots(r, slots, "u"))
    rep_u, _, unique_u = _largest_label(labels_u)
    if not unique_u:
        return EventResult(holds=False)
    labels_v = label_clusters_grid(half, _half_slots(r, slots, "v"))
    rep_v, _, unique_v = _largest_label(labels_v)
    if not unique_v:
        return EventResult(holds=False)
    labels_full = label_clusters_grid(r.box, slots)
    rep_v_full = rep_v + v_half  # half-u local indices equal full indices
    joined = labels_full[rep_u] >= 0 and labels_full[rep_u] == labels_full[rep_v_full]
    if not joined:
        return EventResult(holds=False)
    return EventResult(
        holds=True,
        witness=UpperWitness(
            largest_u=int(rep_u),
            largest_v=int(rep_v_full),
            joined=int(labels_full[rep_u]),
        ),
    )
