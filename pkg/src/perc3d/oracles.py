"""Brute-force event oracles, deliberately independent of the detectors.

These recompute each event from first principles on small regions only:
the lower event by unit-vertex-capacity max-flow from every candidate
centre vertex to a surface super-sink, the upper event by from-scratch
breadth-first labeling and exhaustive size counting.  They share no graph
construction or traversal code with events.py / clusters.py and exist to
cross-validate the fast detectors.
"""

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .errors import ContractError, OracleRefusal
from .lattice import BOND, BlockGeometry, OccupancySample, RectGeometry

LOWER_ORACLE_MAX_L = 16
UPPER_ORACLE_MAX_S = 8


def _edge_open(kind, slots, v, w, axis):
    if kind == BOND:
        return slots[3 * v + axis] != 0
    return slots[v] != 0 and slots[w] != 0


def _open_adjacency(nx, ny, nz, kind, slots, zlo=None, zhi=None, member=None):
    """Adjacency lists of the open subgraph, optionally z-restricted."""
    if zlo is None:
        zlo, zhi = 0, nz
    adj = {}
    for z in range(zlo, zhi):
        for y in range(ny):
            for x in range(nx):
                v = x + nx * y + nx * ny * z
                adj.setdefault(v, [])
                for axis, (dx, dy, dz) in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))):
                    x2, y2, z2 = x + dx, y + dy, z + dz
                    if x2 >= nx or y2 >= ny or not zlo <= z2 < zhi:
                        continue
                    w = x2 + nx * y2 + nx * ny * z2
                    if _edge_open(kind, slots, v, w, axis):
                        adj[v].append(w)
                        adj.setdefault(w, []).append(v)
    return adj


def _components(adj, kind, slots):
    """BFS components over the adjacency's vertex set (open sites only in
    site kind)."""
    comps = []
    seen = set()
    for start in adj:
        if start in seen:
            continue
        if kind != BOND and slots[start] == 0:
            continue
        queue = [start]
        seen.add(start)
        comp = []
        while queue:
            v = queue.pop()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(comp)
    return comps


def lower_event_oracle(sample: OccupancySample, g: BlockGeometry) -> bool:
    """Max-flow check: some centre vertex pushes flow 2 to the surface sink."""
    if not isinstance(g, BlockGeometry):
        raise ContractError(f"expected BlockGeometry, got {type(g).__name__}")
    if sample.geometry != g:
        raise ContractError("sample was not generated on this geometry")
    if g.L > LOWER_ORACLE_MAX_L:
        raise OracleRefusal(f"lower oracle is capped at L={LOWER_ORACLE_MAX_L}")
    L = g.L
    V = L ** 3
    slots = sample.open_slots().view(np.uint8).tolist()
    adj = _open_adjacency(L, L, L, g.kind, slots)

    def coords(v):
        return v % L, (v // L) % L, v // (L * L)

    def on_surface(v):
        x, y, z = coords(v)
        e = L - 1
        return x == 0 or x == e or y == 0 or y == e or z == 0 or z == e

    def in_centre(v):
        x, y, z = coords(v)
        return all(g.centre_lo <= c < g.centre_hi for c in (x, y, z))

    # Candidate pruning (cannot change the answer): a centre vertex whose
    # cluster holds fewer than two surface vertices can never reach flow 2.
    candidates = []
    for comp in _components(adj, g.kind, slots):
        n_surface = sum(1 for v in comp if on_surface(v))
        if n_surface < 2:
            continue
        candidates.extend(v for v in comp if in_centre(v))
    if not candidates:
        return False

    # Vertex-split flow network: in(v) = 2v, out(v) = 2v + 1, sink = 2V.
    rows, cols, caps = [], [], []
    split_pos = {}
    open_vertex = [True] * V if g.kind == BOND else [s != 0 for s in slots]
    for v in range(V):
        if open_vertex[v]:
            split_pos[v] = len(rows)
            rows.append(2 * v)
            cols.append(2 * v + 1)
            caps.append(1)
            if on_surface(v):
                rows.append(2 * v + 1)
                cols.append(2 * V)
                caps.append(1)
    for v, nbrs in adj.items():
        for w in nbrs:
            rows.append(2 * v + 1)
            cols.append(2 * w)
            caps.append(1)
    rows = np.array(rows, dtype=np.int32)
    cols = np.array(cols, dtype=np.int32)
    caps = np.array(caps, dtype=np.int32)
    for v0 in sorted(candidates):
        data = caps.copy()
        data[split_pos[v0]] = 2
        graph = csr_matrix((data, (rows, cols)), shape=(2 * V + 1, 2 * V + 1))
        if maximum_flow(graph, 2 * v0, 2 * V).flow_value >= 2:
            return True
    return False


def upper_event_oracle(sample: OccupancySample, r: RectGeometry) -> bool:
    """From-scratch BFS recount of the unique-largest-and-joined event."""
    if not isinstance(r, RectGeometry):
        raise ContractError(f"expected RectGeometry, got {type(r).__name__}")
    if sample.geometry != r:
        raise ContractError("sample was not generated on this geometry")
    if r.s > UPPER_ORACLE_MAX_S:
        raise OracleRefusal(f"upper oracle is capped at s={UPPER_ORACLE_MAX_S}")
    s = r.s
    slots = sample.open_slots().view(np.uint8).tolist()

    def top_cluster(zlo, zhi):
        adj = _open_adjacency(s, s, 2 * s, r.kind, slots, zlo=zlo, zhi=zhi)
        comps = _components(adj, r.kind, slots)
        if not comps:
            return None
        sizes = sorted((len(c) for c in comps), reverse=True)
        if len(sizes) > 1 and sizes[0] == sizes[1]:
            return None
        return set(max(comps, key=len))

    top_u = top_cluster(0, s)
    if top_u is None:
        return False
    top_v = top_cluster(s, 2 * s)
    if top_v is None:
        return False
    adj_full = _open_adjacency(s, s, 2 * s, r.kind, slots)
    for comp in _components(adj_full, r.kind, slots):
        comp_set = set(comp)
        if comp_set & top_u:
            return bool(comp_set & top_v)
    return False
