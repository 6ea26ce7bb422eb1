"""Independent reference implementations used only by the test suite.

Everything here is deliberately written from the definitions, in plain
Python over tuples and dicts, without reusing the package's kernels, so
that agreement between the two is meaningful evidence.
"""

from collections import deque
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from perc3d.lattice import OccupancySample, region_box
from perc3d.runner import (
    RECORDS_HEADER,
    SUMMARY_PREFIX,
    ExperimentConfig,
    TrialRecord,
    format_config,
)


def make_sample(geometry, open_slots):
    """Wrap a hand-built slot array as a sample (p and seed are dummies)."""
    box = region_box(geometry)
    open_slots = np.asarray(open_slots, dtype=bool)
    assert open_slots.shape == (box.n_slots,)
    packed = np.packbits(open_slots, bitorder="little")
    return OccupancySample(geometry=geometry, p=-1.0, seed=0,
                           packed=packed, n_slots=box.n_slots)


def bond_slot(box, x, y, z, axis):
    """Slot index of the bond leaving (x, y, z) in +axis direction."""
    return 3 * box.vertex_index(x, y, z) + axis


def bfs_label(box, slots):
    """Canonical min-index labels by breadth-first search.

    Mirrors the labeling contract: bond kind labels every vertex
    (isolated ones become singletons), site kind labels only open
    vertices and marks closed ones -1.
    """
    nx, ny, nz = box.dims
    V = nx * ny * nz
    slots = np.asarray(slots, dtype=bool)
    is_bond = box.kind == "bond"

    def neighbors(v):
        x, y, z = box.vertex_coords(v)
        out = []
        for axis, (dx, dy, dz) in enumerate(((1, 0, 0), (0, 1, 0), (0, 0, 1))):
            nx2, ny2, nz2 = x + dx, y + dy, z + dz
            if nx2 < nx and ny2 < ny and nz2 < nz:
                w = box.vertex_index(nx2, ny2, nz2)
                if is_bond:
                    if slots[3 * v + axis]:
                        out.append(w)
                elif slots[v] and slots[w]:
                    out.append(w)
            if x - dx >= 0 and y - dy >= 0 and z - dz >= 0:
                w = box.vertex_index(x - dx, y - dy, z - dz)
                if is_bond:
                    if slots[3 * w + axis]:
                        out.append(w)
                elif slots[v] and slots[w]:
                    out.append(w)
        return out

    labels = np.full(V, -1, dtype=np.int64)
    for start in range(V):
        if labels[start] >= 0:
            continue
        if not is_bond and not slots[start]:
            continue
        comp = [start]
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in neighbors(v):
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        lab = min(comp)
        for v in comp:
            labels[v] = lab
    return labels


# Independence-lattice combinatorics, re-derived from the definitions.
# Neighbor offsets: exactly one coordinate of absolute value 2, the rest
# at most 1.  Two blocks overlap (are dependent) iff every coordinate of
# their centre difference is at most 1 in absolute value.
OFF54 = sorted(
    v for v in product((-2, -1, 0, 1, 2), repeat=3)
    if sorted(map(abs, v))[2] == 2 and sorted(map(abs, v))[1] <= 1
)
DEP27 = set(product((-1, 0, 1), repeat=3))
FORBID = DEP27 | set(OFF54)

TYPE_OF_SORTED = {(0, 0, 2): "FaceCentre", (0, 1, 2): "FaceEdge", (1, 1, 2): "FaceCorner"}
REPS = {"FaceCentre": (2, 0, 0), "FaceEdge": (2, 1, 0), "FaceCorner": (2, 1, 1)}


def offset_type(d):
    return TYPE_OF_SORTED[tuple(sorted(map(abs, d)))]


def brute_force_row(start_type, k):
    """Count chord-free mutually independent extensions by exhaustive DFS.

    Paths are tuples of blocks (origin, representative, X1, ..., Xk):
    consecutive blocks are neighbors, every other pair is neither a
    neighbor pair nor overlapping.  Returns end-pair type counts.
    Exponential; usable for k <= 2 only.
    """
    assert k <= 2, "brute force is for tiny k"
    origin = (0, 0, 0)
    first = REPS[start_type]
    counts = {"FaceCentre": 0, "FaceEdge": 0, "FaceCorner": 0}

    def extend(path):
        depth = len(path) - 2
        last = path[-1]
        for d in OFF54:
            q = (last[0] + d[0], last[1] + d[1], last[2] + d[2])
            ok = True
            for prev in path[:-1]:
                delta = (q[0] - prev[0], q[1] - prev[1], q[2] - prev[2])
                if delta in FORBID:
                    ok = False
                    break
            if not ok:
                continue
            if depth + 1 == k:
                counts[offset_type(d)] += 1
            else:
                extend(path + (q,))

    extend((origin, first))
    return counts


def brute_force_matrix(k):
    order = ("FaceCentre", "FaceEdge", "FaceCorner")
    return tuple(
        tuple(brute_force_row(t, k)[u] for u in order) for t in order
    )


def synth_records(path, mode, kind, scale, p, trials, base_seed, successes,
                  alpha=Fraction(999999, 1000000), finalize=True):
    """Write a record file with a prescribed success count; returns its config."""
    path = Path(path)
    cfg = ExperimentConfig(mode=mode, kind=kind, scale=scale, p=Fraction(p),
                           trials=trials, base_seed=base_seed, alpha=Fraction(alpha),
                           output=str(path))
    lines = [RECORDS_HEADER]
    lines += [f"#CONFIG {line}" for line in format_config(cfg).splitlines()]
    for i, seed in enumerate(cfg.seeds):
        rec = TrialRecord(seed=seed, event=i < successes, ms=0, digest=cfg.digest)
        lines.append(rec.line())
    if finalize:
        lines.append(f"{SUMMARY_PREFIX} trials={trials} "
                     f"successes={successes} digest={cfg.digest}")
    path.write_text("\n".join(lines) + "\n")
    return cfg
