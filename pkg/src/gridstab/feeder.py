"""Radial feeder model and linearized voltage sensitivity matrices.

A feeder is a tree of nodes rooted at the substation. Each node carries a
phase set, each line a 3x3 complex impedance block in per-unit on the bases
declared in the feeder file. The voltage model is the linearized DistFlow in
squared voltage magnitudes,

    v = R p + X q + v0,

where the (i, j) block of R (resp. X) is twice the sum of the real (resp.
imaginary) parts of the line impedance blocks on the shared path
P_i \\cap P_j between the two nodes and the substation. The substation has
no state rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, PhaseError, TopologyError, UnknownNode

PHASE_LETTERS = "ABC"


@dataclass(frozen=True)
class PhaseSet:
    """Subset of the three phases, stored as a 3-bit mask (bit 0 = A)."""

    mask: int

    @classmethod
    def from_string(cls, s):
        mask = 0
        for ch in s:
            if ch not in PHASE_LETTERS:
                raise PhaseError("unknown phase %r" % ch)
            bit = 1 << PHASE_LETTERS.index(ch)
            if mask & bit:
                raise PhaseError("duplicate phase %r" % ch)
            mask |= bit
        if mask == 0:
            raise PhaseError("empty phase set")
        return cls(mask)

    def to_string(self):
        return "".join(PHASE_LETTERS[i] for i in self.indices())

    def indices(self):
        return tuple(i for i in range(3) if self.mask & (1 << i))

    def issubset(self, other):
        return self.mask & ~other.mask == 0

    def __contains__(self, letter):
        return letter in PHASE_LETTERS and bool(self.mask & (1 << PHASE_LETTERS.index(letter)))

    def __iter__(self):
        return (PHASE_LETTERS[i] for i in self.indices())

    def __len__(self):
        return len(self.indices())


ABC = PhaseSet.from_string("ABC")


@dataclass(frozen=True)
class LineImpedance:
    """Symmetric 3x3 per-unit impedance block with a phase set.

    Rows/columns of absent phases are zero. Present diagonal entries must
    have nonnegative R and X and nonzero magnitude (switch jumpers with
    X = 0, R > 0 are allowed).
    """

    z: np.ndarray
    phases: PhaseSet

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if z.shape != (3, 3):
            raise PhaseError("impedance block must be 3x3")
        object.__setattr__(self, "z", z)
        if not np.array_equal(z, z.T):
            raise PhaseError("impedance block must be symmetric")
        present = self.phases.indices()
        absent = [i for i in range(3) if i not in present]
        if absent and (np.any(z[absent, :] != 0) or np.any(z[:, absent] != 0)):
            raise PhaseError("nonzero entries on absent phases")
        for i in present:
            if z[i, i].real < 0 or z[i, i].imag < 0:
                raise PhaseError("negative diagonal R or X on phase %s" % PHASE_LETTERS[i])
            if z[i, i] == 0:
                raise PhaseError("zero diagonal impedance on present phase %s" % PHASE_LETTERS[i])

    @property
    def r(self):
        return self.z.real

    @property
    def x(self):
        return self.z.imag


@dataclass(frozen=True)
class Line:
    """Directed line from parent toward child (normalized during validation)."""

    from_id: str
    to_id: str
    imp: LineImpedance


@dataclass
class Feeder:
    """Validated radial feeder.

    Parameters
    ----------
    base_kv, base_mva : float
        Bases the per-unit impedances refer to.
    substation : str
        Root node id; its voltage is fixed at 1 pu and it carries no state.
    nodes : dict
        Ordered mapping node id -> PhaseSet.
    lines : list of Line
        Exactly n-1 lines forming a tree over the nodes.
    """

    base_kv: float
    base_mva: float
    substation: str
    nodes: dict
    lines: list
    parent: dict = field(init=False, repr=False)
    children: dict = field(init=False, repr=False)
    line_up: dict = field(init=False, repr=False)

    def __post_init__(self):
        if self.substation not in self.nodes:
            raise TopologyError("substation %r not among nodes" % self.substation)
        if len(self.lines) != len(self.nodes) - 1:
            raise TopologyError(
                "expected %d lines for %d nodes, got %d"
                % (len(self.nodes) - 1, len(self.nodes), len(self.lines))
            )
        adj = {nid: [] for nid in self.nodes}
        for ln in self.lines:
            for end in (ln.from_id, ln.to_id):
                if end not in self.nodes:
                    raise UnknownNode("line endpoint %r is not a node" % end)
            adj[ln.from_id].append(ln)
            adj[ln.to_id].append(ln)

        # BFS from the substation; orient every line parent -> child.
        parent, line_up, children = {}, {}, {nid: [] for nid in self.nodes}
        seen = {self.substation}
        queue = [self.substation]
        oriented = []
        while queue:
            u = queue.pop(0)
            for ln in adj[u]:
                v = ln.to_id if ln.from_id == u else ln.from_id
                if v in seen:
                    if parent.get(u) != v:
                        raise TopologyError("cycle through line %s-%s" % (ln.from_id, ln.to_id))
                    continue
                seen.add(v)
                parent[v] = u
                fwd = ln if ln.from_id == u else Line(u, v, ln.imp)
                line_up[v] = fwd
                children[u].append(v)
                oriented.append(fwd)
                queue.append(v)
        if len(seen) != len(self.nodes):
            missing = sorted(set(self.nodes) - seen)
            raise TopologyError("nodes not reachable from substation: %s" % missing)
        self.lines = oriented
        self.parent = parent
        self.children = children
        self.line_up = line_up

        for v, ln in line_up.items():
            if not self.nodes[v].issubset(ln.imp.phases):
                raise PhaseError("node %s phases exceed its supply line" % v)
            if not ln.imp.phases.issubset(self.nodes[ln.from_id]):
                raise PhaseError("line into %s carries phases absent at %s" % (v, ln.from_id))

    def node_ids(self, include_substation=False):
        ids = list(self.nodes)
        if not include_substation:
            ids = [n for n in ids if n != self.substation]
        return ids

    def depth(self, node_id):
        d = 0
        while node_id != self.substation:
            node_id = self.parent[node_id]
            d += 1
        return d


def path_to_substation(feeder, node_id):
    """Lines from node_id up to the substation, nearest first."""
    if node_id not in feeder.nodes:
        raise UnknownNode("no node %r" % node_id)
    path = []
    while node_id != feeder.substation:
        ln = feeder.line_up[node_id]
        path.append(ln)
        node_id = ln.from_id
    return path


@dataclass
class SensitivityMatrices:
    """R and X of the linearized model, 3n x 3n over non-substation nodes.

    Every node occupies three consecutive rows (phase A, B, C); rows of
    structurally absent phases are zero and flagged off in `active`.
    """

    R: np.ndarray
    X: np.ndarray
    node_ids: tuple
    index: dict
    active: np.ndarray
    feeder: Feeder = None

    @property
    def n_states(self):
        return self.R.shape[0]

    def rows_of(self, node_id, phases=None):
        """Global row indices for a node's (present) phases."""
        if node_id not in self.index:
            raise UnknownNode("no state rows for %r" % node_id)
        base = self.index[node_id]
        if phases is None:
            phases = self.feeder.nodes[node_id] if self.feeder else ABC
        return [base + i for i in phases.indices()]


def build_sensitivity(feeder):
    """Build R and X from path intersections (factor 2 included).

    Block (i, j) is 2 * sum of line blocks on the common path, which is the
    path from the substation down to lca(i, j); rows/columns of phases absent
    at either node are zeroed.
    """
    ids = feeder.node_ids()
    n = len(ids)
    index = {nid: 3 * k for k, nid in enumerate(ids)}

    # cumulative block from the substation down to each node
    cum = {feeder.substation: np.zeros((3, 3))}
    depth = {feeder.substation: 0}
    order = [feeder.substation]
    while order:
        u = order.pop(0)
        for v in feeder.children[u]:
            cum[v] = cum[u] + 2.0 * feeder.line_up[v].imp.z
            depth[v] = depth[u] + 1
            order.append(v)

    def lca(a, b):
        while depth[a] > depth[b]:
            a = feeder.parent[a]
        while depth[b] > depth[a]:
            b = feeder.parent[b]
        while a != b:
            a, b = feeder.parent[a], feeder.parent[b]
        return a

    mask = np.zeros((n, 3), dtype=bool)
    for k, nid in enumerate(ids):
        mask[k, list(feeder.nodes[nid].indices())] = True

    Z = np.zeros((3 * n, 3 * n), dtype=complex)
    for a in range(n):
        for b in range(a, n):
            blk = cum[lca(ids[a], ids[b])].copy()
            blk[~mask[a], :] = 0.0
            blk[:, ~mask[b]] = 0.0
            Z[3 * a : 3 * a + 3, 3 * b : 3 * b + 3] = blk
            if b != a:
                Z[3 * b : 3 * b + 3, 3 * a : 3 * a + 3] = blk.T

    return SensitivityMatrices(
        R=np.ascontiguousarray(Z.real),
        X=np.ascontiguousarray(Z.imag),
        node_ids=tuple(ids),
        index=index,
        active=mask.reshape(-1),
        feeder=feeder,
    )


def load_feeder(path):
    """Read a feeder JSON file and return a validated Feeder."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ParseError("cannot read feeder file: %s" % exc) from exc
    except json.JSONDecodeError as exc:
        raise ParseError("feeder file is not valid JSON: %s" % exc) from exc
    return feeder_from_dict(doc)


def feeder_from_dict(doc):
    for key in ("base_kv", "base_mva", "substation", "nodes", "lines"):
        if key not in doc:
            raise ParseError("feeder document missing %r" % key)
    nodes = {}
    for nd in doc["nodes"]:
        try:
            nid, ph = nd["id"], nd["phases"]
        except (KeyError, TypeError) as exc:
            raise ParseError("bad node entry %r" % (nd,)) from exc
        if nid in nodes:
            raise ParseError("duplicate node id %r" % nid)
        nodes[nid] = PhaseSet.from_string(ph)
    lines = []
    for ln in doc["lines"]:
        try:
            z_pairs = ln["z"]
            z = np.array(
                [[complex(z_pairs[i][j][0], z_pairs[i][j][1]) for j in range(3)] for i in range(3)]
            )
        except (KeyError, TypeError, IndexError) as exc:
            raise ParseError("bad line entry %r" % (ln,)) from exc
        phases = PhaseSet.from_string(ln["phases"]) if "phases" in ln else _phases_from_block(z)
        lines.append(Line(ln["from"], ln["to"], LineImpedance(z, phases)))
    return Feeder(
        base_kv=float(doc["base_kv"]),
        base_mva=float(doc["base_mva"]),
        substation=doc["substation"],
        nodes=nodes,
        lines=lines,
    )


def _phases_from_block(z):
    mask = 0
    for i in range(3):
        if np.any(z[i, :] != 0) or np.any(z[:, i] != 0):
            mask |= 1 << i
    if mask == 0:
        raise ParseError("line block is all zero and has no phase list")
    return PhaseSet(mask)


def feeder_to_dict(feeder):
    return {
        "base_kv": feeder.base_kv,
        "base_mva": feeder.base_mva,
        "substation": feeder.substation,
        "nodes": [{"id": nid, "phases": ps.to_string()} for nid, ps in feeder.nodes.items()],
        "lines": [
            {
                "from": ln.from_id,
                "to": ln.to_id,
                "phases": ln.imp.phases.to_string(),
                "z": [[[ln.imp.z[i, j].real, ln.imp.z[i, j].imag] for j in range(3)] for i in range(3)],
            }
            for ln in feeder.lines
        ],
    }


def save_feeder(feeder, path):
    with open(path, "w") as fh:
        json.dump(feeder_to_dict(feeder), fh, indent=1)
        fh.write("\n")
