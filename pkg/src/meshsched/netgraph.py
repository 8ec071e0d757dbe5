"""Networks, communication / two-tier / SINR graphs, labeler and forest decomposition.

Nodes are numbered 1..N everywhere in the public API.
"""

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np

from .rfcore import RadioParams, comm_range, intf_range


@dataclass(frozen=True, eq=False)
class Network:
    nodes: tuple
    params: RadioParams

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.nodes)
        if len(pts) < 2:
            raise ValueError("a network needs at least two nodes")
        object.__setattr__(self, "nodes", pts)

    @property
    def n(self):
        return len(self.nodes)

    def pos(self, i):
        return self.nodes[i - 1]

    @cached_property
    def coords(self):
        return np.asarray(self.nodes, dtype=float)

    @cached_property
    def dist(self):
        """N x N distance matrix, 0-based."""
        c = self.coords
        return np.sqrt(((c[:, None, :] - c[None, :, :]) ** 2).sum(-1))

    @cached_property
    def rx_power(self):
        """Nominal received power (mW) from node i+1 at node j+1; inf on the diagonal."""
        p = self.params
        with np.errstate(divide="ignore"):
            m = p.tx_power_mw / self.dist ** p.path_loss_exp
        np.fill_diagonal(m, np.inf)
        return m

    def d(self, i, j):
        return math.dist(self.nodes[i - 1], self.nodes[j - 1])


def gen_uniform_disk(n, radius_m, params, rng):
    if n < 2 or radius_m <= 0:
        raise ValueError("need n >= 2 and a positive radius")
    r = radius_m * np.sqrt(rng.uniform(0.0, 1.0, n))
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return Network(tuple(zip(r * np.cos(th), r * np.sin(th))), params)


def gen_uniform_square(n, side_m, params, rng):
    if n < 2 or side_m <= 0:
        raise ValueError("need n >= 2 and a positive side")
    xy = rng.uniform(0.0, side_m, (n, 2))
    return Network(tuple(map(tuple, xy)), params)


@dataclass(frozen=True, eq=False)
class CommGraph:
    vertices: tuple
    edges: tuple  # directed (tx, rx), lexicographic
    out_nbrs: dict = field(repr=False)
    in_nbrs: dict = field(repr=False)

    @classmethod
    def from_edges(cls, n, edges):
        edges = tuple(sorted(set(edges)))
        out_nbrs = {v: set() for v in range(1, n + 1)}
        in_nbrs = {v: set() for v in range(1, n + 1)}
        for a, b in edges:
            out_nbrs[a].add(b)
            in_nbrs[b].add(a)
        return cls(tuple(range(1, n + 1)), edges, out_nbrs, in_nbrs)

    def has_edge(self, a, b):
        return b in self.out_nbrs[a]

    def undirected(self):
        adj = {v: set() for v in self.vertices}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return adj

    @cached_property
    def edge_index(self):
        return {e: k for k, e in enumerate(self.edges)}


@dataclass(frozen=True, eq=False)
class TwoTierGraph:
    comm: CommGraph
    intf_edges: tuple

    @cached_property
    def _intf(self):
        s = {v: set() for v in self.comm.vertices}
        for a, b in self.intf_edges:
            s[a].add(b)
        return s

    def has_edge(self, a, b):
        return self.comm.has_edge(a, b) or b in self._intf[a]

    def out_nbrs(self, a):
        return self.comm.out_nbrs[a] | self._intf[a]

    def in_nbrs(self, b):
        return self.comm.in_nbrs[b] | {a for a in self.comm.vertices if b in self._intf[a]}


def _pairs_within(net, lo, hi):
    d = net.dist
    n = net.n
    # boundary distances count as inside (ranges come out of a float power)
    mask = (d <= hi * (1 + 1e-12)) & ~np.eye(n, dtype=bool)
    if lo is not None:
        mask &= d > lo * (1 + 1e-12)
    a, b = np.nonzero(mask)
    return [(int(i) + 1, int(j) + 1) for i, j in zip(a, b)]


def build_comm_graph(net):
    rc = comm_range(net.params)
    return CommGraph.from_edges(net.n, _pairs_within(net, None, rc))


def build_two_tier(net, cg=None):
    cg = build_comm_graph(net) if cg is None else cg
    if net.params.intf_thresh is None:
        return TwoTierGraph(cg, ())
    rc, ri = comm_range(net.params), intf_range(net.params)
    return TwoTierGraph(cg, tuple(sorted(_pairs_within(net, rc, ri))))


def conflict_graph(net, cg):
    """Graph used for secondary conflicts: two-tier when γi is set, else comm."""
    if net.params.intf_thresh is None:
        return cg
    return build_two_tier(net, cg)


@dataclass(frozen=True, eq=False)
class SinrGraph:
    links: tuple
    w: np.ndarray
    wp: np.ndarray
    noise: np.ndarray

    def index(self, link):
        return self.links.index(link)


def build_sinr_graph(net, cg):
    p = net.params
    links = cg.edges
    e = len(links)
    tx = np.array([a - 1 for a, _ in links], dtype=int)
    rx = np.array([b - 1 for _, b in links], dtype=int)
    d = net.dist
    beta = p.path_loss_exp
    own = d[tx, rx] ** beta
    # w[i, j]: interference of link i on link j
    cross = d[tx[:, None], rx[None, :]]
    with np.errstate(divide="ignore"):
        w = p.comm_thresh * own[None, :] / cross ** beta
    shared = (
        (tx[:, None] == tx[None, :]) | (tx[:, None] == rx[None, :])
        | (rx[:, None] == tx[None, :]) | (rx[:, None] == rx[None, :])
    )
    w[shared] = 1.0
    wp = np.maximum(0.0, 1.0 - w)
    noise = (p.noise_mw * p.comm_thresh / p.tx_power_mw) * own
    for arr in (w, wp, noise):
        arr.setflags(write=False)
    return SinrGraph(links, w, wp, noise)


def labeler(adj):
    """Min-degree peeling.

    `adj` maps vertex -> iterable of neighbours (undirected). The vertex of
    minimum residual degree gets the highest unassigned label; ties go to
    the lowest vertex id.
    """
    res = {v: set(nb) for v, nb in adj.items()}
    labels = {}
    nxt = len(res)
    while res:
        v = min(res, key=lambda u: (len(res[u]), u))
        labels[v] = nxt
        nxt -= 1
        for u in res.pop(v):
            res[u].discard(v)
    return labels


@dataclass(frozen=True)
class OrientedGraph:
    """A forest oriented away from (`out`) or towards (`in`) its BFS roots.

    `by_vertex` maps each non-root vertex to its single incoming (out-oriented)
    or outgoing (in-oriented) directed edge.
    """

    kind: str
    by_vertex: dict

    @property
    def edges(self):
        return list(self.by_vertex.values())


def _bfs_forests(adj):
    rem = {v: set(nb) for v, nb in adj.items()}
    forests = []
    while any(rem.values()):
        seen = set()
        tree = []
        for root in sorted(rem):
            if root in seen or not rem[root]:
                continue
            seen.add(root)
            q = deque([root])
            while q:
                u = q.popleft()
                for v in sorted(rem[u]):
                    if v not in seen:
                        seen.add(v)
                        tree.append((u, v))
                        q.append(v)
        for u, v in tree:
            rem[u].discard(v)
            rem[v].discard(u)
        forests.append(tree)
    return forests


def decompose_oriented(cg):
    """Split the comm graph into out-/in-oriented forests, T_1..T_k.

    Every forest from successive BFS passes yields one out-oriented and one
    in-oriented graph, so each directed comm edge lands in exactly one T_i.
    """
    out = []
    for tree in _bfs_forests(cg.undirected()):
        out.append(OrientedGraph("out", {c: (p, c) for p, c in tree}))
        out.append(OrientedGraph("in", {c: (c, p) for p, c in tree}))
    return out


def read_network(text):
    lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    try:
        n = int(lines[0])
        nodes = [tuple(float(t) for t in ln.split()) for ln in lines[1:n + 1]]
        vals = [float(t) for t in lines[n + 1].split()]
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed network file: {exc}") from exc
    if any(len(pt) != 2 for pt in nodes) or len(nodes) != n or len(vals) not in (4, 5):
        raise ValueError("malformed network file")
    params = RadioParams.from_db(vals[0], vals[1], vals[2], vals[3], vals[4] if len(vals) == 5 else None)
    return Network(tuple(nodes), params)


def write_network(net, noise_dbm, comm_db, intf_db=None):
    """Serialise; dB fields are passed back explicitly to keep the file exact."""
    p = net.params
    rows = [str(net.n)] + [f"{x:.6f} {y:.6f}" for x, y in net.nodes]
    tail = [f"{p.tx_power_mw:g}", f"{p.path_loss_exp:g}", f"{noise_dbm:g}", f"{comm_db:g}"]
    if intf_db is not None:
        tail.append(f"{intf_db:g}")
    rows.append(" ".join(tail))
    return "\n".join(rows) + "\n"
