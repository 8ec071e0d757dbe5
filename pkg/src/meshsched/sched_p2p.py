"""Point-to-point link schedulers, the schedule validator and a brute-force oracle."""

from dataclasses import dataclass, field

import numpy as np

from .netgraph import build_sinr_graph, conflict_graph, decompose_oriented, labeler
from .rfcore import linear_to_db, meets_threshold

ORACLE_MAX_EDGES = 10


@dataclass(frozen=True)
class LinkSchedule:
    slots: tuple  # tuple of tuples of (tx, rx)

    @property
    def num_colors(self):
        return len(self.slots)

    @classmethod
    def from_colors(cls, colors):
        """Build from a {link: color} map with colors numbered from 1."""
        c = max(colors.values(), default=0)
        slots = [[] for _ in range(c)]
        for link, k in colors.items():
            slots[k - 1].append(link)
        return cls(tuple(tuple(sorted(s)) for s in slots if s))

    def colors(self):
        return {link: k + 1 for k, s in enumerate(self.slots) for link in s}


@dataclass
class ScheduleReport:
    conflict_free: bool
    spatial_reuse: float
    slot_sinr_db: list = field(default_factory=list)  # per slot: [(link, sinr_db)]
    violations: list = field(default_factory=list)  # (kind, detail)


def _adjacency(g):
    """out/in neighbour maps of a CommGraph or TwoTierGraph."""
    if hasattr(g, "comm"):
        vs = g.comm.vertices
        return {v: g.out_nbrs(v) for v in vs}, {v: g.in_nbrs(v) for v in vs}
    return g.out_nbrs, g.in_nbrs


class _EdgeColorBook:
    """Colors already used at each node as transmitter / receiver."""

    def __init__(self, vertices):
        self.tx = {v: set() for v in vertices}
        self.rx = {v: set() for v in vertices}

    def primary(self, s, d):
        return self.tx[s] | self.rx[s] | self.tx[d] | self.rx[d]

    def forbidden(self, s, d, out_nb, in_nb):
        bad = self.primary(s, d)
        for b in out_nb[s]:
            bad |= self.rx[b]
        for a in in_nb[d]:
            bad |= self.tx[a]
        return bad

    def add(self, s, d, c):
        self.tx[s].add(c)
        self.rx[d].add(c)


def _least_free(bad, start=1):
    c = start
    while c in bad:
        c += 1
    return c


def _scan_order(cg, labels):
    """Edges in coloring order: oriented graph by oriented graph, vertices by label."""
    by_label = sorted(cg.vertices, key=lambda v: labels[v])
    for t in decompose_oriented(cg):
        for v in by_label:
            if v in t.by_vertex:
                yield t, t.by_vertex[v]


def _arborical(net, cg, reuse):
    out_nb, in_nb = _adjacency(conflict_graph(net, cg))
    labels = labeler(cg.undirected())
    book = _EdgeColorBook(cg.vertices)
    colors = {}
    ncol = 0
    base = 1
    current = None
    for t, (s, d) in _scan_order(cg, labels):
        if t is not current:
            current = t
            base = 1 if reuse else ncol + 1
        c = _least_free(book.forbidden(s, d, out_nb, in_nb), base)
        colors[(s, d)] = c
        book.add(s, d, c)
        ncol = max(ncol, c)
    return LinkSchedule.from_colors(colors)


def als(net, cg):
    """Arborical link schedule: fresh colors for every oriented graph."""
    return _arborical(net, cg, reuse=False)


def als_reuse_colors(net, cg):
    """Arborical link schedule that reuses the least non-conflicting existing color."""
    return _arborical(net, cg, reuse=True)


class _SinrColor:
    __slots__ = ("tx", "rx", "intf")

    def __init__(self):
        self.tx, self.rx, self.intf = [], [], []


def _fits(cl, s, d, rp, noise, thresh):
    i, j = s - 1, d - 1
    intf = sum(rp[t, j] for t in cl.tx)
    if not meets_threshold(rp[i, j] / (noise + intf), thresh):
        return False
    for t, r, acc in zip(cl.tx, cl.rx, cl.intf):
        if not meets_threshold(rp[t, r] / (noise + acc + rp[i, r]), thresh):
            return False
    return True


def _join(cl, s, d, rp):
    i, j = s - 1, d - 1
    cl.intf = [acc + rp[i, r] for r, acc in zip(cl.rx, cl.intf)]
    cl.intf.append(sum(rp[t, j] for t in cl.tx))
    cl.tx.append(i)
    cl.rx.append(j)


def cfls(net, cg, rng):
    """Conflict-free link schedule: random labels, first SINR-feasible color."""
    p = net.params
    perm = rng.permutation(len(cg.vertices)) + 1
    labels = dict(zip(cg.vertices, (int(x) for x in perm)))
    rp = net.rx_power
    book = _EdgeColorBook(cg.vertices)
    classes = []
    colors = {}
    for _, (s, d) in _scan_order(cg, labels):
        bad = book.primary(s, d)
        chosen = None
        for c, cl in enumerate(classes, start=1):
            if c not in bad and _fits(cl, s, d, rp, p.noise_mw, p.comm_thresh):
                chosen = c
                break
        if chosen is None:
            classes.append(_SinrColor())
            chosen = len(classes)
        _join(classes[chosen - 1], s, d, rp)
        book.add(s, d, chosen)
        colors[(s, d)] = chosen
    return LinkSchedule.from_colors(colors)


def sgls_admissible(sg, members, u):
    """SINR-graph admission test for vertex `u` joining the color class `members`."""
    wp = sg.wp
    m = np.asarray(members, dtype=int)
    k = len(m)
    if wp[m, u].sum() <= k + sg.noise[u] - 1:
        return False
    into = wp[np.ix_(m, m)].sum(axis=0) + wp[u, m]
    return bool(np.all(into > k + sg.noise[m] - 1))


def sgls(net, sg, rng, pick_order=None):
    """SINR-graph link schedule.

    Each color starts from one uncolored vertex (uniformly at random, or the
    next entry of `pick_order` when given) and greedily absorbs candidates in
    link-index order, re-scanning after every admission until a full pass
    admits nobody.
    """
    e = len(sg.links)
    wp = sg.wp
    noise_m1 = sg.noise - 1
    uncolored = np.ones(e, dtype=bool)
    picks = list(pick_order or [])
    colors = {}
    c = 0
    while uncolored.any():
        c += 1
        seed = None
        while picks and seed is None:
            cand = sg.index(tuple(picks.pop(0)))
            if uncolored[cand]:
                seed = cand
        if seed is None:
            seed = int(rng.choice(np.flatnonzero(uncolored)))
        members = [seed]
        uncolored[seed] = False
        # running row/column sums over the class; same test as sgls_admissible
        into = wp[seed].copy()
        out = wp[:, seed].copy()
        while True:
            k = len(members)
            cand = np.flatnonzero(uncolored & (into + out > 0) & (into > k + noise_m1))
            if cand.size:
                m = members
                ok = np.all(into[m] + wp[cand][:, m] > k + noise_m1[m], axis=1)
                cand = cand[ok]
            if not cand.size:
                break
            u = int(cand[0])
            members.append(u)
            uncolored[u] = False
            into += wp[u]
            out += wp[:, u]
        for v in members:
            colors[sg.links[v]] = c
    return LinkSchedule.from_colors(colors)


def link_sinrs(net, slot, gains=None):
    """Linear SINR at the receiver of every link in one slot."""
    p = net.params
    out = []
    for s, d in slot:
        sig = p.tx_power_mw / net.d(s, d) ** p.path_loss_exp
        if gains is not None:
            sig *= gains[(s, d)].factor
        intf = 0.0
        for t, _ in slot:
            if t == s:
                continue
            dd = net.d(t, d)
            if dd == 0.0:
                intf = np.inf
                break
            g = 1.0 if gains is None else gains[(t, d)].factor
            intf += g * p.tx_power_mw / dd ** p.path_loss_exp
        out.append(sig / (p.noise_mw + intf))
    return out


def validate_schedule(net, cg, s, gains=None):
    """Check a link schedule and measure its spatial reuse.

    `gains`, when given, maps (tx node, rx node) to a ChannelGain and the
    faded SINR is used instead of the nominal one.
    """
    viol = []
    seen = {}
    for k, slot in enumerate(s.slots, start=1):
        ends = {}
        for link in slot:
            if not cg.has_edge(*link):
                viol.append(("not_comm_edge", (k, link)))
            if link in seen:
                viol.append(("duplicate_edge", (k, link)))
            seen.setdefault(link, k)
            for node in link:
                if node in ends:
                    viol.append(("endpoint_clash", (k, link, ends[node])))
                ends.setdefault(node, link)
    for link in cg.edges:
        if link not in seen:
            viol.append(("missing_edge", link))

    thresh = net.params.comm_thresh
    good = 0
    all_ok = True
    per_slot = []
    for slot in s.slots:
        sinr = link_sinrs(net, slot, gains)
        ok = [meets_threshold(x, thresh) for x in sinr]
        good += sum(ok)
        all_ok &= all(ok)
        per_slot.append([(link, float(linear_to_db(x)) if x > 0 else -np.inf) for link, x in zip(slot, sinr)])
    c = s.num_colors
    reuse = good / c if c else 0.0
    return ScheduleReport(not viol and all_ok, reuse, per_slot, viol)


def spatial_reuse(net, s, gains=None):
    thresh = net.params.comm_thresh
    good = sum(meets_threshold(x, thresh) for slot in s.slots for x in link_sinrs(net, slot, gains))
    return good / s.num_colors


def _slot_ok(net, links):
    nodes = [v for link in links for v in link]
    if len(set(nodes)) != len(nodes):
        return False
    thresh = net.params.comm_thresh
    return all(meets_threshold(x, thresh) for x in link_sinrs(net, links))


def brute_force_min_schedule(net, cg):
    """Minimum-length conflict-free schedule by exhaustive subset DP."""
    edges = cg.edges
    e = len(edges)
    if e > ORACLE_MAX_EDGES:
        raise ValueError(f"oracle limited to {ORACLE_MAX_EDGES} edges, got {e}")
    if e == 0:
        return LinkSchedule(())
    full = (1 << e) - 1
    feasible = [False] * (full + 1)
    for mask in range(1, full + 1):
        feasible[mask] = _slot_ok(net, [edges[i] for i in range(e) if mask >> i & 1])
    best = [0] + [e + 1] * full
    choice = [0] * (full + 1)
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        while True:
            grp = sub | low
            if feasible[grp] and best[mask ^ grp] + 1 < best[mask]:
                best[mask] = best[mask ^ grp] + 1
                choice[mask] = grp
            if sub == 0:
                break
            sub = (sub - 1) & rest
    slots = []
    mask = full
    while mask:
        grp = choice[mask]
        slots.append(tuple(edges[i] for i in range(e) if grp >> i & 1))
        mask ^= grp
    return LinkSchedule(tuple(slots))


def format_schedule(s, broadcast=False):
    lines = []
    for slot in s.slots:
        if broadcast:
            lines.append(" ".join(f"{t}->*" for t in slot))
        else:
            lines.append(" ".join(f"{a}->{b}" for a, b in slot))
    return "\n".join(lines) + "\n"


def parse_schedule(text):
    """Parse `tx->rx` / `tx->*` lines.

    Returns ("p2p", LinkSchedule) or ("p2mp", tuple of transmitter tuples).
    """
    slots = []
    kind = None
    for raw in text.splitlines():
        raw = raw.split("#")[0].strip()
        if not raw:
            continue
        slot = []
        for tok in raw.split():
            a, sep, b = tok.partition("->")
            if not sep:
                raise ValueError(f"bad token {tok!r}")
            k = "p2mp" if b == "*" else "p2p"
            if kind not in (None, k):
                raise ValueError("mixed point-to-point and broadcast entries")
            kind = k
            slot.append(int(a) if b == "*" else (int(a), int(b)))
        slots.append(tuple(slot))
    if kind == "p2mp":
        return kind, tuple(slots)
    return "p2p", LinkSchedule(tuple(slots))


def sgls_schedule(net, cg, rng, pick_order=None):
    return sgls(net, build_sinr_graph(net, cg), rng, pick_order)
