"""Point-to-multipoint (broadcast) scheduling: BroadcastSchedule and MASS."""

from dataclasses import dataclass

import numpy as np

from .netgraph import labeler
from .rfcore import linear_to_db, meets_threshold


@dataclass(frozen=True)
class BroadcastScheduleT:
    slots: tuple  # tuple of tuples of transmitter ids

    @property
    def num_colors(self):
        return len(self.slots)

    @classmethod
    def from_colors(cls, colors):
        c = max(colors.values(), default=0)
        slots = [[] for _ in range(c)]
        for v, k in colors.items():
            slots[k - 1].append(v)
        return cls(tuple(tuple(sorted(s)) for s in slots if s))


def _two_hop(cg, u):
    """Vertices sharing a common out-neighbour with u."""
    out = set()
    for x in cg.out_nbrs[u]:
        out |= cg.in_nbrs[x]
    out.discard(u)
    return out


def _nc_colors(cg, colors, u):
    """Colors in use that have no primary or secondary vertex conflict with u."""
    bad = {colors[v] for v in cg.out_nbrs[u] | cg.in_nbrs[u] if v in colors}
    bad |= {colors[v] for v in _two_hop(cg, u) if v in colors}
    used = set(colors.values())
    return sorted(used - bad)


def broadcast_schedule(cg):
    """Labeler order, least non-conflicting color."""
    labels = labeler(cg.undirected())
    colors = {}
    for u in sorted(cg.vertices, key=lambda v: labels[v]):
        free = _nc_colors(cg, colors, u)
        top = max(colors.values(), default=0)
        colors[u] = free[0] if free else top + 1
    return BroadcastScheduleT.from_colors(colors)


def receiver_sinrs(net, cg, slot, u):
    """Linear SINR at every neighbour of u with all of `slot` transmitting.

    Isolated vertices hold a color but have nobody to send to, so they stay
    silent and add no interference.
    """
    p = net.params
    rp = net.rx_power
    others = [t - 1 for t in slot if t != u and cg.out_nbrs[t]]
    out = []
    for v in sorted(cg.out_nbrs[u]):
        if v in slot:
            out.append(0.0)
            continue
        j = v - 1
        out.append(rp[u - 1, j] / (p.noise_mw + sum(rp[t, j] for t in others)))
    return out


def mass(net, cg, rng, average="linear"):
    """Max average SINR schedule.

    `average` selects whether neighbour SINRs are averaged as linear values
    or in dB; either way the mean is compared against γc in the same unit.
    """
    if average not in ("linear", "db"):
        raise ValueError("average must be 'linear' or 'db'")
    thresh = net.params.comm_thresh
    if average == "db":
        thresh = float(linear_to_db(thresh))
    perm = rng.permutation(len(cg.vertices)) + 1
    labels = dict(zip(cg.vertices, (int(x) for x in perm)))
    colors = {}
    members = {}
    for u in sorted(cg.vertices, key=lambda v: labels[v]):
        if not cg.out_nbrs[u]:
            c = 1
        else:
            best, best_avg = None, -np.inf
            for c in _nc_colors(cg, colors, u):
                s = receiver_sinrs(net, cg, members[c] | {u}, u)
                if average == "db":
                    s = [linear_to_db(x) if x > 0 else -np.inf for x in s]
                avg = float(np.mean(s))
                if avg > best_avg:
                    best, best_avg = c, avg
            if best is not None and meets_threshold(best_avg, thresh):
                c = best
            else:
                c = max(colors.values(), default=0) + 1
        colors[u] = c
        members.setdefault(c, set()).add(u)
    return BroadcastScheduleT.from_colors(colors)


def spatial_reuse_p2mp(net, cg, s):
    """Per-slot sum of per-transmitter success fractions, averaged over slots."""
    if not s.slots:
        raise ValueError("spatial reuse undefined for an empty schedule")
    thresh = net.params.comm_thresh
    total = 0.0
    for slot in s.slots:
        slot = set(slot)
        for t in slot:
            if not cg.out_nbrs[t]:
                continue
            sinr = receiver_sinrs(net, cg, slot, t)
            total += sum(meets_threshold(x, thresh) for x in sinr) / len(sinr)
    return total / s.num_colors


def structural_violations(cg, s):
    """Problems with a broadcast coloring that do not depend on SINR."""
    viol = []
    seen = {}
    for k, slot in enumerate(s.slots, start=1):
        for t in slot:
            if t in seen:
                viol.append(("duplicate_vertex", (k, t)))
            seen.setdefault(t, k)
    for v in cg.vertices:
        if v not in seen:
            viol.append(("missing_vertex", v))
    return viol


def conflict_violations(cg, s):
    """Primary / secondary vertex conflicts inside each slot."""
    viol = []
    for k, slot in enumerate(s.slots, start=1):
        for i, a in enumerate(slot):
            for b in slot[i + 1:]:
                if cg.has_edge(a, b) or cg.has_edge(b, a):
                    viol.append(("primary", (k, a, b)))
                elif cg.out_nbrs[a] & cg.out_nbrs[b]:
                    viol.append(("secondary", (k, a, b)))
    return viol
