"""Generalized token-bucket regulators: flow-entropy DP and optimal-regulator search.

A regulator over S slots hands out r_k tokens at slot k; a packet of length
l <= u_k + r_k may be sent and the leftover is capped by the bucket depth:
u_{k+1} = min(u_k + r_k - l, B_k), u_0 = 0, no cap after the last slot.
Entropies are in bits and are accumulated in log2 space.
"""

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np

TIE_TOL = 1e-9
MAX_S = 6
MAX_R = 6


@dataclass(frozen=True)
class GtbrSpec:
    r: tuple  # token increments, length S
    B: tuple  # bucket depths, length S - 1

    def __post_init__(self):
        r = tuple(int(x) for x in self.r)
        B = tuple(int(x) for x in self.B)
        if not r:
            raise ValueError("need at least one slot")
        if len(B) != len(r) - 1:
            raise ValueError("B must have S - 1 entries")
        if min(r) < 0 or (B and min(B) < 0):
            raise ValueError("token increments and depths must be nonnegative")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "B", B)

    @property
    def S(self):
        return len(self.r)

    @classmethod
    def standard(cls, S, r, B):
        return cls((r,) * S, (B,) * (S - 1))


def effective_caps(r, B):
    """Largest token count reachable after each capped slot.

    c_i = min(B_i, c_{i-1} + r_i) with c_{-1} = 0. Replacing B by c never
    changes the regulator's behaviour.
    """
    out = []
    prev = 0
    for ri, bi in zip(r, B):
        prev = min(bi, prev + ri)
        out.append(prev)
    return tuple(out)


def _log2sumexp2(v):
    m = v.max()
    if m == -np.inf:
        return -np.inf
    return float(m + np.log2(np.exp2(v - m).sum()))


@dataclass
class EntropyTable:
    spec: GtbrSpec
    H: list  # H[k][u] for k = 0..S, u = 0..mu[k]
    mu: tuple

    def h(self, k, u):
        if not 0 <= u <= self.mu[k]:
            raise ValueError(f"state (k={k}, u={u}) is not reachable")
        return float(self.H[k][u])

    @property
    def utility(self):
        return float(self.H[0][0])


def _next_u(spec, k, u, ell):
    x = u + spec.r[k] - ell
    return x if k == spec.S - 1 else min(x, spec.B[k])


def entropy_table(spec):
    """Backward recursion for the maximal flow entropy from every reachable state."""
    S = spec.S
    caps = effective_caps(spec.r, spec.B)
    mu = (0,) + caps + (caps[-1] + spec.r[-1] if caps else spec.r[0],)
    H = [None] * (S + 1)
    H[S] = np.zeros(mu[S] + 1)
    for k in range(S - 1, -1, -1):
        hk = np.empty(mu[k] + 1)
        for u in range(mu[k] + 1):
            ells = np.arange(u + spec.r[k] + 1)
            nxt = np.array([H[k + 1][_next_u(spec, k, u, ell)] for ell in ells])
            hk[u] = _log2sumexp2(ells + nxt)
        H[k] = hk
    return EntropyTable(spec, H, mu)


@dataclass(frozen=True)
class PacketLenPmf:
    probs: np.ndarray  # probs[l] for l = 0..u + r_k

    def entropy(self):
        p = self.probs[self.probs > 0]
        return float(-(p * np.log2(p)).sum())


def optimal_pmf(spec, table, k, u):
    if not 0 <= k < spec.S:
        raise ValueError(f"slot {k} out of range")
    if not 0 <= u <= table.mu[k]:
        raise ValueError(f"state (k={k}, u={u}) is not reachable")
    ells = np.arange(u + spec.r[k] + 1)
    logw = ells + np.array([table.H[k + 1][_next_u(spec, k, u, ell)] for ell in ells])
    w = np.exp2(logw - logw.max())
    return PacketLenPmf(w / w.sum())


def flow_entropy(spec, table, k, u, pmf):
    """Entropy of a length choice plus expected contents and successor entropy."""
    ells = np.arange(len(pmf.probs))
    nxt = np.array([table.H[k + 1][_next_u(spec, k, u, ell)] for ell in ells])
    return pmf.entropy() + float((pmf.probs * (ells + nxt)).sum())


def stbr_utility(S, r, B):
    return entropy_table(GtbrSpec.standard(S, r, B)).utility


def _compositions(total, parts, hi):
    if parts == 1:
        if total <= hi:
            yield (total,)
        return
    for a in range(min(total, hi), -1, -1):
        for rest in _compositions(total - a, parts - 1, hi):
            yield (a,) + rest


def _tight_caps(r, total):
    """Effective-cap sequences worth trying for token sequence r.

    H is nondecreasing in every cap, so only maximal feasible caps matter:
    the prefix sums if they already fit the budget, else every cap
    sequence using the full budget.
    """
    n = len(r) - 1
    if n == 0:
        yield ()
        return
    prefix = tuple(int(x) for x in np.cumsum(r)[:n])
    if sum(prefix) <= total:
        yield prefix
        return

    def rec(i, prev, rem):
        if i == n - 1:
            if 0 <= rem <= prev + r[i]:
                yield (rem,)
            return
        for c in range(min(prev + r[i], rem), -1, -1):
            for t in rec(i + 1, c, rem - c):
                yield (c,) + t

    yield from rec(0, 0, total)


def _slack_caps(r, total):
    """Feasible cap sequences whose sum is strictly below the budget."""
    n = len(r) - 1

    def rec(i, prev, used):
        if i == n:
            if used < total:
                yield ()
            return
        for c in range(min(prev + r[i], total - used) + 1):
            for t in rec(i + 1, c, used + c):
                yield (c,) + t

    yield from rec(0, 0, 0)


class _SuffixTables:
    """Memoised H_k over u = 0..U for every (r suffix, cap suffix)."""

    def __init__(self, U):
        self.U = U
        self.tab = lru_cache(maxsize=None)(self._tab)

    def _tab(self, rs, cs):
        U = self.U
        if not rs:
            return np.zeros(U + 1)
        nxt = self.tab(rs[1:], cs[1:])
        rk = rs[0]
        u = np.arange(U + 1)[:, None]
        ell = np.arange(U + rk + 1)[None, :]
        idx = u + rk - ell
        valid = idx >= 0
        if cs:
            idx = np.minimum(idx, cs[0])
        idx = np.clip(idx, 0, U)
        v = np.where(valid, ell + nxt[idx], -np.inf)
        m = v.max(axis=1, keepdims=True)
        return (m + np.log2(np.exp2(v - m).sum(axis=1, keepdims=True)))[:, 0]

    def utility(self, r, caps):
        return float(self.tab(tuple(r), tuple(caps))[0])


@dataclass
class GtbrSearch:
    spec: GtbrSpec  # first of the ties, caps in effective form
    h_g: float
    h_s: float
    ties: list  # sorted [(r, caps)]
    slack_best: float | None = None  # best H with sum(B) < (S-1)B, if checked

    @property
    def gain_pct(self):
        return 100.0 * (self.h_g / self.h_s - 1.0) if self.h_s > 0 else 0.0

    @property
    def slack_wins(self):
        return self.slack_best is not None and self.slack_best > self.h_g + TIE_TOL

    def __iter__(self):
        yield self.spec
        yield self.h_g


def check_search_args(S, r, B):
    if not 1 <= S <= MAX_S:
        raise ValueError(f"S must be in 1..{MAX_S}")
    if not 0 <= r <= MAX_R:
        raise ValueError(f"r must be in 0..{MAX_R}")
    if not 2 * r <= B <= 5 * r:
        raise ValueError("need 2r <= B <= 5r")


def search_optimal_gtbr(S, r, B, check_slack=False):
    """Exhaustive search for the entropy-maximising GTBR comparable to STBR (S, r, B).

    Token sequences sum to S*r with every entry at most B, and bucket depths
    sum to (S-1)*B. With `check_slack` (S <= 4 only) every depth sequence
    with a smaller sum is evaluated too and the best such value reported.
    """
    check_search_args(S, r, B)
    total = (S - 1) * B
    st = _SuffixTables(S * r)
    best, ties = -math.inf, []
    for rr in _compositions(S * r, S, B):
        for caps in _tight_caps(rr, total):
            h = st.utility(rr, caps)
            if h > best + TIE_TOL:
                best, ties = h, [(rr, caps)]
            elif h >= best - TIE_TOL:
                ties.append((rr, caps))
    ties.sort()
    slack = None
    if check_slack:
        if S > 4:
            raise ValueError("the slack check is limited to S <= 4")
        slack = -math.inf
        for rr in _compositions(S * r, S, B):
            for caps in _slack_caps(rr, total):
                slack = max(slack, st.utility(rr, caps))
    h_s = st.utility((r,) * S, effective_caps((r,) * S, (B,) * (S - 1)))
    return GtbrSearch(GtbrSpec(*ties[0]), best, h_s, ties, slack)
