"""Markov chain analysis of one PCFCFS collision resolution period (CRP).

States are written as (kind, depth): ("R", 0) is the initial interval, and
for depth i >= 1 the kinds are
    "L"  left half entered after a collision,
    "Lp" left half entered after an idle left sibling (parent known >= 2),
    "R"  right sibling after a left success,
    "Rp" right sibling after a success in an "Lp" interval,
    "C"  right half after a capture (holds exactly one packet).
An interval at depth i holds Poisson(G_i) packets with G_i = g0 / 2**i.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .randomaccess import Feedback, run_crp

R0 = ("R", 0)
_SERIES_BELOW = 1e-4


def _one_minus_exp(x):
    """1 - e^-x."""
    return -math.expm1(-x)


def _a(x):
    """1 - (1 + x) e^-x, the probability of two or more Poisson(x) points."""
    if x < _SERIES_BELOW:
        return sum((-1) ** n * (n - 1) * x ** n / math.factorial(n) for n in range(2, 9))
    return -math.expm1(-x) - x * math.exp(-x)


def _b(x):
    """1 - (1 + x + x^2/4) e^-x: two or more points, and not one in each half."""
    return _a(x) - 0.25 * x * x * math.exp(-x)


@dataclass(frozen=True)
class CrpChain:
    g0: float
    i_max: int = 40

    def __post_init__(self):
        if not self.g0 > 0:
            raise ValueError("g0 must be positive")
        if self.i_max < 2:
            raise ValueError("i_max must be at least 2")

    def G(self, i):
        return self.g0 * 2.0 ** -i


@dataclass
class TransitionProbs:
    chain: CrpChain
    rows: dict = field(default_factory=dict)  # state -> {next state: prob}

    def p(self, a, b):
        return self.rows.get(a, {}).get(b, 0.0)


def transition_probs(chain):
    G = chain.G
    g0 = chain.g0
    e0 = math.exp(-g0)
    rows = {R0: {R0: (1 + g0) * e0, ("C", 1): 0.25 * g0 * g0 * e0, ("L", 1): _b(g0)}}
    for i in range(1, chain.i_max + 1):
        g, gp = G(i), G(i - 1)
        e = math.exp(-g)
        cap = 0.25 * g * g * e
        den_l = _b(gp)
        rows[("L", i)] = {
            ("R", i): _a(g) * g * e / den_l,
            ("Lp", i + 1): _a(g) * e / den_l,
            ("C", i + 1): cap / den_l,
            ("L", i + 1): _b(g) / den_l,
        }
        rows[("R", i)] = {("C", i + 1): cap / _a(g), ("L", i + 1): _b(g) / _a(g)}
        if i >= 2:
            den = _a(gp)
            rows[("Lp", i)] = {
                ("Rp", i): _one_minus_exp(g) * g * e / den,
                ("Lp", i + 1): _a(g) * e / den,
                ("C", i + 1): cap / den,
                ("L", i + 1): _b(g) / den,
            }
            den = _one_minus_exp(g)
            rows[("Rp", i)] = {R0: g * e / den, ("C", i + 1): cap / den, ("L", i + 1): _b(g) / den}
        rows[("C", i)] = {R0: 1.0}
    return TransitionProbs(chain, rows)


def _limits(i):
    return [
        (("Lp", i), ("Rp", i), 0.5),
        (("Lp", i), ("Lp", i + 1), 0.25),
        (("Lp", i), ("C", i + 1), 0.125),
        (("Lp", i), ("L", i + 1), 0.125),
        (("Rp", i), R0, 1.0),
        (("Rp", i), ("C", i + 1), 0.0),
        (("Rp", i), ("L", i + 1), 0.0),
        (("L", i), ("R", i), 0.0),
        (("L", i), ("Lp", i + 1), 0.5),
        (("L", i), ("C", i + 1), 0.25),
        (("L", i), ("L", i + 1), 0.25),
        (("R", i), ("C", i + 1), 0.5),
        (("R", i), ("L", i + 1), 0.5),
    ]


def limiting_probs_check(chain, depth=None, tol=1e-6):
    """Compare deep-state transition probabilities with their i -> inf limits.

    Returns a list of (from, to, value, limit, ok) at `depth` (default i_max).
    """
    i = chain.i_max if depth is None else depth
    tp = transition_probs(CrpChain(chain.g0, max(chain.i_max, i)))
    return [(a, b, tp.p(a, b), lim, abs(tp.p(a, b) - lim) <= tol) for a, b, lim in _limits(i)]


def _order(i_max):
    yield R0
    for i in range(1, i_max + 1):
        for k in ("L", "Lp", "R", "Rp", "C"):
            yield (k, i)


def hit_probs(tp):
    """Probability that a CRP ever visits each state.

    Every state is visited at most once and edges only go deeper (or from
    a left interval to its sibling), so one pass in depth order suffices.
    """
    incoming = {}
    for a, row in tp.rows.items():
        for b, pr in row.items():
            if b != R0:
                incoming.setdefault(b, []).append((a, pr))
    q = {R0: 1.0}
    for s in _order(tp.chain.i_max):
        if s == R0:
            continue
        q[s] = sum(q.get(a, 0.0) * pr for a, pr in incoming.get(s, ()))
    return q


def expected_slots(q):
    return 1.0 + sum(v for s, v in q.items() if s != R0)


def _returned_prob(tp, kind, i):
    """Probability an interval of this kind holds >= 2 packets, given how it was entered."""
    c = tp.chain
    if kind == "L":
        return _a(c.G(i)) / _b(c.G(i - 1))
    if i < 2:
        return 0.0
    return _a(c.G(i)) / _a(c.G(i - 1))


def expected_fraction(q, tp):
    """Expected fraction of the initial interval handed back unresolved."""
    tot = 0.0
    for i in range(1, tp.chain.i_max + 1):
        for k in ("L", "Lp"):
            tot += q.get((k, i), 0.0) * _returned_prob(tp, k, i) * 2.0 ** -i
    return tot


def truncation_bound(q, i_max):
    """Geometric tail bound on the mass of states deeper than i_max."""
    return sum(v for (k, i), v in q.items() if i == i_max)


def crp_moments(g0, i_max=40):
    tp = transition_probs(CrpChain(g0, i_max))
    q = hit_probs(tp)
    return expected_slots(q), expected_fraction(q, tp)


def zeta(g0, i_max=40):
    ek, ef = crp_moments(g0, i_max)
    return g0 * (1.0 - ef) / ek


def drift(chain, phi0):
    """Expected change in time backlog over one CRP (in slots)."""
    ek, ef = crp_moments(chain.g0, chain.i_max)
    return ek - phi0 * (1.0 - ef)


def maximize_zeta(grid_step=1e-3, g_max=4.0, tol=1e-6, i_max=40):
    """Grid scan of zeta on (0, g_max], then a bounded refinement around the best point."""
    if grid_step <= 0:
        raise ValueError("grid_step must be positive")
    grid = np.arange(grid_step, g_max + grid_step / 2, grid_step)
    vals = np.array([zeta(g, i_max) for g in grid])
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda g: -zeta(g, i_max), bounds=(lo, hi), method="bounded", options={"xatol": tol})
    return float(res.x), float(-res.fun)


def chain_path(feedbacks):
    """Map a CRP feedback sequence onto the visited chain states."""
    state = R0
    path = []
    for fb in feedbacks:
        path.append(state)
        kind, i = state
        if fb is Feedback.COLLISION:
            state = ("L", i + 1)
        elif fb is Feedback.CAPTURE:
            state = ("C", i + 1)
        elif fb is Feedback.SUCCESS and kind in ("L", "Lp") and i > 0:
            state = ("R" if kind == "L" else "Rp", i)
        elif fb is Feedback.IDLE and kind in ("L", "Lp") and i > 0:
            state = ("Lp", i + 1)
        else:
            state = R0
    path.append(R0)
    return path


def simulate_crps(g0, n, rng):
    """Run n CRPs on Poisson(g0) points in [0, 1).

    Returns (slots per CRP, returned fraction per CRP, transition counts).
    """
    counts = rng.poisson(g0, n)
    ks = np.empty(n, dtype=np.int64)
    fs = np.empty(n)
    trans = {}
    for t in range(n):
        pts = rng.random(counts[t]).tolist()
        rows, end = run_crp(pts, 0.0, 1.0, capture=True)
        ks[t] = len(rows)
        fs[t] = 1.0 - end
        path = chain_path([r[-1] for r in rows])
        for a, b in zip(path, path[1:]):
            d = trans.setdefault(a, {})
            d[b] = d.get(b, 0) + 1
    return ks, fs, trans


def optimum(grid_step=1e-3, g_max=4.0, i_max=40):
    """(g0*, zeta*, phi0) with phi0 = g0* / zeta* the matching initial window."""
    g, z = maximize_zeta(grid_step, g_max, i_max=i_max)
    return g, z, g / z
