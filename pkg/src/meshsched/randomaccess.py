"""Slotted FCFS splitting with and without two-level power capture.

PCFCFS transmits the left half of the allocation interval at P2 and the right
half at P1, so a single left user and a single right user produce a capture
instead of a collision. FCFS is the classical splitting algorithm at uniform
power P1.

Time is measured in slots. Transmissions of slot k happen at time k and only
packets that arrived in the allocation interval [T, T + phi) take part.
"""

from bisect import bisect_left
from dataclasses import dataclass, field, replace
from enum import Enum
import math

import numpy as np

from .rfcore import db_to_linear, meets_threshold


class Feedback(str, Enum):
    IDLE = "0"
    SUCCESS = "1"
    CAPTURE = "c"
    COLLISION = "e"


@dataclass(frozen=True)
class RaConfig:
    gamma_c: float
    noise_mw: float
    beta: float
    distance_m: float
    lam: float = 0.4
    phi0: float = 2.54
    alpha0: float = 2.6
    tau: int = 300_000
    warmup: int = 1_000
    seed: int | None = None

    def __post_init__(self):
        for name in ("gamma_c", "noise_mw", "beta", "distance_m", "lam", "phi0", "alpha0", "tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.warmup < 0:
            raise ValueError("warmup must be nonnegative")

    @classmethod
    def table_8_1(cls, **kw):
        base = dict(gamma_c=db_to_linear(7.0), noise_mw=db_to_linear(-90.0), beta=4.0, distance_m=100.0)
        base.update(kw)
        return cls(**base)

    def with_lambda(self, lam):
        return replace(self, lam=lam)


@dataclass
class RaMetrics:
    throughput: float | None
    avg_delay: float | None
    avg_power: float | None
    n_success: int = 0
    trace: list = field(default_factory=list, repr=False)


def capture_powers(cfg):
    p1 = cfg.gamma_c * cfg.noise_mw * cfg.distance_m ** cfg.beta
    return p1, p1 * (1.0 + cfg.gamma_c)


def slot_feedback(transmitting, cfg):
    """Physical-layer feedback for users all at distance D from the receiver.

    `transmitting` is a list of (arrival_time, power_mw).
    """
    n = len(transmitting)
    if n == 0:
        return Feedback.IDLE
    if n == 1:
        return Feedback.SUCCESS
    loss = cfg.distance_m ** -cfg.beta
    rx = [pw * loss for _, pw in transmitting]
    tot = sum(rx)
    ok = [meets_threshold(r / (cfg.noise_mw + tot - r), cfg.gamma_c) for r in rx]
    k = sum(ok)
    assert k <= 1, "two simultaneous captures cannot happen at equal distance"
    return Feedback.CAPTURE if k == 1 else Feedback.COLLISION


def combinatorial_feedback(n_left, n_right, post_capture, capture=True):
    n = n_left + n_right
    if n == 0:
        return Feedback.IDLE
    if n == 1:
        return Feedback.SUCCESS
    if capture and not post_capture and n_left == 1 and n_right == 1:
        return Feedback.CAPTURE
    return Feedback.COLLISION


@dataclass
class Splitter:
    """Allocation interval state machine shared by PCFCFS and FCFS."""

    T: float
    phi: float
    tag: str = "R"
    post_capture: bool = False

    def halves(self):
        return self.T, self.T + self.phi / 2.0, self.T + self.phi

    def update(self, fb, k, phi_max):
        """Apply slot-k feedback; return True when a new CRP begins at slot k+1."""
        self.post_capture = False
        if fb is Feedback.COLLISION:
            self.phi /= 2.0
            self.tag = "L"
        elif fb is Feedback.CAPTURE:
            self.T += self.phi / 2.0
            self.phi /= 2.0
            self.tag = "R"
            self.post_capture = True
        elif fb is Feedback.SUCCESS and self.tag == "L":
            self.T += self.phi
            self.tag = "R"
        elif fb is Feedback.IDLE and self.tag == "L":
            self.T += self.phi
            self.phi /= 2.0
            self.tag = "L"
        else:
            self.T += self.phi
            self.phi = min(phi_max, (k + 1) - self.T)
            self.tag = "R"
            return True
        return False


def run_crp(arrivals, start, length, capture=True):
    """Resolve one CRP on the interval [start, start + length).

    Returns the list of per-slot (T, phi, tag, n_left, n_right, feedback) and
    the right end of the resolved part when the CRP finishes.
    """
    pts = sorted(a for a in arrivals if start <= a < start + length)
    if len(set(pts)) != len(pts):
        raise ValueError("arrival times must be distinct")
    sp = Splitter(start, length)
    rows = []
    while True:
        lo, mid, hi = sp.halves()
        i, j, m = bisect_left(pts, lo), bisect_left(pts, mid), bisect_left(pts, hi)
        nl, nr = j - i, m - j
        if sp.post_capture:
            nl, nr = 0, nl + nr
        fb = combinatorial_feedback(nl, nr, sp.post_capture, capture)
        rows.append((sp.T, sp.phi, sp.tag, nl, nr, fb))
        if fb in (Feedback.SUCCESS, Feedback.CAPTURE):
            del pts[i]
        if sp.update(fb, math.inf, math.inf):
            return rows, rows[-1][0] + rows[-1][1]


def _arrivals(lam, horizon, rng):
    n = int(lam * horizon + 10 * math.sqrt(lam * horizon) + 100)
    gaps = rng.exponential(1.0 / lam, n)
    gaps[0] = 0.0  # first packet arrives at time 0
    a = np.cumsum(gaps)
    while a[-1] < horizon:
        more = np.cumsum(rng.exponential(1.0 / lam, n)) + a[-1]
        a = np.concatenate([a, more])
    return a[a < horizon]


def _simulate(cfg, capture, trace=False, check_physical=False):
    rng = np.random.default_rng(cfg.seed)
    p1, p2 = capture_powers(cfg)
    phi_max = cfg.phi0 if capture else cfg.alpha0
    last = cfg.warmup + cfg.tau  # slots 1..last-1 are run
    arr = _arrivals(cfg.lam, last + 1, rng)
    energy = np.zeros(len(arr))
    dep_slot = np.full(len(arr), -1, dtype=np.int64)
    n_dep = 0
    rows = []
    sp = Splitter(0.0, min(phi_max, 1.0))
    for k in range(1, last):
        assert sp.phi > 0 and sp.T + sp.phi <= k + 1e-9
        lo_t, mid_t, hi_t = sp.halves()
        lo = int(np.searchsorted(arr, lo_t, "left"))
        mid = int(np.searchsorted(arr, mid_t, "left"))
        hi = int(np.searchsorted(arr, hi_t, "left"))
        assert lo == n_dep, "packets before the interval must already be gone"
        if sp.post_capture:
            nl, nr = 0, hi - lo
        else:
            nl, nr = mid - lo, hi - mid
        pl = p2 if capture and not sp.post_capture else p1
        if hi > lo:
            energy[lo:lo + nl] += pl
            energy[lo + nl:hi] += p1
        fb = combinatorial_feedback(nl, nr, sp.post_capture, capture)
        if check_physical:
            tx = [(arr[i], pl) for i in range(lo, lo + nl)] + [(arr[i], p1) for i in range(lo + nl, hi)]
            assert slot_feedback(tx, cfg) is fb, (k, nl, nr, sp.post_capture)
        if trace:
            rows.append(f"{k} {sp.T:.6g} {sp.phi:.6g} {sp.tag} {nl} {nr} {fb.value}")
        if fb in (Feedback.SUCCESS, Feedback.CAPTURE):
            dep_slot[lo] = k
            n_dep += 1
        sp.update(fb, k, phi_max)

    # departures must follow arrival order
    order = dep_slot[dep_slot >= 0]
    assert np.all(np.diff(order) > 0)
    dep_slot[dep_slot < cfg.warmup] = -1
    out = metrics(arr, dep_slot, energy, cfg.tau)
    out.trace = rows
    return out


def simulate_pcfcfs(cfg, trace=False, check_physical=False):
    return _simulate(cfg, capture=True, trace=trace, check_physical=check_physical)


def simulate_fcfs(cfg, trace=False, check_physical=False):
    return _simulate(cfg, capture=False, trace=trace, check_physical=check_physical)


def metrics(arrivals, departures, energy, tau):
    """Throughput, delay and power from per-packet records.

    `departures` holds the departure slot of each packet (or -1), `energy`
    the summed transmit power each packet spent.
    """
    arrivals = np.asarray(arrivals, dtype=float)
    departures = np.asarray(departures)
    energy = np.asarray(energy, dtype=float)
    done = departures >= 0
    n = int(done.sum())
    if n == 0:
        return RaMetrics(None, None, None, 0)
    delay = float(((departures[done] + 1) - arrivals[done]).sum() / n)
    return RaMetrics(n / tau, delay, float(energy[done].sum() / n), n)
