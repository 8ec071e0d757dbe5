"""Experiment presets, seeding and the N-sweep driver shared by the CLI and tests."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np

from .netgraph import build_comm_graph, gen_uniform_disk, gen_uniform_square
from .rfcore import RadioParams
from .sched_p2mp import broadcast_schedule, mass, spatial_reuse_p2mp
from .sched_p2p import als, als_reuse_colors, cfls, sgls_schedule, spatial_reuse

P2P_ALGOS = ("als", "als-reuse", "cfls", "sgls")
P2MP_ALGOS = ("bs", "mass")
ALGOS = P2P_ALGOS + P2MP_ALGOS


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    region: str  # "disk" (extent = radius) or "square" (extent = side)
    extent_m: float
    tx_power_mw: float
    path_loss_exp: float
    noise_dbm: float
    comm_db: float
    intf_db: float | None = None
    trials: int = 1000

    @property
    def params(self):
        return RadioParams.from_db(self.tx_power_mw, self.path_loss_exp, self.noise_dbm, self.comm_db, self.intf_db)

    def network(self, n, rng):
        gen = gen_uniform_disk if self.region == "disk" else gen_uniform_square
        return gen(n, self.extent_m, self.params, rng)


PRESETS = {
    "expt1": ExperimentConfig("expt1", "disk", 500.0, 10.0, 4.0, -90.0, 20.0, 10.0),
    "expt2": ExperimentConfig("expt2", "disk", 700.0, 15.0, 4.0, -85.0, 15.0, 7.0),
    # square deployment used for the ALS vs ALSReuseColors length comparison
    "square750": ExperimentConfig("square750", "square", 750.0, 10.0, 4.0, -90.0, 20.0),
}


def trial_rngs(seed, trials):
    """One independent generator per trial.

    Trial i uses SeedSequence(seed).spawn(trials)[i], so it can be rerun on
    its own with the same seed.
    """
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def run_algo(algo, net, cg, rng):
    if algo == "als":
        return als(net, cg)
    if algo == "als-reuse":
        return als_reuse_colors(net, cg)
    if algo == "cfls":
        return cfls(net, cg, rng)
    if algo == "sgls":
        return sgls_schedule(net, cg, rng)
    if algo == "bs":
        return broadcast_schedule(cg)
    if algo == "mass":
        return mass(net, cg, rng)
    raise ValueError(f"unknown algorithm {algo!r}")


def schedule_metric(algo, net, cg, s, metric):
    if metric == "colors":
        return float(s.num_colors)
    if metric != "reuse":
        raise ValueError(f"unknown metric {metric!r}")
    if algo in P2MP_ALGOS:
        return spatial_reuse_p2mp(net, cg, s)
    return spatial_reuse(net, s)


def one_trial(cfg, algo, n, rng, metric="reuse"):
    """Draw one network and score one schedule on it; None if there are no links."""
    net = cfg.network(n, rng)
    cg = build_comm_graph(net)
    if not cg.edges:
        return None
    s = run_algo(algo, net, cg, rng)
    return schedule_metric(algo, net, cg, s, metric)


def mean_stderr(vals):
    v = np.asarray([x for x in vals if x is not None], dtype=float)
    if v.size == 0:
        return math.nan, math.nan
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def sweep(cfg, algo, ns, trials, seed, metric="reuse", jobs=1):
    """Mean metric and standard error per N; rows sorted by N.

    The seed for (N, trial) depends only on (seed, position of N, trial), so
    results do not depend on `jobs`.
    """
    if algo not in ALGOS:
        raise ValueError(f"unknown algorithm {algo!r}")
    roots = np.random.SeedSequence(seed).spawn(len(ns))
    tasks = []
    for n, root in zip(ns, roots):
        for ss in root.spawn(trials):
            tasks.append((n, ss))

    def work(task):
        n, ss = task
        return n, one_trial(cfg, algo, n, np.random.default_rng(ss), metric)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    rows = []
    for n in sorted(set(ns)):
        rows.append((n, *mean_stderr(v for m, v in results if m == n)))
    return rows


def parse_range(text, cast=float):
    """'a:b:step' inclusive of b (up to float slack); a lone number is a single point."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [cast(parts[0])]
        if len(parts) != 3:
            raise ValueError
        a, b, step = (float(x) for x in parts)
    except ValueError:
        raise ValueError(f"bad range {text!r}, expected a:b:step") from None
    if step <= 0 or b < a:
        raise ValueError(f"bad range {text!r}")
    k = int(math.floor((b - a) / step + 1e-9))
    return [cast(round(a + i * step, 10)) for i in range(k + 1)]
