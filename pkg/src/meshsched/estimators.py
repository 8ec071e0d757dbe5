"""scikit-learn style wrappers around the schedulers.

`fit(net)` computes a schedule on the network's comm graph; `score(net)`
returns its spatial reuse. Hyperparameters follow the get_params / set_params
protocol so schedulers can be cloned and swept like estimators.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .experiments import P2MP_ALGOS, P2P_ALGOS
from .netgraph import Network, build_comm_graph, build_sinr_graph
from .sched_p2mp import broadcast_schedule, mass, spatial_reuse_p2mp, structural_violations
from .sched_p2p import als, als_reuse_colors, cfls, sgls, validate_schedule


def check_network(net):
    if not isinstance(net, Network):
        raise TypeError(f"expected a Network, got {type(net).__name__}")
    return net


def check_is_fitted(est):
    if not hasattr(est, "schedule_"):
        raise RuntimeError(f"{type(est).__name__} is not fitted yet")


class LinkScheduler(BaseEstimator):
    """Point-to-point scheduler: algo in {'als', 'als-reuse', 'cfls', 'sgls'}."""

    def __init__(self, algo="sgls", seed=None, pick_order=None):
        self.algo = algo
        self.seed = seed
        self.pick_order = pick_order

    def fit(self, net, cg=None):
        net = check_network(net)
        if self.algo not in P2P_ALGOS:
            raise ValueError(f"unknown link scheduler {self.algo!r}")
        cg = build_comm_graph(net) if cg is None else cg
        rng = np.random.default_rng(self.seed)
        if self.algo == "als":
            s = als(net, cg)
        elif self.algo == "als-reuse":
            s = als_reuse_colors(net, cg)
        elif self.algo == "cfls":
            s = cfls(net, cg, rng)
        else:
            s = sgls(net, build_sinr_graph(net, cg), rng, self.pick_order)
        self.comm_graph_ = cg
        self.schedule_ = s
        self.n_colors_ = s.num_colors
        return self

    def report(self, net, gains=None):
        check_is_fitted(self)
        return validate_schedule(net, self.comm_graph_, self.schedule_, gains)

    def score(self, net, gains=None):
        return self.report(net, gains).spatial_reuse


class BroadcastScheduler(BaseEstimator):
    """Point-to-multipoint scheduler: algo in {'bs', 'mass'}."""

    def __init__(self, algo="mass", seed=None, average="linear"):
        self.algo = algo
        self.seed = seed
        self.average = average

    def fit(self, net, cg=None):
        net = check_network(net)
        if self.algo not in P2MP_ALGOS:
            raise ValueError(f"unknown broadcast scheduler {self.algo!r}")
        cg = build_comm_graph(net) if cg is None else cg
        if self.algo == "bs":
            s = broadcast_schedule(cg)
        else:
            s = mass(net, cg, np.random.default_rng(self.seed), self.average)
        self.comm_graph_ = cg
        self.schedule_ = s
        self.n_colors_ = s.num_colors
        return self

    def score(self, net):
        check_is_fitted(self)
        return spatial_reuse_p2mp(net, self.comm_graph_, self.schedule_)

    def violations(self):
        check_is_fitted(self)
        return structural_violations(self.comm_graph_, self.schedule_)
