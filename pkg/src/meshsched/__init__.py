"""Wireless mesh STDMA scheduling, power-capture random access and token-bucket entropy."""

from .estimators import BroadcastScheduler, LinkScheduler
from .netgraph import Network, build_comm_graph, build_sinr_graph, build_two_tier, read_network, write_network
from .rfcore import ChannelGain, RadioParams, db_to_linear, linear_to_db

__all__ = [
    "BroadcastScheduler",
    "ChannelGain",
    "LinkScheduler",
    "Network",
    "RadioParams",
    "build_comm_graph",
    "build_sinr_graph",
    "build_two_tier",
    "db_to_linear",
    "linear_to_db",
    "read_network",
    "write_network",
]

__version__ = "0.1.0"
