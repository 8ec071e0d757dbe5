"""Units, radio parameters and SINR arithmetic.

All power values are kept in linear milliwatts internally. dB and dBm only
show up when parameters are built from user input.
"""

from dataclasses import dataclass
import math

import numpy as np

# relative slack applied to every SINR >= threshold comparison
THRESH_RTOL = 1e-9


class DegenerateGeometryError(ValueError):
    """A transmitter sits on top of the receiver it is evaluated at."""


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    if np.any(np.asarray(x) <= 0):
        raise ValueError("linear_to_db needs a strictly positive value")
    return 10.0 * np.log10(x)


def meets_threshold(sinr, thresh):
    """True when `sinr` reaches `thresh` up to the shared relative slack."""
    return sinr >= thresh * (1.0 - THRESH_RTOL)


@dataclass(frozen=True)
class RadioParams:
    """Transmit power, noise, path loss exponent and SINR thresholds (linear)."""

    tx_power_mw: float
    noise_mw: float
    path_loss_exp: float
    comm_thresh: float
    intf_thresh: float | None = None

    def __post_init__(self):
        for name in ("tx_power_mw", "noise_mw", "path_loss_exp", "comm_thresh"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.intf_thresh is not None:
            if not self.intf_thresh > 0:
                raise ValueError("intf_thresh must be strictly positive")
            if not self.comm_thresh > self.intf_thresh:
                raise ValueError("comm_thresh must exceed intf_thresh")

    @classmethod
    def from_db(cls, tx_power_mw, path_loss_exp, noise_dbm, comm_thresh_db, intf_thresh_db=None):
        return cls(
            tx_power_mw=float(tx_power_mw),
            noise_mw=db_to_linear(noise_dbm),
            path_loss_exp=float(path_loss_exp),
            comm_thresh=db_to_linear(comm_thresh_db),
            intf_thresh=None if intf_thresh_db is None else db_to_linear(intf_thresh_db),
        )

    def without_interference(self):
        return RadioParams(self.tx_power_mw, self.noise_mw, self.path_loss_exp, self.comm_thresh)


@dataclass(frozen=True)
class ChannelGain:
    """Rayleigh fading multiplier V and log-normal shadowing W (in bels)."""

    fading: float = 1.0
    shadow_bels: float = 0.0

    def __post_init__(self):
        if self.fading < 0:
            raise ValueError("fading multiplier must be nonnegative")

    @property
    def factor(self):
        return self.fading * 10.0 ** self.shadow_bels


def comm_range(p):
    return (p.tx_power_mw / (p.noise_mw * p.comm_thresh)) ** (1.0 / p.path_loss_exp)


def intf_range(p):
    if p.intf_thresh is None:
        raise ValueError("interference range needs intf_thresh")
    return (p.tx_power_mw / (p.noise_mw * p.intf_thresh)) ** (1.0 / p.path_loss_exp)


def received_power(power_mw, tx, rx, beta, gain=None):
    d = math.dist(tx, rx)
    if d == 0.0:
        raise DegenerateGeometryError(f"transmitter at {tx} coincides with receiver")
    g = 1.0 if gain is None else gain.factor
    return power_mw * g / d ** beta


def sinr_at(rx, intended_tx, other_txs, p, gains=None, signal_power=None):
    """Linear SINR at `rx` for the signal from `intended_tx`.

    `other_txs` is a list of (point, power_mw). `gains`, when given, holds one
    ChannelGain per transmitter: the intended one first, then `other_txs` in
    order. `signal_power` overrides the nominal transmit power.
    """
    beta = p.path_loss_exp
    g = [None] * (len(other_txs) + 1) if gains is None else list(gains)
    if len(g) != len(other_txs) + 1:
        raise ValueError("need one gain per transmitter")
    pw = p.tx_power_mw if signal_power is None else signal_power
    sig = received_power(pw, intended_tx, rx, beta, g[0])
    intf = sum(received_power(pk, pt, rx, beta, gk) for (pt, pk), gk in zip(other_txs, g[1:]))
    return sig / (p.noise_mw + intf)


def draw_gain(rng, sigma_v_sq, sigma_w_sq):
    if sigma_v_sq <= 0 or sigma_w_sq <= 0:
        raise ValueError("variances must be positive")
    v = rng.exponential(sigma_v_sq)
    w = rng.normal(0.0, math.sqrt(sigma_w_sq))
    return ChannelGain(float(v), float(w))
