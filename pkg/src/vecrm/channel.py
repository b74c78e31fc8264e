"""Uplink rate between a vehicle and a node: log-distance path loss plus Shannon capacity.

Small-scale fading is averaged out and links are orthogonal, so the rate of a
link depends only on the vehicle-node Euclidean distance.
"""
from __future__ import annotations

import math

import numpy as np

from .config import RadioParams
from .exceptions import GeometryError

_LN2 = math.log(2.0)


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def path_gain(distance, params: RadioParams):
    """Linear power gain ``g0 * (d0 / d) ** exponent``; accepts scalars or arrays."""
    d = np.asarray(distance, dtype=float)
    if np.any(~(d > 0)):
        raise GeometryError("path_gain: distance must be > 0")
    g0 = db_to_linear(params.reference_gain_db)
    out = g0 * (params.reference_distance / d) ** params.pathloss_exponent
    return float(out) if out.ndim == 0 else out


def shannon_rate(bandwidth_mhz, power_dbm, gain, noise_dbm):
    """Rate in Mbps for bandwidth in MHz: ``B * log2(1 + p|h|^2 / N^2)``."""
    snr = dbm_to_watts(power_dbm) * np.asarray(gain, dtype=float) / dbm_to_watts(noise_dbm)
    out = np.asarray(bandwidth_mhz, dtype=float) * np.log1p(snr) / _LN2
    return float(out) if out.ndim == 0 else out


def link_distance(scenario, node, vehicle, t: float) -> float:
    x = scenario.position_at(vehicle, t)
    dx = x - node.axial_position
    # nodes stand beside the road at y = -offset
    dy = scenario.lateral_position(vehicle) + node.perpendicular_offset
    return math.hypot(dx, dy)


def data_rate(scenario, node, vehicle, t: float) -> float:
    """Uplink rate (Mbps) of ``vehicle`` towards ``node`` at time ``t``."""
    gain = path_gain(link_distance(scenario, node, vehicle, t), node.radio)
    return shannon_rate(node.bandwidth_mhz, vehicle.transmit_power_dbm, gain, node.radio.noise_dbm)
