"""Pairing-based encryption for urban sensor networks.

Key-policy attribute-based encryption over road-segment and lifetime
attributes, proxy re-encryption for key revocation, a segment-tree
attribute layout, the device/authority/storage/user protocol, and a city
simulator for revocation-cost experiments.
"""

from .attrspace import (PolicySpec, Representation, TimeConfig,
                        build_universe, label_for_device, policy_for_user)
from .city import CityModel, generate_grid_city, load_city, sample_route
from .kpabe import AND, OR, Attr, decrypt, encrypt, eval_policy, keygen, setup
from .pairing import BilinearGroup, params_by_name, params_for_security
from .protocol import SystemConfig, replay_trace, setup_system
from .segtree import SegmentTree

__all__ = [
    "AND", "OR", "Attr", "BilinearGroup", "CityModel", "PolicySpec",
    "Representation", "SegmentTree", "SystemConfig", "TimeConfig",
    "build_universe", "decrypt", "encrypt", "eval_policy",
    "generate_grid_city", "keygen", "label_for_device", "load_city",
    "params_by_name", "params_for_security", "policy_for_user",
    "replay_trace", "sample_route", "setup", "setup_system",
]

__version__ = "0.1.0"
