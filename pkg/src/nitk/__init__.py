"""nitk: a finite-alphabet network information theory toolkit.

Channels, networks and codes are explicit probability tables. Logarithms are
base 2 and every node, message and time index is 0-based.
"""

from .core import (Channel, Code, Distribution, JointDistribution, ModifiedCode, ModifiedNetwork, Network,
                   RateVector, bit_pipe_schedule, modified_network, validate_network)
from .coupling import EventSet, MarkovSource, causal_blowup_coupling, verify_blowup_bound
from .exponents import (ChannelCapacity, DueckExponent, channel_capacity, check_exponent_condition,
                        dueck_exponent, exponent_slope_at_capacity)
from .measures import entropy, kl_divergence, mutual_information, tv_distance
from .regions import cutset_bound, ic_strong_interference_check, wringing
from .validation import NotFittedError, ValidationError

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "ChannelCapacity",
    "Code",
    "Distribution",
    "DueckExponent",
    "EventSet",
    "JointDistribution",
    "MarkovSource",
    "ModifiedCode",
    "ModifiedNetwork",
    "Network",
    "NotFittedError",
    "RateVector",
    "ValidationError",
    "bit_pipe_schedule",
    "causal_blowup_coupling",
    "channel_capacity",
    "check_exponent_condition",
    "cutset_bound",
    "dueck_exponent",
    "entropy",
    "exponent_slope_at_capacity",
    "ic_strong_interference_check",
    "kl_divergence",
    "modified_network",
    "mutual_information",
    "tv_distance",
    "validate_network",
    "verify_blowup_bound",
    "wringing",
]
