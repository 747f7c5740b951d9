"""Secrecy rates for the relay-eavesdropper channel.

Submodules:

* :mod:`.info` - entropies and mutual information (discrete and Gaussian)
* :mod:`.channels` - gains, topologies, phase draws, discrete channels
* :mod:`.awgn` - AWGN strategies and the Gaussian outer bound
* :mod:`.dmc` - discrete-channel region points and grid search
* :mod:`.optimize` - grid refinement and simplex enumeration
* :mod:`.experiment` - configs, sweeps and file output
"""

from ._version import __version__
from .awgn import (
    StrategyResult,
    af_rate,
    cf_rate_awgn,
    deaf_nf_rate_awgn,
    df_rate,
    mc_phase_average,
    nf_rate,
    outer_bound_gaussian,
    wiretap_baseline,
)
from .channels import ChannelGains, RelayDmc, Topology, gains_from_topology
from .dmc import (
    CfDesign,
    InputDesign,
    RegionPoint,
    best_over_grid,
    cf_point,
    deaf_nf_point,
    df_point,
    nf_point,
    outer_bound_point,
    reversely_degraded_rate,
)
from .info import JointPmf, conditional_mi, entropy, mutual_information
from .kernels import BACKEND

__all__ = [
    "__version__",
    "BACKEND",
    "ChannelGains",
    "Topology",
    "RelayDmc",
    "gains_from_topology",
    "JointPmf",
    "entropy",
    "mutual_information",
    "conditional_mi",
    "StrategyResult",
    "wiretap_baseline",
    "df_rate",
    "nf_rate",
    "cf_rate_awgn",
    "af_rate",
    "deaf_nf_rate_awgn",
    "outer_bound_gaussian",
    "mc_phase_average",
    "InputDesign",
    "CfDesign",
    "RegionPoint",
    "outer_bound_point",
    "df_point",
    "nf_point",
    "cf_point",
    "deaf_nf_point",
    "reversely_degraded_rate",
    "best_over_grid",
]
