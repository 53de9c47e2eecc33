"""Entropic and Bell-inequality tools for bounding measurement dependence
(correlations between measurement settings and hidden variables) with the
help of an auxiliary observed variable."""

from .bell import Behavior, bilocality, cglmp, chain_nlocality, chsh, correlator, is_no_signaling, mermin
from .bounds import (
    MdReport,
    chsh_l1_lower,
    chsh_mi_lower,
    cglmp_l1_lower,
    h_inputs_given_r,
    mermin_mi_lower,
    pinsker_mi_to_l1,
    theta,
)
from .causal_graphs import Dag, merge_variables, scenario, split_variable
from .cones import Cone, causal_cone, is_implied, maximize, shannon_cone
from .forms import EntropyCoordinateSpace, LinForm
from .probtab import Distribution, VariableSpec, entropy, mutual_information

__version__ = "0.1.0"
