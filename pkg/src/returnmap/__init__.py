"""Implicit return mapping for yield surfaces with apices, with a plane-strain FE driver."""
from .drucker_prager import DPParams, params_from_angles
from .generic import DruckerPragerModel, HaighWestergaardModel, JirasekGrasslModel, generic_return_map
from .hardening import LinearHardening, SaturatingHardening, ZeroHardening
from .jirasek_grassl import JGParams, fit_from_dp
from .state import (CorrectorFailure, LinearElastic, ReturnKind, ReturnMapResult,
                    TrialState, integrate)
from .tensors import ElasticModuli, invariants

__version__ = "0.1.0"

__all__ = [
    "CorrectorFailure", "DPParams", "DruckerPragerModel", "ElasticModuli",
    "HaighWestergaardModel", "JGParams", "JirasekGrasslModel", "LinearElastic",
    "LinearHardening", "ReturnKind", "ReturnMapResult", "SaturatingHardening",
    "TrialState", "ZeroHardening", "fit_from_dp", "generic_return_map", "integrate",
    "invariants", "params_from_angles",
]
