"""Material presets of the slope stability benchmark."""
from __future__ import annotations

import numpy as np

from .drucker_prager import params_from_angles
from .hardening import SaturatingHardening
from .jirasek_grassl import fit_from_dp
from .tensors import ElasticModuli

# Shear and bulk moduli [kPa] used for the benchmark.  The limit load factor
# does not depend on them.
BENCHMARK_MODULI = ElasticModuli(K=3333333.0, G=67114.0)
UNIT_WEIGHT = 20.0          # kN/m^3
FRICTION_ANGLE = 20.0       # degrees
COHESION = 50.0             # kPa
DILATANCY_ANGLE = 10.0      # degrees, nonassociative preset
INITIAL_COHESION = 40.0     # kPa, hardening preset
HARDENING_MODULUS = 10000.0  # kPa
JG_SCALE = 4.9
JG_BG = 1000.0


def dp_associative(moduli=BENCHMARK_MODULI):
    phi = np.radians(FRICTION_ANGLE)
    return params_from_angles(phi, phi, COHESION, moduli)


def dp_nonassociative_hardening(moduli=BENCHMARK_MODULI):
    hardening = SaturatingHardening(c=COHESION, c0=INITIAL_COHESION,
                                    initial_modulus=HARDENING_MODULUS)
    return params_from_angles(np.radians(FRICTION_ANGLE), np.radians(DILATANCY_ANGLE),
                              INITIAL_COHESION, moduli, hardening)


def jg_fitted(moduli=BENCHMARK_MODULI):
    return fit_from_dp(COHESION, np.radians(FRICTION_ANGLE), JG_SCALE, JG_BG, moduli)


PRESETS = {
    "dp-associative": dp_associative,
    "dp-nonassociative-hardening": dp_nonassociative_hardening,
    "jg-fitted": jg_fitted,
}


def material(name: str, moduli=BENCHMARK_MODULI):
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
    return factory(moduli)
