# -*- coding: utf-8 -*-
"""
Loi de commande en boucle fermée pour l'évasion en temps minimal.

u* = sign(wrap(θ − φ)) :
  • +1 (virage à droite) si le cap est « à gauche » de la radiale sortante,
  • −1 dans le cas symétrique,
  •  0 une fois le cap aligné sur l'azimut (arc singulier, ligne radiale).

Conventions :
  • bande morte |wrap(θ − φ)| ≤ EPS_ALIGN → 0
  • wrap(θ − φ) = π (cap vers le centre) → +1
  • au centre (azimut indéfini) → 0
"""

from __future__ import annotations

import math

from CORE.dubins_core import Pose, to_polar, wrap_angle

# ==== Constantes ====
EPS_ALIGN = 1e-9  # rad


def heading_error(p: Pose) -> float:
    """wrap(θ − φ) ; 0 si l'azimut est indéfini."""
    pol = to_polar(p)
    if not pol.azimuth_defined:
        return 0.0
    return wrap_angle(p.theta - pol.phi)


def optimal_control(p: Pose) -> int:
    """Commande optimale ∈ {−1, 0, +1} au point p."""
    delta = heading_error(p)
    if abs(delta) <= EPS_ALIGN:
        return 0
    if delta == math.pi:
        return 1
    return 1 if delta > 0 else -1
