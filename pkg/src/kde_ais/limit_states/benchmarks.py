"""Benchmark limit-state functions. All accept one point (d,) or a batch (n, d).

Failure is g(x) > t throughout; cantilever fails above 0 and shaft above 1.
"""

import numpy as np

from ..utils.arrays import as_points, unwrap
from ..utils.errors import InvalidArgumentError

SQRT2 = np.sqrt(2.0)

# Cantilever beam section width and deflection limit (m)
BEAM_WIDTH = 0.30
MAX_DEFLECTION = 0.02

# Shaft length (m), safety factor, allowable twist (rad)
SHAFT_LENGTH = 1.2
SAFETY_FACTOR = 1.5
MAX_TWIST = 0.06


def herbie(x):
    pts, single = as_points(x, 2)
    terms = np.exp(-(pts - 1.0) ** 2) + np.exp(-0.8 * (pts + 1.0) ** 2) - 0.05 * np.sin(8.0 * (pts + 0.1))
    return unwrap(terms.sum(axis=1), single)


def four_branch(x):
    pts, single = as_points(x, 2)
    x1, x2 = pts[:, 0], pts[:, 1]
    spread = 3.0 + 0.1 * (x1 - x2) ** 2
    branches = np.stack([
        spread - (x1 + x2) / SQRT2,
        spread + (x1 + x2) / SQRT2,
        (x1 - x2) + 7.0 / SQRT2,
        (x2 - x1) + 7.0 / SQRT2,
    ])
    return unwrap(branches.min(axis=0), single)


def cantilever_deflection(x):
    """Tip deflection 4 P L^3 / (E b Theta^3) for x = (P, L, E, Theta)."""
    pts, single = as_points(x, 4)
    load, length, modulus, depth = pts.T
    if np.any(depth <= 0) or np.any(modulus <= 0):
        raise InvalidArgumentError("cantilever needs positive Theta and E")
    return unwrap(4.0 * load * length ** 3 / (modulus * BEAM_WIDTH * depth ** 3), single)


def cantilever(x):
    return cantilever_deflection(x) - MAX_DEFLECTION


def shaft_response(x):
    """Von Mises stress and twist angle for x = (M, T, d, sigma_y, G)."""
    pts, single = as_points(x, 5)
    moment, torque, diameter, yield_stress, shear_modulus = pts.T
    if np.any(diameter <= 0) or np.any(yield_stress <= 0) or np.any(shear_modulus <= 0):
        raise InvalidArgumentError("shaft needs positive d, sigma_y and G")
    bending = 32.0 * moment / (np.pi * diameter ** 3)
    shear = 16.0 * torque / (np.pi * diameter ** 3)
    von_mises = np.sqrt(bending ** 2 + 3.0 * shear ** 2)
    twist = 32.0 * torque * SHAFT_LENGTH / (shear_modulus * np.pi * diameter ** 4)
    return unwrap(von_mises, single), unwrap(twist, single)


def shaft(x):
    pts, single = as_points(x, 5)
    von_mises, twist = shaft_response(pts)
    allowable = pts[:, 3] / SAFETY_FACTOR
    return unwrap(np.maximum(von_mises / allowable, twist / MAX_TWIST), single)


def quadrant(x):
    pts, single = as_points(x, 2)
    return unwrap(pts.min(axis=1), single)
