"""Run configuration: parsing, defaults, and construction of solver objects.

All keys carry explicit unit suffixes; SI conversion happens here and
nowhere else on the way in.
"""

from __future__ import annotations

import copy
import json
import math

from .constants import GAUSS, NM
from .fieldsolver import BiasField
from .geometry import LensGeometry
from .quadrature import QuadratureSpec

DEFAULT_CONFIG = {
    "geometry": {
        "outer_radius_nm": 60.0,
        "inner_radius_nm": 40.0,
        "thickness_nm": 10.0,
        "mu0_M_tesla": 2.0,
        "cut_quadrants_deg": [[0.0, 90.0], [180.0, 270.0]],
    },
    "bias_gauss": -650.0,
    "quadrature": {
        "radial_order": 48,
        "angular_order": 48,
        "refinement_limit": 3,
        "rel_tolerance": 1e-8,
    },
    "analysis": {
        "z_search_nm": [5.0, 60.0],
        "sweep_from_gauss": -900.0,
        "sweep_to_gauss": -400.0,
        "sweep_step_gauss": 25.0,
        "contour_window_nm": 20.0,
        "contour_grid_n": 201,
        "contour_center_gauss": 100.5,
        "contour_step_gauss": 6.0,
        "vector_window_nm": 10.0,
        "vector_grid_n": 21,
        "linewidth_gauss": 1.0,
    },
    "species_gamma_over_2pi_hz_per_tesla": {
        "proton": 42.5775e6,
        "electron": 28.0249e9,
    },
}


def default_config() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def load_config(path) -> dict:
    """Read a JSON config file; missing keys fall back to the defaults."""
    with open(path) as fh:
        user = json.load(fh)
    cfg = default_config()
    for key, value in user.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    return cfg


def geometry_from_config(cfg: dict) -> LensGeometry:
    gc = cfg["geometry"]
    cuts = tuple(tuple(math.radians(a) for a in pair) for pair in gc["cut_quadrants_deg"])
    return LensGeometry(
        outer_radius=gc["outer_radius_nm"] * NM,
        inner_radius=gc["inner_radius_nm"] * NM,
        thickness=gc["thickness_nm"] * NM,
        mu0_M=gc["mu0_M_tesla"],
        cut_quadrants=cuts,
    )


def bias_from_config(cfg: dict) -> BiasField:
    return BiasField(b_bias_z=cfg["bias_gauss"] * GAUSS)


def quadrature_from_config(cfg: dict) -> QuadratureSpec:
    qc = cfg["quadrature"]
    return QuadratureSpec(
        radial_order=int(qc["radial_order"]),
        angular_order=int(qc["angular_order"]),
        refinement_limit=int(qc["refinement_limit"]),
        rel_tolerance=float(qc["rel_tolerance"]),
    )


def z_search_from_config(cfg: dict):
    lo, hi = cfg["analysis"]["z_search_nm"]
    return (lo * NM, hi * NM)
