"""Tensor-product Gauss-Legendre quadrature over polar patches.

Error control compares the rule at the requested orders against the rule
at doubled orders; orders keep doubling until the relative change drops
below the tolerance or the refinement limit is reached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np

from .geometry import PolarPatch


class QuadratureError(RuntimeError):
    """Quadrature failed to converge; carries the last value and estimate."""

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


@dataclass(frozen=True)
class QuadratureSpec:
    radial_order: int = 48
    angular_order: int = 48
    refinement_limit: int = 3
    rel_tolerance: float = 1e-8

    def __post_init__(self):
        if self.radial_order < 2 or self.angular_order < 2:
            raise ValueError("quadrature orders must be >= 2")
        if self.rel_tolerance <= 0.0:
            raise ValueError("rel_tolerance must be > 0")


class IntegralResult(NamedTuple):
    value: np.ndarray | float
    error_estimate: float


@lru_cache(maxsize=None)
def nodes_weights(order: int):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if order < 1:
        raise ValueError("order must be >= 1")
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


@lru_cache(maxsize=None)
def patch_nodes(patch: PolarPatch, radial_order: int, angular_order: int):
    """Flat (x, y, w) arrays for the tensor rule on a patch.

    Weights include the polar Jacobian r, so sum(w * f(x, y)) approximates
    the surface integral of f over the patch.
    """
    xr, wr = nodes_weights(radial_order)
    xt, wt = nodes_weights(angular_order)
    r = 0.5 * (patch.r_max + patch.r_min) + 0.5 * (patch.r_max - patch.r_min) * xr
    t = 0.5 * (patch.theta_max + patch.theta_min) + 0.5 * (patch.theta_max - patch.theta_min) * xt
    jr = 0.5 * (patch.r_max - patch.r_min)
    jt = 0.5 * (patch.theta_max - patch.theta_min)
    rr, tt = np.meshgrid(r, t, indexing="ij")
    ww = np.outer(wr, wt) * rr * (jr * jt)
    x = (rr * np.cos(tt)).ravel()
    y = (rr * np.sin(tt)).ravel()
    x.flags.writeable = False
    y.flags.writeable = False
    w = ww.ravel()
    w.flags.writeable = False
    return x, y, w


def _apply(patch, f, nr, nt):
    x, y, w = patch_nodes(patch, nr, nt)
    vals = np.asarray(f(x, y), dtype=float)
    if vals.ndim == 1:
        return float(np.sum(w * vals))
    return np.tensordot(w, vals, axes=(0, 0))


def integrate_patch(patch: PolarPatch, f: Callable, spec: QuadratureSpec) -> IntegralResult:
    """Integrate f(x, y) (scalar or vector valued) over a polar patch.

    f receives flat arrays of Cartesian node coordinates and must return
    either shape (n,) or (n, k). Returns the doubled-order result together
    with the relative error estimate against the coarse result.
    """
    nr, nt = spec.radial_order, spec.angular_order
    coarse = _apply(patch, f, nr, nt)
    est = np.inf
    for _ in range(spec.refinement_limit + 1):
        fine = _apply(patch, f, 2 * nr, 2 * nt)
        denom = np.linalg.norm(np.atleast_1d(fine))
        est = float(np.linalg.norm(np.atleast_1d(fine - coarse)) / max(denom, 1e-300))
        if est <= spec.rel_tolerance:
            return IntegralResult(fine, est)
        coarse = fine
        nr, nt = 2 * nr, 2 * nt
    raise QuadratureError(
        f"quadrature did not converge: estimate {est:.3e} > tolerance {spec.rel_tolerance:.3e}",
        value=coarse, estimate=est)
