"""Magnetic-resonance observables of the lens field.

Frequencies are reported as linear f in Hz (f = gamma/2pi * |B|); the
angular precession rate is 2*pi*f.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import ELECTRON_GAMMA_OVER_2PI, PROTON_GAMMA_OVER_2PI
from .analysis import (AnalysisError, FocusReport, find_focus, focus_tensor,
                       resonant_shell_extent)
from .fieldsolver import BiasField, FieldSample, GradientTensor, magnet_field
from .geometry import LensGeometry
from .quadrature import QuadratureSpec


@dataclass(frozen=True)
class SpinSpecies:
    name: str
    gamma_over_2pi: float  # Hz/T

    def __post_init__(self):
        if self.gamma_over_2pi <= 0.0:
            raise ValueError("gamma_over_2pi must be > 0")


PROTON = SpinSpecies("proton", PROTON_GAMMA_OVER_2PI)
ELECTRON = SpinSpecies("electron", ELECTRON_GAMMA_OVER_2PI)


@dataclass(frozen=True)
class SpinMoment:
    m: tuple  # J/T

    def as_array(self):
        return np.asarray(self.m, dtype=float)


def larmor_frequency(species: SpinSpecies, sample: FieldSample) -> float:
    """Linear resonance frequency f = (gamma/2pi) |B|, Hz."""
    return species.gamma_over_2pi * sample.magnitude


def force_on_spin(moment: SpinMoment, tensor: GradientTensor):
    """F_i = sum_j m_j dB_j/dx_i, Newtons (free-space tensor, symmetric)."""
    return tensor.entries.T @ moment.as_array()


@dataclass
class SelectivityReport:
    focus: FocusReport
    species: SpinSpecies
    linewidth: float                 # Tesla
    frequency_hz: float
    freq_gradients_hz_per_m: np.ndarray  # per principal axis, at 1 nm offsets
    shell_extents_m: np.ndarray          # per principal axis
    lattice_site_counts: np.ndarray      # 0.1 nm spacing, per principal axis


def selectivity_report(geom: LensGeometry, bias: BiasField, species: SpinSpecies,
                       linewidth: float, spec: QuadratureSpec = QuadratureSpec(),
                       focus: FocusReport | None = None) -> SelectivityReport:
    """Resolution summary: focus frequency, gradients, and shell extents."""
    if focus is None:
        focus = find_focus(geom, bias, spec=spec)
    if focus.classification != "minimum":
        raise AnalysisError("selectivity requires a |B| minimum")
    ft = focus_tensor(geom, bias, focus.position, spec)
    axes = [ft.eigenvectors[:, k] for k in range(3)]
    freq = species.gamma_over_2pi * focus.b_min

    offset = 1e-9
    grads = []
    counts = []
    site_step = 0.1e-9
    center = focus.b_min + 0.5 * linewidth
    for ax in axes:
        pts = focus.position[None, :] + np.array([[offset], [-offset]]) * ax[None, :]
        b = magnet_field(geom, pts, spec) + np.array([0.0, 0.0, bias.b_bias_z])
        mag = np.linalg.norm(b, axis=1)
        f = species.gamma_over_2pi * mag
        grads.append(abs(f[0] - f[1]) / (2.0 * offset))
        # 0.1 nm test lattice through the focus along this axis
        k = np.arange(-80, 81)
        sites = focus.position[None, :] + (site_step * k)[:, None] * ax[None, :]
        bs = magnet_field(geom, sites, spec) + np.array([0.0, 0.0, bias.b_bias_z])
        ms = np.linalg.norm(bs, axis=1)
        counts.append(int(np.count_nonzero(np.abs(ms - center) < 0.5 * linewidth)))

    extents = resonant_shell_extent(geom, bias, center, linewidth, spec,
                                    focus=focus, axes=axes)
    return SelectivityReport(focus=focus, species=species, linewidth=linewidth,
                             frequency_hz=freq,
                             freq_gradients_hz_per_m=np.array(grads),
                             shell_extents_m=extents,
                             lattice_site_counts=np.array(counts))
