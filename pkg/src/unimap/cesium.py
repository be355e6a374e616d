"""Restricted 8-level cesium hyperfine control model.

The system is the seven F=3 ground-manifold sublevels of 133Cs plus one
stretched F=4 sublevel serving as the fiducial state: rf magnetic fields
rotate the F=3 manifold, resonant microwaves couple the adjacent stretched
pair, and an off-resonant light shift imprints a phase on the fiducial
alone.  Basis order is |3,3>, |3,2>, ..., |3,-3>, then the auxiliary
|4,+4> (or |4,-4>) at index 7.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict

import numpy as np

from .control import ControlSystem, Waveform
from .core import mat_exp

DIM = 8
FIDUCIAL_INDEX = 7
F_GROUND = 3

#: control channel order used throughout: rf-x, rf-y, uw-x, uw-y, light shift
CONTROL_NAMES = ("rf_x", "rf_y", "uw_x", "uw_y", "light_shift")


@dataclass(frozen=True)
class SpinOperators:
    """Angular momentum matrices for spin F, with Fz diagonal F..-F."""

    F: float
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray


def spin_operators(F: float) -> SpinOperators:
    """Standard ladder-operator construction of Fx, Fy, Fz (hbar = 1)."""
    two_f = round(2 * F)
    if two_f < 0 or abs(2 * F - two_f) > 1e-12:
        raise ValueError(f"invalid spin F={F}; 2F must be a nonnegative integer")
    F = two_f / 2.0
    m = F - np.arange(two_f + 1)  # F, F-1, ..., -F
    fz = np.diag(m).astype(complex)
    # <m+1| F+ |m> = sqrt(F(F+1) - m(m+1)); basis is descending in m
    raise_amp = np.sqrt(F * (F + 1) - m[1:] * (m[1:] + 1))
    f_plus = np.zeros((two_f + 1, two_f + 1), dtype=complex)
    f_plus[np.arange(two_f), np.arange(1, two_f + 1)] = raise_amp
    fx = (f_plus + f_plus.conj().T) / 2
    fy = (f_plus - f_plus.conj().T) / 2j
    return SpinOperators(F=F, fx=fx, fy=fy, fz=fz)


@dataclass(frozen=True)
class CesiumParams:
    """Rates (rad/s) bounding each control channel, plus segment defaults.

    The default frame sits on the rf resonance (zero detuning), where the
    drift vanishes and the light shift acts on the fiducial state alone.
    """

    rf_rabi_max: float = 2 * np.pi * 25e3
    uw_rabi_max: float = 2 * np.pi * 25e3
    lightshift_max: float = 2 * np.pi * 25e3
    rf_detuning: float = 0.0
    segment_duration: float = 10e-6

    def __post_init__(self):
        for name in ("rf_rabi_max", "uw_rabi_max", "lightshift_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.segment_duration <= 0:
            raise ValueError("segment_duration must be > 0")

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @staticmethod
    def from_dict(data: dict) -> "CesiumParams":
        known = {f for f in CesiumParams.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown cesium parameter field: {sorted(unknown)[0]}")
        return CesiumParams(**data)


def build_restricted_system(params: CesiumParams | None = None, aux: int = +4) -> ControlSystem:
    """8-level control system with the auxiliary |4,+4> or |4,-4> as fiducial.

    The microwave couples the fiducial only to the adjacent stretched state
    (|3,3> for aux=+4, |3,-3> for aux=-4); rf and drift act on the F=3
    block alone, the light shift on the fiducial alone.
    """
    params = params or CesiumParams()
    if aux not in (+4, -4):
        raise ValueError(f"aux must be +4 or -4, got {aux}")
    ops = spin_operators(F_GROUND)

    def embed_f3(block: np.ndarray) -> np.ndarray:
        h = np.zeros((DIM, DIM), dtype=complex)
        h[:7, :7] = block
        return h

    ground = 0 if aux == +4 else 6  # |3,3> or |3,-3>
    uw_x = np.zeros((DIM, DIM), dtype=complex)
    uw_x[FIDUCIAL_INDEX, ground] = 0.5
    uw_x[ground, FIDUCIAL_INDEX] = 0.5
    uw_y = np.zeros((DIM, DIM), dtype=complex)
    uw_y[FIDUCIAL_INDEX, ground] = 0.5j
    uw_y[ground, FIDUCIAL_INDEX] = -0.5j

    light = np.zeros((DIM, DIM), dtype=complex)
    light[FIDUCIAL_INDEX, FIDUCIAL_INDEX] = 1.0

    controls = (
        params.rf_rabi_max * embed_f3(ops.fx),
        params.rf_rabi_max * embed_f3(ops.fy),
        params.uw_rabi_max * uw_x,
        params.uw_rabi_max * uw_y,
        params.lightshift_max * light,
    )
    return ControlSystem(
        drift=params.rf_detuning * embed_f3(ops.fz),
        controls=controls,
        amplitude_bounds=((-1.0, 1.0),) * len(controls),
        fiducial_index=FIDUCIAL_INDEX,
        reversible_drift=True,
        name=f"cs133-f3-aux{aux:+d}".replace("+", ""),
    )


def x_basis_state(F: float, m_x: float) -> np.ndarray:
    """Eigenvector of Fx with eigenvalue m_x: exp(-i pi/2 Fy) |F, m_z = m_x>."""
    ops = spin_operators(F)
    two_f = round(2 * ops.F)
    idx = round(ops.F - m_x)
    if not 0 <= idx <= two_f or abs((ops.F - m_x) - idx) > 1e-12:
        raise ValueError(f"invalid magnetic number m_x={m_x} for F={F}")
    z_state = np.zeros(two_f + 1, dtype=complex)
    z_state[idx] = 1.0
    return mat_exp(ops.fy, np.pi / 2) @ z_state


def lightshift_imprint_waveform(params: CesiumParams, angle: float) -> Waveform:
    """Single light-shift segment realizing the fiducial phase imprint.

    Duration angle / lightshift_max at full amplitude; the analytic
    diagonal imprint remains the authoritative form during assembly.
    """
    angle = float(np.mod(angle, 2 * np.pi))
    if angle == 0.0:
        return Waveform.empty(len(CONTROL_NAMES))
    amps = np.zeros(len(CONTROL_NAMES))
    amps[CONTROL_NAMES.index("light_shift")] = 1.0
    return Waveform.constant(angle / params.lightshift_max, amps)


PRESETS = {
    "cs133-f3-aux4": lambda params=None: build_restricted_system(params, aux=+4),
    "cs133-f3-aux-4": lambda params=None: build_restricted_system(params, aux=-4),
}
