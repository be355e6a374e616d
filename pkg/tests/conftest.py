"""Shared fixtures: the cesium preset and a small generic test system."""

import numpy as np
import pytest

from unimap.cesium import CesiumParams, build_restricted_system, spin_operators
from unimap.control import ControlSystem


@pytest.fixture(scope="session")
def cesium():
    return build_restricted_system(CesiumParams())


@pytest.fixture(scope="session")
def cesium_minus():
    return build_restricted_system(CesiumParams(), aux=-4)


def make_spin_system(two_f: int, rate: float = 2 * np.pi * 25e3) -> ControlSystem:
    """Controllable spin system: Fx, Fy rotations plus a quadratic shift.

    The quadratic Fz^2 control breaks the rotation symmetry, which is what
    lifts {Fx, Fy} from the spin irrep to the full unitary algebra.
    """
    ops = spin_operators(two_f / 2)
    return ControlSystem(
        drift=np.zeros_like(ops.fz),
        controls=(rate * ops.fx, rate * ops.fy, rate * (ops.fz @ ops.fz)),
        amplitude_bounds=((-1.0, 1.0),) * 3,
        fiducial_index=0,
        reversible_drift=True,
        name=f"spin-{two_f}/2",
    )


@pytest.fixture(scope="session")
def spin4():
    """Generic 4-level system (spin 3/2)."""
    return make_spin_system(3)


@pytest.fixture(scope="session")
def two_level():
    """Single qubit with one sigma_x/2 control (1 rad/s scale), no drift."""
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return ControlSystem(
        drift=np.zeros((2, 2), dtype=complex),
        controls=(sx / 2,),
        amplitude_bounds=((-1.0, 1.0),),
        fiducial_index=0,
        reversible_drift=True,
        name="two-level",
    )
