"""Embedded-qubit phase-error correction on the cesium ground manifold.

A qubit stored in the stretched pair {|4,4_z>, |3,3_z>} is encoded into
the x-stretched states {|3,3_x>, |3,-3_x>}, where a small z-rotation
error moves amplitude into |3,+-2_x>.  Subspace maps shuttle that error
amplitude to the F=4 stretched states, a QND measurement of F diagnoses
the syndrome without touching the qubit coherence, and a conditional map
brings triggered states back, followed by decoding.

The simulation lives on 9 levels: the seven F=3 sublevels (indices 0..6,
m = 3..-3) plus |4,4_z> at index 7 and |4,-4_z> at index 8.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cesium import CesiumParams, build_restricted_system, x_basis_state
from .control import PhaseImprint, Waveform, apply_adjoint, phase_imprint_unitary, propagate
from .core import as_state, haar_random_state
from .search import SearchConfig, multi_start
from .subspace import (
    SubspaceMapSpec,
    assemble_subspace_map,
    phase_correction_factor,
    plan_subspace_map,
    subspace_fidelity,
)

SIM_DIM = 9
IDX_44Z = 7
IDX_4M4Z = 8

#: z-rotation generator on the simulation space; the fiducial levels keep
#: their physical magnetic numbers +-4
FZ_SIM = np.diag(np.array([3, 2, 1, 0, -1, -2, -3, 4, -4], dtype=float))


def sim_z_state(m: float) -> np.ndarray:
    """|3, m_z> (|m|<=3) or |4, +-4_z> on the 9-level simulation space."""
    v = np.zeros(SIM_DIM, dtype=complex)
    if abs(m) <= 3:
        v[round(3 - m)] = 1.0
    elif m == 4:
        v[IDX_44Z] = 1.0
    elif m == -4:
        v[IDX_4M4Z] = 1.0
    else:
        raise ValueError(f"no simulation level with m_z={m}")
    return v


def sim_x_state(m_x: float) -> np.ndarray:
    """|3, m_x> embedded in the 9-level simulation space."""
    v = np.zeros(SIM_DIM, dtype=complex)
    v[:7] = x_basis_state(3, m_x)
    return v


def ec_map_specs() -> tuple[SubspaceMapSpec, SubspaceMapSpec, SubspaceMapSpec]:
    """The three protocol maps: encode, error extraction, and recovery."""
    encode = SubspaceMapSpec(
        source=(sim_z_state(4), sim_z_state(3)),
        target=(sim_x_state(3), sim_x_state(-3)),
    )
    extract = SubspaceMapSpec(
        source=(sim_x_state(2), sim_x_state(-2)),
        target=(sim_z_state(4), sim_z_state(-4)),
    )
    recover = SubspaceMapSpec(
        source=(sim_z_state(4), sim_z_state(-4)),
        target=(sim_x_state(3), sim_x_state(-3)),
    )
    return encode, extract, recover


def ec_maps(ideal: bool = True, params: CesiumParams | None = None, cfg: SearchConfig | None = None):
    """The three protocol maps as 9x9 unitaries.

    Ideal maps are assembled algebraically with phase correction.  The
    waveform-backed mode needs a search config; it returns the maps plus
    the per-map synthesis details.
    """
    if ideal:
        return tuple(
            assemble_subspace_map(plan_subspace_map(spec), spec) for spec in ec_map_specs()
        )
    if cfg is None:
        raise ValueError("waveform-backed maps require a search config")
    maps, _ = synthesize_ec_maps(params or CesiumParams(), cfg)
    return maps


def error_channel(epsilon: float) -> np.ndarray:
    """Dephasing unitary exp(-2 i epsilon Fz) on the simulation space."""
    if not np.isfinite(epsilon):
        raise ValueError("epsilon must be finite")
    return np.diag(np.exp(-2j * epsilon * np.diag(FZ_SIM)))


def qnd_measure_F(state, rng: np.random.Generator, force_outcome: int | None = None):
    """Projective measurement of total F: 3 (indices 0..6) vs 4 (7, 8).

    Returns (outcome, collapsed state, probability of that outcome).  The
    outcome is sampled from the rng unless forced; forcing a branch of
    zero probability is an error.
    """
    psi = as_state(state, SIM_DIM)
    p3 = float(np.sum(np.abs(psi[:7]) ** 2))
    p4 = float(np.sum(np.abs(psi[7:]) ** 2))
    total = p3 + p4
    p3, p4 = p3 / total, p4 / total
    if force_outcome is None:
        outcome = 3 if rng.uniform() < p3 else 4
    elif force_outcome in (3, 4):
        outcome = force_outcome
    else:
        raise ValueError(f"outcome must be 3 or 4, got {force_outcome}")
    prob = p3 if outcome == 3 else p4
    if prob <= 1e-30:
        raise ValueError(f"requested branch F={outcome} has zero probability")
    collapsed = psi.copy()
    if outcome == 3:
        collapsed[7:] = 0.0
    else:
        collapsed[:7] = 0.0
    return outcome, collapsed / np.linalg.norm(collapsed), prob


def physical_qubit_state(psi_qubit) -> np.ndarray:
    """alpha |4,4_z> + beta |3,3_z> on the simulation space."""
    q = as_state(psi_qubit, 2)
    return q[0] * sim_z_state(4) + q[1] * sim_z_state(3)


def run_ec_trial(psi_qubit, epsilon: float, maps, rng: np.random.Generator, correct: bool = True):
    """One protocol round; returns (fidelity, syndrome_triggered).

    With correct=False the qubit stays in the physical stretched pair and
    only dephases, giving the comparison curve; the maps and rng are then
    unused and the syndrome flag is False.
    """
    psi0 = physical_qubit_state(psi_qubit)
    err = error_channel(epsilon)
    if not correct:
        final = err @ psi0
        return min(float(abs(np.vdot(psi0, final)) ** 2), 1.0), False
    encode, extract, recover = maps
    psi = extract @ (err @ (encode @ psi0))
    outcome, psi, _ = qnd_measure_F(psi, rng)
    if outcome == 4:
        psi = recover @ psi
    final = encode.conj().T @ psi
    return min(float(abs(np.vdot(psi0, final)) ** 2), 1.0), outcome == 4


#: the six Bloch-axis qubit states, a 2-design for exact averaging
BLOCH_AXIS_STATES = (
    np.array([1.0, 0.0], dtype=complex),
    np.array([0.0, 1.0], dtype=complex),
    np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
    np.array([1.0, -1.0], dtype=complex) / np.sqrt(2),
    np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2),
    np.array([1.0, -1.0j], dtype=complex) / np.sqrt(2),
)


@dataclass(frozen=True)
class ECConfig:
    """Sweep settings: error angles, sampling, and which maps to use."""

    epsilon_grid: tuple[float, ...]
    samples: int = 200
    seed: int = 0
    maps_mode: str = "ideal"
    average: str = "haar"  # "haar" (Monte Carlo) or "axes" (exact 2-design)

    def __post_init__(self):
        grid = tuple(float(e) for e in self.epsilon_grid)
        if not grid or not all(np.isfinite(grid)):
            raise ValueError("epsilon_grid must be non-empty and finite")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.maps_mode not in ("ideal", "synthesized"):
            raise ValueError(f"maps_mode must be 'ideal' or 'synthesized', got {self.maps_mode!r}")
        if self.average not in ("haar", "axes"):
            raise ValueError(f"average must be 'haar' or 'axes', got {self.average!r}")
        object.__setattr__(self, "epsilon_grid", grid)


@dataclass(frozen=True)
class ECResult:
    """Averaged fidelities and syndrome rates, one row per error angle."""

    epsilon: tuple[float, ...]
    corrected: tuple[float, ...]
    uncorrected: tuple[float, ...]
    trigger_rate: tuple[float, ...]
    samples: int
    seed: int
    maps_mode: str
    average: str


def ec_sweep(cfg: ECConfig, maps=None) -> ECResult:
    """Monte Carlo (or 2-design) average of both curves over the grid.

    Each trial owns the rng stream (seed, epsilon index, sample index), so
    the result is independent of execution order and fully reproducible.
    """
    if maps is None:
        if cfg.maps_mode != "ideal":
            raise ValueError("synthesized maps_mode requires explicit maps")
        maps = ec_maps(ideal=True)
    corrected, uncorrected, trigger = [], [], []
    for i_eps, eps in enumerate(cfg.epsilon_grid):
        c_sum = u_sum = 0.0
        n_trig = 0
        n = len(BLOCH_AXIS_STATES) if cfg.average == "axes" else cfg.samples
        for i_s in range(n):
            rng = np.random.default_rng([cfg.seed, i_eps, i_s])
            if cfg.average == "axes":
                qubit = BLOCH_AXIS_STATES[i_s]
            else:
                qubit = haar_random_state(2, rng)
            fc, triggered = run_ec_trial(qubit, eps, maps, rng, correct=True)
            fu, _ = run_ec_trial(qubit, eps, maps, rng, correct=False)
            c_sum += fc
            u_sum += fu
            n_trig += triggered
        corrected.append(c_sum / n)
        uncorrected.append(u_sum / n)
        trigger.append(n_trig / n)
    return ECResult(
        epsilon=cfg.epsilon_grid,
        corrected=tuple(corrected),
        uncorrected=tuple(uncorrected),
        trigger_rate=tuple(trigger),
        samples=cfg.samples,
        seed=cfg.seed,
        maps_mode=cfg.maps_mode,
        average=cfg.average,
    )


def embed_aux_system(u8: np.ndarray, aux: int) -> np.ndarray:
    """Lift an 8-level (F=3 + one aux) unitary into the 9-level space."""
    idx = list(range(7)) + [IDX_44Z if aux == +4 else IDX_4M4Z]
    u9 = np.eye(SIM_DIM, dtype=complex)
    u9[np.ix_(idx, idx)] = u8
    return u9


@dataclass(frozen=True)
class ECMapSynthesis:
    """Search details behind one waveform-backed protocol map."""

    aux_choices: tuple[int, ...]
    step_fidelities: tuple[float, ...]
    converged: tuple[bool, ...]
    waveforms: tuple[Waveform, ...]
    subspace_fidelity: float


def _aux_for_reflection(phi: np.ndarray) -> int:
    """Which auxiliary system can realize a rotation with this reflection.

    The 8-level model holds one F=4 level at a time, so the reflection may
    touch |4,4_z> or |4,-4_z| but never both; the protocol's maps satisfy
    this by construction (the aux state is switched between rotations).
    """
    on_p4 = abs(phi[IDX_44Z]) > 1e-9
    on_m4 = abs(phi[IDX_4M4Z]) > 1e-9
    if on_p4 and on_m4:
        raise ValueError("rotation touches both F=4 stretched states; no single aux system fits")
    return -4 if on_m4 else +4


def synthesize_ec_maps(params: CesiumParams, cfg: SearchConfig):
    """Waveform-backed protocol maps with the aux-switching convention.

    Rotations are planned on the 9-level space; each one is realized on
    whichever 8-level control system (aux = +4 or -4) contains its
    reflection vector, then lifted back.  Phase corrections are analytic.
    """
    systems = {+4: build_restricted_system(params, aux=+4), -4: build_restricted_system(params, aux=-4)}
    maps = []
    reports = []
    for spec in ec_map_specs():
        steps = plan_subspace_map(spec)
        t = np.eye(SIM_DIM, dtype=complex)
        aux_choices, fidelities, conv, waves = [], [], [], []
        for step in steps:
            if step.skipped:
                continue
            aux = _aux_for_reflection(step.reflection)
            sys8 = systems[aux]
            keep = list(range(7)) + [IDX_44Z if aux == +4 else IDX_4M4Z]
            phi8 = step.reflection[keep]
            phi8 = phi8 / np.linalg.norm(phi8)
            result = multi_start(sys8, phi8, sys8.fiducial_state(), cfg)
            v = propagate(sys8, result.waveform)
            pi_imprint = phase_imprint_unitary(8, PhaseImprint(np.pi, sys8.fiducial_index))
            s8 = apply_adjoint(sys8, result.waveform) @ pi_imprint @ v
            t = embed_aux_system(s8, aux) @ t
            aux_choices.append(aux)
            fidelities.append(result.fidelity)
            conv.append(result.converged)
            waves.append(result.waveform)
        if spec.phase_correction:
            t = phase_correction_factor(steps, spec) @ t
        maps.append(t)
        reports.append(
            ECMapSynthesis(
                aux_choices=tuple(aux_choices),
                step_fidelities=tuple(fidelities),
                converged=tuple(conv),
                waveforms=tuple(waves),
                subspace_fidelity=subspace_fidelity(t, spec),
            )
        )
    return tuple(maps), tuple(reports)
