"""Gradient-ascent search for state-to-state control waveforms.

The objective is J = |<psi_f| U(T) |psi_i>|^2 over the segment amplitudes
of a piecewise-constant waveform.  Gradients are exact: each segment
generator is diagonalized once and the spectral divided-difference kernel
of the matrix exponential is chained through the left/right partial
products, so one gradient costs about as much as one propagation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .control import ControlSystem, Waveform, check_amplitudes, segment_eigs
from .core import as_state

THREADS_ENV_VAR = "UNIMAP_THREADS"

ARMIJO_C = 1e-4
GRAD_NORM_STOP = 1e-9
MIN_STEP = 1e-14


@dataclass(frozen=True)
class SearchConfig:
    """Knobs for one gradient-ascent search."""

    segment_count: int
    segment_duration: float
    step_size: float = 1.0
    fidelity_goal: float = 0.99
    max_iterations: int = 2000
    seed: int = 0
    restarts: int = 1
    line_search: bool = True
    try_zero_seed: bool = True

    def __post_init__(self):
        if self.segment_count < 1:
            raise ValueError("segment_count must be >= 1")
        if self.segment_duration <= 0:
            raise ValueError("segment_duration must be > 0")
        if not 0 < self.fidelity_goal <= 1:
            raise ValueError("fidelity_goal must lie in (0, 1]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


def default_search_config(sys: ControlSystem, **overrides) -> SearchConfig:
    """Config sized so the variable count clears 2 d^2 for this system.

    Keeps the search comfortably above the d^2 - 1 variables needed for
    full-rank landscapes regardless of the control count.
    """
    n_vars = 2 * sys.dim * sys.dim
    defaults = dict(
        segment_count=math.ceil(n_vars / sys.n_controls),
        segment_duration=10e-6,
        step_size=1.0,
    )
    defaults.update(overrides)
    return SearchConfig(**defaults)


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a search: best waveform found and its trajectory."""

    waveform: Waveform
    fidelity: float
    iterations: int
    converged: bool
    objective_history: np.ndarray
    restart_index: int = 0

    def __post_init__(self):
        hist = np.asarray(self.objective_history, dtype=float)
        hist.setflags(write=False)
        object.__setattr__(self, "objective_history", hist)


def objective_state_prep(sys: ControlSystem, w: Waveform, psi_i, psi_f) -> float:
    """J = |<psi_f| U(T) |psi_i>|^2 for the waveform's propagator."""
    overlap, _, _, _ = _forward(sys, w, as_state(psi_i, sys.dim), as_state(psi_f, sys.dim))
    return min(float(abs(overlap) ** 2), 1.0)


def gradient_state_prep(sys: ControlSystem, w: Waveform, psi_i, psi_f) -> np.ndarray:
    """dJ/du for every segment amplitude, flattened segment-major.

    Entry m*K + k is the derivative with respect to amplitude k of
    segment m, matching ``Waveform.amplitudes.ravel()`` order.
    """
    psi_i = as_state(psi_i, sys.dim)
    psi_f = as_state(psi_f, sys.dim)
    _, grad = _objective_and_gradient(sys, w, psi_i, psi_f)
    return grad


def _forward(sys: ControlSystem, w: Waveform, psi_i, psi_f):
    """Overlap <psi_f|U|psi_i> plus the per-segment eigensystem and kets."""
    check_amplitudes(sys, w)
    lam, v = segment_eigs(sys, w)
    m = w.n_segments
    kets = np.empty((m + 1, sys.dim), dtype=complex)
    kets[0] = psi_i
    for j in range(m):
        phases = np.exp(-1j * lam[j] * w.durations[j])
        kets[j + 1] = v[j] @ (phases * (v[j].conj().T @ kets[j]))
    overlap = np.vdot(psi_f, kets[m])
    return overlap, lam, v, kets


def _objective_and_gradient(sys: ControlSystem, w: Waveform, psi_i, psi_f):
    overlap, lam, v, kets = _forward(sys, w, psi_i, psi_f)
    m, k_ctrl, d = w.n_segments, sys.n_controls, sys.dim
    grad = np.zeros((m, k_ctrl))
    if m:
        # backward pass: bras[j] = psi_f† U_M ... U_{j+1}
        bras = np.empty((m + 1, d), dtype=complex)
        bras[m] = psi_f.conj()
        for j in range(m - 1, -1, -1):
            phases = np.exp(-1j * lam[j] * w.durations[j])
            bras[j] = ((bras[j + 1] @ v[j]) * phases) @ v[j].conj().T
        hks = np.stack(sys.controls)
        for j in range(m):
            tau = w.durations[j]
            # divided-difference kernel of exp(-i lam tau), stable at
            # coincident eigenvalues via the sinc form
            delta = lam[j][:, None] - lam[j][None, :]
            mean = (lam[j][:, None] + lam[j][None, :]) / 2
            kernel = -1j * tau * np.exp(-1j * mean * tau) * np.sinc(delta * tau / (2 * np.pi))
            left = bras[j + 1] @ v[j]
            right = v[j].conj().T @ kets[j]
            hk_eig = np.einsum("ai,kab,bj->kij", v[j].conj(), hks, v[j])
            dc = np.einsum("i,kij,j->k", left, kernel[None] * hk_eig, right)
            grad[j] = 2 * np.real(np.conj(overlap) * dc)
    return float(abs(overlap) ** 2), grad.ravel()


def _seed_amplitudes(sys: ControlSystem, cfg: SearchConfig, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from the middle 50% of each control's bounds."""
    lo = np.array([b[0] for b in sys.amplitude_bounds])
    hi = np.array([b[1] for b in sys.amplitude_bounds])
    mid, half = (lo + hi) / 2, (hi - lo) / 4
    u = rng.uniform(-1.0, 1.0, size=(cfg.segment_count, sys.n_controls))
    return mid + half * u


def _clip_to_bounds(sys: ControlSystem, amps: np.ndarray) -> np.ndarray:
    lo = np.array([b[0] for b in sys.amplitude_bounds])
    hi = np.array([b[1] for b in sys.amplitude_bounds])
    return np.clip(amps, lo, hi)


def _projected_grad_norm(sys: ControlSystem, amps: np.ndarray, grad: np.ndarray) -> float:
    """Ascent-direction gradient norm with bound-blocked components zeroed."""
    lo = np.array([b[0] for b in sys.amplitude_bounds])
    hi = np.array([b[1] for b in sys.amplitude_bounds])
    g = grad.reshape(amps.shape).copy()
    g[(amps >= hi) & (g > 0)] = 0.0
    g[(amps <= lo) & (g < 0)] = 0.0
    return float(np.linalg.norm(g))


def search_state_map(
    sys: ControlSystem,
    psi_i,
    psi_f,
    cfg: SearchConfig,
    initial: Waveform | None = None,
    restart_index: int = 0,
) -> SearchResult:
    """Gradient ascent with backtracking line search from one random seed.

    Deterministic given (sys, psi_i, psi_f, cfg); non-convergence is
    reported through the ``converged`` flag, never raised.
    """
    psi_i = as_state(psi_i, sys.dim)
    psi_f = as_state(psi_f, sys.dim)
    durations = np.full(cfg.segment_count, cfg.segment_duration)
    if initial is not None:
        check_amplitudes(sys, initial)
        amps = np.array(initial.amplitudes, dtype=float)
        durations = np.array(initial.durations, dtype=float)
    else:
        rng = np.random.default_rng([cfg.seed, restart_index])
        amps = _seed_amplitudes(sys, cfg, rng)

    def make_wave(a):
        return Waveform(durations, a)

    j_val, grad = _objective_and_gradient(sys, make_wave(amps), psi_i, psi_f)
    history = [j_val]
    step = cfg.step_size
    converged = j_val >= cfg.fidelity_goal
    iterations = 0
    while not converged and iterations < cfg.max_iterations:
        g = grad.reshape(amps.shape)
        if _projected_grad_norm(sys, amps, grad) < GRAD_NORM_STOP:
            break
        if cfg.line_search:
            step = min(2 * step, cfg.step_size * 1024)
            accepted = False

            def try_step(alpha):
                candidate = _clip_to_bounds(sys, amps + alpha * g)
                return candidate, objective_state_prep(sys, make_wave(candidate), psi_i, psi_f)

            while step > MIN_STEP:
                trial, j_trial = try_step(step)
                if j_trial >= j_val + ARMIJO_C * float(np.sum(g * (trial - amps))):
                    accepted = True
                    break
                step /= 2
            if not accepted:
                break
            # keep halving while that strictly improves the objective, so a
            # barely-acceptable step cannot oscillate across the optimum
            while step / 2 > MIN_STEP:
                smaller, j_smaller = try_step(step / 2)
                if j_smaller <= j_trial:
                    break
                step /= 2
                trial, j_trial = smaller, j_smaller
            amps = trial
            j_val = j_trial
        else:
            amps = _clip_to_bounds(sys, amps + cfg.step_size * g)
            j_val = objective_state_prep(sys, make_wave(amps), psi_i, psi_f)
        iterations += 1
        history.append(j_val)
        if j_val >= cfg.fidelity_goal:
            converged = True
            break
        j_val, grad = _objective_and_gradient(sys, make_wave(amps), psi_i, psi_f)
        history[-1] = j_val
    return SearchResult(
        waveform=make_wave(amps),
        fidelity=j_val,
        iterations=iterations,
        converged=converged,
        objective_history=np.array(history),
        restart_index=restart_index,
    )


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _zero_seed_result(sys: ControlSystem, psi_i, psi_f, cfg: SearchConfig) -> SearchResult | None:
    """The all-zero-amplitude waveform, when it already meets the goal.

    Catches targets the bare drift reaches (in particular an eigenvector
    that is the fiducial state itself), where the search would only add
    noise to an exact solution.
    """
    if not all(lo <= 0.0 <= hi for lo, hi in sys.amplitude_bounds):
        return None
    w0 = Waveform(
        np.full(cfg.segment_count, cfg.segment_duration),
        np.zeros((cfg.segment_count, sys.n_controls)),
    )
    j0 = objective_state_prep(sys, w0, psi_i, psi_f)
    if j0 < cfg.fidelity_goal:
        return None
    return SearchResult(
        waveform=w0,
        fidelity=j0,
        iterations=0,
        converged=True,
        objective_history=np.array([j0]),
    )


def multi_start(sys: ControlSystem, psi_i, psi_f, cfg: SearchConfig) -> SearchResult:
    """Best result over cfg.restarts independent seeds.

    Restart r runs with the rng stream (cfg.seed, r), so adding restarts
    never changes earlier ones; the first restart achieving the maximum
    fidelity wins, independent of execution order.
    """
    if cfg.try_zero_seed:
        zero = _zero_seed_result(sys, psi_i, psi_f, cfg)
        if zero is not None:
            return zero
    runs = range(cfg.restarts)
    threads = _thread_count()
    if threads > 1 and cfg.restarts > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda r: search_state_map(sys, psi_i, psi_f, cfg, restart_index=r), runs)
            )
    else:
        results = [search_state_map(sys, psi_i, psi_f, cfg, restart_index=r) for r in runs]
    best = results[0]
    for res in results[1:]:
        if res.fidelity > best.fidelity:
            best = res
    return best
