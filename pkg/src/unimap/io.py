"""Persistence: waveform CSV, state/spec JSON, reports, and schemas.

All writes are atomic (temp file + rename) and deterministic: floats are
serialized with 17 significant digits so round-trips are value-exact, and
JSON keys are sorted.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from .control import Waveform
from .ec import ECResult
from .subspace import SubspaceMapSpec
from .wigner import WignerGrid


def fmt(x: float) -> str:
    """Decimal form with 17 significant digits; exact for binary64."""
    return format(float(x), ".17g")


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_json(path: str, doc: dict) -> None:
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def save_waveform(path: str, w: Waveform) -> None:
    """CSV with header segment,duration_s,u1..uK, one row per segment."""
    header = "segment,duration_s," + ",".join(f"u{k+1}" for k in range(w.n_controls))
    lines = [header]
    for m in range(w.n_segments):
        amps = ",".join(fmt(a) for a in w.amplitudes[m])
        lines.append(f"{m},{fmt(w.durations[m])},{amps}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_waveform(path: str) -> Waveform:
    """Parse a waveform CSV, reporting the offending row on any defect."""
    with open(path, "r", encoding="utf-8") as fh:
        rows = [line.rstrip("\n") for line in fh if line.strip()]
    if not rows:
        raise ValueError(f"{path}: row 1: empty waveform file")
    header = rows[0].split(",")
    if header[:2] != ["segment", "duration_s"] or len(header) < 3:
        raise ValueError(f"{path}: row 1: bad header {rows[0]!r}")
    n_controls = len(header) - 2
    durations, amplitudes = [], []
    for i, row in enumerate(rows[1:], start=2):
        parts = row.split(",")
        if len(parts) != n_controls + 2:
            raise ValueError(f"{path}: row {i}: expected {n_controls + 2} fields, got {len(parts)}")
        try:
            durations.append(float(parts[1]))
            amplitudes.append([float(p) for p in parts[2:]])
        except ValueError as exc:
            raise ValueError(f"{path}: row {i}: {exc}") from None
    if not durations:
        raise ValueError(f"{path}: row 2: no segments")
    return Waveform(np.array(durations), np.array(amplitudes))


def complex_to_pairs(values) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=complex).ravel()]


def pairs_to_complex(data, what: str = "vector") -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{what} must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def load_state_json(path: str) -> np.ndarray:
    """State vector from JSON: either a bare pair list or {'amplitudes': ...}."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        if "amplitudes" not in data:
            raise ValueError(f"{path}: missing field 'amplitudes'")
        data = data["amplitudes"]
    return pairs_to_complex(data, what=f"{path}: amplitudes")


def save_state_json(path: str, psi) -> None:
    save_json(path, {"amplitudes": complex_to_pairs(psi)})


def load_subspace_spec(path: str) -> SubspaceMapSpec:
    """Subspace spec from JSON with named (or listed) basis vectors."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"{path}: spec must be a JSON object")

    def basis(field: str):
        if field not in data:
            raise ValueError(f"{path}: missing field {field!r}")
        entries = data[field]
        if isinstance(entries, dict):
            pairs = list(entries.items())
        elif isinstance(entries, list):
            pairs = [(f"{field}[{i}]", v) for i, v in enumerate(entries)]
        else:
            raise ValueError(f"{path}: field {field!r} must be an object or array")
        return tuple(pairs_to_complex(v, what=f"{path}: {name}") for name, v in pairs)

    return SubspaceMapSpec(
        source=basis("source"),
        target=basis("target"),
        phase_correction=bool(data.get("phase_correction", True)),
    )


def save_ec_csv(path: str, result: ECResult) -> None:
    lines = ["epsilon,corrected,uncorrected,trigger_rate"]
    for e, c, u, t in zip(result.epsilon, result.corrected, result.uncorrected, result.trigger_rate):
        lines.append(f"{fmt(e)},{fmt(c)},{fmt(u)},{fmt(t)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def save_wigner_csv(path: str, grid: WignerGrid) -> None:
    lines = ["theta,phi,w"]
    for i, theta in enumerate(grid.thetas):
        for j, phi in enumerate(grid.phis):
            lines.append(f"{fmt(theta)},{fmt(phi)},{fmt(grid.values[i, j])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


_SCHEMA_CACHE: dict[str, dict] = {}


def load_schema(name: str) -> dict:
    if name not in _SCHEMA_CACHE:
        text = resources.files("unimap").joinpath(f"schemas/{name}.schema.json").read_text()
        _SCHEMA_CACHE[name] = json.loads(text)
    return _SCHEMA_CACHE[name]


def validate_report(name: str, doc: dict) -> dict:
    """Validate a report document against its shipped schema; returns doc."""
    jsonschema.validate(doc, load_schema(name))
    return doc


@dataclass
class RunManifest:
    """Provenance record written next to each command's outputs."""

    command: str
    config: dict
    inputs: list[str]
    outputs: list[str]
    seed: int | None
    version: str
    duration_s: float

    def to_dict(self) -> dict:
        outputs = list(self.outputs)
        if len(set(outputs)) != len(outputs):
            raise ValueError("manifest outputs must each be referenced exactly once")
        return {
            "command": self.command,
            "config": self.config,
            "inputs": list(self.inputs),
            "outputs": outputs,
            "seed": self.seed,
            "version": self.version,
            "duration_s": self.duration_s,
        }


def save_manifest(path: str, manifest: RunManifest) -> None:
    save_json(path, validate_report("run_manifest", manifest.to_dict()))
