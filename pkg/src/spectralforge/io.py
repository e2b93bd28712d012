"""File formats, deterministic serialization, and run manifests.

All floats are written with 17 significant digits so round trips are
lossless and repeated runs produce byte-identical files.  Writes go
through a temporary file and an atomic replace.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .core import (
    BistochasticMatrix,
    Permutation,
    ProbeState,
    Spectrum,
    SwitchingSchedule,
    TargetVector,
)
from .errors import ParseError
from .phase import PhasePrior
from .schedule import BirkhoffDecomposition

__all__ = [
    "format_float",
    "dumps_json",
    "write_text_atomic",
    "write_json",
    "read_json",
    "write_csv",
    "sha256_file",
    "write_manifest",
    "spectrum_to_json",
    "spectrum_from_json",
    "target_to_json",
    "target_from_json",
    "weights_to_json",
    "weights_from_json",
    "schedule_to_json",
    "schedule_from_json",
    "decomposition_to_json",
    "decomposition_from_json",
    "probe_to_json",
    "probe_from_json",
    "prior_to_json",
    "prior_from_json",
]


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def dumps_json(obj) -> str:
    """JSON text with floats at 17 significant digits."""
    return _render(obj, indent=0) + "\n"


def _render(obj, indent: int) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{inner}{json.dumps(str(k))}: {_render(v, indent + 1)}'
            for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rendered = [_render(v, indent + 1) for v in obj]
        if all(len(r) < 24 and "\n" not in r for r in rendered):
            return "[" + ", ".join(rendered) + "]"
        return "[\n" + ",\n".join(inner + r for r in rendered) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    return json.dumps(obj)


def write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_json(path, obj) -> None:
    write_text_atomic(path, dumps_json(obj))


def read_json(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc


def write_csv(path, header: list[str], rows: list[dict]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for key in header:
            value = row[key]
            if isinstance(value, (float, np.floating)):
                cells.append(format_float(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    write_text_atomic(path, "\n".join(lines) + "\n")


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    path,
    command_line: list[str],
    seed: int,
    inputs: list,
    outputs: list,
    wall_time_s: float,
    tolerances: dict | None = None,
    extra: dict | None = None,
) -> None:
    """Write the run manifest accompanying a set of output files."""
    from . import __version__

    manifest = {
        "tool": "spectralforge",
        "version": __version__,
        "command_line": list(command_line),
        "seed": int(seed),
        "input_hashes": {str(p): sha256_file(p) for p in inputs},
        "outputs": [
            {"path": str(p), "sha256": sha256_file(p)} for p in outputs
        ],
        "tolerances": tolerances or {},
        "wall_time_s": float(wall_time_s),
    }
    if extra:
        manifest.update(extra)
    write_json(path, manifest)


# ── domain object codecs ─────────────────────────────────────────────────


def spectrum_to_json(s: Spectrum) -> dict:
    return {"label": s.label, "levels": [float(x) for x in s.levels]}


def spectrum_from_json(obj) -> Spectrum:
    try:
        return Spectrum(np.array(obj["levels"], dtype=float), label=obj.get("label", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid spectrum object: {exc}") from exc


def target_to_json(t: TargetVector) -> dict:
    return {"ratios": [float(x) for x in t.ratios]}


def target_from_json(obj) -> TargetVector:
    try:
        return TargetVector(np.array(obj["ratios"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid target object: {exc}") from exc


def weights_to_json(w: BistochasticMatrix) -> dict:
    return {
        "entries": [[float(x) for x in row] for row in w.entries],
        "tolerance": float(w.tolerance),
    }


def weights_from_json(obj) -> BistochasticMatrix:
    try:
        return BistochasticMatrix(
            np.array(obj["entries"], dtype=float),
            tolerance=float(obj.get("tolerance", 1e-9)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid weights object: {exc}") from exc


def schedule_to_json(sched: SwitchingSchedule) -> dict:
    return {
        "total_time": float(sched.total_time),
        "segments": [
            {"fraction": float(f), "perm": list(p.mapping)}
            for f, p in sched.segments
        ],
    }


def schedule_from_json(obj) -> SwitchingSchedule:
    try:
        segments = tuple(
            (float(seg["fraction"]), Permutation(tuple(seg["perm"])))
            for seg in obj["segments"]
        )
        return SwitchingSchedule(segments=segments, total_time=float(obj["total_time"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid schedule object: {exc}") from exc


def decomposition_to_json(d: BirkhoffDecomposition) -> dict:
    return {
        "terms": [
            {"weight": float(w), "perm": list(p.mapping)} for w, p in d.terms
        ]
    }


def decomposition_from_json(obj) -> BirkhoffDecomposition:
    try:
        terms = tuple(
            (float(term["weight"]), Permutation(tuple(term["perm"])))
            for term in obj["terms"]
        )
        return BirkhoffDecomposition(terms=terms)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid decomposition object: {exc}") from exc


def probe_to_json(p: ProbeState) -> dict:
    return {"amplitudes": [[float(c.real), float(c.imag)] for c in p.amplitudes]}


def probe_from_json(obj) -> ProbeState:
    try:
        amps = np.array([complex(re, im) for re, im in obj["amplitudes"]])
        return ProbeState(amps)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid probe object: {exc}") from exc


def prior_to_json(prior: PhasePrior) -> dict:
    if prior.kind == "flat":
        return {"type": "flat"}
    if prior.kind == "delta":
        return {
            "type": "delta",
            "peaks": [{"w": float(w), "x": float(x)} for w, x in prior.peaks],
        }
    return {
        "type": "fourier",
        "coeffs": [[int(k), float(p.real), float(p.imag)] for k, p in prior.fourier],
    }


def prior_from_json(obj) -> PhasePrior:
    try:
        kind = obj["type"]
        if kind == "flat":
            return PhasePrior.flat()
        if kind == "delta":
            return PhasePrior.delta(
                tuple((float(p["w"]), float(p["x"])) for p in obj["peaks"])
            )
        if kind == "fourier":
            return PhasePrior(
                kind="fourier",
                fourier=tuple(
                    (int(k), complex(re, im)) for k, re, im in obj["coeffs"]
                ),
            )
        raise ParseError(f"unknown prior type {kind!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"invalid prior object: {exc}") from exc
