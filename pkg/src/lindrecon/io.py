"""JSON file formats for datasets, reconstruction results and Bloch frames.

All files carry ``schema_version`` (currently 1) and are written as indented
JSON with a trailing newline, so writing the object read back from a file
reproduces the file byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import (
    FIDUCIAL_LABELS,
    OBSERVABLE_LABELS,
    PARAM_LAYOUT,
    LindbladParams,
    bloch_snapshot,
    geometric_decomposition,
)
from .synthetic import ExperimentDesign, MeasurementDataset

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    """A file does not match the expected schema."""


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def config_hash(config):
    blob = json.dumps(config, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _require(mapping, key, kind=None):
    if not isinstance(mapping, dict) or key not in mapping:
        raise SchemaError(f"missing field {key!r}")
    value = mapping[key]
    if kind is not None and not isinstance(value, kind):
        raise SchemaError(f"field {key!r} has the wrong type")
    return value


def _check_version(doc):
    version = _require(doc, "schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r}")


def _finite_float(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise SchemaError(f"{what} must be a finite number, got {x!r}")
    return float(x)


# -- datasets ---------------------------------------------------------------

def dataset_to_dict(data):
    d = data.design
    return {
        "schema_version": SCHEMA_VERSION,
        "design": {
            "fiducials": list(d.fiducials),
            "observables": list(d.observables),
            "times": list(d.times),
            "shots": d.shots,
        },
        "records": [
            {"observable": b, "fiducial": k, "time": t, "count_plus": c}
            for b, k, t, c in data.records()
        ],
    }


def dataset_from_dict(doc):
    _check_version(doc)
    if set(doc) != {"schema_version", "design", "records"}:
        raise SchemaError(f"unexpected dataset fields {sorted(doc)}")
    design_doc = _require(doc, "design", dict)
    times = [_finite_float(t, "time") for t in _require(design_doc, "times", list)]
    shots = _require(design_doc, "shots")
    if isinstance(shots, bool) or not isinstance(shots, int):
        raise SchemaError("shots must be an integer")
    try:
        design = ExperimentDesign(
            tuple(times),
            shots,
            tuple(_require(design_doc, "fiducials", list)),
            tuple(_require(design_doc, "observables", list)),
        )
    except ValueError as exc:
        raise SchemaError(f"invalid design: {exc}") from None

    t_index = {t: n for n, t in enumerate(design.times)}
    counts = np.full((3, 4, len(times)), -1, dtype=np.int64)
    records = _require(doc, "records", list)
    for rec in records:
        if not isinstance(rec, dict) or set(rec) != {"observable", "fiducial", "time", "count_plus"}:
            raise SchemaError(f"malformed record {rec!r}")
        try:
            b = OBSERVABLE_LABELS.index(rec["observable"])
            k = FIDUCIAL_LABELS.index(rec["fiducial"])
        except ValueError:
            raise SchemaError(f"unknown label in record {rec!r}") from None
        t = _finite_float(rec["time"], "record time")
        if t not in t_index:
            raise SchemaError(f"record time {t} is not on the design grid")
        c = rec["count_plus"]
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c <= shots:
            raise SchemaError(f"count_plus must be an integer in [0, {shots}], got {c!r}")
        n = t_index[t]
        if counts[b, k, n] >= 0:
            raise SchemaError(f"duplicate record {rec!r}")
        counts[b, k, n] = c
    if np.any(counts < 0):
        raise SchemaError("dataset grid is incomplete")
    return MeasurementDataset(design, counts)


# -- results ----------------------------------------------------------------

def _geometry_to_dict(geo):
    return {
        "rotation_axis": geo.rotation_axis.tolist(),
        "rotation_rate": geo.rotation_rate,
        "dilation_axes": geo.dilation_axes.tolist(),
        "dilation_rates": geo.dilation_rates.tolist(),
        "displacement": geo.displacement.tolist(),
        "degenerate": geo.degenerate,
    }


def result_to_dict(result, provenance):
    """Serializable form of a :class:`ReconstructionResult`."""
    return {
        "schema_version": SCHEMA_VERSION,
        "params": {"layout": list(PARAM_LAYOUT), "values": result.params.to_flat().tolist()},
        "generator": np.asarray(result.generator).tolist(),
        "geometry": _geometry_to_dict(geometric_decomposition(result.generator)),
        "infidelity": result.infidelity,
        "cost": result.cost,
        "restarts_used": result.restarts_used,
        "converged": result.converged,
        "provenance": provenance,
    }


def provenance(seed, config):
    return {"seed": seed, "config": config, "config_hash": config_hash(config), "tool_version": __version__}


@dataclass(frozen=True)
class LoadedResult:
    params: LindbladParams
    generator: np.ndarray
    infidelity: float
    converged: bool
    doc: dict


def params_to_dict(params):
    """Bare parameter file, accepted wherever a result file supplies a generator."""
    return {
        "schema_version": SCHEMA_VERSION,
        "params": {"layout": list(PARAM_LAYOUT), "values": params.to_flat().tolist()},
    }


def params_from_dict(doc):
    _check_version(doc)
    p = _require(doc, "params", dict)
    if _require(p, "layout", list) != list(PARAM_LAYOUT):
        raise SchemaError("unexpected parameter layout")
    values = [_finite_float(v, "parameter") for v in _require(p, "values", list)]
    if len(values) != 12:
        raise SchemaError("params must hold 12 values")
    try:
        return LindbladParams.from_flat(values)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def result_from_dict(doc):
    params = params_from_dict(doc)
    G = np.array(_require(doc, "generator", list), dtype=float)
    if G.shape != (4, 4) or not np.all(np.isfinite(G)):
        raise SchemaError("generator must be a finite 4x4 matrix")
    if np.any(G[0] != 0):
        raise SchemaError("generator row 0 must be zero")
    for key in ("geometry", "provenance"):
        _require(doc, key, dict)
    converged = _require(doc, "converged", bool)
    fid = _finite_float(_require(doc, "infidelity"), "infidelity")
    if fid < 0:
        raise SchemaError("infidelity must be non-negative")
    return LoadedResult(params, G, fid, converged, doc)


# -- Bloch frames -----------------------------------------------------------

def _canonical_sign(v):
    nz = np.flatnonzero(np.abs(v) > 1e-12)
    return -v if nz.size and v[nz[0]] < 0 else v


def bloch_frame(G, t):
    """Ellipsoid image of the Bloch sphere under ``exp(G t)``."""
    M, v = bloch_snapshot(G, t)
    U, s, _ = np.linalg.svd(M)
    dirs = [_canonical_sign(U[:, i]) for i in range(3)]
    return {
        "time": float(t),
        "M": M.tolist(),
        "v": v.tolist(),
        "semi_axes": s.tolist(),
        "principal_directions": [d.tolist() for d in dirs],
        "center": v.tolist(),
    }


def frames_to_dict(frames, source):
    return {"schema_version": SCHEMA_VERSION, "source": source, "frames": list(frames)}


def frames_from_dict(doc):
    _check_version(doc)
    frames = _require(doc, "frames", list)
    last = -math.inf
    for f in frames:
        t = _finite_float(_require(f, "time"), "frame time")
        if t < last:
            raise SchemaError("frames must be ordered by time")
        last = t
        M = np.array(_require(f, "M", list), dtype=float)
        s = np.array(_require(f, "semi_axes", list), dtype=float)
        if M.shape != (3, 3) or s.shape != (3,):
            raise SchemaError("frame matrix must be 3x3 with 3 semi-axes")
        if np.abs(np.linalg.svd(M, compute_uv=False) - s).max() > 1e-10:
            raise SchemaError("semi-axes do not match the singular values of M")
        for key in ("v", "principal_directions", "center"):
            _require(f, key, list)
    return doc


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def detect_kind(doc):
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    if "records" in doc:
        return "dataset"
    if "generator" in doc:
        return "result"
    if "params" in doc:
        return "params"
    if "frames" in doc:
        return "frames"
    raise SchemaError("unrecognized file kind")
