"""Model and schedule files.

Model files are YAML documents::

    spins: ["1/2", "1/2", "1"]
    J:                      # upper-triangular entries, 1-based sites
      - {k: 1, l: 2, value: 1.0}
      - {k: 2, l: 3, value: -0.7}
    gamma: [1.0, 2.3, -0.6]
    rho0: maximally-mixed   # or {preset: thermal, beta: 0.5}
                            # or {preset: pseudo-pure, p: 0.05, seed: 3}
                            # or {matrix: [[[re, im], ...], ...]}
    schedule:               # optional rows (duration, u_x, u_y, u_z)
      - [0.5, 1.0, 0.0, -0.3]

Spins must be quoted strings or integers so that half-integers never pass
through a float.  Schedule files are either YAML (a list of rows, or a
mapping with a ``schedule`` key) or CSV with four columns.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from .dynamics import ControlSchedule
from .network import ModelError, SpinNetworkModel, build
from .spin import HalfInt

MODEL_KEYS = {"spins", "J", "gamma", "rho0", "schedule", "max_dim"}


class ConfigError(ValueError):
    """Malformed model or schedule input; the message names the field."""


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(f"missing field '{key}'")
    return doc[key]


def _parse_spins(raw) -> list[HalfInt]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("field 'spins' must be a non-empty list")
    out = []
    for i, s in enumerate(raw):
        if isinstance(s, float):
            raise ConfigError(f"field 'spins[{i}]': write spins as strings like \"1/2\", not floats")
        try:
            out.append(HalfInt.parse(s))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'spins[{i}]': {exc}") from None
    return out


def _parse_exchange(raw, n: int) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, list):
        raise ConfigError("field 'J' must be a list of {k, l, value} entries")
    out = {}
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or set(entry) != {"k", "l", "value"}:
            raise ConfigError(f"field 'J[{i}]' must have exactly the keys k, l, value")
        k, l = entry["k"], entry["l"]
        if not (isinstance(k, int) and isinstance(l, int)) or not 1 <= k < l <= n:
            raise ConfigError(f"field 'J[{i}]': need integer sites 1 <= k < l <= {n}, got ({k}, {l})")
        if (k, l) in out:
            raise ConfigError(f"field 'J[{i}]': pair ({k}, {l}) given twice")
        out[(k, l)] = float(entry["value"])
    return out


def _parse_rho(raw, dim: int):
    if raw is None:
        return "maximally-mixed"
    if isinstance(raw, str):
        return raw
    if isinstance(raw, dict) and "matrix" in raw:
        try:
            arr = np.array(raw["matrix"], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("field 'rho0.matrix' must be nested [re, im] pairs") from None
        if arr.shape != (dim, dim, 2):
            raise ConfigError(f"field 'rho0.matrix' has shape {arr.shape}, expected {(dim, dim, 2)}")
        return arr[..., 0] + 1j * arr[..., 1]
    if isinstance(raw, dict) and "preset" in raw:
        return dict(raw)
    raise ConfigError("field 'rho0' must be a preset name, a {preset: ...} mapping or {matrix: ...}")


def model_from_dict(doc: dict) -> SpinNetworkModel:
    if not isinstance(doc, dict):
        raise ConfigError("model document must be a mapping")
    unknown = set(doc) - MODEL_KEYS
    if unknown:
        raise ConfigError(f"unknown field(s): {', '.join(sorted(unknown))}")
    spins = _parse_spins(_require(doc, "spins"))
    n = len(spins)
    J = _parse_exchange(doc.get("J"), n)
    gamma = _require(doc, "gamma")
    if not isinstance(gamma, list) or len(gamma) != n:
        raise ConfigError(f"field 'gamma' must list {n} values")
    dim = int(np.prod([l.dim for l in spins]))
    rho = _parse_rho(doc.get("rho0"), dim)
    try:
        return build(spins, J, [float(g) for g in gamma], rho, max_dim=int(doc.get("max_dim", 256)))
    except ModelError as exc:
        raise ConfigError(str(exc)) from None


def load_yaml(path) -> dict:
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None


def load_model(path) -> tuple[SpinNetworkModel, dict]:
    """Model plus the raw document (kept for reports and embedded schedules)."""
    doc = load_yaml(path)
    return model_from_dict(doc), doc


def schedule_from_rows(rows, field: str = "schedule") -> ControlSchedule:
    if not isinstance(rows, list) or not rows:
        raise ConfigError(f"field '{field}' must be a non-empty list of rows")
    try:
        return ControlSchedule(tuple(tuple(float(x) for x in r) for r in rows))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field '{field}': {exc}") from None


def load_schedule(spec: str) -> ControlSchedule:
    """Parse ``spec`` as a CSV/YAML path, or inline rows ``"d,ux,uy,uz;d,ux,uy,uz"``."""
    p = Path(spec)
    if p.exists():
        if p.suffix.lower() == ".csv":
            rows = []
            for line in p.read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("#") or line[0].isalpha():
                    continue
                rows.append(line.split(","))
            return schedule_from_rows(rows)
        doc = load_yaml(p)
        if isinstance(doc, dict):
            doc = doc.get("schedule")
        return schedule_from_rows(doc)
    rows = [r.split(",") for r in spec.split(";") if r.strip()]
    return schedule_from_rows(rows, "--schedule")


def model_to_dict(model: SpinNetworkModel) -> dict:
    """Round-trippable document for a model; the state is written explicitly."""
    doc = model.params()
    doc["rho0"] = {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in model.rho0]}
    return doc
