"""Snapshots, run configuration, manifests and atomic file output."""
from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .dynamics import BlowupPolicy, StepSchedule
from .functionals import DiagnosticsRecord, FieldPair, PhysParams
from .grid import ConfigurationError, Grid, make_grid

__all__ = [
    "SNAPSHOT_MAGIC",
    "SNAPSHOT_VERSION",
    "SnapshotError",
    "write_snapshot",
    "read_snapshot",
    "snapshot_bytes",
    "parse_snapshot",
    "atomic_write_bytes",
    "atomic_write_text",
    "write_json",
    "diagnostics_csv",
    "ConfigError",
    "CONFIG_SCHEMA",
    "InitialData",
    "RunConfig",
    "load_config",
    "parse_config",
    "RunManifest",
]

SNAPSHOT_MAGIC = b"CNLS"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIIId")


# -- snapshots ---------------------------------------------------------------


class SnapshotError(ValueError):
    """Malformed snapshot; ``offset`` is the byte position of the problem."""

    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} (at byte offset {offset})")
        self.offset = offset


def snapshot_bytes(s: FieldPair) -> bytes:
    g = s.grid
    head = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, g.n, g.points, g.box_length)
    body = [np.ascontiguousarray(f, dtype="<c16").tobytes() for f in (s.phi, s.psi)]
    return head + body[0] + body[1]


def parse_snapshot(data: bytes) -> FieldPair:
    if len(data) < 4:
        raise SnapshotError("truncated magic", len(data))
    if data[:4] != SNAPSHOT_MAGIC:
        raise SnapshotError(f"bad magic {data[:4]!r}", 0)
    if len(data) < 8:
        raise SnapshotError("truncated version", len(data))
    (version,) = struct.unpack_from("<I", data, 4)
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"unsupported version {version}", 4)
    if len(data) < _HEADER.size:
        raise SnapshotError("truncated header", len(data))
    _, _, n, N, L = _HEADER.unpack_from(data, 0)
    try:
        grid = make_grid(n, N, L)
    except ConfigurationError as exc:
        raise SnapshotError(f"invalid grid header: {exc}", 8) from None
    nbytes = 16 * grid.size
    need = _HEADER.size + 2 * nbytes
    if len(data) < need:
        raise SnapshotError(f"truncated samples: expected {need} bytes, got {len(data)}", len(data))
    if len(data) > need:
        raise SnapshotError("trailing bytes after samples", need)
    off = _HEADER.size
    phi = np.frombuffer(data, dtype="<c16", count=grid.size, offset=off).reshape(grid.shape)
    psi = np.frombuffer(data, dtype="<c16", count=grid.size, offset=off + nbytes).reshape(grid.shape)
    return FieldPair(grid, phi.astype(complex), psi.astype(complex))


def write_snapshot(s: FieldPair, path) -> None:
    atomic_write_bytes(path, snapshot_bytes(s))


def read_snapshot(path) -> FieldPair:
    return parse_snapshot(Path(path).read_bytes())


# -- atomic output -----------------------------------------------------------


def atomic_write_bytes(path, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    if isinstance(obj, float) and not np.isfinite(obj):
        return None if np.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def diagnostics_csv(records: list[DiagnosticsRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DiagnosticsRecord.columns())
    for r in records:
        w.writerow([repr(float(v)) for v in r.as_row()])
    return buf.getvalue()


# -- configuration -----------------------------------------------------------


class ConfigError(ConfigurationError):
    """Invalid run configuration; ``line`` is 1-based when known."""

    def __init__(self, msg: str, line: int | None = None, source: str = "<config>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)
        self.line = line
        self.source = source


_pos = {"type": "number", "exclusiveMinimum": 0}
_pair = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["params", "grid", "schedule", "initial_data"],
    "additionalProperties": False,
    "properties": {
        "params": {
            "type": "object",
            "required": ["n", "p", "beta"],
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "enum": [1, 2, 3]},
                "p": {"type": "number", "minimum": 0},
                "beta": {"type": "number", "minimum": 0},
                "omega1": _pos,
                "omega2": _pos,
            },
        },
        "grid": {
            "type": "object",
            "required": ["points", "box_length"],
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "enum": [1, 2, 3]},
                "points": {"type": "integer", "minimum": 1},
                "box_length": _pos,
            },
        },
        "schedule": {
            "type": "object",
            "required": ["dt", "t_end"],
            "additionalProperties": False,
            "properties": {
                "dt": _pos,
                "t_end": _pos,
                "output_every": {"type": "integer", "minimum": 1},
                "adapt": {"type": "boolean"},
                "dt_min": _pos,
            },
        },
        "policy": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "grad_growth_factor": {"type": "number", "exclusiveMinimum": 1},
                "tail_max": _pos,
            },
        },
        "initial_data": {
            "type": "object",
            "required": ["type"],
            "properties": {"type": {"enum": ["gaussian", "ground_state", "explicit_blowup", "snapshot"]}},
            "allOf": [
                {
                    "if": {"properties": {"type": {"const": "gaussian"}}},
                    "then": {
                        "required": ["amplitudes"],
                        "additionalProperties": False,
                        "properties": {
                            "type": {},
                            "amplitudes": _pair,
                            "widths": {**_pair, "items": _pos},
                            "chirps": _pair,
                        },
                    },
                },
                {
                    "if": {"properties": {"type": {"enum": ["ground_state", "snapshot"]}}},
                    "then": {
                        "required": ["file"],
                        "additionalProperties": False,
                        "properties": {"type": {}, "file": {"type": "string", "minLength": 1}},
                    },
                },
                {
                    "if": {"properties": {"type": {"const": "explicit_blowup"}}},
                    "then": {
                        "additionalProperties": False,
                        "properties": {"type": {}, "t0": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}},
                    },
                },
            ],
        },
        "seed": {"type": "integer"},
        "output_dir": {"type": "string"},
    },
}


def _line_of(text: str, path) -> int | None:
    """Best-effort line of the JSON member named by ``path`` (keys and indices)."""
    pos = 0
    found = None
    for key in path:
        if isinstance(key, int):
            continue
        i = text.find(json.dumps(key), pos)
        if i < 0:
            break
        pos = i
        found = i
    if found is None:
        return None
    return text.count("\n", 0, found) + 1


@dataclass(frozen=True)
class InitialData:
    kind: str
    amplitudes: tuple[float, float] = (1.0, 0.0)
    widths: tuple[float, float] = (1.0, 1.0)
    chirps: tuple[float, float] = (0.0, 0.0)
    file: str | None = None
    t0: float = 0.0

    def gaussian_pair(self, grid: Grid) -> FieldPair:
        """``a exp(-(1 + i c)|x|^2 / (2 w^2))`` per component."""
        out = []
        for a, w, c in zip(self.amplitudes, self.widths, self.chirps):
            out.append(a * np.exp(-(1.0 + 1j * c) * grid.r2 / (2.0 * w * w)))
        return FieldPair(grid, *out)


@dataclass(frozen=True)
class RunConfig:
    params: PhysParams
    grid: Grid
    schedule: StepSchedule
    policy: BlowupPolicy
    initial_data: InitialData
    seed: int = 0
    output_dir: str = "out"
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    def echo(self) -> dict:
        return self.raw


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, source) from None
    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(v.iter_errors(raw), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        e = errors[0]
        loc = "/".join(map(str, e.absolute_path)) or "<root>"
        raise ConfigError(f"{loc}: {e.message}", _line_of(text, list(e.absolute_path)), source)

    def fail(path, msg):
        raise ConfigError(f"{'/'.join(path)}: {msg}", _line_of(text, path), source)

    pr = raw["params"]
    try:
        P = PhysParams(pr["n"], float(pr["p"]), float(pr["beta"]), float(pr.get("omega1", 1.0)), float(pr.get("omega2", 1.0)))
    except ConfigurationError as exc:
        fail(["params"], str(exc))
    gr = raw["grid"]
    if gr.get("n", P.n) != P.n:
        fail(["grid", "n"], f"grid dimension {gr['n']} does not match params.n = {P.n}")
    try:
        grid = make_grid(P.n, gr["points"], float(gr["box_length"]))
    except ConfigurationError as exc:
        fail(["grid", "points"], str(exc))
    sc = raw["schedule"]
    try:
        sched = StepSchedule(
            float(sc["dt"]),
            float(sc["t_end"]),
            int(sc.get("output_every", 1)),
            bool(sc.get("adapt", False)),
            float(sc.get("dt_min", min(1e-9, float(sc["dt"])))),
        )
    except ConfigurationError as exc:
        fail(["schedule"], str(exc))
    po = raw.get("policy", {})
    pol = BlowupPolicy(float(po.get("grad_growth_factor", 1e6)), float(po.get("tail_max", 1e-2)))
    d = raw["initial_data"]
    kind = d["type"]
    if kind == "gaussian":
        init = InitialData(
            kind,
            tuple(map(float, d["amplitudes"])),
            tuple(map(float, d.get("widths", (1.0, 1.0)))),
            tuple(map(float, d.get("chirps", (0.0, 0.0)))),
        )
    elif kind in ("ground_state", "snapshot"):
        init = InitialData(kind, file=d["file"])
    else:
        if not P.critical:
            fail(["initial_data", "type"], "explicit_blowup needs the critical power p = 2/n")
        init = InitialData(kind, t0=float(d.get("t0", 0.0)))
    return RunConfig(P, grid, sched, pol, init, int(raw.get("seed", 0)), raw.get("output_dir", "out"), raw)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))


# -- manifests ---------------------------------------------------------------


@dataclass
class RunManifest:
    command: str
    config: dict
    code_version: str
    verdict: str
    summary: dict = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, directory) -> Path:
        """Write ``manifest.json`` after checking every listed file exists."""
        directory = Path(directory)
        missing = [f for f in self.files if not (directory / f).exists()]
        if missing:
            raise FileNotFoundError(f"manifest references missing files: {missing}")
        path = directory / "manifest.json"
        write_json(path, self.to_dict())
        return path
