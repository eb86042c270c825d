"""Configuration files, NDJSON diagnostics and binary checkpoints.

Config files are flat ``key = value`` text with dotted keys::

    # comment
    sim.d = 2
    sim.alpha = 1.5
    ic.kind = "random"
    io.out = "run.ndjson"

Values are parsed as JSON where possible and kept as bare strings otherwise.

A checkpoint is one JSON header line followed by the raw payload: the full
(not half) spectrum as little-endian complex128, component-major then
row-major in wavenumber index.  The header carries a 64-bit FNV-1a hash of
the payload bytes.
"""

from __future__ import annotations

import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, TextIO

import numpy as np

from .diagnostics.records import RECORD_KEYS, DiagnosticsRecord, RecordBuilder, SampleState
from .errors import CheckpointError, ConfigurationError
from .evolve import RunState, SimParams
from .fields import ABC, OrszagTangLike, RandomBandLimited, SingleMode, Zero, hom_sobolev_sq
from .regimes import classify
from .spectral import full_spectrum, half_spectrum

CHECKPOINT_FORMAT = "fracmag-checkpoint"
CHECKPOINT_VERSION = 1
DIAGNOSTICS_FORMAT = "fracmag-diagnostics"

SIM_KEYS = (
    "d", "n", "alpha", "beta", "nu", "eta", "s", "lp", "t_end", "dt", "cfl_number",
    "dt_max", "sample_every", "seed", "reproject_every",
)
IC_KEYS = (
    "kind", "k", "polarization", "amplitude", "phase", "A", "B", "C",
    "k_min", "k_max", "seed", "target_norm", "s",
)
IO_KEYS = ("out", "checkpoint", "checkpoint_every", "final_checkpoint")
PICARD_KEYS = ("points", "max_iters", "tol_rel")
EXPERIMENT_KEYS = ("kind", "lam", "s_low", "amplitudes", "growth_factor", "logsob_N", "logsob_n")
SECTIONS = {
    "sim": SIM_KEYS,
    "ic": IC_KEYS,
    "io": IO_KEYS,
    "picard": PICARD_KEYS,
    "experiment": EXPERIMENT_KEYS,
}


# --------------------------------------------------------------------------
# initial conditions <-> plain dicts


def ic_to_dict(ic) -> dict:
    if ic is None:
        return {"kind": "random"}
    if isinstance(ic, SingleMode):
        return {"kind": "single_mode", "k": list(ic.k), "polarization": list(ic.polarization),
                "amplitude": ic.amplitude, "phase": ic.phase}
    if isinstance(ic, ABC):
        return {"kind": "abc", "A": ic.A, "B": ic.B, "C": ic.C}
    if isinstance(ic, OrszagTangLike):
        return {"kind": "orszag_tang", "amplitude": ic.amplitude}
    if isinstance(ic, RandomBandLimited):
        return {"kind": "random", "k_min": ic.k_min, "k_max": ic.k_max, "seed": ic.seed,
                "target_norm": ic.target_Hs_norm, "s": ic.s}
    if isinstance(ic, Zero):
        return {"kind": "zero"}
    raise ConfigurationError(f"cannot serialize initial condition {ic!r}")


def ic_from_dict(d: dict, sim_seed: int = 0, sim_s: float = 1.0, cutoff: int = 4):
    d = dict(d)
    kind = d.pop("kind", "random")
    try:
        if kind == "single_mode":
            return SingleMode(tuple(int(x) for x in d["k"]), tuple(float(x) for x in d["polarization"]),
                              float(d.get("amplitude", 1.0)), float(d.get("phase", 0.0)))
        if kind == "abc":
            return ABC(float(d.get("A", 1.0)), float(d.get("B", 1.0)), float(d.get("C", 1.0)))
        if kind == "orszag_tang":
            return OrszagTangLike(float(d.get("amplitude", 1.0)))
        if kind == "random":
            return RandomBandLimited(
                float(d.get("k_min", 1.0)),
                float(d.get("k_max", min(4, cutoff))),
                int(d.get("seed", sim_seed)),
                float(d.get("target_norm", 1.0)),
                float(d.get("s", sim_s)),
            )
        if kind == "zero":
            return Zero()
    except KeyError as exc:
        raise ConfigurationError(f"initial condition {kind!r} needs ic.{exc.args[0]}") from None
    raise ConfigurationError(f"unknown initial condition kind {kind!r}")


def params_to_dict(p: SimParams) -> dict:
    out = {k: getattr(p, k) for k in SIM_KEYS}
    out["ic"] = ic_to_dict(p.ic)
    return out


def params_from_dict(d: dict) -> SimParams:
    d = dict(d)
    ic = d.pop("ic", None)
    unknown = set(d) - set(SIM_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown parameter(s): {sorted(unknown)}")
    p = SimParams(**d)
    if ic is not None and ic != {"kind": "random"}:
        p = dataclasses.replace(p, ic=ic_from_dict(ic, p.seed, p.s, p.grid.dealias_cutoff))
    return p


# --------------------------------------------------------------------------
# config files


def parse_config_text(text: str) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        section, _, name = key.partition(".")
        if section not in SECTIONS or name not in SECTIONS[section]:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


@dataclass
class RunConfig:
    sim: SimParams
    io: dict = field(default_factory=dict)
    picard: dict = field(default_factory=dict)
    experiment: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Flat dotted-key view of every resolved setting."""
        out = {}
        pd = params_to_dict(self.sim)
        for k in SIM_KEYS:
            out[f"sim.{k}"] = pd[k]
        for k, v in pd["ic"].items():
            out[f"ic.{k}"] = v
        for section in ("io", "picard", "experiment"):
            for k, v in sorted(getattr(self, section).items()):
                out[f"{section}.{k}"] = v
        return out


def config_from_mapping(flat: dict[str, Any]) -> RunConfig:
    sections: dict[str, dict] = {s: {} for s in SECTIONS}
    for key, value in flat.items():
        section, _, name = key.partition(".")
        if section not in SECTIONS or name not in SECTIONS[section]:
            raise ConfigurationError(f"unknown key {key!r}")
        sections[section][name] = value
    try:
        sim = SimParams(**sections["sim"])
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None
    if sections["ic"]:
        sim = dataclasses.replace(
            sim, ic=ic_from_dict(sections["ic"], sim.seed, sim.s, sim.grid.dealias_cutoff)
        )
    return RunConfig(sim, sections["io"], sections["picard"], sections["experiment"])


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    return config_from_mapping(parse_config_text(text))


# --------------------------------------------------------------------------
# NDJSON diagnostics


def _fmt(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            return "null"
        return format(v, ".17g")
    return json.dumps(v)


def format_record(record: DiagnosticsRecord) -> str:
    d = record.to_dict()
    return "{" + ", ".join(f'"{k}": {_fmt(d[k])}' for k in RECORD_KEYS) + "}"


def write_diagnostics(stream: TextIO, record: DiagnosticsRecord) -> None:
    stream.write(format_record(record) + "\n")


def write_header(stream: TextIO, config: RunConfig, extra: Optional[dict] = None) -> None:
    p = config.sim
    header = {
        "format": DIAGNOSTICS_FORMAT,
        "version": 1,
        # decimal strings make the classification exact for the values as written
        "regime": classify(p.d, repr(p.alpha), repr(p.beta), repr(p.s), repr(p.eta)).to_dict(),
        "config": config.echo(),
    }
    if extra:
        header.update(extra)
    stream.write(json.dumps({"header": header}, sort_keys=True) + "\n")


def read_diagnostics(stream: TextIO) -> tuple[dict, list[DiagnosticsRecord]]:
    lines = [ln for ln in stream.read().splitlines() if ln.strip()]
    if not lines:
        raise CheckpointError("empty diagnostics stream")
    header = json.loads(lines[0]).get("header")
    if header is None:
        raise CheckpointError("diagnostics stream lacks a header line")
    return header, [DiagnosticsRecord(**json.loads(ln)) for ln in lines[1:]]


# --------------------------------------------------------------------------
# checkpoints

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a64_py(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


try:
    import numba

    @numba.njit(cache=True)
    def _fnv1a64_nb(buf):  # pragma: no cover - compiled
        h = numba.uint64(0xCBF29CE484222325)
        prime = numba.uint64(0x100000001B3)
        for i in range(buf.shape[0]):
            h ^= numba.uint64(buf[i])
            h *= prime
        return h

    def fnv1a64(data: bytes) -> int:
        return int(_fnv1a64_nb(np.frombuffer(data, dtype=np.uint8)))

except ImportError:  # pragma: no cover - depends on the environment
    fnv1a64 = _fnv1a64_py


def save_checkpoint(path, params: SimParams, state: RunState) -> None:
    grid = params.grid
    full = full_spectrum(grid, state.coeffs)
    payload = np.ascontiguousarray(full, dtype="<c16").tobytes()
    sample = None
    if state.sample is not None:
        s = state.sample
        if s.t != state.t:
            raise CheckpointError("checkpoints must be taken at sample times")
        sample = {"cont_integral": s.cont_integral, "dissipation_integral": s.dissipation_integral}
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "params": params_to_dict(params),
        "t": state.t,
        "step": state.step,
        "hs0": state.hs0,
        "sample": sample,
        "grid": {"d": grid.d, "n": grid.n, "ncomp": int(full.shape[0])},
        "endianness": "little",
        "dtype": "complex128",
        "payload_bytes": len(payload),
        "fnv1a64": format(fnv1a64(payload), "016x"),
    }
    line = json.dumps(header, sort_keys=True).encode() + b"\n"
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(line)
        fh.write(payload)
    tmp.replace(path)


@dataclass
class Checkpoint:
    header: dict
    params: SimParams
    state: RunState


def load_checkpoint(path) -> Checkpoint:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise CheckpointError("checkpoint header is not terminated")
    try:
        header = json.loads(raw[:nl])
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"corrupt checkpoint header: {exc}") from exc
    if header.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError("not a checkpoint file")
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {header.get('version')}")
    if header.get("endianness") != "little":
        raise CheckpointError("unsupported endianness")
    payload = raw[nl + 1:]
    if len(payload) != header["payload_bytes"]:
        raise CheckpointError(
            f"payload has {len(payload)} bytes, header promises {header['payload_bytes']}"
        )
    if format(fnv1a64(payload), "016x") != header["fnv1a64"]:
        raise CheckpointError("payload hash mismatch")
    try:
        params = params_from_dict(header["params"])
    except ConfigurationError as exc:
        raise CheckpointError(f"invalid parameters in checkpoint: {exc}") from exc
    grid = params.grid
    g = header["grid"]
    if (g["d"], g["n"]) != (grid.d, grid.n):
        raise CheckpointError("grid descriptor disagrees with the parameters")
    full = np.frombuffer(payload, dtype="<c16").reshape((g["ncomp"],) + (grid.n,) * grid.d)
    coeffs = half_spectrum(grid, full.astype(complex))
    sample = None
    if header["sample"] is not None:
        rb = RecordBuilder(grid, params.alpha, params.beta, params.nu, params.eta, params.s, params.lp)
        u = rb.velocity(coeffs)
        sample = SampleState(
            header["t"],
            coeffs.copy(),
            math.sqrt(hom_sobolev_sq(grid, u, grid.d / 2 + 1)),
            hom_sobolev_sq(grid, u, params.alpha),
            header["sample"]["cont_integral"],
            header["sample"]["dissipation_integral"],
        )
    state = RunState(header["step"], header["t"], coeffs, header["hs0"], sample)
    return Checkpoint(header, params, state)


def open_output(path) -> TextIO:
    if path in (None, "-"):
        return sys.stdout
    return open(path, "w")
