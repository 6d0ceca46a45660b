"""Command-line front end.

    usckd sweep  [--resolution N]              fringe grid over (phi, psi)
    usckd trace  [--preset cbw-toggle] ...     AOM-driven time trace + summary
    usckd keygen [--rounds N] ...              key session transcript
    usckd eve    [--tap-ratio R] ...           eavesdropper analysis

Every subcommand takes ``--seed``, ``--out``, ``--preset`` and ``--config``.
Parameters resolve as: dataclass defaults < preset < config file < flags.
Config files are flat ``key = value`` text (``#`` comments), or any JSON file
this tool wrote (its embedded ``config`` block is reused).

Exit codes: 0 success, 1 usage/config error, 2 numerical precondition.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any

import numpy as np

from . import io
from .adversary import (
    EXACT,
    EveStrategy,
    MonteCarlo,
    Placement,
    StrategyKind,
    TapConfig,
    analyze,
    run_attacked_session,
)
from .drive import (
    ArmDrive,
    DriveSchedule,
    GlassRamp,
    NoiseModel,
    NO_NOISE,
    Segment,
    calibrate_noise,
    dominant_frequency,
    ensemble_rms_fluctuation,
    rms_fluctuation,
    simulate_trace,
    toggle_level,
)
from .errors import PreconditionError, USCKDError
from .interferometer import coupled_intensities
from .protocol import DetectorConfig, run_session

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


# --- configs -----------------------------------------------------------------


@dataclass
class SweepConfig:
    resolution: int = 101
    seed: int = 0


@dataclass
class TraceConfig:
    sample_rate: float = 100.0
    duration: float = 20.0
    phi: float = 0.0  # static arm-phase offsets at t=0
    psi: float = 0.0
    bob_detune: float = 0.0  # upper-arm detuning, Hz
    alice_detune: float = 0.0
    toggles: str = ""  # "t:bob_hz:alice_hz;..."
    ramp_start: float = 0.0
    ramp_duration: float = 0.0  # 0 disables the glass ramp
    ramp_total: float = 2 * math.pi
    ramp_exponent: float = 2.0
    noise_sigma: float = 0.0
    noise_target_rms: float = 0.0  # > 0: calibrate sigma instead
    leakage: float = 0.0
    ensemble_trials: int = 100
    seed: int = 0


@dataclass
class KeygenConfig:
    rounds: int = 1000
    noise_sigma: float = 0.0
    threshold: float = 0.5
    erasure_band: float = 0.1
    seed: int = 0


@dataclass
class EveConfig:
    tap_ratio: float = 0.1
    placement: str = "outbound_only"
    strategy: str = "intensity_only"
    mode: str = "exact"  # or "monte_carlo"
    samples: int = 100_000
    session_rounds: int = 0  # > 0: also run an attacked key session
    noise_sigma: float = 0.0
    threshold: float = 0.5
    erasure_band: float = 0.1
    seed: int = 0


CONFIGS = {"sweep": SweepConfig, "trace": TraceConfig, "keygen": KeygenConfig, "eve": EveConfig}

_BARE_LAB = {"duration": 20.0, "noise_target_rms": 0.2}
_CBW_TOGGLE = {"bob_detune": 1.0, "alice_detune": -1.0, "toggles": "10:1:1", "duration": 20.0}
_GLASS_RAMP = {"duration": 20.0, "ramp_start": 5.0, "ramp_duration": 10.0}

PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "sweep": {"full-grid": {"resolution": 101}},
    "trace": {"bare-lab": _BARE_LAB, "cbw-toggle": _CBW_TOGGLE, "glass-ramp": _GLASS_RAMP},
    "keygen": {"noiseless": {"rounds": 1000}},
    "eve": {"intensity-only": {"strategy": "intensity_only"}, "coherent": {"strategy": "coherent_combine"}},
}


def _coerce(cls, key: str, value: Any) -> Any:
    types = {f.name: f.type for f in dataclasses.fields(cls)}
    if key not in types:
        raise UsageError(f"unknown {cls.__name__} key {key!r}")
    t = types[key]
    try:
        if t == "int":
            return int(value)
        if t == "float":
            return float(value)
        return str(value)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None


def parse_flat(text: str) -> dict[str, str]:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {n}: expected 'key = value'")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def load_config_file(path: str) -> dict[str, Any]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e.strerror}") from None
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        for key in ("config", "params"):
            if isinstance(doc.get(key), dict):
                return doc[key]
        raise UsageError(f"{path}: JSON has no 'config' block")
    return parse_flat(text)


def resolve(cmd: str, args: argparse.Namespace) -> Any:
    cls = CONFIGS[cmd]
    values: dict[str, Any] = {}
    if args.preset:
        if args.preset not in PRESETS[cmd]:
            raise UsageError(f"unknown preset {args.preset!r} for {cmd}; choose from {sorted(PRESETS[cmd])}")
        values.update(PRESETS[cmd][args.preset])
    if args.config:
        values.update(load_config_file(args.config))
    for f in dataclasses.fields(cls):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    return cls(**{k: _coerce(cls, k, v) for k, v in values.items()})


# --- builders ----------------------------------------------------------------


def parse_toggles(spec: str) -> list[tuple[float, float, float]]:
    out = []
    for item in filter(None, (s.strip() for s in spec.split(";"))):
        parts = item.split(":")
        if len(parts) != 3:
            raise UsageError(f"toggle {item!r}: expected 't:bob_hz:alice_hz'")
        out.append(tuple(float(p) for p in parts))
    return out


def build_schedule(cfg: TraceConfig) -> DriveSchedule:
    first = Segment(
        0.0,
        (ArmDrive(cfg.bob_detune, cfg.phi), ArmDrive()),
        (ArmDrive(cfg.alice_detune, cfg.psi), ArmDrive()),
    )
    segs = [first] + [
        Segment(t, (ArmDrive(b), ArmDrive()), (ArmDrive(a), ArmDrive()))
        for t, b, a in parse_toggles(cfg.toggles)
    ]
    ramp = None
    if cfg.ramp_duration > 0:
        ramp = GlassRamp(cfg.ramp_start, cfg.ramp_duration, cfg.ramp_total, cfg.ramp_exponent)
    return DriveSchedule(tuple(segs), ramp)


def build_noise(cfg: TraceConfig) -> NoiseModel:
    if cfg.noise_target_rms > 0:
        # operating point = the static relative phase the trace starts at
        return calibrate_noise(
            cfg.noise_target_rms, cfg.duration, cfg.sample_rate, seed=cfg.seed,
            trials=cfg.ensemble_trials, operating_phase=cfg.psi - cfg.phi,
        )
    if cfg.noise_sigma > 0:
        return NoiseModel.random_walk(cfg.noise_sigma, cfg.seed)
    return NO_NOISE


def _peak(channel, rate) -> dict:
    p = dominant_frequency(channel, rate)
    return {"frequency": p.frequency, "resolution": p.resolution, "no_oscillation": p.no_oscillation}


# --- commands ----------------------------------------------------------------


def cmd_sweep(cfg: SweepConfig, out: IO[str]) -> tuple[dict, int]:
    if cfg.resolution < 2:
        raise UsageError("resolution must be >= 2")
    # both edges included so odd resolutions land on pi and pi/2
    grid = np.linspace(0.0, 2 * math.pi, cfg.resolution)
    phi, psi = (a.ravel() for a in np.meshgrid(grid, grid, indexing="ij"))
    i_a, i_b = coupled_intensities(phi, psi)
    io.write_csv(out, ("phi", "psi", "I_A", "I_B"), (phi, psi, i_a, i_b))
    meta = {"config": dataclasses.asdict(cfg), "rows": int(phi.size)}
    return meta, EXIT_OK


def cmd_trace(cfg: TraceConfig, out: IO[str]) -> tuple[dict, int]:
    schedule = build_schedule(cfg)
    noise = build_noise(cfg)
    trace = simulate_trace(schedule, noise, cfg.sample_rate, cfg.duration, cfg.leakage)
    io.write_csv(out, ("t", "I_A", "I_B", "I_alpha"), (trace.t, trace["I_A"], trace["I_B"], trace["I_alpha"]))

    summary: dict[str, Any] = {
        "config": dataclasses.asdict(cfg),
        "samples": len(trace),
        "noise": {"kind": noise.kind.value, "sigma_per_sample": noise.sigma_per_sample, "seed": noise.seed},
        "dominant_frequency": {c: _peak(trace[c], cfg.sample_rate) for c in trace.CHANNELS},
    }
    bounds = [s.start for s in schedule.segments] + [cfg.duration]
    segs = []
    for k, s in enumerate(schedule.segments):
        lo = int(math.ceil(bounds[k] * cfg.sample_rate))
        hi = min(len(trace), int(math.ceil(bounds[k + 1] * cfg.sample_rate)))
        seg_ia = trace["I_A"][lo:hi]
        entry = {
            "start": s.start,
            "bob_beat": s.beat("bob"),
            "alice_beat": s.beat("alice"),
            "samples": int(max(hi - lo, 0)),
        }
        if len(seg_ia):
            entry["I_A_dominant_frequency"] = _peak(seg_ia, cfg.sample_rate)
            entry["I_A_mean"] = float(seg_ia.mean())
            entry["I_A_flat"] = bool(np.ptp(seg_ia) <= 1e-9)
        if k > 0:
            try:
                entry["toggle_level"] = toggle_level(schedule, k)
            except USCKDError:
                entry["toggle_level"] = None
        segs.append(entry)
    summary["segments"] = segs
    if schedule.ramp is not None:
        r = schedule.ramp
        in_ramp = (trace.t >= r.start_time) & (trace.t <= r.start_time + r.duration)
        summary["ramp"] = {
            "I_A_min": float(trace["I_A"][in_ramp].min()) if in_ramp.any() else None,
            "I_A_max": float(trace["I_A"][in_ramp].max()) if in_ramp.any() else None,
        }
    if noise.active:
        clean = simulate_trace(schedule, NO_NOISE, cfg.sample_rate, cfg.duration, cfg.leakage)
        summary["rms_fluctuation_I_A"] = rms_fluctuation(trace["I_A"], clean["I_A"])
        if not schedule.toggle_times and schedule.max_beat() == 0 and schedule.ramp is None:
            summary["rms_fluctuation_I_A_ensemble_mean"] = ensemble_rms_fluctuation(
                dataclasses.replace(noise, seed=noise.seed + 1_000_000), cfg.duration, cfg.sample_rate,
                cfg.ensemble_trials, cfg.psi - cfg.phi,
            )
    return summary, EXIT_OK


def cmd_keygen(cfg: KeygenConfig, out: IO[str]) -> tuple[dict, int]:
    if cfg.rounds < 1:
        raise UsageError("rounds must be >= 1")
    noise = NoiseModel.random_walk(cfg.noise_sigma, cfg.seed) if cfg.noise_sigma > 0 else NO_NOISE
    res = run_session(cfg.rounds, noise, DetectorConfig(cfg.threshold, cfg.erasure_band), cfg.seed)
    doc = res.to_dict()
    doc["params"] = dataclasses.asdict(cfg)
    out.write(io.dumps(doc))
    code = EXIT_OK
    if not noise.active and res.bit_error_rate not in (0, 0.0):
        code = EXIT_NUMERIC
    return {}, code


def cmd_eve(cfg: EveConfig, out: IO[str]) -> tuple[dict, int]:
    tap_cfg = TapConfig(cfg.tap_ratio, Placement(cfg.placement))
    strategy = EveStrategy(StrategyKind(cfg.strategy))
    if cfg.mode == "exact":
        mode = EXACT
    elif cfg.mode in ("monte_carlo", "mc"):
        mode = MonteCarlo(cfg.samples, cfg.seed)
    else:
        raise UsageError(f"unknown mode {cfg.mode!r}")
    doc = analyze(strategy, tap_cfg, mode).to_dict()
    doc["config"] = dataclasses.asdict(cfg)
    if strategy.kind is StrategyKind.COHERENT_COMBINE:
        doc["note"] = "model-dependent, see docs"
    if cfg.session_rounds > 0:
        noise = NoiseModel.random_walk(cfg.noise_sigma, cfg.seed) if cfg.noise_sigma > 0 else NO_NOISE
        session, eve = run_attacked_session(
            cfg.session_rounds, tap_cfg, strategy, noise,
            DetectorConfig(cfg.threshold, cfg.erasure_band), cfg.seed,
        )
        doc["session"] = {
            "ber": session.bit_error_rate,
            "erasures": session.erasure_count,
            "key_length": len(session.bob_key),
            "eve_accuracy_phi": eve.accuracy_phi,
            "eve_accuracy_key": eve.accuracy_key,
        }
    out.write(io.dumps(doc))
    return {}, EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "trace": cmd_trace, "keygen": cmd_keygen, "eve": cmd_eve}


# --- argument parsing --------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _flags(p: argparse.ArgumentParser, cls) -> None:
    for f in dataclasses.fields(cls):
        if f.name == "seed":
            continue
        typ = {"int": int, "float": float}.get(f.type, str)
        p.add_argument("--" + f.name.replace("_", "-"), dest=f.name, type=typ, default=None,
                       help=f"(default {f.default!r})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="usckd", description="Coupled-MZI classical key distribution simulator.")
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    helps = {
        "sweep": "I_A/I_B over a (phi, psi) grid (CSV)",
        "trace": "time trace under an AOM drive schedule (CSV + summary JSON)",
        "keygen": "run a key-distribution session (JSON)",
        "eve": "eavesdropper accuracy and mutual information (JSON)",
    }
    for name, cls in CONFIGS.items():
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--preset", default=None, help=f"one of {sorted(PRESETS[name])}")
        p.add_argument("--config", default=None, help="flat key=value file or a JSON output of this tool")
        _flags(p, cls)
    return parser


def _sidecar(path: Path) -> Path:
    return path.with_name(path.stem + ".summary.json")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.cmd, args)
        fn = COMMANDS[args.cmd]
        if args.out == "-":
            meta, code = fn(cfg, sys.stdout)
            return code
        path = Path(args.out)
        try:
            fh = open(path, "w", encoding="utf-8", newline="\n")
        except OSError as e:
            raise UsageError(f"cannot write {path}: {e.strerror}") from None
        with fh:
            meta, code = fn(cfg, fh)
        if meta:
            io.write_json(_sidecar(path), meta)
        return code
    except (UsageError, ValueError) as e:
        if isinstance(e, PreconditionError):
            print(f"usckd: {e}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"usckd: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
