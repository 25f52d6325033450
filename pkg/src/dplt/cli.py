"""
Command-line front end.

    dplt run --seed 7 --out out/run
    dplt sweep-speed --speeds 5,10,20,40 --seeds 5 --out out/speed
    dplt broadcast-time --p-turns 0,0.2,0.4 --beamwidths-deg 15,30,omni
    dplt run --config out/run/manifest.txt --out out/rerun

Config files are ``key = value`` lines with dotted section keys
(``antenna.tx_power_dbm = 40``) and ``#`` comments. Resolution order is
built-in defaults, then the file, then ``--set`` overrides, then the
dedicated flags. Every output directory gets a ``manifest.txt`` in the same
format, so ``--config manifest.txt`` reproduces the run.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from dataclasses import fields, is_dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence

from . import __version__, engine
from .config import ScenarioConfig, coerce, dumps, from_flat, to_flat
from .errors import ConfigError, DpltError, IoError, MissingFile

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_COVERAGE = 4

FLOAT_FMT = "%.9g"


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

def read_config_text(text: str) -> Dict[str, Any]:
    """Parse ``key = value`` lines; values are type-checked against the schema."""
    flat: Dict[str, Any] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=n)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", line=n)
        flat[key] = coerce(key, value, line=n)
    return flat


def parse_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
                 ) -> ScenarioConfig:
    flat = to_flat(ScenarioConfig())
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except FileNotFoundError:
            raise MissingFile(f"config file not found: {path}") from None
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from None
        flat.update(read_config_text(text))
    for k, v in (overrides or {}).items():
        flat[k] = coerce(k, v)
    return from_flat(flat)


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def format_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else FLOAT_FMT % v
    return str(v)


def emit_csv(rows: Iterable[Any], path: str, header: Optional[Sequence[str]] = None) -> str:
    """Write dataclass rows (or plain sequences with ``header``) as CSV.

    The header follows the dataclass field order. An empty row list still
    needs ``header`` (or yields an empty file).
    """
    rows = list(rows)
    if header is None and rows and is_dataclass(rows[0]):
        header = [f.name for f in fields(rows[0])]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if header is not None:
                w.writerow(header)
            for row in rows:
                values = [getattr(row, h) for h in header] if is_dataclass(row) else row
                w.writerow([format_cell(v) for v in values])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_manifest(cfg: ScenarioConfig, out_dir: str, command: str,
                   extra: Optional[Dict[str, Any]] = None) -> str:
    lines = [f"# artifact_version = {__version__}", f"# command = {command}"]
    for k, v in (extra or {}).items():
        lines.append(f"# {k} = {v}")
    path = os.path.join(out_dir, "manifest.txt")
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n" + dumps(cfg))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return path


def _ensure_dir(path: str):
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {path}: {exc}") from None


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _floats(text: str) -> List[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _beamwidths(text: str) -> list:
    out = []
    for s in text.split(","):
        s = s.strip().lower()
        if not s:
            continue
        if s == engine.OMNI:
            out.append(engine.OMNI)
            continue
        try:
            out.append(float(s))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad beamwidth {s!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _assignment(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected key=value")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", metavar="PATH", help="key = value config file")
    shared.add_argument("--seed", type=_u64, help="master seed")
    shared.add_argument("--out", metavar="DIR", default=".", help="output directory")
    shared.add_argument("--estimator", choices=("dplt", "rss", "aoa"))
    shared.add_argument("--duration-s", type=float)
    shared.add_argument("--ticks-ms", type=float, help="tick length in ms")
    shared.add_argument("--set", dest="overrides", type=_assignment, action="append",
                        default=[], metavar="KEY=VALUE", help="override any config key")
    shared.add_argument("--workers", type=int, default=1, help="processes for sweep cells")

    p = argparse.ArgumentParser(prog="dplt", description="Directional-antenna PL&T simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("run", parents=[shared], help="one scenario: records, summary, manifest")

    s = sub.add_parser("sweep-speed", parents=[shared], help="mean error against target speed")
    s.add_argument("--speeds", type=_floats, default=[5.0 * i for i in range(1, 11)])
    s.add_argument("--seeds", type=int, default=5)

    s = sub.add_parser("sweep-beamwidth", parents=[shared],
                       help="zone-update overhead and error against beamwidth floor")
    s.add_argument("--beamwidths-deg", type=_beamwidths, default=[5.0, 10.0, 20.0, 45.0, 90.0])
    s.add_argument("--seeds", type=int, default=5)

    s = sub.add_parser("broadcast-time", parents=[shared],
                       help="time to first delivered packet against turn probability")
    s.add_argument("--p-turns", type=_floats, default=[0.0, 0.2, 0.4])
    s.add_argument("--beamwidths-deg", type=_beamwidths,
                   default=[15.0, 30.0, 45.0, 60.0, 90.0, engine.OMNI])
    s.add_argument("--seeds", type=int, default=1)

    s = sub.add_parser("fec-accuracy", parents=[shared], help="tracking accuracy with FEC on/off")
    s.add_argument("--ebn0-db", type=_floats, default=[4.0, 6.0, 8.0, 10.0])
    s.add_argument("--fec", choices=("on", "off", "both"), default="both")
    s.add_argument("--seeds", type=int, default=2)

    s = sub.add_parser("compare-estimators", parents=[shared],
                       help="DPLT, RSS and AoA on identical trajectories")
    s.add_argument("--seeds", type=int, default=10)
    return p


def config_from_args(args: argparse.Namespace) -> ScenarioConfig:
    overrides: Dict[str, Any] = dict(args.overrides)
    for key, attr in (("seed", "seed"), ("estimator", "estimator"),
                      ("duration_s", "duration_s"), ("tick_ms", "ticks_ms")):
        v = getattr(args, attr, None)
        if v is not None:
            overrides[key] = v
    return parse_config(args.config, overrides)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_run(cfg: ScenarioConfig, args) -> int:
    records, summary = engine.run_scenario(cfg)
    emit_csv(records, os.path.join(args.out, "records.csv"), engine.RECORD_FIELDS)
    emit_csv([summary], os.path.join(args.out, "summary.csv"))
    write_manifest(cfg, args.out, "run")
    print(f"mean_error={summary.mean_error:.4g} m accuracy={summary.accuracy:.3f} "
          f"zone_updates={summary.zone_update_count} gaps={summary.coverage_gap_fraction:.3f}")
    if summary.coverage_gap_fraction >= 1.0:
        print("coverage collapsed: no tick had two references in range", file=sys.stderr)
        return EXIT_COVERAGE
    return EXIT_OK


def _check_seeds(n: int):
    if n < 1:
        raise ConfigError("--seeds must be at least 1", key="seeds")


def cmd_sweep_speed(cfg, args) -> int:
    _check_seeds(args.seeds)
    rows = engine.speed_sweep(cfg, args.speeds, args.seeds, args.workers)
    emit_csv(rows, os.path.join(args.out, "speed_sweep.csv"))
    write_manifest(cfg, args.out, "sweep-speed",
                   {"speeds": ",".join(map(str, args.speeds)), "seeds": args.seeds})
    for r in rows:
        print(f"{r.speed:6.1f} m/s  {r.mean_error:.4g} m")
    return EXIT_OK


def cmd_sweep_beamwidth(cfg, args) -> int:
    _check_seeds(args.seeds)
    if engine.OMNI in args.beamwidths_deg:
        raise ConfigError("omni is not a beamwidth floor", key="beamwidths-deg")
    rows = engine.beamwidth_tradeoff_sweep(cfg, args.beamwidths_deg, args.seeds, args.workers)
    emit_csv(rows, os.path.join(args.out, "beamwidth_sweep.csv"))
    write_manifest(cfg, args.out, "sweep-beamwidth",
                   {"beamwidths_deg": ",".join(map(str, args.beamwidths_deg)),
                    "seeds": args.seeds})
    for r in rows:
        print(f"{r.beamwidth_deg:6.1f} deg  overhead {r.zone_update_overhead:.3g}/s  "
              f"error {r.mean_error:.4g} m")
    return EXIT_OK


def cmd_broadcast_time(cfg, args) -> int:
    _check_seeds(args.seeds)
    rows = engine.broadcasting_time_experiment(cfg, args.p_turns, args.beamwidths_deg,
                                               args.seeds, args.workers)
    emit_csv(rows, os.path.join(args.out, "broadcast_time.csv"))
    write_manifest(cfg, args.out, "broadcast-time",
                   {"p_turns": ",".join(map(str, args.p_turns)),
                    "beamwidths_deg": ",".join(map(str, args.beamwidths_deg)),
                    "seeds": args.seeds})
    for r in rows:
        print(f"p_turn {r.p_turn:.2f}  {r.beamwidth:>5}  {1000 * r.mean_time_s:.1f} ms")
    return EXIT_OK


def cmd_fec_accuracy(cfg, args) -> int:
    _check_seeds(args.seeds)
    rows = engine.fec_accuracy_experiment(cfg, args.ebn0_db, args.seeds, args.workers)
    header = [f.name for f in fields(engine.FecRow)]
    if args.fec == "on":
        header.remove("accuracy_fec_off")
    elif args.fec == "off":
        header.remove("accuracy_fec_on")
    emit_csv([[getattr(r, h) for h in header] for r in rows],
             os.path.join(args.out, "fec_accuracy.csv"), header)
    write_manifest(cfg, args.out, "fec-accuracy",
                   {"ebn0_db": ",".join(map(str, args.ebn0_db)), "fec": args.fec,
                    "seeds": args.seeds})
    for r in rows:
        print(f"{r.ebn0_db:5.1f} dB  on {r.accuracy_fec_on:.3f}  off {r.accuracy_fec_off:.3f}  "
              f"residual BER {r.residual_ber_mc:.3g} (model {r.residual_ber:.3g})")
    return EXIT_OK


def cmd_compare(cfg, args) -> int:
    _check_seeds(args.seeds)
    rows, pooled = engine.compare_estimators(cfg, args.seeds, args.workers)
    table = [[r.seed_index, r.seed, r.dplt, r.rss, r.aoa] for r in rows]
    table.append(["pooled", "", pooled["dplt"], pooled["rss"], pooled["aoa"]])
    emit_csv(table, os.path.join(args.out, "compare_estimators.csv"),
             ["seed_index", "seed", "dplt", "rss", "aoa"])
    write_manifest(cfg, args.out, "compare-estimators", {"seeds": args.seeds})
    print("pooled mean error: " + "  ".join(f"{k} {v:.4g} m" for k, v in pooled.items()))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep-speed": cmd_sweep_speed,
    "sweep-beamwidth": cmd_sweep_beamwidth,
    "broadcast-time": cmd_broadcast_time,
    "fec-accuracy": cmd_fec_accuracy,
    "compare-estimators": cmd_compare,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        _ensure_dir(args.out)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IoError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DpltError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
