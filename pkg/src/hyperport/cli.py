"""Command-line front end.

Subcommands: teleport, bsm-table, hom, cascade, budget. Settings come from an
optional YAML file (``--config``) and are overridden by flags.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field, fields, replace
from typing import Any, Sequence

import numpy as np
import yaml

from . import cascade as cas
from .conformance import bs_conformance, pbs_conformance
from .errors import ZeroState
from .protocol import (
    COHERENCE_TIME_FS,
    INTERFEROMETERS,
    NoiseParams,
    calibrated_noise,
    error_budget_eval,
    hom_scan,
    overlap_for_visibility,
    run_teleportation,
    run_teleportation_per_outcome,
)
from .sources import INPUT_IDS, HyperBellLabel

SCHEMA_VERSION = 1
FORMATS = ("json", "csv", "table")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors exit with 1, matching config errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class ScenarioConfig:
    states: list = field(default_factory=lambda: ["A"])
    preset: str = "ideal"  # ideal | calibrated | calibrated-hom
    noise: dict = field(default_factory=dict)
    per_outcome: bool = False
    outcome: str | None = None
    shots: int = 0
    interferometer: str = "BS1"
    tau_fs: float = COHERENCE_TIME_FS
    max_overlap: float = 1.0
    delays: list = field(default_factory=lambda: [float(d) for d in range(-1500, 1501, 100)])
    target_visibility: float | None = None
    n: int = 3
    amplitude_check: bool = False
    format: str = "table"
    seed: int = 0

    def noise_params(self) -> NoiseParams:
        if self.preset == "ideal":
            base = NoiseParams()
        elif self.preset == "calibrated":
            base = calibrated_noise("budget")
        elif self.preset == "calibrated-hom":
            base = calibrated_noise("hom")
        else:
            raise ConfigError(f"preset: unknown value {self.preset!r}")
        allowed = {f.name for f in fields(NoiseParams)}
        unknown = set(self.noise) - allowed
        if unknown:
            raise ConfigError(f"noise: unknown field(s) {sorted(unknown)}")
        try:
            return replace(base, **self.noise)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"noise: {exc}") from None


def _key_lines(text: str) -> dict[str, int]:
    """Line number of every top-level key in a YAML mapping."""
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def load_config(path: str) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" line {mark.line + 1}" if mark else ""
        raise ConfigError(f"{path}:{where} invalid YAML") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    lines = _key_lines(text)
    allowed = {f.name for f in fields(ScenarioConfig)} | {"state", "all"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"{path}: line {lines.get(key, '?')}: unknown field {key!r}")
    types = {
        "n": int, "shots": int, "seed": int,
        "tau_fs": float, "max_overlap": float, "target_visibility": float,
    }
    for key, kind in types.items():
        if key not in data or (key == "target_visibility" and data[key] is None):
            continue
        value = data[key]
        ok = isinstance(value, int) if kind is int else isinstance(value, (int, float))
        if not ok or isinstance(value, bool):
            raise ConfigError(f"{path}: line {lines.get(key, '?')}: field {key!r} must be {kind.__name__}")
    if "noise" in data and not isinstance(data["noise"], dict):
        raise ConfigError(f"{path}: line {lines.get('noise', '?')}: field 'noise' must be a mapping")
    if "delays" in data:
        data["delays"] = _parse_delays(data["delays"], f"{path}: line {lines.get('delays', '?')}")
    return data


def _parse_delays(value, where: str) -> list[float]:
    if isinstance(value, dict):
        try:
            start, stop, step = (float(value[k]) for k in ("start", "stop", "step"))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"{where}: delays needs numeric start, stop and step") from None
        if step <= 0:
            raise ConfigError(f"{where}: delay step must be positive")
        count = int(round((stop - start) / step)) + 1
        return [start + i * step for i in range(count)]
    if isinstance(value, str):
        parts = value.split(",")
        if len(parts) != 3:
            raise ConfigError(f"{where}: delays must be 'start,stop,step'")
        try:
            return _parse_delays(dict(zip(("start", "stop", "step"), map(float, parts))), where)
        except ValueError:
            raise ConfigError(f"{where}: delays must be numeric") from None
    if isinstance(value, list) and all(isinstance(v, (int, float)) for v in value):
        return [float(v) for v in value]
    raise ConfigError(f"{where}: delays must be a list or a start/stop/step mapping")


def build_config(args: argparse.Namespace) -> ScenarioConfig:
    data = load_config(args.config) if args.config else {}
    if "state" in data:
        data["states"] = [data.pop("state")]
    if data.pop("all", False):
        data["states"] = list(INPUT_IDS)
    cfg = ScenarioConfig(**data)
    cfg.noise = dict(cfg.noise)

    if getattr(args, "all", False):
        cfg.states = list(INPUT_IDS)
    elif getattr(args, "state", None):
        cfg.states = [s.upper() for s in args.state]
    if getattr(args, "ideal", False):
        cfg.preset, cfg.noise = "ideal", {}
    if getattr(args, "preset", None):
        cfg.preset = args.preset
    for flag, key in (
        ("background", "background"),
        ("overlap_pbs", "overlap_pbs"),
        ("overlap_bs1", "overlap_bs1"),
        ("overlap_bs2", "overlap_bs2"),
        ("pair23_fidelity", "pair23_fidelity"),
        ("pair45_fidelity", "pair45_fidelity"),
        ("input_fidelity", "input_state_fidelity"),
        ("oam_leakage", "oam_leakage"),
    ):
        value = getattr(args, flag, None)
        if value is not None:
            cfg.noise[key] = value
    if getattr(args, "lossy", False):
        cfg.noise["lossy_elements"] = True
    for name in ("per_outcome", "amplitude_check"):
        if getattr(args, name, False):
            setattr(cfg, name, True)
    for name in ("outcome", "shots", "interferometer", "tau_fs", "max_overlap", "target_visibility", "n", "format", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "delays", None):
        cfg.delays = _parse_delays(args.delays, "--delays")

    bad = [s for s in cfg.states if s not in INPUT_IDS]
    if bad:
        raise ConfigError(f"states: unknown input state(s) {bad}; expected {list(INPUT_IDS)}")
    if cfg.format not in FORMATS:
        raise ConfigError(f"format: must be one of {list(FORMATS)}")
    cfg.interferometer = str(cfg.interferometer).upper()
    if cfg.interferometer not in INTERFEROMETERS:
        raise ConfigError(f"interferometer: must be one of {list(INTERFEROMETERS)}")
    if cfg.shots < 0:
        raise ConfigError("shots: must be non-negative")
    return cfg


# ---------------------------------------------------------------------------
# rendering


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    if value is None:
        return "-"
    return str(value)


def render(command: str, columns: list[str], rows: list[dict], fmt: str, extra: dict | None = None,
           summary: str | None = None) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": command, "records": rows}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in columns})
        return buf.getvalue()
    cells = [[_fmt(row.get(k)) for k in columns] for row in rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in cells]
    if summary:
        lines += ["", summary]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _sample(rng: np.random.Generator, shots: int, records: list[dict], rhos: list) -> None:
    """Illustrative counts: heralded events, then photon-3 outcomes in the computational basis."""
    probs = [r["success_probability"] for r in records]
    rest = max(0.0, 1.0 - sum(probs))
    counts = rng.multinomial(shots, probs + [rest])
    for record, n, rho in zip(records, counts, rhos):
        diag = np.clip(np.real(np.diag(rho.rho)), 0, None)
        record["heralded_counts"] = int(n)
        record["basis_counts"] = [int(c) for c in rng.multinomial(int(n), diag / diag.sum())]


def cmd_teleport(cfg: ScenarioConfig) -> str:
    noise = cfg.noise_params()
    outcome = None
    if cfg.outcome:
        try:
            outcome = HyperBellLabel.parse(cfg.outcome)
        except ValueError as exc:
            raise ConfigError(f"outcome: {exc}") from None
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for sid in cfg.states:
        if cfg.per_outcome:
            reports = run_teleportation_per_outcome(sid, noise)
        else:
            reports = [run_teleportation(sid, noise, outcome)]
        records = []
        for rep in reports:
            xx, yy, zz = rep.pauli_expectations
            records.append({
                "state": sid,
                "outcome": "all" if rep.outcome is None else rep.outcome.key,
                "success_probability": rep.success_probability,
                "fidelity": rep.fidelity,
                "xx": xx,
                "yy": yy,
                "zz": zz,
            })
        if cfg.shots:
            _sample(rng, cfg.shots, records, [r.rho for r in reports])
        rows += records
    columns = ["state", "outcome", "success_probability", "fidelity", "xx", "yy", "zz"]
    if cfg.shots:
        columns += ["heralded_counts", "basis_counts"]
    extra = {"noise": noise.to_dict(), "seed": cfg.seed, "shots": cfg.shots}
    return render("teleport", columns, rows, cfg.format, extra)


def cmd_bsm_table(cfg: ScenarioConfig) -> str:
    rows = []
    for table, results in (("PBS", pbs_conformance()), ("BS", bs_conformance())):
        for r in results:
            rows.append({
                "element": table,
                "input": r.label,
                "coincidence": r.coincidence_probability > 1e-12,
                "coincidence_probability": r.coincidence_probability,
                "overlap": r.overlap,
                "status": r.status,
            })
    columns = ["element", "input", "coincidence", "coincidence_probability", "overlap", "status"]
    ok = all(r["status"] == "MATCH" for r in rows)
    return render("bsm-table", columns, rows, cfg.format, {"all_match": ok},
                  summary=f"{sum(r['status'] == 'MATCH' for r in rows)}/{len(rows)} rows MATCH")


def cmd_hom(cfg: ScenarioConfig) -> str:
    scan = hom_scan(cfg.interferometer, cfg.delays, cfg.tau_fs, cfg.max_overlap)
    rows = [
        {"delay_fs": d, "coincidence": c, "reference": r}
        for d, c, r in zip(scan.delays, scan.coincidences, scan.reference)
    ]
    extra = {"interferometer": scan.interferometer, "visibility": scan.visibility,
             "formula": scan.formula, "tau_fs": cfg.tau_fs, "max_overlap": cfg.max_overlap}
    summary = f"{scan.interferometer} visibility {scan.visibility:.6f} ({scan.formula})"
    if cfg.target_visibility is not None:
        x = overlap_for_visibility(scan.interferometer, cfg.target_visibility)
        extra["overlap_for_target"] = x
        summary += f"; overlap for V={cfg.target_visibility}: {x:.6f}"
    return render("hom", ["delay_fs", "coincidence", "reference"], rows, cfg.format, extra, summary)


def cmd_cascade(cfg: ScenarioConfig) -> str:
    if not 1 <= cfg.n <= cas.MAX_DOFS:
        raise ConfigError(f"cascade too large: N={cfg.n}, allowed 1..{cas.MAX_DOFS}")
    stages = cas.run_cascade(cfg.n)
    rows = []
    for i, s in enumerate(stages):
        rows.append({
            "stage": i,
            "kind": s.kind,
            "dof": s.dof,
            "preserved": list(s.preserved) if s.kind == "QND" else None,
            "survivors": len(s.survivors_out),
            "members": [list(v) for v in s.survivors_out] if len(s.survivors_out) <= 64 else None,
        })
    counts = cas.stage_counts(stages)
    chain = " → ".join(str(c) for c in counts)
    extra = {"n": cfg.n, "counts": counts, "chain": chain,
             "final": [list(v) for v in cas.final_survivors(stages)]}
    if cfg.amplitude_check:
        rep = cas.amplitude_check(cfg.n)
        extra["amplitude_counts"] = rep.amplitude_counts
        chain += f"  (amplitude check: {' → '.join(map(str, rep.amplitude_counts))})"
    final = ", ".join("(" + ",".join(v) + ")" for v in cas.final_survivors(stages))
    return render("cascade", ["stage", "kind", "dof", "survivors"], rows, cfg.format, extra,
                  summary=f"{chain}\nfinal: {final}")


def cmd_budget(cfg: ScenarioConfig) -> str:
    noise = cfg.noise_params()
    reports = error_budget_eval(noise)
    rows = [
        {"state": sid, "success_probability": r.success_probability, "fidelity": r.fidelity,
         "above_classical": r.fidelity > 0.40}
        for sid, r in reports.items()
    ]
    e = reports["E"].fidelity
    return render("budget", ["state", "success_probability", "fidelity", "above_classical"], rows,
                  cfg.format, {"noise": noise.to_dict(), "entangled_E": e > 0.5},
                  summary=f"E above entanglement threshold 0.5: {'yes' if e > 0.5 else 'no'}")


COMMANDS = {
    "teleport": cmd_teleport,
    "bsm-table": cmd_bsm_table,
    "hom": cmd_hom,
    "cascade": cmd_cascade,
    "budget": cmd_budget,
}


def _noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ideal", action="store_true", help="ideal settings; drops file noise")
    p.add_argument("--preset", choices=["ideal", "calibrated", "calibrated-hom"])
    p.add_argument("--background", type=float, metavar="B")
    p.add_argument("--overlap-pbs", type=float, metavar="X")
    p.add_argument("--overlap-bs1", type=float, metavar="X")
    p.add_argument("--overlap-bs2", type=float, metavar="X")
    p.add_argument("--pair23-fidelity", type=float, metavar="F")
    p.add_argument("--pair45-fidelity", type=float, metavar="F")
    p.add_argument("--input-fidelity", type=float, metavar="F")
    p.add_argument("--oam-leakage", type=float, metavar="E")
    p.add_argument("--lossy", action="store_true", help="finite SPP and sorter efficiencies")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML scenario file; flags override it")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="write the report here instead of stdout")

    parser = _Parser(prog="hyperport", description="Multi-DoF teleportation simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("teleport", parents=[common], help="run the six-photon teleportation")
    p.add_argument("--state", action="append", choices=list(INPUT_IDS) + [s.lower() for s in INPUT_IDS])
    p.add_argument("--all", action="store_true", help="all five input states")
    p.add_argument("--per-outcome", action="store_true")
    p.add_argument("--outcome", metavar="SAM,OAM", help="keep one heralded label, e.g. phi-,omega+")
    p.add_argument("--shots", type=int, help="add seeded illustrative counts")
    _noise_flags(p)

    sub.add_parser("bsm-table", parents=[common], help="PBS and BS conformance tables")

    p = sub.add_parser("hom", parents=[common], help="HOM delay scan")
    p.add_argument("--interferometer", type=str.upper, choices=INTERFEROMETERS)
    p.add_argument("--tau", dest="tau_fs", type=float, help="coherence time in fs")
    p.add_argument("--max-overlap", type=float)
    p.add_argument("--delays", help="start,stop,step in fs")
    p.add_argument("--target-visibility", type=float)

    p = sub.add_parser("cascade", parents=[common], help="N-DoF cascade survivor counts")
    p.add_argument("--n", type=int)
    p.add_argument("--amplitude-check", action="store_true")

    p = sub.add_parser("budget", parents=[common], help="fidelity of all five states under one noise setting")
    _noise_flags(p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        text = COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"hyperport: config error: {exc}", file=sys.stderr)
        return 1
    except ZeroState as exc:
        print(f"hyperport: degenerate scenario: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"hyperport: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
