"""finact command line front end.

    finact <analyze|simulate|freqtable|control|design|sweep> --config PATH --out DIR
           [--format csv|json] [--no-meta]

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .config import Scenario, load_scenario, locate, resolve_gamma
from .control import (PidGains, closed_loop, max_control_force, mean_control_effort, plan_reference,
                      steady_amplitude)
from .design import (EFFECTIVE_MASS, BeamSpec, MagnetSpec, beam_stiffness, damping_from_Q, magnet_constant,
                     solenoid_turns)
from .equilibria import classify, find_fixed_points, sweep_asymmetry
from .errors import ConfigError, FinactError
from .model import PhysicalParams, State, SystemParams, normalize, total_energy
from .sim import Trajectory, integrate
from .spectral import basin_limit, build_frequency_table, default_amplitudes, lookup

log = logging.getLogger("finact")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

TRAJECTORY_HEADER = ("t", "x", "v", "f_control", "current")
DEFAULT_Q_VALUES = (0.0, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5)


class NumericalFailure(FinactError):
    pass


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _plain(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


class Writer:
    def __init__(self, out: Path, fmt: str, meta: bool):
        self.out = out
        self.fmt = fmt
        self.meta = meta
        self.written: list[Path] = []

    def _write(self, name: str, text: str) -> Path:
        path = self.out / name
        with open(path, "w", newline="") as fh:
            fh.write(text)
        self.written.append(path)
        return path

    def json(self, name: str, doc: dict) -> Path:
        doc = dict(_plain(doc))
        if self.meta:
            doc["meta"] = {
                "generator": "finact",
                "version": __version__,
                "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            }
        return self._write(name, json.dumps(doc, indent=2) + "\n")

    def table(self, stem: str, header: Sequence[str], rows: Iterable[Sequence[Any]],
              footer: Sequence[Sequence[Any]] = ()) -> Path:
        rows = list(rows)
        if self.fmt == "json":
            doc = {"columns": list(header), "rows": [[_plain(v) for v in r] for r in rows]}
            if footer:
                doc["events"] = [list(_plain(list(r))) for r in footer]
            return self.json(stem + ".json", doc)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        for r in footer:
            buf.write("#" + ",".join(_fmt(v) for v in r) + "\n")
        return self._write(stem + ".csv", buf.getvalue())


def trajectory_rows(traj: Trajectory):
    return zip(traj.times, traj.x, traj.v, traj.force, traj.current)


def _event_rows(traj: Trajectory):
    return [("event", t, kind) for t, kind in traj.events]


def _params_dict(p: SystemParams) -> dict:
    return {"c1": p.c1, "c2": p.c2, "k": p.k, "gamma": p.gamma, "x0": p.x0, "alpha": p.alpha, "cs": p.cs}


def _where(sc: Scenario):
    return lambda key: locate(sc.text, key, sc.source)


# -- commands ---------------------------------------------------------------

def cmd_analyze(sc: Scenario, w: Writer) -> int:
    rep = find_fixed_points(sc.params)
    doc = {"params": _params_dict(sc.params), **rep.to_dict()}
    if w.fmt == "csv":
        w.table("fixed_points", ("x_star", "kind", "trace", "det"),
                [(fp.x_star, fp.kind, fp.trace, fp.det) for fp in rep.fixed_points])
    w.json("analyze.json", doc)
    return EXIT_OK


def cmd_simulate(sc: Scenario, w: Writer) -> int:
    if not sc.initial_conditions:
        raise ConfigError(f"{sc.where('run')}: simulate needs run.initial_conditions")
    p = resolve_gamma(sc.params, sc.control, _where(sc))
    summary = []
    for i, ic in enumerate(sc.initial_conditions):
        try:
            traj = integrate(p, None, State(*ic), sc.run)
        except ValueError as exc:
            raise ConfigError(f"{sc.where('initial_conditions')}: {exc}") from exc
        w.table(f"trajectory_{i}", TRAJECTORY_HEADER, trajectory_rows(traj), footer=_event_rows(traj))
        entry = {"initial_condition": list(ic), "samples": len(traj), "t_end": float(traj.times[-1]),
                 "events": [{"t": t, "kind": k} for t, k in traj.events]}
        if p.alpha == 4 and not traj.captured:
            e = np.array([total_energy(s, p) for s in traj.states])
            entry["relative_energy_drift"] = float(np.max(np.abs(e - e[0])) / abs(e[0])) if e[0] else None
        summary.append(entry)
    w.json("simulate.json", {"params": _params_dict(p), "runs": summary})
    return EXIT_OK


def _table_amplitudes(sc: Scenario, p: SystemParams):
    if "amplitudes" in sc.table:
        return [float(a) for a in sc.table["amplitudes"]]
    n = int(sc.table.get("n", 32))
    return default_amplitudes(p, n)


def cmd_freqtable(sc: Scenario, w: Writer) -> int:
    p = sc.params
    table = build_frequency_table(p, _table_amplitudes(sc, p))
    w.table("freqtable", ("amplitude", "frequency"), table.entries)
    return EXIT_OK


def _gains(sc: Scenario, p: SystemParams) -> PidGains:
    g = sc.control.get("gains")
    if g is None:
        return PidGains.default(p.k)
    try:
        return PidGains(kp=float(g["kp"]), kd=float(g["kd"]), ki=float(g["ki"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{sc.where('gains')}: gains need numeric kp, kd, ki ({exc})") from exc


def _amplitude(sc: Scenario, p: SystemParams, block: dict, limit: float) -> float:
    if "amplitude" in block:
        A = float(block["amplitude"])
        key = "amplitude"
    else:
        A = float(block.get("amplitude_fraction", 0.8)) * limit
        key = "amplitude_fraction"
    if not 0 < A < limit:
        raise ConfigError(f"{sc.where(key)}: reference amplitude {A!r} m must lie inside the saddle "
                          f"region (0, {limit!r}) m")
    return A


def _reference_table(p: SystemParams, A: float, limit: float):
    # a compact table bracketing A is enough for the lookup
    lo, hi = 0.9 * A, min(1.1 * A, A + 0.5 * (limit - A))
    return build_frequency_table(p, np.linspace(lo, hi, 5))


def _horizon(sc: Scenario, period: float):
    if "max_time" in sc.run_block:
        return sc.run
    periods = float(sc.run_block.get("periods", 10.0))
    return replace(sc.run, max_time=periods * period)


def _run_tracking(sc: Scenario, p: SystemParams, gains: PidGains, A: float, ics, table):
    runs = []
    for ic in ics:
        plan = plan_reference(A, p, State(*ic), table)
        traj = closed_loop(p, gains, plan, State(*ic), _horizon(sc, plan.period))
        if traj.captured:
            raise NumericalFailure(f"closed-loop run from {ic} was captured at t={traj.events[0][0]:.6g} s")
        runs.append((ic, plan, traj))
    return runs


def cmd_control(sc: Scenario, w: Writer) -> int:
    p = resolve_gamma(sc.params, sc.control, _where(sc))
    limit = basin_limit(p)
    A = _amplitude(sc, p, sc.control, limit)
    ics = sc.initial_conditions or [(A, 0.0), (0.5 * A, 0.0), (1.25 * A, 0.0)]
    for ic in ics:
        if not abs(ic[0]) < p.x0 - p.eps_sing:
            raise ConfigError(f"{sc.where('initial_conditions')}: initial displacement {ic[0]!r} outside the magnets")
    table = _reference_table(p, A, limit)
    gains = _gains(sc, p)
    summary = []
    for i, (ic, plan, traj) in enumerate(_run_tracking(sc, p, gains, A, ics, table)):
        w.table(f"control_{i}", TRAJECTORY_HEADER, trajectory_rows(traj), footer=_event_rows(traj))
        fmax, xm = max_control_force(traj)
        summary.append({
            "initial_condition": list(ic),
            "phi": plan.phi,
            "steady_amplitude": steady_amplitude(traj, 2 * plan.period),
            "max_control_force": fmax,
            "x_m": xm,
            "mean_abs_control_force": mean_control_effort(traj),
        })
    w.json("control_summary.json", {
        "params": _params_dict(p),
        "gains": {"kp": gains.kp, "kd": gains.kd, "ki": gains.ki},
        "reference": {"A": A, "frequency": lookup(table, A), "saddle": limit},
        "runs": summary,
    })
    return EXIT_OK


def _spec(cls, block: Any, key: str, sc: Scenario):
    if block is None:
        return cls()
    if not isinstance(block, dict):
        raise ConfigError(f"{sc.where(key)}: {key!r} must be an object")
    try:
        return cls(**{k: float(v) for k, v in block.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{sc.where(key)}: {exc}") from exc


def cmd_design(sc: Scenario, w: Writer) -> int:
    d = sc.design
    magnet = _spec(MagnetSpec, d.get("magnet"), "magnet", sc)
    beam = _spec(BeamSpec, d.get("beam"), "beam", sc)
    sol = d.get("solenoid", {})
    I = float(sol.get("I_max", 20e-3))
    A_turn = float(sol.get("A_turn", math.pi * 5e-3**2))
    m = float(d.get("mass", EFFECTIVE_MASS))
    x0 = float(d.get("x0", 1e-2))
    try:
        C = float(d["C"]) if "C" in d else magnet_constant(magnet)
        K = beam_stiffness(beam)
    except ValueError as exc:
        raise ConfigError(f"{sc.where('beam')}: {exc}") from exc
    p = sc.params if sc.params is not None else normalize(PhysicalParams(C1=C, C2=C, K=K, Gamma=0.0, m=m, x0=x0))
    q_values = [float(q) for q in d.get("Q_values", DEFAULT_Q_VALUES)]
    limit = basin_limit(p.with_(gamma=0.0))
    A = _amplitude(sc, p, d, limit)
    table = _reference_table(p, A, limit)
    rows = []
    for q in q_values:
        pq = p.with_(gamma=damping_from_Q(q, p.k))
        (_, _, traj), = _run_tracking(sc, pq, PidGains.default(p.k), A, [(A, 0.0)], table)
        fmax, xm = max_control_force(traj)
        F_m = fmax * m
        rows.append({"Q": q, "gamma": pq.gamma, "F_max_per_mass": fmax, "F_m": F_m, "x_m": xm,
                     "N": solenoid_turns(F_m, I, magnet, A_turn, xm, p.x0)})
    w.json("design.json", {
        "magnet": {"Br": magnet.Br, "R": magnet.R, "ell": magnet.ell, "C": C},
        "beam": {"E": beam.E, "width": beam.width, "thickness": beam.thickness, "L": beam.L, "y": beam.y, "K": K},
        "mass": m,
        "normalized": _params_dict(p),
        "gamma_range": [0.0, damping_from_Q(max(q_values), p.k)] if q_values else [0.0, 0.0],
        "solenoid": {"I": I, "A_turn": A_turn, "amplitude": A},
        "sweep": rows,
    })
    if w.fmt == "csv" and rows:
        w.table("design_sweep", tuple(rows[0]), [tuple(r.values()) for r in rows])
    return EXIT_OK


def cmd_sweep(sc: Scenario, w: Writer) -> int:
    s = sc.sweep
    kind = s.get("kind", "asymmetry")
    p = sc.params
    if kind == "asymmetry":
        if "delta_c" in s:
            values = [float(v) for v in s["delta_c"]]
        else:
            values = [float(f) * p.c1 for f in s.get("delta_c_fraction", [0.0, 0.05, 0.1, 0.2])]
        try:
            rows = sweep_asymmetry(p, values)
        except ValueError as exc:
            raise ConfigError(f"{sc.where('sweep')}: {exc}") from exc
        w.table("sweep", ("delta_c", "center", "saddle_neg", "saddle_pos"),
                [(r.delta_c, r.center, r.saddle_neg, r.saddle_pos) for r in rows])
    elif kind == "damping":
        rows = []
        base = find_fixed_points(p.with_(gamma=0.0))
        for q in s.get("Q", [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]):
            pq = p.with_(gamma=damping_from_Q(float(q), p.k))
            for fp in base.fixed_points:
                c = classify(fp.x_star, pq)
                rows.append((float(q), pq.gamma, c.x_star, c.kind, c.trace, c.det))
        w.table("sweep", ("Q", "gamma", "x_star", "kind", "trace", "det"), rows)
    else:
        raise ConfigError(f"{sc.where('kind')}: unknown sweep kind {kind!r} (asymmetry|damping)")
    return EXIT_OK


COMMANDS: dict[str, Callable[[Scenario, Writer], int]] = {
    "analyze": cmd_analyze,
    "simulate": cmd_simulate,
    "freqtable": cmd_freqtable,
    "control": cmd_control,
    "design": cmd_design,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="finact", description="Magnetically actuated fin: analysis and design.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--format", choices=("csv", "json"), default=None, help="table format (default csv)")
    ap.add_argument("--no-meta", action="store_true", help="omit the timestamp block from JSON outputs")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        sc = load_scenario(args.config, require_plant=args.command != "design")
    except ConfigError as exc:
        print(f"finact: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"finact: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    fmt = args.format or sc.outputs.get("format", "csv")
    if fmt not in ("csv", "json"):
        print(f"finact: config error: {sc.where('format')}: format must be csv or json", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"finact: cannot create output directory: {exc}", file=sys.stderr)
        return EXIT_IO
    writer = Writer(out, fmt, meta=not args.no_meta)
    try:
        code = COMMANDS[args.command](sc, writer)
    except ConfigError as exc:
        print(f"finact: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FinactError, ArithmeticError) as exc:
        print(f"finact: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"finact: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in writer.written:
        log.info("wrote %s", path)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
