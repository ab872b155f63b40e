"""Scenario files: one JSON document per scenario.

Layout::

    {
      "plant": {"normalized": {"c": 2.919e-9, "k": 439.3, "x0": 0.01}},
      "control": {"amplitude_fraction": 0.8, "Q": 0.5},
      "run": {"max_time": 10.0, "initial_conditions": [[0.002, 0.0]]},
      "design": {...}, "sweep": {...}, "outputs": {"format": "csv"}
    }

``plant`` holds exactly one of ``normalized`` (per-unit-mass constants) or
``physical`` (C, K, Gamma, m).  A single magnet constant ``c``/``C`` may
replace the pair when the magnets are identical.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .design import damping_from_Q
from .errors import ConfigError
from .model import EPS_SING, PhysicalParams, SystemParams, normalize
from .sim import IntegratorConfig

_TOP_KEYS = {"plant", "design", "control", "run", "sweep", "outputs", "table"}
_RUN_KEYS = {"method", "dt", "rtol", "atol", "max_time", "sample_interval", "initial_conditions", "periods"}


@dataclass
class Scenario:
    params: SystemParams
    run: IntegratorConfig
    initial_conditions: list[tuple[float, float]]
    control: dict = field(default_factory=dict)
    design: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    table: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    run_block: dict = field(default_factory=dict)
    source: str = ""
    text: str = ""

    def where(self, key: str) -> str:
        return locate(self.text, key, self.source)


def locate(text: str, key: str, source: str = "<config>") -> str:
    """``file:line`` of the first occurrence of ``"key"`` in the raw text."""
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    line = text.count("\n", 0, m.start()) + 1 if m else 1
    return f"{source}:{line}"


def _number(block: dict, key: str, where: str, default: Optional[float] = None) -> float:
    if key not in block:
        if default is None:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    val = block[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}: {key!r} must be a number, got {val!r}")
    return float(val)


def _pair(block: dict, single: str, a: str, b: str, where) -> tuple[float, float]:
    if single in block:
        if a in block or b in block:
            raise ConfigError(f"{where(single)}: give either {single!r} or {a!r}/{b!r}, not both")
        v = _number(block, single, where(single))
        return v, v
    return _number(block, a, where(a)), _number(block, b, where(b))


def parse_plant(block: Any, text: str, source: str) -> SystemParams:
    def where(key: str) -> str:
        return locate(text, key, source)

    if not isinstance(block, dict):
        raise ConfigError(f"{where('plant')}: 'plant' must be an object")
    present = [k for k in ("normalized", "physical") if k in block]
    if len(present) != 1:
        raise ConfigError(f"{where('plant')}: 'plant' needs exactly one of 'normalized' or 'physical', found {present}")
    kind = present[0]
    b = block[kind]
    if not isinstance(b, dict):
        raise ConfigError(f"{where(kind)}: {kind!r} must be an object")
    eps = _number(b, "eps_sing", where("eps_sing"), EPS_SING)
    try:
        if kind == "normalized":
            c1, c2 = _pair(b, "c", "c1", "c2", where)
            return SystemParams(
                c1=c1, c2=c2,
                k=_number(b, "k", where("k")),
                gamma=_number(b, "gamma", where("gamma"), 0.0),
                x0=_number(b, "x0", where("x0")),
                alpha=int(_number(b, "alpha", where("alpha"), 4)),
                cs=_number(b, "cs", where("cs"), 0.0),
                eps_sing=eps,
            )
        C1, C2 = _pair(b, "C", "C1", "C2", where)
        pp = PhysicalParams(
            C1=C1, C2=C2,
            K=_number(b, "K", where("K")),
            Gamma=_number(b, "Gamma", where("Gamma"), 0.0),
            m=_number(b, "m", where("m")),
            x0=_number(b, "x0", where("x0")),
            alpha=int(_number(b, "alpha", where("alpha"), 4)),
            Cs=_number(b, "Cs", where("Cs"), 0.0),
        )
        return normalize(pp, eps_sing=eps)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{where(kind)}: {exc}") from exc


def parse_run(block: Any, text: str, source: str) -> tuple[IntegratorConfig, list[tuple[float, float]]]:
    def where(key: str) -> str:
        return locate(text, key, source)

    if not isinstance(block, dict):
        raise ConfigError(f"{where('run')}: 'run' must be an object")
    unknown = set(block) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"{where(sorted(unknown)[0])}: unknown run setting(s) {sorted(unknown)}")
    defaults = IntegratorConfig()
    kwargs = {}
    for key in ("dt", "rtol", "atol", "max_time", "sample_interval"):
        if key in block:
            kwargs[key] = _number(block, key, where(key))
    if "method" in block:
        kwargs["method"] = block["method"]
    try:
        cfg = IntegratorConfig(**{**defaults.__dict__, **kwargs})
    except ValueError as exc:
        raise ConfigError(f"{where('run')}: {exc}") from exc
    ics = []
    for item in block.get("initial_conditions", []):
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or not all(isinstance(z, (int, float)) and not isinstance(z, bool) for z in item)):
            raise ConfigError(f"{where('initial_conditions')}: each initial condition must be [x, v], got {item!r}")
        ics.append((float(item[0]), float(item[1])))
    return cfg, ics


def resolve_gamma(params: SystemParams, control: dict, where) -> SystemParams:
    """Apply a ``Q`` or ``gamma`` override from the control block."""
    if "Q" in control and "gamma" in control:
        raise ConfigError(f"{where('Q')}: give either 'Q' or 'gamma', not both")
    if "Q" in control:
        q = _number(control, "Q", where("Q"))
        if q < 0:
            raise ConfigError(f"{where('Q')}: damping ratio must be non-negative")
        return params.with_(gamma=damping_from_Q(q, params.k))
    if "gamma" in control:
        g = _number(control, "gamma", where("gamma"))
        if g < 0:
            raise ConfigError(f"{where('gamma')}: gamma must be non-negative")
        return params.with_(gamma=g)
    return params


def load_scenario(path: str | Path, require_plant: bool = True) -> Scenario:
    """Parse and validate a scenario file.

    Raises
    ------
    ConfigError
        With a ``file:line`` prefix pointing at the offending entry.
    OSError
        If the file cannot be read.
    """
    path = Path(path)
    text = path.read_text()
    source = str(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{source}:1: scenario must be a JSON object")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{locate(text, key, source)}: unknown section {key!r}")

    if "plant" in doc:
        params = parse_plant(doc["plant"], text, source)
    elif require_plant:
        raise ConfigError(f"{source}:1: missing required section 'plant'")
    else:
        params = None
    cfg, ics = parse_run(doc.get("run", {}), text, source)
    sections = {}
    for key in ("control", "design", "sweep", "table", "outputs"):
        val = doc.get(key, {})
        if not isinstance(val, dict):
            raise ConfigError(f"{locate(text, key, source)}: {key!r} must be an object")
        sections[key] = val
    return Scenario(params=params, run=cfg, initial_conditions=ics, run_block=doc.get("run", {}),
                    source=source, text=text, **sections)
