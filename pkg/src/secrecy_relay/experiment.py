"""Experiment configuration, sweeps and deterministic file output.

A run is described by one JSON document (see :data:`CONFIG_SCHEMA`).
Missing fields take the values in :data:`DEFAULTS`; the merged document is
what ``--print-config`` shows and what the config hash covers.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import awgn, dmc
from ._version import __version__
from .channels import ChannelGains, PhaseModel, RelayDmc, Topology, gains_from_topology
from .channels import is_reversely_degraded, sample_phases
from .errors import SecrecyRelayError, ValidationError
from .optimize import DEFAULT_BUDGET

__all__ = [
    "CONFIG_SCHEMA",
    "DEFAULTS",
    "ExperimentConfig",
    "SweepTable",
    "load_config",
    "run",
    "run_awgn_rate",
    "run_awgn_sweep",
    "run_fading_sweep",
    "run_dmc",
    "emit",
    "emit_report",
    "read_csv",
    "row_seed",
    "x_values",
    "bundled_path",
    "write_output",
]

AWGN_STRATEGIES = ("wiretap", "df", "nf", "cf", "af", "deaf_nf")
MC_STRATEGIES = ("df", "af")
MODES = ("awgn-rate", "awgn-sweep", "awgn-fading-sweep", "dmc-point", "dmc-search")
SIG_DIGITS = 12

_point = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_gain = {"oneOf": [{"type": "number"}, _point]}
_search = {
    "type": "object",
    "properties": {
        "resolution": {"type": "integer", "minimum": 2},
        "levels": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
_pmf = {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["mode"],
    "additionalProperties": False,
    "properties": {
        "mode": {"enum": list(MODES)},
        "topology": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "source": _point,
                "destination": _point,
                "eavesdropper": _point,
                "relay": _point,
                "gamma": {"type": "number", "exclusiveMinimum": 1},
                "phase_model": {"enum": [m.value for m in PhaseModel]},
                "d_min": {"type": "number", "exclusiveMinimum": 0},
                "clamp": {"type": "boolean"},
            },
        },
        "gains": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["h_sd", "h_sw", "h_sr", "h_rd", "h_rw"],
                    "additionalProperties": False,
                    "properties": {k: _gain for k in ("h_sd", "h_sw", "h_sr", "h_rd", "h_rw")},
                },
            ]
        },
        "powers": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p1": {"type": "number", "minimum": 0},
                "p2": {"type": "number", "minimum": 0},
            },
        },
        "strategies": {
            "type": "array",
            "items": {"enum": list(AWGN_STRATEGIES)},
            "minItems": 1,
            "uniqueItems": True,
        },
        "x_grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "step": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "mc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "draws": {"type": "integer", "minimum": 2},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "zero_phase": {"type": "boolean"},
            },
        },
        "optimizer": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "budget": {"type": "integer", "minimum": 1},
                "df": _search,
                "af": _search,
                "outer": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "rho_step": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                        "levels": {"type": "integer", "minimum": 1},
                    },
                },
            },
        },
        "dmc": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "channel": {"type": ["string", "null"]},
                "k": {"type": "integer", "minimum": 1},
                "strategies": {
                    "type": "array",
                    "items": {"enum": list(dmc.GRID_STRATEGIES)},
                    "minItems": 1,
                    "uniqueItems": True,
                },
                "yq_size": {"type": ["integer", "null"], "minimum": 1},
                "design": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "px1": _pmf,
                        "px2": _pmf,
                        "joint": {"type": "array", "items": _pmf},
                        "quantizer": {"type": "array"},
                        "r0": {"oneOf": [{"type": "number", "minimum": 0}, {"const": "max"}]},
                    },
                },
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "path": {"type": ["string", "null"]},
                "format": {"enum": ["csv", "json"]},
            },
        },
    },
}

DEFAULTS = {
    "topology": {
        "source": [0.0, 0.0],
        "destination": [1.0, 0.0],
        "eavesdropper": [0.0, 1.0],
        "relay": [0.5, 0.0],
        "gamma": 2.0,
        "phase_model": "real",
        "d_min": 1e-6,
        "clamp": True,
    },
    "gains": None,
    "powers": {"p1": 1.0, "p2": 8.0},
    "strategies": list(AWGN_STRATEGIES),
    "x_grid": {"start": 0.0, "stop": 1.8, "step": 0.05},
    "mc": {"draws": 1000, "seed": 0, "zero_phase": False},
    "optimizer": {
        "budget": DEFAULT_BUDGET,
        "df": {"resolution": awgn.DF_SETTINGS.resolution, "levels": awgn.DF_SETTINGS.levels},
        "af": {"resolution": awgn.AF_SETTINGS.resolution, "levels": awgn.AF_SETTINGS.levels},
        "outer": {"rho_step": 0.01, "levels": awgn.OUTER_SETTINGS.levels},
    },
    "dmc": {
        "channel": None,
        "k": 10,
        "strategies": ["outer", "df", "nf", "deaf_nf"],
        "yq_size": None,
        "design": {},
    },
    "output": {"path": None, "format": "csv"},
}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k != "design":
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _schema_error(err: jsonschema.ValidationError) -> ValidationError:
    where = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return ValidationError(f"config field {where}: {err.message}")


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved, validated configuration document."""

    doc: dict
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, raw: dict, base_dir=".") -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object")
        # validate the raw document first so unknown keys are reported as typed
        validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
        err = jsonschema.exceptions.best_match(validator.iter_errors(raw))
        if err is not None:
            raise _schema_error(err)
        doc = _merge(DEFAULTS, raw)
        err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
        if err is not None:
            raise _schema_error(err)
        g = doc["x_grid"]
        if g["stop"] < g["start"]:
            raise ValidationError("config field x_grid: stop must not be below start")
        if doc["mode"] == "awgn-fading-sweep":
            if doc["topology"]["phase_model"] != PhaseModel.UNIFORM_PHASE.value:
                raise ValidationError(
                    "config field topology/phase_model: fading sweeps need 'uniform-phase'"
                )
            if doc["gains"] is not None:
                raise ValidationError("config field gains: fading sweeps are driven by the topology")
        if doc["mode"].startswith("dmc") and not doc["dmc"]["channel"]:
            raise ValidationError("config field dmc/channel: a channel file is required")
        return cls(doc, Path(base_dir))

    def with_overrides(self, **fields) -> "ExperimentConfig":
        """Apply CLI-style overrides (``seed``, ``out``, ``fmt``, ``strategies``)."""
        raw = copy.deepcopy(self.doc)
        if fields.get("seed") is not None:
            raw["mc"]["seed"] = int(fields["seed"])
        if fields.get("out") is not None:
            raw["output"]["path"] = str(fields["out"])
        if fields.get("fmt") is not None:
            raw["output"]["format"] = fields["fmt"]
        if fields.get("strategies") is not None:
            key = ("dmc", "strategies") if raw["mode"].startswith("dmc") else ("strategies",)
            target = raw
            for k in key[:-1]:
                target = target[k]
            target[key[-1]] = list(fields["strategies"])
        return ExperimentConfig.from_dict(raw, self.base_dir)

    @property
    def mode(self) -> str:
        return self.doc["mode"]

    @property
    def seed(self) -> int:
        return int(self.doc["mc"]["seed"])

    def canonical_json(self) -> str:
        return json.dumps(self.doc, sort_keys=True, indent=2) + "\n"

    def config_hash(self) -> str:
        """SHA-256 over every field except ``output``."""
        semantic = {k: v for k, v in self.doc.items() if k != "output"}
        blob = json.dumps(semantic, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def topology(self) -> Topology:
        t = self.doc["topology"]
        return Topology(
            source=tuple(t["source"]),
            destination=tuple(t["destination"]),
            eavesdropper=tuple(t["eavesdropper"]),
            relay=tuple(t["relay"]),
            gamma=t["gamma"],
            phase_model=t["phase_model"],
            d_min=t["d_min"],
            clamp=t["clamp"],
        )

    def powers(self) -> tuple:
        return float(self.doc["powers"]["p1"]), float(self.doc["powers"]["p2"])

    def explicit_gains(self) -> ChannelGains | None:
        g = self.doc["gains"]
        if g is None:
            return None
        vals = {k: complex(*v) if isinstance(v, list) else complex(v) for k, v in g.items()}
        p1, p2 = self.powers()
        return ChannelGains(**vals, p1=p1, p2=p2)

    def search_settings(self) -> dict:
        o = self.doc["optimizer"]
        return {
            "df": awgn.SearchSettings(o["df"]["resolution"], o["df"]["levels"], o["budget"]),
            "af": awgn.SearchSettings(o["af"]["resolution"], o["af"]["levels"], o["budget"]),
            "outer": awgn.SearchSettings(
                awgn.OUTER_SETTINGS.resolution, o["outer"]["levels"], o["budget"]
            ),
        }

    def rho_step(self) -> float:
        return float(self.doc["optimizer"]["outer"]["rho_step"])

    def metadata(self) -> dict:
        return {
            "tool": "secrecy-relay",
            "version": __version__,
            "mode": self.mode,
            "config_hash": self.config_hash(),
            "seed": self.seed,
        }


def bundled_path(name: str) -> Path:
    """Path of a data file shipped inside the package."""
    p = resources.files("secrecy_relay").joinpath("data", name)
    if not p.is_file():
        raise ValidationError(f"no bundled file named {name!r}")
    return Path(str(p))


def load_config(path) -> ExperimentConfig:
    """Read a config file; ``bundled:<name>`` selects a shipped one."""
    path = str(path)
    if path.startswith("bundled:"):
        p = bundled_path(path[len("bundled:"):])
    else:
        p = Path(path)
    text = p.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return ExperimentConfig.from_dict(raw, p.parent)


# --- sweep tables ------------------------------------------------------------


@dataclass
class SweepTable:
    """Rows ordered by ``x``; ``None`` marks a cell whose evaluation failed."""

    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    details: list | None = None

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def x_values(grid: dict) -> list:
    """Grid points ``start + i * step`` up to ``stop`` (inclusive, 1e-9 slack)."""
    start, stop, step = float(grid["start"]), float(grid["stop"]), float(grid["step"])
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [float(f"{start + i * step:.12g}") for i in range(n)]


def row_seed(seed: int, index: int) -> int:
    """64-bit key for row ``index``; depends only on ``(seed, index)``."""
    state = np.random.SeedSequence([int(seed), int(index)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def _threads() -> int:
    return awgn.default_threads()


def _ordered_map(fn, items) -> list:
    n = _threads()
    if n > 1 and len(items) > 1:
        with ThreadPoolExecutor(n) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _columns(strategies, ci: tuple = ()) -> list:
    chosen = [s for s in AWGN_STRATEGIES if s in strategies]
    return ["x"] + chosen + ["outer"] + [f"{s}_ci" for s in ci]


def _safe(flags: list, x, column: str, fn):
    try:
        return fn()
    except SecrecyRelayError as exc:
        flags.append({"x": x, "column": column, "error": f"{type(exc).__name__}: {exc}"})
        return None


def _awgn_row(cfg: ExperimentConfig, x, g: ChannelGains, keep_details: bool = False):
    settings = cfg.search_settings()
    flags, details = [], {}
    cells = []
    for s in _columns(cfg.doc["strategies"])[1:]:
        if s == "outer":
            fn = lambda: awgn.outer_bound_gaussian(g, cfg.rho_step(), settings["outer"])  # noqa: E731
        else:
            fn = lambda s=s: awgn.evaluate(s, g, settings)  # noqa: E731
        r = _safe(flags, x, s, fn)
        cells.append(None if r is None else r.rate)
        if r is not None and keep_details:
            details[s] = r.to_dict()
    return [x] + cells, flags, details


def _table(cfg: ExperimentConfig, columns, results, keep_details=False) -> SweepTable:
    rows, flags, details = [], [], []
    for row, f, d in results:
        rows.append(row)
        flags.extend(f)
        details.append(d)
    return SweepTable(columns, rows, cfg.metadata(), flags, details if keep_details else None)


def run_awgn_sweep(cfg: ExperimentConfig) -> SweepTable:
    """Deterministic rates and the outer bound at every relay position."""
    t = cfg.topology()
    t = replace(t, phase_model=PhaseModel.REAL)
    p1, p2 = cfg.powers()
    y = t.relay[1]

    def one(x):
        return _awgn_row(cfg, x, gains_from_topology(t.with_relay(x, y), p1=p1, p2=p2))

    xs = x_values(cfg.doc["x_grid"])
    return _table(cfg, _columns(cfg.doc["strategies"]), _ordered_map(one, xs))


def run_awgn_rate(cfg: ExperimentConfig) -> SweepTable:
    """All requested rates at one operating point, with full details.

    Uses ``gains`` when given (``x`` is then left empty), otherwise the
    topology with the relay where the config puts it.
    """
    g = cfg.explicit_gains()
    x = None
    if g is None:
        t = cfg.topology()
        p1, p2 = cfg.powers()
        g = gains_from_topology(replace(t, phase_model=PhaseModel.REAL), p1=p1, p2=p2)
        x = t.relay[0]
    result = _awgn_row(cfg, x, g, keep_details=True)
    return _table(cfg, _columns(cfg.doc["strategies"]), [result], keep_details=True)


def run_fading_sweep(cfg: ExperimentConfig) -> SweepTable:
    """Monte-Carlo sweep over random eavesdropper phases.

    DF and AF (and the outer bound) are averaged over ``mc.draws`` phase
    draws, each optimized separately; the phase-invariant columns are
    computed once from the magnitudes.  Row ``i`` draws its phases from
    :func:`row_seed` so rows can run in any order.
    """
    t = cfg.topology()
    p1, p2 = cfg.powers()
    y = t.relay[1]
    n = int(cfg.doc["mc"]["draws"])
    strategies = cfg.doc["strategies"]
    mc_cols = tuple(s for s in MC_STRATEGIES if s in strategies)
    columns = _columns(strategies, mc_cols)
    settings = cfg.search_settings()

    def one(item):
        i, x = item
        template = gains_from_topology(t.with_relay(x, y), p1=p1, p2=p2)
        if cfg.doc["mc"]["zero_phase"]:
            phases = np.zeros((n, 2))
        else:
            phases = sample_phases(row_seed(cfg.seed, i), n)
        flags, cells, ci = [], [], []
        for s in columns[1:]:
            if s.endswith("_ci"):
                continue
            if s in mc_cols or s == "outer":
                r = _safe(flags, x, s, lambda s=s: awgn.mc_phase_average(
                    s, template, n, cfg.seed, settings[s], topology=t, phases=phases, threads=1,
                ))
                if s in mc_cols:
                    ci.append(None if r is None else r.half_width)
            else:
                r = _safe(flags, x, s, lambda s=s: awgn.evaluate(s, template, settings))
            cells.append(None if r is None else r.rate)
        return [x] + cells + ci, flags, {}

    xs = x_values(cfg.doc["x_grid"])
    return _table(cfg, columns, _ordered_map(one, list(enumerate(xs))))


# --- DMC -------------------------------------------------------------------------


def _load_channel(cfg: ExperimentConfig) -> RelayDmc:
    name = cfg.doc["dmc"]["channel"]
    if name.startswith("bundled:"):
        path = bundled_path(name[len("bundled:"):])
    else:
        path = Path(name)
        if not path.is_absolute():
            path = cfg.base_dir / path
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return RelayDmc.from_json(doc)


def _point_design(c: RelayDmc, strategy: str, spec: dict):
    n1, n2, _, n_y1, _ = c.transition.shape
    px1 = np.asarray(spec.get("px1", np.full(n1, 1.0 / n1)), float)
    px2 = np.asarray(spec.get("px2", np.full(n2, 1.0 / n2)), float)
    if strategy == "cf":
        q = spec.get("quantizer")
        if q is None:
            q = np.einsum("ab,c->acb", np.eye(n_y1), np.ones(n2))
        d = dmc.CfDesign(px1, px2, q)
        r0 = spec.get("r0", "max")
        r0 = dmc.cf_max_r0(c, d) if r0 == "max" else float(r0)
        return dmc.CfDesign(px1, px2, d.quantizer, r0)
    if strategy in ("df", "outer"):
        joint = spec.get("joint")
        d = dmc.InputDesign.joint(np.outer(px1, px2) if joint is None else joint)
        return d.with_constant_u() if strategy == "outer" else d
    return dmc.InputDesign.product(px1, px2)


_POINT_EVAL = {
    "outer": dmc.outer_bound_point,
    "df": dmc.df_point,
    "nf": dmc.nf_point,
    "cf": dmc.cf_point,
    "deaf_nf": dmc.deaf_nf_point,
    "reversely_degraded": dmc.reversely_degraded_rate,
}


def run_dmc(cfg: ExperimentConfig) -> dict:
    """Evaluate (``dmc-point``) or grid-search (``dmc-search``) each strategy."""
    c = _load_channel(cfg)
    opts = cfg.doc["dmc"]
    check = is_reversely_degraded(c)
    results = []
    for s in opts["strategies"]:
        if cfg.mode == "dmc-point":
            design = _point_design(c, s, opts["design"])
            point = _POINT_EVAL[s](c, design)
        else:
            point, design = dmc.best_over_grid(
                c, s, opts["k"], cfg.doc["optimizer"]["budget"], opts["yq_size"],
                threads=_threads(),
            )
        entry = {"strategy": s, **point.to_dict()}
        entry["design"] = None if design is None else design.to_dict()
        results.append(entry)
    return {
        "metadata": cfg.metadata(),
        "channel": {
            "sizes": c.sizes,
            "reversely_degraded": check.degraded,
            "degradedness_violation": check.violation,
        },
        "results": results,
    }


def run(cfg: ExperimentConfig):
    """Dispatch on ``cfg.mode``; returns a :class:`SweepTable` or a report dict."""
    return {
        "awgn-rate": run_awgn_rate,
        "awgn-sweep": run_awgn_sweep,
        "awgn-fading-sweep": run_fading_sweep,
        "dmc-point": run_dmc,
        "dmc-search": run_dmc,
    }[cfg.mode](cfg)


# --- emission ----------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    if v == 0.0:
        v = 0.0  # no "-0"
    return f"{v:.{SIG_DIGITS}g}"


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float) or isinstance(obj, np.floating):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(_fmt(v))
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_round(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _json_bytes(doc) -> bytes:
    return (json.dumps(_round(doc), indent=2, allow_nan=False) + "\n").encode()


def emit(table: SweepTable, fmt: str = "csv") -> bytes:
    """Serialize a table; identical tables give identical bytes."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue().encode()
    if fmt == "json":
        doc = {
            "metadata": table.metadata,
            "columns": table.columns,
            "rows": [dict(zip(table.columns, row)) for row in table.rows],
            "flags": table.flags,
        }
        if table.details is not None:
            doc["details"] = table.details
        return _json_bytes(doc)
    raise ValidationError(f"unknown output format {fmt!r}")


def emit_report(report: dict, fmt: str = "json") -> bytes:
    """Serialize a :func:`run_dmc` report."""
    if fmt == "json":
        return _json_bytes(report)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("strategy,r1_max,re_max,feasible,applicable\n")
        for r in report["results"]:
            buf.write(
                f"{r['strategy']},{_fmt(r['r1_max'])},{_fmt(r['re_max'])},"
                f"{str(r['feasible']).lower()},{str(r['applicable']).lower()}\n"
            )
        return buf.getvalue().encode()
    raise ValidationError(f"unknown output format {fmt!r}")


def read_csv(data: bytes) -> SweepTable:
    """Parse bytes written by :func:`emit`; empty cells come back as ``None``."""
    reader = csv.reader(io.StringIO(data.decode()))
    columns = next(reader)
    rows = [[float(v) if v != "" else None for v in line] for line in reader]
    return SweepTable(columns, rows)


def write_output(data: bytes, path) -> None:
    """Write ``data`` to ``path`` atomically (temp file plus rename)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
