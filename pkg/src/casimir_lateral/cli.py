"""Command-line front end: ``casimir-lateral <command> --config <path>``.

Commands
--------
eval         one configuration, one row
sweep        table over ``lambda_c / z0``
delta-sweep  the same table, meant for tilted particles where delta varies
transition   root of ``V_sum`` with its certified bracket

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
numerical failures (including sweeps in which some rows failed).
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Any

import yaml

from .lateral_energy import Geometry
from .materials import material_from_dict
from .polarizability import ParticleModel
from .quadrature import ConvergenceError, QuadratureConfig
from .regimes import (
    MODES,
    SWEEP_RANGE,
    BracketError,
    SweepRow,
    ToleranceFloorError,
    find_transition,
    report,
    evaluate,
    sweep,
)

log = logging.getLogger("casimir_lateral")

COLUMNS = ("lambda_c_over_z0", "v_xx_norm", "v_yy_norm", "v_zz_norm", "v_xz_norm",
           "v_sum_norm", "A_norm", "delta_rad", "regime")
TRANSITION_COLUMNS = ("root_lambda_c_over_z0", "bracket_lo", "bracket_hi", "sign_lo", "sign_hi",
                      "evaluations")
COMMANDS = ("eval", "sweep", "transition", "delta-sweep")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2

# defaults applied to a parsed document; None marks a required key
_SCHEMA: dict[str, Any] = {
    "particle": {
        "r": None,
        "volume_nm3": 1000.0,
        "theta_deg": 90.0,
        "phi_deg": 0.0,
        "material": None,
    },
    "surface": None,
    "geometry": {
        "z0_nm": None,
        "a_nm": None,            # defaults to z0_nm / 20
        "lambda_over_z0": None,  # required by eval only
    },
    "mode": "retarded",
    "sweep": {"min": 0.5, "max": 12.0, "points": 50},
    "transition": {"bracket": None, "scan_points": 32, "rtol": 1e-4},
    "quad": {"rel_tol": None, "abs_tol": 0.0, "max_evals": 2_000_000},
    "classify": {"delta_tol": 1e-6},
    "output": {"path": None, "format": "csv"},
}

_MATERIAL_KEYS = {"kind", "omega_p", "epsilon"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration.  `data` is the fully resolved document."""

    data: dict

    @property
    def particle(self) -> ParticleModel:
        p = self.data["particle"]
        return ParticleModel(p["r"], p["volume_nm3"] * 1e-27, material_from_dict(p["material"]),
                             math.radians(p["theta_deg"]), math.radians(p["phi_deg"]))

    @property
    def surface(self):
        return material_from_dict(self.data["surface"], "surface")

    @property
    def z0(self) -> float:
        return self.data["geometry"]["z0_nm"] * 1e-9

    @property
    def a(self) -> float:
        return self.data["geometry"]["a_nm"] * 1e-9

    @property
    def mode(self) -> str:
        return self.data["mode"]

    def quad(self, command: str) -> QuadratureConfig:
        q = self.data["quad"]
        rel = q["rel_tol"]
        if rel is None:
            rel = 1e-8 if command == "eval" else 1e-6
        return QuadratureConfig(rel_tol=rel, abs_tol=q["abs_tol"], max_evaluations=q["max_evals"])

    def fingerprint(self) -> str:
        """Canonical JSON of the resolved document; parses back to an equal config."""
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))


def _number(value, path, integer=False):
    if isinstance(value, str):
        # YAML 1.1 resolvers read exponents without a dot (1e16) as strings
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"{path}: expected a number, got {value!r}") from None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"{path}: must be finite")
    return float(value)


def _merge(doc, schema, path):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or 'document'}: expected a mapping, got {type(doc).__name__}")
    out = {}
    for key in doc:
        if key not in schema:
            where = f"{path}.{key}" if path else str(key)
            raise ConfigError(f"unknown key {where}")
    for key, default in schema.items():
        where = f"{path}.{key}" if path else key
        if isinstance(default, dict):
            out[key] = _merge(doc.get(key, {}), default, where)
        elif key in doc:
            out[key] = doc[key]
        else:
            out[key] = copy.deepcopy(default)
    return out


def _material(doc, path):
    if not isinstance(doc, dict):
        raise ConfigError(f"missing required key {path}" if doc is None
                          else f"{path}: expected a mapping")
    for key in doc:
        if key not in _MATERIAL_KEYS:
            raise ConfigError(f"unknown key {path}.{key}")
    out = {"kind": doc.get("kind")}
    for key in ("omega_p", "epsilon"):
        if key in doc:
            out[key] = _number(doc[key], f"{path}.{key}")
    try:
        material_from_dict(out, path)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return out


def parse_config(source: str | dict) -> RunConfig:
    """Validate a YAML/JSON document (text or already-loaded mapping)."""
    if isinstance(source, str):
        try:
            doc = yaml.safe_load(source)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed document: {exc}") from None
    else:
        doc = source
    if doc is None:
        doc = {}
    d = _merge(doc, _SCHEMA, "")

    p = d["particle"]
    if p["r"] is None:
        raise ConfigError("missing required key particle.r")
    p["r"] = _number(p["r"], "particle.r")
    if p["r"] < 1:
        raise ConfigError("particle.r must be >= 1")
    for key in ("volume_nm3", "theta_deg", "phi_deg"):
        p[key] = _number(p[key], f"particle.{key}")
    if not p["volume_nm3"] > 0:
        raise ConfigError("particle.volume_nm3 must be positive")
    if not 0 <= p["theta_deg"] <= 180:
        raise ConfigError("particle.theta_deg must lie in [0, 180]")
    if not 0 <= p["phi_deg"] < 360:
        raise ConfigError("particle.phi_deg must lie in [0, 360)")
    p["material"] = _material(p["material"], "particle.material")
    d["surface"] = _material(d["surface"], "surface")

    g = d["geometry"]
    if g["z0_nm"] is None:
        raise ConfigError("missing required key geometry.z0_nm")
    g["z0_nm"] = _number(g["z0_nm"], "geometry.z0_nm")
    if not g["z0_nm"] > 0:
        raise ConfigError("geometry.z0_nm must be positive")
    g["a_nm"] = g["z0_nm"] / 20 if g["a_nm"] is None else _number(g["a_nm"], "geometry.a_nm")
    if not g["a_nm"] > 0:
        raise ConfigError("geometry.a_nm must be positive")
    if not g["a_nm"] < g["z0_nm"]:
        raise ConfigError(f"geometry.a_nm = {g['a_nm']} must be below geometry.z0_nm = {g['z0_nm']}")
    if g["lambda_over_z0"] is not None:
        g["lambda_over_z0"] = _number(g["lambda_over_z0"], "geometry.lambda_over_z0")
        if not g["lambda_over_z0"] > 0:
            raise ConfigError("geometry.lambda_over_z0 must be positive")

    if d["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {list(MODES)}, got {d['mode']!r}")

    s = d["sweep"]
    s["min"] = _number(s["min"], "sweep.min")
    s["max"] = _number(s["max"], "sweep.max")
    s["points"] = _number(s["points"], "sweep.points", integer=True)
    if not SWEEP_RANGE[0] <= s["min"] < s["max"] <= SWEEP_RANGE[1]:
        raise ConfigError(f"sweep range must satisfy {SWEEP_RANGE[0]} <= sweep.min < sweep.max "
                          f"<= {SWEEP_RANGE[1]}")
    if s["points"] < 2:
        raise ConfigError("sweep.points must be at least 2")

    t = d["transition"]
    if t["bracket"] is not None:
        b = t["bracket"]
        if not isinstance(b, (list, tuple)) or len(b) != 2:
            raise ConfigError("transition.bracket must be a list [lo, hi]")
        t["bracket"] = [_number(b[0], "transition.bracket[0]"), _number(b[1], "transition.bracket[1]")]
        if not 0 < t["bracket"][0] < t["bracket"][1]:
            raise ConfigError("transition.bracket must satisfy 0 < lo < hi")
    t["scan_points"] = _number(t["scan_points"], "transition.scan_points", integer=True)
    if t["scan_points"] < 2:
        raise ConfigError("transition.scan_points must be at least 2")
    t["rtol"] = _number(t["rtol"], "transition.rtol")
    if not t["rtol"] > 0:
        raise ConfigError("transition.rtol must be positive")

    q = d["quad"]
    if q["rel_tol"] is not None:
        q["rel_tol"] = _number(q["rel_tol"], "quad.rel_tol")
        if not q["rel_tol"] > 0:
            raise ConfigError("quad.rel_tol must be positive")
    q["abs_tol"] = _number(q["abs_tol"], "quad.abs_tol")
    if q["abs_tol"] < 0:
        raise ConfigError("quad.abs_tol must be non-negative")
    q["max_evals"] = _number(q["max_evals"], "quad.max_evals", integer=True)
    if q["max_evals"] <= 0:
        raise ConfigError("quad.max_evals must be positive")

    c = d["classify"]
    c["delta_tol"] = _number(c["delta_tol"], "classify.delta_tol")
    if not c["delta_tol"] > 0:
        raise ConfigError("classify.delta_tol must be positive")

    o = d["output"]
    if o["path"] is not None and not isinstance(o["path"], str):
        raise ConfigError("output.path must be a string")
    if o["format"] not in ("csv", "json"):
        raise ConfigError(f"output.format must be csv or json, got {o['format']!r}")
    return RunConfig(d)


# --------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, str):
        return x
    return "%.12g" % x


def _row_record(row: SweepRow) -> dict:
    if row.error is not None:
        rec = {k: None for k in COLUMNS}
        rec["lambda_c_over_z0"] = row.lambda_over_z0
        rec["regime"] = "error"
        rec["error"] = row.error
        return rec
    n = row.v.normalized()
    return {
        "lambda_c_over_z0": row.lambda_over_z0,
        "v_xx_norm": n["xx"], "v_yy_norm": n["yy"], "v_zz_norm": n["zz"],
        "v_xz_norm": n["xz"], "v_sum_norm": n["sum"],
        "A_norm": row.A * row.v.norm_factor,
        "delta_rad": row.delta,
        "regime": row.regime.value,
    }


def _normalization_note(cfg: RunConfig) -> str:
    p, s = cfg.data["particle"]["material"], cfg.data["surface"]
    if p["kind"] == "plasma":
        ref = f"omega_ref = {_fmt(p['omega_p'])} rad/s (particle plasma frequency)"
    elif s["kind"] == "plasma":
        ref = f"omega_ref = {_fmt(s['omega_p'])} rad/s (surface plasma frequency)"
    else:
        ref = "omega_ref = c/z0"
    return f"normalization: V_norm = V * z0^4 / (eps0 * V_particle * omega_ref); {ref}"


def _render_csv(cfg: RunConfig, command: str, columns, records) -> str:
    buf = io.StringIO()
    buf.write(f"# casimir-lateral {command}\n")
    buf.write(f"# {_normalization_note(cfg)}\n")
    buf.write(f"# config: {cfg.fingerprint()}\n")
    buf.write(",".join(columns) + "\n")
    for rec in records:
        buf.write(",".join(_fmt(rec.get(k)) for k in columns) + "\n")
    return buf.getvalue()


def _render_json(cfg: RunConfig, command: str, records, extra=None) -> str:
    doc = {"command": command, "normalization": _normalization_note(cfg),
           "config": json.loads(cfg.fingerprint()), "rows": records}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _write(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".casimir-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# commands


def _run_eval(cfg: RunConfig):
    lam = cfg.data["geometry"]["lambda_over_z0"]
    if lam is None:
        raise ConfigError("missing required key geometry.lambda_over_z0 (needed by eval)")
    geom = Geometry.from_ratio(lam, cfg.z0, cfg.a)
    v = evaluate(cfg.particle, cfg.surface, geom, cfg.mode, cfg.quad("eval"))
    rep = report(v, geom, cfg.data["classify"]["delta_tol"])
    row = SweepRow(lam, v, rep.A, rep.delta, rep.regime)
    extra = {"A_si": rep.A, "x_eq_m": rep.x_eq, "v_sum_error_norm": v.err_sum * v.norm_factor}
    return [_row_record(row)], COLUMNS, extra, False


def _run_sweep(cfg: RunConfig, command: str):
    particle = cfg.particle
    if command == "delta-sweep" and particle.tensor(1.0).xz == 0:
        log.warning("alpha_xz = 0 for this orientation: V_xz vanishes and delta stays at 0 or pi")
    s = cfg.data["sweep"]
    rows = sweep(particle, cfg.surface, cfg.z0, cfg.mode, s["min"], s["max"], s["points"],
                 cfg.quad(command), a=cfg.a, delta_tol=cfg.data["classify"]["delta_tol"])
    failed = any(r.error is not None for r in rows)
    for r in rows:
        if r.error is not None:
            log.error("lambda_c/z0 = %s: %s", _fmt(r.lambda_over_z0), r.error)
    return [_row_record(r) for r in rows], COLUMNS, None, failed


def _run_transition(cfg: RunConfig):
    t, s = cfg.data["transition"], cfg.data["sweep"]
    res = find_transition(cfg.particle, cfg.surface, cfg.z0, cfg.mode,
                          t["bracket"], cfg=cfg.quad("transition"), rtol=t["rtol"],
                          search_range=(s["min"], s["max"]), scan_points=t["scan_points"])
    rec = {"root_lambda_c_over_z0": res.root, "bracket_lo": res.lo, "bracket_hi": res.hi,
           "sign_lo": res.sign_lo, "sign_hi": res.sign_hi, "evaluations": res.evaluations}
    return [rec], TRANSITION_COLUMNS, None, False


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="casimir-lateral",
                                 description="Lateral Casimir-Polder energy of an anisotropic "
                                             "nanoparticle above a corrugated surface.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="YAML or JSON configuration file")
    ap.add_argument("--out", help="output file (default: output.path or stdout)")
    ap.add_argument("--format", choices=("csv", "json"), help="output format (default: output.format)")
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="casimir-lateral: %(levelname)s: %(message)s")
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = parse_config(fh.read())
        fmt = args.format or cfg.data["output"]["format"]
        out = args.out or cfg.data["output"]["path"]
        if args.command == "eval":
            records, columns, extra, failed = _run_eval(cfg)
        elif args.command == "transition":
            records, columns, extra, failed = _run_transition(cfg)
        else:
            records, columns, extra, failed = _run_sweep(cfg, args.command)
    except (ConfigError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (ConvergenceError, ToleranceFloorError, BracketError, ArithmeticError, ValueError) as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERIC
    if fmt == "csv":
        text = _render_csv(cfg, args.command, columns, records)
    else:
        text = _render_json(cfg, args.command, records, extra)
    try:
        _write(text, out)
    except OSError as exc:
        log.error("cannot write output: %s", exc)
        return EXIT_CONFIG
    return EXIT_NUMERIC if failed else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
