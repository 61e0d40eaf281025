"""Batch command-line front end.

Usage: ``bcsresp <subcommand> [--config FILE] [--key value ...] [--out DIR]``.

The config file is flat ``key = value`` text. Keys before the first section
header apply to every subcommand; a ``[subcommand]`` section overrides them
for that subcommand only, and command-line flags override both.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import equilibrium as eq
from ._parallel import pmap, thread_count
from .errors import BcsRespError, BracketFailure, ConfigError, NonConvergedQuadrature, NoRootBelowContinuum

SUBCOMMANDS = ("solve", "response", "gwi", "collective", "kappa", "meissner", "selftest")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SELFTEST = 0, 1, 2, 3
_TOP = "__top__"

DEFAULT_PAIR = {"mu": 1.2, "delta": 0.1}


# ---------------------------------------------------------------------------
# configuration


def _float(v: str) -> float:
    return float(v)


def _int(v: str) -> int:
    return int(v)


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.replace(";", ",").split(",") if x.strip())


def _ints(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.replace(";", ",").split(",") if x.strip())


def _choice(*options: str) -> Callable[[str], str]:
    def parse(v: str) -> str:
        if v not in options:
            raise ValueError(f"expected one of {options}, got {v!r}")
        return v

    return parse


# key -> (parser, default). None means "not given".
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "m": (_float, 1.0),
    "mu": (_float, None),
    "delta": (_float, None),
    "g": (_float, None),
    "lambda": (_float, 10.0),
    "T": (_float, 0.0),
    "seed": (_int, 0),
    "format": (_choice("csv", "json"), "csv"),
    "q": (_floats, None),
    "l": (_ints, None),
    "omega": (_floats, None),
    "broadening": (_float, 1e-4),
    "n_points": (_int, 20),
    "q_min": (_float, 0.05),
    "q_max": (_float, 1.0),
    "l_max": (_int, 5),
    "mu_sweep": (_floats, None),
    "temperatures": (_floats, None),
    "quad_rtol": (_float, 1e-10),
    "gwi_tol": (_float, 1e-6),
    "oracle_tol": (_float, 1e-6),
    "oracle_samples": (_int, 8),
}
ALIASES = {"lambda_cut": "lambda", "temperature": "T"}


def _canonical(key: str) -> str:
    key = key.strip().replace("-", "_")
    return ALIASES.get(key, key)


def _read_file(path: str, subcommand: str) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    parser = configparser.ConfigParser(default_section="__none__", interpolation=None, delimiters=("=", ":"))
    parser.optionxform = str
    try:
        parser.read_string(f"[{_TOP}]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path!r}: {exc}") from exc
    for name in parser.sections():
        if name != _TOP and name not in SUBCOMMANDS:
            raise ConfigError(f"unknown section [{name}] in {path!r}")
    out = dict(parser[_TOP])
    if parser.has_section(subcommand):
        out.update(parser[subcommand])
    return out


def _parse_overrides(tokens: list[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ConfigError(f"expected --key value, got {tok!r}")
        key = tok[2:]
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ConfigError(f"flag {tok} needs a value")
            value = tokens[i + 1]
            i += 2
        out[key] = value
    return out


def resolve_config(subcommand: str, config_file: str | None, overrides: dict[str, str]) -> dict[str, Any]:
    """Merge defaults, file and flags into typed values; reject unknown keys."""
    raw: dict[str, str] = {}
    if config_file:
        raw.update(_read_file(config_file, subcommand))
    raw.update(overrides)
    cfg = {k: d for k, (_, d) in SCHEMA.items()}
    for key, value in raw.items():
        name = _canonical(key)
        if name not in SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            cfg[name] = SCHEMA[name][0](str(value))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    given = [k for k in ("mu", "delta", "g") if cfg[k] is not None]
    if not given:
        cfg.update(DEFAULT_PAIR)
    elif len(given) != 2:
        raise ConfigError(f"exactly two of mu, delta, g must be given (got {', '.join(given)})")
    if cfg["l"] is not None and cfg["omega"] is not None:
        raise ConfigError("give either Matsubara indices l or real frequencies omega, not both")
    for key in ("m", "lambda"):
        if not cfg[key] > 0:
            raise ConfigError(f"{key} must be positive")
    if cfg["T"] < 0:
        raise ConfigError("T must be non-negative")
    return cfg


def _state(cfg: dict[str, Any], mu: float | None = None, temperature: float | None = None) -> eq.SystemParams:
    """Solve for whichever of (mu, delta, g) was not supplied."""
    m, lam = cfg["m"], cfg["lambda"]
    T = cfg["T"] if temperature is None else temperature
    mu = cfg["mu"] if mu is None else mu
    delta, g = cfg["delta"], cfg["g"]
    if mu is not None and delta is not None:
        return eq.coupling_for(eq.SystemParams(m, mu, delta, None, lam, T))
    if mu is not None and g is not None:
        return eq.solve_gap(m, mu, g, lam, T)
    return eq.solve_mu(m, delta, g, lam, T)


# ---------------------------------------------------------------------------
# output


def _fmt(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, tuple):
        return ",".join(_fmt(v) for v in x)
    return "" if x is None else str(x)


def _flatten(row: dict[str, Any]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in row.items():
        if isinstance(v, (complex, np.complexfloating)):
            out[f"{k}_re"] = float(v.real)
            out[f"{k}_im"] = float(v.imag)
        else:
            out[k] = v
    return out


def _json_value(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, tuple):
        return [_json_value(x) for x in v]
    return v


@dataclass
class Table:
    name: str
    rows: list[dict[str, Any]]
    summary: dict[str, Any]


def write_table(table: Table, cfg: dict[str, Any], out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [_flatten(r) for r in table.rows]
    summary = _flatten(table.summary)
    resolved = {k: cfg[k] for k in sorted(cfg)}
    if cfg["format"] == "json":
        path = out_dir / f"{table.name}.json"
        doc = {
            "config": {k: _json_value(v) for k, v in resolved.items()},
            "rows": [{k: _json_value(v) for k, v in r.items()} for r in rows],
            "summary": {k: _json_value(v) for k, v in summary.items()},
        }
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path
    path = out_dir / f"{table.name}.csv"
    buf = io.StringIO()
    for k, v in resolved.items():
        buf.write(f"# {k} = {_fmt(v)}\n")
    for k, v in summary.items():
        buf.write(f"# summary {k} = {_fmt(v)}\n")
    columns = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    path.write_text(buf.getvalue())
    return path


# ---------------------------------------------------------------------------
# subcommands


def _state_row(p: eq.SystemParams) -> dict[str, Any]:
    return {"m": p.m, "mu": p.mu, "delta": p.delta, "g": p.g, "lambda": p.lambda_cut, "T": p.temperature}


def cmd_solve(cfg: dict[str, Any]) -> Table:
    p = _state(cfg)
    n = eq.number_density(p)
    kf, ef = eq.fermi_momentum(p, n)
    row = _state_row(p) | {"n": n, "k_F": kf, "eps_F": ef, "gap_residual": eq.gap_residual(p)}
    return Table("solve", [row], {})


def _frequencies(cfg: dict[str, Any], T: float):
    from .kinematics import FourMomentum

    if cfg["omega"] is not None:
        return [("omega", w, lambda q, w=w: FourMomentum.real_axis(w, (0.0, 0.0, q), cfg["broadening"]))
                for w in cfg["omega"]]
    if T <= 0 and cfg["l"] is None:
        return [("omega", w, lambda q, w=w: FourMomentum.real_axis(w, (0.0, 0.0, q), cfg["broadening"]))
                for w in (0.0, 0.05)]
    if T <= 0:
        raise ConfigError("Matsubara frequencies need T > 0; give real frequencies with --omega instead")
    ls = cfg["l"] if cfg["l"] is not None else (0, 1)
    return [("l", l, lambda q, l=l: FourMomentum.matsubara_point(l, T, (0.0, 0.0, q))) for l in ls]


def cmd_response(cfg: dict[str, Any]) -> Table:
    from .response import CHANNEL_LABELS, assemble_response_matrix

    p = _state(cfg)
    qs = cfg["q"] if cfg["q"] is not None else (0.1, 0.3)
    grid = [(kind, key, make, q) for kind, key, make in _frequencies(cfg, p.temperature) for q in qs]

    def one(item):
        kind, key, make, q = item
        Q = make(q)
        R = assemble_response_matrix(p, Q, rtol=cfg["quad_rtol"])
        row: dict[str, Any] = {kind: key, "omega": Q.omega, "q": q}
        for i, a in enumerate(CHANNEL_LABELS):
            for j, b in enumerate(CHANNEL_LABELS):
                row[f"Q_{a}_{b}"] = complex(R.matrix[i, j])
        row["Qt_D1_D1"] = R.q_tilde11
        row["Qt_D2_D2"] = R.q_tilde22
        row["quad_error"] = R.error
        return row

    return Table("response", pmap(one, grid), {})


def _random_points(cfg: dict[str, Any], T: float):
    from .kinematics import FourMomentum

    if cfg["q"] is not None or cfg["l"] is not None:
        ls = cfg["l"] if cfg["l"] is not None else (1,)
        qs = cfg["q"] if cfg["q"] is not None else (0.1,)
        return [(l, (0.0, 0.0, q), FourMomentum.matsubara_point(l, T, (0.0, 0.0, q))) for l in ls for q in qs]
    rng = np.random.default_rng(cfg["seed"])
    pts = []
    for _ in range(cfg["n_points"]):
        l = int(rng.integers(1, cfg["l_max"] + 1)) * int(rng.choice([-1, 1]))
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        q = tuple(float(x) for x in d * rng.uniform(cfg["q_min"], cfg["q_max"]))
        pts.append((l, q, FourMomentum.matsubara_point(l, T, q)))
    return pts


def cmd_gwi(cfg: dict[str, Any]) -> Table:
    from .gauge import gwi_residuals
    from .response import assemble_response_matrix

    p = _state(cfg)
    if not p.temperature > 0:
        raise ConfigError("gwi evaluates Matsubara points and needs T > 0")
    pts = _random_points(cfg, p.temperature)

    def one(item):
        l, q, Q = item
        R = assemble_response_matrix(p, Q, rtol=cfg["quad_rtol"])
        lit = gwi_residuals(R)
        sub = gwi_residuals(R, subtract_surface=True)
        return {"l": l, "qx": q[0], "qy": q[1], "qz": q[2],
                "first": lit.first, "second": lit.second, "third": lit.third,
                "first_sub": sub.first, "second_sub": sub.second, "third_sub": sub.third}

    rows = pmap(one, pts)
    summary = {
        "max_literal": max(max(r["first"], r["second"], r["third"]) for r in rows),
        "max_surface_subtracted": max(max(r["first_sub"], r["second_sub"], r["third_sub"]) for r in rows),
    }
    return Table("gwi", rows, summary)


def cmd_collective(cfg: dict[str, Any]) -> Table:
    from .observables import default_mode_momenta, fit_sound_speed, goldstone_dispersion

    p = _state(cfg)
    if p.temperature != 0:
        raise ConfigError("collective needs T = 0")
    qs = cfg["q"] if cfg["q"] is not None else tuple(default_mode_momenta(p))
    pts = goldstone_dispersion(p, qs, rtol=cfg["quad_rtol"])
    fit = fit_sound_speed(pts)
    kf = eq.fermi_surface(p)
    summary: dict[str, Any] = {"c_s": fit.speed, "intercept": fit.intercept, "delta": p.delta}
    if kf is not None:
        summary |= {"k_F": kf, "c_s_over_vF_m": fit.speed / (kf / p.m), "c_s_over_vF_mu": fit.speed / (kf / p.mu)}
    rows = [{"q": x.q, "omega": x.omega, "residual": x.residual, "continuum_edge": x.edge} for x in pts]
    return Table("collective", rows, summary)


def cmd_kappa(cfg: dict[str, Any]) -> Table:
    from .observables import compressibility_finite_difference, compressibility_report

    if cfg["T"] != 0:
        raise ConfigError("kappa uses the zero-temperature closed forms; set T = 0")
    if cfg["mu_sweep"] is not None and cfg["mu"] is None:
        raise ConfigError("mu_sweep replaces mu; give it together with delta or g")
    mus = cfg["mu_sweep"] if cfg["mu_sweep"] is not None else (None,)

    def one(mu):
        p = _state(cfg, mu=mu)
        r = compressibility_report(p)
        fd = compressibility_finite_difference(p)
        return _state_row(p) | {
            "n": r.density, "dn_dmu_eos": r.dn_dmu_eos, "dn_dmu_response": r.dn_dmu_response,
            "dn_dmu_no_collective": r.dn_dmu_bare, "dn_dmu_fd": fd, "kappa": r.kappa,
            "rel_diff": r.rel_diff, "rel_diff_fd": abs(fd - r.dn_dmu_eos) / abs(r.dn_dmu_eos),
        }

    rows = pmap(one, mus)
    return Table("kappa", rows, {"max_rel_diff": max(r["rel_diff"] for r in rows)})


def cmd_meissner(cfg: dict[str, Any]) -> Table:
    from .observables import meissner_kernel

    base = _state(cfg)
    temps = cfg["temperatures"] if cfg["temperatures"] is not None else (base.temperature,)

    def one(T):
        p = base if T == base.temperature else eq.solve_gap(base.m, base.mu, base.g, base.lambda_cut, T)
        r = meissner_kernel(p, with_collective_check=(T == 0))
        return _state_row(p) | {"k_L": r.k_l, "k_T": r.k_t, "n_s": r.n_s, "n_s_kernel": r.n_s_kernel,
                                "n_NR": r.n_nr, "n_total": r.n_total, "deltaK_T_ratio": r.delta_kt_ratio}

    return Table("meissner", pmap(one, temps), {})


def cmd_selftest(cfg: dict[str, Any]) -> Table:
    from .selftest import run_suite

    rows = run_suite(cfg)
    failed = [r["suite"] for r in rows if r["status"] == "fail"]
    return Table("selftest", rows, {"failed": len(failed)})


COMMANDS: dict[str, Callable[[dict[str, Any]], Table]] = {
    "solve": cmd_solve,
    "response": cmd_response,
    "gwi": cmd_gwi,
    "collective": cmd_collective,
    "kappa": cmd_kappa,
    "meissner": cmd_meissner,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------------------
# entry point


def _diagnose(kind: str, exc: BaseException) -> None:
    sys.stderr.write(json.dumps({"error": kind, "type": type(exc).__name__, "message": str(exc)}) + "\n")


def _print_summary(table: Table, path: Path) -> None:
    print(f"wrote {path}")
    for k, v in _flatten(table.summary).items():
        print(f"{k} = {_fmt(v)}")
    if table.name == "selftest":
        for r in table.rows:
            print(f"{r['status'].upper():4s} {r['suite']}: max residual {r['max_residual']:.3e} (tol {_fmt(r['tolerance'])})")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="bcsresp", description=__doc__.splitlines()[0])
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", default=None)
    ap.add_argument("--out", default="out")
    try:
        args, rest = ap.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        thread_count()
        cfg = resolve_config(args.subcommand, args.config, _parse_overrides(rest))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = COMMANDS[args.subcommand](cfg)
        path = write_table(table, cfg, Path(args.out))
    except (ConfigError, ValueError) as exc:
        _diagnose("config", exc)
        return EXIT_CONFIG
    except (NonConvergedQuadrature, BracketFailure, NoRootBelowContinuum) as exc:
        _diagnose("non-convergence", exc)
        return EXIT_NUMERIC
    except BcsRespError as exc:
        _diagnose("numerical", exc)
        return EXIT_NUMERIC
    _print_summary(table, path)
    if args.subcommand == "selftest" and table.summary["failed"]:
        return EXIT_SELFTEST
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
