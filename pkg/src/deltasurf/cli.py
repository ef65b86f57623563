"""Command line front end: ``deltasurf <subcommand> --config run.ini --out dir``.

Exit status 0 on success, 2 for configuration errors, 3 for numerical
failures.  Every CSV starts with a ``# config_hash=`` line; timestamps go
only to the ``manifest.json`` sidecar so CSV bodies are reproducible.
"""

import argparse
import configparser
import csv
import hashlib
import io
import json
import re
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exceptions import ConfigError, DeltaSurfError

SUBCOMMANDS = ("geometry", "surface-modes", "transverse", "bs-solve", "sweep")

# section -> key -> (type, default); surface parameters are free-form
SCHEMA = {
    "mesh": {"target_h": (float, 0.2), "levels": (int, 3), "refinement": (float, 2.0)},
    "solver": {
        "tol": (float, 1e-6),
        "max_iter": (int, 60),
        "count": (int, 3),
        "method": (str, "auto"),
        "bem_h": (float, 0.3),
        "hmax": (float, 0.3),
        "degree": (int, 6),
        "beta": (float, 20.0),
        "trace": (bool, False),
    },
    "sweep": {
        "betas": (list, [8.0, 16.0, 32.0, 64.0]),
        "j_max": (int, 1),
        "xi": (float, 6.0),
        "C_geom": (float, 1.0),
    },
    "transverse": {"a": (float, 1.0), "betas": (list, [10.0])},
    "geometry": {"samples": (int, 0)},
    "output": {"formats": (str, "csv, svg")},
}


@dataclass
class RunConfig:
    surface: str
    surface_params: dict = field(default_factory=dict)
    values: dict = field(default_factory=dict)  # section -> key -> value
    seed: int = 0

    def get(self, section, key):
        return self.values[section][key]

    def to_text(self):
        """Canonical text; parse(to_text()) reproduces the configuration."""
        lines = ["[surface]", f"name = {self.surface}"]
        for k in sorted(self.surface_params):
            lines.append(f"{k} = {_format_value(self.surface_params[k])}")
        for section in SCHEMA:
            lines.append("")
            lines.append(f"[{section}]")
            for k in SCHEMA[section]:
                lines.append(f"{k} = {_format_value(self.values[section][k])}")
        lines += ["", "[run]", f"seed = {self.seed}", ""]
        return "\n".join(lines)

    def hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        if v and isinstance(v[0], (list, tuple)):
            return "; ".join(" ".join(repr(float(c)) for c in p) for p in v)
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _line_index(text):
    """(section, key) -> line number of the assignment in the raw text."""
    idx, section = {}, None
    for n, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            idx[(section, None)] = n
        elif "=" in s and not s.startswith(("#", ";")):
            idx[(section, s.split("=", 1)[0].strip())] = n
    return idx


def _convert(kind, raw):
    if kind is bool:
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is list:
        return [float(x) for x in re.split(r"[,\s]+", raw.strip()) if x]
    return kind(raw.strip())


def _surface_value(raw):
    raw = raw.strip()
    if ";" in raw:
        return [[float(c) for c in pt.split()] for pt in raw.split(";") if pt.strip()]
    if "," in raw:
        return [float(x) for x in raw.split(",")]
    for kind in (int, float):
        try:
            return kind(raw)
        except ValueError:
            pass
    return raw


def parse_config(text):
    """Parse and validate configuration text; raises ConfigError with a line number."""
    lines = _line_index(text)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None)) from None

    known = set(SCHEMA) | {"surface", "run"}
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown section [{section}]", lines.get((section, None)))
    if not parser.has_option("surface", "name"):
        raise ConfigError("[surface] needs a name", lines.get(("surface", None)))

    from .geometry import CATALOG, make_surface

    name = parser.get("surface", "name").strip()
    if name not in CATALOG:
        raise ConfigError(f"unknown surface {name!r}", lines.get(("surface", "name")))
    params = {k: _surface_value(v) for k, v in parser.items("surface") if k != "name"}
    if "orientation" in params:
        params["orientation"] = int(params["orientation"])
    try:
        make_surface(name, **params)
    except (TypeError, ValueError, DeltaSurfError) as exc:
        raise ConfigError(f"bad surface parameters: {exc}", lines.get(("surface", None))) from None

    values = {}
    for section, keys in SCHEMA.items():
        values[section] = {}
        given = dict(parser.items(section)) if parser.has_section(section) else {}
        for k in given:
            if k not in keys:
                raise ConfigError(f"unknown key {k!r} in [{section}]", lines.get((section, k)))
        for k, (kind, default) in keys.items():
            if k in given:
                try:
                    values[section][k] = _convert(kind, given[k])
                except ValueError as exc:
                    raise ConfigError(f"{section}.{k}: {exc}", lines.get((section, k))) from None
            else:
                values[section][k] = default
    seed = 0
    if parser.has_option("run", "seed"):
        try:
            seed = int(parser.get("run", "seed"))
        except ValueError:
            raise ConfigError("seed must be an integer", lines.get(("run", "seed"))) from None
    cfg = RunConfig(name, params, values, seed)
    _validate(cfg, lines)
    return cfg


def _validate(cfg, lines):
    def fail(section, key, msg):
        raise ConfigError(msg, lines.get((section, key)))

    for key in ("tol",):
        if not cfg.get("solver", key) > 0:
            fail("solver", key, f"{key} must be positive")
    for section, key in (("mesh", "target_h"), ("solver", "bem_h"), ("solver", "hmax"), ("transverse", "a")):
        if not cfg.get(section, key) > 0:
            fail(section, key, f"{key} must be positive")
    for section, key in (("mesh", "levels"), ("solver", "count"), ("solver", "max_iter"), ("sweep", "j_max")):
        if cfg.get(section, key) < 1:
            fail(section, key, f"{key} must be at least 1")
    if cfg.get("mesh", "refinement") <= 1:
        fail("mesh", "refinement", "refinement must exceed 1")
    if cfg.get("solver", "method") not in ("auto", "mesh", "axisymmetric"):
        fail("solver", "method", "method must be auto, mesh or axisymmetric")
    if not cfg.get("solver", "beta") > 0:
        fail("solver", "beta", "beta must be positive")
    for section in ("sweep", "transverse"):
        b = cfg.get(section, "betas")
        if not b or any(x <= 0 for x in b):
            fail(section, "betas", "betas must be positive")
        if any(y <= x for x, y in zip(b, b[1:])):
            fail(section, "betas", "betas must be strictly increasing")
    if cfg.get("sweep", "xi") < 6:
        fail("sweep", "xi", "xi must be at least 6 for the separated bound")
    if cfg.get("sweep", "C_geom") < 0:
        fail("sweep", "C_geom", "C_geom must be non-negative")
    fmts = {f.strip() for f in cfg.get("output", "formats").split(",") if f.strip()}
    if not fmts <= {"csv", "svg"}:
        fail("output", "formats", "formats must be chosen from csv, svg")


# ---------------------------------------------------------------------------
# subcommands; each returns {filename: text}


def _table(cfg, header, rows):
    buf = io.StringIO()
    buf.write(f"# config_hash={cfg.hash()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in r])
    return buf.getvalue()


def _patch(cfg):
    from .geometry import make_surface

    return make_surface(cfg.surface, **cfg.surface_params)


def run_geometry(cfg, jobs=1):
    from .geometry import curvature_potential
    from .mesh import build_mesh

    patch = _patch(cfg)
    mesh = build_mesh(patch, cfg.get("mesh", "target_h"))
    if mesh.params is None:
        R = patch.radius
        n = mesh.n_vertices
        K = np.full(n, 1 / R**2)
        M = np.full(n, -1 / R * patch.orientation)
        W = np.zeros(n)
    else:
        j = patch.jet(mesh.params, check_domain=False)
        K, M, W = j.gauss, j.mean, curvature_potential(j)
    rows = [(i, *mesh.points[i], K[i], M[i], W[i]) for i in range(mesh.n_vertices)]
    files = {"geometry.csv": _table(cfg, ["vertex", "x", "y", "z", "K", "M", "W"], rows)}
    n = cfg.get("geometry", "samples")
    if n > 0:
        rng = np.random.default_rng(cfg.seed)
        pts = patch.sample_parameters(rng, n)
        Ws = curvature_potential(patch.jet(pts, check_domain=False))
        files["geometry_samples.csv"] = _table(cfg, ["u", "v", "W"], [(p[0], p[1], w) for p, w in zip(pts, Ws)])
    return files


def run_surface_modes(cfg, jobs=1):
    from .surface_fem import SurfaceModeSolver

    est = SurfaceModeSolver(
        n_modes=cfg.get("solver", "count"),
        target_h=cfg.get("mesh", "target_h"),
        n_levels=cfg.get("mesh", "levels"),
        refinement=cfg.get("mesh", "refinement"),
    ).fit(_patch(cfg))
    fine = est.results_[-1]
    rows = [(j + 1, est.eigenvalues_[j], fine.residuals[j], fine.mesh_h) for j in range(est.n_modes)]
    levels = [
        (k + 1, j + 1, est.level_h_[k], est.level_eigenvalues_[k, j])
        for k in range(len(est.results_))
        for j in range(est.n_modes)
    ]
    return {
        "surface_modes.csv": _table(cfg, ["j", "eigenvalue", "residual", "mesh_h"], rows),
        "surface_modes_levels.csv": _table(cfg, ["level", "j", "element_size", "eigenvalue"], levels),
    }


def run_transverse(cfg, jobs=1):
    from .transverse1d import transverse_table

    rows = transverse_table(cfg.get("transverse", "betas"), cfg.get("transverse", "a"))
    rows = [(b, a, lam, lo, hi, "true" if ok else "false") for b, a, lam, lo, hi, ok in rows]
    return {
        "transverse.csv": _table(cfg, ["beta", "a", "Lambda1", "bracket_low", "bracket_high", "bracket_valid"], rows)
    }


def _bem_discretization(cfg, patch):
    from .axisym import AxisymmetricLayer
    from .bs_bem import TriangleLayer
    from .mesh import build_mesh

    method = cfg.get("solver", "method")
    if method == "auto":
        method = "mesh"
    if method == "axisymmetric":
        curve = patch.profile()
        if curve is None:
            raise ConfigError(f"{patch.name} is not a surface of revolution")
        return AxisymmetricLayer(curve, hmax=cfg.get("solver", "hmax"), degree=cfg.get("solver", "degree"))
    return TriangleLayer(build_mesh(patch, cfg.get("solver", "bem_h")))


def run_bs_solve(cfg, jobs=1):
    from .bs_bem import TriangleLayer, solve_bound_states, trace_consistency

    patch = _patch(cfg)
    disc = _bem_discretization(cfg, patch)
    beta = cfg.get("solver", "beta")
    res = solve_bound_states(disc, beta, cfg.get("solver", "count"), cfg.get("solver", "tol"), cfg.get("solver", "max_iter"))
    if cfg.get("solver", "trace") and isinstance(disc, TriangleLayer):
        for j in range(res.count):
            if res.eigenvalues[j] is not None:
                trace_consistency(res, j)
    body = res.to_csv()
    files = {"bound_states.csv": f"# config_hash={cfg.hash()}\n" + body}
    if isinstance(disc, TriangleLayer):
        cols = [j for j in range(res.count) if res.densities[j] is not None]
        rows = [(i, *(res.densities[j][i] for j in cols)) for i in range(disc.mesh.n_vertices)]
        files["densities.csv"] = _table(cfg, ["vertex"] + [f"h_{j + 1}" for j in cols], rows)
    return files


def run_sweep(cfg, jobs=1):
    from .asymptotics import cross_check_bounds, fit_rate, records_to_csv, remainder_svg, sweep
    from .exceptions import InsufficientDataError

    patch = _patch(cfg)
    method = cfg.get("solver", "method")
    if method == "auto":
        method = "axisymmetric" if patch.profile() is not None else "mesh"
    resolution = (
        {"hmax": cfg.get("solver", "hmax"), "degree": cfg.get("solver", "degree")}
        if method == "axisymmetric"
        else {"target_h": cfg.get("solver", "bem_h")}
    )
    xi, C = cfg.get("sweep", "xi"), cfg.get("sweep", "C_geom")
    records = sweep(
        patch,
        cfg.get("sweep", "betas"),
        cfg.get("sweep", "j_max"),
        method=method,
        resolution=resolution,
        xi=xi,
        C_geom=C,
        jobs=jobs,
        fem_h=cfg.get("mesh", "target_h"),
    )
    fmts = {f.strip() for f in cfg.get("output", "formats").split(",")}
    files = {}
    if "csv" in fmts:
        files["sweep.csv"] = records_to_csv(records, preamble=f"# config_hash={cfg.hash()}\n")
        bounds = cross_check_bounds(records, C, xi)
        files["bounds.csv"] = _table(
            cfg,
            ["beta", "j", "E_j", "upper_bound", "passed", "reason"],
            [(b["beta"], b["j"], b["E_j"], b["bound"], "" if b["passed"] is None else str(b["passed"]).lower(), b["reason"]) for b in bounds],
        )
    fit = None
    try:
        fit = fit_rate(records, 1)
        files["rate_fit.csv"] = _table(
            cfg,
            ["j", "model", "fitted_c", "max_rel_misfit", "monotone_flag", "applicable"],
            [(1, fit.model, fit.fitted_c, fit.max_rel_misfit, str(fit.monotone_flag).lower(), str(fit.applicable).lower())],
        )
    except InsufficientDataError:
        pass
    if "svg" in fmts:
        files["remainder.svg"] = remainder_svg(records, fit)
    return files


RUNNERS = {
    "geometry": run_geometry,
    "surface-modes": run_surface_modes,
    "transverse": run_transverse,
    "bs-solve": run_bs_solve,
    "sweep": run_sweep,
}


def run(subcommand, config, out, jobs=1):
    """Run one subcommand and write its artifacts; returns the exit status."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "subcommand": subcommand,
        "config_hash": config.hash(),
        "seed": config.seed,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "files": [],
    }
    status = 0
    try:
        files = RUNNERS[subcommand](config, jobs)
        for name in sorted(files):
            (out / name).write_text(files[name])
            manifest["files"].append(name)
        manifest["status"] = "ok"
    except ConfigError as exc:
        manifest["status"], manifest["error"] = "config error", str(exc)
        status = 2
    except (DeltaSurfError, np.linalg.LinAlgError, ArithmeticError) as exc:
        manifest["status"], manifest["error"] = "numerical failure", f"{type(exc).__name__}: {exc}"
        status = 3
    manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    if status:
        print(f"deltasurf {subcommand}: {manifest['error']}", file=sys.stderr)
    return status


def build_parser():
    p = argparse.ArgumentParser(prog="deltasurf", description="Bound states of δ-interactions supported on surfaces.")
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="key = value configuration file")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")
    p.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
        cfg = parse_config(text)
    except OSError as exc:
        print(f"deltasurf: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"deltasurf: {args.config}: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs < 1:
        print("deltasurf: --jobs must be at least 1", file=sys.stderr)
        return 2
    return run(args.subcommand, cfg, args.out, args.jobs)


if __name__ == "__main__":
    sys.exit(main())
