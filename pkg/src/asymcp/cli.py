"""Command-line front end: ``asymcp {simulate,sweep,meanfield,bounds,couple}``.

Every option may also come from an INI file given with ``--config``; its
section named after the subcommand holds ``key = value`` lines (keys as the
long flag names, dashes or underscores).  Flags override the file, and the
resolved values are echoed into each JSON output.

Exit status: 0 success, 1 coupling-table violations, 2 invalid
configuration, 3 coupling breaks (``couple --demo-break`` found a pair
outside S), 74 output path not writable.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import bounds as _bounds
from . import coupling as _coupling
from . import meanfield as _meanfield
from .dynamics import Params, Variant, initial_configuration, run_ctmc, survival_estimate
from .errors import DomainError
from .lattice import LatticeGeometry, to_pgm
from .montecarlo import replica_rng

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2
EXIT_COUPLING_BREAKS = 3
EXIT_IO = 74

SWEEP_HEADER = "beta1,beta2,gamma,survival,ci_lo,ci_hi,density,density_ci_lo,density_ci_hi"


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# value parsers shared by flags and config files

def _float(s):
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def _bool(s):
    if isinstance(s, bool):
        return s
    low = str(s).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _float_list(s):
    if isinstance(s, (list, tuple)):
        return [float(v) for v in s]
    return [float(v) for v in str(s).split(",") if v.strip()]


def _grid(s):
    """``a,b,c`` or inclusive ``start:stop:step``."""
    if isinstance(s, (int, float)):
        return [float(s)]
    text = str(s).strip()
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if not step > 0 or stop < start:
            raise ValueError(f"bad range {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + k * step, 12) for k in range(n + 1)]
    return _float_list(text)


def _init(s):
    text = str(s).strip().lower()
    if text.startswith("bernoulli"):
        inner = text[len("bernoulli"):].strip("() ")
        p1, p2 = (float(v) for v in inner.split(","))
        return ("bernoulli", p1, p2)
    initial_configuration(text, LatticeGeometry(1, 3))
    return text


def _init_repr(v):
    return f"bernoulli({v[1]!r},{v[2]!r})" if isinstance(v, tuple) else v


VARIANTS = [v.value for v in Variant]
KINDS = [k.value for k in _coupling.CouplingKind]

# name -> (parser, default, help)
SHARED = {
    "beta1": (_float, 0.0, "asymptomatic infection rate"),
    "beta2": (_float, 0.0, "symptomatic infection rate"),
    "gamma": (_float, 0.0, "rate 1 -> 2"),
    "dim": (int, 1, "lattice dimension"),
    "side": (int, 100, "torus side length L"),
    "tmax": (_float, 100.0, "time horizon"),
    "replicas": (int, 1, "independent replicas"),
    "seed": (int, 0, "master seed"),
    "out": (str, ".", "output directory"),
    "variant": (str, "standard", "dynamics variant"),
}

OPTIONS = {
    "simulate": {
        **SHARED,
        "regrowth": (_float, 1.0, "forest-fire regrowth rate 2 -> 0"),
        "init": (_init, "single-1", "single-1, single-2, all-1, all-2, healthy or bernoulli(p1,p2)"),
        "sample_dt": (_float, 1.0, "sampling interval"),
        "snapshots": (_float_list, [], "comma-separated snapshot times (d=2 only)"),
    },
    "sweep": {
        **SHARED,
        "beta1": (_grid, [0.0], "grid: a,b,c or start:stop:step"),
        "beta2": (_grid, [0.0], "grid: a,b,c or start:stop:step"),
        "gamma": (_grid, [0.0], "grid: a,b,c or start:stop:step"),
        "regrowth": (_float, 1.0, "forest-fire regrowth rate"),
        "init": (_init, "single-1", "initial condition"),
        "workers": (int, 1, "threads per grid point"),
    },
    "meanfield": {
        **SHARED,
        "u1": (_float, 0.01, "initial density of 1s"),
        "u2": (_float, 0.01, "initial density of 2s"),
        "dt": (_float, 1e-3, "RK4 step"),
        "every": (int, 100, "write every n-th step to the CSV"),
    },
    "bounds": {
        **SHARED,
        "radius": (int, 5, "box radius r"),
        "target": (_float, _bounds.PC_UPPER_Z2, "open-site probability target for beta_bar"),
    },
    "couple": {
        **SHARED,
        "kind": (str, "beta1", "coupling kind"),
        "prime": (_float, None, "value of the primed parameter (defaults to the unprimed one)"),
        "sample_dt": (_float, 1.0, "sampling interval"),
        "init": (_init, "all-1", "shared initial condition"),
        "check_tables": (_bool, False, "exhaustively verify the coupling tables and exit"),
        "demo_break": (_bool, False, "run the beta1 > beta2 construction until a pair leaves S"),
    },
}

CHOICES = {"variant": VARIANTS, "kind": KINDS + ["all"]}


def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="asymcp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in OPTIONS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", help="INI file with a [%s] section" % cmd)
        for name, (_, default, help_) in opts.items():
            kw = {"dest": name, "default": None, "help": f"{help_} (default: {default})"}
            if name in CHOICES:
                kw["choices"] = CHOICES[name]
            if opts[name][0] is _bool:
                kw.update(action="store_const", const=True)
            sp.add_argument(_flag(name), **kw)
    return parser


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config-file section, then explicit flags."""
    opts = OPTIONS[command]
    raw = {name: spec[1] for name, spec in opts.items()}
    explicit = {}
    if getattr(args, "config", None):
        cp = configparser.ConfigParser()
        try:
            with open(args.config) as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if cp.has_section(command):
            for key, value in cp.items(command):
                name = key.replace("-", "_")
                if name not in opts:
                    raise ConfigError(f"unknown key {key!r} in [{command}]")
                explicit[name] = value
    for name in opts:
        value = getattr(args, name, None)
        if value is not None:
            explicit[name] = value
    for name, value in explicit.items():
        parse = opts[name][0]
        try:
            raw[name] = parse(value)
        except (ValueError, DomainError) as exc:
            raise ConfigError(f"invalid value for {name}: {value!r} ({exc})") from exc
        if name in CHOICES and raw[name] not in CHOICES[name]:
            raise ConfigError(f"{name} must be one of {CHOICES[name]}")
    return raw


def _echo(cfg: dict) -> dict:
    return {k: (_init_repr(v) if k == "init" else v) for k, v in cfg.items()}


# ---------------------------------------------------------------------------
# output helpers

def _prepare_out(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = tempfile.NamedTemporaryFile(dir=out, delete=True)
        probe.close()
    except OSError as exc:
        raise OSError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: Path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _params(cfg, **over) -> Params:
    values = {k: cfg[k] for k in ("beta1", "beta2", "gamma")}
    values.update(over)
    variant = Variant.parse(cfg.get("variant", "standard"))
    extra = {"regrowth": cfg["regrowth"]} if "regrowth" in cfg and variant is Variant.FOREST_FIRE else {}
    return Params(variant=variant, **values, **extra)


def _geometry(cfg) -> LatticeGeometry:
    return LatticeGeometry(cfg["dim"], cfg["side"])


def _positive(cfg, *names):
    for n in names:
        if not cfg[n] > 0:
            raise DomainError(f"{n} must be positive")


# ---------------------------------------------------------------------------
# subcommands

def cmd_simulate(cfg) -> int:
    p = _params(cfg)
    g = _geometry(cfg)
    _positive(cfg, "tmax", "sample_dt", "replicas")
    if cfg["snapshots"] and g.d != 2:
        raise DomainError("PGM snapshots are only defined for d = 2")
    out = _prepare_out(cfg["out"])
    runs = []
    for i in range(cfg["replicas"]):
        rng = replica_rng(cfg["seed"], i)
        xi0 = initial_configuration(cfg["init"], g, rng)
        traj = run_ctmc(xi0, p, cfg["tmax"], cfg["sample_dt"], seed=rng, snapshot_times=cfg["snapshots"])
        tag = "" if cfg["replicas"] == 1 else f"_{i:03d}"
        _write_text(out / f"trajectory{tag}.csv", traj.to_csv())
        for t, snap in traj.snapshots.items():
            _write_text(out / f"snapshot{tag}_t{t:g}.pgm", to_pgm(snap))
        s = traj.summary()
        s["seed"] = cfg["seed"]
        s["replica"] = i
        runs.append(s)
    summary = runs[0] if len(runs) == 1 else {"replicas": runs}
    summary["config"] = _echo(cfg)
    _write_json(out / "summary.json", summary)
    return EXIT_OK


def _fingerprint(cfg) -> str:
    keep = {k: v for k, v in _echo(cfg).items() if k not in ("out", "workers")}
    return hashlib.sha256(json.dumps(keep, sort_keys=True).encode()).hexdigest()


def _sweep_row(point: dict) -> str:
    fields = ("beta1", "beta2", "gamma", "survival", "ci_lo", "ci_hi", "density", "density_ci_lo", "density_ci_hi")
    return ",".join(repr(float(point[f])) for f in fields)


def cmd_sweep(cfg) -> int:
    """One row per grid point; completed points are kept as JSON markers so
    that an interrupted sweep resumes without recomputing or duplicating."""
    g = _geometry(cfg)
    _positive(cfg, "tmax", "replicas")
    grid = [(b1, b2, ga) for b1 in cfg["beta1"] for b2 in cfg["beta2"] for ga in cfg["gamma"]]
    if not grid:
        raise DomainError("the grid is empty")
    if len(set(grid)) != len(grid):
        raise DomainError("grid points must be unique")
    for b1, b2, ga in grid:
        _params(cfg, beta1=b1, beta2=b2, gamma=ga)
    out = _prepare_out(cfg["out"])
    marks = out / "sweep.points"
    marks.mkdir(exist_ok=True)
    fp = _fingerprint(cfg)
    stamp = marks / "config.sha256"
    if stamp.exists() and stamp.read_text().strip() != fp:
        raise DomainError(f"{marks} belongs to a different sweep configuration")
    _write_text(stamp, fp + "\n")

    done = {}
    for idx in range(len(grid)):
        f = marks / f"point_{idx:05d}.json"
        if f.exists():
            done[idx] = json.loads(f.read_text())

    def flush():
        rows = [SWEEP_HEADER] + [_sweep_row(done[i]) for i in sorted(done)]
        _write_text(out / "sweep.csv", "\n".join(rows) + "\n")

    flush()
    for idx, (b1, b2, ga) in enumerate(grid):
        if idx in done:
            continue
        p = _params(cfg, beta1=b1, beta2=b2, gamma=ga)
        est = survival_estimate(p, g, cfg["init"], cfg["tmax"], cfg["replicas"], seed=cfg["seed"],
                                workers=cfg["workers"], key=(idx,))
        point = {
            "beta1": b1, "beta2": b2, "gamma": ga,
            "survival": est.estimate, "ci_lo": est.ci[0], "ci_hi": est.ci[1],
            "density": est.density, "density_ci_lo": est.density_ci[0], "density_ci_hi": est.density_ci[1],
        }
        _write_json(marks / f"point_{idx:05d}.json", point)
        done[idx] = point
        flush()
    _write_json(out / "sweep.json", {"config": _echo(cfg), "points": len(grid)})
    return EXIT_OK


def cmd_meanfield(cfg) -> int:
    p = _params(cfg)
    _positive(cfg, "tmax", "dt", "every")
    out = _prepare_out(cfg["out"])
    traj = _meanfield.integrate((cfg["u1"], cfg["u2"]), p, cfg["tmax"], dt=cfg["dt"])
    report = _meanfield.fixed_points(p).as_dict()
    report["final"] = list(traj.final)
    report["converged_at"] = traj.converged_at
    report["config"] = _echo(cfg)
    _write_json(out / "meanfield.json", report)
    _write_text(out / "meanfield.csv", traj.to_csv(every=cfg["every"]))
    return EXIT_OK


def cmd_bounds(cfg) -> int:
    out = _prepare_out(cfg["out"])
    report = _bounds.bounds_report(cfg["dim"], cfg["gamma"], beta1=cfg["beta1"], radius=cfg["radius"],
                                   target_p=cfg["target"])
    report["config"] = _echo(cfg)
    _write_json(out / "bounds.json", report)
    return EXIT_OK


def cmd_couple(cfg) -> int:
    if cfg["check_tables"]:
        kinds = list(_coupling.CouplingKind) if cfg["kind"] == "all" else [_coupling.CouplingKind.parse(cfg["kind"])]
        reports = {k.value: _coupling.verify_table_closure(k).as_dict() for k in kinds}
        total = sum(len(r["violations"]) for r in reports.values())
        for name, r in reports.items():
            print(f"{name}: {r['cases']} cases, {len(r['violations'])} violations")
        if cfg["out"] != ".":
            _write_json(_prepare_out(cfg["out"]) / "closure.json", {"config": _echo(cfg), "kinds": reports})
        return EXIT_OK if total == 0 else EXIT_VIOLATIONS

    g = _geometry(cfg)
    _positive(cfg, "tmax")
    if cfg["demo_break"]:
        gp = cfg["gamma"] if cfg["prime"] is None else cfg["prime"]
        xi0 = None if cfg["init"] == "all-1" else initial_configuration(cfg["init"], g, replica_rng(cfg["seed"], 0))
        rep = _coupling.coupling_break_demo(cfg["beta1"], cfg["beta2"], cfg["gamma"], gp, g, cfg["tmax"],
                                            seed=cfg["seed"], xi0=xi0)
        out = _prepare_out(cfg["out"])
        _write_json(out / "break.json", {"config": _echo(cfg), "report": rep.as_dict(),
                                         "minimal": _coupling.minimal_break().as_dict()})
        if rep.found:
            print(f"coupling breaks: pair {rep.pair} at site {rep.site}, t={rep.time!r}")
            return EXIT_COUPLING_BREAKS
        print("no pair outside S before tmax")
        return EXIT_OK

    if cfg["kind"] == "all":
        raise DomainError("a coupled run needs a single kind")
    kind = _coupling.CouplingKind.parse(cfg["kind"])
    p = _params(cfg)
    base = {"beta1": p.beta1, "beta2": p.beta2, "gamma": p.gamma}[kind.value]
    c = _coupling.Coupling(kind, p, base if cfg["prime"] is None else cfg["prime"])
    out = _prepare_out(cfg["out"])
    runs = []
    for i in range(cfg["replicas"]):
        rng = replica_rng(cfg["seed"], i)
        xi0 = initial_configuration(cfg["init"], g, rng)
        traj = _coupling.coupled_run(c, xi0, cfg["tmax"], seed=rng, sample_dt=cfg["sample_dt"], debug=True)
        tag = "" if cfg["replicas"] == 1 else f"_{i:03d}"
        _write_text(out / f"coupled{tag}.csv", traj.to_csv())
        runs.append({"replica": i, "dominated": bool(traj.dominated.all()), "n_events": traj.n_events})
    closure = _coupling.verify_table_closure(kind).as_dict()
    _write_json(out / "couple.json", {"config": _echo(cfg), "closure": closure, "runs": runs})
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "meanfield": cmd_meanfield,
    "bounds": cmd_bounds,
    "couple": cmd_couple,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args.command, args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"asymcp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"asymcp {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
