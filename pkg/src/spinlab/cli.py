"""Command-line experiment runner.

Every subcommand reads an optional JSON config, runs one experiment and writes
CSV (plus field dumps for ``solve``) into the output directory.  Artifacts are
staged in a temporary directory and moved into place only on success.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import logging
import os
import shutil
import sys
import tempfile

import jsonschema
import numpy as np

from . import dhc, fieldio, identities, monotonicity
from .clifford import build_clifford_rep
from .models import ModelKind, ModelParams
from .solver import ContinuationError, resolve_on_grid, solve_branch
from .torus import (
    ANTIPERIODIC,
    PERIODIC,
    TorusLattice,
    build_dirac,
    constant_field,
    dirac_spectrum,
    l2_norm,
    random_bandlimited,
    resample,
)

log = logging.getLogger("spinlab")

COMMANDS = ("spectrum", "solve", "verify", "monotonicity", "dhc-verify")

_spinor = {"type": "array", "minItems": 1,
           "items": {"oneOf": [{"type": "number"},
                               {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}}
_spin = {"enum": [PERIODIC, ANTIPERIODIC]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": {"type": "integer", "minimum": 0},
        "refine": {"type": "integer", "minimum": 0, "maximum": 4},
        "out": {"type": "string"},
        "lattice": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 2, "maximum": 4},
                "size": {"type": "integer", "minimum": 4},
                "sizes": {"type": "array", "items": {"type": "integer", "minimum": 4}},
                "length": {"type": "number", "exclusiveMinimum": 0},
                "lengths": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "spin": {"oneOf": [_spin, {"type": "array", "items": _spin}]},
            },
        },
        "model": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "model": {"type": "string"},
                "lambda": {"type": "number"},
                "mu": {"type": "number"},
                "flavors": {"type": "integer", "minimum": 1},
            },
        },
        "spectrum": {
            "type": "object", "additionalProperties": False,
            "properties": {"count": {"type": "integer", "minimum": 1}},
        },
        "solver": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "mu_target": {"type": "number"},
                "steps": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "target_norm": {"type": "number", "exclusiveMinimum": 0},
                "start_index": {"type": "integer", "minimum": 0},
            },
        },
        "field": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["constant", "eigen", "solve", "random"]},
                "spinor": _spinor,
                "amplitude": {"type": "number"},
            },
        },
        "monotonicity": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 2, "maximum": 4},
                "field": {"enum": ["constant", "gaussian"]},
                "spinor": _spinor,
                "alpha": {"type": "number", "exclusiveMinimum": 0},
                "radii": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}, "minItems": 3},
                "r_min": {"type": "number", "exclusiveMinimum": 0},
                "r_max": {"type": "number", "exclusiveMinimum": 0},
                "count": {"type": "integer", "minimum": 3},
                "radial_order": {"type": "integer", "minimum": 2},
                "sphere_order": {"type": "integer", "minimum": 2},
            },
        },
        "dhc": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "target": {"enum": ["sphere", "flat"]},
                "pair": {"enum": ["constant", "wrap", "parallel"]},
                "amplitude": {"type": "number", "minimum": 0},
                "spinor": _spinor,
                "legs": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "fd_trials": {"type": "integer", "minimum": 0},
            },
        },
    },
}


class ConfigError(ValueError):
    pass


# --- config handling --------------------------------------------------------

def load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    validate(cfg)
    return cfg


def validate(cfg) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _spinor_array(entries) -> np.ndarray:
    out = []
    for e in entries:
        out.append(complex(e[0], e[1]) if isinstance(e, list) else complex(e))
    return np.array(out, dtype=complex)


def make_lattice(cfg: dict, default_spin=ANTIPERIODIC) -> TorusLattice:
    lc = cfg.get("lattice", {})
    n = lc.get("n", 2)
    sizes = lc.get("sizes", [lc.get("size", 32)] * n)
    lengths = lc.get("lengths", [lc.get("length", 2 * np.pi)] * n)
    spin = lc.get("spin", default_spin)
    spin = [spin] * n if isinstance(spin, str) else spin
    if not (len(sizes) == len(lengths) == len(spin) == n):
        raise ConfigError("lattice sizes, lengths and spin need n entries")
    try:
        return TorusLattice(n, tuple(sizes), tuple(lengths), tuple(spin))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def make_params(cfg: dict, default_mu: float = 0.0) -> tuple:
    mc = cfg.get("model", {})
    try:
        kind = ModelKind.parse(mc.get("model", "soler"))
    except ValueError as exc:
        raise ConfigError(f"unknown model {mc.get('model')!r}") from exc
    return kind, ModelParams(mc.get("lambda", 0.0), mc.get("mu", default_mu), mc.get("flavors", 1))


# --- CSV output -------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def csv_text(header, rows, digest: str) -> str:
    buf = io.StringIO()
    buf.write(f"# config-hash: {digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


class Artifacts:
    """Stage files in a temporary directory and publish them together."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files = {}

    def text(self, name, content: str):
        self.files[name] = content.encode()

    def binary(self, name, content: bytes):
        self.files[name] = content

    def publish(self):
        parent = os.path.dirname(os.path.abspath(self.out_dir)) or "."
        os.makedirs(parent, exist_ok=True)
        stage = tempfile.mkdtemp(prefix=".spinlab-", dir=parent)
        try:
            for name, data in self.files.items():
                with open(os.path.join(stage, name), "wb") as fh:
                    fh.write(data)
            os.makedirs(self.out_dir, exist_ok=True)
            for name in self.files:
                os.replace(os.path.join(stage, name), os.path.join(self.out_dir, name))
        finally:
            shutil.rmtree(stage, ignore_errors=True)
        return sorted(self.files)


def _identity_rows(checks, suffix=""):
    return [(c.name + suffix, c.value, c.tolerance, c.passed) for c in checks]


# --- subcommands ------------------------------------------------------------

def run_spectrum(cfg, art, digest):
    lat = make_lattice(cfg)
    D = build_dirac(lat, build_clifford_rep(lat.n))
    count = cfg.get("spectrum", {}).get("count", 8)
    pairs = dirac_spectrum(D, count)
    rows = []
    for i, (lam, f) in enumerate(pairs):
        res = l2_norm(D.apply(f.values) - lam * f.values, lat)
        rows.append((i, lam, abs(lam), res))
    art.text("spectrum.csv", csv_text(["index", "eigenvalue", "abs_eigenvalue", "residual"], rows, digest))
    return 0


def _solve(cfg, lat):
    kind, params = make_params(cfg)
    sc = cfg.get("solver", {})
    D = build_dirac(lat, build_clifford_rep(lat.n))
    idx = sc.get("start_index", 0)
    start = dirac_spectrum(D, idx + 1)[idx]
    state = solve_branch(D, kind, start, sc.get("mu_target", 0.5), sc.get("steps", 10),
                         sc.get("tol", 1e-8), sc.get("target_norm", 1.0), params)
    return kind, params, D, state


def _refined_states(cfg, kind, params, D, state):
    """Resample a solved state onto doubled grids and re-converge at each level."""
    tol = cfg.get("solver", {}).get("tol", 1e-8)
    out = [(D, state)]
    for _ in range(cfg.get("refine", 0)):
        D0, s0 = out[-1]
        fine = D0.lattice.with_sizes(tuple(2 * s for s in D0.lattice.sizes))
        Df = build_dirac(fine, D0.rep)
        vals = resample(s0.psi.values, D0.lattice, fine.sizes)
        out.append((Df, resolve_on_grid(Df, kind, s0, vals, tol, params)))
    return out


def run_solve(cfg, art, digest):
    lat = make_lattice(cfg)
    kind, params, D, state = _solve(cfg, lat)
    levels = _refined_states(cfg, kind, params, D, state)
    Df, final = levels[-1]
    rows = [(mu, lam, res, lat.sizes[0]) for mu, lam, res in state.history]
    for Dl, s in levels[1:]:
        rows.append((s.mu, s.lam, s.residual_norm, Dl.lattice.sizes[0]))
    art.text("branch.csv", csv_text(["mu", "lambda", "residual", "grid"], rows, digest))
    art.binary("solution.spnf", fieldio.dumps(final.psi))
    sidecar = {"lambda": final.lam, "mu": final.mu, "residual": final.residual_norm,
               "target_norm": final.target_norm, "model": kind.value,
               "grid": list(Df.lattice.sizes), "config_hash": digest}
    art.text("solution.json", json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return 0


def _verify_field(cfg, lat):
    kind, params = make_params(cfg)
    if kind is not ModelKind.SOLER:
        raise ConfigError("verify checks the Soler identities; set model to soler")
    fc = cfg.get("field", {})
    what = fc.get("kind", "constant")
    if what == "constant":
        kind, params = make_params(cfg, default_mu=1.0)
    D = build_dirac(lat, build_clifford_rep(lat.n))
    if what == "constant":
        c = _spinor_array(fc.get("spinor", [0.6, 0.0] + [0.0] * (D.spinor_dim - 2)))
        if c.size != D.spinor_dim:
            raise ConfigError(f"spinor needs {D.spinor_dim} components")
        mc = cfg.get("model", {})
        lam = mc.get("lambda", -params.mu * float(np.vdot(c, c).real))
        return [(D, constant_field(lat, c), ModelParams(lam, params.mu))]
    if what == "eigen":
        lam, f = dirac_spectrum(D, 1)[0]
        return [(D, f, ModelParams(lam, 0.0))]
    if what == "random":
        rng = np.random.default_rng(cfg.get("seed", 0))
        f = random_bandlimited(lat, rng, (), D.spinor_dim, 2) * fc.get("amplitude", 0.1)
        return [(D, f, params)]
    kind, params, D, state = _solve(cfg, lat)
    out = []
    for Dl, s in _refined_states(cfg, kind, params, D, state):
        out.append((Dl, s.psi, ModelParams(s.lam, s.mu)))
    return out


def run_verify(cfg, art, digest):
    lat = make_lattice(cfg, default_spin=PERIODIC)
    rows = []
    for D, psi, p in _verify_field(cfg, lat):
        suffix = "" if D.lattice.sizes == lat.sizes else f"@{D.lattice.sizes[0]}"
        rows += _identity_rows(identities.verify_identities(psi, p, D), suffix)
    art.text("identities.csv", csv_text(["name", "value", "tolerance", "pass"], rows, digest))
    return 0 if all(r[3] for r in rows) else 1


def run_monotonicity(cfg, art, digest):
    mc = cfg.get("monotonicity", {})
    n = mc.get("n", 3)
    rep = build_clifford_rep(n)
    c = _spinor_array(mc.get("spinor", [0.6] + [0.0] * (rep.spinor_dim - 1)))
    if c.size != rep.spinor_dim:
        raise ConfigError(f"spinor needs {rep.spinor_dim} components in n={n}")
    kind, params = make_params(cfg, default_mu=1.0)
    if mc.get("field", "constant") == "constant":
        field = monotonicity.constant_spinor(c)
        lam = cfg.get("model", {}).get("lambda", -params.mu * float(np.vdot(c, c).real))
        params = ModelParams(lam, params.mu)
    else:
        field = monotonicity.gaussian_spinor(c, mc.get("alpha", 1.0))
    radii = mc.get("radii")
    if radii is None:
        radii = np.linspace(mc.get("r_min", 0.25), mc.get("r_max", 5.0), mc.get("count", 20))
    prof = monotonicity.radial_profile(field, n, params, radii, mc.get("radial_order", 24),
                                       mc.get("sphere_order", 12))
    res = monotonicity.monotonicity_residual(prof, params)
    rows = zip(prof.radii, prof.ball_l4, prof.ball_l2, prof.sphere_l4, prof.flux, res.residual)
    art.text("monotonicity.csv", csv_text(["r", "ball_l4", "ball_l2", "sphere_l4", "flux", "residual"],
                                          list(rows), digest))
    return 0


def run_dhc(cfg, art, digest):
    dc = cfg.get("dhc", {})
    lat = make_lattice(cfg, default_spin=PERIODIC)
    if lat.n != 2:
        raise ConfigError("dhc-verify runs on 2-tori")
    target = dhc.sphere_target() if dc.get("target", "sphere") == "sphere" else dhc.flat_target(3)
    D = build_dirac(lat, build_clifford_rep(2))
    rng = np.random.default_rng(cfg.get("seed", 0))
    pair = dc.get("pair", "wrap")
    amp = dc.get("amplitude", 0.0)
    if pair == "parallel" or (pair == "wrap" and amp > 0):
        if lat.spin_structure[0] != PERIODIC:
            raise ConfigError("the parallel wrap pair needs a periodic spin structure along the first axis")
        u = _spinor_array(dc.get("spinor", [1.0, 0.0]))
        a, b = dc.get("legs", [0.6, 0.8])
        phi, psi = dhc.parallel_wrap_pair(lat, amp * u, a, b)
    elif pair == "wrap":
        phi = dhc.equator_wrap(lat)
        psi = dhc.VectorSpinorField(lat, np.zeros(lat.sizes + (3, 2), complex))
    else:
        y = np.zeros(lat.sizes + (3,))
        y[..., 2] = 1.0
        phi = dhc.MapField(lat, y)
        psi = dhc.VectorSpinorField(lat, np.zeros(lat.sizes + (3, 2), complex))
    tol = 1e-10
    m, s = dhc.residual_norms(phi, psi, target, D)
    stress = dhc.dhc_stress_energy(phi, psi, target, D)
    spin_b, map_b = dhc.dhc_bochner_residuals(phi, psi, target, D)
    rows = [
        ("tangency", dhc.tangency_defect(target, phi, psi.values), 1e-9),
        ("map_residual", m, tol),
        ("spinor_residual", s, tol),
        ("trace_defect", float(np.max(np.abs(stress.trace_defect))), 1e-10),
        ("divergence_sup", stress.divergence_sup, 1e-8),
        ("spinor_bochner_sup", float(np.max(np.abs(spin_b))), 1e-8),
        ("map_bochner_sup", float(np.max(np.abs(map_b))), 1e-8),
        ("weitzenboeck", dhc.weitzenboeck_residual(phi, psi, target, D), 1e-8),
    ]
    # gradient oracle on a random smooth pair
    rphi, rpsi = dhc.random_smooth_pair(lat, target, rng)
    worst = 0.0
    for _ in range(dc.get("fd_trials", 3)):
        V, Xi = dhc.random_tangent_direction(rphi, target, rng)
        fd = dhc.finite_difference_gradient(rphi, rpsi, target, D, V, Xi)
        an = dhc.residual_pairing(rphi, rpsi, target, D, V, Xi)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    rows.append(("fd_gradient_rel", worst, 1e-5))
    c1, c2 = dhc.liouville_constants(target.sup_bounds, lat.n)
    exp1, exp2 = (1.125, 1.5) if target.name == "sphere" else (0.0, 1.0)
    rows.append(("liouville_c1", abs(c1 - exp1), 1e-12))
    rows.append(("liouville_c2", abs(c2 - exp2), 1e-12))
    out = [(name, value, t, bool(value <= t)) for name, value, t in rows]
    art.text("dhc.csv", csv_text(["name", "value", "tolerance", "pass"], out, digest))
    return 0 if all(r[3] for r in out) else 1


RUNNERS = {"spectrum": run_spectrum, "solve": run_solve, "verify": run_verify,
           "monotonicity": run_monotonicity, "dhc-verify": run_dhc}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinlab", description="Nonlinear Dirac experiments on flat tori.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    helps = {
        "spectrum": "lowest Dirac eigenvalues on a torus",
        "solve": "continue an eigenpair to a nonlinear solution",
        "verify": "check stress-energy, Bochner and pairing identities",
        "monotonicity": "radial ball integrals and the monotonicity residual on R^n",
        "dhc-verify": "check a Dirac-harmonic map with curvature term",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", metavar="PATH", help="JSON experiment config")
        p.add_argument("--out", metavar="DIR", help="output directory (default: out)")
        p.add_argument("--seed", type=int, help="seed for random test fields")
        p.add_argument("--refine", type=int, help="number of grid doublings")
        p.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        cfg = copy.deepcopy(cfg)
        if cfg.get("command", args.command) != args.command:
            raise ConfigError(f"config is for {cfg['command']!r}, not {args.command!r}")
        cfg["command"] = args.command
        for key in ("seed", "refine", "out"):
            val = getattr(args, key)
            if val is not None:
                cfg[key] = val
        validate(cfg)
    except ConfigError as exc:
        print(f"spinlab: {exc}", file=sys.stderr)
        return 2
    out_dir = cfg.pop("out", "out")
    digest = config_hash(cfg)
    art = Artifacts(out_dir)
    try:
        status = RUNNERS[args.command](cfg, art, digest)
    except ConfigError as exc:
        print(f"spinlab: {exc}", file=sys.stderr)
        return 2
    except ContinuationError as exc:
        res = exc.state.residual_norm if exc.state is not None else float("nan")
        print(f"spinlab: solver failed: {exc} (last accepted mu={getattr(exc.state, 'mu', float('nan'))}, "
              f"residual={res:.3e})", file=sys.stderr)
        return 3
    for name in art.publish():
        log.info("wrote %s", os.path.join(out_dir, name))
    return status


if __name__ == "__main__":
    sys.exit(main())
