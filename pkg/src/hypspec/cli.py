"""hypspec command-line front end.

Every subcommand writes CSV (to --output or stdout) whose first lines are
'#' comments recording the artifact version and the fully resolved
configuration.  Options may also come from a flat key=value file given with
--config; flags on the command line win over the file.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 a checked inequality failed (the witness is printed to stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import bounds, fuchsian, kernels, multicurves, selberg, volumes
from .errors import CertificateViolation, ConfigError, HypspecError, NumericError
from .hyperbolic import Point

WORKERS_ENV = "HYPSPEC_WORKERS"

# subcommand -> {option: (type, default, help)}
COMMON = {
    "output": (str, "-", "output file ('-' for stdout)"),
    "seed": (int, 0, "seed for randomized sampling"),
    "workers": (int, None, f"worker threads (default ${WORKERS_ENV} or 1)"),
}

OPTIONS = {
    "loop-census": {
        "surface": (str, None, "surface file (default: bundled Bolza surface)"),
        "x": (float, None, "point real part (default: base point)"),
        "y": (float, None, "point imaginary part"),
        "L": (float, 4.0, "length cap"),
        "budget": (int, fuchsian.DEFAULT_BUDGET, "element budget"),
    },
    "lattice-ball": {
        "surface": (str, None, "surface file"),
        "zx": (float, None, "centre z, real part"),
        "zy": (float, None, "centre z, imaginary part"),
        "wx": (float, None, "orbit point w, real part"),
        "wy": (float, None, "orbit point w, imaginary part"),
        "r": (float, 3.0, "radius"),
        "budget": (int, fuchsian.DEFAULT_BUDGET, "element budget"),
    },
    "certify-growth": {
        "surface": (str, None, "surface file"),
        "R": (float, 4.0, "largest radius"),
        "delta_grid": (str, "0.5,1.0", "comma list of exponents delta"),
        "r_step": (float, 0.5, "radius step"),
        "n_radial": (int, 1, "radial rings of the deterministic domain sample"),
        "n_angular": (int, 4, "points per ring"),
        "random_points": (int, 0, "extra uniformly drawn domain points (uses --seed)"),
        "budget": (int, fuchsian.DEFAULT_BUDGET, "element budget"),
    },
    "selberg": {
        "kernel": (str, "h", "'h' (h_t multiplier) or 'ball' (ball kernel)"),
        "direction": (str, "roundtrip", "forward, inverse or roundtrip"),
        "t": (float, 2.0, "kernel parameter t"),
        "grid": (str, "0:10:0.5", "evaluation grid a:b:step or comma list"),
        "band": (float, kernels.DEFAULT_BAND, "strip half-width beyond 1/2"),
    },
    "kernel-check": {
        "t_grid": (str, "1:8:1", "t grid a:b:step or comma list"),
        "band": (float, kernels.DEFAULT_BAND, "strip half-width beyond 1/2"),
        "max_drift": (float, 100.0, "allowed factor between a ratio and its first value"),
        "check": (str, "bl", "'bl' (kernel size ratios) or 'linearisation' (product identity residuals)"),
        "s_grid": (str, "0,0.7,1.3,2,5", "s grid for the linearisation table"),
        "r_grid": (str, "0,0.5,1,3,8", "real r grid for the linearisation table"),
        "ir_grid": (str, "0.1,0.3,0.5", "imaginary parts added to the r grid"),
    },
    "wp-check": {
        "table": (str, None, "volume table CSV (default: bundled table)"),
        "L_grid": (str, "0,0.5,1,2,5,10,20", "boundary lengths for the length estimate"),
    },
    "multicurve-prob": {
        "table": (str, None, "volume table CSV"),
        "b": (float, 0.004, "injectivity exponent b"),
        "c": (float, 0.01, "length factor c"),
        "d": (float, 0.01, "component exponent d (> 2b)"),
        "kappa": (float, multicurves.KAPPA, "constant in K(g)"),
        "mode": (str, "verbatim", "measure factor: verbatim or simplex"),
        "delta": (float, None, "delta_univ (default: fitted on the g-grid)"),
        "g_grid": (str, None, "genera (default: every closed genus in the table)"),
    },
    "lp-bound": {
        "regime": (str, "tempered", "tempered or untempered"),
        "p": (float, math.inf, "Lebesgue exponent (inf allowed)"),
        "lambda": (float, 0.25, "eigenvalue"),
        "R": (float, 64.0, "radius R (ignored when --g is given)"),
        "C": (float, 1.0, "growth constant C(X) (ignored when --g is given)"),
        "beta": (float, 0.0, "spectral-gap parameter beta"),
        "delta": (float, 0.01, "growth exponent delta"),
        "epsilon": (float, None, "untempered gap epsilon (default 1/4 - lambda)"),
        "g": (int, None, "genus: report for a random surface with R = c log g"),
        "b": (float, 0.1, "injectivity exponent b"),
        "c": (float, 1.0, "length factor c"),
        "alpha": (float, None, "use InjRad = (log g)^-alpha instead of g^-b"),
        "delta_univ": (float, None, "attach the probability bound with this delta"),
    },
}


# ------------------------------------------------------------ config

def _flag(name):
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypspec", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"hypspec {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for cmd, opts in OPTIONS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None, help="flat key=value config file")
        for name, (typ, default, text) in {**opts, **COMMON}.items():
            sp.add_argument(_flag(name), dest=name, type=typ, default=argparse.SUPPRESS,
                            help=f"{text} [default: {default}]")
    return ap


def read_config_file(path, allowed) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    out = {}
    for lineno, raw in enumerate(p.read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in allowed:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        typ = allowed[key][0]
        try:
            out[key] = typ(val)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {val!r}") from None
    return out


def resolve(args: argparse.Namespace) -> dict:
    cmd = args.subcommand
    allowed = {**OPTIONS[cmd], **COMMON}
    cfg = {k: v[1] for k, v in allowed.items()}
    if args.config:
        cfg.update(read_config_file(args.config, allowed))
    for k in allowed:
        if hasattr(args, k):
            cfg[k] = getattr(args, k)
    if cfg["workers"] is None:
        try:
            cfg["workers"] = int(os.environ.get(WORKERS_ENV, "1"))
        except ValueError:
            raise ConfigError(f"${WORKERS_ENV} must be an integer") from None
    if cfg["workers"] < 1:
        raise ConfigError("workers must be at least 1")
    for key in ("surface", "table"):
        if key in cfg:
            if cfg[key] is None:
                cfg[key] = (fuchsian.bundled_surface_path() if key == "surface"
                            else str(volumes.bundled_table_path()))
            cfg[key] = str(Path(cfg[key]).resolve())
    if cfg["output"] != "-":
        cfg["output"] = str(Path(cfg["output"]).resolve())
    return cfg


def parse_grid(text: str) -> list:
    text = text.strip()
    try:
        if ":" in text:
            a, b, step = (float(s) for s in text.split(":"))
            if step <= 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9))
            return [a + i * step for i in range(n + 1)]
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; use a:b:step or a comma list") from None


# ------------------------------------------------------------ output

def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


class Report:
    def __init__(self, cmd, cfg):
        self.header = [f"hypspec {__version__}", f"subcommand={cmd}"]
        self.header += [f"{k}={_fmt(cfg[k])}" for k in sorted(cfg)]
        self.notes = []
        self.columns = []
        self.rows = []

    def note(self, text):
        self.notes.append(text)

    def render(self) -> str:
        buf = io.StringIO()
        for line in self.header + self.notes:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        if self.columns:
            w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _emit(text, path):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _point(G, x, y):
    if x is None and y is None:
        return G.base_point
    if x is None or y is None:
        raise ConfigError("give both coordinates of a point")
    return Point(x, y)


# ------------------------------------------------------------ commands

def cmd_loop_census(cfg, rep):
    G = fuchsian.load_surface_spec(cfg["surface"])
    z = _point(G, cfg["x"], cfg["y"])
    res = fuchsian.loop_census(G, z, cfg["L"], cfg["budget"])
    rep.note(f"primitive_loops={res.count}")
    rep.columns = ["word", "a", "b", "c", "d", "length"]
    for (word, m), d in res.primitive_loops:
        rep.rows.append([" ".join(map(str, word)), m.a, m.b, m.c, m.d, d])


def cmd_lattice_ball(cfg, rep):
    G = fuchsian.load_surface_spec(cfg["surface"])
    z = _point(G, cfg["zx"], cfg["zy"])
    w = _point(G, cfg["wx"], cfg["wy"])
    res = fuchsian.enumerate_ball(G, z, w, cfg["r"], cfg["budget"])
    rep.note(f"count={res.count}")
    rep.columns = ["word", "a", "b", "c", "d", "distance"]
    for word, m, d in res.elements:
        rep.rows.append([" ".join(map(str, word)), m.a, m.b, m.c, m.d, d])


def _random_domain_points(G, n, seed):
    rng = np.random.default_rng(seed)
    out = []
    rmax = 0.5 * G.domain_diameter
    while len(out) < n:
        rho = rmax * math.sqrt(rng.random())
        th = 2 * math.pi * rng.random()
        t = math.tanh(rho / 2) * complex(math.cos(th), math.sin(th))
        zz = 1j * (1 + t) / (1 - t)
        zz = G.base_point.x + G.base_point.y * zz
        if fuchsian.in_domain(G, zz, slack=1e-9):
            out.append(Point(zz.real, zz.imag))
    return out


def cmd_certify_growth(cfg, rep):
    G = fuchsian.load_surface_spec(cfg["surface"])
    pts = fuchsian.domain_sample(G, cfg["n_radial"], cfg["n_angular"])
    pts += _random_domain_points(G, cfg["random_points"], cfg["seed"])
    cert = fuchsian.certify_growth(G, cfg["R"], parse_grid(cfg["delta_grid"]), pts,
                                   cfg["r_step"], cfg["budget"])
    rep.note(f"injrad_sample={cert.injrad!r}")
    rep.note(f"C_of_X={cert.C_of_X!r}")
    for d in sorted(cert.C0_of_delta):
        rep.note(f"C0[{d!r}]={cert.C0_of_delta[d]!r}")
    rep.columns = ["zx", "zy", "wx", "wy", "r", "count_half_r", "rhs", "holds"]
    for p, q, r, half, rhs, ok in cert.inequality_rows:
        rep.rows.append([p.x, p.y, q.x, q.y, r, half, rhs, int(ok)])


def cmd_selberg(cfg, rep):
    t, band = cfg["t"], cfg["band"]
    grid = np.array(parse_grid(cfg["grid"]))
    direction, kind = cfg["direction"], cfg["kernel"]
    if direction not in ("forward", "inverse", "roundtrip"):
        raise ConfigError(f"unknown direction {direction!r}")
    if kind not in ("h", "ball"):
        raise ConfigError(f"unknown kernel {kind!r}")
    if kind == "ball":
        if direction != "forward":
            raise ConfigError("the ball kernel supports the forward direction only")
        h = selberg.forward_transform(selberg.ball_kernel(t))
        rep.columns = ["r", "h", "closed_form_integral", "abs_diff"]
        vals = h(grid).real
        ref = np.atleast_1d(kernels.ball_transform(t, grid)).real
        for r, v, c in zip(grid, vals, ref):
            rep.rows.append([float(r), float(v), float(c), float(abs(v - c))])
        return
    hm = kernels.h_multiplier(t, band)
    if direction == "inverse":
        k = selberg.inverse_transform(hm)
        rep.columns = ["rho", "k"]
        for rho, v in zip(grid, k(grid)):
            rep.rows.append([float(rho), float(v)])
        return
    k = selberg.inverse_transform(hm)
    if direction == "forward":
        rep.columns = ["r", "h"]
        for r, v in zip(grid, hm(grid).real):
            rep.rows.append([float(r), float(v)])
        return
    back = selberg.forward_transform(k)
    rep.columns = ["r", "h", "forward_inverse_h", "abs_diff"]
    a, b = hm(grid).real, back(grid).real
    rep.note(f"max_abs_diff={float(np.max(np.abs(a - b)))!r}")
    for r, x, y in zip(grid, a, b):
        rep.rows.append([float(r), float(x), float(y), float(abs(x - y))])


def cmd_kernel_check(cfg, rep):
    if cfg["check"] == "linearisation":
        return _linearisation_table(cfg, rep)
    if cfg["check"] != "bl":
        raise ConfigError(f"unknown check {cfg['check']!r}")
    rows = kernels.bl_check(parse_grid(cfg["t_grid"]), cfg["band"], cfg["workers"])
    rep.columns = ["t", "sup", "tail", "sup_ratio", "tail_ratio"]
    for r in rows:
        rep.rows.append([r.t, r.sup, r.tail, r.ratio_sup, r.ratio_tail])
    consts = kernels.calibrate_constants(rows)
    for k in sorted(consts):
        rep.note(f"{k}={consts[k]!r}")
    if not rows:
        return
    lim = cfg["max_drift"]
    s0, t0 = rows[0].ratio_sup, rows[0].ratio_tail
    for r in rows:
        for name, v, v0 in (("sup", r.ratio_sup, s0), ("tail", r.ratio_tail, t0)):
            if not v0 / lim <= v <= v0 * lim:
                raise CertificateViolation(
                    f"{name} ratio at t={r.t} drifts beyond factor {lim}", (r.t, name, v, v0))


def _linearisation_table(cfg, rep):
    rs = [complex(r) for r in parse_grid(cfg["r_grid"])]
    rs += [complex(0.0, b) for b in parse_grid(cfg["ir_grid"])]
    rep.columns = ["t", "s", "r_real", "r_imag", "residual"]
    worst = 0.0
    for t in parse_grid(cfg["t_grid"]):
        for s in parse_grid(cfg["s_grid"]):
            for r in rs:
                res = kernels.linearisation_residual(t, s, r)
                worst = max(worst, res)
                rep.rows.append([t, s, r.real, r.imag, res])
    rep.note(f"max_residual={worst!r}")


def cmd_wp_check(cfg, rep):
    table = volumes.load_volume_table(cfg["table"])
    rep.note(f"v11_convention={table.meta.get('v11_convention', 'unknown')}")
    rep.note(f"fitted_C={table.fitted_C!r}")
    rep.note(f"fitted_D={table.fitted_D!r}")
    rep.columns = ["check", "g", "n", "param", "lhs", "rhs", "holds"]
    bad = None
    for row in volumes.boundary_length_sweep(table, parse_grid(cfg["L_grid"])):
        rep.rows.append(["length", row.g, row.n, ":".join(map(repr, row.L)), row.lhs, row.rhs, int(row.holds)])
        if not row.holds and bad is None:
            bad = ("length", row)
    vmax, arg, rel = volumes.volume_relation_sweep(table)
    rep.note(f"relation_max={vmax!r} at (g,n,i)={arg}")
    for g, n, i, ratio in rel:
        rep.rows.append(["relation", g, n, i, ratio, vmax, int(ratio <= vmax * (1 + volumes.SLACK))])
    for g, ratio in volumes.mz_ratio_profile(table):
        rep.rows.append(["mz_ratio", g, 0, "", ratio, table.fitted_C, 1])
    if bad is not None:
        raise CertificateViolation(f"length estimate fails at {bad[1]}", bad[1])


def cmd_multicurve_prob(cfg, rep):
    table = volumes.load_volume_table(cfg["table"])
    b, c, d = cfg["b"], cfg["c"], cfg["d"]
    if cfg["g_grid"] is None:
        genera = [g for g in table.genera if g >= 2 and (g, 0) in table.entries]
    else:
        genera = [int(x) for x in parse_grid(cfg["g_grid"])]
    delta = cfg["delta"]
    if delta is None:
        delta, _ = multicurves.fit_delta(table, c, d, b, genera, cfg["kappa"], cfg["mode"])
        rep.note(f"fitted_delta={delta!r}")
    rep.note(f"fitted_D={table.fitted_D!r}")
    rep.columns = ["g", "K", "explicit_log_bound", "envelope_log_bound",
                   "cosh_envelope_log_bound", "final_probability", "used_asymptotic"]
    bad = None
    for g in genera:
        pp = multicurves.ProbabilityParams(g, b, c, d, delta_univ=delta, D=table.fitted_D,
                                           kappa=cfg["kappa"])
        res = multicurves.expected_multicurve_bound(pp, table, cfg["mode"])
        fin = multicurves.final_probability_bound(pp)
        rep.rows.append([g, res.K, res.log_explicit, res.log_envelope, res.log_cosh_envelope,
                         fin.value, int(res.used_asymptotic)])
        if res.log_explicit > res.log_envelope and bad is None:
            bad = (g, res.log_explicit, res.log_envelope)
    if bad is not None:
        raise CertificateViolation(f"explicit sum exceeds the envelope at g={bad[0]}", bad)


def cmd_lp_bound(cfg, rep):
    eps = cfg["epsilon"]
    params = kernels.EigenvalueParams.from_lambda(cfg["lambda"], cfg["beta"], eps)
    regime = cfg["regime"]
    if regime not in ("tempered", "untempered"):
        raise ConfigError(f"unknown regime {regime!r}")
    if (regime == "tempered") != params.tempered:
        raise ConfigError(f"lambda = {cfg['lambda']} is not in the {regime} range")
    if cfg["g"] is not None:
        out = bounds.random_surface_report(cfg["g"], cfg["b"], cfg["c"], params, cfg["p"],
                                           delta=cfg["delta"], alpha=cfg["alpha"],
                                           delta_univ=cfg["delta_univ"])
    else:
        R = cfg["R"]
        inputs = kernels.OperatorBoundInputs(cfg["C"], R, R / 8.0, cfg["p"], cfg["delta"])
        if regime == "tempered":
            out = bounds.tempered_bound(inputs, params)
        else:
            out = bounds.untempered_bound(inputs, params)
    rep.note(f"regime={out.regime}")
    rep.note(f"bound_value={out.bound_value!r}")
    if out.probability is not None:
        rep.note(f"failure_probability={out.probability.value!r}")
    for k in sorted(out.notes):
        rep.note(f"{k}={_fmt(out.notes[k])}")
    rep.columns = ["factor", "value", "source"]
    for name, val, src in out.rows():
        rep.rows.append([name, val, src])
    rep.text = _aligned(out)


def _aligned(out) -> str:
    lines = [f"{out.regime} bound, p = {out.p}: {out.bound_value:.12g}"]
    w = max(len(f.name) for f in out.factors)
    for f in out.factors:
        lines.append(f"  {f.name:<{w}}  {f.value:>20.12g}  {f.source}")
    if out.probability is not None:
        lines.append(f"  failure probability envelope: {out.probability.value:.6g}")
    return "\n".join(lines) + "\n"


COMMANDS = {
    "loop-census": cmd_loop_census,
    "lattice-ball": cmd_lattice_ball,
    "certify-growth": cmd_certify_growth,
    "selberg": cmd_selberg,
    "kernel-check": cmd_kernel_check,
    "wp-check": cmd_wp_check,
    "multicurve-prob": cmd_multicurve_prob,
    "lp-bound": cmd_lp_bound,
}


def run(cfg: dict, cmd: str) -> int:
    rep = Report(cmd, cfg)
    rep.text = None
    COMMANDS[cmd](cfg, rep)
    if cmd == "lp-bound":
        sys.stdout.write(rep.text)
        if cfg["output"] != "-":
            _emit(rep.render(), cfg["output"])
    else:
        _emit(rep.render(), cfg["output"])
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        return run(cfg, args.subcommand)
    except CertificateViolation as exc:
        print(f"hypspec: certificate violation: {exc}", file=sys.stderr)
        if exc.witness is not None:
            print(f"hypspec: witness: {exc.witness}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"hypspec: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"hypspec: numerical failure: {exc}", file=sys.stderr)
        return 3
    except HypspecError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"hypspec: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
