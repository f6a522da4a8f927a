"""Command-line front end.

    shearwave <command> --config run.json [--out DIR] [--tol X] [--grid N1xN2xN3] [--quiet]

Commands: dispersion-scan, calibrate, kernel, verify, probe, obstruct, report.
Every command writes ``<command>.json`` into the output directory (schema
version, config hash and results); tables go to CSV, profiles to plain
whitespace-separated plot-data files.  Outputs contain no timestamps so that
identical configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .config import SCHEMA_VERSION, RunConfig, parse_grid
from .dispersion import calibrate_sigma, dispersion_residual, find_kernel_set, kernel_cutoff_radius, scan
from .errors import ConfigError, ShearwaveError
from .fields import assemble_kernel, trivial_state
from .obstruction import averaged_bilinears, solvability_average, theorem_verdict
from .residuals import linear_residual, nonlinear_residual, order_scaling_probe
from .spectral import VerticalGrid, dump_grid, synthesize

COMMANDS = ("dispersion-scan", "calibrate", "kernel", "verify", "probe", "obstruct", "report")
SCAN_COLUMNS = ("k1", "k2", "|k|", "q0", "rhs", "residual")
PROBE_COLUMNS = ("eps", "momentum", "divergence", "kinematic_top", "kinematic_bottom", "dynamic")


def _clean(obj):
    """JSON-safe copy: numpy scalars to float, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


class Run:
    """Lazily evaluated pipeline stages for one configuration."""

    def __init__(self, cfg, out, quiet=False):
        self.cfg = cfg
        self.out = Path(out)
        self.quiet = quiet
        self.profile = cfg.profile()
        self.lattice = cfg.lattice()
        self._sigma = None
        self._resonant = None
        self._kernel = None

    def say(self, *args):
        if not self.quiet:
            print(*args)

    # stages -------------------------------------------------------------
    @property
    def sigma(self):
        if self._sigma is None:
            target = self.cfg.calibrate_target
            if target is not None:
                g = self.cfg.data["params"]["g"]
                self._sigma = calibrate_sigma(self.profile, g, self.lattice, target, tol=self.cfg.tol)
            else:
                self._sigma = self.cfg.data["params"].get("sigma")
        return self._sigma

    @property
    def params(self):
        return self.cfg.params(self.sigma)

    @property
    def vgrid(self):
        return VerticalGrid.chebyshev(self.profile.depth, self.cfg.grid[2])

    @property
    def resonant(self):
        if self._resonant is None:
            self._resonant = find_kernel_set(self.profile, self.params, self.lattice,
                                             membership_tol=self.cfg.membership_tol, tol=self.cfg.tol)
        return self._resonant

    @property
    def kernel(self):
        if self._kernel is None:
            self._kernel = assemble_kernel(self.profile, self.params, self.resonant, self.cfg.amplitudes(),
                                           self.vgrid, tol=self.cfg.tol)
        return self._kernel

    # output -------------------------------------------------------------
    def envelope(self, command, result, files=()):
        return {
            "schema_version": SCHEMA_VERSION,
            "package_version": __version__,
            "command": command,
            "config_hash": self.cfg.hash,
            "result": _clean(result),
            "files": sorted(Path(f).relative_to(self.out).as_posix() for f in files),
        }

    def write_json(self, name, doc):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return path

    def write_csv(self, name, columns, rows):
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([repr(float(v)) for v in r])
        return path

    def write_columns(self, name, header, cols):
        """Plain-text (x, y, ...) columns for external plotting."""
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        np.savetxt(path, np.column_stack(cols), header=" ".join(header), fmt="%.17g")
        return path


# commands -------------------------------------------------------------------

def cmd_dispersion_scan(run):
    radius = kernel_cutoff_radius(run.profile, run.params, run.lattice)
    rows = scan(run.profile, run.params, run.lattice, radius, tol=run.cfg.tol)
    csv_path = run.write_csv("dispersion_scan.csv", SCAN_COLUMNS,
                             [(r["k1"], r["k2"], r["kabs"], r["q0"], r["rhs"], r["residual"]) for r in rows])
    res = {"cutoff_radius": radius, "sigma": run.sigma, "modes_scanned": len(rows),
           "min_abs_residual": min((abs(r["residual"]) for r in rows), default=None)}
    run.say(f"scanned {len(rows)} modes within |k| <= {radius:.6g}; table in {csv_path}")
    return res, [csv_path]


def cmd_calibrate(run):
    target = run.cfg.calibrate_target
    if target is None:
        raise ConfigError("params.calibrate", "the calibrate command needs a target mode")
    sigma = run.sigma
    k = run.lattice.k(*target)
    resid = dispersion_residual(run.profile, run.params, k, tol=run.cfg.tol)
    run.say(f"sigma = {sigma:.12g}")
    run.say(f"residual at k = ({k[0]:.6g}, {k[1]:.6g}): {resid:.3e}")
    return {"target": list(target), "k": list(k), "sigma": sigma, "residual": resid}, []


def cmd_kernel(run):
    kf = run.kernel
    n1, n2, _ = run.cfg.grid
    files = []
    named = {"eta1": [kf.eta1], "wp1": [kf.wp1], "u1": list(kf.u1), "v1": list(kf.v1)}
    for name, comps in named.items():
        for c, f in enumerate(comps):
            label = name if len(comps) == 1 else f"{name}_{c + 1}"
            files.extend(dump_grid(run.out / "kernel" / label, synthesize(f, n1, n2), label))
    res = {"resonant_set": run.resonant.to_dict(), "sigma": run.sigma,
           "modes": [{"index": list(m.index), "a": m.amplitude, "Q0": float(m.Q[-1])} for m in kf.modes]}
    run.say(f"kernel with {len(kf.modes)} mode(s) written to {run.out / 'kernel'}")
    return res, files


def _trivial(run):
    mod = run.cfg.modulation
    prof = run.profile
    k2 = run.lattice.kappa2
    return trivial_state(lambda x2, x3: prof(x3) * (1.0 + mod * np.cos(k2 * x2)), run.lattice, run.vgrid,
                         n2=max(run.cfg.grid[1], 4))


def cmd_verify(run, state="auto"):
    n1, n2, _ = run.cfg.grid
    if state == "auto":
        amps = run.cfg.amplitudes()
        state = "linear" if amps.nonzero() or amps.a0 or amps.w else "trivial"
    if state == "trivial":
        rep = nonlinear_residual(_trivial(run), run.params, n1, n2)
    elif state == "linear":
        rep = linear_residual(run.kernel, run.profile, run.params)
    else:
        raise ConfigError("--state", f"unknown state {state!r}")
    res = {"state": state, "report": rep.to_dict()}
    run.say(json.dumps(_clean(rep.norms()), indent=2, sort_keys=True))
    return res, []


def cmd_probe(run):
    n1, n2, _ = run.cfg.grid
    pr = order_scaling_probe(run.profile, run.params, run.kernel, run.cfg.eps, n1, n2)
    rows = [tuple(r[c] for c in PROBE_COLUMNS) for r in pr.rows()]
    path = run.write_csv("probe.csv", PROBE_COLUMNS, rows)
    run.say("exact solution: all residuals below tolerance" if pr.exact else f"slope = {pr.slope:.6f}")
    return {"slope": pr.slope, "exact_solution": pr.exact, "eps": pr.eps}, [path]


def cmd_obstruct(run):
    amps = run.cfg.amplitudes()
    v = theorem_verdict(run.profile, run.params, run.lattice, amps if amps.nonzero() else None,
                        membership_tol=run.cfg.membership_tol, tol=run.cfg.tol)
    pf = v.profile_f
    files = [run.write_columns("obstruction_f.dat", ["x3", "f", "df", "Uprime_f"],
                               [pf.nodes, pf.f, pf.df, pf.Uprime_f])]
    used = amps if amps.nonzero() else None
    res = v.to_dict()
    if used is not None and any(i > 0 and j > 0 for i, j in used.nonzero()):
        sv = solvability_average(run.profile, run.lattice, used, run.vgrid)
        ab = averaged_bilinears(run.profile, run.lattice, used, run.vgrid)
        res["solvability"] = {"max_abs": sv.max_abs, "abs_error": sv.abs_error, "rel_error": sv.rel_error}
        res["bilinears_max_error"] = ab.max_error()
        # x2 profile of the solvability expression at the node where it peaks
        col = int(np.argmax(np.abs(sv.closed).max(axis=0)))
        files.append(run.write_columns("solvability_x2.dat", ["x2", "numeric", "closed"],
                                       [sv.x2, sv.numeric[:, col], sv.closed[:, col]]))
    run.say(f"{v.classification}: max|U'f| = {v.max_abs_Uprime_f:.6g}, ratio = {v.ratio:.6g}")
    return res, files


def cmd_report(run):
    bundle, files = {}, []
    steps = [("dispersion-scan", cmd_dispersion_scan)]
    if run.cfg.calibrate_target is not None:
        steps.append(("calibrate", cmd_calibrate))
    steps.append(("verify-trivial", lambda r: cmd_verify(r, "trivial")))
    amps = run.cfg.amplitudes()
    if amps.nonzero() or amps.a0 or amps.w:
        steps += [("kernel", cmd_kernel), ("verify-linear", lambda r: cmd_verify(r, "linear")),
                  ("probe", cmd_probe)]
    steps.append(("obstruct", cmd_obstruct))
    for name, fn in steps:
        res, f = fn(run)
        bundle[name] = res
        files.extend(f)
    return bundle, files


HANDLERS = {
    "dispersion-scan": cmd_dispersion_scan,
    "calibrate": cmd_calibrate,
    "kernel": cmd_kernel,
    "verify": cmd_verify,
    "probe": cmd_probe,
    "obstruct": cmd_obstruct,
    "report": cmd_report,
}


def build_parser():
    p = argparse.ArgumentParser(prog="shearwave", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernel)")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="run configuration (JSON)")
        sp.add_argument("--out", help="output directory (overrides the config)")
        sp.add_argument("--tol", type=float, help="Riccati tolerance (overrides the config)")
        sp.add_argument("--grid", help="grid size N1xN2xN3 (overrides the config)")
        sp.add_argument("--quiet", action="store_true", help="suppress console output")
        if name == "verify":
            sp.add_argument("--state", choices=("auto", "trivial", "linear"), default="auto",
                            help="trivial state (nonlinear residual) or kernel (linear residual)")
    return p


def run_subcommand(name, cfg, out=None, quiet=False, **kw):
    """Run one command; returns (exit status, output document)."""
    run = Run(cfg, out or cfg.output, quiet)
    res, files = HANDLERS[name](run, **kw)
    doc = run.envelope(name, res, files)
    run.write_json(f"{name}.json", doc)
    return 0, doc


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol", "must be positive")
        cfg = RunConfig.load(args.config)
        grid = parse_grid(args.grid) if args.grid else None
        cfg = cfg.with_overrides(tol=args.tol, grid=grid, output=args.out)
        kw = {"state": args.state} if args.command == "verify" else {}
        status, _ = run_subcommand(args.command, cfg, quiet=args.quiet, **kw)
        return status
    except ShearwaveError as exc:
        print(json.dumps(_clean(exc.to_record()), sort_keys=True), file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1
    except OSError as exc:
        rec = {"error": "io", "type": type(exc).__name__, "message": exc.strerror or str(exc),
               "path": exc.filename}
        print(json.dumps(rec, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
