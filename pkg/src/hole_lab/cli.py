"""Command-line front end: ``hole-lab <subcommand> [options]``.

Exit codes: 0 success, 1 flagged / low-confidence result, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import experiment, gaf, quadrature
from .polynomial import PolySpec, sample
from .rootfind import all_roots, write_roots_csv
from .windows import Window

EXIT_OK, EXIT_FLAGGED, EXIT_USAGE = 0, 1, 2
SUBCOMMANDS = ("scan", "roots", "intensity", "gaf", "probe", "universality", "selftest")
# fields that do not change what is computed
NON_SEMANTIC = ("out", "svg", "manifest", "csv", "workers")
VIEW = 1.5
SVG_SIZE = 600


@dataclass
class RunConfig:
    subcommand: str = "scan"
    rho: int = 0
    n: int = 1000
    dist: str = "rademacher"
    dist_b: str = "gaussian"
    zeta_angle: float = 1.0
    delta: float = 0.1
    C: float = 5.0
    radius: float = 0.5
    alpha: float = experiment.DEFAULT_ALPHA
    trials: int = 500
    seed: int = 0
    seed_b: int | None = None
    m: int | None = None
    D0: float | None = None
    workers: int | None = None
    out: str | None = None
    svg: str | None = None
    manifest: str | None = None
    csv: str | None = None

    def to_json(self):
        return {"schema_version": 1, **asdict(self)}

    @classmethod
    def from_json(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def semantic(self):
        return {k: v for k, v in asdict(self).items() if k not in NON_SEMANTIC}

    def hash(self):
        return experiment.config_hash(self.semantic())

    @property
    def zeta(self):
        return complex(math.cos(self.zeta_angle), math.sin(self.zeta_angle))

    def poly_spec(self, dist=None):
        return PolySpec(self.rho, self.n, dist or self.dist)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    d = RunConfig()
    p = _Parser(prog="hole-lab", description="Hole radii and zero counts of weighted Kac polynomials.")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, *names):
        opts = {
            "rho": dict(type=int, default=d.rho, help="derivative order (default %(default)s)"),
            "n": dict(type=int, default=d.n, help="polynomial degree (default %(default)s)"),
            "dist": dict(choices=["rademacher", "gaussian", "uniform"], default=d.dist),
            "dist_b": dict(choices=["rademacher", "gaussian", "uniform"], default=d.dist_b),
            "zeta_angle": dict(type=float, default=d.zeta_angle, help="zeta = exp(i angle) (default %(default)s)"),
            "delta": dict(type=float, default=d.delta),
            "C": dict(type=float, default=d.C),
            "radius": dict(type=float, default=d.radius),
            "alpha": dict(type=float, default=d.alpha),
            "trials": dict(type=int, default=d.trials),
            "seed": dict(type=int, default=d.seed),
            "seed_b": dict(type=int, default=None, help="seed for the second law (default: --seed)"),
            "m": dict(type=int, default=None, help="boundary grid size (default max(1024, 128 C))"),
            "D0": dict(type=float, default=None, help="diagonal split (default min(log C, C))"),
            "workers": dict(type=int, default=None),
            "out": dict(default=None, help="output file (CSV or JSON; stdout if omitted)"),
            "svg": dict(default=None, help="SVG plot path"),
            "manifest": dict(default=None, help="write the run manifest (JSON) here"),
            "csv": dict(default=None, help="root dump CSV (trial, re, im, residual)"),
        }
        for name in names:
            sp.add_argument("--" + name.replace("_", "-"), dest=name, **opts[name])

    common(sub.add_parser("scan", help="hole-radius curve at zeta"),
           "rho", "n", "dist", "zeta_angle", "trials", "seed", "workers", "out", "svg", "manifest")
    common(sub.add_parser("roots", help="scatter plot of sampled roots"),
           "rho", "n", "dist", "trials", "seed", "svg", "csv", "out")
    common(sub.add_parser("intensity", help="Kac-Rice mean / variance report"),
           "rho", "delta", "C", "D0", "out")
    common(sub.add_parser("gaf", help="winding-number zero counts of the limit field"),
           "rho", "delta", "C", "m", "trials", "seed", "workers", "out")
    common(sub.add_parser("probe", help="real-root sign-change probe near 1"),
           "n", "dist", "C", "alpha", "trials", "seed", "workers", "out")
    common(sub.add_parser("universality", help="KS distance between two coefficient laws"),
           "rho", "n", "dist", "dist_b", "zeta_angle", "trials", "seed", "seed_b", "workers", "out")
    sub.add_parser("selftest", help="quick invariant checks")
    return p


def parse_config(argv):
    ns = build_parser().parse_args(argv)
    base = RunConfig(subcommand=ns.subcommand)
    for k, v in vars(ns).items():
        setattr(base, k, v)
    if base.subcommand == "probe":
        base.rho = 0
    return base


# ------------------------------------------------------------------ output

def _emit_json(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def emit_svg_scatter(points, path, size=SVG_SIZE):
    """Scatter of complex points on the fixed view [-1.5, 1.5]^2 with the unit circle."""
    pts = np.asarray(points, dtype=complex).ravel()
    scale = size / (2 * VIEW)
    r = max(0.4, 12.0 / math.sqrt(max(len(pts), 1)))
    keep = pts[(np.abs(pts.real) <= VIEW) & (np.abs(pts.imag) <= VIEW)]
    px = (keep.real + VIEW) * scale
    py = (VIEW - keep.imag) * scale
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>',
             f'<circle cx="{size / 2:g}" cy="{size / 2:g}" r="{scale:g}" fill="none" '
             f'stroke="#c33" stroke-width="1"/>',
             f'<g fill="#124" fill-opacity="0.7" data-count="{len(pts)}">']
    parts.extend(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{r:.2f}"/>' for x, y in zip(px, py))
    parts.append("</g></svg>")
    with open(path, "w") as fh:  # raises OSError on unwritable paths
        fh.write("\n".join(parts) + "\n")


def emit_svg_curve(xs, ys, path, size=SVG_SIZE, xlabel="r", ylabel="P(r* < r)"):
    """Monotone step curve, axes [0, max x] x [0, 1]."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    pad = 40
    w = size - 2 * pad
    xmax = float(xs.max()) if len(xs) and xs.max() > 0 else 1.0
    pts = " ".join(f"{pad + w * x / xmax:.1f},{pad + w * (1 - y):.1f}" for x, y in zip(xs, ys))
    text = "\n".join([
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<rect x="{pad}" y="{pad}" width="{w}" height="{w}" fill="none" stroke="black"/>',
        f'<polyline fill="none" stroke="#124" stroke-width="1.5" points="{pts}"/>',
        f'<text x="{size / 2}" y="{size - 10}" text-anchor="middle">{xlabel} (max {xmax:.3g})</text>',
        f'<text x="12" y="{size / 2}" transform="rotate(-90 12 {size / 2})" text-anchor="middle">{ylabel}</text>',
        "</svg>"])
    with open(path, "w") as fh:
        fh.write(text + "\n")


# ------------------------------------------------------------- subcommands

def _scan(cfg):
    curve = experiment.hole_scan(cfg.poly_spec(), cfg.zeta, cfg.trials, cfg.seed, cfg.workers)
    if cfg.out:
        curve.write_csv(cfg.out)
    else:
        for row in curve.rows():
            print(",".join(str(v) for v in row.values()))
    if cfg.svg and len(curve.rstars):
        emit_svg_curve(curve.rstars, np.arange(1, len(curve.rstars) + 1) / len(curve.rstars), cfg.svg)
    if cfg.manifest:
        _emit_json({**manifest(cfg), "summary": {"discarded": curve.discarded, "median": curve.median()}},
                   cfg.manifest)
    return EXIT_FLAGGED if curve.flagged else EXIT_OK


def _roots(cfg):
    spec = cfg.poly_spec()
    pts, bad, sets = [], 0, []
    for t in range(cfg.trials):
        rs = all_roots(sample(spec, cfg.seed, t).coeffs)
        bad += not rs.converged
        pts.append(rs.roots)
        sets.append((t, rs))
    if cfg.csv:
        write_roots_csv(cfg.csv, sets)
    pts = np.concatenate(pts) if pts else np.empty(0, complex)
    if cfg.svg:
        emit_svg_scatter(pts, cfg.svg)
    _emit_json({"schema_version": 1, "trials": cfg.trials, "roots": int(len(pts)), "unconverged": bad,
                "mean_abs_log_modulus": float(np.mean(np.abs(np.log(np.abs(pts[pts != 0]))))) if len(pts) else None},
               cfg.out)
    return EXIT_FLAGGED if bad else EXIT_OK


def _intensity(cfg):
    rep = quadrature.variance_report(cfg.rho, Window.strip(cfg.delta, cfg.C), cfg.D0)
    _emit_json(rep.to_json(), cfg.out)
    return EXIT_FLAGGED if rep.low_confidence else EXIT_OK


def _gaf(cfg):
    s = gaf.zero_count_stats(cfg.rho, Window.strip(cfg.delta, cfg.C), cfg.m, cfg.trials, cfg.seed, cfg.workers)
    _emit_json(s.to_json(), cfg.out)
    return EXIT_FLAGGED if s.low_confidence else EXIT_OK


def _probe(cfg):
    res = experiment.real_root_probe(PolySpec(0, cfg.n, cfg.dist), cfg.C, cfg.alpha, cfg.trials, cfg.seed, cfg.workers)
    _emit_json(res.to_json(), cfg.out)
    return EXIT_OK


def _universality(cfg):
    a = experiment.hole_scan(cfg.poly_spec(cfg.dist), cfg.zeta, cfg.trials, cfg.seed, cfg.workers)
    b = experiment.hole_scan(cfg.poly_spec(cfg.dist_b), cfg.zeta, cfg.trials,
                             cfg.seed if cfg.seed_b is None else cfg.seed_b, cfg.workers)
    _emit_json({"schema_version": 1, "dist_a": cfg.dist, "dist_b": cfg.dist_b, "n": cfg.n, "rho": cfg.rho,
                "zeta_angle": cfg.zeta_angle, "trials": cfg.trials, "ks": a.ks_distance(b),
                "median_a": a.median(), "median_b": b.median()}, cfg.out)
    return EXIT_FLAGGED if (a.flagged or b.flagged) else EXIT_OK


def selftest():
    """Fast invariants; returns list of (name, ok)."""
    from .kernel import f_derivs_series, f_deriv_recurrence_mp, rho1
    checks = []
    checks.append(("rho1(0) rho=0", abs(rho1(0, 0).value - 1 / (12 * math.pi)) < 1e-12))
    checks.append(("rho1(0) rho=1", abs(rho1(1, 0).value - 3 / (80 * math.pi)) < 1e-12))
    u = 0.7 - 0.3j
    s = f_derivs_series(6, np.array([u]))[:, 0]
    checks.append(("F series vs recurrence", all(abs(s[k] - f_deriv_recurrence_mp(k, u)) < 1e-12 * abs(s[k])
                                                 for k in range(7))))
    rs = all_roots(np.ones(65))
    unity = np.exp(2j * math.pi * np.arange(1, 65) / 65)
    err = max(np.min(np.abs(rs.roots - w)) for w in unity)
    checks.append(("roots of unity", err < 1e-10))
    w = Window.strip(0.1, 5)
    checks.append(("window area", abs(quadrature.mean_count(0, w, integrand=lambda z: np.ones(z.shape)) - 2.0) < 1e-12))
    checks.append(("wilson (0,100)", abs(experiment.wilson_ci(0, 100)[1] - 1.96 ** 2 / (100 + 1.96 ** 2)) < 1e-12))
    return checks


def _selftest(cfg):
    checks = selftest()
    for name, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    return EXIT_OK if all(ok for _, ok in checks) else EXIT_FLAGGED


def manifest(cfg: RunConfig):
    return {"schema_version": 1, "config": cfg.to_json(), "hash": cfg.hash()}


HANDLERS = {"scan": _scan, "roots": _roots, "intensity": _intensity, "gaf": _gaf, "probe": _probe,
            "universality": _universality, "selftest": _selftest}


def run(argv=None):
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return HANDLERS[cfg.subcommand](cfg)
    except ValueError as e:
        print(f"hole-lab: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
