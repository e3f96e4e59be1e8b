"""``g2assoc`` command line tool.

Exit codes: 0 when every residual gate passes, 1 on a gate failure,
2 on malformed input or configuration.
"""

import argparse
import sys

import numpy as np

from . import affine, closedform, elliptic, g2core, ruled, verify
from .cli_io import (
    RunConfig, export_mesh, load_mesh, parse_complex, parse_grid, parse_initial_data,
    parse_range, render_value, write_json,
)
from .errors import ConfigError, G2AssocError, InvalidFraction, UnsupportedFormat

EXIT_OK, EXIT_GATE, EXIT_CONFIG = 0, 1, 2


# -- selftest ----------------------------------------------------------------

def _selftest(n: int = 1000, seed: int = 0):
    rng = np.random.default_rng(seed)
    x, y, z = (rng.normal(size=(n, 7)) for _ in range(3))
    scale = g2core.norm(x) * g2core.norm(y) * g2core.norm(z)
    checks = {}
    checks["phi = g(x×y, z)"] = np.max(
        np.abs(g2core.phi3(x, y, z) - g2core.inner(g2core.cross(x, y), z)) / scale) < 1e-12
    re, im = g2core.oct_associator(x, y, z)
    a = g2core.associator(x, y, z)
    checks["octonion associator"] = np.max(
        (np.abs(re) + g2core.norm(im - a)) / scale) < 1e-12
    checks["associator alternating"] = np.max(
        g2core.norm(a + g2core.associator(y, x, z)) / scale) < 1e-12
    checks["associator orthogonal"] = max(
        np.max(np.abs(g2core.inner(a, v)) / (scale * g2core.norm(v))) for v in (x, y, z)) < 1e-12
    for k in (0.0, 0.3, 0.7, 0.96, 1.0):
        u = np.linspace(-5, 5, 201)
        sn, cn, dn = elliptic.sncndn(u, k)
        checks[f"jacobi identities k={k}"] = max(
            np.abs(sn**2 + cn**2 - 1).max(), np.abs(k * k * sn**2 + dn**2 - 1).max()) < 1e-10
    p = closedform.derive_constants(1.0, np.sqrt(2), np.sqrt(2))
    ev = np.sort(np.linalg.eigvals(closedform.build_T(p)).real)
    lam = np.sqrt(3)
    checks["T spectrum"] = np.allclose(ev, [-3 * lam, -lam, -lam, 0, lam, lam, 3 * lam], atol=1e-10)
    return checks


def cmd_selftest(args):
    checks = _selftest(args.samples, args.seed)
    passed = sum(bool(v) for v in checks.values())
    for name, ok in checks.items():
        if not ok or args.verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"selftest: {passed}/{len(checks)} invariants passed")
    return EXIT_OK if passed == len(checks) else EXIT_GATE


# -- shared output -----------------------------------------------------------

def _emit(mesh, cfg: RunConfig, report_extra=None):
    assoc_tol = float(cfg.get("assoc_tol", 1e-8))
    rep = verify.verify_mesh(mesh, assoc_tol=assoc_tol)
    d = rep.to_dict()
    d["config"] = {k: render_value(v) for k, v in cfg.values.items()}
    d["config"]["generator"] = cfg.generator
    if report_extra:
        d.update(report_extra)
        for k, v in report_extra.get("gates", {}).items():
            d["gates"][k] = v
    out = cfg.get("out")
    if out:
        export_mesh(mesh, out, cfg.get("format"), cfg.get("projection"))
        write_json(d, cfg.get("report", f"{out}.report.json"))
    print(f"points: {len(mesh)}  max associator residual: {rep.assoc['max']:.3e}  "
          f"degenerate frames: {rep.n_degenerate}  SL: {rep.sl['is_sl']}")
    ok = all(d["gates"].values())
    for name, g in d["gates"].items():
        print(f"gate {name}: {'pass' if g else 'FAIL'}")
    return EXIT_OK if ok else EXIT_GATE


def _config_from(args, generator, keys):
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig(generator)
    if cfg.generator != generator:
        raise ConfigError(f"config is for generator {cfg.generator!r}, not {generator!r}")
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg.values[k] = v
    if getattr(args, "save_config", None):
        cfg.save(args.save_config)
    return cfg


# -- generators --------------------------------------------------------------

def cmd_affine(args):
    cfg = _config_from(args, "affine", ["init", "grid", "y1_range", "y2_range", "t_range", "tol",
                                        "sing_tol", "assoc_tol", "out", "format", "report"])
    if cfg.get("init") is None:
        raise ConfigError("affine needs init=<initial data file>")
    with open(cfg.get("init")) as fh:
        w = parse_initial_data(fh.read())
    grid = parse_grid(cfg.get("grid", "10x10x10"))
    r1 = parse_range(cfg.get("y1_range", "-1,1"))
    r2 = parse_range(cfg.get("y2_range", "-1,1"))
    rt = parse_range(cfg.get("t_range", "0,1"))
    tol = float(cfg.get("tol", 1e-10))
    lo, hi = min(rt[0], 0.0), max(rt[1], 0.0)
    traj = affine.integrate_span(affine.AffineInit(w), lo, hi, tol)
    mesh = affine.sample_mesh(traj, r1, r2, rt, grid)
    mesh.meta.update({"generator": "affine", "tol": tol})
    axes = [np.linspace(a, b, n) for (a, b), n in zip((r1, r2, rt), grid)]
    sing = affine.detect_singularities(traj, *axes, tol=float(cfg.get("sing_tol", 1e-6)))
    print(f"singular grid points: {len(sing)}")
    return _emit(mesh, cfg, {"singularities": [list(s) for s in sing]})


def _alpha_params(cfg):
    if cfg.get("s") is not None:
        return closedform.params_from_fraction(*closedform.parse_fraction(str(cfg.get("s"))))
    al = cfg.get("alpha")
    if al is None:
        raise ConfigError("closedform needs s=p/q or alpha=a1,a2,a3")
    if isinstance(al, str):
        al = tuple(float(v) for v in al.split(","))
    return closedform.derive_constants(*al)


CONSTANTS = ("B", "Bp", "C", "Cp", "D", "Dp")


def _complex_value(v):
    return complex(v) if isinstance(v, (int, float, complex)) else parse_complex(str(v))


def cmd_closedform(args):
    keys = ["s", "alpha", *CONSTANTS, "z0", "r0", "grid", "y1_range", "y2_range", "t_range",
            "assoc_tol", "out", "format", "report"]
    cfg = _config_from(args, "closedform", keys)
    params = _alpha_params(cfg)
    consts = {k: _complex_value(cfg.get(k, 0)) for k in CONSTANTS}
    r0 = cfg.get("r0", (0, 0, 0))
    if isinstance(r0, str):
        r0 = r0.split(",")
    r0 = tuple(_complex_value(v) for v in r0)
    if len(r0) != 3:
        raise ConfigError("r0 needs three complex values")
    sol = closedform.build_solution(params, **consts, z0=float(cfg.get("z0", 0.0)), r0=r0)
    grid = parse_grid(cfg.get("grid", "20x20x64"))
    mesh = closedform.sample_mesh(sol, parse_range(cfg.get("y1_range", "-1,1")),
                                  parse_range(cfg.get("y2_range", "-1,1")),
                                  parse_range(cfg.get("t_range", f"0,{4 * np.pi!r}")), grid)
    sl = verify.sl_detect(sol)
    print(f"a = {params.a}  lambda = {params.lam}  z drift = {sol.z_drift:.3e}  SL: {sl.is_sl}")
    return _emit(mesh, cfg, {"z_drift": sol.z_drift, "closed_form_sl": sl.is_sl})


def _field_from(text):
    """``"0:1,1:0.3+0.1i"`` -> modes ((0, 1), (1, 0.3+0.1i))."""
    if text in (None, "", "none"):
        return None
    modes = []
    for part in str(text).split(";" if ";" in str(text) else ","):
        n, _, c = part.partition(":")
        try:
            modes.append((int(n), parse_complex(c)))
        except ValueError as exc:
            raise ConfigError(f"bad field mode {part!r}") from exc
    return ruled.HoloField(tuple(modes))


def cmd_ruled(args):
    cfg = _config_from(args, "ruled", ["N", "t1", "steps", "field", "r_range", "r_count",
                                       "assoc_tol", "out", "format", "report"])
    n = int(cfg.get("N", 128))
    t1 = float(cfg.get("t1", 0.25))
    steps = int(cfg.get("steps", 256))
    if n < 16 or n % 2:
        raise ConfigError("N must be even and at least 16")
    traj = ruled.evolve_ruled(ruled.great_circle_state(n), None, t1, steps)
    field = _field_from(cfg.get("field"))
    st = traj.final
    rr = parse_range(cfg.get("r_range", "1,10"))
    radii = np.linspace(rr[0], rr[1], int(cfg.get("r_count", 8)))
    extra = {"norm_drift_max": float(traj.norm_drift.max()) if traj.norm_drift.size else 0.0}
    if field is None:
        mesh = ruled.cone_mesh(st, radii)
    else:
        mesh = ruled.ruled_mesh(ruled.with_field(st, field), radii,
                                dpsi_dt=ruled.lie_derivative_psi_dt(st, field))
    if len(traj) >= 5:
        i = len(traj) // 2
        dp, dq = traj.time_derivatives(i)
        rho = ruled.associativity_residuals(traj.state(i), dp, dq)
        extra["rho"] = list(rho)
        extra["gates"] = {"rho": max(rho) < 1e-6}
        print(f"rho = {rho}")
    mesh.meta.update({"generator": "ruled", "N": n, "t1": t1, "steps": steps})
    return _emit(mesh, cfg, extra)


def cmd_verify(args):
    mesh = load_mesh(args.mesh)
    rep = verify.verify_mesh(mesh, assoc_tol=args.assoc_tol, calib_tol=args.calib_tol)
    stored = np.nanmax(np.abs(mesh.res_assoc - mesh.recompute()[0])) if len(mesh) else 0.0
    print(f"points: {len(mesh)}  max associator residual: {rep.assoc['max']:.3e}  "
          f"stored/recomputed mismatch: {stored:.1e}  SL: {rep.sl['is_sl']}")
    if args.report:
        write_json(rep.to_dict(), args.report)
    for name, g in rep.gates.items():
        print(f"gate {name}: {'pass' if g else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_GATE


def cmd_periodicity(args):
    p, q = closedform.parse_fraction(args.s)
    a1, a2, a3, lam = closedform.periodic_params(p, q)
    print(f"a=({a1},{a2},{a3}) lambda={lam} period=4pi")
    params = closedform.params_from_fraction(p, q)
    c = parse_complex(args.B)
    sol = closedform.build_solution(params, B=c, Bp=args.kappa * c, C=0.5j * c,
                                    Cp=args.kappa * 0.5j * c, D=0.3 * c, Dp=args.kappa * 0.3 * c)
    rep = closedform.check_periodicity(sol)
    print(f"half-period residual {rep.half_period_residual:.3e}  "
          f"full-period residual {rep.full_period_residual:.3e}  scale {rep.scale:.3g}")
    return EXIT_OK if rep.passed() else EXIT_GATE


# -- parser ------------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="g2assoc", description="Associative 3-folds in R^7")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selftest", help="algebra and elliptic-function invariants")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_selftest)

    def common(p):
        p.add_argument("--config")
        p.add_argument("--save-config")
        p.add_argument("--out")
        p.add_argument("--format", choices=["json", "csv", "obj3"])
        p.add_argument("--report")
        p.add_argument("--assoc-tol", dest="assoc_tol", type=float)

    p = sub.add_parser("affine", help="integrate w1..w6 and sample the 3-fold")
    common(p)
    p.add_argument("--init")
    p.add_argument("--grid")
    p.add_argument("--y1-range", dest="y1_range")
    p.add_argument("--y2-range", dest="y2_range")
    p.add_argument("--t-range", dest="t_range")
    p.add_argument("--tol", type=float)
    p.add_argument("--sing-tol", dest="sing_tol", type=float)
    p.set_defaults(func=cmd_affine)

    p = sub.add_parser("closedform", help="explicit periodic-SL-based solutions")
    common(p)
    p.add_argument("--s")
    p.add_argument("--alpha")
    for k in CONSTANTS:
        p.add_argument(f"--{k}")
    p.add_argument("--z0", type=float)
    p.add_argument("--r0")
    p.add_argument("--grid")
    p.add_argument("--y1-range", dest="y1_range")
    p.add_argument("--y2-range", dest="y2_range")
    p.add_argument("--t-range", dest="t_range")
    p.set_defaults(func=cmd_closedform)

    p = sub.add_parser("ruled", help="evolve a great circle and sample the ruled 3-fold")
    common(p)
    p.add_argument("--N", type=int)
    p.add_argument("--t1", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--field", help="holomorphic field modes, e.g. '0:1,1:0.3'")
    p.add_argument("--r-range", dest="r_range")
    p.add_argument("--r-count", dest="r_count", type=int)
    p.set_defaults(func=cmd_ruled)

    p = sub.add_parser("verify", help="re-check a JSON mesh")
    p.add_argument("mesh")
    p.add_argument("--assoc-tol", type=float, default=1e-8)
    p.add_argument("--calib-tol", type=float)
    p.add_argument("--report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("periodicity", help="integer data and period check for s = p/q")
    p.add_argument("--s", required=True)
    p.add_argument("--B", default="0.1+0.05i", help="scale of the constants")
    p.add_argument("--kappa", type=float, default=0.5, help="ratio B'/B = C'/C = D'/D")
    p.set_defaults(func=cmd_periodicity)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UnsupportedFormat, InvalidFraction, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except G2AssocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GATE


if __name__ == "__main__":
    sys.exit(main())
