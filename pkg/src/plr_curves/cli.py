"""Command-line front end.

    plr-curves params check --preset E
    plr-curves solve --preset A --out out/
    plr-curves curve --preset plr4 --t 1 --out out/
    plr-curves surface --preset C --out out/
    plr-curves verify --preset A [--perturb 0.1]

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 I/O error.
"""

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import curves, date, presets, verify

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _fmt(x):
    return curves._fmt(float(x))


def atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd_, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd_, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(args):
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
    if args.preset:
        cfg = {**cfg, "preset": args.preset}
        cfg.pop("alpha", None)
        cfg.pop("c", None)
    for key in ("lam", "h", "t"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if "preset" not in cfg and "alpha" not in cfg:
        raise UsageError("give --preset or a --config with alpha and c")
    return cfg


def _grid(cfg, default_range=(-10.0, 10.0), default_n=101):
    s_range = tuple(float(x) for x in cfg.get("s_range", default_range))
    t_range = tuple(float(x) for x in cfg.get("t_range", default_range))
    nS = int(cfg.get("nS", default_n))
    nT = int(cfg.get("nT", default_n))
    if len(s_range) != 2 or len(t_range) != 2:
        raise UsageError("ranges need two endpoints")
    if not (s_range[1] > s_range[0] and t_range[1] > t_range[0]):
        raise UsageError("ranges must be non-degenerate")
    if nS < 2 or nT < 2:
        raise UsageError("grid needs at least 2 samples per direction")
    lam = float(cfg.get("lam", 1.0))
    if not lam > 0:
        raise UsageError("lambda must be positive")
    return s_range, t_range, nS, nT, lam


def cmd_params_check(p, cfg, out):
    sg = date.is_sine_gordon(p)
    report = {
        "name": p.name or "custom",
        "N": p.N,
        "valid": True,
        "sine_gordon": sg.holds,
        "sigma": list(sg.sigma) if sg.sigma else None,
    }
    if p.name in presets.NOTES:
        report["note"] = presets.NOTES[p.name]
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    return EXIT_OK


def solve_csv(p, s_range, t_range, nS, nT):
    s = np.linspace(*s_range, nS)
    t = np.linspace(*t_range, nT)
    S, T = np.meshgrid(s, t, indexing="ij")
    f = date.solution_fields(p, S, T)
    v = np.ma.filled(f.v, np.nan)
    lines = ["s,t,re_a,im_a,u,v,re_q,im_q,gap"]
    cols = [S, T, f.a.real, f.a.imag, f.u, v, f.q.real, f.q.imag]
    flat = [c.reshape(-1) for c in cols]
    gap = f.gap.reshape(-1)
    for i in range(S.size):
        lines.append(",".join(_fmt(c[i]) for c in flat) + f",{int(gap[i])}")
    return "\n".join(lines) + "\n"


def cmd_solve(p, cfg, out):
    s_range, t_range, nS, nT, _ = _grid(cfg)
    atomic_write(out / "solve.csv", solve_csv(p, s_range, t_range, nS, nT))
    return EXIT_OK


def curve_csv(p, t_fixed, s_range, nS, lam=1.0):
    s = np.linspace(*s_range, nS)
    h = s[1] - s[0]
    # two extra samples per side so the Frenet stencils cover every row
    s_ext = np.concatenate([s[0] - h * np.arange(2, 0, -1), s, s[-1] + h * np.arange(1, 3)])
    t_ext = np.full_like(s_ext, t_fixed)
    if lam == 1.0:
        pts = curves.nsoliton_curve(p, s_ext, t_ext)
    else:
        pts = curves.sym_numeric(p, s_ext, t_ext, lam0=lam, h_lam=min(1e-4, lam / 2))
    fr = curves.frenet_from_points(pts, h)
    gap = np.ma.getmaskarray(fr.tau)
    kappa = np.ma.getdata(fr.kappa)
    tau = np.where(gap, 0.0, np.ma.getdata(fr.tau))
    lines = ["s,x,y,z,kappa,tau,gap"]
    for i in range(nS):
        row = ",".join(_fmt(x) for x in (s[i], *pts[i + 2], kappa[i], tau[i]))
        lines.append(f"{row},{int(gap[i])}")
    return "\n".join(lines) + "\n"


def cmd_curve(p, cfg, out):
    if "t" not in cfg:
        raise UsageError("curve needs --t")
    s_range, _, nS, _, lam = _grid({"nS": 1001, **cfg}, default_range=presets.CURVE_DOMAIN)
    t_fixed = float(cfg["t"])
    atomic_write(out / f"curve_t{t_fixed:g}.csv", curve_csv(p, t_fixed, s_range, nS, lam))
    return EXIT_OK


def cmd_surface(p, cfg, out):
    dom = presets.SURFACE_DOMAINS.get(p.name, ((-10, 10), (-10, 10)))
    cfg = {"s_range": dom[0], "t_range": dom[1], **cfg}
    s_range, t_range, nS, nT, _ = _grid(cfg)
    mesh = curves.swept_surface(p, s_range, t_range, nS, nT, with_invariants=True)
    atomic_write(out / "surface.obj", mesh.obj_text())
    atomic_write(out / "surface.csv", mesh.csv_text())
    return EXIT_OK


def cmd_verify(p, cfg, out, perturb=0.0):
    h = float(cfg.get("h", 1e-3))
    if not h > 0:
        raise UsageError("h must be positive")
    spec = verify.GridSpec(h=h)
    reports = verify.run_suite(p, spec, perturb=perturb)
    text = verify.reports_json(reports)
    atomic_write(out / "verify.json", text)
    for r in reports:
        ratio = "-" if r.convergence_ratio is None else f"{r.convergence_ratio:.3f}"
        print(f"{r.name:26s} {r.max_residual:.3e}  ratio {ratio:>6s}  {r.status}")
    bad = [r for r in reports if r.status == "fail"]
    return EXIT_VERIFY if bad else EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="plr-curves", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--preset", choices=sorted(presets.PRESETS), help="named parameter set")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--h", type=float, help="verification step")
    common.add_argument("--lambda", dest="lam", type=float, help="spectral parameter (> 0)")
    sub = ap.add_subparsers(dest="cmd", required=True)
    params = sub.add_parser("params", help="parameter utilities")
    psub = params.add_subparsers(dest="action", required=True)
    psub.add_parser("check", parents=[common], help="validate parameters")
    sub.add_parser("solve", parents=[common], help="PLR fields on a grid")
    c = sub.add_parser("curve", parents=[common], help="one curve of the family")
    c.add_argument("--t", type=float, required=True)
    sub.add_parser("surface", parents=[common], help="swept-surface mesh")
    v = sub.add_parser("verify", parents=[common], help="residual suite")
    v.add_argument("--perturb", type=float, default=0.0)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args)
        p = presets.params_from_config(cfg)
        if args.cmd == "params":
            return cmd_params_check(p, cfg, out)
        if args.cmd == "solve":
            return cmd_solve(p, cfg, out)
        if args.cmd == "curve":
            return cmd_curve(p, cfg, out)
        if args.cmd == "surface":
            return cmd_surface(p, cfg, out)
        return cmd_verify(p, cfg, out, args.perturb)
    except (date.ParamsError, UsageError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
