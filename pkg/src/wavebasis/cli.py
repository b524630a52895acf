"""Command-line interface.

Subcommands: basis, verify, gram, expand, solve, evolve-compare.  Flags
override a JSON config file (--config), which overrides defaults.  All
reports are deterministic for a fixed configuration and seed: floats are
formatted to 17 significant digits and JSON keys are sorted.

Exit status: 0 when all requested checks pass, 1 when a check exceeds its
tolerance, 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .errors import WaveBasisError, ConfigError
from .exactpoly import QQi
from .geometry import NoncompactField, pull_to_compact
from .jets import gexp
from .kleingordon import gram_matrix, kg_inner_noncompact, slice_grid
from .modes import (ModeIndex, Sector, cylinder_mode, default_m, lowest_energy,
                    mode_degree, mode_indices, mode_norm_constant, rational_mode,
                    sector, solution_mode, sphere_mode, weight)
from .operators import (GroupElement, TrigOperators, TrigPoly,
                        casimir_identity_operator, casimir_sl2, casimir_rotations,
                        energy_ladder, group_act, sl2_triple, wave_operator)
from .solver import (evolve_compare, expand, gaussian_data, mode_data,
                     reconstruct, tabulated_data)
from .special import dim_harmonic, sphere_area

_F = ".17g"


def _fmt(x) -> str:
    return format(float(x), _F)


def _write_json(path, obj):
    text = json.dumps(obj, indent=1, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _merge_config(args, defaults):
    """flags > config file > defaults."""
    cfg = dict(defaults)
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _require_sector(n, m):
    if sector(n, m) is Sector.ZERO:
        raise ConfigError(
            f"(n={n}, m={m}) has no solutions (sector ZERO); "
            f"use m = {default_m(n)} for the positive-energy sector")


def _parse_data(spec_str, n):
    if spec_str == "gaussian":
        return gaussian_data()
    if spec_str.startswith("mode:"):
        p, l, j = (int(v) for v in spec_str[5:].split(","))
        return mode_data(ModeIndex(p, l, j), n)
    if spec_str.startswith("file:"):
        path = spec_str[5:]
        rows = np.loadtxt(path, delimiter=",", skiprows=1)
        pts, phi, psi = rows[:, :n], rows[:, n], rows[:, n + 1]
        return tabulated_data(pts, phi, psi)
    raise ConfigError(f"unknown data spec {spec_str!r}; "
                      "use gaussian, mode:p,l,j or file:PATH")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------


def cmd_basis(args):
    cfg = _merge_config(args, {"n": 3, "pmax": 12, "lmax": None, "out": None,
                               "certificates": None})
    n, pmax = cfg["n"], cfg["pmax"]
    idxs = mode_indices(n, pmax, cfg["lmax"])
    rows = [("p", "l", "j", "d", "norm_constant")]
    for i in idxs:
        rows.append((i.p, i.l, i.j, mode_degree(i.p, i.l, n),
                     _fmt(mode_norm_constant(i.p, i.l, n))))
    out = cfg["out"]
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            csv.writer(fh).writerows(rows)
    else:
        for row in rows:
            print(",".join(str(v) for v in row))
    if cfg["certificates"]:
        if n % 2 == 0:
            raise ConfigError("exact certificates require odd n")
        certs = []
        for i in idxs:
            rm = rational_mode(i, n)
            entry = rm.json_entry()
            entry["box_zero"] = rm.is_exact_solution()
            certs.append(entry)
        _write_json(cfg["certificates"], {"n": n, "pmax": pmax, "modes": certs})
    return 0


def _verify_checks(n, m, pmax, seed):
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, residual, tol):
        checks.append({"name": name, "residual": _fmt(residual),
                       "tolerance": _fmt(tol), "passed": bool(residual <= tol)})

    h, ep, em = sl2_triple(n)
    ok = (h.commutator(ep) - ep.scale(2)).is_zero() \
        and (h.commutator(em) - em.scale(-2)).is_zero() \
        and (ep.commutator(em) - h).is_zero()
    record("sl2_commutators_exact", 0.0 if ok else 1.0, 0.0)

    record("casimir_identity_operator_exact",
           0.0 if casimir_identity_operator(n).is_zero() else 1.0, 0.0)

    def smooth_core(t, xs):
        s = sum(x * x for x in xs)
        return (1 + t * xs[0] + 0.2 * xs[-1]) * gexp(-(0.4 * t * t + 0.3 * s))

    fld = NoncompactField(smooth_core, n=n)
    t = rng.uniform(-1, 1, 200)
    X = rng.uniform(-1.5, 1.5, (200, n))
    r = weight(n)
    lhs = (casimir_sl2(n) - casimir_rotations(n)).apply_field(fld, t, X) \
        - float(r * (r + 1)) * fld(t, X)
    rhs = np.sum(X ** 2, axis=1) * wave_operator(n).apply_field(fld, t, X)
    record("casimir_identity_samples", float(np.max(np.abs(lhs - rhs))), 1e-10)

    bad = 0
    for l in range(3):
        ops = TrigOperators(n, l)
        for k in (-3, 0, 2, 5):
            for a in range(4):
                for b in (0, 1):
                    if not ops.factorization_residual(
                            TrigPoly({(k, a, b): QQi(1)})).is_zero():
                        bad += 1
    record("compact_factorization_exact", float(bad), 0.0)

    idxs = mode_indices(n, min(pmax, 12))
    sample = [idxs[i] for i in rng.choice(len(idxs), size=min(6, len(idxs)),
                                          replace=False)]
    if n % 2 == 1:
        failures = sum(0 if rational_mode(i, n).is_exact_solution() else 1
                       for i in idxs)
        record("mode_kernel_exact", float(failures), 0.0)
    else:
        worst = 0.0
        box = wave_operator(n)
        t = rng.uniform(-1.5, 1.5, 150)
        X = rng.uniform(-2, 2, (150, n))
        for i in sample:
            f = solution_mode(i, n)
            resid = np.abs(box.apply_field(f, t, X))
            scale = np.abs(f(t, X)) + 1.0
            worst = max(worst, float(np.max(resid / scale)))
        record("mode_kernel_numeric", worst, 1e-7)

    G1 = gram_matrix(idxs, n, "noncompact")
    G2 = gram_matrix(idxs, n, "compact")
    off = max(float(np.max(np.abs(G - np.diag(np.diag(G))))) for G in (G1, G2))
    diag = max(float(np.max(np.abs(np.diag(G) - 1))) for G in (G1, G2))
    record("gram_offdiagonal", off, 1e-10)
    record("gram_diagonal", diag, 1e-9)

    z, npl, nmi = energy_ladder(n)
    phi = rng.uniform(-3, 3, 40)
    theta = rng.uniform(0.2, 2.9, 40)
    xh = rng.normal(size=(40, n))
    xh /= np.linalg.norm(xh, axis=1)[:, None]
    worst_z = worst_prop = worst_kill = 0.0
    for i in sample:
        F = cylinder_mode(i.p, i.l, i.j, n)
        worst_z = max(worst_z, float(np.max(np.abs(
            z.apply_at(F, phi, theta, xh) - i.p * F(phi, theta, xh)))))
        up = cylinder_mode(i.p + 2, i.l, i.j, n)
        ratios = npl.apply_at(F, phi, theta, xh) / up(phi, theta, xh)
        worst_prop = max(worst_prop, float(np.max(np.abs(ratios - ratios[0]))))
        low = cylinder_mode(2 * i.l + n - 1, i.l, i.j, n)
        worst_kill = max(worst_kill, float(np.max(np.abs(
            nmi.apply_at(low, phi, theta, xh)))))
    record("energy_eigenvalue", worst_z, 1e-10)
    record("ladder_proportionality", worst_prop, 1e-9)
    record("ladder_lowest_rung", worst_kill, 1e-10)

    worst_add = 0.0
    for p in range(lowest_energy(n), min(pmax, 12) + 1, 2):
        k = (p - lowest_energy(n)) // 2
        target = dim_harmonic(n + 1, k) / sphere_area(n + 1)
        total = np.zeros(len(theta))
        for l in range(k + 1):
            for j in range(dim_harmonic(n, l)):
                G = sphere_mode(p, l, j, n)
                total += np.abs(G(phi, theta, xh)) ** 2
        worst_add = max(worst_add, float(np.max(np.abs(total - target))))
    record("addition_theorem", worst_add, 1e-10)

    worst_pic = 0.0
    for i in sample:
        f = solution_mode(i, n)
        F = cylinder_mode(i.p, i.l, i.j, n)
        pulled = pull_to_compact(f, m, float(weight(n)))
        worst_pic = max(worst_pic, float(np.max(np.abs(
            pulled(phi, theta, xh) - F(phi, theta, xh)))))
    record("picture_consistency", worst_pic, 1e-10)

    grid = slice_grid(n, (min(pmax, 12) - lowest_energy(n)) // 2 + 2,
                      theta_nodes=48)
    worst_uni = 0.0
    for _ in range(5):
        a = rng.uniform(0.7, 1.4)
        b = rng.uniform(-0.5, 0.5)
        Q, _r = np.linalg.qr(rng.normal(size=(n, n)))
        if np.linalg.det(Q) < 0:
            Q[:, 0] *= -1
        g = GroupElement(np.array([[a, b], [0.0, 1.0 / a]]), Q, m, float(weight(n)))
        i1, i2 = sample[0], sample[-1]
        f1, f2 = solution_mode(i1, n), solution_mode(i2, n)
        before = kg_inner_noncompact(f1, f2, grid)
        after = kg_inner_noncompact(group_act(g, f1), group_act(g, f2), grid)
        worst_uni = max(worst_uni, abs(after - before))
    record("unitarity_samples", worst_uni, 1e-8)

    table_ok = True
    for nn in range(2, 8):
        for mm in range(4):
            s = sector(nn, mm)
            if nn % 2 == 1:
                expected = Sector.BOTH if mm == (nn - 1) % 4 else Sector.ZERO
            elif mm == (-(nn - 1)) % 4:
                expected = Sector.PLUS
            elif mm == (nn - 1) % 4:
                expected = Sector.MINUS
            else:
                expected = Sector.ZERO
            if s is not expected:
                table_ok = False
    record("sector_tables", 0.0 if table_ok else 1.0, 0.0)
    return checks


def cmd_verify(args):
    cfg = _merge_config(args, {"n": 3, "m": None, "pmax": 12, "seed": 7,
                               "out": None})
    n = cfg["n"]
    m = cfg["m"] if cfg["m"] is not None else default_m(n)
    _require_sector(n, m)
    checks = _verify_checks(n, m, cfg["pmax"], cfg["seed"])
    passed = all(c["passed"] for c in checks)
    report = {"command": "verify", "version": __version__,
              "config": {"n": n, "m": m, "pmax": cfg["pmax"], "seed": cfg["seed"]},
              "checks": checks, "passed": passed}
    _write_json(cfg["out"], report)
    return 0 if passed else 1


def cmd_gram(args):
    cfg = _merge_config(args, {"n": 3, "m": None, "pmax": 8,
                               "picture": "noncompact", "out": None})
    n = cfg["n"]
    m = cfg["m"] if cfg["m"] is not None else default_m(n)
    _require_sector(n, m)
    idxs = mode_indices(n, cfg["pmax"])
    G = gram_matrix(idxs, n, cfg["picture"])
    off = float(np.max(np.abs(G - np.diag(np.diag(G))))) if len(idxs) > 1 else 0.0
    diag = float(np.max(np.abs(np.diag(G) - 1)))
    rows = [",".join(_fmt(v) for v in row) for row in np.real(G)]
    header = ";".join(str(i) for i in idxs)
    out_text = "# modes: " + header + "\n" + "\n".join(rows) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(out_text)
    else:
        sys.stdout.write(out_text)
    print(f"# max_offdiagonal = {_fmt(off)}", file=sys.stderr)
    print(f"# max_diagonal_deviation = {_fmt(diag)}", file=sys.stderr)
    return 0 if (off < 1e-10 and diag < 1e-9) else 1


def _grid_template(n, pmax, lmax, path):
    from .solver import default_expansion_grid
    pts = default_expansion_grid(n, pmax, lmax).slice_points()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(n)] + ["phi", "psi"])
        for row in pts:
            w.writerow([_fmt(v) for v in row] + ["0", "0"])


def cmd_expand(args):
    cfg = _merge_config(args, {"n": 3, "pmax": 12, "lmax": None,
                               "data": "gaussian", "out": None,
                               "dump_grid": None})
    n = cfg["n"]
    if cfg["dump_grid"]:
        _grid_template(n, cfg["pmax"], cfg["lmax"], cfg["dump_grid"])
        return 0
    data = _parse_data(cfg["data"], n)
    exp = expand(data, n, cfg["pmax"], cfg["lmax"])
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(exp.to_json() + "\n")
    else:
        print(exp.to_json())
    return 0


def cmd_solve(args):
    cfg = _merge_config(args, {"n": 3, "pmax": 12, "lmax": None,
                               "data": "gaussian", "t": 1.0, "out": None,
                               "expansion_out": None, "radius": 2.0,
                               "points_per_axis": 9})
    n = cfg["n"]
    data = _parse_data(cfg["data"], n)
    exp = expand(data, n, cfg["pmax"], cfg["lmax"])
    if cfg["expansion_out"]:
        with open(cfg["expansion_out"], "w", encoding="utf-8") as fh:
            fh.write(exp.to_json() + "\n")
    axis = np.linspace(-cfg["radius"], cfg["radius"], cfg["points_per_axis"])
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    X = np.stack([g.ravel() for g in grids], axis=1)
    pts = np.concatenate([np.full((len(X), 1), float(cfg["t"])), X], axis=1)
    u = reconstruct(exp, pts)
    lines = [",".join(["t"] + [f"x{i + 1}" for i in range(n)] + ["u"])]
    for row, val in zip(pts, u):
        lines.append(",".join(_fmt(v) for v in row) + "," + _fmt(val))
    text = "\n".join(lines) + "\n"
    if cfg["out"]:
        with open(cfg["out"], "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_evolve_compare(args):
    cfg = _merge_config(args, {"n": 3, "pmax": 24, "data": "gaussian",
                               "t": 1.0, "h": 0.1, "radius": 2.0,
                               "tol": 5e-3, "out": None})
    n = cfg["n"]
    data = _parse_data(cfg["data"], n)
    rep = evolve_compare(data, n, cfg["t"], cfg["pmax"], cfg["h"], cfg["radius"])
    rep = {"command": "evolve-compare", "tolerance": _fmt(cfg["tol"]), **{
        k: (_fmt(v) if isinstance(v, float) else v) for k, v in rep.items()
        if k != "times"},
        "times": {_fmt(ts): {kk: _fmt(vv) for kk, vv in d.items()}
                  for ts, d in rep["times"].items()}}
    worst = max(float(d["sup"]) for d in rep["times"].values())
    rep["passed"] = bool(worst <= cfg["tol"])
    _write_json(cfg["out"], rep)
    return 0 if rep["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wavebasis",
        description="Orthonormal positive-energy wave-equation bases: "
                    "construction, verification and spectral Cauchy solving.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, help="spatial dimension (>= 2)")
        p.add_argument("--config", help="JSON config file (flags override it)")

    p = sub.add_parser("basis", help="list modes (CSV) and optional exact certificates")
    common(p)
    p.add_argument("--pmax", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--out")
    p.add_argument("--certificates", help="write exact rational-mode JSON here (odd n)")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("verify", help="run the identity suite, emit a JSON report")
    common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--pmax", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gram", help="Klein-Gordon Gram matrix of the basis")
    common(p)
    p.add_argument("--m", type=int)
    p.add_argument("--pmax", type=int)
    p.add_argument("--picture", choices=["noncompact", "compact"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("expand", help="expansion coefficients of Cauchy data")
    common(p)
    p.add_argument("--pmax", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--data", help="gaussian | mode:p,l,j | file:PATH")
    p.add_argument("--out")
    p.add_argument("--dump-grid", dest="dump_grid",
                   help="write the quadrature-grid CSV template and exit")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("solve", help="expand and reconstruct on a lattice")
    common(p)
    p.add_argument("--pmax", type=int)
    p.add_argument("--lmax", type=int)
    p.add_argument("--data", help="gaussian | mode:p,l,j | file:PATH")
    p.add_argument("--t", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--points-per-axis", dest="points_per_axis", type=int)
    p.add_argument("--out")
    p.add_argument("--expansion-out", dest="expansion_out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("evolve-compare",
                       help="spectral vs finite-difference cross validation")
    common(p)
    p.add_argument("--pmax", type=int)
    p.add_argument("--data", help="gaussian | mode:p,l,j | file:PATH")
    p.add_argument("--t", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--radius", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evolve_compare)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except WaveBasisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
