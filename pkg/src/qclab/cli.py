"""Command-line front end.

Subcommands: beltrami-solve, motion-check, motion-holonomy, current-mass,
current-residuals, current-decompose, current-refine, approx-run.
Exit codes: 0 success, 1 validation failure, 2 numerical failure.

All CSV/JSON outputs are deterministic for a fixed config and seed; PNG/PGM
figures are rendered on the same report path (disable with --no-figures).
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import families, io, plotting
from .approximation import (approximate, leaf_bundle_near, localize,
                            mollified_lamination, projection_trace,
                            transversal_dilatation, w1p_error,
                            GraphTransversal, StraightenedFunction,
                            VerticalTransversal)
from .beltrami import principal_solution
from .currents import (area_bump_form, closedness_residual,
                       directedness_residual, mass, pair, radon_nikodym,
                       refine_subdivide)
from .currents import LaminarCurrent
from .errors import NumericalError, QclabError, ValidationError
from .expr import evaluate as expr_evaluate
from .expr import parse as expr_parse
from .field_ops import ComplexField, DiskRegion, GridSpec, lp_norm
from .lamination import Lamination
from .motion import (check_boundedness, check_disjointness, check_harnack_hoelder,
                     check_holomorphy, check_schwarz, holonomy, mu_support_radius)


def _parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ValidationError(f"cannot parse complex number {text!r}") from exc


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid-n", type=int, default=256, help="grid resolution N")
    p.add_argument("--grid-l", type=float, default=2.0, help="grid half-width L")
    p.add_argument("--tol", type=float, default=1e-10, help="solver tolerance")
    p.add_argument("--p", type=float, default=4.0, help="Lebesgue exponent")
    p.add_argument("--eps-list", type=str, default="0.2,0.1,0.05",
                   help="comma-separated mollification radii")
    p.add_argument("--delta", type=float, default=0.1,
                   help="compact sub-disk margin")
    p.add_argument("--out", type=str, required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed for randomized diagnostics (reserved)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip PNG figure rendering")


def _grid(args) -> GridSpec:
    return GridSpec(args.grid_l, args.grid_n)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_motion(args, spec: GridSpec):
    name = args.motion
    if name.startswith("family:"):
        return families.motion_by_name(name.split(":", 1)[1], spec)
    return io.load_motion_json(name)


def _validate_common(args) -> None:
    # fail fast before any computation
    GridSpec(args.grid_l, args.grid_n)
    if args.tol <= 0:
        raise ValidationError(f"--tol must be positive, got {args.tol}")
    if args.p < 1:
        raise ValidationError(f"--p must be >= 1, got {args.p}")
    if args.delta <= 0 or args.delta >= 1:
        raise ValidationError(f"--delta must be in (0,1), got {args.delta}")
    eps = _eps_list(args)
    if any(e <= 0 for e in eps):
        raise ValidationError("--eps-list entries must be positive")
    if args.seed < 0:
        raise ValidationError("--seed must be nonnegative")


def _eps_list(args) -> list[float]:
    try:
        return [float(t) for t in args.eps_list.split(",") if t]
    except ValueError as exc:
        raise ValidationError(f"malformed --eps-list {args.eps_list!r}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_beltrami_solve(args) -> int:
    _validate_common(args)
    spec = _grid(args)
    out = _outdir(args)
    oracle = None
    if Path(args.mu).suffix == ".csv" and Path(args.mu).exists():
        field = io.read_field_csv(args.mu)
        from .beltrami import BeltramiField
        sup = field.max_abs()
        if sup >= 1.0:
            raise ValidationError(f"input coefficient has sup {sup:.4f} >= 1")
        mu = BeltramiField(field, sup)
    else:
        mu, oracle = families.mu_by_name(args.mu, spec)

    t0 = time.time()
    qc = principal_solution(mu, args.tol)
    runtime = time.time() - t0
    print(f"solved in {qc.iterations} iterations, residual {qc.residual:.3e}, "
          f"{runtime:.2f}s", file=sys.stderr)

    io.write_field_csv(qc.h, out / "solution.csv")
    diag = qc.diagnostics()
    diag["tol"] = args.tol
    diag["input"] = args.mu
    if oracle is not None:
        num = lp_norm(qc.h - oracle, 2.0)
        den = lp_norm(oracle, 2.0)
        diag["oracle_relative_l2_error"] = num / den if den > 0 else num
    io.write_json(diag, out / "diagnostics.json")
    disp = np.abs(qc.displacement().values)
    io.write_pgm(disp, out / "displacement.pgm")
    if not args.no_figures:
        ext = (-spec.half_width, spec.half_width, -spec.half_width, spec.half_width)
        plotting.save_heatmap(disp, out / "displacement.png",
                              title="|h(w) - w|", extent=ext)
    return 0


def cmd_motion_check(args) -> int:
    _validate_common(args)
    spec = _grid(args)
    out = _outdir(args)
    motion = _load_motion(args, spec)

    disjoint = check_disjointness(motion)
    holo = check_holomorphy(motion)
    report = {
        "disjointness": {"passed": disjoint.passed, "min_gap": disjoint.min_gap},
        "holomorphy": {"passed": holo.passed, "max_abs_dzbar": holo.max_abs_dzbar},
        "boundedness": {"passed": check_boundedness(motion).passed},
    }
    schwarz_pass = True
    harnack_pass = True
    if motion.global_flag:
        schwarz = []
        for z in (0.1, 0.3, 0.6):
            rep = check_schwarz(motion, z, spec)
            schwarz.append({"z": z, "sup_mu": rep.sup_mu, "bound": rep.bound,
                            "slack": rep.slack})
            schwarz_pass &= rep.passed
        report["schwarz"] = {"passed": schwarz_pass, "samples": schwarz}
        report["mu_support_radius"] = mu_support_radius(motion, 0.4, spec)
    else:
        report["schwarz"] = {"passed": True, "samples": [],
                             "note": "needs a global motion"}
    harnack = []
    tau = motion.tau
    zs = [0.2, 0.45 + 0.3j, -0.6j]
    for i in range(tau.size):
        for j in range(i + 1, tau.size):
            for z in zs:
                rep = check_harnack_hoelder(motion, tau[i], tau[j], z)
                harnack.append({
                    "alpha": complex(tau[i]), "beta": complex(tau[j]), "z": complex(z),
                    "lower_margin": rep.lower_margin, "upper_margin": rep.upper_margin,
                    "exponent": rep.exponent})
                harnack_pass &= rep.passed
    report["harnack_hoelder"] = {"passed": harnack_pass, "samples": harnack}
    io.write_json(report, out / "motion_check.json")
    if not args.no_figures:
        plotting.save_leaves(motion, out / "leaves.png", title="leaf graphs")
    all_pass = (disjoint.passed and holo.passed and schwarz_pass and harnack_pass)
    print(f"motion-check: {'PASS' if all_pass else 'FAIL'}", file=sys.stderr)
    return 0 if all_pass else 1


def cmd_motion_holonomy(args) -> int:
    _validate_common(args)
    spec = _grid(args)
    out = _outdir(args)
    motion = _load_motion(args, spec)
    z1 = _parse_complex(args.z_from)
    z2 = _parse_complex(args.z_to)
    hol = holonomy(motion, z1, z2, grid=spec if motion.global_flag else None)
    rows = ["alpha_re,alpha_im,from_re,from_im,to_re,to_im"]
    for a, wf, wt in zip(hol.tau, hol.tau_from, hol.tau_to):
        rows.append(",".join(repr(float(v)) for v in
                             (a.real, a.imag, wf.real, wf.imag, wt.real, wt.imag)))
    (out / "holonomy_tau.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    summary = {"z_from": z1, "z_to": z2, "tabulated_on_grid": hol.table is not None}
    if hol.table is not None:
        io.write_field_csv(ComplexField(spec, hol.table), out / "holonomy_grid.csv")
    io.write_json(summary, out / "holonomy.json")
    return 0


def cmd_current_mass(args) -> int:
    _validate_common(args)
    out = _outdir(args)
    current = io.load_current_json(args.current)
    region = DiskRegion(0j, args.region_radius)
    total = mass(current, region)
    per_leaf = []
    for k, a in enumerate(current.lam.tau):
        unit = np.zeros(current.lam.tau.size)
        unit[k] = current.weights[k]
        per_leaf.append({"alpha": complex(a),
                         "mass": mass(LaminarCurrent(current.lam, unit), region)})
    io.write_json({"total_mass": total, "region_radius": args.region_radius,
                   "per_leaf": per_leaf}, out / "mass.json")
    print(f"mass = {total:.6g}", file=sys.stderr)
    return 0


def cmd_current_residuals(args) -> int:
    _validate_common(args)
    out = _outdir(args)
    current = io.load_current_json(args.current)
    directed = directedness_residual(current)
    closed = closedness_residual(current)
    io.write_json({"directedness_residual": directed,
                   "closedness_residual": closed},
                  out / "residuals.json")
    print(f"directedness {directed:.3e}, closedness {closed:.3e}", file=sys.stderr)
    return 0


def cmd_current_decompose(args) -> int:
    _validate_common(args)
    out = _outdir(args)
    S = io.load_current_json(args.current)
    T = io.load_current_json(args.dominating)
    decomp = radon_nikodym(S, T)
    rows = ["alpha_re,alpha_im,density"]
    for a, f in zip(decomp.tau, decomp.densities):
        rows.append(f"{a.real!r},{a.imag!r},{float(f)!r}")
    (out / "density.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    exact = bool(np.array_equal(decomp.reconstruct(), decomp.s_weights))
    io.write_json({"densities": decomp.as_floats(),
                   "reconstruction_exact": exact}, out / "decompose.json")
    return 0


def cmd_current_refine(args) -> int:
    _validate_common(args)
    out = _outdir(args)
    current = io.load_current_json(args.current)
    center = _parse_complex(args.form_center) if args.form_center else 0j
    form = area_bump_form(center_w=center, radius_w=args.form_radius)
    trace = refine_subdivide(current, form, args.depth)
    rows = ["k,center_re,center_im,diameter_bound,support_diameter,mass,pairing"]
    for s in trace.steps:
        rows.append(",".join(repr(v) for v in
                             (s.k, s.center.real, s.center.imag, s.diameter_bound,
                              s.support_diameter, s.mass, s.pairing)))
    (out / "refine_trace.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    io.write_json({"base_pairing": pair(current, form),
                   "depth": args.depth,
                   "final_support_diameter": trace.steps[-1].support_diameter},
                  out / "refine.json")
    if not args.no_figures:
        plotting.save_refine_trace(trace.steps, out / "refine_trace.png")
    return 0


def cmd_approx_run(args) -> int:
    _validate_common(args)
    spec = _grid(args)
    out = _outdir(args)
    motion = _load_motion(args, spec)
    kappa = None
    if args.localize_r is not None:
        loc = localize(motion, args.localize_r)
        motion, kappa = loc.motion, loc.kappa
    lam = Lamination(motion)
    chi_ast = expr_parse(args.chi)
    g = StraightenedFunction(
        lambda z, alpha: np.asarray(expr_evaluate(chi_ast, alpha, z))
        + 0.0 * np.asarray(alpha),
        label=args.chi)

    eps_list = _eps_list(args)
    reports = []
    for eps in eps_list:
        moll = mollified_lamination(lam, eps, spec)
        approximate(g, moll)  # validates the C1 requirement
        rep = w1p_error(g, moll, lam, args.p, args.delta)
        reports.append(rep)
        trace = projection_trace(moll, lam, lam.tau[0], delta=args.delta)
        nu_vals = trace.nu[trace.interior & ~trace.flagged]
        io.write_json({
            "epsilon": eps,
            "kappa": kappa if kappa is not None else rep.kappa,
            "p": args.p,
            "p_max": rep.p_max if rep.p_max != float("inf") else None,
            "sup_error": rep.sup_error,
            "w1p_error": rep.w1p_error,
            "w1p_error_per_leaf": [
                {"alpha": a, "sup": s, "grad_lp": lp} for a, s, lp in rep.per_leaf],
            "leaf_deviation": rep.leaf_deviation,
            "out_of_regime": rep.out_of_regime,
            "nu_sup": float(np.max(nu_vals)) if nu_vals.size else 0.0,
            "flagged_points": trace.flagged_count(),
        }, out / f"report_eps_{eps:g}.json")
        diffmap = _difference_heatmap(g, moll, lam)
        io.write_pgm(diffmap, out / f"abs_error_eps_{eps:g}.pgm")
        if not args.no_figures:
            plotting.save_heatmap(diffmap, out / f"abs_error_eps_{eps:g}.png",
                                  title=f"|f_eps - f| per leaf, eps={eps:g}")
    rows = ["epsilon,sup_error,w1p_error,leaf_deviation,out_of_regime"]
    for eps, rep in zip(eps_list, reports):
        rows.append(f"{eps!r},{rep.sup_error!r},{rep.w1p_error!r},"
                    f"{rep.leaf_deviation!r},{int(rep.out_of_regime)}")
    (out / "convergence.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    if any(rep.out_of_regime for rep in reports):
        print(f"warning: p={args.p} >= p_max={reports[0].p_max:.3g}; outside the "
              f"guaranteed regime", file=sys.stderr)
    if not args.no_figures:
        plotting.save_convergence(
            eps_list,
            {"sup |f_eps - f|": [max(r.sup_error, 1e-17) for r in reports],
             "W^{1,p} error": [max(r.w1p_error, 1e-17) for r in reports]},
            out / "convergence.png")
    return 0


def _difference_heatmap(g, moll, lam, n_side: int = 96):
    """|f_eps - f| over the (z grid x tau) table: one panel per leaf,
    stacked horizontally."""
    t = np.linspace(-0.9, 0.9, n_side)
    ZX, ZY = np.meshgrid(t, t)
    Z = ZX + 1j * ZY
    mask = np.abs(Z) <= 0.9
    tau = lam.tau
    panels = []
    for a in tau:
        Zm = Z[mask]
        w_true = lam.motion.phi(np.full(Zm.shape, a), Zm)
        b = moll.index(Zm, w_true)
        vals = np.abs(np.asarray(g(Zm, b)) - np.asarray(g(Zm, np.full(Zm.shape, a))))
        plane = np.zeros((n_side, n_side))
        plane[mask] = vals
        panels.append(plane)
    return np.hstack(panels)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qclab",
        description="numerical laboratory for quasiconformal maps, holomorphic "
                    "motions, and laminar currents in the bidisk")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("beltrami-solve", help="principal solution of a coefficient")
    p.add_argument("--mu", required=True,
                   help="CSV path or built-in (zero, radial-stretch:K=2, "
                        "disk:k=0.3, bump-mu:amp=1)")
    _add_common(p)
    p.set_defaults(fn=cmd_beltrami_solve)

    p = sub.add_parser("motion-check", help="disjointness/holomorphy/Schwarz/"
                                            "Harnack checks")
    p.add_argument("--motion", required=True,
                   help="motion JSON path or family:<name>")
    _add_common(p)
    p.set_defaults(fn=cmd_motion_check)

    p = sub.add_parser("motion-holonomy", help="tabulate the holonomy between fibers")
    p.add_argument("--motion", required=True)
    p.add_argument("--z-from", default="0")
    p.add_argument("--z-to", default="0.4")
    _add_common(p)
    p.set_defaults(fn=cmd_motion_holonomy)

    p = sub.add_parser("current-mass", help="graph-area mass of a current")
    p.add_argument("--current", required=True, help="current JSON path")
    p.add_argument("--region-radius", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(fn=cmd_current_mass)

    p = sub.add_parser("current-residuals", help="directedness and closedness")
    p.add_argument("--current", required=True)
    _add_common(p)
    p.set_defaults(fn=cmd_current_residuals)

    p = sub.add_parser("current-decompose", help="Radon-Nikodym density of S <= T")
    p.add_argument("--current", required=True, help="S (dominated) JSON path")
    p.add_argument("--dominating", required=True, help="T JSON path")
    _add_common(p)
    p.set_defaults(fn=cmd_current_decompose)

    p = sub.add_parser("current-refine", help="transverse subdivision sequence")
    p.add_argument("--current", required=True)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--form-center", default="", help="witness form bump center (w)")
    p.add_argument("--form-radius", dest="form_radius", type=float, default=0.6)
    _add_common(p)
    p.set_defaults(fn=cmd_current_refine)

    p = sub.add_parser("approx-run", help="mollification sweep of the approximants")
    p.add_argument("--motion", required=True)
    p.add_argument("--chi", default="(alpha + conj(alpha))/2",
                   help="transverse function (expression in alpha)")
    p.add_argument("--localize-r", type=float, default=None,
                   help="localize the base to D(0,r) first")
    _add_common(p)
    p.set_defaults(fn=cmd_approx_run)

    p = sub.add_parser("transversal-dilatation",
                       help="holonomy dilatation between transversals")
    p.add_argument("--motion", required=True)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--z1", default="0.2")
    p.add_argument("--graph", default="0.1 + z/4",
                   help="target transversal w = g(z) (expression in z)")
    _add_common(p)
    p.set_defaults(fn=cmd_transversal_dilatation)

    return parser


def cmd_transversal_dilatation(args) -> int:
    _validate_common(args)
    spec = _grid(args)
    out = _outdir(args)
    motion = _load_motion(args, spec)
    lam = Lamination(motion)
    moll = mollified_lamination(lam, args.eps, spec)
    g_ast = expr_parse(args.graph)
    z1 = _parse_complex(args.z1)
    t1 = VerticalTransversal(z1)
    t2 = GraphTransversal(lambda Z: np.asarray(expr_evaluate(g_ast, 0j, Z))
                          + 0.0 * np.asarray(Z), label=args.graph)
    betas = leaf_bundle_near(moll, t2, z1)
    rep = transversal_dilatation(moll, t1, t2, betas)
    io.write_json({"sup_dilatation": rep.sup_dilatation, "kappa": rep.kappa,
                   "flagged": rep.flagged,
                   "samples": [{"beta": b, "dilatation": d} for b, d in rep.samples]},
                  out / "transversal_dilatation.json")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except QclabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
