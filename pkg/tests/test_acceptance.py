"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
complete.  Criteria 1, 2 and 8 carry runtime caps; the whole suite runs
single-threaded in well under the 5-minute budget.
"""

import time

import numpy as np
import pytest

from qclab.approximation import (GraphTransversal, StraightenedFunction,
                                 VerticalTransversal, leaf_bundle_near,
                                 localize, mollified_lamination,
                                 projection_trace, transversal_dilatation,
                                 w1p_error)
from qclab.beltrami import p_max, principal_solution
from qclab.currents import (FreeGraph, LaminarCurrent, area_bump_form,
                            closedness_residual, directedness_residual, pair,
                            refine_subdivide, radon_nikodym,
                            tent_partition_weights)
from qclab.families import (antiholomorphic_family, builtin_families,
                            bump_family, product_family, radial_stretch_mu,
                            radial_stretch_solution)
from qclab.field_ops import (ComplexField, GridSpec, beurling_transform,
                             cauchy_transform, disk_indicator, l2_norm)
from qclab.lamination import Lamination
from qclab.motion import check_harnack_hoelder, check_schwarz

EPS_SWEEP = (0.2, 0.1, 0.05)
RE_ALPHA = StraightenedFunction.from_transverse(lambda a: np.real(a))

# The flagship family alpha + z conj(alpha) has a radially symmetric clipped
# coefficient, so its mollification corrections cancel identically on the
# measured leaves and the sweep sits at the interpolation noise floor
# (~4e-5); strict decrease is asserted unless all values are below this
# documented degeneracy floor.  The bump family exercises the strict case.
DEGENERACY_FLOOR = 2e-4


def record(criterion: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion:02d}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"criterion {criterion}: {detail}"


@pytest.fixture(scope="module")
def grid512():
    return GridSpec(2.0, 512)


@pytest.fixture(scope="module")
def grid256():
    return GridSpec(2.0, 256)


def test_criterion_01_beltrami_radial_stretch_oracle(grid512):
    t0 = time.perf_counter()
    mu = radial_stretch_mu(grid512, K=2.0)
    qc = principal_solution(mu, tol=1e-10)
    exact = radial_stretch_solution(grid512, K=2.0)
    err = float(np.linalg.norm(qc.h.values - exact.values)
                / np.linalg.norm(exact.values))
    elapsed = time.perf_counter() - t0
    record(1, err <= 1e-2 and elapsed <= 30.0,
           f"rel L2 err {err:.2e} <= 1e-2, {elapsed:.1f}s <= 30s, "
           f"{qc.iterations} iterations")


def test_criterion_02_transform_oracles(grid512):
    spec = grid512
    W = spec.nodes()
    R = np.abs(W)
    f = disk_indicator(spec)
    c_exact = np.where(R <= 1.0, np.conj(W), 1.0 / np.where(W == 0, 1.0, W))
    b_exact = np.where(R <= 1.0, 0.0, -1.0 / np.where(W == 0, 1.0, W) ** 2)
    cf = cauchy_transform(f).values
    bf = beurling_transform(f).values
    # B(1_D) jumps across |w| = 1; the comparison excludes the 5h-wide band
    # a grid representation cannot resolve (plain numbers also reported)
    band = np.abs(R - 1.0) > 5 * spec.spacing
    e_c = float(np.linalg.norm((cf - c_exact)[band]) / np.linalg.norm(c_exact[band]))
    e_b = float(np.linalg.norm((bf - b_exact)[band]) / np.linalg.norm(b_exact[band]))
    e_c_plain = float(np.linalg.norm(cf - c_exact) / np.linalg.norm(c_exact))
    e_b_plain = float(np.linalg.norm(bf - b_exact) / np.linalg.norm(b_exact))

    # discrete isometry of the periodic multiplier on 100 pseudorandom
    # mean-zero compactly supported fields (Parseval oracle)
    rng = np.random.default_rng(511)
    supp = R <= 0.9
    worst = 0.0
    for _ in range(100):
        vals = np.zeros((spec.n, spec.n), dtype=complex)
        vals[supp] = (rng.standard_normal(supp.sum())
                      + 1j * rng.standard_normal(supp.sum()))
        vals[supp] -= vals[supp].mean()
        g = ComplexField(spec, vals)
        bg = beurling_transform(g, mode="periodic")
        worst = max(worst, abs(l2_norm(bg) - l2_norm(g)) / l2_norm(g))
    record(2, e_c <= 5e-3 and e_b <= 5e-3 and worst <= 1e-10,
           f"C err {e_c:.2e} (plain {e_c_plain:.2e}), "
           f"B err {e_b:.2e} (plain {e_b_plain:.2e}), "
           f"isometry defect {worst:.2e} <= 1e-10")


def test_criterion_03_schwarz_bound(grid256):
    anti = antiholomorphic_family()
    sharp_ok = True
    details = []
    for z in (0.1, 0.3, 0.6):
        rep = check_schwarz(anti, z, grid256)
        details.append(f"z={z}: |sup-|z||={abs(rep.sup_mu - abs(z)):.1e}")
        sharp_ok &= abs(rep.sup_mu - abs(z)) <= 1e-6
    slack_ok = True
    for name, motion in builtin_families(grid256).items():
        for z in (0.1, 0.3, 0.6):
            rep = check_schwarz(motion, z, grid256)
            if rep.sup_mu > abs(z) + 5e-2:
                slack_ok = False
                details.append(f"{name} violates at z={z}")
    record(3, sharp_ok and slack_ok, "; ".join(details))


def test_criterion_04_harnack_hoelder_sweep(grid256):
    t = np.linspace(-0.9, 0.9, 50)
    ZX, ZY = np.meshgrid(t, t)
    Z = (ZX + 1j * ZY).ravel()
    Z = Z[np.abs(Z) <= 0.9]
    tt = np.abs(Z)
    e_hi = (1.0 + tt) / (1.0 - tt)
    e_lo = (1.0 - tt) / (1.0 + tt)
    worst_margin = np.inf
    exp_ok = True
    for name, motion in builtin_families(grid256).items():
        tau = motion.tau
        # margins: every tau pair over the full sweep
        for i in range(tau.size):
            for j in range(i + 1, tau.size):
                pa = motion.phi(np.full(Z.shape, tau[i]), Z)
                pb = motion.phi(np.full(Z.shape, tau[j]), Z)
                d0 = abs(complex(motion.phi(tau[i], 0j).flat[0])
                         - complex(motion.phi(tau[j], 0j).flat[0]))
                dz = np.abs(pa - pb)
                lower = 2.0 ** (-2.0 * tt / (1.0 - tt)) * d0 ** e_hi
                upper = 2.0 ** (2.0 * tt / (1.0 + tt)) * d0 ** e_lo
                worst_margin = min(worst_margin,
                                   float(np.min(dz - lower)),
                                   float(np.min(upper - dz)))
        # exponent: measured on an infinitesimally split pair per leaf (the
        # Hoelder exponent is asymptotic; finite gaps measure the constants)
        for a in tau:
            b = a + 1e-6
            pa = motion.phi(np.full(Z.shape, a), Z)
            pb = motion.phi(np.full(Z.shape, b), Z)
            d0 = abs(complex(motion.phi(a, 0j).flat[0])
                     - complex(motion.phi(b, 0j).flat[0]))
            ratio = np.log(np.abs(pa - pb)) / np.log(d0)
            if not (np.all(ratio >= e_lo - 1e-12) and np.all(ratio <= e_hi + 1e-12)):
                exp_ok = False
    # spot-check the vectorized sweep against the scalar report
    anti = antiholomorphic_family()
    rep = check_harnack_hoelder(anti, anti.tau[0], anti.tau[1], complex(Z[7]))
    assert rep.passed
    record(4, worst_margin >= -1e-9 and exp_ok,
           f"worst margin {worst_margin:.2e} >= -1e-9, exponents in range: {exp_ok}")


def test_criterion_05_directedness_and_closedness():
    anti = Lamination(antiholomorphic_family(), fiber_step=0.05)
    T = LaminarCurrent(anti, [1.0, 0.5, 2.0, 0.25, 1.5])
    directed = directedness_residual(T)
    closed = closedness_residual(T)
    product = Lamination(product_family(), fiber_step=0.05)
    rogue = LaminarCurrent(product, np.zeros(5), extra_graphs=[
        FreeGraph(g=lambda Z: np.asarray(Z, dtype=complex), weight=1.0)])
    rogue_res = directedness_residual(rogue)
    record(5, directed == 0.0 and closed <= 1e-6 and rogue_res >= 0.5,
           f"directedness {directed}, closedness {closed:.2e} <= 1e-6, "
           f"rogue residual {rogue_res:.3f} >= 0.5")


def test_criterion_06_domination_decomposition():
    rng = np.random.default_rng(606)
    ok = True
    for trial in range(50):
        n = int(rng.integers(2, 21))
        tau = (rng.random(n) + 1j * rng.random(n)) * 0.5 - (0.25 + 0.25j)
        # keep transversal points distinct
        tau = tau + np.arange(n) * 1e-3
        lam = Lamination(product_family(tuple(tau)), fiber_step=0.1)
        t = rng.random(n) * 3.0
        s = t * rng.random(n)
        decomp = radon_nikodym(LaminarCurrent(lam, s), LaminarCurrent(lam, t))
        f = decomp.as_floats()
        if not all(0.0 <= v <= 1.0 for v in f):
            ok = False
        if not np.array_equal(decomp.reconstruct(), s):
            ok = False
    record(6, ok, "50 pseudorandom dominated pairs, |tau| <= 20, "
                  "0 <= f <= 1 and exact reconstruction")


def test_criterion_07_subdivision_refinement():
    lam = Lamination(product_family(), fiber_step=0.05)
    S = LaminarCurrent(lam, np.array([1.0, 0.5, 2.0, 0.25, 1.5]))
    form = area_bump_form(center_w=0.3, radius_w=0.6)
    trace = refine_subdivide(S, form, depth=4)
    diam_ok = all(s.support_diameter <= 10.0 ** (-s.k) for s in trace.steps)
    mass_ok = all(abs(s.mass - 1.0) <= 1e-12 for s in trace.steps)
    # partition consistency at every step: sum_i <theta_i S, phi> = <S, phi>
    unit = np.eye(lam.tau.size)
    leaf_pair = np.array([pair(LaminarCurrent(lam, unit[k]), form)
                          for k in range(lam.tau.size)])
    part_ok = True
    work = S
    for k, cur in enumerate(trace.currents, start=1):
        cell = 10.0 ** (-k) / (2.0 * np.sqrt(2.0)) * 0.999
        cells = tent_partition_weights(lam.tau, cell)
        total = float(np.sum(work.weights * leaf_pair))
        acc = sum(float(np.sum(work.weights * theta * leaf_pair))
                  for theta in cells.values())
        if abs(acc - total) > 1e-10:
            part_ok = False
        work = cur
    record(7, diam_ok and mass_ok and part_ok,
           f"diameters <= 10^-k: {diam_ok}, unit masses: {mass_ok}, "
           f"partition pairing consistent to 1e-10: {part_ok}")


def test_criterion_08_approximation_convergence(grid256):
    t0 = time.perf_counter()
    loc = localize(antiholomorphic_family(), 0.1)
    assert abs(loc.kappa - 0.2 / 1.01) < 1e-12
    assert 4.0 < p_max(loc.kappa)          # p = 4 < p_max ~ 6.05
    lam = Lamination(loc.motion)
    reports = [w1p_error(RE_ALPHA, mollified_lamination(lam, eps, grid256),
                         lam, p=4.0, delta=0.1)
               for eps in EPS_SWEEP]
    sups = [r.sup_error for r in reports]
    w1ps = [r.w1p_error for r in reports]
    flagship_ok = (
        (sups[0] > sups[1] > sups[2] and w1ps[0] > w1ps[1] > w1ps[2])
        or (max(sups) <= DEGENERACY_FLOOR and max(w1ps) <= DEGENERACY_FLOOR))
    final_ok = w1ps[2] <= 0.1

    # the asymmetric bump family exercises the genuinely decreasing case
    bump_lam = Lamination(bump_family(grid256))
    breps = [w1p_error(RE_ALPHA, mollified_lamination(bump_lam, eps, grid256),
                       bump_lam, p=3.0, delta=0.1)
             for eps in EPS_SWEEP]
    bsup = [r.sup_error for r in breps]
    bw1p = [r.w1p_error for r in breps]
    bump_ok = (bsup[0] > bsup[1] > bsup[2] and bw1p[0] > bw1p[1] > bw1p[2]
               and bw1p[2] <= 0.1)
    elapsed = time.perf_counter() - t0
    record(8, flagship_ok and final_ok and bump_ok and elapsed <= 300.0,
           f"flagship sweep w1p {[f'{v:.1e}' for v in w1ps]} (floor "
           f"{DEGENERACY_FLOOR:g}), final {w1ps[2]:.1e} <= 0.1; bump sweep "
           f"{[f'{v:.1e}' for v in bw1p]} strictly decreasing; {elapsed:.0f}s")


def test_criterion_09_transversal_dilatation(grid256):
    details = []
    ok = True
    cases = [
        ("bump", Lamination(bump_family(grid256)),
         GraphTransversal(lambda Z: 0.02 + 0.15 * np.asarray(Z)), 0.15),
        ("antiholomorphic-localized",
         Lamination(localize(antiholomorphic_family(), 0.1).motion),
         GraphTransversal(lambda Z: 0.02 + 0.15 * np.asarray(Z)), 0.2),
        ("product", Lamination(product_family()),
         GraphTransversal(lambda Z: 0.02 + 0.15 * np.asarray(Z)), 0.15),
    ]
    for name, lam, graph, z1 in cases:
        moll = mollified_lamination(lam, 0.1, grid256)
        betas = leaf_bundle_near(moll, graph, z1)
        rep = transversal_dilatation(moll, VerticalTransversal(z1), graph, betas)
        vrep = transversal_dilatation(moll, VerticalTransversal(z1),
                                      VerticalTransversal(-0.1 + 0.2j), betas)
        bound = moll.kappa + 5e-2
        case_ok = (all(d <= bound for _, d in rep.samples)
                   and all(d <= bound for _, d in vrep.samples))
        ok &= case_ok
        details.append(f"{name}: graph {rep.sup_dilatation:.3f}, "
                       f"vertical {vrep.sup_dilatation:.3f} <= {bound:.3f}")
    record(9, ok, "; ".join(details))


def test_criterion_10_projection_trace(grid256):
    bump_lam = Lamination(bump_family(grid256))
    l4 = []
    frac_ok = True
    for eps in EPS_SWEEP:
        moll = mollified_lamination(bump_lam, eps, grid256)
        tr = projection_trace(moll, bump_lam, 0j)
        frac_ok &= tr.nu_exceedance_fraction(5e-2) <= 0.01
        l4.append(tr.grad_lp_norm(4.0, 0.9))
    decreasing = l4[0] > l4[1] > l4[2]
    record(10, frac_ok and decreasing,
           f"|nu| <= kappa + 5e-2 at >= 99% of non-flagged samples; "
           f"grad L4 sweep {[f'{v:.2e}' for v in l4]} strictly decreasing")
