import numpy as np
import pytest

from qclab.currents import (FreeGraph, LaminarCurrent, TestForm,
                            WeightedCurrent, area_bump_form,
                            closedness_residual, default_one_form_dictionary,
                            directedness_residual, mass, pair, pair_exterior,
                            radon_nikodym, refine_subdivide,
                            tent_partition_weights)
from qclab.errors import (ContradictionWitnessError, DominationError,
                          ValidationError)
from qclab.families import antiholomorphic_family, product_family
from qclab.field_ops import DiskRegion
from qclab.lamination import Lamination
from qclab.motion import FormulaMotion

PI = np.pi


@pytest.fixture(scope="module")
def product_lam():
    return Lamination(product_family(), fiber_step=0.02)


@pytest.fixture(scope="module")
def anti_lam():
    return Lamination(antiholomorphic_family(), fiber_step=0.05)


# --- mass ----------------------------------------------------------------------

def test_mass_horizontal_leaf(product_lam):
    T = LaminarCurrent(product_lam, [1.0, 0, 0, 0, 0])
    assert abs(mass(T, DiskRegion(0j, 1.0)) - PI) <= 1e-2


def test_mass_is_linear_in_weights(product_lam):
    T1 = LaminarCurrent(product_lam, [1.0, 2.0, 0, 0, 0])
    T2 = LaminarCurrent(product_lam, [2.0, 4.0, 0, 0, 0])
    assert mass(T2) == pytest.approx(2.0 * mass(T1), rel=1e-12)


def test_mass_sloped_leaf():
    lam = Lamination(FormulaMotion("alpha + z/2", [0j], epsilon_bound=0.4),
                     fiber_step=0.02)
    T = LaminarCurrent(lam, [1.0])
    assert abs(mass(T, DiskRegion(0j, 1.0)) - 1.25 * PI) <= 1e-2


def test_mass_region_validation(product_lam):
    T = LaminarCurrent(product_lam, np.ones(5))
    with pytest.raises(ValidationError):
        mass(T, DiskRegion(0.8, 0.5))


def test_weights_validation(product_lam):
    with pytest.raises(ValidationError):
        LaminarCurrent(product_lam, [1.0, -0.5, 0, 0, 0])
    with pytest.raises(ValidationError):
        LaminarCurrent(product_lam, [1.0])


# --- pairing ---------------------------------------------------------------------

def test_pair_horizontal_leaf_is_base_integral(product_lam):
    # T = [w = 0]: tau of the product family contains 0.3, re-index a single
    # horizontal leaf at 0 instead
    lam = Lamination(FormulaMotion("alpha", [0j], epsilon_bound=0.5),
                     fiber_step=0.02)
    T = LaminarCurrent(lam, [1.0])
    form = area_bump_form(center_w=0j, radius_w=0.7)
    got = pair(T, form)
    # independent scalar quadrature of psi(z, 0) over the same z grid
    Z, area = lam.z_grid(1.0)
    mask = np.abs(Z) <= 1.0
    psi = form.coefficients["psi"]
    expect = float(np.sum(np.real(psi(Z[mask], np.zeros(mask.sum()))))) * area
    assert got == pytest.approx(expect, abs=1e-12)


def test_pair_zero_form_and_linearity(product_lam):
    zero_form = TestForm.area(lambda Z, W: 0.0 * np.asarray(Z))
    T = LaminarCurrent(product_lam, np.ones(5))
    assert pair(T, zero_form) == 0.0
    form = area_bump_form(radius_w=0.9)
    w1 = np.array([1.0, 0.5, 0, 2.0, 0])
    w2 = np.array([0.25, 1.5, 1.0, 0, 0])
    p1 = pair(LaminarCurrent(product_lam, w1), form)
    p2 = pair(LaminarCurrent(product_lam, w2), form)
    p12 = pair(LaminarCurrent(product_lam, w1 + 2 * w2), form)
    assert p12 == pytest.approx(p1 + 2 * p2, abs=1e-12)


def test_pair_rejects_one_forms(product_lam):
    T = LaminarCurrent(product_lam, np.ones(5))
    form = default_one_form_dictionary()[0]
    with pytest.raises(ValidationError):
        pair(T, form)


def test_form_support_validation():
    with pytest.raises(ValidationError):
        TestForm.area(lambda Z, W: np.ones(np.shape(Z)), z_support=1.2)


# --- closedness -------------------------------------------------------------------

def test_stokes_vanishes_on_single_leaves(anti_lam):
    # the pullback algebra: <[L], d beta> = 0 for compactly supported beta
    for k in range(2):
        w = np.zeros(anti_lam.tau.size)
        w[k] = 1.0
        T = LaminarCurrent(anti_lam, w)
        for form in default_one_form_dictionary()[:8]:
            assert abs(pair_exterior(T, form)) <= 1e-6


def test_closedness_uniformly_laminar(anti_lam):
    T = LaminarCurrent(anti_lam, [1.0, 0.5, 2.0, 0.25, 1.5])
    assert closedness_residual(T) <= 1e-6


def test_closedness_leaf_constant_density(anti_lam):
    # chi constant along leaves: chi S remains closed
    chi = [0.3, 1.2, 0.8, 2.0, 0.1]
    S = WeightedCurrent(anti_lam, [1.0, 0.5, 2.0, 0.25, 1.5], chi,
                        integrability_p=2.0)
    assert closedness_residual(S) <= 1e-6


def test_closedness_detects_nonconstant_density(product_lam):
    # density Re z varies along every leaf: d(gT) does not vanish
    g = lambda Z: np.real(Z)
    S = WeightedCurrent(product_lam, np.ones(5), [g] * 5, integrability_p=2.0)
    assert closedness_residual(S) >= 1e-3


# --- directedness -------------------------------------------------------------------

def test_directedness_subordinate_exactly_zero(anti_lam):
    T = LaminarCurrent(anti_lam, [1.0, 2.0, 0.5, 0, 1.0])
    assert directedness_residual(T) == 0.0


def test_directedness_rogue_graph(product_lam):
    rogue = FreeGraph(g=lambda Z: np.asarray(Z, dtype=complex), weight=1.0,
                      label="w=z")
    S = LaminarCurrent(product_lam, np.zeros(5), extra_graphs=[rogue])
    res = directedness_residual(S)
    assert res >= 0.5
    assert res == pytest.approx(1.0, abs=1e-6)


def test_directedness_empty_current(product_lam):
    S = LaminarCurrent(product_lam, np.zeros(5))
    assert directedness_residual(S) == 0.0


# --- Radon-Nikodym -------------------------------------------------------------------

def test_radon_nikodym_spec_example(product_lam):
    lam = Lamination(product_family((0.1, 0.3)), fiber_step=0.05)
    T = LaminarCurrent(lam, [2.0, 3.0])
    S = LaminarCurrent(lam, [1.0, 3.0])
    decomp = radon_nikodym(S, T)
    assert decomp.as_floats() == [0.5, 1.0]
    assert np.array_equal(decomp.reconstruct(), S.weights)


def test_radon_nikodym_identity(product_lam):
    T = LaminarCurrent(product_lam, [1.0, 2.0, 3.0, 0.0, 0.5])
    decomp = radon_nikodym(T, T)
    assert decomp.as_floats() == [1.0, 1.0, 1.0, 0.0, 1.0]


def test_radon_nikodym_violation_names_witness(product_lam):
    T = LaminarCurrent(product_lam, [2.0, 3.0, 1, 1, 1])
    S = LaminarCurrent(product_lam, [3.0, 3.0, 1, 1, 1])
    with pytest.raises(DominationError) as err:
        radon_nikodym(S, T)
    assert err.value.witness == complex(product_lam.tau[0])


def test_radon_nikodym_exact_on_random_pairs(product_lam, rng):
    for _ in range(25):
        t = rng.random(5) * 3.0
        s = t * rng.random(5)
        S = LaminarCurrent(product_lam, s)
        T = LaminarCurrent(product_lam, t)
        decomp = radon_nikodym(S, T)
        f = decomp.as_floats()
        assert all(0.0 <= v <= 1.0 for v in f)
        assert np.array_equal(decomp.reconstruct(), s)


# --- subdivision ---------------------------------------------------------------------

def test_tent_partition_sums_to_one(rng):
    pts = (rng.random(30) + 1j * rng.random(30)) - (0.5 + 0.5j)
    cells = tent_partition_weights(pts, 0.03)
    total = np.zeros(pts.shape)
    for theta in cells.values():
        total += theta
    assert np.max(np.abs(total - 1.0)) <= 1e-12


def test_refine_two_point_selection():
    lam = Lamination(product_family((0.0, 0.5)), fiber_step=0.05)
    S = LaminarCurrent(lam, [1.0, 1.0])
    form = area_bump_form(center_w=0j, radius_w=0.25)   # positive only near L_0
    trace = refine_subdivide(S, form, depth=1)
    step = trace.steps[0]
    assert step.support_diameter == 0.0                  # single point support
    assert trace.currents[0].weights[1] == 0.0
    assert step.mass == pytest.approx(1.0, abs=1e-12)


def test_refine_depth_three_diameters(product_lam):
    S = LaminarCurrent(product_lam, np.ones(5))
    form = area_bump_form(center_w=0.3, radius_w=0.6)
    trace = refine_subdivide(S, form, depth=3)
    for step in trace.steps:
        assert step.support_diameter <= 10.0 ** (-step.k)
        assert step.mass == pytest.approx(1.0, abs=1e-12)
        assert step.pairing > 0.0


def test_refine_partition_pairing_consistency(product_lam):
    S = LaminarCurrent(product_lam, np.array([1.0, 0.5, 2.0, 0.25, 1.5]))
    form = area_bump_form(center_w=0j, radius_w=0.9)
    total = pair(S, form)
    unit = np.eye(5)
    leaf_pair = np.array([pair(LaminarCurrent(product_lam, unit[k]), form)
                          for k in range(5)])
    cells = tent_partition_weights(product_lam.tau, 0.03)
    acc = 0.0
    for theta in cells.values():
        acc += float(np.sum(S.weights * theta * leaf_pair))
    assert abs(acc - total) <= 1e-10


def test_refine_single_leaf_fixed_point():
    lam = Lamination(product_family((0.2,)), fiber_step=0.05)
    S = LaminarCurrent(lam, [3.0])
    form = area_bump_form(center_w=0.2, radius_w=0.5)
    trace = refine_subdivide(S, form, depth=4)
    for step, cur in zip(trace.steps, trace.currents):
        assert step.support_diameter == 0.0
        assert step.mass == pytest.approx(1.0, abs=1e-12)
        assert cur.weights[0] > 0


def test_refine_requires_positive_pairing():
    lam = Lamination(product_family((0.0, 0.5)), fiber_step=0.05)
    S = LaminarCurrent(lam, [0.0, 1.0])
    form = area_bump_form(center_w=0j, radius_w=0.25)  # vanishes on L_{0.5}
    with pytest.raises(ValidationError):
        refine_subdivide(S, form, depth=2)


def test_refine_weighted_current_keeps_density(product_lam):
    S = WeightedCurrent(product_lam, np.ones(5), [0.5, 1.0, 0.25, 2.0, 1.0],
                        integrability_p=1.5)
    form = area_bump_form(center_w=0.3, radius_w=0.7)
    trace = refine_subdivide(S, form, depth=2)
    assert isinstance(trace.currents[-1], WeightedCurrent)
    assert trace.steps[-1].mass == pytest.approx(1.0, abs=1e-12)
