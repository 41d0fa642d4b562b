import numpy as np
import pytest

from qclab.errors import ValidationError
from qclab.families import antiholomorphic_family, product_family
from qclab.lamination import (Lamination, c1_extend, directed_form,
                              extend_constant_along_leaves,
                              leaf_function_from_callable, straighten, w1p_norm)
from qclab.motion import FormulaMotion

SQRT_PI = 1.7724538509055159


@pytest.fixture(scope="module")
def product_lam():
    return Lamination(product_family(), fiber_step=0.05)


@pytest.fixture(scope="module")
def anti_lam():
    return Lamination(antiholomorphic_family(), fiber_step=0.05)


# --- straightening ------------------------------------------------------------

def test_straighten_product_is_identity(product_lam):
    chart = straighten(product_lam)
    w = np.array([0.2 + 0.1j, -0.3j, 0.45])
    got = chart.forward(0.4, w)
    assert np.max(np.abs(got - w)) < 1e-10


def test_straighten_antiholomorphic_closed_form(anti_lam):
    chart = straighten(anti_lam)
    z = 0.3 - 0.2j
    w = np.array([0.1 + 0.2j, -0.25, 0.3j])
    expected = (w - z * np.conj(w)) / (1.0 - abs(z) ** 2)
    assert np.max(np.abs(chart.forward(z, w) - expected)) < 1e-9


def test_straighten_roundtrip_on_leaf_points(anti_lam):
    chart = straighten(anti_lam)
    motion = anti_lam.motion
    z = 0.25 + 0.35j
    leaf_pts = motion.phi(motion.tau, np.full(motion.tau.shape, z))
    assert chart.roundtrip_error(z, leaf_pts) < 1e-9


# --- directed form --------------------------------------------------------------

def test_directed_form_horizontal_leaves(product_lam):
    val = directed_form(product_lam, 0.3, product_lam.tau[0])
    assert val.slope == pytest.approx(0.0, abs=1e-10)
    assert val.apply(0.0, 1.0) == 1.0  # normalization dl(0,1) = 1, exact


def test_directed_form_affine_family():
    lam = Lamination(FormulaMotion("alpha*(1 + z/2)", [0.2, -0.1j],
                                   epsilon_bound=0.4))
    val = directed_form(lam, 0.3 + 0.1j, 0.2)
    assert val.slope == pytest.approx(0.1, abs=1e-9)
    assert val.dz_coefficient == pytest.approx(-0.1, abs=1e-9)


def test_directed_form_annihilates_tangent(anti_lam):
    val = directed_form(anti_lam, 0.2 - 0.4j, anti_lam.tau[1])
    # dl(1, phi') = -phi' + phi' is exactly zero in floating point
    assert val.apply(1.0, val.slope) == 0.0


# --- leaf functions and W^{1,p} -------------------------------------------------

def test_w1p_norm_constant(product_lam):
    f = extend_constant_along_leaves(lambda a: 2.5 - 1j, product_lam)
    assert w1p_norm(f, 2.0) == pytest.approx(abs(2.5 - 1j))
    assert float(np.max(np.abs(f.grad_x))) == 0.0


def test_w1p_norm_re_z_single_leaf():
    lam = Lamination(FormulaMotion("alpha", [0j], epsilon_bound=0.5),
                     fiber_step=0.02)
    f = leaf_function_from_callable(lam, lambda z, a: np.real(z) + 0j * np.asarray(z))
    val = w1p_norm(f, 2.0, delta=0.0)
    assert abs(val - (1.0 + SQRT_PI)) <= 2e-2


def test_w1p_norm_homogeneity_and_triangle(product_lam, rng):
    def rand_fn():
        c1 = complex(rng.standard_normal(), rng.standard_normal())
        c2 = complex(rng.standard_normal(), rng.standard_normal())
        return lambda z, a: c1 * np.asarray(z) ** 2 + c2 * np.conj(np.asarray(z)) + a

    for _ in range(5):
        f = leaf_function_from_callable(product_lam, rand_fn())
        g = leaf_function_from_callable(product_lam, rand_fn())
        nf = w1p_norm(f, 3.0)
        assert abs(w1p_norm(f.scaled(2.0), 3.0) - 2.0 * nf) <= 1e-12 * max(1.0, nf)
        assert w1p_norm(f.plus(g), 3.0) <= nf + w1p_norm(g, 3.0) + 1e-12


def test_w1p_norm_validation(product_lam):
    f = extend_constant_along_leaves(lambda a: 1.0, product_lam)
    with pytest.raises(ValidationError):
        w1p_norm(f, 1.0)
    with pytest.raises(ValidationError):
        w1p_norm(f, 2.0, delta=1.5)


def test_extend_constant_along_leaves_values(product_lam):
    f = extend_constant_along_leaves(lambda a: a.real, product_lam)
    k = int(np.argmin(np.abs(product_lam.tau - 0.3)))
    assert np.allclose(f.values[..., k], 0.3)
    assert float(np.max(f.gradient_magnitude())) == 0.0


# --- ambient extension -----------------------------------------------------------

def test_c1_extend_exact_on_tau(product_lam):
    f = extend_constant_along_leaves(lambda a: a.real + 2 * a.imag, product_lam)
    ext = c1_extend(f, smoothing=0.05)
    z0 = complex(f.z_points.ravel()[17])
    for a in product_lam.tau:
        expected = a.real + 2 * a.imag
        assert ext.blend_at(z0, complex(a)) == pytest.approx(expected, abs=1e-12)


def test_c1_extend_alpha_independent_exact(product_lam):
    f = extend_constant_along_leaves(lambda a: 3.25, product_lam)
    ext = c1_extend(f, smoothing=0.2)
    z0 = complex(f.z_points.ravel()[5])
    for alpha in (0.1 + 0.4j, -0.3, 1.2j):
        assert ext.at(z0, alpha) == pytest.approx(3.25, abs=1e-12)


def test_c1_extend_lipschitz_scan(product_lam, rng):
    chi = lambda a: a.real - 0.7 * a.imag        # Lipschitz constant 0.7..1
    G = abs(complex(1.0, -0.7))
    f = extend_constant_along_leaves(chi, product_lam)
    ext = c1_extend(f, smoothing=0.05)
    z0 = complex(f.z_points.ravel()[0])
    pts = 0.6 * (rng.random(40) + 1j * rng.random(40)) - (0.3 + 0.3j)
    vals = [ext.blend_at(z0, complex(p)) for p in pts]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = abs(pts[i] - pts[j])
            if d < 1e-9:
                continue
            ratio = abs(vals[i] - vals[j]) / d
            assert ratio <= 3.0 * G + 1e-9, (pts[i], pts[j], ratio)


def test_c1_extend_linear_in_f(product_lam):
    f = extend_constant_along_leaves(lambda a: a.real, product_lam)
    g = extend_constant_along_leaves(lambda a: a.imag ** 2, product_lam)
    both = f.plus(g)
    e_f = c1_extend(f, 0.1)
    e_g = c1_extend(g, 0.1)
    e_both = c1_extend(both, 0.1)
    z0 = complex(f.z_points.ravel()[3])
    for alpha in (0.2 + 0.1j, -0.15j, 0.44):
        assert e_both.at(z0, alpha) == pytest.approx(
            e_f.at(z0, alpha) + e_g.at(z0, alpha), abs=1e-12)


def test_c1_extend_validation(product_lam):
    f = extend_constant_along_leaves(lambda a: 1.0, product_lam)
    with pytest.raises(ValidationError):
        c1_extend(f, smoothing=0.0)


def test_leaf_function_csv_roundtrip(tmp_path, product_lam):
    from qclab.io import write_leaf_function_csv
    f = extend_constant_along_leaves(lambda a: a.real, product_lam)
    path = tmp_path / "leaf.csv"
    write_leaf_function_csv(f, path)
    lines = path.read_text().strip().splitlines()
    assert len(lines) == 1 + f.z_points.size
    assert lines[0].startswith("z_re,z_im,leaf_")
