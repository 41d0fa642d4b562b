"""Discrete positive currents subordinate to a lamination: graph-area mass,
pairings with test forms, closedness and directedness residuals, exact
Radon-Nikodym domination densities, and the constructive transverse
subdivision loop.

Currents are finite sums T = sum_i m_i [L_{alpha_i}] over the finite
transversal, optionally with extra free graphs (used by directedness
counterexamples) and per-leaf densities f_i (weighted currents f T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (ContradictionWitnessError, DominationError, ValidationError)
from .lamination import Lamination
from .motion import fiber_inverse

_FD_STEP = 1e-5


# ---------------------------------------------------------------------------
# test forms
# ---------------------------------------------------------------------------

def poly_bump(radius: float, power: int = 3):
    """(1 - |u/radius|^2)^power on |u| < radius, 0 outside; C^(power-1)."""
    def fn(u):
        s = np.abs(u) ** 2 / radius ** 2
        return np.where(s < 1.0, (1.0 - s) ** power, 0.0)
    return fn


class TestForm:
    """A smooth compactly supported test form on the bidisk.

    kind="area": psi(z,w) * (i/2) dz ^ dzbar, pairing against graph currents.
    kind="one":  psi_dz dz + psi_dw dw + psi_dzbar dzbar + psi_dwbar dwbar;
    one-forms pair with currents only through their exterior derivative.
    Coefficients are callables (z, w) -> values; derivatives are taken by
    centered differences of the sampled coefficients.
    """

    __test__ = False          # not a pytest case, despite the name
    SLOTS = ("dz", "dw", "dzbar", "dwbar")

    def __init__(self, kind: str, coefficients: dict, label: str = "",
                 z_support: float = 1.0, w_support: float = 1.0):
        if kind not in ("area", "one"):
            raise ValidationError(f"unknown test-form kind {kind!r}")
        if z_support > 1.0 or w_support > 1.0:
            raise ValidationError("test-form coefficients must vanish near the "
                                  "bidisk boundary (support radii < 1)")
        if kind == "area":
            if set(coefficients) != {"psi"}:
                raise ValidationError("area form takes a single coefficient 'psi'")
        else:
            unknown = set(coefficients) - set(self.SLOTS)
            if unknown:
                raise ValidationError(f"unknown one-form slots {sorted(unknown)}")
            if not coefficients:
                raise ValidationError("one-form needs at least one coefficient")
        self.kind = kind
        self.coefficients = dict(coefficients)
        self.label = label
        self.z_support = z_support
        self.w_support = w_support

    @classmethod
    def area(cls, psi, label: str = "", z_support: float = 0.95,
             w_support: float = 0.95) -> "TestForm":
        return cls("area", {"psi": psi}, label, z_support, w_support)

    @classmethod
    def one(cls, label: str = "", z_support: float = 0.95,
            w_support: float = 0.95, **coefficients) -> "TestForm":
        return cls("one", coefficients, label, z_support, w_support)

    def exterior_coefficient(self, Z, W, slope):
        """kappa with pullback(d beta) = kappa dz ^ dzbar along a leaf of
        slope phi'(z); uses centered differences of the coefficients."""
        if self.kind != "one":
            raise ValidationError("exterior derivative applies to one-forms")
        d = _FD_STEP
        sbar = np.conj(slope)
        kappa = np.zeros(np.broadcast_shapes(np.shape(Z), np.shape(W)),
                         dtype=np.complex128)
        for slot, psi in self.coefficients.items():
            if psi is None:
                continue
            pzx = (psi(Z + d, W) - psi(Z - d, W)) / (2.0 * d)
            pzy = (psi(Z + 1j * d, W) - psi(Z - 1j * d, W)) / (2.0 * d)
            pwx = (psi(Z, W + d) - psi(Z, W - d)) / (2.0 * d)
            pwy = (psi(Z, W + 1j * d) - psi(Z, W - 1j * d)) / (2.0 * d)
            psi_z = 0.5 * (pzx - 1j * pzy)
            psi_zbar = 0.5 * (pzx + 1j * pzy)
            psi_w = 0.5 * (pwx - 1j * pwy)
            psi_wbar = 0.5 * (pwx + 1j * pwy)
            P = psi_z + psi_w * slope
            Q = psi_zbar + psi_wbar * sbar
            if slot == "dz":
                kappa = kappa - Q
            elif slot == "dw":
                kappa = kappa - slope * Q
            elif slot == "dzbar":
                kappa = kappa + P
            else:
                kappa = kappa + sbar * P
        return kappa


def default_one_form_dictionary() -> list[TestForm]:
    """Polynomial coefficients times boundary bumps, one per slot.

    Bump power 6 keeps the midpoint quadrature of d(beta) pullbacks below
    1e-6 at the default leaf sampling resolution.
    """
    bz = poly_bump(0.85, 6)
    bw = poly_bump(0.9, 6)
    factors = {
        "1": lambda Z, W: np.ones(np.broadcast_shapes(np.shape(Z), np.shape(W))),
        "z": lambda Z, W: Z + 0 * W,
        "w": lambda Z, W: W + 0 * Z,
        "zbar": lambda Z, W: np.conj(Z) + 0 * W,
        "wbar": lambda Z, W: np.conj(W) + 0 * Z,
    }
    forms = []
    for fname, fac in factors.items():
        for slot in TestForm.SLOTS:
            def coef(Z, W, _f=fac):
                return _f(Z, W) * bz(Z) * bw(W)
            forms.append(TestForm.one(label=f"{fname}*{slot}",
                                      **{slot: coef}))
    return forms


def area_bump_form(center_w: complex = 0j, radius_w: float = 0.5,
                   radius_z: float = 0.85, label: str = "area-bump") -> TestForm:
    """psi(z,w) = bump(z) * bump(w - center_w): a nonnegative witness 2-form."""
    bz = poly_bump(radius_z, 6)
    bw = poly_bump(radius_w, 6)

    def psi(Z, W):
        return bz(Z) * bw(W - center_w)

    return TestForm.area(psi, label=label)


# ---------------------------------------------------------------------------
# currents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeGraph:
    """A graph w = g(z) not required to be a lamination leaf."""

    g: object            # callable z -> w
    weight: float
    label: str = ""

    def slope(self, Z):
        return (self.g(Z + _FD_STEP) - self.g(Z - _FD_STEP)) / (2.0 * _FD_STEP)


class LaminarCurrent:
    """T = sum_i m_i [L_{alpha_i}] with weights m_i >= 0 on the transversal."""

    def __init__(self, lam: Lamination, weights, extra_graphs=()):
        self.lam = lam
        w = np.asarray(weights, dtype=np.float64)
        if w.shape != (lam.tau.size,):
            raise ValidationError(
                f"need one weight per transversal point ({lam.tau.size}), got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValidationError("weights must be finite and nonnegative")
        self.weights = w
        self.extra_graphs = tuple(extra_graphs)

    def densities(self):
        return None

    def scaled(self, c: float) -> "LaminarCurrent":
        return LaminarCurrent(self.lam, self.weights * c, self.extra_graphs)


class WeightedCurrent(LaminarCurrent):
    """f T: the base current with a nonnegative density per leaf and an
    integrability tag p = 1 + eps."""

    def __init__(self, lam: Lamination, weights, leaf_densities,
                 integrability_p: float = 2.0, extra_graphs=()):
        super().__init__(lam, weights, extra_graphs)
        if integrability_p <= 1.0:
            raise ValidationError("integrability exponent must exceed 1")
        dens = list(leaf_densities)
        if len(dens) != lam.tau.size:
            raise ValidationError("need one density per leaf")
        self.leaf_densities = [d if callable(d) else (lambda Z, _c=float(d):
                                                      np.full(np.shape(Z), _c))
                               for d in dens]
        self.integrability_p = float(integrability_p)

    def densities(self):
        return self.leaf_densities

    def scaled(self, c: float) -> "WeightedCurrent":
        return WeightedCurrent(self.lam, self.weights * c, self.leaf_densities,
                               self.integrability_p, self.extra_graphs)


def _leaf_samples(lam: Lamination, radius: float = 1.0):
    Z, area = lam.z_grid(radius)
    mask = np.abs(Z) <= radius
    return Z, mask, area


def mass(current: LaminarCurrent, region=None) -> float:
    """sum_i m_i * integral over the region of (1 + |phi'_i|^2) dA: the
    graph-area trace measure of the current."""
    lam = current.lam
    if region is not None:
        if abs(region.center) + region.radius > 1.0 + 1e-12:
            raise ValidationError("mass region must be contained in the unit disk")
    Z, mask, area = _leaf_samples(lam)
    if region is not None:
        mask = mask & (np.abs(Z - region.center) <= region.radius)
    total = 0.0
    dens = current.densities()
    for k, m in enumerate(current.weights):
        if m == 0.0:
            continue
        slope = lam.motion.leaf_derivative(lam.tau[k], Z[mask])
        integrand = 1.0 + np.abs(slope) ** 2
        if dens is not None:
            integrand = integrand * np.real(dens[k](Z[mask]))
        total += m * float(np.sum(integrand)) * area
    for graph in current.extra_graphs:
        slope = graph.slope(Z[mask])
        total += graph.weight * float(np.sum(1.0 + np.abs(slope) ** 2)) * area
    return total


def pair(current: LaminarCurrent, form: TestForm) -> float:
    """<T, psi (i/2) dz^dzbar> = sum_i m_i f_i integral psi(z, phi_i(z)) dA."""
    if form.kind != "area":
        raise ValidationError("currents pair with two-forms; one-forms enter "
                              "through their exterior derivative")
    lam = current.lam
    Z, mask, area = _leaf_samples(lam)
    psi = form.coefficients["psi"]
    total = 0.0
    dens = current.densities()
    for k, m in enumerate(current.weights):
        if m == 0.0:
            continue
        Wk = lam.motion.phi(np.full(Z[mask].shape, lam.tau[k]), Z[mask])
        vals = psi(Z[mask], Wk)
        if dens is not None:
            vals = vals * dens[k](Z[mask])
        total += m * float(np.sum(np.real(vals))) * area
    for graph in current.extra_graphs:
        Wg = graph.g(Z[mask])
        total += graph.weight * float(np.sum(np.real(psi(Z[mask], Wg)))) * area
    return total


def pair_exterior(current: LaminarCurrent, one_form: TestForm) -> complex:
    """<S, d beta> by pulling d beta back to each component graph."""
    lam = current.lam
    Z, mask, area = _leaf_samples(lam)
    Zm = Z[mask]
    total = 0j
    dens = current.densities()
    for k, m in enumerate(current.weights):
        if m == 0.0:
            continue
        aa = np.full(Zm.shape, lam.tau[k])
        Wk = lam.motion.phi(aa, Zm)
        slope = lam.motion.leaf_derivative(lam.tau[k], Zm)
        kappa = one_form.exterior_coefficient(Zm, Wk, slope)
        if dens is not None:
            kappa = kappa * dens[k](Zm)
        # dz ^ dzbar = -2i dx ^ dy
        total += m * (-2j) * np.sum(kappa) * area
    for graph in current.extra_graphs:
        Wg = graph.g(Zm)
        slope = graph.slope(Zm)
        kappa = one_form.exterior_coefficient(Zm, Wg, slope)
        total += graph.weight * (-2j) * np.sum(kappa) * area
    return complex(total)


def closedness_residual(current: LaminarCurrent, forms=None) -> float:
    """max over the dictionary of |<S, d beta>|."""
    if forms is None:
        forms = default_one_form_dictionary()
    worst = 0.0
    for form in forms:
        worst = max(worst, abs(pair_exterior(current, form)))
    return worst


def directedness_residual(current: LaminarCurrent) -> float:
    """sup over component graphs and samples of |dl(tangent)| where dl is the
    directed form of the underlying lamination.

    Subordinate leaves give 0 exactly (their tangent is annihilated by
    construction); free graphs are measured against the lamination leaf
    through each sample point.
    """
    lam = current.lam
    if current.weights.sum() == 0.0 and not current.extra_graphs:
        return 0.0
    # subordinate leaves: dl(1, phi') = phi' - phi' = 0 identically
    worst = 0.0
    if not current.extra_graphs:
        return worst
    Z, mask, _ = _leaf_samples(lam, radius=0.9)
    Zm = Z[mask]
    for graph in current.extra_graphs:
        Wg = np.asarray(graph.g(Zm)) + 0.0 * Zm
        g_slope = np.asarray(graph.slope(Zm)) + 0.0 * Zm
        alpha = fiber_inverse(lam.motion, Zm, Wg)
        leaf_slope = lam.motion.leaf_derivative(alpha, Zm)
        worst = max(worst, float(np.max(np.abs(g_slope - leaf_slope))))
    return worst


# ---------------------------------------------------------------------------
# Radon-Nikodym domination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityDecomposition:
    """Exact per-leaf densities f with S = f T (rational arithmetic)."""

    tau: np.ndarray
    densities: tuple          # Fractions
    t_weights: np.ndarray
    s_weights: np.ndarray

    def as_floats(self) -> list[float]:
        return [float(f) for f in self.densities]

    def reconstruct(self) -> np.ndarray:
        """f * T; exact equality with the dominated weights."""
        return np.array([float(f * Fraction(t)) for f, t in
                         zip(self.densities, self.t_weights)])


def radon_nikodym(S: LaminarCurrent, T: LaminarCurrent) -> DensityDecomposition:
    """Density f with ||S|| = f ||T||: f_i = s_i / t_i in exact rational
    arithmetic, 0 where t_i = 0.  Raises DominationError with a witness leaf
    if some s_i > t_i."""
    if S.lam is not T.lam and not np.array_equal(S.lam.tau, T.lam.tau):
        raise ValidationError("currents must live on the same lamination")
    fractions = []
    for k, (s, t) in enumerate(zip(S.weights, T.weights)):
        if s > t:
            raise DominationError(
                f"domination violated on leaf alpha={T.lam.tau[k]}: s={s} > t={t}",
                witness=complex(T.lam.tau[k]), s=float(s), t=float(t))
        if t == 0.0:
            fractions.append(Fraction(0))
        else:
            fractions.append(Fraction(s) / Fraction(t))
    return DensityDecomposition(T.lam.tau.copy(), tuple(fractions),
                                T.weights.copy(), S.weights.copy())


# ---------------------------------------------------------------------------
# transverse subdivision
# ---------------------------------------------------------------------------

def _tent(t: np.ndarray) -> np.ndarray:
    return np.maximum(0.0, 1.0 - np.abs(t))


def tent_partition_weights(points: np.ndarray, cell: float):
    """Continuous partition of unity by tensor tents on a square lattice of
    pitch `cell`; returns {(i,j): theta values at the points}.  Sum over cells
    is identically 1 and each tent has support diameter 2*sqrt(2)*cell."""
    xs = points.real / cell
    ys = points.imag / cell
    cells = {}
    for ix in np.unique(np.concatenate([np.floor(xs), np.ceil(xs)])).astype(int):
        for iy in np.unique(np.concatenate([np.floor(ys), np.ceil(ys)])).astype(int):
            theta = _tent(xs - ix) * _tent(ys - iy)
            if np.any(theta > 0.0):
                cells[(ix, iy)] = theta
    return cells


@dataclass(frozen=True)
class RefineStep:
    k: int
    center: complex
    diameter_bound: float
    support_diameter: float
    mass: float
    pairing: float


@dataclass(frozen=True)
class RefineTrace:
    steps: tuple
    currents: tuple


def _support_diameter(tau: np.ndarray, weights: np.ndarray) -> float:
    pts = tau[weights > 0.0]
    if pts.size <= 1:
        return 0.0
    return float(max(abs(a - b) for a in pts for b in pts))


def refine_subdivide(current: LaminarCurrent, form: TestForm, depth: int) -> RefineTrace:
    """Iterated transverse localization: at step k cover the transversal by
    tents of support diameter < 10^-k, keep a cell with positive pairing
    (deterministically the largest), renormalize to unit mass."""
    if depth < 1:
        raise ValidationError("refinement depth must be >= 1")
    base_pairing = pair(current, form)
    if base_pairing <= 0.0:
        raise ValidationError("refine_subdivide requires <S, form> > 0")

    lam = current.lam
    tau = lam.tau
    # per-leaf pairing and mass (including any density) are reused every step
    unit = np.eye(tau.size)

    def leaf_current(k):
        if isinstance(current, WeightedCurrent):
            return WeightedCurrent(lam, unit[k], current.leaf_densities,
                                   current.integrability_p)
        return LaminarCurrent(lam, unit[k])

    leaf_pair = np.array([pair(leaf_current(k), form) for k in range(tau.size)])
    leaf_mass = np.array([mass(leaf_current(k)) for k in range(tau.size)])

    steps = []
    currents = []
    work = current
    for k in range(1, depth + 1):
        cell = 10.0 ** (-k) / (2.0 * math.sqrt(2.0)) * 0.999
        cells = tent_partition_weights(tau, cell)
        best_key, best_pairing = None, 0.0
        for key in sorted(cells):
            p_cell = float(np.sum(work.weights * cells[key] * leaf_pair))
            if p_cell > best_pairing + 0.0:
                best_key, best_pairing = key, p_cell
        if best_key is None:
            raise ContradictionWitnessError(
                f"no cell with positive pairing at step {k}: inconsistent with "
                f"<S, form> = {base_pairing:.6g} > 0")
        theta = cells[best_key]
        new_weights = work.weights * theta
        m = float(np.sum(new_weights * leaf_mass))
        if m <= 0.0:
            raise ContradictionWitnessError(f"selected cell carries no mass at step {k}")
        if isinstance(work, WeightedCurrent):
            work = WeightedCurrent(lam, new_weights / m, work.leaf_densities,
                                   work.integrability_p, work.extra_graphs)
        else:
            work = LaminarCurrent(lam, new_weights / m, work.extra_graphs)
        center = complex(best_key[0] * cell, best_key[1] * cell)
        steps.append(RefineStep(
            k=k, center=center, diameter_bound=10.0 ** (-k),
            support_diameter=_support_diameter(tau, work.weights),
            mass=float(np.sum(work.weights * leaf_mass)),
            pairing=float(np.sum(work.weights * leaf_pair))))
        currents.append(work)
    return RefineTrace(tuple(steps), tuple(currents))
