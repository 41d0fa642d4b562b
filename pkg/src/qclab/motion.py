"""Holomorphic motions: families of disjoint holomorphic graphs w = phi_alpha(z)
over the unit disk, their holonomy, and the Schwarz / Harnack-Hoelder bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as expr_mod
from .beltrami import BeltramiField
from .errors import (DegeneratePointError, DomainError, NumericalError,
                     ValidationError)
from .field_ops import ComplexField, GridSpec

_FD_STEP = 1e-5
_NEWTON_TOL = 1e-12
_NEWTON_MAXITER = 60


def _as_complex_array(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=np.complex128))


class HolomorphicMotion:
    """Base class: a finite transversal tau, a margin epsilon_bound with
    sup |phi_alpha(z)| <= 1 - epsilon_bound, and a leaf evaluator phi."""

    def __init__(self, tau, epsilon_bound: float, global_flag: bool):
        tau = _as_complex_array(tau)
        if tau.size == 0:
            raise ValidationError("transversal tau must be nonempty")
        if not np.all(np.isfinite(tau.view(np.float64))):
            raise ValidationError("transversal tau contains non-finite entries")
        if not (0.0 < epsilon_bound < 1.0):
            raise ValidationError(f"epsilon_bound must be in (0,1), got {epsilon_bound}")
        self.tau = tau
        self.epsilon_bound = float(epsilon_bound)
        self.global_flag = bool(global_flag)

    # subclasses implement phi(alpha, z) -> broadcast complex array
    def phi(self, alpha, z):
        raise NotImplementedError

    def leaf_derivative(self, alpha, z, step: float = _FD_STEP):
        """phi'_alpha(z), complex centered difference along the leaf."""
        return (self.phi(alpha, np.asarray(z) + step)
                - self.phi(alpha, np.asarray(z) - step)) / (2.0 * step)

    def describe(self) -> dict:
        return {"tau": [[a.real, a.imag] for a in self.tau],
                "epsilon_bound": self.epsilon_bound,
                "global": self.global_flag}


class FormulaMotion(HolomorphicMotion):
    """Leaves given by an expression in the variables alpha and z."""

    def __init__(self, formula, tau, epsilon_bound: float, global_flag: bool = True):
        super().__init__(tau, epsilon_bound, global_flag)
        if isinstance(formula, str):
            self.ast = expr_mod.parse(formula)
            self.formula = formula
        else:
            self.ast = formula
            self.formula = expr_mod.unparse(formula)

    def phi(self, alpha, z):
        a = np.asarray(alpha, dtype=np.complex128)
        zz = np.asarray(z, dtype=np.complex128)
        out = np.asarray(expr_mod.evaluate(self.ast, a, zz), dtype=np.complex128)
        target = np.broadcast_shapes(a.shape, zz.shape)
        if out.shape != target:
            out = np.broadcast_to(out, target)
        return out

    def localized(self, r: float) -> "FormulaMotion":
        """Base restricted to D(0,r) and rescaled: z -> r z in the formula."""
        ast = expr_mod.substitute_scaled_z(self.ast, r)
        return FormulaMotion(ast, self.tau, self.epsilon_bound, self.global_flag)

    def describe(self) -> dict:
        d = super().describe()
        d["formula"] = self.formula
        return d


class SampledMotion(HolomorphicMotion):
    """Leaves given by tabulated (z, w) samples sharing a common z set.

    Evaluation is only defined at the stored samples; anything else raises a
    domain error (no constructive global extension is attempted).
    """

    def __init__(self, tau, z_samples, w_samples, epsilon_bound: float):
        super().__init__(tau, epsilon_bound, global_flag=False)
        self.z_samples = _as_complex_array(z_samples)
        self.w_samples = np.asarray(w_samples, dtype=np.complex128)
        if self.w_samples.shape != (self.tau.size, self.z_samples.size):
            raise ValidationError(
                f"w_samples must have shape (len(tau), len(z_samples)) = "
                f"({self.tau.size}, {self.z_samples.size}), got {self.w_samples.shape}")

    def _leaf_index(self, alpha: complex) -> int:
        d = np.abs(self.tau - alpha)
        k = int(np.argmin(d))
        if d[k] > 1e-12:
            raise DomainError(f"alpha={alpha} is not a transversal point of this motion")
        return k

    def _z_index(self, z: complex) -> int:
        d = np.abs(self.z_samples - z)
        k = int(np.argmin(d))
        if d[k] > 1e-12:
            raise DomainError(f"z={z} is not a stored sample of this motion")
        return k

    def phi(self, alpha, z):
        a = _as_complex_array(alpha)
        zz = _as_complex_array(z)
        a, zz = np.broadcast_arrays(a, zz)
        out = np.empty(a.shape, dtype=np.complex128)
        for idx in np.ndindex(a.shape):
            out[idx] = self.w_samples[self._leaf_index(complex(a[idx])),
                                      self._z_index(complex(zz[idx]))]
        return out

    def leaf_derivative(self, alpha, z, step: float = _FD_STEP):
        raise DomainError("leaf derivatives are not defined for sampled motions")


# ---------------------------------------------------------------------------
# fiber inversion and holonomy
# ---------------------------------------------------------------------------

def fiber_inverse(motion: HolomorphicMotion, z, w, tol: float = _NEWTON_TOL,
                  maxiter: int = _NEWTON_MAXITER):
    """Solve phi_alpha(z) = w for the leaf index alpha (vectorized Newton).

    Requires a globally defined motion for points beyond the tau leaves.
    """
    w_arr = _as_complex_array(w)
    scalar = np.isscalar(w) or np.asarray(w).shape == ()
    if not motion.global_flag:
        taus = motion.tau
        z_arr = np.broadcast_to(np.asarray(z, dtype=np.complex128), w_arr.shape)
        out = np.empty(w_arr.shape, dtype=np.complex128)
        for idx in np.ndindex(w_arr.shape):
            vals = motion.phi(taus, np.full(taus.shape, z_arr[idx]))
            d = np.abs(vals - w_arr[idx])
            k = int(np.argmin(d))
            if d[k] > 1e-9:
                raise DomainError(
                    f"fiber point {w_arr[idx]} belongs to no leaf of a non-global motion")
            out[idx] = taus[k]
        return complex(out.flat[0]) if scalar else out

    z_arr = np.broadcast_to(np.asarray(z, dtype=np.complex128), w_arr.shape)
    alpha = w_arr.astype(np.complex128).copy()  # leaves are near-horizontal
    d = _FD_STEP
    err = math.inf
    for _ in range(maxiter):
        F = motion.phi(alpha, z_arr) - w_arr
        err = float(np.max(np.abs(F)))
        if err <= tol:
            break
        px = (motion.phi(alpha + d, z_arr) - motion.phi(alpha - d, z_arr)) / (2.0 * d)
        py = (motion.phi(alpha + 1j * d, z_arr) - motion.phi(alpha - 1j * d, z_arr)) / (2.0 * d)
        A = 0.5 * (px - 1j * py)
        B = 0.5 * (px + 1j * py)
        den = np.abs(A) ** 2 - np.abs(B) ** 2
        if np.any(den <= 0) or not np.all(np.isfinite(den)):
            raise DegeneratePointError("degenerate fiber map during inversion")
        alpha = alpha + (-F * np.conj(A) + np.conj(F) * B) / den
    else:
        raise NumericalError(
            f"fiber inversion did not converge (max residual {err:.3e})", residual=err)
    return complex(alpha.flat[0]) if scalar else alpha


@dataclass(frozen=True)
class HolonomyMap:
    """Tabulated correspondence w -> h_{z,z'}(w) following the leaves."""

    z_from: complex
    z_to: complex
    tau: np.ndarray
    tau_from: np.ndarray   # phi_alpha(z_from)
    tau_to: np.ndarray     # phi_alpha(z_to)
    grid: GridSpec | None = None
    table: np.ndarray | None = None  # h values on grid nodes of the source fiber

    def at_tau(self, alpha: complex) -> tuple[complex, complex]:
        k = int(np.argmin(np.abs(self.tau - alpha)))
        if abs(self.tau[k] - alpha) > 1e-12:
            raise DomainError(f"{alpha} is not a transversal point")
        return complex(self.tau_from[k]), complex(self.tau_to[k])


def holonomy(motion: HolomorphicMotion, z_from, z_to,
             grid: GridSpec | None = None) -> HolonomyMap:
    """Map phi_alpha(z_from) -> phi_alpha(z_to) leaf by leaf; with a grid,
    tabulate on the whole source fiber (global motions only)."""
    z_from = complex(z_from)
    z_to = complex(z_to)
    if abs(z_from) >= 1.0 or abs(z_to) >= 1.0:
        raise ValidationError("holonomy fibers must lie inside the unit disk")
    tau_from = motion.phi(motion.tau, np.full(motion.tau.shape, z_from))
    tau_to = motion.phi(motion.tau, np.full(motion.tau.shape, z_to))
    table = None
    if grid is not None:
        if not motion.global_flag:
            raise DomainError("grid tabulation of holonomy requires a global motion")
        W = grid.nodes()
        alpha = fiber_inverse(motion, z_from, W)
        table = motion.phi(alpha, np.full(W.shape, z_to))
    return HolonomyMap(z_from, z_to, motion.tau.copy(), tau_from, tau_to, grid, table)


def beltrami_of_holonomy(motion: HolomorphicMotion, z,
                         grid: GridSpec | None = None,
                         region_radius: float | None = None) -> BeltramiField:
    """Difference-quotient estimate of the holonomy coefficient mu^z on the
    fiber grid: d-bar h_{0,z} / d h_{0,z} of the tabulated map.

    With region_radius set, the estimate is zeroed outside that radius
    (the leaves-horizontal-outside normalization); motions that are only
    quasiconformal over the occupied part of the fiber need it.
    """
    if not motion.global_flag:
        raise DomainError("beltrami_of_holonomy requires a global motion")
    z = complex(z)
    grid = grid or GridSpec()
    W = grid.nodes()
    alpha = fiber_inverse(motion, 0.0, W)
    H = motion.phi(alpha, np.full(W.shape, z))
    h = grid.spacing
    dx = np.gradient(H, h, axis=1)
    dy = np.gradient(H, h, axis=0)
    dw = 0.5 * (dx - 1j * dy)
    dwbar = 0.5 * (dx + 1j * dy)
    if np.min(np.abs(dw)) < 1e-12:
        jy, jx = np.unravel_index(int(np.argmin(np.abs(dw))), dw.shape)
        raise DegeneratePointError("holonomy fiber derivative degenerate",
                                   point=complex(W[jy, jx]))
    mu = dwbar / dw
    if region_radius is not None:
        mu = mu * (np.abs(W) <= region_radius)
    sup = float(np.max(np.abs(mu)))
    if sup >= 1.0:
        raise ValidationError(
            f"estimated |mu^z| reaches {sup:.4f} >= 1; not a quasiconformal holonomy")
    return BeltramiField(ComplexField(grid, mu), kappa_bound=sup)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DisjointnessReport:
    passed: bool
    min_gap: float | None          # None when fewer than two leaves
    worst_pair: tuple | None
    worst_z: complex | None


def default_z_samples(radius: float = 0.9, step: float = 0.15) -> np.ndarray:
    g = np.arange(-radius, radius + 1e-12, step)
    ZX, ZY = np.meshgrid(g, g)
    Z = (ZX + 1j * ZY).ravel()
    return Z[np.abs(Z) <= radius]


def check_disjointness(motion: HolomorphicMotion, z_samples=None,
                       gap_tol: float = 1e-9) -> DisjointnessReport:
    """Minimum leaf gap min |phi_alpha - phi_beta| over sample fibers."""
    if motion.tau.size < 2:
        return DisjointnessReport(True, None, None, None)
    if z_samples is None:
        if isinstance(motion, SampledMotion):
            z_samples = motion.z_samples
        else:
            z_samples = default_z_samples()
    zs = _as_complex_array(z_samples)
    vals = np.stack([motion.phi(np.full(zs.shape, a), zs) for a in motion.tau])
    best = (math.inf, None, None)
    for i in range(motion.tau.size):
        for j in range(i + 1, motion.tau.size):
            gaps = np.abs(vals[i] - vals[j])
            k = int(np.argmin(gaps))
            if gaps[k] < best[0]:
                best = (float(gaps[k]), (complex(motion.tau[i]), complex(motion.tau[j])),
                        complex(zs[k]))
    return DisjointnessReport(best[0] > gap_tol, best[0], best[1], best[2])


@dataclass(frozen=True)
class BoundednessReport:
    passed: bool
    sup_abs_phi: float
    bound: float


def check_boundedness(motion: HolomorphicMotion, z_samples=None) -> BoundednessReport:
    if z_samples is None:
        if isinstance(motion, SampledMotion):
            z_samples = motion.z_samples
        else:
            z_samples = default_z_samples(radius=0.95, step=0.1)
    zs = _as_complex_array(z_samples)
    sup = 0.0
    for a in motion.tau:
        sup = max(sup, float(np.max(np.abs(motion.phi(np.full(zs.shape, a), zs)))))
    bound = 1.0 - motion.epsilon_bound
    return BoundednessReport(sup <= bound + 1e-12, sup, bound)


@dataclass(frozen=True)
class HolomorphyMotionReport:
    passed: bool
    max_abs_dzbar: float
    tolerance: float


def check_holomorphy(motion: HolomorphicMotion, z_samples=None,
                     step: float = _FD_STEP, tol: float = 1e-6) -> HolomorphyMotionReport:
    """Centered-difference d/d(conj z) estimate along every tau leaf."""
    if z_samples is None:
        z_samples = default_z_samples(radius=0.85, step=0.2)
    zs = _as_complex_array(z_samples)
    worst = 0.0
    for a in motion.tau:
        aa = np.full(zs.shape, a)
        fxp = motion.phi(aa, zs + step)
        fxm = motion.phi(aa, zs - step)
        fyp = motion.phi(aa, zs + 1j * step)
        fym = motion.phi(aa, zs - 1j * step)
        dzbar = 0.5 * ((fxp - fxm) + 1j * (fyp - fym)) / (2.0 * step)
        worst = max(worst, float(np.max(np.abs(dzbar))))
    return HolomorphyMotionReport(worst <= tol, worst, tol)


@dataclass(frozen=True)
class SchwarzReport:
    z: complex
    sup_mu: float
    bound: float      # |z|
    slack: float      # bound + tolerance - sup_mu

    @property
    def passed(self) -> bool:
        return self.slack >= 0.0


def check_schwarz(motion: HolomorphicMotion, z, grid: GridSpec | None = None,
                  estimator_slack: float = 5e-2,
                  region_radius: float = 1.0) -> SchwarzReport:
    """sup |mu^z| over the unit fiber disk against the bound |z|.

    The bound is a disk-to-disk Schwarz estimate; it applies where the
    motion's graphs live (|w| <= 1), which is also where the dilatation
    data of the pipeline is supported.
    """
    z = complex(z)
    field = beltrami_of_holonomy(motion, z, grid, region_radius=region_radius)
    sup = field.mu.max_abs()
    return SchwarzReport(z, sup, abs(z), abs(z) + estimator_slack - sup)


@dataclass(frozen=True)
class HarnackReport:
    alpha: complex
    beta: complex
    z: complex
    lower: float
    middle: float
    upper: float
    lower_margin: float
    upper_margin: float
    exponent: float | None
    exponent_lower: float
    exponent_upper: float

    @property
    def passed(self) -> bool:
        return self.lower_margin >= -1e-9 and self.upper_margin >= -1e-9


def check_harnack_hoelder(motion: HolomorphicMotion, alpha, beta, z) -> HarnackReport:
    """Two-sided Hoelder bounds on |phi_alpha(z) - phi_beta(z)| in terms of the
    fiber-0 gap, with the exponent interval [(1-|z|)/(1+|z|), (1+|z|)/(1-|z|)]."""
    alpha = complex(alpha)
    beta = complex(beta)
    z = complex(z)
    if abs(z) >= 1.0:
        raise ValidationError("z must lie inside the unit disk")
    d0 = abs(complex(motion.phi(alpha, 0.0 + 0j).flat[0])
             - complex(motion.phi(beta, 0.0 + 0j).flat[0]))
    if alpha == beta or d0 < 1e-15:
        raise ValidationError("coincident leaves: Harnack bounds need alpha != beta")
    dz = abs(complex(motion.phi(alpha, z).flat[0])
             - complex(motion.phi(beta, z).flat[0]))
    t = abs(z)
    e_hi = (1.0 + t) / (1.0 - t)
    e_lo = (1.0 - t) / (1.0 + t)
    lower = 2.0 ** (-2.0 * t / (1.0 - t)) * d0 ** e_hi
    upper = 2.0 ** (2.0 * t / (1.0 + t)) * d0 ** e_lo
    exponent = None
    if dz > 0.0 and d0 != 1.0:
        exponent = float(math.log(dz) / math.log(d0))
    return HarnackReport(alpha, beta, z, lower, dz, upper,
                         dz - lower, upper - dz, exponent, e_lo, e_hi)


def mu_support_radius(motion: HolomorphicMotion, z, grid: GridSpec | None = None,
                      tol: float = 1e-9, region_radius: float = 1.5) -> float:
    """Radius of the region where the |mu^z| estimate exceeds tol (scanned
    out to region_radius); reports whether the coefficient spills past the
    unit disk."""
    field = beltrami_of_holonomy(motion, z, grid, region_radius=region_radius)
    return field.mu.support_radius(tol)
