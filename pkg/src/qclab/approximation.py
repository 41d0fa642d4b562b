"""Mollified laminations and the approximation pipeline: localization,
per-fiber principal solutions, straightened approximants f_eps, W^{1,p}
error measurement, projection traces, and holonomy dilatation between
holomorphic transversals.

Fiber coefficients mu^z that depend linearly on z (mu^z = z * m(w), detected
automatically) are solved once as a power series in z,

    h^{0,z}(b) = b + sum_{k>=1} z^k (C phi_k)(b),
    phi_1 = m,  phi_{k+1} = m * B(phi_k),

which makes every fiber and every leaf evaluation a spline lookup.  General
coefficients fall back to one principal solution per fiber of a z grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beltrami import (BeltramiField, MollifierSpec, mollify, p_max,
                       principal_solution)
from .errors import (DegeneratePointError, DegenerateTransversalError,
                     DomainError, NumericalError, ValidationError)
from .field_ops import (ComplexField, GridSampler, GridSpec, beurling_transform,
                        cauchy_transform)
from .lamination import Lamination
from .motion import FormulaMotion, HolomorphicMotion, beltrami_of_holonomy

_SERIES_TOL = 1e-13
_SERIES_KMAX = 60
_NEWTON_TOL = 1e-11
_NEWTON_MAXITER = 40
_TANGENCY_EPS = 1e-9


# ---------------------------------------------------------------------------
# localization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalizedMotion:
    motion: HolomorphicMotion
    kappa: float
    r: float


class _RescaledMotion(HolomorphicMotion):
    """phi~_alpha(z) = phi_alpha(r z): base D(0,r) rescaled to the disk."""

    def __init__(self, base: HolomorphicMotion, r: float):
        super().__init__(base.tau, base.epsilon_bound, base.global_flag)
        self.base = base
        self.r = r

    def phi(self, alpha, z):
        return self.base.phi(alpha, np.asarray(z, dtype=np.complex128) * self.r)


def localize(motion: HolomorphicMotion, r: float) -> LocalizedMotion:
    """Restrict the base to D(0,r) and rescale; kappa = 2r/(1+r^2) bounds the
    dilatation of the holonomy between any two fibers of the new motion."""
    if not (0.0 < r < 1.0):
        raise ValidationError(f"localization radius must be in (0,1), got {r}")
    kappa = 2.0 * r / (1.0 + r * r)
    if isinstance(motion, FormulaMotion):
        return LocalizedMotion(motion.localized(r), kappa, r)
    return LocalizedMotion(_RescaledMotion(motion, r), kappa, r)


# ---------------------------------------------------------------------------
# fiber coefficients
# ---------------------------------------------------------------------------

class SeparableFiberCoefficient:
    """mu^z(w) = z * m(w) with m compactly supported (clipped to the disk)."""

    def __init__(self, profile: BeltramiField):
        self.profile = profile

    def at(self, z: complex) -> BeltramiField:
        vals = self.profile.mu.values * complex(z)
        return BeltramiField(ComplexField(self.profile.spec, vals),
                             min(abs(complex(z)) * self.profile.kappa_bound, 0.999999999))

    def kappa(self) -> float:
        """sup over |z| <= 1 of the fiber dilatation bound."""
        return self.profile.mu.max_abs()

    def mollified(self, epsilon: float) -> "SeparableFiberCoefficient":
        return SeparableFiberCoefficient(mollify(self.profile, MollifierSpec(epsilon)))


class GenericFiberCoefficient:
    """mu^z from the motion's holonomy, clipped to the unit disk, one field
    per requested fiber (cached)."""

    def __init__(self, motion: HolomorphicMotion, grid: GridSpec,
                 epsilon: float = 0.0):
        self.motion = motion
        self.grid = grid
        self.epsilon = epsilon
        self._cache: dict = {}

    def at(self, z: complex) -> BeltramiField:
        key = complex(z)
        if key not in self._cache:
            field = beltrami_of_holonomy(self.motion, key, self.grid,
                                         region_radius=1.0)
            if self.epsilon > 0.0:
                field = mollify(field, MollifierSpec(self.epsilon))
            self._cache[key] = field
        return self._cache[key]

    def mollified(self, epsilon: float) -> "GenericFiberCoefficient":
        return GenericFiberCoefficient(self.motion, self.grid, epsilon)


def fiber_coefficient(motion: HolomorphicMotion, grid: GridSpec,
                      probes=(0.35 + 0j, 0.25j), tol: float = 1e-9):
    """Build the family z -> mu^z (disk-clipped); detects z-linear families.

    Motions carrying their own separable profile (synthetic laminations)
    short-circuit the probe.
    """
    profile = getattr(motion, "fiber_profile", None)
    if profile is not None:
        return SeparableFiberCoefficient(profile)
    z1, z2 = probes
    f1 = beltrami_of_holonomy(motion, z1, grid, region_radius=1.0)
    f2 = beltrami_of_holonomy(motion, z2, grid, region_radius=1.0)
    defect = np.max(np.abs(f1.mu.values / z1 - f2.mu.values / z2))
    if defect <= tol:
        m_vals = f1.mu.values / z1
        sup = float(np.max(np.abs(m_vals)))
        if sup >= 1.0:
            raise ValidationError(
                f"fiber coefficient profile has sup {sup:.4f} >= 1; localize the "
                f"motion to a smaller base disk first")
        profile = BeltramiField(ComplexField(grid, m_vals), sup)
        return SeparableFiberCoefficient(profile)
    return GenericFiberCoefficient(motion, grid)


# ---------------------------------------------------------------------------
# holonomy backends
# ---------------------------------------------------------------------------

class SeriesHolonomy:
    """Power-series holonomy for separable coefficients.

    forward(b, z) evaluates h^{0,z}(b); invert solves h^{0,z}(b) = w by a
    Newton iteration whose local model uses the exact series derivatives
    d/db = 1 + sum z^k B(phi_k) and d/d(conj b) = sum z^k phi_k.
    """

    def __init__(self, profile: BeltramiField, tol: float = _SERIES_TOL,
                 kmax: int = _SERIES_KMAX):
        spec = profile.spec
        self.spec = spec
        self.kappa = profile.mu.max_abs()
        ms = max(1.0 + 2.0 * spec.spacing,
                 profile.support_radius() + spec.spacing)
        phis, cs, bs = [], [], []
        phi = profile.mu
        for _ in range(kmax):
            if phi.max_abs() < tol:
                break
            b_phi = beurling_transform(phi, max_support=ms)
            phis.append(phi)
            cs.append(cauchy_transform(phi, max_support=ms))
            bs.append(b_phi)
            phi = ComplexField(spec, profile.mu.values * b_phi.values)
        self.order = len(phis)
        self._c = [GridSampler(f) for f in cs]
        self._b = [GridSampler(f) for f in bs]
        self._phi = [GridSampler(f) for f in phis]

    def forward(self, b, z):
        b = np.asarray(b, dtype=np.complex128)
        z = np.broadcast_to(np.asarray(z, dtype=np.complex128), b.shape)
        out = b.astype(np.complex128).copy()
        zk = z.copy()
        for k in range(self.order):
            out += zk * self._c[k](b)
            zk = zk * z
        return out

    def dz_forward(self, b, z):
        """d/dz of the leaf map z -> h^{0,z}(b) (exact series derivative)."""
        b = np.asarray(b, dtype=np.complex128)
        z = np.broadcast_to(np.asarray(z, dtype=np.complex128), b.shape)
        out = np.zeros(b.shape, dtype=np.complex128)
        zk = np.ones_like(out)
        for k in range(self.order):
            out += (k + 1) * zk * self._c[k](b)
            zk = zk * z
        return out

    def invert(self, w, z, tol: float = _NEWTON_TOL, maxiter: int = _NEWTON_MAXITER):
        w = np.asarray(w, dtype=np.complex128)
        z = np.broadcast_to(np.asarray(z, dtype=np.complex128), w.shape)
        b = w.astype(np.complex128).copy()
        err = math.inf
        for _ in range(maxiter):
            F = b - w
            A = np.ones(b.shape, dtype=np.complex128)
            Bc = np.zeros(b.shape, dtype=np.complex128)
            zk = z.copy()
            for k in range(self.order):
                F = F + zk * self._c[k](b)
                A = A + zk * self._b[k](b)
                Bc = Bc + zk * self._phi[k](b)
                zk = zk * z
            err = float(np.max(np.abs(F)))
            if err <= tol:
                break
            den = np.abs(A) ** 2 - np.abs(Bc) ** 2
            if np.any(den <= 0.0):
                raise DegeneratePointError("degenerate chart inversion")
            b = b + (-F * np.conj(A) + np.conj(F) * Bc) / den
        else:
            raise NumericalError(
                f"chart inversion stalled at residual {err:.3e}", residual=err)
        return b


class PerFiberHolonomy:
    """Per-fiber principal solutions on a fixed z grid (general coefficients).

    Evaluation is restricted to the solved fibers; off-grid z raises a
    domain error rather than silently interpolating between solves.
    """

    def __init__(self, coefficient, z_nodes, tol: float = 1e-10):
        self.coefficient = coefficient
        self.z_nodes = np.asarray(z_nodes, dtype=np.complex128)
        self.tol = tol
        self._maps: dict = {}
        self.kappa = 0.0
        for z in self.z_nodes:
            field = coefficient.at(complex(z))
            self.kappa = max(self.kappa, field.mu.max_abs())

    def _fiber(self, z: complex):
        key = complex(z)
        if key not in self._maps:
            if not np.any(np.abs(self.z_nodes - key) < 1e-12):
                raise DomainError(f"fiber {key} was not tabulated; use a grid node")
            qc = principal_solution(self.coefficient.at(key), self.tol)
            self._maps[key] = (GridSampler(qc.h), GridSampler(qc.phi))
        return self._maps[key]

    def forward(self, b, z):
        b = np.asarray(b, dtype=np.complex128)
        zs = np.broadcast_to(np.asarray(z, dtype=np.complex128), b.shape)
        out = np.empty(b.shape, dtype=np.complex128)
        for key in np.unique(zs):
            sampler, _ = self._fiber(complex(key))
            sel = zs == key
            out[sel] = sampler(b[sel])
        return out

    def dz_forward(self, b, z, step: float | None = None):
        raise DomainError("leafwise z derivatives need the series backend; "
                          "tabulate on the fiber grid instead")

    def invert(self, w, z, tol: float = _NEWTON_TOL, maxiter: int = _NEWTON_MAXITER):
        w = np.asarray(w, dtype=np.complex128)
        zs = np.broadcast_to(np.asarray(z, dtype=np.complex128), w.shape)
        out = np.empty(w.shape, dtype=np.complex128)
        for key in np.unique(zs):
            sampler, _ = self._fiber(complex(key))
            sel = zs == key
            ww = w[sel]
            b = ww.copy()
            d = 1e-6
            err = math.inf
            for _ in range(maxiter):
                F = sampler(b) - ww
                err = float(np.max(np.abs(F)))
                if err <= tol:
                    break
                px = (sampler(b + d) - sampler(b - d)) / (2.0 * d)
                py = (sampler(b + 1j * d) - sampler(b - 1j * d)) / (2.0 * d)
                A = 0.5 * (px - 1j * py)
                Bc = 0.5 * (px + 1j * py)
                den = np.abs(A) ** 2 - np.abs(Bc) ** 2
                if np.any(den <= 0.0):
                    raise DegeneratePointError("degenerate chart inversion")
                b = b + (-F * np.conj(A) + np.conj(F) * Bc) / den
            else:
                raise NumericalError(
                    f"chart inversion stalled at residual {err:.3e}", residual=err)
            out[sel] = b
        return out


# ---------------------------------------------------------------------------
# mollified lamination
# ---------------------------------------------------------------------------

@dataclass
class MollifiedLamination:
    """The lamination generated by the mollified fiber coefficients."""

    epsilon: float
    kappa: float
    backend: object
    grid: GridSpec
    base: Lamination

    def leaf(self, beta, z):
        """Point(s) of the leaf through (0, beta) over the fiber(s) z."""
        beta_arr = np.broadcast_to(np.asarray(beta, dtype=np.complex128),
                                   np.shape(z) or (1,)).astype(np.complex128)
        return self.backend.forward(beta_arr, z)

    def index(self, z, w):
        """Straightening: the fiber-0 index of the leaf through (z, w)."""
        return self.backend.invert(np.asarray(w, dtype=np.complex128), z)

    def leaf_dz(self, beta, z):
        beta_arr = np.broadcast_to(np.asarray(beta, dtype=np.complex128),
                                   np.shape(z) or (1,)).astype(np.complex128)
        return self.backend.dz_forward(beta_arr, z)


def mollified_lamination(lam: Lamination, epsilon: float,
                         grid: GridSpec | None = None,
                         z_nodes=None) -> MollifiedLamination:
    """Mollify the fiber coefficients in w, solve the Beltrami problems, and
    wrap the result as a lamination with chart and leaf evaluators."""
    if epsilon <= 0:
        raise ValidationError(f"mollification radius must be positive, got {epsilon}")
    if not lam.motion.global_flag:
        raise DomainError("the approximation pipeline requires a global motion")
    grid = grid or GridSpec()
    coeff = fiber_coefficient(lam.motion, grid)
    coeff_eps = coeff.mollified(epsilon)
    if isinstance(coeff_eps, SeparableFiberCoefficient):
        backend = SeriesHolonomy(coeff_eps.profile)
        kappa = coeff_eps.kappa()
    else:
        if z_nodes is None:
            g = np.arange(-0.9, 0.901, 0.3)
            ZX, ZY = np.meshgrid(g, g)
            z_nodes = (ZX + 1j * ZY).ravel()
            z_nodes = z_nodes[np.abs(z_nodes) <= 0.95]
        backend = PerFiberHolonomy(coeff_eps, z_nodes)
        kappa = backend.kappa
    return MollifiedLamination(epsilon, kappa, backend, grid, lam)


def unmollified_lamination(lam: Lamination, grid: GridSpec | None = None,
                           z_nodes=None) -> MollifiedLamination:
    """The epsilon = 0 member: principal solutions of the raw (clipped)
    coefficients; used as the reference object in leaf-deviation sweeps."""
    grid = grid or GridSpec()
    coeff = fiber_coefficient(lam.motion, grid)
    if isinstance(coeff, SeparableFiberCoefficient):
        backend = SeriesHolonomy(coeff.profile)
        kappa = coeff.kappa()
    else:
        if z_nodes is None:
            raise ValidationError("generic coefficients need explicit fiber nodes")
        backend = PerFiberHolonomy(coeff, z_nodes)
        kappa = backend.kappa
    return MollifiedLamination(0.0, kappa, backend, grid, lam)


# ---------------------------------------------------------------------------
# approximants and error measurement
# ---------------------------------------------------------------------------

class StraightenedFunction:
    """A function given in straightened coordinates: g(z, alpha)."""

    def __init__(self, fn, label: str = "", c1: bool = True):
        self.fn = fn
        self.label = label
        self.c1 = c1

    def __call__(self, z, alpha):
        return self.fn(z, alpha)

    @classmethod
    def from_transverse(cls, chi, label: str = "") -> "StraightenedFunction":
        """chi constant along leaves: g(z, alpha) = chi(alpha)."""
        return cls(lambda z, alpha: chi(alpha) + 0.0 * np.asarray(z), label)


class AmbientApproximant:
    """f_eps(z, w) = g(z, index_eps(z, w)): constant along the mollified
    leaves, C^1 along their smooth structure by construction."""

    def __init__(self, g: StraightenedFunction, moll: MollifiedLamination):
        self.g = g
        self.moll = moll

    def at(self, z, w):
        return self.g(z, self.moll.index(z, w))


def approximate(g: StraightenedFunction, moll: MollifiedLamination) -> AmbientApproximant:
    if not g.c1:
        raise ValidationError("the approximant needs a C^1 straightened input; "
                              "extend it first (c1_extend or a transverse formula)")
    return AmbientApproximant(g, moll)


def _measure_grid(radius: float, step: float):
    g = np.arange(-radius, radius + step / 2, step)
    ZX, ZY = np.meshgrid(g, g)
    Z = ZX + 1j * ZY
    return Z, np.abs(Z) <= radius


@dataclass(frozen=True)
class ApproxErrorReport:
    epsilon: float
    p: float
    delta: float
    sup_error: float
    w1p_error: float
    per_leaf: tuple
    leaf_deviation: float
    kappa: float
    p_max: float
    out_of_regime: bool


def w1p_error(g: StraightenedFunction, moll: MollifiedLamination,
              lam: Lamination, p: float, delta: float = 0.1,
              z_step: float = 0.06) -> ApproxErrorReport:
    """W^{1,p} norm of f - f_eps leafwise over D(0, 1-delta), sup over tau.

    f(z, .) = g on the true leaves, f_eps = g composed with the mollified
    chart; leafwise gradients of the difference by centered difference
    quotients along the leaves of the base lamination.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    kappa = moll.kappa
    pmax = p_max(kappa) if kappa > 0 else math.inf
    radius = 1.0 - delta
    Z, mask = _measure_grid(radius + 2 * z_step, z_step)
    inner = np.abs(Z) <= radius
    motion = lam.motion
    sup_err = 0.0
    w1p_sup = 0.0
    leaf_dev = 0.0
    per_leaf = []
    for a in lam.tau:
        # evaluate only inside the sample disk; corners of the square grid are
        # never read (gradients at |z| <= radius use neighbors within the disk)
        Zm = Z[mask]
        w_true = motion.phi(np.full(Zm.shape, a), Zm)
        b_eps = moll.index(Zm, w_true)
        diff = np.zeros(Z.shape, dtype=np.complex128)
        diff[mask] = (np.asarray(g(Zm, b_eps))
                      - np.asarray(g(Zm, np.full(Zm.shape, a))))
        w_eps = moll.leaf(a, Zm)
        leaf_dev = max(leaf_dev, float(np.max(np.abs(w_eps - w_true))))
        sup_k = float(np.max(np.abs(diff[mask])))
        gx = np.zeros_like(diff)
        gy = np.zeros_like(diff)
        gx[:, 1:-1] = (diff[:, 2:] - diff[:, :-2]) / (2.0 * z_step)
        gy[1:-1, :] = (diff[2:, :] - diff[:-2, :]) / (2.0 * z_step)
        gm = np.sqrt(np.abs(gx) ** 2 + np.abs(gy) ** 2)
        lp = float((np.sum(gm[inner] ** p) * z_step ** 2) ** (1.0 / p))
        per_leaf.append((complex(a), sup_k, lp))
        sup_err = max(sup_err, sup_k)
        w1p_sup = max(w1p_sup, sup_k + lp)
    return ApproxErrorReport(moll.epsilon, p, delta, sup_err, w1p_sup,
                             tuple(per_leaf), leaf_dev, kappa,
                             pmax, p >= pmax)


# ---------------------------------------------------------------------------
# projection trace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionTrace:
    """pi(z): fiber-0 index along the mollified lamination of the points of a
    true leaf, with its difference-quotient coefficient nu."""

    leaf_alpha: complex
    epsilon: float
    kappa: float
    z_points: np.ndarray
    z_step: float
    pi: np.ndarray
    nu: np.ndarray            # |nu| where defined, nan at flagged points
    flagged: np.ndarray       # |d pi / dz| below the tangency threshold
    interior: np.ndarray

    def nu_exceedance_fraction(self, slack: float = 5e-2) -> float:
        ok = self.interior & ~self.flagged
        if not ok.any():
            return 0.0
        return float(np.mean(self.nu[ok] > self.kappa + slack))

    def grad_lp_norm(self, p: float = 4.0, radius: float = 0.9) -> float:
        sel = (np.abs(self.z_points) <= radius) & self.interior
        gx = np.gradient(self.pi, self.z_step, axis=1)
        gy = np.gradient(self.pi, self.z_step, axis=0)
        gm = np.sqrt(np.abs(gx) ** 2 + np.abs(gy) ** 2)
        return float((np.sum(gm[sel] ** p) * self.z_step ** 2) ** (1.0 / p))

    def flagged_count(self) -> int:
        return int(np.sum(self.flagged & self.interior))


def projection_trace(moll: MollifiedLamination, lam: Lamination, leaf_alpha,
                     delta: float = 0.1, z_step: float = 0.045) -> ProjectionTrace:
    """Trace pi(z) = index_eps(z, phi_alpha(z)) - alpha along a true leaf.

    Straightening the leaf to w = 0 is a holomorphic change of coordinates,
    so the trace and its dilatation are computed directly on the unshifted
    lamination.  Points with |d pi/dz| < 1e-9 are flagged as tangencies.
    """
    a = complex(leaf_alpha)
    radius = 1.0 - delta
    Z, mask = _measure_grid(radius + 2 * z_step, z_step)
    interior = np.abs(Z) <= radius
    w_leaf = lam.motion.phi(np.full(Z[mask].shape, a), Z[mask])
    pi = np.zeros(Z.shape, dtype=np.complex128)
    pi[mask] = moll.index(Z[mask], w_leaf) - a
    px = np.gradient(pi, z_step, axis=1)
    py = np.gradient(pi, z_step, axis=0)
    dz = 0.5 * (px - 1j * py)
    dzbar = 0.5 * (px + 1j * py)
    flagged = np.abs(dz) < _TANGENCY_EPS
    nu = np.full(Z.shape, np.nan)
    ok = ~flagged
    nu[ok] = np.abs(dzbar[ok] / dz[ok])
    return ProjectionTrace(a, moll.epsilon, moll.kappa, Z, z_step, pi, nu,
                           flagged, interior)


# ---------------------------------------------------------------------------
# transversal dilatation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerticalTransversal:
    z0: complex
    label: str = ""


@dataclass(frozen=True)
class GraphTransversal:
    """A holomorphic graph w = g(z) crossing the leaf bundle."""

    g: object
    label: str = ""

    def slope(self, z, step: float = 1e-6):
        return (self.g(np.asarray(z) + step) - self.g(np.asarray(z) - step)) / (2.0 * step)


def _follow_to_graph(moll: MollifiedLamination, beta, transversal,
                     z_start, maxiter: int = 50, tol: float = 1e-11):
    """Intersection fiber zeta of the leaf through (0, beta) with the graph."""
    if isinstance(transversal, VerticalTransversal):
        return np.broadcast_to(np.asarray(transversal.z0, dtype=np.complex128),
                               np.shape(beta)).copy()
    beta = np.asarray(beta, dtype=np.complex128)
    zeta = np.broadcast_to(np.asarray(z_start, dtype=np.complex128),
                           beta.shape).astype(np.complex128).copy()
    err = math.inf
    for _ in range(maxiter):
        F = moll.leaf(beta, zeta) - transversal.g(zeta)
        err = float(np.max(np.abs(F)))
        if err <= tol:
            break
        dF = moll.leaf_dz(beta, zeta) - transversal.slope(zeta)
        if np.any(np.abs(dF) < _TANGENCY_EPS):
            k = int(np.argmin(np.abs(dF)))
            raise DegenerateTransversalError(
                "transversal tangent to a leaf near the sample",
                point=complex(zeta.flat[k]))
        zeta = zeta - F / dF
    else:
        raise NumericalError(f"leaf-following stalled at residual {err:.3e}",
                             residual=err)
    return zeta


def leaf_bundle_near(moll: MollifiedLamination, transversal, z0,
                     radius: float = 0.04, count: int = 8) -> np.ndarray:
    """Leaf indices of the bundle crossing the transversal near the fiber z0
    (a ring of fiber points around the transversal's value there)."""
    z0 = complex(z0)
    if isinstance(transversal, VerticalTransversal):
        w0 = 0j
    else:
        w0 = complex(np.asarray(transversal.g(np.full(1, z0))).flat[0])
    offsets = radius * np.exp(2j * np.pi * np.arange(count) / count)
    return moll.index(np.full(offsets.shape, z0), w0 + offsets)


@dataclass(frozen=True)
class TransversalDilatationReport:
    sup_dilatation: float
    samples: tuple
    kappa: float
    flagged: int


def transversal_dilatation(moll: MollifiedLamination, t1, t2, beta_samples,
                           fd_step: float = 1e-4) -> TransversalDilatationReport:
    """Dilatation estimate of the holonomy t1 -> t2 induced by the mollified
    leaves, sup over the sampled leaf bundle.

    t1 must be a vertical transversal (its chart is the fiber coordinate);
    t2 may be vertical or a holomorphic graph.  Tangency raises a
    degenerate-transversal error at the offending point.
    """
    if not isinstance(t1, VerticalTransversal):
        raise ValidationError("the source transversal must be vertical "
                              "(fiber chart); swap the arguments")
    betas = np.asarray(beta_samples, dtype=np.complex128)
    z1 = complex(t1.z0)
    worst = 0.0
    flagged = 0
    samples = []
    for b in betas:
        w1 = complex(moll.leaf(b, np.full((1,), z1))[0])
        stencil = np.array([w1 + fd_step, w1 - fd_step,
                            w1 + 1j * fd_step, w1 - 1j * fd_step,
                            w1], dtype=np.complex128)
        b_st = moll.index(np.full(stencil.shape, z1), stencil)
        zeta_guess = t2.z0 if isinstance(t2, VerticalTransversal) else z1
        zeta = _follow_to_graph(moll, b_st, t2, zeta_guess)
        if isinstance(t2, VerticalTransversal):
            target = moll.leaf(b_st, zeta)      # fiber coordinate on t2
        else:
            target = zeta                        # graph parameter on t2
        px = (target[0] - target[1]) / (2.0 * fd_step)
        py = (target[2] - target[3]) / (2.0 * fd_step)
        d = 0.5 * (px - 1j * py)
        dbar = 0.5 * (px + 1j * py)
        if abs(d) < _TANGENCY_EPS:
            flagged += 1
            continue
        dil = float(abs(dbar / d))
        samples.append((complex(b), dil))
        worst = max(worst, dil)
    return TransversalDilatationReport(worst, tuple(samples), moll.kappa, flagged)
