"""Principal solutions of the Beltrami equation and mollification of
dilatation coefficients.

The solver iterates phi <- mu * (1 + B phi) to the fixed point and returns
h = w + C(phi), the solution normalized to be tangent to the identity far
from the data.  Contraction rate is kappa = sup|mu| < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePointError, NumericalError, ValidationError
from .field_ops import (ComplexField, GridSpec, beurling_transform,
                        cauchy_transform, central_derivatives, l2_norm)

DEFAULT_TOL = 1e-10
MAX_ITER_MARGIN = 10


class BeltramiField:
    """A dilatation coefficient mu with declared sup bound kappa_bound < 1."""

    __slots__ = ("mu", "kappa_bound")

    def __init__(self, mu: ComplexField, kappa_bound: float):
        if not (0.0 <= kappa_bound < 1.0):
            raise ValidationError(f"kappa_bound must be in [0, 1), got {kappa_bound}")
        sup = mu.max_abs()
        if sup > kappa_bound * (1.0 + 1e-12) + 1e-12:
            raise ValidationError(
                f"sup|mu| = {sup:.6g} exceeds declared kappa_bound = {kappa_bound:.6g}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kappa_bound", kappa_bound)

    def __setattr__(self, *_):
        raise AttributeError("BeltramiField is immutable")

    @property
    def spec(self) -> GridSpec:
        return self.mu.spec

    @classmethod
    def zero(cls, spec: GridSpec) -> "BeltramiField":
        return cls(ComplexField.zeros(spec), 0.0)

    @classmethod
    def from_values(cls, spec: GridSpec, values, kappa_bound: float | None = None):
        field = ComplexField(spec, values)
        if kappa_bound is None:
            kappa_bound = field.max_abs()
            if kappa_bound >= 1.0:
                raise ValidationError(f"sup|mu| = {kappa_bound:.6g} >= 1")
        return cls(field, kappa_bound)

    def support_radius(self) -> float:
        return self.mu.support_radius()

    def disk_supported(self, tol: float = 1e-9) -> bool:
        return self.mu.support_radius(tol) <= 1.0 + 2.0 * self.spec.spacing

    def clipped_to_disk(self) -> "BeltramiField":
        """Zero the coefficient outside the closed unit disk."""
        mask = np.abs(self.spec.nodes()) <= 1.0
        return BeltramiField(ComplexField(self.spec, self.mu.values * mask),
                             self.kappa_bound)


@dataclass(frozen=True)
class MollifierSpec:
    """Compactly supported polynomial bump (1-|w/eps|^2)^2, unit mass on the grid."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError(f"mollifier radius must be positive, got {self.epsilon}")

    def kernel(self, spec: GridSpec) -> np.ndarray:
        W = spec.nodes()
        u2 = (np.abs(W) / self.epsilon) ** 2
        ker = np.where(u2 < 1.0, (1.0 - u2) ** 2, 0.0)
        total = ker.sum() * spec.spacing ** 2
        if total <= 0:
            raise ValidationError("mollifier radius is below the grid resolution")
        return ker / total


def mollify(mu: BeltramiField, spec_or_eps) -> BeltramiField:
    """Convolve the coefficient with the bump kernel; support grows by <= eps."""
    mspec = spec_or_eps if isinstance(spec_or_eps, MollifierSpec) else MollifierSpec(spec_or_eps)
    grid = mu.spec
    if mspec.epsilon >= grid.half_width - 1.0:
        raise ValidationError(
            f"mollifier radius {mspec.epsilon} too large for half-width {grid.half_width}")
    ker = mspec.kernel(grid)
    # kernel is centered at the grid midpoint; roll it to index 0 for FFT conv
    K = np.fft.fft2(np.fft.ifftshift(ker))
    out = np.fft.ifft2(np.fft.fft2(mu.mu.values) * K) * grid.spacing ** 2
    return BeltramiField(ComplexField(grid, out), mu.kappa_bound)


@dataclass(frozen=True)
class QCMap:
    """Grid-sampled quasiconformal map h with its source coefficient and
    solver diagnostics.  phi = d h / d conj(w) in the h = w + C(phi) form."""

    h: ComplexField
    mu_source: BeltramiField
    iterations: int
    residual: float
    phi: ComplexField

    @property
    def spec(self) -> GridSpec:
        return self.h.spec

    def displacement(self) -> ComplexField:
        return self.h - ComplexField(self.spec, self.spec.nodes())

    def boundary_defect(self) -> float:
        """max |h(w) - w| on the outermost grid ring."""
        d = np.abs(self.displacement().values)
        return float(max(d[0, :].max(), d[-1, :].max(), d[:, 0].max(), d[:, -1].max()))

    def orientation_fraction(self) -> float:
        """Fraction of interior nodes where the difference-quotient Jacobian
        |dh|^2 - |d-bar h|^2 is positive (statistical injectivity check)."""
        dw, dwbar = central_derivatives(self.h)
        jac = np.abs(dw.values) ** 2 - np.abs(dwbar.values) ** 2
        return float(np.mean(jac[1:-1, 1:-1] > 0.0))

    def diagnostics(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "kappa_bound": self.mu_source.kappa_bound,
            "grid_n": self.spec.n,
            "grid_half_width": self.spec.half_width,
            "boundary_defect": self.boundary_defect(),
            "orientation_fraction": self.orientation_fraction(),
        }


def max_iterations(kappa_bound: float, tol: float) -> int:
    if kappa_bound <= 0.0:
        return 1 + MAX_ITER_MARGIN
    return math.ceil(math.log(tol) / math.log(kappa_bound)) + MAX_ITER_MARGIN


def principal_solution(mu: BeltramiField, tol: float = DEFAULT_TOL) -> QCMap:
    """Solve d h/d conj(w) = mu * d h/d w, h tangent to the identity at infinity.

    Fixed-point iteration on phi = mu(1 + B phi); stops when successive
    iterates differ by <= tol in L2.  Raises NumericalError (carrying the last
    defect) if the declared iteration budget is exhausted.
    """
    if tol <= 0:
        raise ValidationError(f"tolerance must be positive, got {tol}")
    spec = mu.spec
    if mu.mu.max_abs() == 0.0:
        ident = ComplexField(spec, spec.nodes())
        return QCMap(ident, mu, 0, 0.0, ComplexField.zeros(spec))

    # every iterate is supported where mu is; widen the transform
    # precondition accordingly (mollified coefficients reach 1 + eps)
    ms = max(1.0 + 2.0 * spec.spacing,
             mu.support_radius() + spec.spacing)
    budget = max_iterations(mu.kappa_bound, tol)
    phi = mu.mu
    diff = math.inf
    iterations = 0
    for iterations in range(1, budget + 1):
        phi_next = ComplexField(
            spec, mu.mu.values *
            (1.0 + beurling_transform(phi, max_support=ms).values))
        diff = l2_norm(phi_next - phi)
        phi = phi_next
        if diff <= tol:
            break
    else:
        raise NumericalError(
            f"Beltrami iteration did not reach tol={tol:g} within {budget} steps",
            residual=diff)

    defect = l2_norm(ComplexField(
        spec, phi.values - mu.mu.values *
        (1.0 + beurling_transform(phi, max_support=ms).values)))
    h = ComplexField(spec, spec.nodes()
                     + cauchy_transform(phi, max_support=ms).values)
    return QCMap(h, mu, iterations, defect, phi)


def dilatation_at(qc: QCMap, w: complex) -> float:
    """|mu_h(w)| = |d-bar h / d h| by centered differences at the nearest node."""
    spec = qc.spec
    iy, ix = spec.node_index(w)
    if not (1 <= ix <= spec.n - 2 and 1 <= iy <= spec.n - 2):
        raise ValidationError(f"point {w} is not in the grid interior")
    v = qc.h.values
    h = spec.spacing
    dx = (v[iy, ix + 1] - v[iy, ix - 1]) / (2.0 * h)
    dy = (v[iy + 1, ix] - v[iy - 1, ix]) / (2.0 * h)
    dw = 0.5 * (dx - 1j * dy)
    dwbar = 0.5 * (dx + 1j * dy)
    if abs(dw) < 1e-12:
        raise DegeneratePointError(f"|dh/dw| degenerate at {w}", point=w)
    return float(abs(dwbar / dw))


def pde_residual_central(qc: QCMap, region_radius: float | None = None) -> float:
    """Independent residual ||d-bar h - mu dh||_L2 by centered differences,
    restricted to |w| <= region_radius (default: half-width - 0.25)."""
    spec = qc.spec
    if region_radius is None:
        region_radius = spec.half_width - 0.25
    dw, dwbar = central_derivatives(qc.h)
    res = dwbar.values - qc.mu_source.mu.values * dw.values
    mask = np.abs(spec.nodes()) <= region_radius
    return float(np.sqrt(np.sum(np.abs(res[mask]) ** 2)) * spec.spacing)


def p_max(kappa: float) -> float:
    """Critical integrability exponent 1 + 1/kappa (convention; -> inf as kappa -> 0)."""
    if not (0.0 <= kappa < 1.0):
        raise ValidationError(f"kappa must be in [0, 1), got {kappa}")
    if kappa == 0.0:
        return math.inf
    return 1.0 + 1.0 / kappa
