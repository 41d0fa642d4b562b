"""Lamination structure over a motion: straightening chart, directed (1,0)
form, leafwise function spaces with W^{1,p} norms, and a simplified ambient
C^1 extension (inverse-distance blend over the finite transversal, then a
mollification in the transverse variable).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .motion import HolomorphicMotion, fiber_inverse

_FD_STEP = 1e-5


@dataclass(frozen=True)
class Lamination:
    """A holomorphic motion together with a fiber sampling resolution."""

    motion: HolomorphicMotion
    fiber_step: float = 0.05     # spacing of the z sample grid per leaf

    def __post_init__(self):
        if not (0 < self.fiber_step < 1):
            raise ValidationError(f"fiber_step must be in (0,1), got {self.fiber_step}")

    @property
    def tau(self) -> np.ndarray:
        return self.motion.tau

    def z_grid(self, radius: float = 0.95) -> tuple[np.ndarray, float]:
        """Midpoint-rule z samples covering D(0, radius): cell centers of a
        square mesh of pitch fiber_step; returns (points, cell area)."""
        s = self.fiber_step
        g = np.arange(-radius + s / 2, radius, s)
        ZX, ZY = np.meshgrid(g, g)
        Z = ZX + 1j * ZY
        return Z, s * s


class StraighteningChart:
    """Forward chart (z,w) -> (z, fiber-0 point of the leaf through (z,w)) and
    its inverse (z, a) -> (z, phi on the leaf through (0,a))."""

    def __init__(self, lam: Lamination):
        if not lam.motion.global_flag:
            raise DomainError("straightening requires a globally defined motion")
        self.lam = lam

    def forward(self, z, w):
        motion = self.lam.motion
        alpha = fiber_inverse(motion, z, w)
        return motion.phi(alpha, np.zeros(np.shape(alpha), dtype=np.complex128)
                          if np.shape(alpha) else 0j)

    def inverse(self, z, a):
        motion = self.lam.motion
        alpha = fiber_inverse(motion, 0j, a)
        zz = np.broadcast_to(np.asarray(z, dtype=np.complex128), np.shape(alpha)) \
            if np.shape(alpha) else z
        return motion.phi(alpha, zz)

    def roundtrip_error(self, z, w_points) -> float:
        w = np.asarray(w_points, dtype=np.complex128)
        back = self.inverse(z, self.forward(z, w))
        return float(np.max(np.abs(back - w)))


def straighten(lam: Lamination) -> StraighteningChart:
    return StraighteningChart(lam)


@dataclass(frozen=True)
class DirectedFormValue:
    """dl = dw - phi'(z) dz at a marked leaf point, normalized so dl(0,1)=1."""

    z: complex
    alpha: complex
    slope: complex             # phi'_alpha(z)

    @property
    def dz_coefficient(self) -> complex:
        return -self.slope

    @property
    def dw_coefficient(self) -> complex:
        return 1.0 + 0j

    def apply(self, tangent_z: complex, tangent_w: complex) -> complex:
        return self.dz_coefficient * tangent_z + self.dw_coefficient * tangent_w


def directed_form(lam: Lamination, z, alpha) -> DirectedFormValue:
    slope = complex(np.asarray(lam.motion.leaf_derivative(alpha, z)).flat[0])
    return DirectedFormValue(complex(z), complex(alpha), slope)


# ---------------------------------------------------------------------------
# leaf functions
# ---------------------------------------------------------------------------

class LeafFunction:
    """Samples of a function on the lamination over (z grid) x tau, together
    with the leafwise gradient samples (d/dx, d/dy in the leaf parameter)."""

    def __init__(self, lam: Lamination, z_points: np.ndarray, values: np.ndarray,
                 grad_x: np.ndarray, grad_y: np.ndarray, smoothness: str = "C1",
                 cell_area: float | None = None):
        self.lam = lam
        self.z_points = np.asarray(z_points, dtype=np.complex128)
        self.values = np.asarray(values, dtype=np.complex128)
        self.grad_x = np.asarray(grad_x, dtype=np.complex128)
        self.grad_y = np.asarray(grad_y, dtype=np.complex128)
        self.smoothness = smoothness
        ntau = lam.tau.size
        expected = self.z_points.shape + (ntau,)
        for name, arr in (("values", self.values), ("grad_x", self.grad_x),
                          ("grad_y", self.grad_y)):
            if arr.shape != expected:
                raise ValidationError(f"{name} must have shape {expected}, got {arr.shape}")
        if cell_area is None:
            cell_area = lam.fiber_step ** 2
        self.cell_area = float(cell_area)

    def gradient_magnitude(self) -> np.ndarray:
        return np.sqrt(np.abs(self.grad_x) ** 2 + np.abs(self.grad_y) ** 2)

    def scaled(self, c) -> "LeafFunction":
        return LeafFunction(self.lam, self.z_points, c * self.values,
                            c * self.grad_x, c * self.grad_y, self.smoothness,
                            self.cell_area)

    def plus(self, other: "LeafFunction") -> "LeafFunction":
        if other.values.shape != self.values.shape:
            raise ValidationError("leaf functions sampled on different grids")
        return LeafFunction(self.lam, self.z_points, self.values + other.values,
                            self.grad_x + other.grad_x, self.grad_y + other.grad_y,
                            self.smoothness, self.cell_area)


def leaf_function_from_callable(lam: Lamination, g, radius: float = 1.0,
                                smoothness: str = "C1") -> LeafFunction:
    """Sample g(z, alpha) on the lamination's z grid x tau; gradients by
    centered differences in the leaf parameter."""
    Z, area = lam.z_grid(radius)
    tau = lam.tau
    vals = np.empty(Z.shape + (tau.size,), dtype=np.complex128)
    gx = np.empty_like(vals)
    gy = np.empty_like(vals)
    d = _FD_STEP
    for k, a in enumerate(tau):
        vals[..., k] = g(Z, a)
        gx[..., k] = (g(Z + d, a) - g(Z - d, a)) / (2.0 * d)
        gy[..., k] = (g(Z + 1j * d, a) - g(Z - 1j * d, a)) / (2.0 * d)
    return LeafFunction(lam, Z, vals, gx, gy, smoothness, area)


def extend_constant_along_leaves(chi, lam: Lamination, radius: float = 1.0) -> LeafFunction:
    """f(z, alpha) = chi(alpha); leafwise gradient vanishes by construction."""
    Z, area = lam.z_grid(radius)
    tau = lam.tau
    vals = np.empty(Z.shape + (tau.size,), dtype=np.complex128)
    for k, a in enumerate(tau):
        vals[..., k] = complex(chi(a))
    zeros = np.zeros_like(vals)
    return LeafFunction(lam, Z, vals, zeros, zeros, "C1", area)


def w1p_norm(f: LeafFunction, p: float, delta: float = 0.1) -> float:
    """sup norm plus the sup over leaves of the leafwise L^p gradient norm,
    gradients integrated over the compact sub-disk D(0, 1-delta)."""
    if p <= 1:
        raise ValidationError(f"W^(1,p) norm requires p > 1, got {p}")
    if f.values.size == 0:
        raise ValidationError("empty sample set")
    mask = np.abs(f.z_points) <= 1.0 - delta
    if not mask.any():
        raise ValidationError("no z samples inside the compact sub-disk")
    sup = float(np.max(np.abs(f.values)))
    gm = f.gradient_magnitude()
    worst = 0.0
    for k in range(f.lam.tau.size):
        lp = float((np.sum(gm[..., k][mask] ** p) * f.cell_area) ** (1.0 / p))
        worst = max(worst, lp)
    return sup + worst


# ---------------------------------------------------------------------------
# ambient extension
# ---------------------------------------------------------------------------

@dataclass
class AmbientExtension:
    """Inverse-distance-squared blend over tau (exact on tau), followed by a
    midpoint mollification of radius `smoothing` in the transverse variable."""

    lam: Lamination
    leaf_values: dict            # alpha index -> callable z -> value
    smoothing: float
    _stencil: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.smoothing <= 0:
            raise ValidationError(f"smoothing radius must be positive, got {self.smoothing}")
        # 9x9 midpoint stencil of the polynomial bump over the smoothing disk
        n = 9
        t = (np.arange(n) + 0.5) / n * 2.0 - 1.0
        OX, OY = np.meshgrid(t, t)
        r2 = OX ** 2 + OY ** 2
        wts = np.where(r2 < 1.0, (1.0 - r2) ** 2, 0.0)
        wts /= wts.sum()
        object.__setattr__(self, "_stencil",
                           ((OX + 1j * OY) * self.smoothing, wts))

    def blend_at(self, z, alpha) -> complex:
        """Pre-mollification value: exact on tau."""
        tau = self.lam.tau
        d2 = np.abs(tau - alpha) ** 2
        k = int(np.argmin(d2))
        if d2[k] < 1e-28:
            return complex(self.leaf_values[k](z))
        w = 1.0 / d2
        w /= w.sum()
        return complex(sum(w[i] * self.leaf_values[i](z) for i in range(tau.size)))

    def at(self, z, alpha) -> complex:
        offsets, wts = self._stencil
        acc = 0j
        for off, wt in zip(offsets.ravel(), wts.ravel()):
            acc += wt * self.blend_at(z, alpha + off)
        return acc


def c1_extend(f: LeafFunction, smoothing: float) -> AmbientExtension:
    """Continuous ambient extension of a leafwise function.

    The blend reproduces f on tau exactly before mollification and within
    O(smoothing) after; it is linear in f and C^1 in z wherever f is.
    """
    lam = f.lam
    z_flat = f.z_points.ravel()
    leaf_values = {}
    for k in range(lam.tau.size):
        vals_k = f.values[..., k].ravel()

        def eval_k(z, _vals=vals_k):
            idx = int(np.argmin(np.abs(z_flat - z)))
            return _vals[idx]

        leaf_values[k] = eval_k
    return AmbientExtension(lam, leaf_values, smoothing)
