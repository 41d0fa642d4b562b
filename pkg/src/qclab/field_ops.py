"""Complex-valued fields on a periodic square grid and the spectral Cauchy and
Beurling transforms that drive the Beltrami solver.

Two transform modes are provided:

* ``mode="free"`` (default): truncated-kernel multipliers evaluated on an
  internally padded grid.  For a field supported in |w| <= L(pad - sqrt(2))
  the result agrees with the plane transforms on the cell, so closed forms
  like C(1_D) = conj(w) / 1/w are reproduced up to discretization.
* ``mode="periodic"``: the bare lattice multipliers -2i/xi and conj(xi)/xi on
  the cell itself.  This variant is an exact L2 isometry on mean-zero fields
  (plain Parseval) but sees periodic images of the data.

Both set the zero-frequency component to 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage
from scipy.special import j0, j1

from .errors import ValidationError

SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """N x N samples of the periodic cell [-L, L)^2, spacing h = 2L/N."""

    half_width: float = 2.0
    n: int = 256

    def __post_init__(self):
        if self.n < 64 or (self.n & (self.n - 1)) != 0:
            raise ValidationError(f"grid resolution must be a power of two >= 64, got {self.n}")
        if self.half_width < 2.0:
            raise ValidationError(f"grid half-width must be >= 2, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    def nodes(self) -> np.ndarray:
        """Complex coordinates w at the grid nodes, indexed [iy, ix]."""
        return _nodes(self.half_width, self.n)

    def node_index(self, w: complex) -> tuple[int, int]:
        """(iy, ix) of the node nearest to w."""
        ix = int(round((w.real + self.half_width) / self.spacing))
        iy = int(round((w.imag + self.half_width) / self.spacing))
        return iy, ix

    def max_support_radius(self) -> float:
        """Largest support radius the free-space transforms accept."""
        return self.half_width * (3.0 - math.sqrt(2.0)) - 2.0 * self.spacing


@lru_cache(maxsize=8)
def _nodes(half_width: float, n: int) -> np.ndarray:
    x = -half_width + (2.0 * half_width / n) * np.arange(n)
    X, Y = np.meshgrid(x, x)
    W = X + 1j * Y
    W.flags.writeable = False
    return W


class ComplexField:
    """Immutable complex samples on a grid."""

    __slots__ = ("spec", "values")

    def __init__(self, spec: GridSpec, values: np.ndarray):
        values = np.ascontiguousarray(values, dtype=np.complex128)
        if values.shape != (spec.n, spec.n):
            raise ValidationError(
                f"field shape {values.shape} does not match grid {spec.n}x{spec.n}")
        if not np.all(np.isfinite(values.view(np.float64))):
            raise ValidationError("field contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "values", values)

    def __setattr__(self, *_):
        raise AttributeError("ComplexField is immutable")

    @classmethod
    def zeros(cls, spec: GridSpec) -> "ComplexField":
        return cls(spec, np.zeros((spec.n, spec.n), dtype=np.complex128))

    @classmethod
    def from_function(cls, spec: GridSpec, fn) -> "ComplexField":
        return cls(spec, np.asarray(fn(spec.nodes()), dtype=np.complex128))

    def support_radius(self, tol: float = SUPPORT_TOL) -> float:
        mask = np.abs(self.values) > tol
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.spec.nodes()[mask])))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __add__(self, other):
        self._check_same(other)
        return ComplexField(self.spec, self.values + other.values)

    def __sub__(self, other):
        self._check_same(other)
        return ComplexField(self.spec, self.values - other.values)

    def __mul__(self, scalar):
        return ComplexField(self.spec, self.values * scalar)

    __rmul__ = __mul__

    def _check_same(self, other):
        if self.spec != other.spec:
            raise ValidationError("fields live on different grids")


@dataclass(frozen=True)
class DiskRegion:
    center: complex = 0j
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValidationError("disk region radius must be positive")

    def mask(self, spec: GridSpec) -> np.ndarray:
        return np.abs(spec.nodes() - self.center) <= self.radius


# ---------------------------------------------------------------------------
# multipliers
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _frequencies(n: int, half_width: float) -> np.ndarray:
    k = np.fft.fftfreq(n, d=2.0 * half_width / n) * 2.0 * np.pi
    KX, KY = np.meshgrid(k, k)
    XI = KX + 1j * KY
    XI.flags.writeable = False
    return XI


@lru_cache(maxsize=16)
def _periodic_multiplier(n: int, half_width: float, which: str) -> np.ndarray:
    XI = _frequencies(n, half_width)
    M = np.zeros_like(XI)
    nz = XI != 0
    if which == "cauchy":
        M[nz] = -2j / XI[nz]
    else:
        M[nz] = np.conj(XI[nz]) / XI[nz]
    M.flags.writeable = False
    return M


@lru_cache(maxsize=16)
def _free_multiplier(n: int, half_width: float, pad: int, which: str) -> np.ndarray:
    """Multiplier of the radius-T truncated kernel on the pad-enlarged cell."""
    T = pad * half_width
    XI = _frequencies(pad * n, pad * half_width)
    R = np.abs(XI)
    M = np.zeros_like(XI)
    nz = R > 0
    x = R[nz] * T
    if which == "cauchy":
        M[nz] = (-2j / XI[nz]) * (1.0 - j0(x))
    else:
        M[nz] = (np.conj(XI[nz]) / XI[nz]) * (1.0 - 2.0 * j1(x) / x)
    M.flags.writeable = False
    return M


def _check_support(field: ComplexField, max_support: float | None) -> float:
    spec = field.spec
    if max_support is None:
        max_support = 1.0 + 2.0 * spec.spacing
    rs = field.support_radius()
    if rs > max_support:
        raise ValidationError(
            f"support violation: |values| > {SUPPORT_TOL:g} out to radius {rs:.4f}, "
            f"beyond the allowed {max_support:.4f}")
    return rs


def _apply_free(field: ComplexField, which: str,
                max_support: float | None = None) -> ComplexField:
    spec = field.spec
    L, n = spec.half_width, spec.n
    rs = _check_support(field, max_support)
    # pad 2 handles supports up to L(2-sqrt2); pad 3 up to L(3-sqrt2)
    if rs <= L * (2.0 - math.sqrt(2.0)) - 2.0 * spec.spacing:
        pad = 2
    elif rs <= spec.max_support_radius():
        pad = 3
    else:
        raise ValidationError(
            f"support radius {rs:.4f} exceeds the transform bound "
            f"{spec.max_support_radius():.4f}; the input must vanish near the cell boundary")
    big = np.zeros((pad * n, pad * n), dtype=np.complex128)
    off = (pad - 1) * n // 2
    big[off:off + n, off:off + n] = field.values
    out = np.fft.ifft2(_free_multiplier(n, L, pad, which) * np.fft.fft2(big))
    return ComplexField(spec, out[off:off + n, off:off + n])


def _apply_periodic(field: ComplexField, which: str,
                    max_support: float | None = None) -> ComplexField:
    spec = field.spec
    _check_support(field, max_support)
    M = _periodic_multiplier(spec.n, spec.half_width, which)
    return ComplexField(spec, np.fft.ifft2(M * np.fft.fft2(field.values)))


def cauchy_transform(field: ComplexField, mode: str = "free",
                     max_support: float | None = None) -> ComplexField:
    """Solve d/d(conj w) C(f) = f with decay away from the data.

    The input must be compactly supported near the unit disk: the default
    precondition is support radius <= 1 + 2h; callers with provably wider
    data (mollified coefficients) pass max_support explicitly.

    mode="free" matches the plane transform on the cell; mode="periodic" is
    the bare cell multiplier (zero mode killed, so it inverts d-bar on the
    mean-free part only).
    """
    if mode == "free":
        return _apply_free(field, "cauchy", max_support)
    if mode == "periodic":
        return _apply_periodic(field, "cauchy", max_support)
    raise ValidationError(f"unknown transform mode {mode!r}")


def beurling_transform(field: ComplexField, mode: str = "free",
                       max_support: float | None = None) -> ComplexField:
    """d/dw of the Cauchy transform; multiplier conj(xi)/xi (0 at xi = 0)."""
    if mode == "free":
        return _apply_free(field, "beurling", max_support)
    if mode == "periodic":
        return _apply_periodic(field, "beurling", max_support)
    raise ValidationError(f"unknown transform mode {mode!r}")


# ---------------------------------------------------------------------------
# quadrature and difference operators
# ---------------------------------------------------------------------------

def lp_norm(field: ComplexField, p: float, region: DiskRegion | None = None) -> float:
    """Midpoint-rule approximation of (integral over region of |f|^p dA)^(1/p)."""
    if p < 1:
        raise ValidationError(f"lp_norm requires p >= 1, got {p}")
    spec = field.spec
    if region is None:
        vals = field.values
    else:
        if abs(region.center) + region.radius > spec.half_width + SUPPORT_TOL:
            raise ValidationError("region is not contained in the grid cell")
        vals = field.values[region.mask(spec)]
    if vals.size == 0:
        return 0.0
    return float((np.sum(np.abs(vals) ** p) * spec.spacing ** 2) ** (1.0 / p))


def l2_norm(field: ComplexField) -> float:
    return float(np.linalg.norm(field.values) * field.spec.spacing)


def central_derivatives(field: ComplexField) -> tuple[ComplexField, ComplexField]:
    """(d/dw, d/d conj(w)) by centered differences with periodic wrap.

    The wrap rows/columns are only meaningful for fields that decay at the
    cell boundary; callers restrict comparisons to the interior.
    """
    v = field.values
    h = field.spec.spacing
    dx = (np.roll(v, -1, axis=1) - np.roll(v, 1, axis=1)) / (2.0 * h)
    dy = (np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)) / (2.0 * h)
    dw = ComplexField(field.spec, 0.5 * (dx - 1j * dy))
    dwbar = ComplexField(field.spec, 0.5 * (dx + 1j * dy))
    return dw, dwbar


def disk_indicator(spec: GridSpec, radius: float = 1.0, center: complex = 0j,
                   antialias: bool = True, subsamples: int = 16) -> ComplexField:
    """Indicator of a disk, cell-averaged on boundary cells when antialias is set.

    Pointwise sampling of an indicator carries O(sqrt(h)) L2 error which the
    (isometric) Beurling transform reproduces verbatim in its output; the
    cell average is the honest grid quadrature of the set.
    """
    W = spec.nodes()
    R = np.abs(W - center)
    vals = (R <= radius).astype(np.float64)
    if antialias:
        h = spec.spacing
        jj, ii = np.nonzero(np.abs(R - radius) <= 1.5 * h)
        if jj.size:
            off = (np.arange(subsamples) + 0.5) / subsamples - 0.5
            OX, OY = np.meshgrid(off * h, off * h)
            for j, i in zip(jj, ii):
                w = W[j, i]
                rr = np.hypot(w.real - center.real + OX, w.imag - center.imag + OY)
                vals[j, i] = np.mean(rr <= radius)
    return ComplexField(spec, vals.astype(np.complex128))


class GridSampler:
    """Cubic-spline evaluation of a field at off-node points.

    Spline coefficients are prefiltered once; evaluation clamps to the cell.
    """

    def __init__(self, field: ComplexField, order: int = 3):
        self.spec = field.spec
        self.order = order
        if order > 1:
            self._re = ndimage.spline_filter(field.values.real, order=order)
            self._im = ndimage.spline_filter(field.values.imag, order=order)
        else:
            self._re = field.values.real
            self._im = field.values.imag

    def __call__(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.complex128)
        h = self.spec.spacing
        L = self.spec.half_width
        ix = (pts.real + L) / h
        iy = (pts.imag + L) / h
        coords = np.stack([iy.ravel(), ix.ravel()])
        re = ndimage.map_coordinates(self._re, coords, order=self.order,
                                     mode="nearest", prefilter=False)
        im = ndimage.map_coordinates(self._im, coords, order=self.order,
                                     mode="nearest", prefilter=False)
        return (re + 1j * im).reshape(pts.shape)
