"""Built-in motion families and dilatation coefficients used by the checks,
the pipeline, and the CLI.

Formula families:
  product          phi_alpha(z) = alpha                     (horizontal leaves)
  linear           phi_alpha(z) = alpha (1 + z/2)           (conformal holonomy)
  antiholomorphic  phi_alpha(z) = alpha + z conj(alpha)     (mu^z = z, Schwarz-sharp)
  quadratic        phi_alpha(z) = alpha + a z alpha conj(alpha)

Synthetic family:
  bump             the lamination generated by the principal solutions of
                   mu^z = z m(w), m a fixed asymmetric compactly supported
                   bump profile.  Its projection traces and mollification
                   sweeps are genuinely nontrivial, unlike every rotationally
                   symmetric formula family.

Dilatation coefficients for the solver CLI:
  zero, radial-stretch:K=<K>, disk:k=<re[,im]>, bump-mu:amp=<a>
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .approximation import SeriesHolonomy
from .beltrami import BeltramiField
from .errors import ValidationError
from .field_ops import ComplexField, GridSpec, disk_indicator
from .motion import FormulaMotion, HolomorphicMotion

_DEFAULT_TAU = (0.3 + 0j, -0.2 + 0.25j, 0.1 - 0.35j, -0.4 - 0.1j, 0.45j)
_SMALL_TAU = (0.25 + 0j, -0.15 + 0.2j, 0.1 - 0.3j, -0.3 - 0.05j, 0.35j)


def product_family(tau=_DEFAULT_TAU) -> FormulaMotion:
    return FormulaMotion("alpha", tau, epsilon_bound=0.5)


def linear_family(tau=_DEFAULT_TAU) -> FormulaMotion:
    return FormulaMotion("alpha*(1 + z/2)", tau, epsilon_bound=0.3)


def antiholomorphic_family(tau=_DEFAULT_TAU) -> FormulaMotion:
    return FormulaMotion("alpha + z*conj(alpha)", tau, epsilon_bound=0.05)


def quadratic_family(tau=_SMALL_TAU, a: float = 0.5) -> FormulaMotion:
    return FormulaMotion(f"alpha + {a}*z*alpha*conj(alpha)", tau, epsilon_bound=0.5)


def bump_profile(spec: GridSpec | None = None) -> BeltramiField:
    """The fixed asymmetric profile m(w): two polynomial bumps off center."""
    spec = spec or GridSpec()
    W = spec.nodes()

    def pbump(center, radius, amp):
        s = np.abs(W - center) ** 2 / radius ** 2
        return amp * np.where(s < 1.0, (1.0 - s) ** 2, 0.0)

    vals = pbump(0.25, 0.45, 0.35) + 1j * pbump(-0.3j, 0.4, 0.2)
    field = ComplexField(spec, vals)
    return BeltramiField(field, kappa_bound=field.max_abs())


class SyntheticBeltramiMotion(HolomorphicMotion):
    """Leaves z -> h^{0,z}(beta) tabulated from the power-series holonomy of a
    separable fiber coefficient mu^z = z m(w)."""

    def __init__(self, profile: BeltramiField, tau, epsilon_bound: float):
        super().__init__(tau, epsilon_bound, global_flag=True)
        self.fiber_profile = profile
        self._series = SeriesHolonomy(profile)

    def phi(self, alpha, z):
        a = np.asarray(alpha, dtype=np.complex128)
        zz = np.asarray(z, dtype=np.complex128)
        shape = np.broadcast_shapes(a.shape, zz.shape)
        a_b = np.broadcast_to(a, shape).astype(np.complex128)
        z_b = np.broadcast_to(zz, shape)
        return self._series.forward(a_b, z_b)

    def leaf_derivative(self, alpha, z, step: float = 1e-5):
        a = np.asarray(alpha, dtype=np.complex128)
        zz = np.asarray(z, dtype=np.complex128)
        shape = np.broadcast_shapes(a.shape, zz.shape)
        a_b = np.broadcast_to(a, shape).astype(np.complex128)
        z_b = np.broadcast_to(zz, shape)
        return self._series.dz_forward(a_b, z_b)


@lru_cache(maxsize=4)
def _bump_motion_cached(half_width: float, n: int) -> SyntheticBeltramiMotion:
    profile = bump_profile(GridSpec(half_width, n))
    tau = (0j, 0.3 + 0j, -0.25 + 0.2j, 0.15 - 0.3j, -0.35j)
    return SyntheticBeltramiMotion(profile, tau, epsilon_bound=0.3)


def bump_family(spec: GridSpec | None = None) -> SyntheticBeltramiMotion:
    spec = spec or GridSpec()
    return _bump_motion_cached(spec.half_width, spec.n)


MOTION_FAMILIES = {
    "product": product_family,
    "linear": linear_family,
    "antiholomorphic": antiholomorphic_family,
    "quadratic": quadratic_family,
}


def motion_by_name(name: str, spec: GridSpec | None = None) -> HolomorphicMotion:
    """Resolve 'family:<name>' strings; 'bump' needs a grid for its profile."""
    if name == "bump":
        return bump_family(spec)
    if name in MOTION_FAMILIES:
        return MOTION_FAMILIES[name]()
    raise ValidationError(
        f"unknown built-in family {name!r}; choose from "
        f"{sorted(MOTION_FAMILIES) + ['bump']}")


def builtin_families(spec: GridSpec | None = None) -> dict:
    """All built-in motions keyed by name (used by the check sweeps)."""
    fams = {name: build() for name, build in MOTION_FAMILIES.items()}
    fams["bump"] = bump_family(spec)
    return fams


# ---------------------------------------------------------------------------
# dilatation coefficients for the solver
# ---------------------------------------------------------------------------

def radial_stretch_mu(spec: GridSpec, K: float = 2.0) -> BeltramiField:
    """mu = k w/conj(w) on the unit disk with k = (K-1)/(K+1); the principal
    solution is w |w|^(K-1) inside the disk and the identity outside."""
    if K <= 1.0:
        raise ValidationError(f"radial stretch needs K > 1, got {K}")
    k = (K - 1.0) / (K + 1.0)
    W = spec.nodes()
    cover = disk_indicator(spec).values.real
    with np.errstate(invalid="ignore", divide="ignore"):
        phase = np.where(W == 0, 0.0, W / np.where(W == 0, 1.0, np.conj(W)))
    vals = k * phase * cover
    return BeltramiField(ComplexField(spec, vals), kappa_bound=k)


def radial_stretch_solution(spec: GridSpec, K: float = 2.0) -> ComplexField:
    W = spec.nodes()
    R = np.abs(W)
    return ComplexField(spec, np.where(R <= 1.0, W * R ** (K - 1.0), W))


def constant_disk_mu(spec: GridSpec, k: complex) -> BeltramiField:
    """mu = k on the unit disk; principal solution w + k conj(w) inside,
    w + k/w outside."""
    if abs(k) >= 1.0:
        raise ValidationError(f"|k| must be < 1, got {abs(k)}")
    cover = disk_indicator(spec).values.real
    return BeltramiField(ComplexField(spec, k * cover), kappa_bound=abs(k))


def constant_disk_solution(spec: GridSpec, k: complex) -> ComplexField:
    W = spec.nodes()
    R = np.abs(W)
    inside = W + k * np.conj(W)
    with np.errstate(divide="ignore", invalid="ignore"):
        outside = W + k / np.where(W == 0, 1.0, W)
    return ComplexField(spec, np.where(R <= 1.0, inside, outside))


def mu_by_name(name: str, spec: GridSpec):
    """Parse a solver input name; returns (field, oracle_or_None).

    Accepted: "zero", "radial-stretch:K=<float>", "disk:k=<re>[,<im>]",
    "bump-mu:amp=<float>".
    """
    if name == "zero":
        return BeltramiField.zero(spec), ComplexField(spec, spec.nodes())
    if name.startswith("radial-stretch:"):
        params = _parse_params(name.split(":", 1)[1])
        K = float(params.get("K", 2.0))
        return radial_stretch_mu(spec, K), radial_stretch_solution(spec, K)
    if name.startswith("disk:"):
        params = _parse_params(name.split(":", 1)[1])
        raw = params.get("k", "0.3")
        parts = [float(t) for t in raw.split(",")]
        k = complex(parts[0], parts[1] if len(parts) > 1 else 0.0)
        return constant_disk_mu(spec, k), constant_disk_solution(spec, k)
    if name.startswith("bump-mu"):
        params = _parse_params(name.split(":", 1)[1]) if ":" in name else {}
        amp = float(params.get("amp", 1.0))
        base = bump_profile(spec)
        vals = base.mu.values * amp
        return BeltramiField(ComplexField(spec, vals),
                             kappa_bound=min(0.999, base.kappa_bound * abs(amp))), None
    raise ValidationError(
        f"unknown coefficient {name!r}; use zero, radial-stretch:K=..., "
        f"disk:k=..., bump-mu:amp=..., or a CSV path")


def _parse_params(text: str) -> dict:
    out = {}
    for item in text.split(";"):
        if not item:
            continue
        if "=" not in item:
            raise ValidationError(f"malformed parameter {item!r} (expected key=value)")
        key, val = item.split("=", 1)
        out[key.strip()] = val.strip()
    return out
